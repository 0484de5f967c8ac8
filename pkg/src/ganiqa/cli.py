"""Command-line interface orchestrating the full pipeline."""

import json
import sys

import click
import numpy as np
import torch

from . import pipeline
from .config import RunConfig
from .data import read_manifest
from .errors import GaniqaError
from .regression import load_metric, save_metric
from .stats import cross_validate
from .training import TrainConfig, load_checkpoint, save_checkpoint, train_inpainter


def _load_config(config_path, seed, **overrides):
    cfg = RunConfig.from_json(config_path) if config_path else RunConfig()
    if seed is not None:
        cfg.seed = seed
    for key, val in overrides.items():
        if val is not None:
            setattr(cfg, key, val)
    return cfg


def _fail(exc):
    click.echo(f"error: {exc}", err=True)
    sys.exit(1)


@click.group()
def main():
    """No-reference quality assessment of DIBR-synthesized views."""


@main.command("prepare-masks")
@click.option("--corpus-dir", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--mask-types", default="1,2,3", show_default=True, help="comma-separated subset of 1,2,3")
@click.option("--out-manifest", required=True, type=click.Path())
@click.option("--config", "config_path", type=click.Path(exists=True))
@click.option("--seed", type=int)
def cmd_prepare_masks(corpus_dir, mask_types, out_manifest, config_path, seed):
    """Generate hole masks for a corpus and emit a training manifest."""
    try:
        types = [int(t) for t in mask_types.split(",") if t.strip()]
    except ValueError:
        raise click.UsageError(f"bad --mask-types value {mask_types!r}")
    if not types or any(t not in (1, 2, 3) for t in types):
        raise click.UsageError(f"--mask-types must be a subset of 1,2,3, got {mask_types!r}")
    cfg = _load_config(config_path, seed)
    try:
        records = pipeline.prepare_masks(corpus_dir, types, out_manifest, cfg)
    except GaniqaError as exc:
        _fail(exc)
    click.echo(f"wrote {len(records)} (image, mask) pairs to {out_manifest}", err=True)


@main.command("train-inpainter")
@click.option("--manifest", required=True, type=click.Path())
@click.option("--out-checkpoint", required=True, type=click.Path())
@click.option("--config", "config_path", type=click.Path(exists=True))
@click.option("--epochs", type=int)
@click.option("--seed", type=int)
@click.option("--jobs", default=1, show_default=True)
def cmd_train_inpainter(manifest, out_checkpoint, config_path, epochs, seed, jobs):
    """Train the adversarial inpainter on an (image, mask) manifest."""
    cfg = _load_config(config_path, seed, epochs=epochs)
    torch.set_num_threads(max(1, jobs))
    try:
        pairs = pipeline.load_training_pairs(manifest)
        tc = TrainConfig(
            learning_rate=cfg.learning_rate,
            lam=cfg.lam,
            batch_size=cfg.batch_size,
            epochs=cfg.epochs,
            seed=cfg.seed,
            arch_id=cfg.arch_id,
            input_size=cfg.input_size,
            bottleneck=cfg.bottleneck,
            base_channels=cfg.base_channels,
        )
        ckpt = train_inpainter(
            pairs, tc, log_fn=lambda m: click.echo(json.dumps(m, sort_keys=True), err=True)
        )
        save_checkpoint(ckpt, out_checkpoint)
    except (GaniqaError, OSError) as exc:
        _fail(exc)
    click.echo(f"checkpoint written to {out_checkpoint}", err=True)


@main.command("build-metric")
@click.option("--checkpoint", required=True, type=click.Path(exists=True))
@click.option("--manifest", required=True, type=click.Path(exists=True))
@click.option("--out-bundle", required=True, type=click.Path())
@click.option("--config", "config_path", type=click.Path(exists=True))
@click.option("--n-words", type=int)
@click.option("--seed", type=int)
def cmd_build_metric(checkpoint, manifest, out_bundle, config_path, n_words, seed):
    """Fit the logit norm, codebook, and SVR on the validation split."""
    cfg = _load_config(config_path, seed, n_words=n_words)
    try:
        ckpt = load_checkpoint(checkpoint)
        records, plan = pipeline.split_manifest(manifest, cfg.seed)
        val_records = [r for r in records if r.key in plan.validation_ids]
        images = {r.key: pipeline.load_record_image(manifest, r) for r in val_records}
        metric = pipeline.build_metric(ckpt, val_records, images, cfg)
        save_metric(metric, out_bundle)
    except GaniqaError as exc:
        _fail(exc)
    click.echo(f"metric bundle written to {out_bundle}", err=True)


@main.command("score")
@click.option("--bundle", required=True, type=click.Path(exists=True))
@click.option("--image", "image_path", type=click.Path(exists=True))
@click.option("--manifest", type=click.Path(exists=True))
@click.option("--out", "out_path", type=click.Path())
def cmd_score(bundle, image_path, manifest, out_path):
    """Score one image or every record of a manifest ('path score' lines)."""
    if (image_path is None) == (manifest is None):
        raise click.UsageError("give exactly one of --image or --manifest")
    try:
        metric = load_metric(bundle)
        if image_path is not None:
            from .data import load_image

            lines = [f"{image_path} {metric.score_image(load_image(image_path)):.10f}"]
        else:
            scored = pipeline.score_manifest(metric, manifest)
            lines = [f"{key} {score:.10f}" for key, score in scored]
    except GaniqaError as exc:
        _fail(exc)
    text = "\n".join(lines) + "\n"
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        click.echo(text, nl=False)


@main.command("evaluate")
@click.option("--bundle", required=True, type=click.Path(exists=True))
@click.option("--manifest", required=True, type=click.Path(exists=True))
@click.option("--out-report", required=True, type=click.Path())
@click.option("--n-folds", type=int)
@click.option("--seed", type=int)
@click.option("--config", "config_path", type=click.Path(exists=True))
def cmd_evaluate(bundle, manifest, out_report, n_folds, seed, config_path):
    """Fold-based cross-validation of the metric on a scored manifest."""
    cfg = _load_config(config_path, seed, n_folds=n_folds)
    try:
        metric = load_metric(bundle)
        records, plan = pipeline.split_manifest(manifest, cfg.seed)
        eval_records = [r for r in records if r.key in plan.eval_ids]
        histograms = pipeline.encode_manifest(metric, manifest, eval_records)
        targets = {r.key: r.dmos for r in eval_records}
        report = cross_validate(
            eval_records,
            histograms,
            targets,
            n_folds=cfg.n_folds,
            seed=cfg.seed,
            config=cfg.to_dict(),
        )
        report.to_json(out_report)
    except GaniqaError as exc:
        _fail(exc)
    click.echo(
        f"median pcc={report.median_pcc:.4f} scc={report.median_scc:.4f} "
        f"rmse={report.median_rmse:.4f}",
        err=True,
    )


@main.command("benchmark")
@click.option("--bundle", required=True, type=click.Path(exists=True))
@click.option("--manifest", required=True, type=click.Path(exists=True))
@click.option("--out-report", type=click.Path())
@click.option("--repeats", default=3, show_default=True)
def cmd_benchmark(bundle, manifest, out_report, repeats):
    """Report wall-clock time normalized by the PSNR baseline."""
    try:
        metric = load_metric(bundle)
        result = pipeline.benchmark(metric, manifest, repeats=repeats)
    except GaniqaError as exc:
        _fail(exc)
    blob = json.dumps(result, indent=2, sort_keys=True)
    if out_report:
        with open(out_report, "w", encoding="utf-8") as fh:
            fh.write(blob + "\n")
    click.echo(blob)


if __name__ == "__main__":
    main()
