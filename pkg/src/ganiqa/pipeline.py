"""High-level orchestration: mask-dataset preparation, metric building from
a checkpoint, manifest scoring, and runtime benchmarking."""

import math
import time
from pathlib import Path

import numpy as np
from PIL import Image
from scipy.special import expit

from . import masks as mk
from .config import RunConfig
from .data import (
    ManifestRecord,
    load_image,
    make_split,
    read_manifest,
    resolve_image_path,
    rotate,
    write_manifest,
)
from .errors import EmptyCorpus, InvalidParam
from .patches import (
    BdwCodebook,
    LogitNormalizer,
    encode_histogram,
    extract_patches,
    patch_features,
    patch_logits,
)
from .regression import QualityRegressor, TrainedMetric
from .stats import normalized_time
from .training import psnr

IMAGE_SUFFIXES = (".png", ".bmp")
SEG_SUFFIX = "_seg.png"


def find_corpus_images(corpus_dir):
    """Corpus images, skipping segmentation label files."""
    corpus = Path(corpus_dir)
    return sorted(
        p
        for p in corpus.iterdir()
        if p.suffix.lower() in IMAGE_SUFFIXES and not p.name.endswith(SEG_SUFFIX)
    )


def load_segmentation(image_path):
    """Class-per-pixel labels stored as a grayscale sibling file, or None."""
    seg_path = Path(image_path).with_name(Path(image_path).stem + SEG_SUFFIX)
    if not seg_path.exists():
        return None
    with Image.open(seg_path) as im:
        return np.asarray(im.convert("L"), dtype=np.int64)


def prepare_masks(corpus_dir, mask_types, out_manifest, config=None):
    """Generate (image, mask) training pairs and write them as a manifest.

    Mask types 1 and 2 need a segmentation sibling ``<stem>_seg.png``;
    type 3 needs only the image. Masks are written next to the manifest.
    """
    config = config or RunConfig()
    images = find_corpus_images(corpus_dir)
    if not images:
        raise EmptyCorpus(f"no images under {corpus_dir}")
    for t in mask_types:
        if t not in (1, 2, 3):
            raise InvalidParam(f"unknown mask type {t}")

    out_manifest = Path(out_manifest)
    mask_dir = out_manifest.parent / "masks"
    mask_dir.mkdir(parents=True, exist_ok=True)
    records = []
    for img_path in images:
        img = load_image(img_path)
        seg = load_segmentation(img_path)
        produced = {}
        if 1 in mask_types and seg is not None:
            produced[1] = mk.mask_type1(seg, config.dilation_radius)
        if 2 in mask_types and seg is not None:
            base = produced.get(1, mk.mask_type1(seg, config.dilation_radius))
            produced[2] = mk.mask_type2(base, config.shift)
        if 3 in mask_types:
            h, w = img.shape[:2]
            labels = mk.slic_segment(
                img, n_segments=math.ceil(h * w / 300), compactness=config.compactness
            )
            for size_class in ("small", "medium"):
                try:
                    m3 = mk.mask_type3(
                        labels, size_class, rng_seed=config.seed, fraction=config.mask_fraction
                    )
                except mk.NoEligibleSegments:
                    continue
                produced[f"3-{size_class}"] = m3
        for tag, mask in produced.items():
            mask_name = f"{img_path.stem}_mask{tag}.png"
            mk.save_mask(mask, mask_dir / mask_name)
            try:
                rel_img = img_path.resolve().relative_to(out_manifest.parent.resolve())
            except ValueError:
                rel_img = img_path.resolve()
            records.append(
                ManifestRecord(
                    image_path=str(rel_img),
                    content_id=img_path.stem,
                    viewpoint_id="v0",
                    algorithm_id=f"mask{tag}",
                    dmos=0.0,
                    rotation=0,
                    extra={"mask_path": f"masks/{mask_name}"},
                )
            )
    write_manifest(records, out_manifest)
    return records


def load_training_pairs(manifest_path):
    """(image, mask) arrays from a mask-dataset manifest."""
    records = read_manifest(manifest_path)
    pairs = []
    for r in records:
        img = load_image(resolve_image_path(manifest_path, r))
        mask_path = Path(manifest_path).parent / r.extra["mask_path"]
        pairs.append((img, mk.load_mask(mask_path)))
    return pairs


def load_record_image(manifest_path, record):
    """Record's image with its manifest rotation applied."""
    img = load_image(resolve_image_path(manifest_path, record))
    return rotate(img, record.rotation)


def _encode_records(disc, images_by_key, stride=None):
    feats, logits, spans = [], [], {}
    for key, img in images_by_key.items():
        _, patches = extract_patches(img, disc.input_size, stride)
        start = sum(len(f) for f in feats)
        feats.append(patch_features(disc, patches))
        logits.append(patch_logits(disc, patches))
        spans[key] = (start, start + len(feats[-1]))
    return np.concatenate(feats), np.concatenate(logits), spans


def build_metric(checkpoint, records, images_by_key, config=None):
    """Fit logit normalization, the codebook, and the SVR on a validation set.

    ``records`` are validation manifest records keyed into ``images_by_key``.
    """
    config = config or RunConfig()
    disc = checkpoint.discriminator
    feats, logits, spans = _encode_records(disc, images_by_key, config.stride)

    norm = LogitNormalizer().fit(logits)
    codebook = BdwCodebook(n_words=config.n_words, seed=config.seed).fit(feats)

    histograms, targets = [], []
    for r in records:
        lo, hi = spans[r.key]
        assignments = codebook.predict(feats[lo:hi])
        hist = encode_histogram(
            assignments,
            config.n_words,
            selector=config.selector,
            probs=expit(logits[lo:hi]),
            normalized_logits=norm.transform(logits[lo:hi]),
            epsilon=config.epsilon,
        )
        histograms.append(hist)
        targets.append(r.dmos)
    svr = QualityRegressor(C=config.svr_c, tube_epsilon=config.svr_tube).fit(
        np.array(histograms), np.array(targets)
    )
    return TrainedMetric(
        checkpoint,
        norm,
        codebook,
        svr,
        selector=config.selector,
        epsilon=config.epsilon,
        stride=config.stride,
    )


def split_manifest(manifest_path, seed):
    """Read a manifest and return (records, SplitPlan)."""
    records = read_manifest(manifest_path)
    return records, make_split(records, seed)


def score_manifest(metric, manifest_path, records=None):
    """Score every record of a manifest; returns [(key, score)] in order."""
    if records is None:
        records = read_manifest(manifest_path)
    out = []
    for r in records:
        img = load_record_image(manifest_path, r)
        out.append((r.key, metric.score_image(img)))
    return out


def encode_manifest(metric, manifest_path, records=None):
    """Histogram per record key, for fold-based evaluation."""
    if records is None:
        records = read_manifest(manifest_path)
    return {r.key: metric.encode(load_record_image(manifest_path, r)) for r in records}


def benchmark(metric, manifest_path, records=None, repeats=3):
    """Wall-clock the metric against a PSNR baseline on the same images."""
    if records is None:
        records = read_manifest(manifest_path)
    t_metric = t_psnr = 0.0
    n = 0
    for r in records:
        img = load_record_image(manifest_path, r)
        shifted = np.clip(img + 1.0 / 255.0, 0.0, 1.0)
        for _ in range(repeats):
            t0 = time.perf_counter()
            metric.score_image(img)
            t_metric += time.perf_counter() - t0
            t0 = time.perf_counter()
            psnr(img, shifted)
            t_psnr += time.perf_counter() - t0
            n += 1
    t_metric /= n
    t_psnr /= n
    return {
        "t_metric_seconds": t_metric,
        "t_psnr_seconds": t_psnr,
        "t_normalized": normalized_time(t_metric, t_psnr),
        "images": len(records),
        "repeats": repeats,
    }
