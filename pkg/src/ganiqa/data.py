"""Image IO, score manifests, rotation augmentation, and split planning.

A manifest is a UTF-8 text file with one JSON object per line. Required keys:
``image_path`` (relative to the manifest file), ``content_id``,
``viewpoint_id``, ``algorithm_id``, ``dmos``, ``rotation``. Extra keys
(``mask_path`` for inpainter training pairs) are preserved.
"""

import json
import math
import random
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import (
    DecodeError,
    EmptyManifest,
    InfeasibleSplit,
    InvalidParam,
    MissingFile,
)
from .validation import check_image

ROTATIONS = (0, 90, 180, 270)


@dataclass
class ManifestRecord:
    image_path: str
    content_id: str
    viewpoint_id: str
    algorithm_id: str
    dmos: float
    rotation: int = 0
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.rotation not in ROTATIONS:
            raise InvalidParam(f"rotation must be one of {ROTATIONS}")
        if not math.isfinite(float(self.dmos)):
            raise InvalidParam("dmos must be finite")

    @property
    def key(self):
        """Unique record key within a manifest."""
        return f"{self.content_id}|{self.viewpoint_id}|{self.algorithm_id}|rot{self.rotation}"

    @property
    def base_key(self):
        """Key of the un-rotated base image this record derives from."""
        return f"{self.content_id}|{self.viewpoint_id}|{self.algorithm_id}"

    @property
    def group_key(self):
        """Content-viewpoint group used by the fold exclusion rule."""
        return f"{self.content_id}|{self.viewpoint_id}"


@dataclass
class SplitPlan:
    validation_ids: set
    eval_ids: set
    seed: int


def load_image(path):
    """Load an 8- or 16-bit raster as an H x W x 3 float array in [0, 1]."""
    path = Path(path)
    if not path.exists():
        raise MissingFile(str(path))
    try:
        with Image.open(path) as im:
            if im.mode in ("I;16", "I;16B", "I;16L", "I"):
                arr = np.asarray(im, dtype=np.float64) / 65535.0
                arr = np.stack([arr] * 3, axis=-1)
            else:
                arr = np.asarray(im.convert("RGB"), dtype=np.float64) / 255.0
    except (UnidentifiedImageError, OSError, ValueError) as exc:
        raise DecodeError(f"{path}: {exc}") from exc
    return check_image(arr)


def save_image(img, path):
    """Write an [0, 1] RGB array as an 8-bit PNG/BMP (format from suffix)."""
    arr = check_image(img)
    data = np.round(arr * 255.0).astype(np.uint8)
    Image.fromarray(data, mode="RGB").save(path)


def augment_rotations(img):
    """Return the 90, 180 and 270 degree counterclockwise rotations."""
    arr = check_image(img)
    return [np.rot90(arr, k) for k in (1, 2, 3)]


def rotate(img, degrees):
    """Rotate counterclockwise by a multiple of 90 degrees."""
    if degrees not in ROTATIONS:
        raise InvalidParam(f"rotation must be one of {ROTATIONS}")
    return np.rot90(check_image(img), degrees // 90)


def read_manifest(path):
    path = Path(path)
    if not path.exists():
        raise MissingFile(str(path))
    records = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DecodeError(f"{path}:{lineno}: {exc}") from exc
            known = {"image_path", "content_id", "viewpoint_id", "algorithm_id", "dmos", "rotation"}
            extra = {k: v for k, v in obj.items() if k not in known}
            records.append(
                ManifestRecord(
                    image_path=obj["image_path"],
                    content_id=str(obj["content_id"]),
                    viewpoint_id=str(obj["viewpoint_id"]),
                    algorithm_id=str(obj["algorithm_id"]),
                    dmos=float(obj["dmos"]),
                    rotation=int(obj.get("rotation", 0)),
                    extra=extra,
                )
            )
    keys = [r.key for r in records]
    if len(set(keys)) != len(keys):
        raise InvalidParam(f"{path}: duplicate record keys in manifest")
    return records


def write_manifest(records, path):
    with open(path, "w", encoding="utf-8") as fh:
        for r in records:
            obj = {
                "image_path": r.image_path,
                "content_id": r.content_id,
                "viewpoint_id": r.viewpoint_id,
                "algorithm_id": r.algorithm_id,
                "dmos": r.dmos,
                "rotation": r.rotation,
            }
            obj.update(r.extra)
            fh.write(json.dumps(obj, sort_keys=True) + "\n")


def resolve_image_path(manifest_path, record):
    """Image paths in manifests are relative to the manifest location."""
    return Path(manifest_path).parent / record.image_path


def make_split(manifest, seed, validation_fraction=0.2):
    """Partition a manifest into validation and evaluation record keys.

    All rotations of one base image land in the same partition; roughly
    ``validation_fraction`` of the base images (at least one) go to
    validation.
    """
    if not manifest:
        raise EmptyManifest("manifest is empty")
    groups = {}
    for r in manifest:
        groups.setdefault(r.base_key, []).append(r.key)
    base_keys = sorted(groups)
    rng = random.Random(seed)
    rng.shuffle(base_keys)
    n_val = max(1, round(validation_fraction * len(base_keys)))
    val_bases = set(base_keys[:n_val])
    validation_ids = {k for b in val_bases for k in groups[b]}
    eval_ids = {k for b in base_keys[n_val:] for k in groups[b]}
    return SplitPlan(validation_ids=validation_ids, eval_ids=eval_ids, seed=seed)


def make_folds(eval_ids, manifest, n_folds, seed, test_fraction=0.2):
    """Yield ``n_folds`` (train_ids, test_ids) pairs over the eval records.

    Records sharing a (content_id, viewpoint_id) pair are kept on one side
    of every fold, so no viewpoint of a given content is seen in both train
    and test.
    """
    if n_folds < 1:
        raise InvalidParam("n_folds must be >= 1")
    eval_ids = set(eval_ids)
    if not eval_ids:
        raise InfeasibleSplit("eval set is empty")
    groups = {}
    for r in manifest:
        if r.key in eval_ids:
            groups.setdefault(r.group_key, []).append(r.key)
    n_records = sum(len(v) for v in groups.values())
    if n_records != len(eval_ids):
        raise InvalidParam("eval_ids contains keys missing from the manifest")
    if len(groups) < 2:
        raise InfeasibleSplit(
            "need at least two (content, viewpoint) groups to form disjoint folds"
        )
    group_keys = sorted(groups)
    target = max(1, round(test_fraction * n_records))
    rng = random.Random(seed)
    folds = []
    for _ in range(n_folds):
        order = group_keys[:]
        rng.shuffle(order)
        test = set()
        # keep at least one group for training
        for g in order[:-1]:
            if len(test) >= target:
                break
            test.update(groups[g])
        train = eval_ids - test
        folds.append((train, test))
    return folds
