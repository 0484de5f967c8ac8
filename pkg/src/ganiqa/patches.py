"""Patch gridding, discriminator features, logit normalization, and the
distortion-word codebook with histogram encoding."""

import struct
from dataclasses import dataclass

import numpy as np
import torch
from sklearn.base import BaseEstimator, TransformerMixin

from .errors import (
    DegenerateRange,
    DimMismatch,
    EmptyPatchSet,
    ImageTooSmall,
    InvalidParam,
    TooFewSamples,
)
from .validation import check_image

CODEBOOK_MAGIC = b"BDWC"
CODEBOOK_VERSION = 1

DEFAULT_WORDS = 160
DEFAULT_EPSILON = 0.7


@dataclass
class PatchGrid:
    patch_size: int
    stride: int
    anchors: list  # (row, col) top-left corners
    n_p: int


def _axis_anchors(dim, patch_size, stride):
    anchors = list(range(0, dim - patch_size + 1, stride))
    if anchors[-1] != dim - patch_size:
        anchors.append(dim - patch_size)
    return anchors


def extract_patches(img, patch_size, stride=None):
    """Tile an image with overlapping patches.

    Anchors sit at stride multiples; a final edge-flush anchor is added per
    axis when the remainder is not a stride multiple, so the full image
    extent is covered.
    """
    arr = check_image(img)
    if stride is None:
        stride = patch_size // 2
    h, w = arr.shape[:2]
    if h < patch_size or w < patch_size:
        raise ImageTooSmall(f"image {h}x{w} smaller than patch size {patch_size}")
    anchors = [
        (r, c)
        for r in _axis_anchors(h, patch_size, stride)
        for c in _axis_anchors(w, patch_size, stride)
    ]
    patches = np.stack([arr[r : r + patch_size, c : c + patch_size] for r, c in anchors])
    grid = PatchGrid(patch_size=patch_size, stride=stride, anchors=anchors, n_p=len(anchors))
    return grid, patches


def _to_batch(patches):
    arr = np.asarray(patches, dtype=np.float32)
    if arr.ndim == 3:
        arr = arr[None]
    return torch.from_numpy(arr.transpose(0, 3, 1, 2))


def patch_features(disc, patches, batch_size=64):
    """Penultimate-conv feature vectors for a stack of patches (N, dim)."""
    x = _to_batch(patches)
    outs = []
    with torch.no_grad():
        for start in range(0, x.shape[0], batch_size):
            outs.append(disc.features(x[start : start + batch_size]).numpy())
    return np.concatenate(outs).astype(np.float64)


def patch_logits(disc, patches, batch_size=64):
    """Pre-sigmoid discriminator outputs for a stack of patches (N,)."""
    x = _to_batch(patches)
    outs = []
    with torch.no_grad():
        for start in range(0, x.shape[0], batch_size):
            outs.append(disc.logits(x[start : start + batch_size]).numpy())
    return np.concatenate(outs).astype(np.float64)


def disc_boolean(logit):
    """Hard real/generated decision: 1 when sigmoid(logit) >= 0.5."""
    return (np.asarray(logit, dtype=np.float64) >= 0.0).astype(int)


class LogitNormalizer(BaseEstimator, TransformerMixin):
    """Affine map of discriminator logits onto [0, 1], clamped outside the
    fitted range."""

    def fit(self, logits, y=None):
        vals = np.asarray(logits, dtype=np.float64).ravel()
        if vals.size < 2:
            raise TooFewSamples("need at least 2 logits to fit")
        lo, hi = float(vals.min()), float(vals.max())
        if hi <= lo:
            raise DegenerateRange("all logits are equal")
        self.min_logit_ = lo
        self.max_logit_ = hi
        return self

    def transform(self, logits):
        vals = np.asarray(logits, dtype=np.float64)
        out = (vals - self.min_logit_) / (self.max_logit_ - self.min_logit_)
        return np.clip(out, 0.0, 1.0)


class BdwCodebook(BaseEstimator):
    """Bag-of-distortion-words codebook: Lloyd k-means over discriminator
    feature vectors with k-means++ seeding.

    Deterministic for a fixed seed. ``inertia_history_`` records the
    assignment-step inertia per Lloyd iteration.
    """

    def __init__(self, n_words=DEFAULT_WORDS, seed=0, max_iters=100, tol=1e-4):
        self.n_words = n_words
        self.seed = seed
        self.max_iters = max_iters
        self.tol = tol

    def fit(self, X, y=None):
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2:
            raise InvalidParam(f"expected N x dim features, got shape {X.shape}")
        n, dim = X.shape
        k = self.n_words
        if k < 2:
            raise InvalidParam("n_words must be >= 2")
        if n < k:
            raise TooFewSamples(f"{n} samples for {k} words")

        rng = np.random.default_rng(self.seed)
        centroids = self._kmeans_pp(X, k, rng)
        history = []
        assign = None
        for _ in range(self.max_iters):
            assign, inertia = self._assign(X, centroids)
            history.append(inertia)
            new_centroids = centroids.copy()
            for j in range(k):
                sel = assign == j
                if sel.any():
                    new_centroids[j] = X[sel].mean(axis=0)
                else:
                    # revive an empty cluster at the worst-fit point
                    far = np.argmax(((X - centroids[assign]) ** 2).sum(axis=1))
                    new_centroids[j] = X[far]
            shift = np.sqrt(((new_centroids - centroids) ** 2).sum(axis=1)).max()
            centroids = new_centroids
            if shift < self.tol:
                break
        assign, inertia = self._assign(X, centroids)
        history.append(inertia)

        self.centroids_ = centroids
        self.labels_ = assign
        self.inertia_ = inertia
        self.inertia_history_ = history
        self.feature_dim_ = dim
        return self

    @staticmethod
    def _kmeans_pp(X, k, rng):
        n = X.shape[0]
        centroids = np.empty((k, X.shape[1]))
        centroids[0] = X[rng.integers(n)]
        d2 = ((X - centroids[0]) ** 2).sum(axis=1)
        for j in range(1, k):
            total = d2.sum()
            if total <= 0:
                centroids[j] = X[rng.integers(n)]
            else:
                centroids[j] = X[rng.choice(n, p=d2 / total)]
            d2 = np.minimum(d2, ((X - centroids[j]) ** 2).sum(axis=1))
        return centroids

    @staticmethod
    def _assign(X, centroids):
        # argmin breaks ties toward the lowest index either way; the direct
        # subtraction path is exact, the expansion path avoids materializing
        # an N x K x dim array for the high-dimensional feature vectors
        n, dim = X.shape
        k = centroids.shape[0]
        if n * k * dim <= 20_000_000:
            d2 = ((X[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)
        else:
            d2 = (
                (X * X).sum(axis=1)[:, None]
                - 2.0 * (X @ centroids.T)
                + (centroids * centroids).sum(axis=1)[None, :]
            )
            np.maximum(d2, 0.0, out=d2)
        assign = d2.argmin(axis=1)
        inertia = float(d2[np.arange(n), assign].sum())
        return assign, inertia

    def predict(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        if X.shape[1] != self.feature_dim_:
            raise DimMismatch(f"feature dim {X.shape[1]}, codebook dim {self.feature_dim_}")
        assign, _ = self._assign(X, self.centroids_)
        return assign


def assign(codebook, v):
    """Index of the nearest centroid (ties to the lowest index)."""
    return int(codebook.predict(np.asarray(v).reshape(1, -1))[0])


def encode_histogram(
    assignments,
    n_words,
    selector="all",
    probs=None,
    normalized_logits=None,
    epsilon=DEFAULT_EPSILON,
):
    """Distortion-word histogram over an image's patches.

    ``selector`` picks which patches contribute: "all" counts every patch,
    "boolean" counts only patches the discriminator calls generated
    (probability < 0.5), "threshold" counts patches whose normalized logit
    is below ``epsilon``. Counts are divided by the total patch count.
    """
    assignments = np.asarray(assignments, dtype=np.int64)
    n_p = assignments.size
    if n_p == 0:
        raise EmptyPatchSet("no patches to encode")
    if selector == "all":
        selected = np.ones(n_p, dtype=bool)
    elif selector == "boolean":
        if probs is None:
            raise InvalidParam("boolean selector needs per-patch probabilities")
        selected = np.asarray(probs, dtype=np.float64) < 0.5
    elif selector == "threshold":
        if normalized_logits is None:
            raise InvalidParam("threshold selector needs normalized logits")
        selected = np.asarray(normalized_logits, dtype=np.float64) < epsilon
    else:
        raise InvalidParam(f"unknown selector {selector!r}")
    counts = np.bincount(assignments[selected], minlength=n_words)
    return counts.astype(np.float64) / n_p


def save_codebook(codebook, path, arch_id=""):
    """Binary codebook file: magic, version, K, dim, seed, arch id, then the
    row-major float32 little-endian centroid matrix."""
    arch = arch_id.encode("utf-8")
    header = struct.pack(
        "<4sIIIqH",
        CODEBOOK_MAGIC,
        CODEBOOK_VERSION,
        codebook.centroids_.shape[0],
        codebook.centroids_.shape[1],
        int(codebook.seed),
        len(arch),
    )
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(arch)
        fh.write(codebook.centroids_.astype("<f4").tobytes())


def load_codebook(path):
    with open(path, "rb") as fh:
        magic, version, k, dim, seed, arch_len = struct.unpack("<4sIIIqH", fh.read(26))
        if magic != CODEBOOK_MAGIC:
            raise InvalidParam(f"{path}: not a codebook file")
        if version != CODEBOOK_VERSION:
            raise InvalidParam(f"{path}: unsupported codebook version {version}")
        arch_id = fh.read(arch_len).decode("utf-8")
        data = np.frombuffer(fh.read(4 * k * dim), dtype="<f4")
    cb = BdwCodebook(n_words=k, seed=seed)
    cb.centroids_ = data.reshape(k, dim).astype(np.float64)
    cb.feature_dim_ = dim
    cb.arch_id_ = arch_id
    return cb
