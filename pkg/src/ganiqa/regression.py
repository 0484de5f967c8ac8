"""Linear support vector regression on distortion-word histograms and the
bundled end-to-end quality metric."""

from dataclasses import asdict

import numpy as np
import torch
from scipy.special import expit
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.svm import SVR

from .errors import DimMismatch, SolverFailure, TooFewSamples
from .models import Discriminator, Generator
from .patches import (
    BdwCodebook,
    LogitNormalizer,
    encode_histogram,
    extract_patches,
    patch_features,
    patch_logits,
)
from .training import Checkpoint, TrainConfig
from .validation import check_image, check_vector

BUNDLE_VERSION = 1

# validation-split grid mirrored by the pipeline's hyperparameter search
C_GRID = (0.01, 0.1, 1.0, 10.0, 100.0, 1000.0)
TUBE_GRID = (0.01, 0.1, 0.5)


class QualityRegressor(BaseEstimator, RegressorMixin):
    """Epsilon-insensitive linear SVR mapping histograms to quality scores.

    Fitting delegates to a convex solver; prediction is the plain linear
    form w . h + b on the recovered weights.
    """

    def __init__(self, C=1.0, tube_epsilon=0.1, tol=1e-8, max_iter=500000):
        self.C = C
        self.tube_epsilon = tube_epsilon
        self.tol = tol
        self.max_iter = max_iter

    def fit(self, X, y):
        X = np.asarray(X, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64).ravel()
        if X.ndim != 2 or X.shape[0] != y.size:
            raise DimMismatch(f"X {X.shape} does not match y {y.shape}")
        if X.shape[0] < 2:
            raise TooFewSamples("need at least 2 training samples")
        svr = SVR(
            kernel="linear",
            C=self.C,
            epsilon=self.tube_epsilon,
            tol=self.tol,
            max_iter=self.max_iter,
        )
        import warnings

        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            svr.fit(X, y)
        weights = svr.coef_.ravel()
        if not np.isfinite(weights).all() or not np.isfinite(svr.intercept_).all():
            raise SolverFailure("solver returned non-finite coefficients")
        self.weights_ = weights
        self.bias_ = float(svr.intercept_[0])
        return self

    def predict(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        if X.shape[1] != self.weights_.size:
            raise DimMismatch(f"histogram dim {X.shape[1]}, model dim {self.weights_.size}")
        return X @ self.weights_ + self.bias_


class TrainedMetric:
    """Everything needed to score an image: discriminator checkpoint, logit
    normalization, distortion-word codebook, and the SVR model."""

    def __init__(
        self,
        checkpoint,
        normalizer,
        codebook,
        svr,
        selector="threshold",
        epsilon=0.7,
        stride=None,
    ):
        self.checkpoint = checkpoint
        self.normalizer = normalizer
        self.codebook = codebook
        self.svr = svr
        self.selector = selector
        self.epsilon = epsilon
        self.stride = stride
        if codebook.feature_dim_ != checkpoint.discriminator.feature_dim:
            raise DimMismatch(
                f"codebook dim {codebook.feature_dim_} vs discriminator "
                f"feature dim {checkpoint.discriminator.feature_dim}"
            )
        if svr.weights_.size != codebook.centroids_.shape[0]:
            raise DimMismatch("SVR dimension does not match codebook size")

    @property
    def patch_size(self):
        return self.checkpoint.discriminator.input_size

    def encode(self, img):
        """Distortion-word histogram of one image."""
        disc = self.checkpoint.discriminator
        _, patches = extract_patches(check_image(img), self.patch_size, self.stride)
        feats = patch_features(disc, patches)
        logits = patch_logits(disc, patches)
        assignments = self.codebook.predict(feats)
        return encode_histogram(
            assignments,
            self.codebook.centroids_.shape[0],
            selector=self.selector,
            probs=expit(logits),
            normalized_logits=self.normalizer.transform(logits),
            epsilon=self.epsilon,
        )

    def score_image(self, img):
        return float(self.svr.predict(self.encode(img))[0])


def score_image(metric, img):
    return metric.score_image(img)


def save_metric(metric, path):
    ckpt = metric.checkpoint
    torch.save(
        {
            "version": BUNDLE_VERSION,
            "selector": metric.selector,
            "epsilon": metric.epsilon,
            "stride": metric.stride,
            "train_config": asdict(ckpt.config),
            "epoch": ckpt.epoch,
            "loss_history": ckpt.loss_history,
            "generator": ckpt.generator.state_dict(),
            "discriminator": ckpt.discriminator.state_dict(),
            "norm": {"min": metric.normalizer.min_logit_, "max": metric.normalizer.max_logit_},
            "codebook": {
                "seed": metric.codebook.seed,
                "centroids": metric.codebook.centroids_,
            },
            "svr": {
                "weights": metric.svr.weights_,
                "bias": metric.svr.bias_,
                "C": metric.svr.C,
                "tube_epsilon": metric.svr.tube_epsilon,
            },
        },
        path,
    )


def load_metric(path):
    blob = torch.load(path, map_location="cpu", weights_only=False)
    if blob["version"] != BUNDLE_VERSION:
        raise SolverFailure(f"unsupported bundle version {blob['version']}")
    config = TrainConfig(**blob["train_config"])
    gen = Generator(
        input_size=config.input_size,
        bottleneck=config.bottleneck,
        base_channels=config.base_channels,
    )
    gen.load_state_dict(blob["generator"])
    gen.eval()
    disc = Discriminator(config.arch_id)
    disc.load_state_dict(blob["discriminator"])
    disc.eval()
    ckpt = Checkpoint(
        generator=gen,
        discriminator=disc,
        config=config,
        epoch=blob["epoch"],
        loss_history=blob["loss_history"],
    )
    norm = LogitNormalizer()
    norm.min_logit_ = blob["norm"]["min"]
    norm.max_logit_ = blob["norm"]["max"]
    centroids = np.asarray(blob["codebook"]["centroids"], dtype=np.float64)
    cb = BdwCodebook(n_words=centroids.shape[0], seed=blob["codebook"]["seed"])
    cb.centroids_ = centroids
    cb.feature_dim_ = centroids.shape[1]
    svr = QualityRegressor(C=blob["svr"]["C"], tube_epsilon=blob["svr"]["tube_epsilon"])
    svr.weights_ = np.asarray(blob["svr"]["weights"], dtype=np.float64)
    svr.bias_ = float(blob["svr"]["bias"])
    return TrainedMetric(
        ckpt,
        norm,
        cb,
        svr,
        selector=blob["selector"],
        epsilon=blob["epsilon"],
        stride=blob.get("stride"),
    )
