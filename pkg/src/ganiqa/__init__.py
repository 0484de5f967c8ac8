"""No-reference quality assessment of DIBR-synthesized views.

Trains a GAN to inpaint synthetic dis-occlusion holes, then reuses its
discriminator to cluster patch features into a distortion-word codebook
and regress subjective quality scores from per-image histograms.
"""

from .config import RunConfig
from .data import ManifestRecord, SplitPlan, augment_rotations, load_image, make_folds, make_split
from .masks import mask_type1, mask_type2, mask_type3, punch_holes, slic_segment
from .models import Discriminator, Generator, build_discriminator
from .patches import BdwCodebook, LogitNormalizer, encode_histogram, extract_patches
from .regression import QualityRegressor, TrainedMetric, load_metric, save_metric
from .stats import cross_validate, pcc, rank_algorithms, rmse, scc, significance_matrix
from .training import TrainConfig, inpaint, psnr, train_inpainter

__version__ = "0.1.0"

__all__ = [
    "RunConfig",
    "ManifestRecord",
    "SplitPlan",
    "augment_rotations",
    "load_image",
    "make_folds",
    "make_split",
    "mask_type1",
    "mask_type2",
    "mask_type3",
    "punch_holes",
    "slic_segment",
    "Discriminator",
    "Generator",
    "build_discriminator",
    "BdwCodebook",
    "LogitNormalizer",
    "encode_histogram",
    "extract_patches",
    "QualityRegressor",
    "TrainedMetric",
    "load_metric",
    "save_metric",
    "cross_validate",
    "pcc",
    "rank_algorithms",
    "rmse",
    "scc",
    "significance_matrix",
    "TrainConfig",
    "inpaint",
    "psnr",
    "train_inpainter",
]
