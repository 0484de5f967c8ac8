"""Input validation helpers used by the estimators and pipeline functions."""

import numpy as np

from .errors import DimMismatch, InvalidParam


def check_image(img):
    """Validate an RGB image array and return it as float64 H x W x 3.

    Values must lie in [0, 1].
    """
    arr = np.asarray(img, dtype=np.float64)
    if arr.ndim != 3 or arr.shape[2] != 3:
        raise InvalidParam(f"expected H x W x 3 image, got shape {arr.shape}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise InvalidParam("image must have at least one pixel per axis")
    if not np.isfinite(arr).all():
        raise InvalidParam("image contains non-finite values")
    if arr.min() < 0.0 or arr.max() > 1.0:
        raise InvalidParam("image values must lie in [0, 1]")
    return arr


def check_mask(mask, image_shape=None):
    """Validate a binary mask (values in {0, 1}) and return it as uint8 H x W."""
    arr = np.asarray(mask)
    if arr.ndim != 2:
        raise InvalidParam(f"expected H x W mask, got shape {arr.shape}")
    if not np.isin(arr, (0, 1)).all():
        raise InvalidParam("mask values must be 0 or 1")
    if image_shape is not None and arr.shape != tuple(image_shape[:2]):
        raise DimMismatch(
            f"mask shape {arr.shape} does not match image shape {tuple(image_shape[:2])}"
        )
    return arr.astype(np.uint8)


def check_same_shape(a, b, what="arrays"):
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise DimMismatch(f"{what} have mismatched shapes {a.shape} vs {b.shape}")
    return a, b


def check_vector(x, dim=None, what="vector"):
    arr = np.asarray(x, dtype=np.float64).ravel()
    if dim is not None and arr.size != dim:
        raise DimMismatch(f"{what} has dimension {arr.size}, expected {dim}")
    if not np.isfinite(arr).all():
        raise InvalidParam(f"{what} contains non-finite values")
    return arr
