"""Argument checks shared by the estimator layer and the CLI."""
from __future__ import annotations

import numpy as np

from .raster import BayerImage, CfaPattern, require_even


def check_mosaic(x, pattern=CfaPattern.RGGB) -> BayerImage:
    """Accept a :class:`BayerImage` or a 2-D array to be read with ``pattern``."""
    if isinstance(x, BayerImage):
        return x
    a = np.asarray(x, dtype=np.float64)
    if a.ndim != 2:
        raise ValueError(f"a mosaic must be 2-D, got shape {a.shape}")
    require_even(a.shape)
    return BayerImage(a, CfaPattern.parse(pattern))


def check_rgb(x) -> np.ndarray:
    a = np.asarray(x, dtype=np.float64)
    if a.ndim != 3 or a.shape[2] != 3:
        raise ValueError(f"expected an (H, W, 3) image, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("image contains non-finite values")
    return a


def check_batch(X) -> list:
    """A batch of images: a list/tuple of rasters or a stacked ndarray."""
    if isinstance(X, BayerImage):
        raise TypeError("pass a sequence of images, not a single image")
    if isinstance(X, np.ndarray):
        if X.ndim < 3:
            raise ValueError("a stacked batch needs a leading sample axis")
        return list(X)
    X = list(X)
    if not X:
        raise ValueError("empty batch")
    return X


def check_odd_positive(value, name):
    if int(value) != value or value < 1 or value % 2 == 0:
        raise ValueError(f"{name} must be a positive odd integer, got {value}")
    return int(value)
