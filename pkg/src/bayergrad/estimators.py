"""scikit-learn transformers wrapping the feature extractors.

All transformers are stateless: ``fit`` only validates hyperparameters, so
they drop straight into a :class:`sklearn.pipeline.Pipeline` in front of a
classifier.
"""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from ._validation import check_batch, check_mosaic, check_rgb
from .gradient import GradientOperator, gradient_magnitude, gradients
from .hog import HogConfig, hog
from .multiscale import build_scale_space
from .raster import CfaPattern, mosaic
from .sift import detect, describe_all, orient_all


class _Stateless(TransformerMixin, BaseEstimator):
    def fit(self, X, y=None):
        self._check_params()
        check_batch(X)
        return self

    def _check_params(self):
        pass

    def __sklearn_tags__(self):
        tags = super().__sklearn_tags__()
        tags.requires_fit = False
        return tags


class Mosaicker(_Stateless):
    """RGB images to 2-D CFA mosaics."""

    def __init__(self, pattern="rggb"):
        self.pattern = pattern

    def _check_params(self):
        CfaPattern.parse(self.pattern)

    def transform(self, X):
        self._check_params()
        return [mosaic(check_rgb(x), self.pattern).samples for x in check_batch(X)]


class BayerGradientMagnitude(_Stateless):
    """Gradient magnitude maps computed straight from mosaics."""

    def __init__(self, operator="central", pattern="rggb"):
        self.operator = operator
        self.pattern = pattern

    def _check_params(self):
        GradientOperator.parse(self.operator)
        CfaPattern.parse(self.pattern)

    def transform(self, X):
        self._check_params()
        return [gradient_magnitude(check_mosaic(x, self.pattern), self.operator) for x in check_batch(X)]


class HogTransformer(_Stateless):
    """One HOG vector per window; windows are mosaics (``bayer=True``) or gray images."""

    def __init__(self, cell=8, block=2, bins=9, block_stride=1, clip=0.2, operator="central",
                 bayer=True, pattern="rggb"):
        self.cell = cell
        self.block = block
        self.bins = bins
        self.block_stride = block_stride
        self.clip = clip
        self.operator = operator
        self.bayer = bayer
        self.pattern = pattern

    def _config(self):
        return HogConfig(self.cell, self.block, self.bins, self.block_stride, self.clip)

    def _check_params(self):
        self._config()
        GradientOperator.parse(self.operator)

    def transform(self, X):
        cfg = self._config()
        rows = []
        for x in check_batch(X):
            src = check_mosaic(x, self.pattern) if self.bayer else np.asarray(x, dtype=np.float64)
            rows.append(hog(gradients(src, self.operator), cfg).values)
        return np.vstack(rows)


class SiftFeatures(_Stateless):
    """128-D descriptors per image (an ``(n_i, 128)`` array for each input)."""

    def __init__(self, s=3, octaves=4, base_sigma=1.6, contrast_threshold=0.03, edge_ratio=10.0,
                 bayer=True, pattern="rggb"):
        self.s = s
        self.octaves = octaves
        self.base_sigma = base_sigma
        self.contrast_threshold = contrast_threshold
        self.edge_ratio = edge_ratio
        self.bayer = bayer
        self.pattern = pattern

    def _check_params(self):
        if self.s < 1 or self.octaves < 1:
            raise ValueError("s and octaves must be positive")
        if self.base_sigma <= 0 or self.contrast_threshold < 0 or self.edge_ratio <= 0:
            raise ValueError("base_sigma and edge_ratio must be positive, contrast_threshold nonnegative")

    def transform(self, X):
        self._check_params()
        out = []
        for x in check_batch(X):
            src = check_mosaic(x, self.pattern) if self.bayer else np.asarray(x, dtype=np.float64)
            space = build_scale_space(src, self.s, self.octaves, self.base_sigma)
            kps = orient_all(detect(space, self.contrast_threshold, self.edge_ratio), space)
            desc = describe_all(kps, space)
            out.append(np.array([d.values for d in desc]).reshape(-1, 128))
        return out
