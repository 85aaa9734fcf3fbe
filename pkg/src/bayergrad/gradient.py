"""First-order gradient operators for gray images, single channels and mosaics.

A Bayer mosaic goes through exactly the same code path as a gray image:
with the central-difference and Sobel templates the +1/-1 taps always land
on pixels of the same CFA colour, so no demosaicing is needed. Borders use
whole-sample mirroring (``x[-1] = x[1]``), which keeps the CFA phase of the
padded samples and makes the derivative vanish on constant areas.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .raster import BayerImage, rgb_to_gray


class GradientOperator(enum.Enum):
    CENTRAL = "central"
    SOBEL = "sobel"

    @classmethod
    def parse(cls, value) -> "GradientOperator":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ValueError(f"unknown gradient operator {value!r}") from None


@dataclass(frozen=True, eq=False)
class GradientField:
    """Horizontal (``gx``) and vertical (``gy``) derivatives, same shape as the source."""

    gx: np.ndarray
    gy: np.ndarray

    def __post_init__(self):
        if self.gx.shape != self.gy.shape:
            raise ValueError("gx and gy must have the same shape")

    @property
    def shape(self):
        return self.gx.shape

    def crop(self, top, left, height, width) -> "GradientField":
        sl = (slice(top, top + height), slice(left, left + width))
        return GradientField(self.gx[sl], self.gy[sl])

    def scaled(self, k) -> "GradientField":
        return GradientField(self.gx * k, self.gy * k)


def _as_raster(img) -> np.ndarray:
    if isinstance(img, BayerImage):
        return img.samples
    a = np.asarray(img, dtype=np.float64)
    if a.ndim != 2:
        raise ValueError(f"expected a single-channel raster, got shape {a.shape}")
    return a


def gradients(img, op=GradientOperator.CENTRAL) -> GradientField:
    """Apply the derivative templates to a raster.

    ``gx[y, x] = I[y, x+1] - I[y, x-1]`` for central differences; Sobel
    adds the ``[1, 2, 1]`` smoothing across the derivative direction
    (no 1/8 normalisation).
    """
    op = GradientOperator.parse(op)
    a = _as_raster(img)
    if a.shape[0] < 3 or a.shape[1] < 3:
        raise ValueError(f"image too small for gradients: {a.shape}")
    p = np.pad(a, 1, mode="reflect")  # numpy 'reflect' == whole-sample mirror
    dx = p[:, 2:] - p[:, :-2]  # (H+2, W)
    dy = p[2:, :] - p[:-2, :]  # (H, W+2)
    if op is GradientOperator.CENTRAL:
        return GradientField(dx[1:-1, :], dy[:, 1:-1])
    gx = dx[:-2, :] + 2.0 * dx[1:-1, :] + dx[2:, :]
    gy = dy[:, :-2] + 2.0 * dy[:, 1:-1] + dy[:, 2:]
    return GradientField(gx, gy)


def magnitude(field: GradientField) -> np.ndarray:
    return np.sqrt(field.gx * field.gx + field.gy * field.gy)


def orientation(field: GradientField, signed=True) -> np.ndarray:
    """Gradient direction in degrees: [0, 360) when signed, folded to [0, 180) otherwise."""
    ang = np.degrees(np.arctan2(field.gy, field.gx))
    period = 360.0 if signed else 180.0
    ang = np.mod(ang, period)
    # mod can round tiny negatives up to the period itself
    ang[ang >= period] = 0.0
    return ang


def color_gradients(img, op=GradientOperator.CENTRAL, mode="gray") -> GradientField:
    """Gradients of an RGB image.

    mode ``"gray"`` differentiates the gray conversion; ``"R"``/``"G"``/``"B"``
    a single channel; ``"color"`` keeps, per pixel, the channel whose
    gradient magnitude is largest.
    """
    img = np.asarray(img, dtype=np.float64)
    if img.ndim == 2:
        return gradients(img, op)
    if mode == "gray":
        return gradients(rgb_to_gray(img), op)
    if mode in ("R", "G", "B"):
        return gradients(img[..., "RGB".index(mode)], op)
    if mode == "color":
        fields = [gradients(img[..., k], op) for k in range(3)]
        mags = np.stack([magnitude(f) for f in fields])
        best = np.argmax(mags, axis=0)
        gx = np.choose(best, [f.gx for f in fields])
        gy = np.choose(best, [f.gy for f in fields])
        return GradientField(gx, gy)
    raise ValueError(f"unknown colour gradient mode {mode!r}")


def gradient_magnitude(img, op=GradientOperator.CENTRAL) -> np.ndarray:
    """Magnitude map of a gray image, RGB image (via gray) or mosaic."""
    if isinstance(img, BayerImage):
        return magnitude(gradients(img, op))
    return magnitude(color_gradients(img, op))


def channel_difference_diagnostics(img, bins=256) -> dict:
    """Difference images G-R and G-B, their central-difference magnitudes and histograms.

    The magnitude of the difference-image gradient is the cross-channel
    error term that the colour-difference assumption neglects.
    """
    from .quality import gray_histogram

    img = np.asarray(img, dtype=np.float64)
    if img.ndim != 3 or img.shape[2] != 3:
        raise ValueError("channel diagnostics need an RGB image")
    diff_gr = img[..., 1] - img[..., 0]
    diff_gb = img[..., 1] - img[..., 2]
    grad_gr = magnitude(gradients(diff_gr))
    grad_gb = magnitude(gradients(diff_gb))
    return {
        "diff_GR": diff_gr,
        "diff_GB": diff_gb,
        "grad_GR": grad_gr,
        "grad_GB": grad_gb,
        "histograms": {
            name: gray_histogram(a, bins)
            for name, a in (("diff_GR", diff_gr), ("diff_GB", diff_gb), ("grad_GR", grad_gr), ("grad_GB", grad_gb))
        },
    }
