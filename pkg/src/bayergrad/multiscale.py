"""Gaussian blur, resizing and DoG scale spaces for gray images and mosaics.

Mosaics are never filtered as a single raster: blur and resize act on the
four super-pixel planes independently and re-interleave them, so the CFA
layout survives every operation.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .raster import BayerImage, superpixel_view


def sigma_for_kernel(a: int) -> float:
    """Default Gaussian sigma for an ``a x a`` kernel: 0.3*((a-1)*0.5 - 1) + 0.8."""
    if int(a) != a or a < 1 or a % 2 == 0:
        raise ValueError(f"kernel size must be a positive odd integer, got {a}")
    return 0.3 * ((a - 1) * 0.5 - 1) + 0.8


@dataclass(frozen=True)
class GaussianKernel:
    """Odd-sized separable Gaussian; ``taps`` is the normalised 1-D profile."""

    size: int
    sigma: float = None
    taps: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if int(self.size) != self.size or self.size < 1 or self.size % 2 == 0:
            raise ValueError(f"kernel size must be a positive odd integer, got {self.size}")
        sigma = sigma_for_kernel(self.size) if self.sigma is None else float(self.sigma)
        if not sigma > 0:
            raise ValueError("sigma must be positive")
        object.__setattr__(self, "sigma", sigma)
        x = np.arange(self.size) - (self.size - 1) / 2.0
        t = np.exp(-x * x / (2.0 * sigma * sigma))
        t /= t.sum()
        t.setflags(write=False)
        object.__setattr__(self, "taps", t)

    @classmethod
    def for_sigma(cls, sigma: float, truncate: float = 4.0) -> "GaussianKernel":
        radius = max(1, int(math.ceil(truncate * sigma)))
        return cls(2 * radius + 1, sigma)

    @property
    def weights(self) -> np.ndarray:
        """Full ``size x size`` 2-D kernel."""
        return np.outer(self.taps, self.taps)


def _blur_plane(a, taps):
    # half-sample symmetric borders keep the image mean exactly
    a = ndimage.correlate1d(a, taps, axis=0, mode="reflect")
    return ndimage.correlate1d(a, taps, axis=1, mode="reflect")


def blur(img, kernel: GaussianKernel):
    """Separable Gaussian blur of a gray ``(H, W)`` or RGB ``(H, W, 3)`` image."""
    if isinstance(img, BayerImage):
        return blur_bayer(img, kernel)
    img = np.asarray(img, dtype=np.float64)
    if img.ndim == 2:
        return _blur_plane(img, kernel.taps)
    return np.stack([_blur_plane(img[..., k], kernel.taps) for k in range(img.shape[2])], axis=-1)


def blur_bayer(img: BayerImage, kernel: GaussianKernel) -> BayerImage:
    """Blur each super-pixel plane with ``kernel`` and re-interleave."""
    return superpixel_view(img).map(lambda p: _blur_plane(p, kernel.taps)).reassemble()


def _interp_taps(n_in, n_out, scale):
    # pixel-centre aligned linear interpolation, edges clamped
    src = (np.arange(n_out) + 0.5) / scale - 0.5
    src = np.clip(src, 0, n_in - 1)
    i0 = np.floor(src).astype(int)
    i1 = np.minimum(i0 + 1, n_in - 1)
    return i0, i1, src - i0


def _resize_plane(a, out_shape, scale_y, scale_x):
    i0, i1, f = _interp_taps(a.shape[0], out_shape[0], scale_y)
    a = a[i0] * (1 - f)[:, None] + a[i1] * f[:, None]
    j0, j1, g = _interp_taps(a.shape[1], out_shape[1], scale_x)
    return a[:, j0] * (1 - g) + a[:, j1] * g


def resize(img, scale: float):
    """Bilinear resize by ``scale`` (pixel-centre aligned, no anti-aliasing).

    Gray/RGB arrays produce ``round(dim * scale)`` pixels; a
    :class:`BayerImage` resizes each super-pixel plane to
    ``round(dim / 2 * scale)`` and re-interleaves.
    """
    if not scale > 0:
        raise ValueError("scale must be positive")
    if isinstance(img, BayerImage):
        sv = superpixel_view(img)
        sh, sw = sv.sp_shape
        out = (int(round(sh * scale)), int(round(sw * scale)))
        if min(out) < 1:
            raise ValueError(f"resize to scale {scale} leaves no super-pixels")
        if scale == 1:
            return img
        return sv.map(lambda p: _resize_plane(p, out, out[0] / sh, out[1] / sw)).reassemble()
    img = np.asarray(img, dtype=np.float64)
    h, w = img.shape[:2]
    out = (int(round(h * scale)), int(round(w * scale)))
    if min(out) < 1:
        raise ValueError(f"resize to scale {scale} gives an empty image")
    if scale == 1:
        return img.copy()
    sy, sx = out[0] / h, out[1] / w
    if img.ndim == 2:
        return _resize_plane(img, out, sy, sx)
    return np.stack([_resize_plane(img[..., k], out, sy, sx) for k in range(img.shape[2])], axis=-1)


@dataclass(frozen=True, eq=False)
class Octave:
    """One octave: Gaussian levels, their DoG differences and level sigmas.

    Levels are 2-D rasters in octave pixel units (mosaics for the Bayer
    domain). ``sigmas[i]`` is the absolute blur of level ``i`` in those
    units.
    """

    index: int
    gaussians: list
    dogs: list
    sigmas: list


@dataclass(frozen=True, eq=False)
class ScaleSpace:
    """Gaussian/DoG pyramid over gray pixels or Bayer super-pixels.

    ``domain`` is ``"gray"`` or ``"bayer"``. Coordinates at octave ``o``
    map to full-resolution pixels through :meth:`to_full_res`.
    """

    octaves: list
    s: int
    base_sigma: float
    domain: str
    image_shape: tuple

    @property
    def factor(self) -> float:
        return 2.0 ** (1.0 / self.s)

    @property
    def lattice(self) -> int:
        """Full-resolution pixels per lattice unit at octave 0."""
        return 2 if self.domain == "bayer" else 1

    @property
    def step(self) -> int:
        """Distance between same-colour samples in a level raster."""
        return 2 if self.domain == "bayer" else 1

    def to_full_res(self, x, y, octave):
        f = 2.0 ** octave
        return (x + 0.5) * f - 0.5, (y + 0.5) * f - 0.5

    def from_full_res(self, x, y, octave):
        f = 2.0 ** octave
        return (x + 0.5) / f - 0.5, (y + 0.5) / f - 0.5


ASSUMED_BLUR = 0.5


def build_scale_space(img, s: int = 3, octaves: int = 4, base_sigma: float = 1.6,
                      assumed_blur: float = ASSUMED_BLUR) -> ScaleSpace:
    """Build ``octaves`` octaves of ``s + 3`` Gaussian and ``s + 2`` DoG levels.

    Level ``i`` of every octave has absolute scale ``base_sigma * 2**(i/s)``
    in that octave's lattice units: pixels for a gray image, super-pixels
    for a mosaic. A mosaic is treated as an image of super-pixels: every
    blur runs on the four planes, and the next octave starts from a
    super-pixel half-scale resize of level ``s``. Gray octaves decimate
    level ``s`` by two. ``assumed_blur`` is in the same lattice units.
    """
    if s < 1:
        raise ValueError("need at least one scale per octave")
    bayer = isinstance(img, BayerImage)
    raster = img if bayer else np.asarray(img, dtype=np.float64)
    shape = raster.shape
    if len(shape) != 2:
        raise ValueError("scale spaces are built on gray images or mosaics")
    top_min = min(shape) / 2 ** (octaves - 1)
    if top_min < 8:
        raise ValueError(f"{octaves} octaves need a larger image than {shape}")
    k = 2.0 ** (1.0 / s)
    sigmas = [base_sigma * k ** i for i in range(s + 3)]

    def gblur(x, sigma):
        kern = GaussianKernel.for_sigma(sigma)
        return blur_bayer(x, kern) if bayer else blur(x, kern)

    first_inc = math.sqrt(max(base_sigma ** 2 - assumed_blur ** 2, 0.01))
    current = gblur(raster, first_inc)
    out = []
    for o in range(octaves):
        levels = [current]
        for i in range(1, s + 3):
            inc = math.sqrt(sigmas[i] ** 2 - sigmas[i - 1] ** 2)
            levels.append(gblur(levels[-1], inc))
        arrays = [lv.samples if bayer else lv for lv in levels]
        dogs = [arrays[i + 1] - arrays[i] for i in range(s + 2)]
        out.append(Octave(o, arrays, dogs, list(sigmas)))
        if o + 1 < octaves:
            nxt = levels[s]
            current = resize(nxt, 0.5)
    return ScaleSpace(out, s, base_sigma, "bayer" if bayer else "gray", tuple(shape))
