"""Full-reference quality metrics: GMS/GMSM/GMSD, MSE/PSNR, SSIM/MSSIM."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

GMS_C = 0.0026

SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_K1 = 0.01
SSIM_K2 = 0.03


def _pair(a, b):
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    return a, b


@dataclass(frozen=True, eq=False)
class GmsResult:
    gms_map: np.ndarray
    gmsm: float
    gmsd: float


def gms(m1, m2, c=GMS_C) -> GmsResult:
    """Gradient magnitude similarity between two magnitude maps.

    ``gmsd`` is the population standard deviation of the similarity map.
    """
    m1, m2 = _pair(m1, m2)
    gmap = (2.0 * m1 * m2 + c) / (m1 * m1 + m2 * m2 + c)
    gmsm = float(gmap.mean())
    gmsd = float(np.sqrt(np.mean((gmap - gmsm) ** 2)))
    return GmsResult(gmap, gmsm, gmsd)


def gmsd(m1, m2, c=GMS_C) -> float:
    return gms(m1, m2, c).gmsd


def mse(i1, i2, bit_depth=8) -> float:
    """Mean squared error on the ``2**bit_depth - 1`` integer scale."""
    i1, i2 = _pair(i1, i2)
    peak = float(2 ** bit_depth - 1)
    d = (i1 - i2) * peak
    return float(np.mean(d * d))


def psnr(i1, i2, bit_depth=8) -> float:
    """PSNR in dB; identical inputs give ``inf``."""
    err = mse(i1, i2, bit_depth)
    if err == 0.0:
        return float("inf")
    peak = float(2 ** bit_depth - 1)
    return float(10.0 * np.log10(peak * peak / err))


def _gauss_taps(size=SSIM_WINDOW, sigma=SSIM_SIGMA):
    x = np.arange(size) - (size - 1) / 2.0
    w = np.exp(-x * x / (2.0 * sigma * sigma))
    return w / w.sum()


def ssim(i1, i2, data_range=1.0, window=SSIM_WINDOW, sigma=SSIM_SIGMA):
    """SSIM map over valid Gaussian windows and its mean.

    Returns ``(ssim_map, mssim)``. The map excludes the ``window // 2``
    border where the window would leave the image.
    """
    i1, i2 = _pair(i1, i2)
    if i1.ndim != 2:
        raise ValueError("ssim expects single-channel images")
    if min(i1.shape) < window:
        raise ValueError(f"image {i1.shape} smaller than the {window}x{window} SSIM window")
    taps = _gauss_taps(window, sigma)
    r = window // 2

    def filt(a):
        a = ndimage.correlate1d(a, taps, axis=0, mode="constant")
        a = ndimage.correlate1d(a, taps, axis=1, mode="constant")
        return a[r:a.shape[0] - r, r:a.shape[1] - r]

    c1 = (SSIM_K1 * data_range) ** 2
    c2 = (SSIM_K2 * data_range) ** 2
    mu1, mu2 = filt(i1), filt(i2)
    s11 = filt(i1 * i1) - mu1 * mu1
    s22 = filt(i2 * i2) - mu2 * mu2
    s12 = filt(i1 * i2) - mu1 * mu2
    num = (2 * mu1 * mu2 + c1) * (2 * s12 + c2)
    den = (mu1 * mu1 + mu2 * mu2 + c1) * (s11 + s22 + c2)
    smap = num / den
    return smap, float(smap.mean())


def mssim(i1, i2, data_range=1.0) -> float:
    """Mean SSIM; three-channel inputs are averaged over channels."""
    i1, i2 = _pair(i1, i2)
    if i1.ndim == 3:
        return float(np.mean([ssim(i1[..., k], i2[..., k], data_range)[1] for k in range(i1.shape[2])]))
    return ssim(i1, i2, data_range)[1]


def gray_histogram(img, bins=256, return_edges=False):
    """Counts over ``bins`` equal bins spanning ``[min, max]`` of the data."""
    a = np.asarray(img, dtype=np.float64).ravel()
    lo, hi = float(a.min()), float(a.max())
    if hi - lo <= 1e-12 * max(1.0, abs(lo)):
        # rounding-level spread: treat as a constant image
        lo = hi = 0.5 * (lo + hi)
    counts, edges = np.histogram(np.clip(a, lo, hi), bins=bins, range=(lo, hi))
    return (counts, edges) if return_edges else counts
