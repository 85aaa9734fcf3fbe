"""Baseline demosaicing: the comparison path that reconstructs RGB first.

Every interpolator keeps the sampled channel untouched, clamps to [0, 1]
and mirrors borders with whole-sample symmetry, which preserves the CFA
phase so the interior formulas stay valid up to the edge.
"""
from __future__ import annotations

import enum

import numpy as np
from scipy import ndimage

from .raster import BayerImage, CfaPattern, mosaic, require_even, rgb_to_gray


class DemosaicMethod(enum.Enum):
    NEAREST = "nearest"
    BILINEAR = "bilinear"
    BICUBIC = "bicubic"
    ADAPTIVE_COLOR_PLANE = "acpi"
    HYBRID = "hybrid"

    @classmethod
    def parse(cls, value) -> "DemosaicMethod":
        if isinstance(value, cls):
            return value
        v = str(value).lower()
        aliases = {
            "nn": "nearest", "linear": "bilinear", "cubic": "bicubic",
            "hamilton-adams": "acpi", "adaptive": "acpi", "malvar": "hybrid",
            "adaptive_color_plane": "acpi",
        }
        try:
            return cls(aliases.get(v, v))
        except ValueError:
            raise ValueError(f"unknown demosaicing method {value!r}") from None


def _conv(a, k):
    return ndimage.convolve(a, np.asarray(k, dtype=np.float64), mode="mirror")


def _sep(a, k):
    k = np.asarray(k, dtype=np.float64)
    a = ndimage.correlate1d(a, k, axis=0, mode="mirror")
    return ndimage.correlate1d(a, k, axis=1, mode="mirror")


def _nearest(raw, masks, pattern):
    h, w = raw.shape
    out = np.zeros((h, w, 3))
    for c in (0, 2):
        (dr, dc), = pattern.offsets("RGB"[c])
        out[..., c] = np.repeat(np.repeat(raw[dr::2, dc::2], 2, axis=0), 2, axis=1)
    g = raw.copy()
    for dr in (0, 1):
        for dc in (0, 1):
            if pattern.channel_at(dr, dc) != "G":
                # each tile row holds exactly one G sample
                g[dr::2, dc::2] = raw[dr::2, 1 - dc::2]
    out[..., 1] = g
    return out


_K_G_BILINEAR = np.array([[0, 1, 0], [1, 4, 1], [0, 1, 0]]) / 4.0
_K_RB_BILINEAR_1D = np.array([1, 2, 1]) / 2.0


def _bilinear(raw, masks, pattern):
    out = np.empty(raw.shape + (3,))
    out[..., 1] = _conv(raw * masks[..., 1], _K_G_BILINEAR)
    for c in (0, 2):
        out[..., c] = _sep(raw * masks[..., c], _K_RB_BILINEAR_1D)
    return out


# Catmull-Rom at half-sample offsets: weights -1/16, 9/16, 9/16, -1/16.
_K_RB_CUBIC_1D = np.array([-1, 0, 9, 16, 9, 0, -1]) / 16.0


def _quincunx_cubic_kernel():
    # separable Catmull-Rom on the 45-degree rotated G lattice
    k = np.zeros((7, 7))
    w = {1: 9.0 / 16.0, 3: -1.0 / 16.0}
    for du in (-3, -1, 1, 3):
        for dv in (-3, -1, 1, 3):
            dx, dy = (du + dv) // 2, (du - dv) // 2
            k[3 + dy, 3 + dx] += w[abs(du)] * w[abs(dv)]
    k[3, 3] = 1.0
    return k


_K_G_CUBIC = _quincunx_cubic_kernel()


def _bicubic(raw, masks, pattern):
    out = np.empty(raw.shape + (3,))
    out[..., 1] = _conv(raw * masks[..., 1], _K_G_CUBIC)
    for c in (0, 2):
        out[..., c] = _sep(raw * masks[..., c], _K_RB_CUBIC_1D)
    return out


def _shift(p, pad, dy, dx):
    h, w = p.shape[0] - 2 * pad, p.shape[1] - 2 * pad
    return p[pad + dy:pad + dy + h, pad + dx:pad + dx + w]


def _acpi(raw, masks, pattern):
    """Hamilton-Adams: gradient-directed G, then R/B with second-order G correction."""
    pad = 2
    P = np.pad(raw, pad, mode="reflect")
    s = lambda dy, dx: _shift(P, pad, dy, dx)  # noqa: E731
    lap_h = 2 * raw - s(0, -2) - s(0, 2)
    lap_v = 2 * raw - s(-2, 0) - s(2, 0)
    d_h = np.abs(s(0, -1) - s(0, 1)) + np.abs(lap_h)
    d_v = np.abs(s(-1, 0) - s(1, 0)) + np.abs(lap_v)
    g_h = (s(0, -1) + s(0, 1)) / 2 + lap_h / 4
    g_v = (s(-1, 0) + s(1, 0)) / 2 + lap_v / 4
    g_est = np.where(d_h < d_v, g_h, np.where(d_v < d_h, g_v, (g_h + g_v) / 2))
    G = np.where(masks[..., 1], raw, g_est)

    Gp = np.pad(G, pad, mode="reflect")
    g = lambda dy, dx: _shift(Gp, pad, dy, dx)  # noqa: E731
    out = np.empty(raw.shape + (3,))
    out[..., 1] = G
    for c in (0, 2):
        mc = masks[..., c]
        Mp = np.pad(mc, pad, mode="reflect")
        horiz = _shift(Mp, pad, 0, 1)
        # at G sites: C is either left/right or above/below
        c_h = (s(0, -1) + s(0, 1)) / 2 + (2 * G - g(0, -1) - g(0, 1)) / 2
        c_v = (s(-1, 0) + s(1, 0)) / 2 + (2 * G - g(-1, 0) - g(1, 0)) / 2
        at_g = np.where(horiz, c_h, c_v)
        # at the opposite chroma site: C sits on the diagonals
        d_n = np.abs(s(-1, -1) - s(1, 1)) + np.abs(2 * G - g(-1, -1) - g(1, 1))
        d_p = np.abs(s(-1, 1) - s(1, -1)) + np.abs(2 * G - g(-1, 1) - g(1, -1))
        c_n = (s(-1, -1) + s(1, 1)) / 2 + (2 * G - g(-1, -1) - g(1, 1)) / 2
        c_p = (s(-1, 1) + s(1, -1)) / 2 + (2 * G - g(-1, 1) - g(1, -1)) / 2
        at_other = np.where(d_n < d_p, c_n, np.where(d_p < d_n, c_p, (c_n + c_p) / 2))
        out[..., c] = np.where(mc, raw, np.where(masks[..., 1], at_g, at_other))
    return out


# Malvar-He-Cutler gradient-corrected kernels (scaled by 1/8).
_MHC_G_AT_RB = np.array([
    [0, 0, -1, 0, 0],
    [0, 0, 2, 0, 0],
    [-1, 2, 4, 2, -1],
    [0, 0, 2, 0, 0],
    [0, 0, -1, 0, 0],
]) / 8.0
_MHC_C_AT_G_ROW = np.array([
    [0, 0, 0.5, 0, 0],
    [0, -1, 0, -1, 0],
    [-1, 4, 5, 4, -1],
    [0, -1, 0, -1, 0],
    [0, 0, 0.5, 0, 0],
]) / 8.0
_MHC_C_AT_G_COL = _MHC_C_AT_G_ROW.T
_MHC_C_AT_OPP = np.array([
    [0, 0, -1.5, 0, 0],
    [0, 2, 0, 2, 0],
    [-1.5, 0, 6, 0, -1.5],
    [0, 2, 0, 2, 0],
    [0, 0, -1.5, 0, 0],
]) / 8.0


def _hybrid(raw, masks, pattern):
    out = np.empty(raw.shape + (3,))
    out[..., 1] = np.where(masks[..., 1], raw, _conv(raw, _MHC_G_AT_RB))
    row_est = _conv(raw, _MHC_C_AT_G_ROW)
    col_est = _conv(raw, _MHC_C_AT_G_COL)
    opp_est = _conv(raw, _MHC_C_AT_OPP)
    for c in (0, 2):
        mc = masks[..., c]
        horiz = np.pad(mc, 1, mode="reflect")[1:-1, 2:]
        at_g = np.where(horiz, row_est, col_est)
        out[..., c] = np.where(mc, raw, np.where(masks[..., 1], at_g, opp_est))
    return out


_METHODS = {
    DemosaicMethod.NEAREST: _nearest,
    DemosaicMethod.BILINEAR: _bilinear,
    DemosaicMethod.BICUBIC: _bicubic,
    DemosaicMethod.ADAPTIVE_COLOR_PLANE: _acpi,
    DemosaicMethod.HYBRID: _hybrid,
}


def demosaic(img: BayerImage, method=DemosaicMethod.BILINEAR) -> np.ndarray:
    """Reconstruct an ``(H, W, 3)`` RGB image from a mosaic."""
    method = DemosaicMethod.parse(method)
    require_even(img.shape)
    raw = img.samples
    masks = img.pattern.masks(raw.shape)
    out = _METHODS[method](raw, masks, img.pattern)
    # sampled values pass through bit-exactly
    out = np.where(masks, raw[..., None], out)
    return np.clip(out, 0.0, 1.0)


def demosaic_quality(truth, method=DemosaicMethod.BILINEAR, pattern=CfaPattern.RGGB) -> dict:
    """Mosaic ``truth``, reconstruct it and score the reconstruction.

    MSSIM and PSNR are averaged over the three channels; GMSD compares
    central-difference magnitudes of the two gray conversions.
    """
    from .gradient import gradient_magnitude
    from .quality import gmsd, mssim, psnr

    truth = np.asarray(truth, dtype=np.float64)
    rec = demosaic(mosaic(truth, pattern), method)
    psnrs = [psnr(truth[..., k], rec[..., k]) for k in range(3)]
    return {
        "mssim": mssim(truth, rec),
        "psnr": float(np.mean(psnrs)),
        "gmsd": gmsd(gradient_magnitude(rgb_to_gray(truth)), gradient_magnitude(rgb_to_gray(rec))),
    }
