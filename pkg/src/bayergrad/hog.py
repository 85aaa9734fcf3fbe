"""Histogram-of-oriented-gradients descriptors from any gradient field.

The descriptor only sees a :class:`~bayergrad.gradient.GradientField`, so the
same code serves gradients of a gray image and gradients taken straight off
a mosaic.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .gradient import GradientField, GradientOperator, gradients, magnitude, orientation


@dataclass(frozen=True)
class HogConfig:
    """Cell/block geometry and normalisation of a HOG descriptor.

    Parameters
    ----------
    cell : int
        Cell side in pixels.
    block : int
        Block side in cells.
    bins : int
        Unsigned orientation bins over [0, 180).
    block_stride : int
        Block step in cells.
    clip : float
        L2-Hys clipping level.
    """

    cell: int = 8
    block: int = 2
    bins: int = 9
    block_stride: int = 1
    clip: float = 0.2

    def __post_init__(self):
        for name in ("cell", "block", "bins", "block_stride"):
            if int(getattr(self, name)) < 1:
                raise ValueError(f"{name} must be a positive integer")
        if not self.clip > 0:
            raise ValueError("clip must be positive")

    def grid(self, height: int, width: int) -> tuple[int, int, int, int]:
        """Return ``(cells_y, cells_x, blocks_y, blocks_x)`` for a window."""
        if height % self.cell or width % self.cell:
            raise ValueError(f"window {width}x{height} is not divisible by the {self.cell}px cell")
        cy, cx = height // self.cell, width // self.cell
        if self.block > min(cy, cx):
            raise ValueError(f"{self.block}x{self.block} block does not fit a {cx}x{cy}-cell window")
        by = (cy - self.block) // self.block_stride + 1
        bx = (cx - self.block) // self.block_stride + 1
        return cy, cx, by, bx

    def length(self, height: int, width: int) -> int:
        _, _, by, bx = self.grid(height, width)
        return by * bx * self.block * self.block * self.bins


@dataclass(frozen=True, eq=False)
class HogDescriptor:
    window_w: int
    window_h: int
    values: np.ndarray


_EPS = 1e-12


def cell_histograms(f: GradientField, cfg: HogConfig = HogConfig()) -> np.ndarray:
    """Unnormalised ``(cells_y, cells_x, bins)`` orientation histograms.

    Each pixel votes its gradient magnitude into the two nearest bins,
    linearly weighted. Bin ``k`` is centred at ``k * 180 / bins`` degrees,
    so a horizontal gradient (vertical edge) lands in bin 0.
    """
    h, w = f.shape
    cy, cx, _, _ = cfg.grid(h, w)
    mag = magnitude(f)
    pos = orientation(f, signed=False) * (cfg.bins / 180.0)
    lo = np.floor(pos)
    frac = pos - lo
    b0 = lo.astype(int) % cfg.bins
    b1 = (b0 + 1) % cfg.bins
    cell_idx = (np.arange(h)[:, None] // cfg.cell) * cx + (np.arange(w)[None, :] // cfg.cell)
    n = cy * cx * cfg.bins
    hist = np.bincount((cell_idx * cfg.bins + b0).ravel(), (mag * (1 - frac)).ravel(), minlength=n)
    hist += np.bincount((cell_idx * cfg.bins + b1).ravel(), (mag * frac).ravel(), minlength=n)
    return hist.reshape(cy, cx, cfg.bins)


def _l2_hys(v, clip):
    v = v / np.sqrt(np.sum(v * v, axis=-1, keepdims=True) + _EPS)
    v = np.minimum(v, clip)
    return v / np.sqrt(np.sum(v * v, axis=-1, keepdims=True) + _EPS)


def hog(f: GradientField, cfg: HogConfig = HogConfig()) -> HogDescriptor:
    """HOG descriptor of a whole window (the field is the window).

    Blocks are L2-normalised, clipped at ``cfg.clip`` and renormalised.
    A 64x128 window with the default config gives 3780 values.
    """
    h, w = f.shape
    _, _, by, bx = cfg.grid(h, w)
    cells = cell_histograms(f, cfg)
    b, st = cfg.block, cfg.block_stride
    blocks = np.empty((by, bx, b * b * cfg.bins))
    for i in range(by):
        for j in range(bx):
            blocks[i, j] = cells[i * st:i * st + b, j * st:j * st + b].ravel()
    values = _l2_hys(blocks, cfg.clip).ravel()
    return HogDescriptor(w, h, values)


def hog_of_image(img, cfg: HogConfig = HogConfig(), op=GradientOperator.CENTRAL) -> HogDescriptor:
    """Gradients of a gray image or mosaic followed by :func:`hog`."""
    return hog(gradients(img, op), cfg)


def hog_distance(d1: HogDescriptor, d2: HogDescriptor) -> float:
    a = np.asarray(getattr(d1, "values", d1), dtype=np.float64)
    b = np.asarray(getattr(d2, "values", d2), dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"descriptor length mismatch: {a.size} vs {b.size}")
    return float(np.linalg.norm(a - b))


def gamma_compress(img, scale: float = 2.0, exponent: float = 0.5):
    """Contrast pre-compression ``(scale * img) ** exponent`` for dark, low bit-width inputs."""
    img = np.asarray(img, dtype=np.float64)
    if np.any(img < 0):
        raise ValueError("gamma compression needs nonnegative samples")
    return (scale * img) ** exponent


def render_glyphs(f: GradientField, cfg: HogConfig = HogConfig(), cell_px: int = 16) -> np.ndarray:
    """Draw each cell's histogram as a star of oriented strokes.

    A stroke is drawn along the edge direction (perpendicular to the
    gradient) with brightness proportional to the bin's share of the
    strongest bin in the image. Returns a float image in [0, 1].
    """
    cells = cell_histograms(f, cfg)
    cy, cx, nb = cells.shape
    peak = cells.max()
    out = np.zeros((cy * cell_px, cx * cell_px))
    if peak <= 0:
        return out
    half = (cell_px - 1) / 2.0
    t = np.linspace(-half, half, 2 * cell_px)
    for k in range(nb):
        edge = np.deg2rad(k * 180.0 / nb + 90.0)
        dx = np.rint(t * np.cos(edge)).astype(int)
        dy = np.rint(t * np.sin(edge)).astype(int)
        for i in range(cy):
            for j in range(cx):
                v = cells[i, j, k] / peak
                if v <= 0:
                    continue
                yy = i * cell_px + int(half) + dy
                xx = j * cell_px + int(half) + dx
                ok = (yy >= i * cell_px) & (yy < (i + 1) * cell_px) & (xx >= j * cell_px) & (xx < (j + 1) * cell_px)
                np.maximum.at(out, (yy[ok], xx[ok]), v)
    return out
