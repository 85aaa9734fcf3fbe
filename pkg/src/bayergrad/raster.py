"""Raster types, CFA bookkeeping and colour/gray/Bayer conversions.

Planar images are plain ``numpy`` float arrays, shape ``(H, W)`` for one
channel or ``(H, W, 3)`` for RGB, with intensities normalised to [0, 1]
(difference images may be signed). Mosaicked sensor data is wrapped in
:class:`BayerImage` so that the CFA phase travels with the samples.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

# ITU-R BT.601 luma weights (G carries ~60%).
GRAY_WEIGHTS = (0.299, 0.587, 0.114)

_CHANNEL_INDEX = {"R": 0, "G": 1, "B": 2}


class CfaPattern(enum.Enum):
    """2x2 Bayer layouts, named by the top-left tile read row-major."""

    RGGB = "RGGB"
    GRBG = "GRBG"
    GBRG = "GBRG"
    BGGR = "BGGR"

    @classmethod
    def parse(cls, value) -> "CfaPattern":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).upper())
        except ValueError:
            raise ValueError(f"unknown CFA pattern {value!r}") from None

    def channel_at(self, row: int, col: int) -> str:
        """Colour letter ('R', 'G' or 'B') sampled at ``(row, col)``."""
        return self.value[2 * (row % 2) + (col % 2)]

    def offsets(self, channel: str) -> list[tuple[int, int]]:
        """(row, col) offsets inside the 2x2 tile where ``channel`` is sampled."""
        return [(i // 2, i % 2) for i, c in enumerate(self.value) if c == channel]

    def channel_index_map(self, shape: tuple[int, int]) -> np.ndarray:
        """Integer map (0=R, 1=G, 2=B) of the sampled channel per pixel."""
        h, w = shape
        tile = np.array([_CHANNEL_INDEX[c] for c in self.value]).reshape(2, 2)
        return np.tile(tile, ((h + 1) // 2, (w + 1) // 2))[:h, :w]

    def masks(self, shape: tuple[int, int]) -> np.ndarray:
        """Boolean sampling masks, shape ``(H, W, 3)`` in R, G, B order."""
        idx = self.channel_index_map(shape)
        return np.stack([idx == c for c in range(3)], axis=-1)

    def plane_offsets(self) -> dict[str, tuple[int, int]]:
        """Tile offsets of the four super-pixel planes R, G1, G2, B."""
        g1, g2 = self.offsets("G")
        return {"R": self.offsets("R")[0], "G1": g1, "G2": g2, "B": self.offsets("B")[0]}


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=np.float64)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class BayerImage:
    """Single-channel mosaic tagged with its CFA pattern.

    ``samples`` is a read-only ``(H, W)`` float64 array in [0, 1].
    """

    samples: np.ndarray
    pattern: CfaPattern = CfaPattern.RGGB

    def __post_init__(self):
        s = np.asarray(self.samples)
        if s.ndim != 2:
            raise ValueError(f"Bayer samples must be 2-D, got shape {s.shape}")
        require_even(s.shape)
        if not np.all(np.isfinite(s)):
            raise ValueError("Bayer samples must be finite")
        if s.size and (s.min() < -1e-9 or s.max() > 1 + 1e-9):
            raise ValueError("Bayer samples must lie in [0, 1]")
        object.__setattr__(self, "samples", _readonly(s))
        object.__setattr__(self, "pattern", CfaPattern.parse(self.pattern))

    @property
    def height(self) -> int:
        return self.samples.shape[0]

    @property
    def width(self) -> int:
        return self.samples.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.samples.shape

    def with_samples(self, samples: np.ndarray) -> "BayerImage":
        return BayerImage(samples, self.pattern)


def require_even(shape, what="Bayer image"):
    h, w = shape[:2]
    if h % 2 or w % 2:
        raise ValueError(f"{what} needs even dimensions, got {w}x{h}")


@dataclass(frozen=True, eq=False)
class SuperPixelView:
    """The four co-registered half-resolution planes of a mosaic."""

    pattern: CfaPattern
    R: np.ndarray
    G1: np.ndarray
    G2: np.ndarray
    B: np.ndarray

    PLANES = ("R", "G1", "G2", "B")

    @property
    def sp_shape(self) -> tuple[int, int]:
        return self.R.shape

    def plane(self, name: str) -> np.ndarray:
        return getattr(self, name)

    def planes(self) -> list[np.ndarray]:
        return [self.R, self.G1, self.G2, self.B]

    def map(self, fn) -> "SuperPixelView":
        """Apply ``fn`` to every plane independently."""
        return SuperPixelView(self.pattern, *(np.asarray(fn(p), dtype=np.float64) for p in self.planes()))

    def reassemble(self) -> BayerImage:
        sh, sw = self.sp_shape
        out = np.empty((2 * sh, 2 * sw))
        for name, (dr, dc) in self.pattern.plane_offsets().items():
            out[dr::2, dc::2] = self.plane(name)
        return BayerImage(out, self.pattern)


def superpixel_view(img: BayerImage) -> SuperPixelView:
    require_even(img.shape)
    s = img.samples
    planes = {name: s[dr::2, dc::2].copy() for name, (dr, dc) in img.pattern.plane_offsets().items()}
    return SuperPixelView(img.pattern, **planes)


def rgb_to_gray(img: np.ndarray, weights=GRAY_WEIGHTS) -> np.ndarray:
    """Weighted RGB to gray conversion.

    Evaluated as ``G + wr*(R-G) + wb*(B-G)`` so that neutral pixels
    (R == G == B) map to exactly their common value.
    """
    img = np.asarray(img, dtype=np.float64)
    if img.ndim != 3 or img.shape[2] != 3:
        raise ValueError(f"rgb_to_gray expects an (H, W, 3) image, got shape {img.shape}")
    wr, _, wb = weights
    r, g, b = img[..., 0], img[..., 1], img[..., 2]
    return g + wr * (r - g) + wb * (b - g)


def mosaic(img: np.ndarray, pattern=CfaPattern.RGGB) -> BayerImage:
    """Resample an RGB image on the CFA lattice (keeps one channel per pixel)."""
    img = np.asarray(img, dtype=np.float64)
    if img.ndim != 3 or img.shape[2] != 3:
        raise ValueError(f"mosaic expects an (H, W, 3) image, got shape {img.shape}")
    require_even(img.shape)
    pattern = CfaPattern.parse(pattern)
    idx = pattern.channel_index_map(img.shape[:2])
    return BayerImage(np.take_along_axis(img, idx[..., None], axis=2)[..., 0], pattern)


def bayer_to_rgb_display(img: BayerImage) -> np.ndarray:
    """Show a mosaic as a sparse three-channel image (zeros where unsampled)."""
    masks = img.pattern.masks(img.shape)
    return masks * img.samples[..., None]


def rotate_plane(plane: np.ndarray, theta: float) -> np.ndarray:
    """Rotate a 2-D raster by ``theta`` degrees about its centre.

    The direction matches :func:`bayergrad.sift.rotation_homography`: a point
    ``(x, y)`` (column, row) moves to ``(x cos - y sin, x sin + y cos)``
    relative to the centre. Bilinear interpolation, zero outside the frame.
    """
    plane = np.asarray(plane, dtype=np.float64)
    if theta % 360 == 0:
        return plane.copy()
    h, w = plane.shape
    cy, cx = (h - 1) / 2.0, (w - 1) / 2.0
    t = np.deg2rad(theta)
    c, s = np.cos(t), np.sin(t)
    yy, xx = np.mgrid[0:h, 0:w].astype(np.float64)
    dx, dy = xx - cx, yy - cy
    # inverse map: output point -> source point
    sx = c * dx + s * dy + cx
    sy = -s * dx + c * dy + cy
    return ndimage.map_coordinates(plane, [sy, sx], order=1, mode="constant", cval=0.0)


def rotate_image(img: np.ndarray, theta: float) -> np.ndarray:
    """Rotate a gray or RGB image; see :func:`rotate_plane`."""
    img = np.asarray(img, dtype=np.float64)
    if img.ndim == 2:
        return rotate_plane(img, theta)
    return np.stack([rotate_plane(img[..., k], theta) for k in range(img.shape[2])], axis=-1)


def rotate_bayer(img: BayerImage, theta: float) -> BayerImage:
    """Rotate each super-pixel plane about its centre and re-interleave."""
    return superpixel_view(img).map(lambda p: rotate_plane(p, theta)).reassemble()


# Colour pairs of four synthetic square-edge scenes (background, foreground).
EDGE_SCENES = {
    "top_left": ((0.0, 0.0, 0.0), (1.0, 1.0, 1.0)),
    "top_right": ((0.2, 0.5, 0.2), (0.7, 1.0, 0.7)),
    "bottom_left": ((0.9, 0.45, 0.8), (0.7, 0.22, 0.6)),
    "bottom_right": ((0.0, 0.5, 1.0), (1.0, 0.5, 0.0)),
}


def make_edge_scene(bg, fg, size: int = 64) -> np.ndarray:
    """Uniform background with a centred square of side ``size // 2``."""
    bg = np.asarray(bg, dtype=np.float64)
    fg = np.asarray(fg, dtype=np.float64)
    for c in (bg, fg):
        if c.shape != (3,) or np.any(c < 0) or np.any(c > 1):
            raise ValueError("scene colours must be RGB triples in [0, 1]")
    img = np.empty((size, size, 3))
    img[...] = bg
    side = size // 2
    lo = (size - side) // 2
    img[lo:lo + side, lo:lo + side] = fg
    return img
