"""SIFT-style keypoints on gray and Bayer scale spaces, plus matching and geometry.

Detection, orientation and description all read the levels of a
:class:`~bayergrad.multiscale.ScaleSpace`. On a Bayer space the levels are
mosaics built on the super-pixel lattice, so the extremum search looks at
5x5 mosaic neighbours, quadratic refinement uses same-colour samples two
pixels apart, and gradients come from the central-difference template
(whose taps share a colour). Keypoint coordinates and scales are always
reported in full-resolution pixels.
"""
from __future__ import annotations

import math
import weakref
from dataclasses import dataclass, replace

import numpy as np
from scipy import ndimage

from .gradient import gradients
from .multiscale import ScaleSpace

CONTRAST_THRESHOLD = 0.03
EDGE_RATIO = 10.0
ORI_BINS = 36
ORI_PEAK_RATIO = 0.8
DESC_WIDTH = 4
DESC_BINS = 8
DESC_CLIP = 0.2
MATCH_RATIO = 0.8


@dataclass(frozen=True)
class Keypoint:
    """A scale-space extremum.

    ``x``/``y`` are full-resolution pixel coordinates, ``scale`` the
    absolute blur in full-resolution pixels and ``orientation`` degrees
    in [0, 360) measured in image coordinates (y pointing down).
    ``layer``, ``xo`` and ``yo`` locate the point inside its octave.
    """

    x: float
    y: float
    octave: int
    scale: float
    orientation: float = 0.0
    response: float = 0.0
    layer: float = 0.0
    xo: float = 0.0
    yo: float = 0.0


@dataclass(frozen=True, eq=False)
class SiftDescriptor:
    keypoint: Keypoint
    values: np.ndarray


@dataclass(frozen=True, eq=False)
class MatchSet:
    """One-to-one descriptor matches ``(i, j, distance)`` between two sets."""

    pairs: list
    n1: int
    n2: int

    def __post_init__(self):
        left = [p[0] for p in self.pairs]
        right = [p[1] for p in self.pairs]
        if len(set(left)) != len(left) or len(set(right)) != len(right):
            raise ValueError("matches must be one-to-one")
        if any(not 0 <= i < self.n1 for i in left) or any(not 0 <= j < self.n2 for j in right):
            raise ValueError("match index out of range")

    def __len__(self):
        return len(self.pairs)


# --------------------------------------------------------------------------- detection


def _refine(D, l, y, x, h, s):
    """Quadratic fit around a candidate; returns (position, offset, value, 2-D hessian) or None."""
    L, H, W = D.shape
    for _ in range(5):
        c = D[l, y, x]
        dx = (D[l, y, x + h] - D[l, y, x - h]) / (2 * h)
        dy = (D[l, y + h, x] - D[l, y - h, x]) / (2 * h)
        ds = (D[l + 1, y, x] - D[l - 1, y, x]) / 2
        dxx = (D[l, y, x + h] + D[l, y, x - h] - 2 * c) / (h * h)
        dyy = (D[l, y + h, x] + D[l, y - h, x] - 2 * c) / (h * h)
        dss = D[l + 1, y, x] + D[l - 1, y, x] - 2 * c
        dxy = (D[l, y + h, x + h] - D[l, y + h, x - h] - D[l, y - h, x + h] + D[l, y - h, x - h]) / (4 * h * h)
        dxs = (D[l + 1, y, x + h] - D[l + 1, y, x - h] - D[l - 1, y, x + h] + D[l - 1, y, x - h]) / (4 * h)
        dys = (D[l + 1, y + h, x] - D[l + 1, y - h, x] - D[l - 1, y + h, x] + D[l - 1, y - h, x]) / (4 * h)
        g = np.array([dx, dy, ds])
        hess = np.array([[dxx, dxy, dxs], [dxy, dyy, dys], [dxs, dys, dss]])
        try:
            off = -np.linalg.solve(hess, g)
        except np.linalg.LinAlgError:
            return None
        if abs(off[0]) < 0.5 * h and abs(off[1]) < 0.5 * h and abs(off[2]) < 0.5:
            value = c + 0.5 * float(g @ off)
            return (x, y, l), off, value, (dxx, dyy, dxy)
        x += h * int(round(off[0] / h))
        y += h * int(round(off[1] / h))
        l += int(round(off[2]))
        if not (1 <= l <= s and 2 * h <= x < W - 2 * h and 2 * h <= y < H - 2 * h):
            return None
    return None


def detect(space: ScaleSpace, contrast_threshold: float = CONTRAST_THRESHOLD,
           edge_ratio: float = EDGE_RATIO) -> list[Keypoint]:
    """Find refined DoG extrema that pass the contrast and edge tests."""
    s = space.s
    if any(len(o.dogs) < 3 for o in space.octaves):
        raise ValueError("detection needs at least three DoG levels per octave")
    h = space.step
    win = 5 if space.domain == "bayer" else 3
    edge_limit = (edge_ratio + 1) ** 2 / edge_ratio
    full_h, full_w = space.image_shape
    out = []
    for oc in space.octaves:
        D = np.stack(oc.dogs)
        mx = ndimage.maximum_filter(D, size=(3, win, win), mode="nearest")
        mn = ndimage.minimum_filter(D, size=(3, win, win), mode="nearest")
        cand = ((D == mx) | (D == mn)) & (np.abs(D) > 0.5 * contrast_threshold)
        b = 2 * h
        cand[0] = cand[-1] = False
        cand[:, :b] = cand[:, -b:] = False
        cand[:, :, :b] = cand[:, :, -b:] = False
        for l, y, x in zip(*np.nonzero(cand)):
            r = _refine(D, int(l), int(y), int(x), h, s)
            if r is None:
                continue
            (x1, y1, l1), off, value, (dxx, dyy, dxy) = r
            if abs(value) < contrast_threshold:
                continue
            tr, det = dxx + dyy, dxx * dyy - dxy * dxy
            if det <= 0 or tr * tr >= edge_limit * det:
                continue
            xo, yo, layer = x1 + off[0], y1 + off[1], l1 + off[2]
            fx, fy = space.to_full_res(xo, yo, oc.index)
            if not (0 <= fx <= full_w - 1 and 0 <= fy <= full_h - 1):
                continue
            scale = space.lattice * space.base_sigma * 2.0 ** (layer / s + oc.index)
            out.append(Keypoint(float(fx), float(fy), oc.index, float(scale), 0.0, float(value),
                                float(layer), float(xo), float(yo)))
    return out


# --------------------------------------------------------------------------- gradients per level

_GRAD_CACHE: "weakref.WeakKeyDictionary[ScaleSpace, dict]" = weakref.WeakKeyDictionary()


def _level_gradients(space, octave, level):
    cache = _GRAD_CACHE.setdefault(space, {})
    key = (octave, level)
    if key not in cache:
        f = gradients(space.octaves[octave].gaussians[level])
        mag = np.hypot(f.gx, f.gy)
        ang = np.degrees(np.arctan2(f.gy, f.gx)) % 360.0
        cache[key] = (mag, ang)
    return cache[key]


def _level_of(kp, space):
    return int(min(max(round(kp.layer), 0), len(space.octaves[kp.octave].gaussians) - 1))


def _octave_sigma(kp, space):
    # in raster pixels of the keypoint's octave
    return space.lattice * space.base_sigma * 2.0 ** (kp.layer / space.s)


def _window(mag, xo, yo, radius):
    H, W = mag.shape
    cx, cy = int(round(xo)), int(round(yo))
    if not (1 <= cx < W - 1 and 1 <= cy < H - 1):
        return None
    y0, y1 = max(cy - radius, 1), min(cy + radius, H - 2)
    x0, x1 = max(cx - radius, 1), min(cx + radius, W - 2)
    yy, xx = np.mgrid[y0:y1 + 1, x0:x1 + 1]
    return yy, xx, yy - cy, xx - cx


# --------------------------------------------------------------------------- orientation


def orientation_histogram(kp: Keypoint, space: ScaleSpace, bins: int = ORI_BINS):
    """Smoothed, Gaussian-weighted gradient-direction histogram around ``kp``.

    Returns ``None`` when the keypoint centre lies outside the level.
    """
    mag, ang = _level_gradients(space, kp.octave, _level_of(kp, space))
    sigma0 = 1.5 * _octave_sigma(kp, space)
    radius = int(round(3 * sigma0))
    w = _window(mag, kp.xo, kp.yo, radius)
    if w is None:
        return None
    yy, xx, dy, dx = w
    r2 = dx * dx + dy * dy
    inside = r2 <= radius * radius
    weight = np.exp(-r2 / (2 * sigma0 * sigma0)) * mag[yy, xx]
    pos = ang[yy, xx] * bins / 360.0
    lo = np.floor(pos)
    frac = pos - lo
    b0 = lo.astype(int) % bins
    hist = np.bincount(b0[inside], (weight * (1 - frac))[inside], minlength=bins)
    hist += np.bincount(((b0 + 1) % bins)[inside], (weight * frac)[inside], minlength=bins)
    # circular [1 4 6 4 1] smoothing
    k = np.array([1, 4, 6, 4, 1]) / 16.0
    return ndimage.correlate1d(hist, k, mode="wrap")


def orient(kp: Keypoint, space: ScaleSpace) -> list[Keypoint]:
    """One keypoint copy per histogram peak reaching 80% of the highest bin."""
    hist = orientation_histogram(kp, space)
    if hist is None:
        return []
    peak = hist.max()
    if peak <= 0:
        return []
    n = hist.size
    out = []
    for i in range(n):
        c, left, right = hist[i], hist[i - 1], hist[(i + 1) % n]
        if c > left and c > right and c >= ORI_PEAK_RATIO * peak:
            denom = left - 2 * c + right
            shift = 0.5 * (left - right) / denom if denom != 0 else 0.0
            theta = ((i + shift) * 360.0 / n) % 360.0
            out.append(replace(kp, orientation=float(theta)))
    return out


def orient_all(kps, space: ScaleSpace) -> list[Keypoint]:
    return [o for kp in kps for o in orient(kp, space)]


# --------------------------------------------------------------------------- description


def describe(kp: Keypoint, space: ScaleSpace):
    """4x4x8 descriptor of the rotated, scale-normalised patch around ``kp``.

    Each gradient votes trilinearly into (row, column, orientation) bins.
    Returns ``None`` for patches outside the level or without gradient.
    """
    d, n = DESC_WIDTH, DESC_BINS
    mag, ang = _level_gradients(space, kp.octave, _level_of(kp, space))
    hist_width = 3.0 * _octave_sigma(kp, space)
    radius = int(round(hist_width * math.sqrt(2) * (d + 1) * 0.5))
    radius = min(radius, int(math.hypot(*mag.shape)))
    w = _window(mag, kp.xo, kp.yo, radius)
    if w is None:
        return None
    yy, xx, dy, dx = w
    t = math.radians(kp.orientation)
    c, s = math.cos(t) / hist_width, math.sin(t) / hist_width
    # patch coordinates in the keypoint frame, in cell units
    col = dx * c + dy * s
    row = -dx * s + dy * c
    rbin = row + d / 2 - 0.5
    cbin = col + d / 2 - 0.5
    ok = (rbin > -1) & (rbin < d) & (cbin > -1) & (cbin < d)
    if not ok.any():
        return None
    rbin, cbin = rbin[ok], cbin[ok]
    weight = np.exp(-(col[ok] ** 2 + row[ok] ** 2) / (2 * (0.5 * d) ** 2)) * mag[yy[ok], xx[ok]]
    obin = ((ang[yy[ok], xx[ok]] - kp.orientation) % 360.0) * n / 360.0
    r0, c0, o0 = np.floor(rbin), np.floor(cbin), np.floor(obin)
    fr, fc, fo = rbin - r0, cbin - c0, obin - o0
    r0, c0, o0 = r0.astype(int) + 1, c0.astype(int) + 1, o0.astype(int)
    hist = np.zeros((d + 2, d + 2, n))
    for dr, wr in ((0, 1 - fr), (1, fr)):
        for dc, wc in ((0, 1 - fc), (1, fc)):
            for do, wo in ((0, 1 - fo), (1, fo)):
                np.add.at(hist, (r0 + dr, c0 + dc, (o0 + do) % n), weight * wr * wc * wo)
    v = hist[1:d + 1, 1:d + 1].ravel()
    norm = np.linalg.norm(v)
    if norm <= 0:
        return None
    v = np.minimum(v / norm, DESC_CLIP)
    return SiftDescriptor(kp, v / np.linalg.norm(v))


def describe_all(kps, space: ScaleSpace) -> list[SiftDescriptor]:
    out = []
    for kp in kps:
        desc = describe(kp, space)
        if desc is not None:
            out.append(desc)
    return out


def sift(space: ScaleSpace, **detect_kw) -> list[SiftDescriptor]:
    """Detect, orient and describe in one call."""
    return describe_all(orient_all(detect(space, **detect_kw), space), space)


# --------------------------------------------------------------------------- matching


def _values(ds):
    if len(ds) == 0:
        return np.zeros((0, DESC_WIDTH * DESC_WIDTH * DESC_BINS))
    return np.stack([np.asarray(getattr(x, "values", x), dtype=np.float64) for x in ds])


def match(a, b, ratio: float = MATCH_RATIO) -> MatchSet:
    """Mutual nearest neighbours that also pass the nearest/second-nearest ratio test."""
    A, B = _values(a), _values(b)
    n1, n2 = len(A), len(B)
    if n1 == 0 or n2 == 0:
        return MatchSet([], n1, n2)
    d2 = (A * A).sum(1)[:, None] + (B * B).sum(1)[None, :] - 2 * A @ B.T
    dist = np.sqrt(np.maximum(d2, 0.0))
    nn = dist.argmin(1)
    back = dist.argmin(0)
    pairs = []
    for i in range(n1):
        j = int(nn[i])
        if back[j] != i:
            continue
        best = dist[i, j]
        second = np.partition(dist[i], 1)[1] if n2 > 1 else np.inf
        if best < ratio * second or best == 0.0 and second > 0.0:
            pairs.append((i, j, float(best)))
    return MatchSet(pairs, n1, n2)


# --------------------------------------------------------------------------- geometry


@dataclass(frozen=True, eq=False)
class Homography:
    """3x3 projective map acting on row vectors: ``[x2, y2, 1] ~ [x1, y1, 1] @ H``."""

    matrix: np.ndarray
    rms_residual: float = float("nan")

    def __post_init__(self):
        m = np.array(self.matrix, dtype=np.float64)
        if m.shape != (3, 3):
            raise ValueError("homography must be 3x3")
        if m[2, 2] == 0 or not np.all(np.isfinite(m)):
            raise ValueError("homography has no finite normalised form")
        m = m / m[2, 2]
        cond = np.linalg.cond(m)
        if not np.isfinite(cond) or cond > 1e12:
            raise ValueError("homography is singular")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    def apply(self, pts) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(pts, dtype=np.float64))
        hom = np.hstack([pts, np.ones((len(pts), 1))]) @ self.matrix
        return hom[:, :2] / hom[:, 2:3]

    def inverse(self) -> "Homography":
        return Homography(np.linalg.inv(self.matrix))

    def __matmul__(self, other: "Homography") -> "Homography":
        # row convention: apply self first, then other
        return Homography(self.matrix @ other.matrix)

    @property
    def angle(self) -> float:
        """Rotation angle in degrees of the linear part."""
        return math.degrees(math.atan2(self.matrix[0, 1], self.matrix[0, 0]))


def _translation(tx, ty):
    return np.array([[1.0, 0, 0], [0, 1.0, 0], [tx, ty, 1.0]])


def rotation_homography(theta: float, center=(0.0, 0.0)) -> Homography:
    """Rotation by ``theta`` degrees about ``center`` (x, y).

    With rows ``[x, y, 1]`` the linear part is ``[[c, s], [-s, c]]``, so
    ``x2 = c*x - s*y`` and ``y2 = s*x + c*y`` relative to the centre;
    :func:`bayergrad.raster.rotate_plane` moves content the same way.
    """
    t = math.radians(theta)
    c, s = math.cos(t), math.sin(t)
    rot = np.array([[c, s, 0.0], [-s, c, 0.0], [0.0, 0.0, 1.0]])
    cx, cy = center
    return Homography(_translation(-cx, -cy) @ rot @ _translation(cx, cy))


def image_rotation_homography(theta: float, shape) -> Homography:
    """Rotation about the centre of an ``(H, W)`` raster, matching the resamplers."""
    h, w = shape[:2]
    return rotation_homography(theta, ((w - 1) / 2.0, (h - 1) / 2.0))


def scale_homography(scale: float) -> Homography:
    """Pixel-centre aligned resize: ``x2 = (x1 + 0.5) * scale - 0.5``."""
    off = 0.5 * scale - 0.5
    return Homography(np.array([[scale, 0, 0], [0, scale, 0], [off, off, 1.0]]))


def estimate_homography(src, dst) -> Homography:
    """Least-squares fit of ``dst ~ src @ H`` through the pseudo-inverse.

    Points are ``(N, 2)`` arrays; the fit is affine (last column fixed by
    the homogeneous ones). Raises on fewer than three or collinear points.
    """
    src = np.asarray(src, dtype=np.float64)
    dst = np.asarray(dst, dtype=np.float64)
    if src.shape != dst.shape or src.ndim != 2 or src.shape[1] != 2:
        raise ValueError("src and dst must be matching (N, 2) arrays")
    if len(src) < 3:
        raise ValueError("need at least three point pairs")
    A = np.hstack([src, np.ones((len(src), 1))])
    B = np.hstack([dst, np.ones((len(dst), 1))])
    sol, _, rank, _ = np.linalg.lstsq(A, B, rcond=None)
    if rank < 3:
        raise ValueError("degenerate (collinear) point configuration")
    sol[:, 2] = (0.0, 0.0, 1.0)
    pred = A @ sol
    rms = float(np.sqrt(np.mean(np.sum((pred[:, :2] - dst) ** 2, axis=1))))
    return Homography(sol, rms)


def _points(kps):
    if len(kps) == 0:
        return np.zeros((0, 2))
    if isinstance(kps, np.ndarray):
        return kps.reshape(-1, 2).astype(np.float64)
    return np.array([[k.x, k.y] if isinstance(k, Keypoint) else k for k in kps], dtype=np.float64)


def _inside(pts, shape):
    h, w = shape[:2]
    return (pts[:, 0] >= 0) & (pts[:, 0] <= w - 1) & (pts[:, 1] >= 0) & (pts[:, 1] <= h - 1)


def repeatability(kps1, kps2, H: Homography, t: float = 3.0, shape1=None, shape2=None) -> float:
    """Fraction of keypoints found again under the known map ``H`` (image 1 -> 2).

    Second-image points are projected back with ``H^-1``; a pair counts when
    it lies within ``t`` pixels, assigned greedily nearest-first so each point
    is used once. The result is ``M / min(n1, n2)``. Given both image shapes,
    only points whose projection lands inside the other image are counted.
    """
    p1, p2 = _points(kps1), _points(kps2)
    Hinv = H.inverse()
    if shape1 is not None and shape2 is not None:
        if len(p1):
            p1 = p1[_inside(H.apply(p1), shape2)]
        if len(p2):
            p2 = p2[_inside(Hinv.apply(p2), shape1)]
    n1, n2 = len(p1), len(p2)
    if n1 == 0 or n2 == 0:
        return 0.0
    back = Hinv.apply(p2)
    return _greedy_count(p1, back, t) / min(n1, n2)


def _greedy_count(p1, p2, t):
    diff = p1[:, None, :] - p2[None, :, :]
    dist = np.sqrt((diff ** 2).sum(-1))
    ii, jj = np.nonzero(dist <= t)
    order = np.argsort(dist[ii, jj], kind="stable")
    used1, used2 = set(), set()
    for k in order:
        i, j = int(ii[k]), int(jj[k])
        if i not in used1 and j not in used2:
            used1.add(i)
            used2.add(j)
    return len(used1)


def verify_matches(ms: MatchSet, kps1, kps2, H: Homography, t: float = 3.0) -> list:
    """Matches whose second point maps back within ``t`` pixels of the first."""
    p1, p2 = _points(kps1), _points(kps2)
    if not ms.pairs:
        return []
    back = H.inverse().apply(p2)
    return [p for p in ms.pairs if np.hypot(*(back[p[1]] - p1[p[0]])) <= t]
