"""Image, CSV and raw-float file I/O.

PNG goes through OpenCV (8/16-bit, gray or RGB); binary PGM/PPM is parsed
here so that truncated files produce a clear error. A Bayer reading of a
single-channel file needs a CFA pattern, given either explicitly or in a
sidecar text file ``<image>.cfa`` holding the pattern name.
"""
from __future__ import annotations

import csv
import math
import os
import re
import struct

import numpy as np

from .raster import BayerImage, CfaPattern, require_even


class ImageFormatError(ValueError):
    """Unsupported, malformed or truncated image file."""


_PNM_HEADER = re.compile(rb"\A(P[56])\s+(?:#[^\n]*\n\s*)*(\d+)\s+(?:#[^\n]*\n\s*)*(\d+)\s+(?:#[^\n]*\n\s*)*(\d+)\s")


def _read_pnm(path):
    with open(path, "rb") as fh:
        data = fh.read()
    m = _PNM_HEADER.match(data)
    if not m:
        raise ImageFormatError(f"{path}: not a binary PGM/PPM file")
    magic, w, h, maxval = m.group(1), int(m.group(2)), int(m.group(3)), int(m.group(4))
    if not 0 < maxval < 65536:
        raise ImageFormatError(f"{path}: bad maxval {maxval}")
    channels = 3 if magic == b"P6" else 1
    dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
    count = w * h * channels
    body = data[m.end():]
    if len(body) < count * dtype.itemsize:
        raise ImageFormatError(f"{path}: truncated file ({len(body)} of {count * dtype.itemsize} bytes)")
    arr = np.frombuffer(body, dtype=dtype, count=count).reshape((h, w, channels) if channels == 3 else (h, w))
    return arr, maxval


def _read_png(path):
    import cv2

    arr = cv2.imread(os.fspath(path), cv2.IMREAD_UNCHANGED)
    if arr is None:
        raise ImageFormatError(f"{path}: unreadable or truncated PNG")
    if arr.ndim == 3:
        if arr.shape[2] == 4:
            arr = arr[..., :3]
        arr = arr[..., ::-1]  # BGR -> RGB
    if arr.dtype == np.uint8:
        maxval = 255
    elif arr.dtype == np.uint16:
        maxval = 65535
    else:
        raise ImageFormatError(f"{path}: unsupported PNG sample type {arr.dtype}")
    return arr, maxval


def read_raster(path):
    """Return the file's samples normalised to [0, 1] (float64)."""
    ext = os.path.splitext(os.fspath(path))[1].lower()
    if not os.path.exists(path):
        raise FileNotFoundError(f"{path}: no such file")
    if ext == ".png":
        arr, maxval = _read_png(path)
    elif ext in (".pgm", ".ppm", ".pnm"):
        arr, maxval = _read_pnm(path)
    else:
        raise ImageFormatError(f"{path}: unsupported format {ext!r} (PNG, PGM, PPM only)")
    return arr.astype(np.float64) / maxval


def _sidecar_pattern(path):
    side = os.fspath(path) + ".cfa"
    if os.path.exists(side):
        with open(side) as fh:
            return CfaPattern.parse(fh.read().strip())
    return None


def load_image(path, pattern=None, bayer=None):
    """Load a raster as a planar array or, for mosaics, a :class:`BayerImage`.

    A single-channel file is read as Bayer when ``pattern`` is given, when
    ``bayer`` is true, or when a ``.cfa`` sidecar exists.
    """
    data = read_raster(path)
    if pattern is None and bayer is not False:
        pattern = _sidecar_pattern(path)
    if bayer and pattern is None:
        raise ValueError(f"{path}: Bayer interpretation requested but no CFA pattern declared")
    if pattern is not None and bayer is not False:
        if data.ndim != 2:
            raise ImageFormatError(f"{path}: Bayer data must be a single-channel file")
        require_even(data.shape, f"{path}")
        return BayerImage(data, CfaPattern.parse(pattern))
    return data


def _quantise(img, bit_depth):
    maxval = (1 << bit_depth) - 1
    return np.rint(np.clip(img, 0.0, 1.0) * maxval).astype(np.uint8 if bit_depth == 8 else np.uint16)


def save_image(path, img, bit_depth=8, inverse=False, pattern_sidecar=True):
    """Write a [0, 1] raster to PNG/PGM/PPM.

    ``inverse`` writes ``1 - img`` (how gradient maps are usually shown).
    Saving a :class:`BayerImage` also writes its ``.cfa`` sidecar.
    """
    pattern = None
    if isinstance(img, BayerImage):
        pattern = img.pattern
        img = img.samples
    img = np.asarray(img, dtype=np.float64)
    if inverse:
        img = 1.0 - img
    if bit_depth not in (8, 16):
        raise ValueError("bit_depth must be 8 or 16")
    q = _quantise(img, bit_depth)
    ext = os.path.splitext(os.fspath(path))[1].lower()
    if ext == ".png":
        import cv2

        out = q[..., ::-1] if q.ndim == 3 else q
        if not cv2.imwrite(os.fspath(path), np.ascontiguousarray(out)):
            raise OSError(f"could not write {path}")
    elif ext in (".pgm", ".ppm", ".pnm"):
        if (q.ndim == 3) != (ext == ".ppm"):
            raise ImageFormatError(f"{path}: channel count does not match {ext}")
        magic = b"P6" if q.ndim == 3 else b"P5"
        h, w = q.shape[:2]
        header = b"%s\n%d %d\n%d\n" % (magic, w, h, (1 << bit_depth) - 1)
        body = q.astype(">u2").tobytes() if bit_depth == 16 else q.tobytes()
        with open(path, "wb") as fh:
            fh.write(header + body)
    else:
        raise ImageFormatError(f"{path}: unsupported output format {ext!r}")
    if pattern is not None and pattern_sidecar:
        with open(os.fspath(path) + ".cfa", "w") as fh:
            fh.write(pattern.value + "\n")


def _fmt(v):
    if isinstance(v, float):
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return repr(v)
    return str(v)


def save_csv(path, rows, header=None):
    """Write a list of dicts (or sequences plus ``header``) as CSV with a header row."""
    rows = list(rows)
    if header is None:
        if not rows or not isinstance(rows[0], dict):
            raise ValueError("header required for non-dict rows")
        header = list(rows[0].keys())
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(header)
        for r in rows:
            vals = [r.get(k, "") for k in header] if isinstance(r, dict) else list(r)
            wr.writerow([_fmt(v) for v in vals])


def read_csv(path):
    """Read a CSV written by :func:`save_csv`; numeric fields come back as floats."""
    out = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            parsed = {}
            for k, v in row.items():
                try:
                    parsed[k] = float(v)
                except ValueError:
                    parsed[k] = v
            out.append(parsed)
    return out


def write_float_dump(path, arr):
    """Little-endian float32 dump preceded by an 8-byte ``<width, height>`` header."""
    arr = np.asarray(arr, dtype="<f4")
    if arr.ndim != 2:
        raise ValueError("float dump expects a 2-D array")
    h, w = arr.shape
    with open(path, "wb") as fh:
        fh.write(struct.pack("<II", w, h))
        fh.write(arr.tobytes())


def read_float_dump(path):
    with open(path, "rb") as fh:
        data = fh.read()
    if len(data) < 8:
        raise ImageFormatError(f"{path}: truncated float dump")
    w, h = struct.unpack("<II", data[:8])
    if len(data) - 8 < 4 * w * h:
        raise ImageFormatError(f"{path}: truncated float dump")
    return np.frombuffer(data[8:8 + 4 * w * h], dtype="<f4").reshape(h, w).astype(np.float64)
