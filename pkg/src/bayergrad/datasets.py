"""Loading an image suite from a directory."""
from __future__ import annotations

import logging
import os

from .io import ImageFormatError, load_image

log = logging.getLogger(__name__)

IMAGE_EXTENSIONS = (".png", ".ppm", ".pnm")


def list_images(directory) -> list[str]:
    if not os.path.isdir(directory):
        raise FileNotFoundError(f"dataset directory not found: {directory}")
    names = sorted(n for n in os.listdir(directory) if n.lower().endswith(IMAGE_EXTENSIONS))
    return [os.path.join(directory, n) for n in names]


def even_crop(img, multiple: int = 2):
    """Crop bottom/right so both dimensions are multiples of ``multiple``."""
    h, w = img.shape[:2]
    return img[: h - h % multiple, : w - w % multiple]


def load_suite(directory, limit=None, multiple: int = 2) -> list[tuple[str, object]]:
    """RGB images of a directory as ``(name, array)``, sorted by file name.

    Unreadable or non-RGB files are skipped with a warning. Raises when
    nothing usable is left.
    """
    out = []
    for path in list_images(directory):
        try:
            img = load_image(path, bayer=False)
        except (ImageFormatError, OSError, ValueError) as exc:
            log.warning("skipping %s: %s", path, exc)
            continue
        if img.ndim != 3:
            log.warning("skipping %s: not an RGB image", path)
            continue
        out.append((os.path.splitext(os.path.basename(path))[0], even_crop(img, multiple)))
        if limit is not None and len(out) >= limit:
            break
    if not out:
        raise ValueError(f"no usable RGB images in {directory}")
    return out
