"""Experiment harness: per-image rows, an averages row, CSV and PNG artifacts.

Each experiment maps one RGB image to one or more result rows. Rows that
share a ``setting`` are averaged together; ``run_table`` appends those
averages with ``image = "average"``.
"""
from __future__ import annotations

import logging
import os
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from .datasets import load_suite
from .demosaic import DemosaicMethod, demosaic_quality
from .gradient import GradientOperator, channel_difference_diagnostics, gradient_magnitude
from .io import save_csv, save_image
from .multiscale import GaussianKernel, blur, blur_bayer, build_scale_space, resize, sigma_for_kernel
from .quality import gms, mse, mssim, psnr
from .raster import mosaic, rgb_to_gray, rotate_bayer, rotate_image
from .sift import detect, image_rotation_homography, repeatability, scale_homography, Homography

log = logging.getLogger(__name__)

EXPERIMENTS = ("table2", "table3", "table5", "table6", "fig6", "fig16")


# --------------------------------------------------------------------------- gradient equivalence


def gradient_maps(img, op=GradientOperator.CENTRAL):
    """Magnitude maps of the gray path and of the Bayer path for one RGB image."""
    return gradient_magnitude(rgb_to_gray(img), op), gradient_magnitude(mosaic(img), op)


def table2_rows(name, img):
    m_gray, m_bayer = gradient_maps(img)
    s_gray, s_bayer = gradient_maps(img, GradientOperator.SOBEL)
    # magnitude maps are compared as images clipped to [0, 1]
    a, b = np.clip(m_gray, 0, 1), np.clip(m_bayer, 0, 1)
    # intensity columns compare the two inputs the operators see: gray image and raw mosaic
    g, m = rgb_to_gray(img), mosaic(img).samples
    return [{
        "image": name,
        "setting": "central",
        "mssim": mssim(a, b),
        "psnr": psnr(a, b),
        "gmsd": gms(m_gray, m_bayer).gmsd,
        "gmsd_sobel": gms(s_gray, s_bayer).gmsd,
        "mssim_intensity": mssim(g, m),
        "psnr_intensity": psnr(g, m),
    }]


def fig6_rows(name, img, out_dir=None):
    m_gray, m_bayer = gradient_maps(img)
    g = gms(m_gray, m_bayer)
    diag = channel_difference_diagnostics(img)
    if out_dir:
        save_image(os.path.join(out_dir, f"{name}_grad_gray.png"), np.clip(m_gray, 0, 1), inverse=True)
        save_image(os.path.join(out_dir, f"{name}_grad_bayer.png"), np.clip(m_bayer, 0, 1), inverse=True)
        save_image(os.path.join(out_dir, f"{name}_gms_map.png"), g.gms_map)
    return [{
        "image": name,
        "setting": "central",
        "gmsd_central": g.gmsd,
        "gmsm_central": g.gmsm,
        "mean_grad_GR": float(diag["grad_GR"].mean()),
        "mean_grad_GB": float(diag["grad_GB"].mean()),
    }]


# --------------------------------------------------------------------------- demosaicing ladder


def table3_rows(name, img):
    rows = []
    for m in DemosaicMethod:
        q = demosaic_quality(img, m)
        rows.append({"image": name, "setting": m.value, **q})
    return rows


# --------------------------------------------------------------------------- blur / resize in the Bayer domain


def _compare_bayer(b1, b2):
    a, b = b1.samples, b2.samples
    return {"mssim": mssim(a, b), "mse": mse(a, b), "psnr": psnr(a, b)}


def table5_rows(name, img):
    """Super-pixel blur/resize of the mosaic against mosaicking the processed colour image."""
    img = img[: img.shape[0] // 4 * 4, : img.shape[1] // 4 * 4]
    m = mosaic(img)
    rows = []
    for ck in (3, 5, 7, 9):
        ref = mosaic(blur(img, GaussianKernel(ck)))
        rows.append({"image": name, "setting": f"blur bayer3/color{ck}",
                     **_compare_bayer(blur_bayer(m, GaussianKernel(3)), ref)})
    for sc in (0.5, 2.0):
        rows.append({"image": name, "setting": f"resize {sc:g}",
                     **_compare_bayer(resize(m, sc), mosaic(resize(img, sc)))})
        both = resize(blur_bayer(m, GaussianKernel(3)), sc)
        ref = mosaic(resize(blur(img, GaussianKernel(7)), sc))
        rows.append({"image": name, "setting": f"blur+resize {sc:g}", **_compare_bayer(both, ref)})
    return rows


# --------------------------------------------------------------------------- SIFT repeatability

SWEEP_BLUR = (3, 5, 7, 9)
SWEEP_SCALE = (0.5, 2.0)
SWEEP_ROTATE = (10, 20, 30)


def repeatability_sweep():
    """``(kind, parameter)`` settings of the repeatability sweep."""
    return ([("blur", k) for k in SWEEP_BLUR] + [("scale", s) for s in SWEEP_SCALE]
            + [("rotate", t) for t in SWEEP_ROTATE])


def transform_pair(img, kind, param):
    """Apply one transform to the colour image and to its mosaic.

    Returns ``(gray_transformed, bayer_transformed, H)`` with ``H`` mapping
    original to transformed full-resolution coordinates. Blur on the mosaic
    uses half the colour sigma on each super-pixel plane, so both paths see
    the same physical blur.
    """
    m = mosaic(img)
    if kind == "blur":
        sigma = sigma_for_kernel(param)
        g = rgb_to_gray(blur(img, GaussianKernel(param)))
        b = blur_bayer(m, GaussianKernel.for_sigma(sigma / 2))
        return g, b, Homography(np.eye(3))
    if kind == "scale":
        return rgb_to_gray(resize(img, param)), resize(m, param), scale_homography(param)
    if kind == "rotate":
        return (rgb_to_gray(rotate_image(img, param)), rotate_bayer(m, param),
                image_rotation_homography(param, img.shape))
    raise ValueError(f"unknown transform {kind!r}")


def _keypoints(src, s, octaves):
    return detect(build_scale_space(src, s=s, octaves=octaves))


def _octaves_for(shape, wanted=4):
    o = wanted
    while o > 1 and min(shape[:2]) / 2 ** (o - 1) < 8:
        o -= 1
    return o


def fig16_rows(name, img, s=3, t=3.0, settings=None):
    img = img[: img.shape[0] // 4 * 4, : img.shape[1] // 4 * 4]
    g0, b0 = rgb_to_gray(img), mosaic(img)
    o0 = _octaves_for(img.shape)
    k_gray, k_bayer = _keypoints(g0, s, o0), _keypoints(b0, s, o0)
    rows = []
    for kind, param in settings or repeatability_sweep():
        g1, b1, H = transform_pair(img, kind, param)
        o1 = _octaves_for(g1.shape)
        rc = repeatability(k_gray, _keypoints(g1, s, o1), H, t, g0.shape, g1.shape)
        rb = repeatability(k_bayer, _keypoints(b1, s, o1), H, t, b0.shape, b1.shape)
        rows.append({"image": name, "setting": f"{kind} {param:g}", "rep_color": rc, "rep_bayer": rb,
                     "diff": rc - rb})
    return rows


# --------------------------------------------------------------------------- harness


def _image_rows(args):
    experiment, name, img, out_dir = args
    if experiment == "table2":
        return table2_rows(name, img)
    if experiment == "table3":
        return table3_rows(name, img)
    if experiment == "table5":
        return table5_rows(name, img)
    if experiment == "fig6":
        return fig6_rows(name, img, out_dir)
    if experiment == "fig16":
        return fig16_rows(name, img)
    raise ValueError(f"unknown experiment {experiment!r}")


def average_rows(rows):
    """One ``image = "average"`` row per setting, arithmetic means of numeric columns."""
    settings = list(dict.fromkeys(r["setting"] for r in rows))
    out = []
    for st in settings:
        group = [r for r in rows if r["setting"] == st]
        avg = {"image": "average", "setting": st}
        for k, v in group[0].items():
            if k in avg or not isinstance(v, (int, float)):
                continue
            vals = np.array([r[k] for r in group], dtype=np.float64)
            avg[k] = float(np.mean(vals))
        out.append(avg)
    return out


def collect(experiment, images, out_dir=None, jobs=1):
    """Per-image rows for ``experiment`` over ``(name, rgb)`` pairs."""
    tasks = [(experiment, n, im, out_dir) for n, im in images]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            chunks = list(ex.map(_image_rows, tasks))
    else:
        chunks = [_image_rows(t) for t in tasks]
    return [r for c in chunks for r in c]


def table6_rows(images, repeats=5):
    from .pipeline import bench

    rep = bench([mosaic(im) for _, im in images], repeats=repeats)
    return [{"image": "average", "setting": r["label"], **{k: v for k, v in r.items() if k != "label"}}
            for r in rep.as_dicts()]


def run_table(experiment, dataset_dir, out_dir, jobs=1, limit=None):
    """Run ``experiment`` over the images of ``dataset_dir`` and write ``<out_dir>/<experiment>.csv``.

    Returns ``(data_rows, average_rows)``. The benchmark always runs
    serially and only reports averages.
    """
    if experiment not in EXPERIMENTS:
        raise ValueError(f"unknown experiment {experiment!r}; choose from {', '.join(EXPERIMENTS)}")
    os.makedirs(out_dir, exist_ok=True)
    images = load_suite(dataset_dir, limit=limit)
    if experiment == "table6":
        rows, avgs = [], table6_rows(images)
    else:
        rows = collect(experiment, images, out_dir if experiment == "fig6" else None, jobs)
        avgs = average_rows(rows)
    header = list(dict.fromkeys(k for r in rows + avgs for k in r))
    save_csv(os.path.join(out_dir, f"{experiment}.csv"), rows + avgs, header)
    log.info("%s: %d rows written to %s", experiment, len(rows), out_dir)
    return rows, avgs
