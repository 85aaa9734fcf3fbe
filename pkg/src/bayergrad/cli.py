"""Command-line interface.

Exit codes: 0 success, 1 usage error, 2 I/O error, 3 invariant violation
(bad dimensions, parameters out of range and similar).
"""
from __future__ import annotations

import argparse
import logging
import os
import sys

import numpy as np

from . import experiments
from .demosaic import DemosaicMethod, demosaic
from .gradient import GradientOperator, gradient_magnitude, gradients
from .hog import HogConfig, hog, render_glyphs
from .io import ImageFormatError, load_image, save_csv, save_image, write_float_dump
from .multiscale import build_scale_space, resize
from .noise import PRESETS, NoiseParams, add_noise
from .quality import gms, mssim, psnr
from .raster import BayerImage, CfaPattern, mosaic, rgb_to_gray, rotate_bayer, rotate_image
from .sift import (describe_all, detect, image_rotation_homography, match, orient_all,
                   repeatability, scale_homography)

log = logging.getLogger("bayergrad")

EXIT_OK, EXIT_USAGE, EXIT_IO, EXIT_INVARIANT = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def read_config(path) -> dict:
    """Flat ``key = value`` file; ``#`` starts a comment. Keys use option spelling."""
    out = {}
    with open(path) as fh:
        for n, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{n}: expected 'key = value'")
            k, v = (p.strip() for p in line.split("=", 1))
            out[k.replace("-", "_")] = v
    return out


# --------------------------------------------------------------------------- input helpers


def _load_mosaic(path, pattern) -> BayerImage:
    """A single-channel file is a mosaic; an RGB file is sampled on the CFA."""
    img = load_image(path)
    if isinstance(img, BayerImage):
        return img
    if img.ndim == 3:
        return mosaic(img, pattern)
    return BayerImage(img, pattern)


def _load_rgb(path):
    img = load_image(path, bayer=False)
    if img.ndim != 3:
        raise UsageError(f"{path}: an RGB image is required")
    return img


def _out_path(args, default_name):
    out = args.out or "."
    if os.path.splitext(out)[1]:
        os.makedirs(os.path.dirname(os.path.abspath(out)), exist_ok=True)
        return out
    os.makedirs(out, exist_ok=True)
    return os.path.join(out, default_name)


def _stem(path):
    return os.path.splitext(os.path.basename(path))[0]


# --------------------------------------------------------------------------- commands


def cmd_demosaic(args):
    rgb = demosaic(_load_mosaic(args.input, args.pattern), args.method)
    path = _out_path(args, f"{_stem(args.input)}_{DemosaicMethod.parse(args.method).value}.png")
    save_image(path, rgb, bit_depth=args.bit_depth)
    print(path)


def cmd_grad(args):
    img = load_image(args.input, bayer=False)
    if args.domain == "bayer":
        mag = gradient_magnitude(mosaic(img, args.pattern) if img.ndim == 3 else BayerImage(img, args.pattern),
                                 args.operator)
    else:
        mag = gradient_magnitude(img, args.operator)
    path = _out_path(args, f"{_stem(args.input)}_grad_{args.domain}.png")
    save_image(path, np.clip(mag, 0, 1), inverse=not args.no_inverse)
    if args.dump:
        write_float_dump(os.path.splitext(path)[0] + ".f32", mag)
    print(path)


def cmd_compare(args):
    if args.other is None:
        rgb = _load_rgb(args.input)
        a = gradient_magnitude(rgb_to_gray(rgb), args.operator)
        b = gradient_magnitude(mosaic(rgb, args.pattern), args.operator)
        label = "gray vs bayer gradients"
    else:
        a, b = load_image(args.input, bayer=False), load_image(args.other, bayer=False)
        if a.shape != b.shape:
            raise ValueError(f"image shapes differ: {a.shape} vs {b.shape}")
        label = "images"
    g = gms(a if a.ndim == 2 else rgb_to_gray(a), b if b.ndim == 2 else rgb_to_gray(b))
    ca, cb = np.clip(a, 0, 1), np.clip(b, 0, 1)
    row = {"image": _stem(args.input), "comparison": label, "mssim": mssim(ca, cb), "psnr_db": psnr(ca, cb),
           "gmsd": g.gmsd, "gmsm": g.gmsm}
    for k, v in row.items():
        print(f"{k}: {v}")
    if args.out:
        save_csv(_out_path(args, "compare.csv"), [row])


def cmd_pyramid(args):
    img = load_image(args.input, bayer=False)
    src = (mosaic(img, args.pattern) if img.ndim == 3 else BayerImage(img, args.pattern)) if args.domain == "bayer" \
        else (rgb_to_gray(img) if img.ndim == 3 else img)
    space = build_scale_space(src, s=args.s, octaves=args.octaves)
    out = args.out or "."
    os.makedirs(out, exist_ok=True)
    for oc in space.octaves:
        for i, lv in enumerate(oc.gaussians):
            save_image(os.path.join(out, f"octave{oc.index}_level{i}.png"), lv)
        for i, d in enumerate(oc.dogs):
            save_image(os.path.join(out, f"octave{oc.index}_dog{i}.png"), np.clip(0.5 + 4 * d, 0, 1))
    print(f"{len(space.octaves)} octaves written to {out}")


def cmd_hog(args):
    img = load_image(args.input, bayer=False)
    if img.ndim == 3:
        src = mosaic(img, args.pattern) if args.domain == "bayer" else rgb_to_gray(img)
    else:
        src = BayerImage(img, args.pattern) if args.domain == "bayer" else img
    raster = src.samples if isinstance(src, BayerImage) else src
    x, y, w, h = args.window or (0, 0, raster.shape[1], raster.shape[0])
    if args.domain == "bayer" and (x % 2 or y % 2):
        raise ValueError("a Bayer window must start on an even pixel to keep the CFA phase")
    if args.gamma:
        raster = (2.0 * raster) ** 0.5
    crop = raster[y:y + h, x:x + w]
    if crop.shape != (h, w):
        raise ValueError(f"window {w}x{h}+{x}+{y} exceeds the image")
    cfg = HogConfig(cell=args.cell)
    field = gradients(crop, args.operator)
    d = hog(field, cfg)
    stem = f"{_stem(args.input)}_hog_{args.domain}"
    out = args.out or "."
    os.makedirs(out, exist_ok=True)
    save_csv(os.path.join(out, stem + ".csv"), [list(d.values)], [f"v{i}" for i in range(d.values.size)])
    save_image(os.path.join(out, stem + ".png"), render_glyphs(field, cfg))
    print(f"{d.values.size} values written to {os.path.join(out, stem + '.csv')}")


def _space_for(img, domain, pattern, s, octaves):
    src = mosaic(img, pattern) if domain == "bayer" else rgb_to_gray(img)
    return build_scale_space(src, s=s, octaves=octaves)


def _parse_transform(text):
    try:
        kind, val = text.split(":")
        val = float(val)
    except ValueError:
        raise UsageError(f"transform must look like rotate:20 or scale:0.5, got {text!r}") from None
    if kind not in ("rotate", "scale"):
        raise UsageError(f"unknown transform {kind!r}")
    return kind, val


def _write_keypoints(path, kps):
    save_csv(path, [(k.x, k.y, k.scale, k.orientation, k.response) for k in kps],
             ["x", "y", "scale", "orientation", "response"])


def _draw_matches(path, g1, g2, p1, p2, pairs):
    import cv2

    h = max(g1.shape[0], g2.shape[0])
    canvas = np.zeros((h, g1.shape[1] + g2.shape[1], 3), np.uint8)
    canvas[:g1.shape[0], :g1.shape[1]] = (np.clip(g1, 0, 1) * 255).astype(np.uint8)[..., None]
    canvas[:g2.shape[0], g1.shape[1]:] = (np.clip(g2, 0, 1) * 255).astype(np.uint8)[..., None]
    for i, j, _ in pairs:
        a = (int(round(p1[i].x)), int(round(p1[i].y)))
        b = (int(round(p2[j].x)) + g1.shape[1], int(round(p2[j].y)))
        cv2.line(canvas, a, b, (255, 255, 0), 1, cv2.LINE_AA)
    cv2.imwrite(path, canvas)


def cmd_sift(args):
    img = _load_rgb(args.input)
    if args.verb == "detect":
        space = _space_for(img, args.domain, args.pattern, args.s, args.octaves)
        kps = orient_all(detect(space), space)
        path = _out_path(args, f"{_stem(args.input)}_kps_{args.domain}.csv")
        _write_keypoints(path, kps)
        print(f"{len(kps)} keypoints -> {path}")
        return
    if args.verb == "match":
        if args.other is None:
            raise UsageError("sift match needs a second image")
        img2 = _load_rgb(args.other)
        sp1 = _space_for(img, args.domain, args.pattern, args.s, args.octaves)
        sp2 = _space_for(img2, args.domain, args.pattern, args.s, args.octaves)
        d1 = describe_all(orient_all(detect(sp1), sp1), sp1)
        d2 = describe_all(orient_all(detect(sp2), sp2), sp2)
        ms = match(d1, d2)
        k1, k2 = [d.keypoint for d in d1], [d.keypoint for d in d2]
        path = _out_path(args, f"{_stem(args.input)}_{_stem(args.other)}_matches.png")
        _draw_matches(path, rgb_to_gray(img), rgb_to_gray(img2), k1, k2, ms.pairs)
        save_csv(os.path.splitext(path)[0] + ".csv",
                 [(k1[i].x, k1[i].y, k2[j].x, k2[j].y, d) for i, j, d in ms.pairs],
                 ["x1", "y1", "x2", "y2", "distance"])
        print(f"{len(ms)} matches ({ms.n1} vs {ms.n2} descriptors) -> {path}")
        return
    # repeat
    kind, val = _parse_transform(args.transform)
    m = mosaic(img, args.pattern)
    if kind == "rotate":
        g1, b1, H = rgb_to_gray(rotate_image(img, val)), rotate_bayer(m, val), image_rotation_homography(val, img.shape)
    else:
        g1, b1, H = rgb_to_gray(resize(img, val)), resize(m, val), scale_homography(val)
    for name, a, b in (("color", rgb_to_gray(img), g1), ("bayer", m, b1)):
        o = experiments._octaves_for(b.shape, args.octaves)
        ka = detect(build_scale_space(a, s=args.s, octaves=experiments._octaves_for(a.shape, args.octaves)))
        kb = detect(build_scale_space(b, s=args.s, octaves=o))
        print(f"{name}: repeatability {repeatability(ka, kb, H, args.t, a.shape, b.shape):.4f} "
              f"({len(ka)} / {len(kb)} keypoints)")


def cmd_noise(args):
    if args.preset:
        a, b = PRESETS[args.preset]
    else:
        if args.a is None or args.b is None:
            raise UsageError("give --preset or both --a and --b")
        a, b = args.a, args.b
    img = load_image(args.input)
    out = add_noise(img, NoiseParams(a, b, args.seed))
    ext = os.path.splitext(args.input)[1] or ".png"
    path = _out_path(args, f"{_stem(args.input)}_noisy{ext}")
    save_image(path, out, bit_depth=args.bit_depth)
    print(path)


def cmd_bench(args):
    from .datasets import load_suite
    from .pipeline import bench, default_specs

    images = [mosaic(im, args.pattern) for _, im in load_suite(args.dataset, limit=args.limit)]
    rep = bench(images, default_specs(args.blur_kernel, args.scale), repeats=args.repeats)
    rows = rep.as_dicts()
    for r in rows:
        print(f"{r['label']:<22} {r['wall_time_ms']:9.2f} ms  {r['peak_alloc_bytes'] / 1024:10.1f} KiB  "
              f"x{r['time_ratio']:.2f} time  x{r['memory_ratio']:.2f} memory")
    if args.out:
        save_csv(_out_path(args, "bench.csv"), rows)


def cmd_table(args):
    rows, avgs = experiments.run_table(args.experiment, args.dataset, args.out or ".", jobs=args.jobs,
                                       limit=args.limit)
    for a in avgs:
        print(", ".join(f"{k}={v:.4f}" if isinstance(v, float) else f"{k}={v}" for k, v in a.items()))


# --------------------------------------------------------------------------- parser


def _common():
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--pattern", type=CfaPattern.parse, default=CfaPattern.RGGB,
                   help="CFA layout: rggb, grbg, gbrg or bggr")
    p.add_argument("--operator", type=GradientOperator.parse, default=GradientOperator.CENTRAL,
                   help="central or sobel")
    p.add_argument("--out", help="output directory or file")
    p.add_argument("--config", help="key = value file; flags override it")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--jobs", type=int, default=1, help="worker processes for experiments")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = _Parser(prog="bayergrad", description="Gradient features straight from Bayer images.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("demosaic", parents=[common], help="reconstruct RGB from a mosaic")
    p.add_argument("input")
    p.add_argument("--method", type=DemosaicMethod.parse, default=DemosaicMethod.BILINEAR)
    p.add_argument("--bit-depth", type=int, choices=(8, 16), default=8)
    p.set_defaults(func=cmd_demosaic)

    p = sub.add_parser("grad", parents=[common], help="gradient magnitude map")
    p.add_argument("input")
    p.add_argument("--domain", choices=("gray", "bayer"), default="bayer")
    p.add_argument("--no-inverse", action="store_true", help="write magnitudes without inverting")
    p.add_argument("--dump", action="store_true", help="also write a raw float32 dump")
    p.set_defaults(func=cmd_grad)

    p = sub.add_parser("compare", parents=[common], help="gray vs Bayer gradients, or two images")
    p.add_argument("input")
    p.add_argument("other", nargs="?")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("pyramid", parents=[common], help="write Gaussian and DoG levels")
    p.add_argument("input")
    p.add_argument("--domain", choices=("gray", "bayer"), default="bayer")
    p.add_argument("--s", type=int, default=3)
    p.add_argument("--octaves", type=int, default=4)
    p.set_defaults(func=cmd_pyramid)

    p = sub.add_parser("hog", parents=[common], help="HOG descriptor of a window")
    p.add_argument("input")
    p.add_argument("--domain", choices=("gray", "bayer"), default="bayer")
    p.add_argument("--window", type=lambda t: tuple(int(v) for v in t.split(",")),
                   help="x,y,width,height (default: whole image)")
    p.add_argument("--cell", type=int, default=8)
    p.add_argument("--gamma", action="store_true", help="apply (2*x)**0.5 contrast compression first")
    p.set_defaults(func=cmd_hog)

    p = sub.add_parser("sift", parents=[common], help="keypoints, matches and repeatability")
    p.add_argument("verb", choices=("detect", "match", "repeat"))
    p.add_argument("input")
    p.add_argument("other", nargs="?")
    p.add_argument("--domain", choices=("gray", "bayer"), default="bayer")
    p.add_argument("--s", type=int, default=3)
    p.add_argument("--octaves", type=int, default=4)
    p.add_argument("--t", type=float, default=3.0)
    p.add_argument("--transform", default="rotate:20", help="rotate:DEG or scale:K for the repeat verb")
    p.set_defaults(func=cmd_sift)

    p = sub.add_parser("noise", parents=[common], help="add signal-dependent noise")
    p.add_argument("input")
    p.add_argument("--a", type=float)
    p.add_argument("--b", type=float)
    p.add_argument("--preset", choices=sorted(PRESETS))
    p.add_argument("--bit-depth", type=int, choices=(8, 16), default=8)
    p.set_defaults(func=cmd_noise)

    p = sub.add_parser("bench", parents=[common], help="time and memory of the two pipelines")
    p.add_argument("dataset")
    p.add_argument("--repeats", type=int, default=5)
    p.add_argument("--blur-kernel", type=int, default=3)
    p.add_argument("--scale", type=float, default=0.5)
    p.add_argument("--limit", type=int)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("table", parents=[common], help="run one experiment over a dataset")
    p.add_argument("experiment", choices=experiments.EXPERIMENTS)
    p.add_argument("--dataset", required=True)
    p.add_argument("--limit", type=int)
    p.set_defaults(func=cmd_table)
    return parser


def _apply_config(parser, argv):
    args = parser.parse_args(argv)
    if not args.config:
        return args
    values = read_config(args.config)
    sub = parser._subparsers._group_actions[0].choices[args.command]
    known = {a.dest: a for a in sub._actions}
    defaults = {}
    for k, v in values.items():
        if k not in known or k in ("config", "help"):
            raise UsageError(f"{args.config}: unknown key {k!r} for '{args.command}'")
        act = known[k]
        if act.const is not None and act.nargs == 0:
            defaults[k] = v.lower() in ("1", "true", "yes", "on")
        else:
            defaults[k] = act.type(v) if act.type else v
    sub.set_defaults(**defaults)
    return parser.parse_args(argv)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = _apply_config(parser, argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(levelname)s %(name)s: %(message)s")
        args.func(args)
    except SystemExit as exc:
        return int(exc.code or 0)
    except UsageError as exc:
        print(f"bayergrad: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, ImageFormatError) as exc:
        print(f"bayergrad: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ValueError, np.linalg.LinAlgError) as exc:
        print(f"bayergrad: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
