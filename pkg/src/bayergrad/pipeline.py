"""Bayer-direct and demosaic-first gradient pipelines with timing and allocation probes."""
from __future__ import annotations

import statistics
import time
import tracemalloc
from dataclasses import dataclass

import numpy as np

from .demosaic import DemosaicMethod, demosaic
from .gradient import GradientOperator, gradients, magnitude
from .multiscale import GaussianKernel, blur, blur_bayer, resize
from .raster import BayerImage, require_even, rgb_to_gray


@dataclass(frozen=True)
class PipelineSpec:
    """``variant`` is ``"pipeline1"`` (Bayer direct) or ``"pipeline2"`` (demosaic first).

    ``blur_kernel`` is the super-pixel kernel size; the demosaic-first path
    uses the matching ``2 * blur_kernel + 1`` kernel on full-resolution
    channels.
    """

    variant: str = "pipeline1"
    method: DemosaicMethod | None = None
    blur_kernel: int = 3
    resize_scale: float = 0.5
    operator: GradientOperator = GradientOperator.CENTRAL

    def __post_init__(self):
        if self.variant not in ("pipeline1", "pipeline2"):
            raise ValueError(f"unknown pipeline variant {self.variant!r}")
        if self.variant == "pipeline2":
            object.__setattr__(self, "method", DemosaicMethod.parse(self.method or DemosaicMethod.BILINEAR))
        elif self.method is not None:
            raise ValueError("the Bayer-direct pipeline takes no demosaicing method")

    @property
    def label(self) -> str:
        return "pipeline1" if self.variant == "pipeline1" else f"pipeline2/{self.method.value}"


def _pipeline1(img, spec):
    b = blur_bayer(img, GaussianKernel(spec.blur_kernel))
    r = resize(b, spec.resize_scale)
    return magnitude(gradients(r, spec.operator))


def _pipeline2(img, spec):
    rgb = demosaic(img, spec.method)
    b = blur(rgb, GaussianKernel(2 * spec.blur_kernel + 1))
    r = resize(b, spec.resize_scale)
    return magnitude(gradients(rgb_to_gray(r), spec.operator))


def compute(img: BayerImage, spec: PipelineSpec) -> np.ndarray:
    """Gradient magnitude map produced by ``spec`` (no instrumentation)."""
    require_even(img.shape)
    return _pipeline1(img, spec) if spec.variant == "pipeline1" else _pipeline2(img, spec)


@dataclass(frozen=True, eq=False)
class PipelineRun:
    magnitude: np.ndarray
    wall_time_ms: float
    peak_alloc_bytes: int


def run_pipeline(img: BayerImage, spec: PipelineSpec, repeats: int = 5) -> PipelineRun:
    """Run ``spec`` on ``img``: median wall time of ``repeats`` warm runs and peak traced allocation.

    Allocation is measured in a separate traced run so tracing does not
    distort the timings.
    """
    if repeats < 1:
        raise ValueError("repeats must be at least 1")
    out = compute(img, spec)  # warm-up
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        compute(img, spec)
        times.append((time.perf_counter() - t0) * 1e3)
    was_tracing = tracemalloc.is_tracing()
    if not was_tracing:
        tracemalloc.start()
    tracemalloc.reset_peak()
    base = tracemalloc.get_traced_memory()[0]
    compute(img, spec)
    peak = tracemalloc.get_traced_memory()[1] - base
    if not was_tracing:
        tracemalloc.stop()
    return PipelineRun(out, statistics.median(times), int(peak))


@dataclass(frozen=True)
class BenchRow:
    label: str
    wall_time_ms: float
    peak_alloc_bytes: float
    time_ratio: float
    memory_ratio: float


@dataclass(frozen=True, eq=False)
class BenchReport:
    """Per-pipeline averages over images, normalised by the Bayer-direct pipeline."""

    rows: list

    def row(self, label: str) -> BenchRow:
        for r in self.rows:
            if r.label == label:
                return r
        raise KeyError(label)

    def as_dicts(self) -> list[dict]:
        return [r.__dict__.copy() for r in self.rows]


def default_specs(blur_kernel=3, resize_scale=0.5) -> list[PipelineSpec]:
    specs = [PipelineSpec("pipeline1", None, blur_kernel, resize_scale)]
    specs += [PipelineSpec("pipeline2", m, blur_kernel, resize_scale) for m in DemosaicMethod]
    return specs


def bench(images, specs=None, repeats: int = 5) -> BenchReport:
    """Benchmark every spec on every mosaic serially; the first spec must be the Bayer-direct one."""
    specs = list(specs or default_specs())
    if not specs or specs[0].variant != "pipeline1":
        raise ValueError("the first spec must be pipeline1 (the normalisation reference)")
    per = {s.label: ([], []) for s in specs}
    for img in images:
        for s in specs:
            r = run_pipeline(img, s, repeats)
            per[s.label][0].append(r.wall_time_ms)
            per[s.label][1].append(r.peak_alloc_bytes)
    ref_t = float(np.mean(per[specs[0].label][0]))
    ref_m = float(np.mean(per[specs[0].label][1]))
    rows = []
    for s in specs:
        t = float(np.mean(per[s.label][0]))
        m = float(np.mean(per[s.label][1]))
        rows.append(BenchRow(s.label, t, m, t / ref_t, m / ref_m))
    return BenchReport(rows)
