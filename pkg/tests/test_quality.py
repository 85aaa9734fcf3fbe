import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from bayergrad.quality import gms, gray_histogram, mse, mssim, psnr, ssim

maps = arrays(np.float64, (6, 6), elements=st.floats(0, 2))


def test_gms_scalar_oracle(rng):
    a, b = rng.random((16, 16)), rng.random((16, 16))
    r = gms(a, b)
    vals = [(2 * x * y + 0.0026) / (x * x + y * y + 0.0026) for x, y in zip(a.ravel(), b.ravel())]
    mean = sum(vals) / len(vals)
    sd = math.sqrt(sum((v - mean) ** 2 for v in vals) / len(vals))
    assert r.gmsm == pytest.approx(mean, abs=1e-12) and r.gmsd == pytest.approx(sd, abs=1e-12)


def test_gms_zero_maps():
    assert np.all(gms(np.zeros((4, 4)), np.zeros((4, 4))).gms_map == 1.0)


@settings(max_examples=50, deadline=None)
@given(maps, maps)
def test_gms_symmetric_and_bounded(a, b):
    r1, r2 = gms(a, b), gms(b, a)
    assert np.array_equal(r1.gms_map, r2.gms_map)
    assert np.all(r1.gms_map > 0) and np.all(r1.gms_map <= 1 + 1e-15)


@settings(max_examples=50, deadline=None)
@given(maps)
def test_gmsd_zero_for_identical(a):
    r = gms(a, a)
    assert r.gmsd == 0.0 and np.all(r.gms_map == 1.0)


def test_mse_psnr(rng):
    a, b = rng.random((7, 5)), rng.random((7, 5))
    oracle = sum(((x - y) * 255) ** 2 for x, y in zip(a.ravel(), b.ravel())) / a.size
    assert mse(a, b) == pytest.approx(oracle)
    assert psnr(a, b) == pytest.approx(10 * math.log10(255 ** 2 / oracle))
    assert psnr(np.zeros((4, 4)), np.ones((4, 4))) == 0.0
    assert psnr(a, a) == math.inf
    with pytest.raises(ValueError):
        mse(a, b[:, :4])


def _ssim_oracle(a, b):
    """Direct windowed SSIM at every valid window position."""
    x = np.arange(11) - 5.0
    g = np.exp(-x * x / 4.5)
    w = np.outer(g, g) / np.outer(g, g).sum()
    c1, c2 = 0.01 ** 2, 0.03 ** 2
    vals = []
    for i in range(a.shape[0] - 10):
        for j in range(a.shape[1] - 10):
            pa, pb = a[i:i + 11, j:j + 11], b[i:i + 11, j:j + 11]
            ma, mb = (w * pa).sum(), (w * pb).sum()
            va, vb = (w * pa * pa).sum() - ma * ma, (w * pb * pb).sum() - mb * mb
            cov = (w * pa * pb).sum() - ma * mb
            vals.append((2 * ma * mb + c1) * (2 * cov + c2) / ((ma * ma + mb * mb + c1) * (va + vb + c2)))
    return float(np.mean(vals))


def test_ssim_window_oracle(rng):
    a, b = rng.random((16, 16)), rng.random((16, 16))
    smap, m = ssim(a, b)
    assert smap.shape == (6, 6)
    assert m == pytest.approx(_ssim_oracle(a, b), abs=1e-12)


def test_ssim_inverted_checkerboard():
    cb = (np.indices((16, 16)).sum(0) % 2).astype(float)
    assert mssim(cb, 1 - cb) < 0.5
    assert mssim(cb, cb) == 1.0


def test_ssim_window_too_large():
    with pytest.raises(ValueError):
        ssim(np.zeros((10, 20)), np.zeros((10, 20)))


def test_histogram(rng):
    assert np.count_nonzero(gray_histogram(np.full((4, 4), 0.3))) == 1
    two = np.zeros((4, 4))
    two[:2] = 1
    c = gray_histogram(two)
    assert c[0] == c[-1] == 8
    a = rng.uniform(-1, 1, 500)
    lo, hi = a.min(), a.max()
    naive = np.zeros(256, int)
    for v in a:
        naive[min(int((v - lo) / (hi - lo) * 256), 255)] += 1
    assert np.array_equal(gray_histogram(a), naive)
