import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from bayergrad.multiscale import GaussianKernel, blur, blur_bayer, build_scale_space, resize, sigma_for_kernel
from bayergrad.raster import BayerImage, superpixel_view


def test_sigma_for_kernel():
    assert sigma_for_kernel(3) == pytest.approx(0.8)
    assert sigma_for_kernel(7) == pytest.approx(1.4)
    with pytest.raises(ValueError):
        sigma_for_kernel(4)


@pytest.mark.parametrize("size", [1, 3, 5, 9, 15])
def test_kernel_normalised_symmetric(size):
    k = GaussianKernel(size)
    assert k.taps.sum() == pytest.approx(1.0) and np.allclose(k.taps, k.taps[::-1])
    assert k.weights.sum() == pytest.approx(1.0)


@settings(max_examples=30, deadline=None)
@given(arrays(np.float64, (10, 12), elements=st.floats(0, 1)), st.sampled_from([3, 5, 7]))
def test_blur_preserves_mean_and_constants(a, size):
    assert blur(a, GaussianKernel(size)).mean() == pytest.approx(a.mean(), abs=1e-12)
    c = np.full((6, 8), 0.37)
    assert np.allclose(blur(c, GaussianKernel(size)), 0.37)


def test_bayer_blur_acts_per_plane(rng):
    img = BayerImage(rng.random((12, 16)))
    out = superpixel_view(blur_bayer(img, GaussianKernel(3)))
    for p_in, p_out in zip(superpixel_view(img).planes(), out.planes()):
        assert np.allclose(p_out, blur(p_in, GaussianKernel(3)))


def _resize_oracle(a, scale):
    h, w = a.shape
    oh, ow = round(h * scale), round(w * scale)
    out = np.zeros((oh, ow))
    for i in range(oh):
        for j in range(ow):
            y = min(max((i + 0.5) * h / oh - 0.5, 0), h - 1)
            x = min(max((j + 0.5) * w / ow - 0.5, 0), w - 1)
            y0, x0 = int(math.floor(y)), int(math.floor(x))
            y1, x1 = min(y0 + 1, h - 1), min(x0 + 1, w - 1)
            fy, fx = y - y0, x - x0
            out[i, j] = ((1 - fy) * (1 - fx) * a[y0, x0] + (1 - fy) * fx * a[y0, x1]
                         + fy * (1 - fx) * a[y1, x0] + fy * fx * a[y1, x1])
    return out


@pytest.mark.parametrize("scale", [0.5, 2.0, 0.75])
def test_resize_matches_scalar_oracle(rng, scale):
    a = rng.random((8, 12))
    assert np.allclose(resize(a, scale), _resize_oracle(a, scale), atol=1e-12)


def test_bayer_resize_per_plane(rng):
    img = BayerImage(rng.random((16, 12)))
    out = resize(img, 0.5)
    assert out.shape == (8, 6) and out.pattern is img.pattern
    for p_in, p_out in zip(superpixel_view(img).planes(), superpixel_view(out).planes()):
        assert np.allclose(p_out, _resize_oracle(p_in, 0.5))


def test_bad_scale():
    with pytest.raises(ValueError):
        resize(np.zeros((4, 4)), 0)
    with pytest.raises(ValueError):
        resize(np.zeros((4, 4)), 0.1)


def test_impulse_dog_matches_closed_form():
    n = 65
    img = np.zeros((n, n))
    img[32, 32] = 1.0
    space = build_scale_space(img, s=3, octaves=1, assumed_blur=0.0)
    oc = space.octaves[0]
    yy, xx = np.mgrid[0:n, 0:n] - 32.0
    r2 = xx * xx + yy * yy

    def g(s):
        return np.exp(-r2 / (2 * s * s)) / (2 * math.pi * s * s)

    for i, d in enumerate(oc.dogs):
        ref = g(oc.sigmas[i + 1]) - g(oc.sigmas[i])
        assert np.abs(d - ref).max() <= 0.02 * np.abs(ref).max()


def test_level_sigmas_and_lattice():
    space = build_scale_space(np.zeros((64, 64)), s=3, octaves=2)
    assert space.lattice == 1 and len(space.octaves) == 2
    oc = space.octaves[0]
    assert len(oc.gaussians) == 6 and len(oc.dogs) == 5
    assert oc.sigmas[3] == pytest.approx(3.2)
    assert space.octaves[1].gaussians[0].shape == (32, 32)
    b = build_scale_space(BayerImage(np.zeros((64, 64))), octaves=2)
    assert b.lattice == 2 and b.octaves[1].gaussians[0].shape == (32, 32)


def test_too_many_octaves():
    with pytest.raises(ValueError):
        build_scale_space(np.zeros((32, 32)), octaves=4)
