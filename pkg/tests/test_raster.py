import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from bayergrad.raster import (EDGE_SCENES, BayerImage, CfaPattern, make_edge_scene, mosaic, rgb_to_gray,
                              rotate_bayer, rotate_plane, superpixel_view)
from bayergrad.sift import image_rotation_homography

even = st.integers(2, 12).map(lambda n: 2 * n)


def rgb_images(h, w):
    return arrays(np.float64, (h, w, 3), elements=st.floats(0, 1))


@pytest.mark.parametrize("pattern", list(CfaPattern))
def test_mosaic_picks_declared_channel(pattern, rng):
    img = rng.random((6, 8, 3))
    m = mosaic(img, pattern)
    for r in range(6):
        for c in range(8):
            assert m.samples[r, c] == img[r, c, "RGB".index(pattern.channel_at(r, c))]


def test_each_tile_has_two_greens():
    for p in CfaPattern:
        tile = [p.channel_at(r, c) for r in (0, 1) for c in (0, 1)]
        assert sorted(tile) == ["B", "G", "G", "R"]


def test_odd_dimensions_rejected():
    with pytest.raises(ValueError):
        BayerImage(np.zeros((5, 4)), CfaPattern.RGGB)
    with pytest.raises(ValueError):
        mosaic(np.zeros((4, 7, 3)))


def test_samples_are_read_only():
    m = BayerImage(np.zeros((4, 4)), CfaPattern.RGGB)
    with pytest.raises(ValueError):
        m.samples[0, 0] = 1


@settings(max_examples=30, deadline=None)
@given(st.data(), even, even, st.sampled_from(list(CfaPattern)))
def test_superpixel_round_trip(data, h, w, pattern):
    img = data.draw(rgb_images(h, w))
    m = mosaic(img, pattern)
    sv = superpixel_view(m)
    assert sv.sp_shape == (h // 2, w // 2)
    assert np.array_equal(sv.reassemble().samples, m.samples)


@settings(max_examples=30, deadline=None)
@given(arrays(np.float64, (5, 6), elements=st.floats(0, 1)))
def test_gray_of_neutral_image_is_exact(v):
    img = np.repeat(v[..., None], 3, axis=2)
    assert np.array_equal(rgb_to_gray(img), v)


def test_gray_weights():
    assert rgb_to_gray(np.array([[[1.0, 0.0, 0.0]]]))[0, 0] == pytest.approx(0.299)
    assert rgb_to_gray(np.array([[[0.0, 0.0, 1.0]]]))[0, 0] == pytest.approx(0.114)


def test_rotate_quarter_turn_matches_index_oracle(rng):
    a = rng.random((9, 9))
    out = rotate_plane(a, 90)
    c = 4
    expect = np.zeros_like(a)
    for y in range(9):
        for x in range(9):
            # (dx, dy) -> (-dy, dx) about the centre
            expect[c + (x - c), c - (y - c)] = a[y, x]
    assert np.allclose(out, expect, atol=1e-12)


def test_rotate_bayer_agrees_with_homography():
    # a bright super-pixel block must land where the homography sends its centre
    h, w = 64, 80
    img = np.zeros((h, w, 3))
    img[20:24, 50:54] = 1.0
    rot = rotate_bayer(mosaic(img), 20)
    H = image_rotation_homography(20, (h, w))
    expect = H.apply([[51.5, 21.5]])[0]
    s = rot.samples
    yy, xx = np.mgrid[0:h, 0:w]
    got = np.array([(s * xx).sum() / s.sum(), (s * yy).sum() / s.sum()])
    assert np.hypot(*(got - expect)) < 0.5


def test_edge_scenes():
    for bg, fg in EDGE_SCENES.values():
        img = make_edge_scene(bg, fg)
        assert img.shape == (64, 64, 3)
        assert np.allclose(img[0, 0], bg) and np.allclose(img[32, 32], fg)
    with pytest.raises(ValueError):
        make_edge_scene((0, 0, 2), (0, 0, 0))


def test_superpixel_planes_of_2x2():
    m = BayerImage(np.array([[0.1, 0.2], [0.3, 0.4]]), CfaPattern.RGGB)
    sv = superpixel_view(m)
    assert (sv.R[0, 0], sv.G1[0, 0], sv.G2[0, 0], sv.B[0, 0]) == (0.1, 0.2, 0.3, 0.4)


def test_constant_colour_mosaic_tile():
    img = np.empty((4, 4, 3))
    img[...] = (0.2, 0.5, 0.9)
    assert np.array_equal(mosaic(img).samples[:2, :2], [[0.2, 0.5], [0.5, 0.9]])


def test_rotate_bayer_identity_and_full_turn(rng):
    m = mosaic(rng.random((8, 8, 3)))
    assert np.array_equal(rotate_bayer(m, 0).samples, m.samples)
    assert np.allclose(rotate_bayer(m, 360).samples, m.samples, atol=1e-6)


def test_rotate_bayer_quarter_turn_permutes_each_plane(rng):
    m = mosaic(rng.random((4, 4, 3)))
    out = superpixel_view(rotate_bayer(m, 90))
    src = superpixel_view(m)
    for name in ("R", "G1", "G2", "B"):
        p, q = src.plane(name), out.plane(name)
        for y in range(2):
            for x in range(2):
                # plane centre (0.5, 0.5): (dx, dy) -> (-dy, dx)
                assert q[x, 1 - y] == pytest.approx(p[y, x], abs=1e-12)
