import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from numpy.testing import assert_allclose

from aniso.geometry import (CylinderSpec, Direction, PointPattern, RectWindow, SectorSpec,
                            border_distance, erode_by_ball, erode_by_sector, from_polar,
                            is_undefined, membership, to_polar, translation_overlap)

finite = st.floats(-50, 50, allow_nan=False)


def test_polar_examples():
    r, phi = to_polar([1.0, 0.0])
    assert (r, phi) == (1.0, 0.0)
    r, phi = to_polar([0.0, -2.0])
    assert r == 2.0
    assert_allclose(phi, 1.5 * np.pi)
    r, ang = to_polar([0.0, 0.0, 1.0])
    assert r == 1.0 and ang[1] == 0.0 and is_undefined(ang[0])
    assert is_undefined(to_polar([0.0, 0.0])[1])


@given(st.lists(finite, min_size=2, max_size=2).filter(lambda v: np.hypot(*v) > 1e-6))
def test_polar_roundtrip_2d(v):
    r, phi = to_polar(v)
    assert 0 <= phi < 2 * np.pi
    assert_allclose(from_polar(r, phi), v, atol=1e-9 * max(1.0, r))


@given(st.lists(finite, min_size=3, max_size=3).filter(lambda v: np.hypot(v[0], v[1]) > 1e-6))
def test_polar_roundtrip_3d(v):
    r, (phi, theta) = to_polar(v)
    assert 0 <= theta <= np.pi
    assert_allclose(from_polar(r, phi, theta), v, atol=1e-9 * max(1.0, r))


def test_translation_overlap_examples():
    w = RectWindow.square(0, 1)
    assert translation_overlap(w, [0, 0]) == 1.0
    assert_allclose(translation_overlap(w, [0.5, 0.25]), 0.375)
    assert translation_overlap(w, [1.5, 0]) == 0.0


@given(st.lists(st.floats(-3, 3), min_size=2, max_size=2))
def test_translation_overlap_symmetric_and_bounded(h):
    w = RectWindow([0, -1], [2, 1.5])
    a = translation_overlap(w, h)
    assert a == translation_overlap(w, -np.asarray(h))
    assert 0 <= a <= w.volume


def test_erosion_examples():
    w = RectWindow.square(0, 1)
    e = erode_by_ball(w, 0.25)
    assert_allclose(e.lo, [0.25, 0.25])
    assert_allclose(e.hi, [0.75, 0.75])
    assert erode_by_ball(w, 0.6) is None


def test_sector_erosion_contains_translates():
    w = RectWindow.square(-1, 1)
    s = SectorSpec(Direction.from_angle(0.0), np.pi / 2, 0.5)
    e = erode_by_sector(w, s)
    assert_allclose(e.lo, [-0.5, -0.5])
    assert_allclose(e.hi, [0.5, 0.5])
    # dense check: every translated sector point stays in W
    rng = np.random.default_rng(0)
    v = rng.uniform(-0.5, 0.5, (20000, 2))
    v = v[s.contains(v) & (np.hypot(v[:, 0], v[:, 1]) <= 0.5)]
    xs = np.stack(np.meshgrid(np.linspace(-0.5, 0.5, 7), np.linspace(-0.5, 0.5, 7)), -1)
    for x in xs.reshape(-1, 2):
        assert w.contains(x + v, tol=1e-12).all()


@settings(max_examples=40)
@given(st.floats(0, 2 * np.pi), st.floats(0.05, 1.5), st.floats(0.05, 0.6))
def test_sector_erosion_tight(alpha, eps, r):
    """The eroded box is the largest one: sector points reach the extents."""
    s = SectorSpec(Direction.from_angle(alpha), eps, r)
    w = RectWindow.square(-1, 1)
    e = erode_by_sector(w, s)
    t = np.linspace(-eps, eps, 4001)
    arc = r * np.column_stack([np.cos(alpha + t), np.sin(alpha + t)])
    reach = np.abs(np.concatenate([arc, -arc])).max(axis=0)
    assert_allclose(1 - e.hi, reach, atol=1e-6 * r)


def test_membership_examples():
    s = SectorSpec(Direction.from_angle(0.0), np.pi / 8)
    assert membership([1.0, 0.0], s)
    assert membership([-1.0, 0.0], s)
    assert membership([0.0, 0.0], s)
    cyl = CylinderSpec(Direction([1.0, 0.0]), 1.0, 0.3)
    assert not membership([0.5, 0.5], cyl)
    assert membership([0.9, -0.2], cyl)


def test_window_and_pattern_validation():
    with pytest.raises(ValueError):
        RectWindow([0, 0], [0, 1])
    w = RectWindow.square(0, 1)
    with pytest.raises(ValueError, match="inside"):
        PointPattern([[0.5, 1.5]], w)
    with pytest.raises(ValueError, match="duplicate"):
        PointPattern([[0.5, 0.5], [0.5, 0.5]], w)
    with pytest.raises(ValueError):
        CylinderSpec(Direction([1, 0]), 0.1, 0.2)
    with pytest.raises(ValueError):
        Direction([0.0, 0.0])
    assert PointPattern(np.empty((0, 2)), w).n == 0


def test_border_distance():
    w = RectWindow([0, 0], [2, 1])
    assert_allclose(border_distance([[0.5, 0.2], [1.9, 0.5]], w), [0.2, 0.1])
