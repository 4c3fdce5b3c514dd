import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from numpy.testing import assert_allclose

from aniso.fry import (NumericalError, PseudoFryContour, average_rotation, default_directions, fit_ellipsoid,
                       fit_levels, pseudo_fry)
from aniso.geometry import PointPattern, RectWindow
from aniso.second_order import FrySet, fry
from aniso.simulate import clustered_archetype, regular_archetype


def ellipse_points(a, b, rot, m=72):
    t = np.arange(m) * 2 * np.pi / m
    x = np.column_stack([a * np.cos(t), b * np.sin(t)])
    c, s = np.cos(rot), np.sin(rot)
    return x @ np.array([[c, s], [-s, c]])


def test_contour_of_unit_circle():
    u = default_directions(2)
    c = pseudo_fry(FrySet(np.concatenate([u, 3 * u]), None), 1)
    assert_allclose(c.radii, 1.0)
    assert_allclose(c.points, u, atol=1e-15)


def test_contour_radii_are_order_statistics():
    rng = np.random.default_rng(0)
    v = rng.normal(size=(500, 2))
    c = pseudo_fry(FrySet(v, None), 3)
    ang = np.arctan2(v[:, 1], v[:, 0])
    for uk, rk in zip(c.directions, c.radii):
        a = np.arctan2(uk[1], uk[0])
        d = np.abs((ang - a + np.pi) % (2 * np.pi) - np.pi)
        r = np.sort(np.linalg.norm(v[d < c.half_angle], axis=1))
        assert rk == r[2]


def test_contour_level_too_high():
    v = np.array([[1.0, 0.0], [0.0, 1.0]])
    with pytest.raises(ValueError, match="fewer than"):
        pseudo_fry(FrySet(v, None), 2)


def test_exact_ellipse():
    f = fit_ellipsoid(ellipse_points(2.0, 1.0, 0.0))
    assert_allclose(f.semi_axes, [2.0, 1.0], atol=1e-8)
    assert_allclose(min(f.rotation, np.pi - f.rotation), 0.0, atol=1e-8)
    g = fit_ellipsoid(ellipse_points(2.0, 1.0, np.pi / 6))
    assert_allclose(g.rotation, np.pi / 6, atol=1e-8)
    assert_allclose(g.semi_axes, [2.0, 1.0], atol=1e-8)


@settings(max_examples=30, deadline=None)
@given(st.floats(0.3, 5), st.floats(0.2, 1.0), st.floats(0, np.pi - 1e-3))
def test_exact_ellipse_any_rotation(a, ratio, rot):
    b = a * ratio
    f = fit_ellipsoid(ellipse_points(a, b, rot))
    assert_allclose(f.semi_axes, [a, b], rtol=1e-7)
    if ratio < 0.95:
        d = abs((f.rotation - rot + np.pi / 2) % np.pi - np.pi / 2)
        assert d < 1e-6


def test_exact_ellipsoid_3d():
    rng = np.random.default_rng(1)
    u = rng.normal(size=(300, 3))
    u /= np.linalg.norm(u, axis=1, keepdims=True)
    q, _ = np.linalg.qr(rng.normal(size=(3, 3)))
    x = (u * [3.0, 2.0, 1.0]) @ q.T
    f = fit_ellipsoid(x)
    assert_allclose(f.semi_axes, [3.0, 2.0, 1.0], rtol=1e-8)
    assert_allclose(np.abs(f.axes.T @ q), np.eye(3), atol=1e-8)
    assert np.linalg.det(f.rotation) > 0


def test_noisy_circle_ratio():
    ratios = []
    for seed in range(100):
        rng = np.random.default_rng(seed)
        x = ellipse_points(1.0, 1.0, 0.0, 72) + rng.normal(0, 0.01, (72, 2))
        f = fit_ellipsoid(x)
        ratios.append(f.semi_axes[0] / f.semi_axes[1])
    assert 0.98 <= min(ratios) and max(ratios) <= 1.02


def test_noise_correction_reduces_bias():
    rng = np.random.default_rng(4)
    x = ellipse_points(2.0, 1.0, 0.3, 400)
    y = x + rng.normal(0, 0.1, x.shape)
    plain = fit_ellipsoid(y, sigma2=0.0)
    corr = fit_ellipsoid(y, sigma2=0.01)
    err = lambda f: np.abs(f.semi_axes - [2.0, 1.0]).sum()   # noqa: E731
    assert err(corr) < err(plain)


def test_fit_errors():
    with pytest.raises(ValueError, match="at least"):
        fit_ellipsoid(np.ones((3, 2)))
    # points on a hyperbola give an indefinite form
    t = np.linspace(-1.5, 1.5, 40)
    x = np.column_stack([np.cosh(t), np.sinh(t)])
    with pytest.raises(NumericalError):
        fit_ellipsoid(np.concatenate([x, -x]), sigma2=0.0)


def test_single_contour_consensus():
    rng = np.random.default_rng(2)
    u = default_directions(2)
    a = np.array([[np.cos(0.4), -np.sin(0.4)], [np.sin(0.4), np.cos(0.4)]])
    m = a @ np.diag([1 / 4.0, 1.0]) @ a.T
    rad = 1 / np.sqrt(np.einsum("ij,jk,ik->i", u, m, u)) + rng.normal(0, 0.02, len(u))
    c = PseudoFryContour(5, u, np.pi / 36, rad)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        one = fit_ellipsoid(c)
        avg = average_rotation([c], seed=0)
    assert abs(np.degrees(one.rotation - avg.rotation)) < 1.0
    assert abs(np.degrees(one.rotation - 0.4)) < 2.0


def test_regular_archetype_consensus_axis():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        rots = [np.degrees(fit_levels(regular_archetype(s), range(3, 10))[1].rotation)
                for s in range(5)]
    # stretch axis of the regular archetype lies at 150 degrees
    assert abs(np.median(rots) - 150) < 10


def test_clustered_archetype_consensus_axis():
    p = clustered_archetype(0)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        _, f = fit_levels(p, (100, 150, 200))
    # main axis perpendicular to the stripes (stripes at 126 degrees)
    d = (np.degrees(f.rotation) - 36 + 90) % 180 - 90
    assert abs(d) < 10


def test_fit_levels_on_small_pattern():
    p = PointPattern(np.random.default_rng(0).random((60, 2)), RectWindow.square(0, 1))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        contours, f = fit_levels(p, (3, 4, 5))
    assert len(f.info["fits"]) >= 1
    assert f.info["levels"] == [g.info["level"] for g in f.info["fits"]]
    assert fry(p).vectors.shape == (60 * 59, 2)
