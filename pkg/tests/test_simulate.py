import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from aniso.geometry import RectWindow
from aniso.second_order import pcf_isotropic
from aniso.simulate import (GeometricTransform, LineStripes, MaternII, Poisson, Strauss, Thomas,
                            apply_transform, clustered_archetype, inscribed_window, make_rng,
                            model_from_dict, regular_archetype, simulate, simulate_transformed)

W = RectWindow.square(-1.0, 1.0)


def test_same_seed_same_pattern():
    for spec in (Poisson(50), Strauss(50, 0.2, 0.1, 2000), MaternII(80, 0.05),
                 Thomas(10, 5, [[0.01, 0], [0, 0.01]]),
                 LineStripes(20, (((0.0, 0.0), 0.5),), 30, 0.03)):
        a = simulate(spec, W, 3, task=(1,))
        b = simulate(spec, W, 3, task=(1,))
        assert_array_equal(a.points, b.points)
        c = simulate(spec, W, 3, task=(2,))
        assert a.n != c.n or not np.array_equal(a.points, c.points)


def test_streams_independent_of_order():
    r1 = make_rng(5, 2).random(3)
    make_rng(5, 1).random(100)
    assert_array_equal(make_rng(5, 2).random(3), r1)


def test_poisson_count_law():
    n = np.array([simulate(Poisson(200), W, 0, task=(k,)).n for k in range(1000)])
    assert abs(n.mean() - 800) < 3 * np.sqrt(800 / 1000)
    assert 0.85 < n.var(ddof=1) / 800 < 1.15


def test_strauss_is_regular():
    p = simulate(Strauss(100, 0.1, 0.1), W, 1)
    g = pcf_isotropic(p, [0.04, 0.06, 0.08], h_r=0.02).values
    assert np.all(g < 1)
    assert 0 < p.metadata["accepted"] <= p.metadata["mcmc_steps"]


def test_strauss_gamma_one_matches_poisson_mean():
    n = [simulate(Strauss(60, 1.0, 0.1, 20000), W, 0, task=(k,)).n for k in range(60)]
    assert abs(np.mean(n) - 240) < 4 * np.sqrt(240 / 60)


def test_matern_hard_core():
    p = simulate(MaternII(300, 0.08), W, 2)
    d = np.linalg.norm(p.points[:, None] - p.points[None], axis=2)
    d[np.diag_indices(p.n)] = np.inf
    assert d.min() >= 0.08


def test_identity_transform():
    p = simulate(Poisson(50), W, 4)
    q = apply_transform(p, GeometricTransform([1.0, 1.0]))
    assert_array_equal(p.points, q.points)


def test_transform_preserves_intensity():
    t = GeometricTransform([2.0, 0.5])
    assert t.det == 1.0
    n = [simulate_transformed(Poisson(100), t, W, 0, task=(k,)).n for k in range(200)]
    assert abs(np.mean(n) - 400) < 4 * np.sqrt(400 / 200)


def test_compression_convention():
    t = GeometricTransform.compression(0.6, -np.pi / 6)
    # the compressed axis ends up at pi/2 - pi/6
    axis = t.matrix @ np.array([0.0, 1.0])
    assert_allclose(np.arctan2(axis[1], axis[0]) % np.pi, np.pi / 3)
    assert_allclose(np.linalg.norm(axis), 0.6)


def test_archetypes():
    p = regular_archetype(1)
    assert 100 < p.n < 170
    q = clustered_archetype(1)
    assert 1200 < q.n < 1500
    assert_array_equal(regular_archetype(1).points, p.points)


def test_inscribed_window_inside_image():
    m = GeometricTransform.compression(0.6, -np.pi / 6).matrix
    box = inscribed_window(W, m)
    corners = np.array([[box.lo[0], box.lo[1]], [box.hi[0], box.hi[1]],
                        [box.lo[0], box.hi[1]], [box.hi[0], box.lo[1]]])
    pre = corners @ np.linalg.inv(m).T
    assert W.contains(pre, tol=1e-9).all()


def test_model_from_dict():
    assert model_from_dict("poisson", {"lambda": 3}) == Poisson(3)
    assert model_from_dict("Strauss", {"beta": 1, "gamma": 0.5, "R": 0.1}).gamma == 0.5
    with pytest.raises(ValueError, match="unknown model"):
        model_from_dict("cox", {})
    with pytest.raises(ValueError, match="bad parameters"):
        model_from_dict("poisson", {"mu": 1})
    with pytest.raises(ValueError):
        Strauss(1, 1.5, 0.1)
