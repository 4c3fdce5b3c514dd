import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from numpy.testing import assert_allclose

import oracles
from aniso.geometry import PointPattern, RectWindow
from aniso.simulate import Poisson, clustered_archetype, regular_archetype, simulate
from aniso.spectral import (bias_term, chi2_envelope, periodogram, periodogram_direct,
                            r_spectrum, smooth, theta_spectrum)
from conftest import random_pattern

W = RectWindow.square(-1.0, 1.0)


def test_periodogram_oracle(small2d):
    g = periodogram(small2d, 6)
    assert g.values.shape == (7, 12)
    assert_allclose(g.values, oracles.periodogram(small2d, 6), rtol=1e-12, atol=1e-13)
    assert_allclose(g.values, periodogram_direct(small2d, 6), rtol=1e-12, atol=1e-13)


def test_periodogram_at_zero(small2d):
    g = periodogram(small2d, 4)
    i, j = g.origin_index()
    assert_allclose(g.values[i, j], small2d.n ** 2 / small2d.window.volume)


def test_single_point():
    p = PointPattern([[0.3, -0.2]], W)
    assert_allclose(periodogram(p, 5).values, 1 / W.volume)


def test_periodogram_lattice():
    g = periodogram(random_pattern(10, window=RectWindow([0, 0], [2.0, 1.0])), 3)
    assert_allclose(g.omega1, 2 * np.pi * np.arange(4) / 2.0)
    assert_allclose(g.omega2, 2 * np.pi * np.arange(-3, 3) / 1.0)
    rows = g.to_rows()
    assert rows.shape == (4 * 6, 5)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10 ** 6), st.floats(-3, 3), st.floats(-3, 3))
def test_periodogram_translation_invariant(seed, dx, dy):
    p = random_pattern(25, seed=seed)
    q = PointPattern(p.points + [dx, dy], RectWindow(W.lo + [dx, dy], W.hi + [dx, dy]))
    assert_allclose(periodogram(q, 4).values, periodogram(p, 4).values, rtol=1e-9, atol=1e-9)


def test_bias_term_examples():
    w = RectWindow.square(0, 1)
    assert_allclose(bias_term(3.0, w, [0.0, 0.0]), 9.0)
    assert_allclose(bias_term(1.0, w, [np.pi, 0.0]), 4 / np.pi ** 2)
    lat = 2 * np.pi * np.array([[1, 0], [2, -3], [0, 5]])
    assert_allclose(bias_term(2.0, w, lat), 0.0, atol=1e-30)


def test_standardized_periodogram():
    p = random_pattern(20, seed=5, window=RectWindow([0, 0], [2.0, 1.0]))
    g = periodogram(p, 3, standardize=True)
    assert g.standardized
    assert_allclose(g.window.sides, [20, 20])


def test_smooth_constant_unchanged():
    g = periodogram(random_pattern(30), 8)
    g.values[:] = 2.5
    for kw in ({"method": "gaussian", "sigma": 1.5}, {"method": "moving_average", "repeats": 3}):
        assert_allclose(smooth(g, **kw).values, 2.5, rtol=1e-13)


def test_smooth_spike_mass_preserved():
    g = periodogram(random_pattern(30), 16)
    g.values[:] = 0.0
    g.values[8, 16] = 1.0            # p = (8, 0), far from the borders
    s = smooth(g, sigma=1.0)
    # total over the stored half plane; the mirror spike at -p is not stored
    assert_allclose(s.values.sum(), 1.0, atol=1e-9)
    assert s.smoothed == {"method": "gaussian", "sigma": 1.0}


def test_smooth_keeps_origin_out():
    g = periodogram(random_pattern(30), 6)
    s = smooth(g, method="moving_average")
    i, j = g.origin_index()
    assert s.values[i, j] == g.values[i, j]
    g2 = periodogram(random_pattern(30), 6)
    g2.values[i, j] = 1e9
    s2 = smooth(g2, method="moving_average")
    mask = np.ones_like(s.values, bool)
    mask[i, j] = False
    assert_allclose(s2.values[mask], s.values[mask])


def test_smooth_errors():
    g = periodogram(random_pattern(30), 4)
    with pytest.raises(ValueError):
        smooth(g, method="median")
    with pytest.raises(ValueError):
        smooth(g, sigma=0)


def test_spectra_counts():
    g = periodogram(random_pattern(30), 16)
    r = r_spectrum(g)
    t = theta_spectrum(g)
    assert_allclose(r.grid, np.arange(1, 17))
    assert r.counts.sum() == np.sum(np.hypot(*np.meshgrid(np.arange(17), np.arange(-16, 16),
                                                            indexing="ij"))[g.half_plane_mask()]
                                    <= 16)
    assert_allclose(t.grid, np.arange(0, 180, 10))
    assert np.all(t.counts > 0)


def test_chi2_envelope():
    lo, hi = chi2_envelope(1, 0.95)
    assert_allclose([lo, hi], [0.0253, 3.689], atol=1e-3)
    m = np.arange(3, 200)
    lo, hi = chi2_envelope(m, 0.5)
    assert np.all((lo < 1) & (hi > 1))
    lo, hi = chi2_envelope(1e6)
    assert_allclose([lo, hi], 1.0, atol=0.01)
    with pytest.raises(ValueError):
        chi2_envelope(0)


def test_poisson_mean_periodogram():
    vals = np.mean([periodogram(simulate(Poisson(200), W, 0, task=(k,)), 8).values
                    for k in range(100)], axis=0)
    g = periodogram(random_pattern(5), 8)
    mask = g.half_plane_mask()
    assert abs(vals[mask].mean() / 200 - 1) < 0.03


def test_csr_theta_inside_band():
    inside = []
    for k in range(40):
        p = simulate(Poisson(200), W, 1, task=(k,))
        t = theta_spectrum(periodogram(p))
        lo, hi = chi2_envelope(t.counts)
        ratio = t.values / p.intensity
        inside.append((ratio >= lo) & (ratio <= hi))
    assert 0.9 < np.mean(inside) < 0.99


def test_archetype_theta_spectra():
    t = theta_spectrum(smooth(periodogram(clustered_archetype(0)), sigma=1.0))
    assert abs(t.grid[np.nanargmax(t.values)] - 36) <= 10
    mins = [theta_spectrum(smooth(periodogram(regular_archetype(s)), sigma=2.0))
            for s in range(5)]
    assert abs(np.median([m.grid[np.nanargmin(m.values)] for m in mins]) - 60) <= 10


def test_rejects_3d(small3d):
    with pytest.raises(ValueError, match="planar"):
        periodogram(small3d)


def test_theta_mean_ordinate():
    g = periodogram(random_pattern(100, seed=2), 8)
    t = theta_spectrum(g)
    assert_allclose(np.sum(t.values * t.counts) / t.counts.sum(), t.extra["mean_ordinate"])
