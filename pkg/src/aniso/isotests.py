"""
Tests of the isotropy hypothesis.

* ``guan_test``: asymptotic chi-square test comparing second-order
  intensities at lags of equal length, with a block-subsampling
  covariance estimate.
* ``wong_test``: Kolmogorov-Smirnov type distance between the sector
  K-measure ratio and the uniform distribution of pair directions,
  calibrated by simulation from an isotropic null model.
* ``replicate_test``: axis contrasts of directional summaries across
  replicated patterns.
* ``ellipse_axis_test``: semi-axis contrasts of ellipses fitted to Fry
  contours, calibrated from the asymptotic normal law of the fitted
  coefficients.
* ``wavelet_direction_test``: per-direction Monte Carlo tests on the mean
  log scale-angle energy.
"""

import json
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import partial

import numpy as np
from scipy.integrate import trapezoid
from scipy.spatial import cKDTree
from scipy.stats import chi2

from .fry import EllipsoidFit, NumericalError, fit_levels
from .geometry import Direction, RectWindow, SectorSpec, translation_overlap
from .io import jsonable
from .nn import g_global, g_local
from .second_order import k_measure, pair_data, IntensityModel
from .simulate import make_rng, model_from_dict, model_to_dict, simulate
from .wavelet import cwt, energy, default_scales

__all__ = [
    "TestReport",
    "mc_pvalue",
    "successive_contrasts",
    "guan_statistic",
    "guan_test",
    "wong_distance",
    "wong_test",
    "replicate_test",
    "ellipse_axis_test",
    "wavelet_statistic",
    "wavelet_direction_test",
]

# sub-stream tags for null simulations
_TAG_WONG = 71
_TAG_WAVELET = 72
_TAG_ELLIPSE = 73


@dataclass(eq=False)
class TestReport:
    """Outcome of an isotropy test.

    Attributes
    ----------
    name : str
    statistic : float or ndarray
    p_value : float or ndarray
        In ``[0, 1]``; per direction for the wavelet test.
    calibration : dict
        ``kind`` is ``'asymptotic'``, ``'monte_carlo'`` or ``'replicate'``
        plus its details (degrees of freedom, number of simulations, null
        model, seed).
    parameters : dict
        Every tuning input, defaults included.
    critical_value : float, optional
    reject : bool or ndarray, optional
        Decision at ``parameters['alpha']``.
    simulated : ndarray, optional
        Null statistics from the simulations.
    notes : list of str
    extra : dict
    """

    __test__ = False  # not a pytest class

    name: str
    statistic: object
    p_value: object
    calibration: dict
    parameters: dict
    critical_value: float = None
    reject: object = None
    simulated: np.ndarray = None
    notes: list = field(default_factory=list)
    extra: dict = field(default_factory=dict)

    def to_dict(self):
        """JSON-serializable representation."""
        return jsonable({
            "name": self.name, "statistic": self.statistic, "p_value": self.p_value,
            "calibration": self.calibration, "parameters": self.parameters,
            "critical_value": self.critical_value, "reject": self.reject,
            "simulated": self.simulated, "notes": self.notes, "extra": self.extra,
        })

    def to_json(self, **kw):
        return json.dumps(self.to_dict(), **kw)


def mc_pvalue(observed, simulated):
    """``(1 + #{sims >= observed}) / (n_sims + 1)`` along the last axis."""
    sims = np.asarray(simulated, dtype=float)
    obs = np.asarray(observed, dtype=float)
    count = np.sum(sims >= obs[..., None] if obs.ndim else sims >= obs, axis=-1)
    return (1.0 + count) / (sims.shape[-1] + 1.0)


def _resolve_null(null):
    if isinstance(null, dict):
        d = dict(null)
        name = d.pop("model")
        if "params" in d:
            d = d["params"]
        return model_from_dict(name, d)
    return null


def _null_label(null):
    try:
        return model_to_dict(null)
    except TypeError:
        return getattr(null, "__name__", repr(null))


def _simulate_null(null, window, seed, task):
    if callable(null) and not hasattr(null, "__dataclass_fields__"):
        return null(seed, task)
    return simulate(null, window, seed, task)


def _null_stat(k, stat_fn, null, window, seed, tag):
    return stat_fn(_simulate_null(null, window, seed, (tag, k)))


def _run_sims(stat_fn, null, window, seed, tag, n_sims, workers):
    job = partial(_null_stat, stat_fn=stat_fn, null=null, window=window, seed=seed, tag=tag)
    if workers is None or workers <= 1 or n_sims < 2:
        return np.array([job(k) for k in range(n_sims)])
    with ProcessPoolExecutor(max_workers=int(workers)) as ex:
        return np.array(list(ex.map(job, range(n_sims), chunksize=max(1, n_sims // (4 * workers)))))


def successive_contrasts(k):
    """``(k - 1) x k`` matrix of successive differences."""
    a = np.zeros((k - 1, k))
    a[np.arange(k - 1), np.arange(k - 1)] = 1.0
    a[np.arange(k - 1), np.arange(1, k)] = -1.0
    return a


# ---------------------------------------------------------------------------
# Guan


def _fold(phi):
    return np.remainder(phi, np.pi)


def _lag_regions(v, lags, h, half_width):
    """Index of the lag whose polar box contains each pair vector, -1 if
    none. The box is ``| |v| - r | <= h`` and folded angle within
    ``half_width`` of the lag direction; it contains ``v`` and ``-v``."""
    r = np.linalg.norm(lags[0])
    dist = np.linalg.norm(v, axis=1)
    ang = _fold(np.arctan2(v[:, 1], v[:, 0]))
    lag_ang = _fold(np.arctan2(lags[:, 1], lags[:, 0]))
    out = np.full(v.shape[0], -1)
    ring = np.abs(dist - r) <= h
    for i, a in enumerate(lag_ang):
        d = np.abs((ang - a + np.pi / 2) % np.pi - np.pi / 2)
        out[ring & (d < half_width) & (out < 0)] = i
    return out


def _rho_estimates(x, window, lags, h, half_width):
    """Second-order intensity at each lag from pairs inside ``window``."""
    k = lags.shape[0]
    r = np.linalg.norm(lags[0])
    area = 4.0 * half_width * r * h  # two antipodal annular sectors
    if x.shape[0] < 2:
        return np.zeros(k), np.zeros(k, dtype=int)
    pr = cKDTree(x).query_pairs(r + h, output_type="ndarray")
    if pr.size == 0:
        return np.zeros(k), np.zeros(k, dtype=int)
    ii = np.concatenate([pr[:, 0], pr[:, 1]])
    jj = np.concatenate([pr[:, 1], pr[:, 0]])
    v = x[jj] - x[ii]
    reg = _lag_regions(v, lags, h, half_width)
    use = reg >= 0
    ov = translation_overlap(window, v[use])
    if np.any(ov <= 0):
        raise ValueError("window too small for subsampling: lag exceeds block size")
    est = np.bincount(reg[use], weights=1.0 / ov, minlength=k) / area
    counts = np.bincount(reg[use], minlength=k)
    return est, counts


def _default_lags(r, k):
    ang = np.arange(k) * np.pi / k
    return r * np.column_stack([np.cos(ang), np.sin(ang)])


def _min_separation(lags):
    ang = _fold(np.arctan2(lags[:, 1], lags[:, 0]))
    d = np.abs((ang[:, None] - ang[None, :] + np.pi / 2) % np.pi - np.pi / 2)
    d[np.diag_indices_from(d)] = np.inf
    return float(d.min())


def _guan_bandwidth(p, lags, half_width, min_pairs):
    """Smallest annulus half-width giving ``min_pairs`` ordered pairs in
    every lag region, capped at half the lag length."""
    r = float(np.linalg.norm(lags[0]))
    cap = 0.5 * r
    pairs = pair_data(p, r + cap, IntensityModel.constant(1.0))
    need = []
    for i, lag in enumerate(lags):
        reg = _lag_regions(pairs.v, lags, cap, half_width)
        d = np.sort(np.abs(pairs.dist[reg == i] - r))
        need.append(d[min_pairs - 1] if d.size >= min_pairs else np.inf)
    h = float(max(need))
    if not np.isfinite(h):
        warnings.warn(f"fewer than {min_pairs} pairs per lag even with h = r/2")
        return cap
    return h


def _blocks(window, n, lam, c):
    """Non-overlapping square-ish blocks holding about ``c^2 sqrt(n)``
    points each (side ``c n^{1/4} / sqrt(lambda)``)."""
    side = c * n ** 0.25 / np.sqrt(lam)
    nb = np.maximum(1, np.round(window.sides / side).astype(int))
    edges = [np.linspace(window.lo[j], window.hi[j], nb[j] + 1) for j in range(2)]
    return nb, edges


def guan_statistic(p, lags=None, r=None, k=4, contrast=None, h=None, block_factor=0.8,
                   half_width=None, min_pairs=200):
    """Compute Guan's statistic and its ingredients; see :func:`guan_test`."""
    if p.dim != 2:
        raise ValueError("guan_test is implemented for planar patterns")
    if lags is None:
        if r is None:
            raise ValueError("give either lags or the lag length r")
        lags = _default_lags(float(r), int(k))
    lags = np.atleast_2d(np.asarray(lags, dtype=float))
    k = lags.shape[0]
    if k < 2:
        raise ValueError("need at least two lags")
    norms = np.linalg.norm(lags, axis=1)
    if not np.allclose(norms, norms[0], rtol=1e-9, atol=0):
        raise ValueError("all lags must have the same length")
    r = float(norms[0])
    a = successive_contrasts(k) if contrast is None else np.atleast_2d(np.asarray(contrast, float))
    if a.shape[1] != k:
        raise ValueError("contrast matrix must have one column per lag")
    rank = np.linalg.matrix_rank(a)
    if rank != a.shape[0]:
        raise ValueError("contrast matrix must have full row rank")
    if half_width is None:
        half_width = 0.5 * _min_separation(lags)
    h = _guan_bandwidth(p, lags, half_width, min_pairs) if h is None else float(h)
    if not 0 < h < r:
        raise ValueError("annulus half-width h must satisfy 0 < h < r")
    w = p.window
    x = p.points
    g_hat, counts = _rho_estimates(x, w, lags, h, half_width)
    nb, edges = _blocks(w, p.n, p.intensity, block_factor)
    bx = np.clip(np.searchsorted(edges[0], x[:, 0], side="right") - 1, 0, nb[0] - 1)
    by = np.clip(np.searchsorted(edges[1], x[:, 1], side="right") - 1, 0, nb[1] - 1)
    bsides = np.array([edges[0][1] - edges[0][0], edges[1][1] - edges[1][0]])
    if nb.prod() < 4:
        raise ValueError("window too small for subsampling: fewer than 4 blocks")
    if r + h >= bsides.min():
        raise ValueError("window too small for subsampling: lag exceeds block size")
    block_est = []
    for ix in range(nb[0]):
        for iy in range(nb[1]):
            sel = (bx == ix) & (by == iy)
            bw = RectWindow([edges[0][ix], edges[1][iy]], [edges[0][ix + 1], edges[1][iy + 1]])
            block_est.append(_rho_estimates(x[sel], bw, lags, h, half_width)[0])
    block_est = np.array(block_est)
    # translation-weighted estimates behave like averages over |B cap B_z|
    # rather than |B|, so both scalings use the overlap at the lags
    barea = float(np.mean(np.prod(bsides[None, :] - np.abs(lags), axis=1)))
    warea = float(np.mean(translation_overlap(w, lags)))
    sigma = barea * h * h * np.cov(block_est, rowvar=False, ddof=1)
    m = a @ sigma @ a.T
    cond = np.linalg.cond(m)
    if not np.isfinite(cond) or cond > 1e12:
        raise NumericalError(f"singular contrast covariance (condition number {cond:.3g})")
    ag = a @ g_hat
    ts = float(warea * h * h * ag @ np.linalg.solve(m, ag))
    return {"statistic": ts, "rank": int(rank), "G": g_hat, "pair_counts": counts,
            "Sigma": sigma, "block_estimates": block_est, "lags": lags, "h": h,
            "half_width": float(half_width), "blocks": nb, "contrast": a}


def guan_test(p, lags=None, r=None, k=4, contrast=None, h=None, block_factor=0.8,
              half_width=None, min_pairs=200, alpha=0.05):
    """Asymptotic chi-square test of equal second-order intensity at lags
    of equal length in different directions.

    ``rho2(z_i)`` is estimated from ordered pairs whose difference vector
    falls in a polar box around ``z_i`` (and its antipode):
    ``| |v| - r | <= h`` and folded angle within ``half_width`` of the lag
    direction, weighted by ``1 / |W cap W_v|``. The boxes of different
    lags are disjoint. ``Sigma`` is estimated from the estimates on
    non-overlapping blocks with about ``c^2 sqrt(n)`` points each, scaled by
    ``|B| h^2``, and ``TS = |W| h^2 (A G)^T (A Sigma A^T)^{-1} (A G)`` is
    referred to ``chi2_rank(A)``.

    Parameters
    ----------
    p : PointPattern
    lags : array_like, shape (k, 2), optional
        Lag vectors of equal length; default ``k`` evenly spaced
        directions in ``[0, pi)`` at length ``r``.
    r : float, optional
    k : int
    contrast : array_like, optional
        Full row rank contrast matrix, default successive differences.
    h : float, optional
        Annulus half-width; default the smallest value putting
        ``min_pairs`` ordered pairs in every box.
    block_factor : float
        ``c`` in the block size rule.
    half_width : float, optional
        Angular half-width of the boxes, default half the smallest
        angular separation of the lags.
    alpha : float

    Returns
    -------
    TestReport
    """
    res = guan_statistic(p, lags, r, k, contrast, h, block_factor, half_width, min_pairs)
    df = res["rank"]
    pval = float(chi2.sf(res["statistic"], df))
    crit = float(chi2.ppf(1 - alpha, df))
    params = {"lags": res["lags"], "h": res["h"], "half_width": res["half_width"],
              "block_factor": block_factor, "blocks": res["blocks"], "min_pairs": min_pairs,
              "contrast": res["contrast"], "alpha": alpha}
    notes = []
    if np.any(res["pair_counts"] < min_pairs):
        notes.append(f"some lag boxes hold fewer than {min_pairs} pairs")
    return TestReport("guan", res["statistic"], pval, {"kind": "asymptotic", "df": df},
                      params, crit, pval < alpha, None, notes,
                      {"G": res["G"], "pair_counts": res["pair_counts"], "Sigma": res["Sigma"],
                       "block_estimates": res["block_estimates"]})


# ---------------------------------------------------------------------------
# Wong


def wong_distance(p, r, psi=None, theta_step=np.radians(1.0)):
    """``T_r = sup_psi sup_theta |theta/pi - F_{r,psi}(theta)|``.

    ``F_{r,psi}(theta)`` is the translation-weighted share of ordered
    pairs within distance ``r`` whose direction, taken modulo ``pi``,
    lies in ``[psi, psi + theta)`` (wrapping at ``pi``); it is the sector
    K-measure divided by the half-disc K-measure.

    Returns
    -------
    stat : float
    d : ndarray
        ``d_{r,psi}`` for each ``psi``.
    """
    if not r > 0:
        raise ValueError("r must be positive")
    psi = np.arange(0.0, np.pi, np.radians(5.0)) if psi is None else np.asarray(psi, float)
    theta = np.arange(0.0, np.pi, theta_step)
    pairs = pair_data(p, r, IntensityModel.constant(1.0))
    if pairs.v.shape[0] == 0:
        return 1.0, np.ones(psi.size)
    if np.any(~np.isfinite(pairs.weight)):
        raise ValueError("window too small for requested range")
    ang = _fold(np.arctan2(pairs.v[:, 1], pairs.v[:, 0]))
    order = np.argsort(ang)
    ang, w = ang[order], pairs.weight[order]
    cum = np.concatenate([[0.0], np.cumsum(w)])
    total = cum[-1]

    def below(t):
        return cum[np.searchsorted(ang, t, side="left")]

    ps = _fold(psi)[:, None]
    q = ps + theta[None, :]
    wrap = q >= np.pi
    f = np.where(wrap, total - below(ps) + below(q - np.pi), below(q) - below(ps)) / total
    d = np.max(np.abs(theta[None, :] / np.pi - f), axis=1)
    return float(d.max()), d


def _wong_stat(p, r, psi):
    return wong_distance(p, r, psi)[0]


def wong_test(p, r, null, psi=None, n_sims=99, seed=0, workers=None, alpha=0.05):
    """Monte Carlo test based on the sector K-measure ratio.

    The null distribution comes from ``n_sims`` simulations of the
    supplied isotropic model in the same window; this parametric null
    stands in for a reconstruction of the data.

    Parameters
    ----------
    p : PointPattern
    r : float
        Sector radius.
    null : model spec, dict or callable
        Isotropic null model (``{'model': name, **params}`` for a dict) or
        ``f(seed, task) -> PointPattern``.
    psi : array_like, optional
        Sector start angles, default 0 to 175 degrees in 5 degree steps.
    n_sims, seed, workers : int
    alpha : float

    Returns
    -------
    TestReport
    """
    null = _resolve_null(null)
    psi = np.arange(0.0, np.pi, np.radians(5.0)) if psi is None else np.asarray(psi, float)
    stat, d = wong_distance(p, r, psi)
    sims = _run_sims(partial(_wong_stat, r=r, psi=psi), null, p.window, seed, _TAG_WONG,
                     int(n_sims), workers)
    pval = float(mc_pvalue(stat, sims))
    crit = float(np.quantile(sims, 1 - alpha)) if sims.size else None
    cal = {"kind": "monte_carlo", "n_sims": int(n_sims), "seed": int(seed),
           "null": _null_label(null)}
    notes = ["null distribution from simulations of a parametric isotropic model "
             "instead of reconstructions of the data"]
    return TestReport("wong", stat, pval, cal,
                      {"r": float(r), "psi": psi, "alpha": alpha}, crit, pval <= alpha,
                      sims, notes, {"d_psi": d})


# ---------------------------------------------------------------------------
# replicated patterns


def _axis_curve(p, statistic, u, eps, grid):
    sec = SectorSpec(Direction(u), eps)
    if statistic == "conical_k":
        return k_measure(p, sec, grid).values
    if statistic == "g_local":
        return g_local(p, sec, grid).values
    if statistic == "g_global":
        return g_global(p, sec, grid).values
    raise ValueError(f"unknown statistic {statistic!r}")


def _l1(a, b, grid):
    return float(trapezoid(np.abs(a - b), grid))


def _fry_axis(patterns, levels):
    doubled = []
    for q in patterns:
        _, fit = fit_levels(q, levels)
        doubled.append(np.exp(2j * fit.rotation))
    return float(np.angle(np.mean(doubled)) / 2 % np.pi)


def replicate_test(patterns, statistic="conical_k", r1=0.0, r2=None, eps=np.pi / 8,
                   axis=None, n_grid=64, alpha=0.05, fry_levels=(3, 4, 5)):
    """Axis-contrast test on replicated patterns.

    For each replicate ``T_xy = int |S_x - S_y| dr`` over ``[r1, r2]``
    contrasts two directions that are exchangeable under the null, and
    ``T_z = min(int |S_x - S_z|, int |S_y - S_z|)`` compares them with the
    suspected anisotropy axis. The test rejects when the median of
    ``T_z`` exceeds the empirical ``1 - alpha`` quantile of ``T_xy``.

    In 3D the axes are the coordinate axes with ``z`` as the suspected
    axis. In 2D ``x`` and ``y`` are the coordinate axes and the third
    direction is ``axis``: an angle in radians, or ``'fry'`` (default)
    for the doubled-angle mean of the consensus Fry ellipse major axes of
    the replicates.

    Parameters
    ----------
    patterns : list of PointPattern
        At least 5 replicates in identical windows.
    statistic : {'conical_k', 'g_local', 'g_global'}
    r1, r2 : float
        Integration range; trapezoid rule on ``n_grid`` points.
    eps : float
        Cone half-angle.

    Returns
    -------
    TestReport
    """
    if len(patterns) < 5:
        raise ValueError("need at least 5 replicate patterns")
    w0 = patterns[0].window
    for q in patterns[1:]:
        if not (np.array_equal(q.window.lo, w0.lo) and np.array_equal(q.window.hi, w0.hi)):
            raise ValueError("window mismatch across replicates")
    dim = w0.dim
    if r2 is None or not r2 > r1:
        raise ValueError("need r2 > r1")
    grid = np.linspace(r1, r2, int(n_grid))
    if dim == 3:
        ux, uy, uz = np.eye(3)
        axis_label = "z"
    else:
        ux, uy = np.eye(2)
        if axis is None or axis == "fry":
            ang = _fry_axis(patterns, fry_levels)
            axis_label = "fry"
        else:
            ang = float(axis)
            axis_label = "given"
        uz = np.array([np.cos(ang), np.sin(ang)])
    t_xy, t_z = [], []
    for q in patterns:
        sx = _axis_curve(q, statistic, ux, eps, grid)
        sy = _axis_curve(q, statistic, uy, eps, grid)
        sz = _axis_curve(q, statistic, uz, eps, grid)
        t_xy.append(_l1(sx, sy, grid))
        t_z.append(min(_l1(sx, sz, grid), _l1(sy, sz, grid)))
    t_xy, t_z = np.array(t_xy), np.array(t_z)
    crit = float(np.quantile(t_xy, 1 - alpha))
    med = float(np.median(t_z))
    # share of null contrasts at least as large as the median T_z
    pval = float(mc_pvalue(med, t_xy))
    params = {"statistic": statistic, "r1": float(r1), "r2": float(r2), "eps": float(eps),
              "axis": uz, "axis_source": axis_label, "n_grid": int(n_grid), "alpha": alpha}
    return TestReport("replicate", med, pval, {"kind": "replicate", "n_replicates": len(patterns)},
                      params, crit, med > crit, t_xy, [], {"T_xy": t_xy, "T_z": t_z})


# ---------------------------------------------------------------------------
# ellipse


def _semi_axes_from_coef(coef, dim):
    """Sorted (descending) semi-axes for rows of coefficient vectors; NaN
    rows where the form is not positive definite."""
    coef = np.atleast_2d(coef)
    mats = np.zeros((coef.shape[0], dim, dim))
    k = 0
    for i in range(dim):
        for j in range(i, dim):
            mats[:, i, j] = mats[:, j, i] = coef[:, k]
            k += 1
    ev = np.linalg.eigvalsh(mats)
    with np.errstate(invalid="ignore", divide="ignore"):
        semi = np.where(ev > 0, 1.0 / np.sqrt(np.where(ev > 0, ev, 1.0)), np.nan)
    return np.sort(semi, axis=1)[:, ::-1]


def _contrasts(semi):
    if semi.shape[1] == 2:
        return (semi[:, 0] - semi[:, 1])[:, None]
    a1, a2, a3 = semi.T
    return np.abs(np.column_stack([a1 - 0.5 * (a2 + a3), a2 - 0.5 * (a1 + a3),
                                   a3 - 0.5 * (a1 + a2)]))


def _isotropic_coef(fit):
    dim = fit.dim
    lam = np.trace(fit.matrix) / dim
    out = []
    for i in range(dim):
        for j in range(i, dim):
            out.append(lam if i == j else 0.0)
    return np.array(out)


def _coef_draws(rng, mean, cov, size, dof=None):
    """Normal draws, or multivariate t with ``dof`` degrees of freedom to
    carry the uncertainty of an estimated covariance."""
    z = rng.multivariate_normal(np.zeros(mean.size), cov, size=size, method="eigh")
    if dof is not None and np.isfinite(dof):
        z = z / np.sqrt(rng.chisquare(dof, size) / dof)[:, None]
    return mean + z


def ellipse_axis_test(fits, n_mc=4999, alpha=0.05, seed=0):
    """Semi-axis equality test for fitted Fry ellipses (ellipsoids).

    Coefficients are drawn from their asymptotic law, a multivariate t
    with the fit's degrees of freedom (``info['dof']``) or a normal when
    none are recorded, and mapped to sorted semi-axes. Since sorted semi-axes make ``a1 - a2 >= 0`` by
    construction, the contrast is calibrated against draws centred on
    the isotropic form ``(tr A / d) I``: each fit gets the Monte Carlo
    p-value of its observed contrast, and the fits (contour levels) are
    combined by Bonferroni. The draws centred on the estimate give the
    reported confidence intervals. In 3D the three contrasts
    ``|a_i - (a_j + a_k)/2|`` of a fit are Bonferroni-combined as well.

    Parameters
    ----------
    fits : EllipsoidFit or list of EllipsoidFit
    n_mc : int
    alpha : float
    seed : int

    Returns
    -------
    TestReport
    """
    fits = [fits] if isinstance(fits, EllipsoidFit) else list(fits)
    if not fits:
        raise ValueError("no fits given")
    rng = make_rng(seed, _TAG_ELLIPSE)
    stats, pvals, cis = [], [], []
    n_tests = 0
    for f in fits:
        cov = 0.5 * (f.coef_cov + f.coef_cov.T)
        ev = np.linalg.eigvalsh(cov)
        if ev.min() < -1e-10 * max(1.0, abs(ev.max())):
            raise NumericalError("coefficient covariance is not positive semidefinite")
        obs = _contrasts(_semi_axes_from_coef(f.coef, f.dim))[0]
        dof = f.info.get("dof")
        null = _coef_draws(rng, _isotropic_coef(f), cov, n_mc, dof)
        cnull = _contrasts(_semi_axes_from_coef(null, f.dim))
        cnull = np.where(np.isnan(cnull), np.inf, cnull)
        pv = np.array([(1 + np.sum(cnull[:, c] >= obs[c])) / (n_mc + 1) for c in range(obs.size)])
        est = _coef_draws(rng, f.coef, cov, n_mc, dof)
        cest = _contrasts(_semi_axes_from_coef(est, f.dim))
        lo = np.nanquantile(cest, alpha / 2, axis=0)
        hi = np.nanquantile(cest, 1 - alpha / 2, axis=0)
        stats.append(obs)
        pvals.append(pv)
        cis.append(np.column_stack([lo, hi]))
        n_tests += obs.size
    pmin = float(min(pv.min() for pv in pvals))
    p_adj = min(1.0, pmin * n_tests)
    stat = float(max(s.max() for s in stats))
    params = {"n_mc": int(n_mc), "alpha": alpha, "seed": int(seed), "n_fits": len(fits),
              "levels": [f.info.get("level") for f in fits]}
    return TestReport("ellipse", stat, p_adj,
                      {"kind": "monte_carlo", "n_mc": int(n_mc), "null": "isotropic normal "
                       "approximation", "adjustment": "bonferroni", "n_tests": n_tests},
                      params, None, p_adj <= alpha, None, [],
                      {"contrasts": stats, "p_each": pvals, "ci": cis})


# ---------------------------------------------------------------------------
# wavelet


def wavelet_statistic(p, scales=None, angles=None, D=0.1, k0=(0.0, 5.5), resolution=32):
    """``T(theta) = mean_j log nu(a_j, theta)``."""
    nu = energy(cwt(p, scales, angles, D, k0, resolution)).values
    with np.errstate(divide="ignore"):
        return np.mean(np.log(nu), axis=0)


def wavelet_direction_test(p, null, scales=None, angles=None, n_sims=99, seed=0, D=0.1,
                           k0=(0.0, 5.5), resolution=32, workers=None, alpha=0.05):
    """Per-direction Monte Carlo tests on the mean log energy ``T(theta)``.

    Each pattern's curve is centred by its mean over directions, which
    removes the overall intensity level. For every direction the absolute
    deviation of the centred value from its average over the observed
    and simulated patterns is compared with the simulated ones, giving a
    two-sided Monte Carlo p-value per direction. No correction for
    testing many directions is applied; ``extra['bonferroni']`` holds the
    adjusted minimum.

    Returns
    -------
    TestReport
        ``statistic`` and ``p_value`` are per-direction arrays; the most
        significant direction is ``extra['min_p_angle']``.
    """
    null = _resolve_null(null)
    scales = default_scales(p.window) if scales is None else np.asarray(scales, float)
    angles = (np.radians(np.arange(1, 181)) if angles is None else np.asarray(angles, float))
    fn = partial(wavelet_statistic, scales=scales, angles=angles, D=D, k0=k0,
                 resolution=resolution)
    obs = fn(p)
    sims = _run_sims(fn, null, p.window, seed, _TAG_WAVELET, int(n_sims), workers)
    all_c = np.vstack([obs[None, :], sims])
    all_c = all_c - all_c.mean(axis=1, keepdims=True)
    dev = np.abs(all_c - all_c.mean(axis=0, keepdims=True))
    pv = (1.0 + np.sum(dev[1:] >= dev[0][None, :], axis=0)) / (n_sims + 1.0)
    sd = dev[1:].std(axis=0) if n_sims > 1 else np.ones(angles.size)
    zscore = dev[0] / np.where(sd > 0, sd, 1.0)
    cand = np.flatnonzero(pv == pv.min())
    best = int(cand[np.argmax(zscore[cand])])
    cal = {"kind": "monte_carlo", "n_sims": int(n_sims), "seed": int(seed),
           "null": _null_label(null)}
    params = {"scales": scales, "angles": angles, "D": float(D), "k0": list(k0),
              "resolution": int(resolution), "alpha": alpha}
    notes = ["one test per direction; rejections are not adjusted for multiple testing"]
    return TestReport("wavelet", obs, pv, cal, params, None, pv <= alpha, sims, notes,
                      {"min_p_angle": float(angles[best]),
                       "bonferroni": float(min(1.0, pv.min() * angles.size)),
                       "fraction_rejected": float(np.mean(pv <= alpha))})
