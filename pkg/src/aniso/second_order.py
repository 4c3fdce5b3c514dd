"""
Second-order directional summaries: Fry sets, directional K-measures,
the second-order orientation density and anisotropic pair correlation
estimators.

All estimators are translation corrected: an ordered pair ``(x, y)``
with difference ``v = y - x`` enters with weight ``1 / |W_x cap W_y|``.
The squared intensity is estimated by ``n (n - 1) / |W|^2``, which is
exactly unbiased for Poisson patterns. Passing an :class:`IntensityModel`
switches an estimator to its second-order intensity reweighted form, in
which each pair weight is divided by ``lambda(x) lambda(y)`` instead.
"""

from dataclasses import dataclass

import numpy as np
from scipy.interpolate import RegularGridInterpolator
from scipy.spatial import cKDTree

from .geometry import CylinderSpec, Direction, SectorSpec, to_polar, translation_overlap
from .kernels import kernel1d, kernel_nd, wrapped_kernel
from .summary import SummaryCurve

__all__ = [
    "FrySet",
    "IntensityModel",
    "fry",
    "pair_data",
    "lambda2_k",
    "k_measure",
    "orientation_density_2nd",
    "pcf_isotropic",
    "pcf_aniso",
    "pcf_guan",
    "pcf_conical",
    "pcf_cylindrical",
    "soirs_variant",
    "default_range_bandwidth",
]


@dataclass(eq=False)
class FrySet:
    """All ordered difference vectors ``x_j - x_i``, ``i != j``."""

    vectors: np.ndarray
    pattern: object

    def __len__(self):
        return self.vectors.shape[0]


def fry(p):
    """Fry set of a pattern, ordered by ``i`` then ``j``."""
    if p.n < 2:
        raise ValueError("insufficient points: the Fry set needs n >= 2")
    x = p.points
    diff = x[None, :, :] - x[:, None, :]
    off = ~np.eye(p.n, dtype=bool)
    return FrySet(diff[off], p)


class IntensityModel:
    """First-order intensity used to reweight pairs.

    Build with :meth:`constant`, :meth:`stationary`, :meth:`from_grid` or
    :meth:`from_function`.
    """

    def __init__(self, func=None, const=None, label="custom"):
        self._func = func
        self._const2 = const
        self.label = label

    @classmethod
    def constant(cls, lam):
        if not lam > 0:
            raise ValueError("intensity must be positive")
        return cls(const=float(lam) * float(lam), label=f"constant({lam})")

    @classmethod
    def stationary(cls, p):
        """Constant model whose squared intensity is ``n (n-1) / |W|^2``."""
        return cls(const=p.n * (p.n - 1) / p.window.volume ** 2, label="stationary")

    @classmethod
    def from_function(cls, func):
        return cls(func=func, label="function")

    @classmethod
    def from_grid(cls, axes, values):
        """Linear interpolation of intensities sampled on a regular grid."""
        interp = RegularGridInterpolator(tuple(np.asarray(a, float) for a in axes),
                                         np.asarray(values, float), method="linear",
                                         bounds_error=False, fill_value=None)
        return cls(func=interp, label="grid")

    def pair_products(self, p, i, j):
        """``lambda(x_i) lambda(x_j)`` for index arrays ``i`` and ``j``."""
        if self._const2 is not None:
            return np.full(i.size, self._const2)
        lam = np.asarray(self._func(p.points), dtype=float).ravel()
        if lam.size != p.n or np.any(~(lam > 0)):
            raise ValueError("intensity must be positive at every data point")
        return lam[i] * lam[j]


def _lambda_hat(p):
    return p.n / p.window.volume


def default_range_bandwidth(p, directional=True):
    """``0.3 / sqrt(lambda)`` for directional pcfs, ``0.15 / sqrt(lambda)``
    for the isotropic one."""
    return (0.3 if directional else 0.15) / np.sqrt(_lambda_hat(p))


@dataclass(eq=False)
class PairData:
    """Ordered pairs within range with their translation-corrected weights."""

    i: np.ndarray
    j: np.ndarray
    v: np.ndarray
    dist: np.ndarray
    weight: np.ndarray


def pair_data(p, rmax, intensity=None):
    """Ordered pairs ``(i, j)`` with ``||x_j - x_i|| <= rmax``.

    ``weight`` is ``1 / (|W_x cap W_y| lambda lambda)`` where the squared
    intensity comes from ``intensity`` (stationary by default).
    """
    x = p.points
    n = p.n
    diam = float(np.linalg.norm(p.window.sides))
    if n < 2:
        e = np.empty(0, dtype=int)
        return PairData(e, e, np.empty((0, p.dim)), np.empty(0), np.empty(0))
    if rmax >= diam:
        ii, jj = np.nonzero(~np.eye(n, dtype=bool))
    else:
        pr = cKDTree(x).query_pairs(rmax, output_type="ndarray")
        pr = pr[np.lexsort((pr[:, 1], pr[:, 0]))]
        ii = np.concatenate([pr[:, 0], pr[:, 1]])
        jj = np.concatenate([pr[:, 1], pr[:, 0]])
    v = x[jj] - x[ii]
    dist = np.sqrt(np.sum(v * v, axis=1))
    keep = dist <= rmax
    ii, jj, v, dist = ii[keep], jj[keep], v[keep], dist[keep]
    ov = translation_overlap(p.window, v)
    model = intensity if intensity is not None else IntensityModel.stationary(p)
    lam2 = model.pair_products(p, ii, jj)
    with np.errstate(divide="ignore"):
        w = 1.0 / (ov * lam2)
    return PairData(ii, jj, v, dist, w)


def _check_overlap(pairs, used):
    if np.any(~np.isfinite(pairs.weight[used])):
        raise ValueError("window too small for requested range")


def lambda2_k(p, test_set):
    """``lambda^2 K(B) = sum 1(y - x in B) / |W_x cap W_y|`` for one set.

    ``test_set`` is anything with ``contains`` and ``bounding_radius``.
    """
    rmax = test_set.bounding_radius
    pairs = pair_data(p, rmax, IntensityModel.constant(1.0))
    inside = test_set.contains(pairs.v) if pairs.v.size else np.zeros(0, bool)
    _check_overlap(pairs, inside)
    return float(np.sum(pairs.weight[inside]))


def k_measure(p, test_set, grid, intensity=None):
    """Directional K-measure over a family of nested test sets.

    ``test_set`` is a :class:`SectorSpec` (the family ``S(u, eps, r)``) or a
    :class:`CylinderSpec` (the family ``L(r, u, h_c)``); ``grid`` holds the
    values of ``r``.

    Returns
    -------
    SummaryCurve
        ``values`` is ``K(B(r))``; ``extra['lambda2_k']`` holds the
        unnormalized ``lambda^2 K``.
    """
    grid = np.asarray(grid, dtype=float)
    if isinstance(test_set, SectorSpec):
        rmax = grid.max()
        key_fn = "sector"
    elif isinstance(test_set, CylinderSpec):
        if np.any(grid <= test_set.half_width):
            raise ValueError("cylinder K needs h_c < r at every grid value")
        rmax = float(np.hypot(grid.max(), test_set.half_width))
        key_fn = "cylinder"
    else:
        raise ValueError("test set must be a SectorSpec or CylinderSpec")
    pairs = pair_data(p, rmax, intensity)
    u = test_set.direction.u
    if key_fn == "sector":
        cone = SectorSpec(test_set.direction, test_set.half_angle)
        use = cone.contains(pairs.v) if pairs.v.size else np.zeros(0, bool)
        key = pairs.dist[use]
    else:
        t = pairs.v @ u
        perp = pairs.v - t[:, None] * u
        use = np.sqrt(np.sum(perp * perp, axis=1)) <= test_set.half_width + 1e-12
        key = np.abs(t[use])
    _check_overlap(pairs, use)
    w = pairs.weight[use]
    order = np.argsort(key, kind="stable")
    cum = np.concatenate([[0.0], np.cumsum(w[order])])
    idx = np.searchsorted(key[order], grid + 1e-12, side="right")
    vals = cum[idx]
    l2k = vals * (p.n * (p.n - 1) / p.window.volume ** 2) if intensity is None else vals
    params = {"set": key_fn, "direction": u.tolist(), "intensity":
              intensity.label if intensity is not None else "stationary"}
    if key_fn == "sector":
        params["half_angle"] = float(test_set.half_angle)
    else:
        params["half_width"] = float(test_set.half_width)
    return SummaryCurve("k_measure", grid, vals, params, idx, extra={"lambda2_k": l2k})


def orientation_density_2nd(p, r1, r2, bandwidth=None, grid=None, kernel="epanechnikov",
                            intensity=None):
    """Second-order orientation density of pair directions, folded to
    ``[0, pi)``.

    Pairs with ``r1 < ||y - x|| < r2`` contribute a kernel bump at their
    axial angle. The estimate integrates to one over ``[0, pi)``, so an
    isotropic pattern gives ``1 / pi``.

    Parameters
    ----------
    bandwidth : float, optional
        Kernel half-width; default ``3 / sqrt(lambda)``.
    grid : array_like, optional
        Angles in ``[0, pi)``; default 180 equally spaced angles.

    Returns
    -------
    SummaryCurve
        ``extra['cdf']`` holds ``F_K`` on ``grid`` by trapezoid quadrature
        of the density from the first grid angle.
    """
    if p.dim != 2:
        raise ValueError("the rose of directions is implemented for planar patterns")
    if not 0 <= r1 < r2:
        raise ValueError("need 0 <= r1 < r2")
    h = 3.0 / np.sqrt(_lambda_hat(p)) if bandwidth is None else float(bandwidth)
    if not h > 0:
        raise ValueError("bandwidth must be positive")
    grid = np.arange(180) * (np.pi / 180) if grid is None else np.asarray(grid, float)
    pairs = pair_data(p, r2, intensity)
    use = (pairs.dist > r1) & (pairs.dist < r2)
    _check_overlap(pairs, use)
    params = {"r1": float(r1), "r2": float(r2), "bandwidth": h, "kernel": kernel}
    if not use.any():
        return SummaryCurve("orientation_density_2nd", grid, np.full(grid.size, np.nan),
                            params, np.zeros(grid.size, int))
    phi = np.remainder(to_polar(pairs.v[use])[1], np.pi)
    w = pairs.weight[use]
    k = wrapped_kernel(grid[:, None] - phi[None, :], h, np.pi, kernel)
    vals = k @ w / w.sum()
    # cumulative trapezoid from the first grid angle
    cdf = np.concatenate([[0.0], np.cumsum(0.5 * np.diff(grid) * (vals[1:] + vals[:-1]))])
    return SummaryCurve("orientation_density_2nd", grid, vals, params, (k > 0).sum(axis=1),
                        extra={"cdf": cdf, "n_pairs": int(use.sum())})


def _range_flags(grid, h):
    return np.asarray(grid) < h


def pcf_isotropic(p, grid, h_r=None, kernel="epanechnikov", intensity=None):
    """Isotropic pair correlation function ``sum k(||v|| - r) / (s_d r^{d-1})``."""
    grid = np.asarray(grid, dtype=float)
    h = default_range_bandwidth(p, directional=False) if h_r is None else float(h_r)
    pairs = pair_data(p, grid.max() + h, intensity)
    _check_overlap(pairs, slice(None))
    k = kernel1d(pairs.dist[None, :] - grid[:, None], h, kernel)
    surf = 2 * np.pi * grid if p.dim == 2 else 4 * np.pi * grid ** 2
    vals = k @ pairs.weight / surf
    return SummaryCurve("pcf_isotropic", grid, vals, {"h_r": h, "kernel": kernel},
                        (k > 0).sum(axis=1), extra={"boundary_biased": _range_flags(grid, h)})


def pcf_aniso(p, angles, ranges, h_r=None, h_a=np.pi / 8, kernel="epanechnikov",
              intensity=None):
    """Kernel estimate of the anisotropic pcf ``g(a, r)``.

    Each pair contributes ``k_{h_r}(||v|| - r) k_{h_a}(alpha(v) - a)`` plus
    the same term at the antipodal direction, so ``g(a, r) = g(a + pi, r)``
    exactly. In 2D ``angles`` are polar angles and the normalization is
    ``2 r``; in 3D ``angles`` is an array of ``(phi, theta)`` rows and the
    normalization is ``2 r^2 sin(theta)``. Both give expectation one for a
    Poisson process.

    Returns
    -------
    SummaryCurve
        ``values[k, m]`` is the estimate at ``angles[k]``, ``ranges[m]``.
        ``extra`` flags ranges below ``h_r`` ('boundary_biased') and, in
        3D, directions within ``5 h_a`` of a pole ('near_pole').
    """
    ranges = np.asarray(ranges, dtype=float)
    if np.any(ranges <= 0):
        raise ValueError("range grid must exclude r = 0")
    h = default_range_bandwidth(p) if h_r is None else float(h_r)
    if not h > 0 or not h_a > 0:
        raise ValueError("bandwidths must be positive")
    pairs = pair_data(p, ranges.max() + h, intensity)
    _check_overlap(pairs, slice(None))
    kr = kernel1d(pairs.dist[:, None] - ranges[None, :], h, kernel)
    near = kr.any(axis=1)
    kr, w = kr[near], pairs.weight[near]
    ang = to_polar(pairs.v[near])[1]
    params = {"h_r": h, "h_a": float(h_a), "kernel": kernel}
    extra = {"boundary_biased": _range_flags(ranges, h)}
    if p.dim == 2:
        angles = np.asarray(angles, dtype=float)
        ka = (wrapped_kernel(ang[:, None] - angles[None, :], h_a, 2 * np.pi, kernel)
              + wrapped_kernel(ang[:, None] - angles[None, :] - np.pi, h_a, 2 * np.pi, kernel))
        vals = (ka * w[:, None]).T @ kr / (2 * ranges[None, :])
        grid = angles
    else:
        angles = np.atleast_2d(np.asarray(angles, dtype=float))
        phi, theta = ang[:, 0], ang[:, 1]
        aphi, ath = angles[:, 0], angles[:, 1]
        k1 = (wrapped_kernel(phi[:, None] - aphi[None, :], h_a, 2 * np.pi, kernel)
              * kernel1d(theta[:, None] - ath[None, :], h_a, kernel))
        k2 = (wrapped_kernel(phi[:, None] - aphi[None, :] - np.pi, h_a, 2 * np.pi, kernel)
              * kernel1d(theta[:, None] - (np.pi - ath[None, :]), h_a, kernel))
        with np.errstate(divide="ignore", invalid="ignore"):
            vals = ((k1 + k2) * w[:, None]).T @ kr / (
                2 * ranges[None, :] ** 2 * np.sin(ath)[:, None])
        grid = np.arange(angles.shape[0])
        extra["angles"] = angles
        extra["near_pole"] = (ath <= 5 * h_a) | (ath >= np.pi - 5 * h_a)
    counts = np.full(vals.shape, int(near.sum()))
    return SummaryCurve("pcf_aniso", grid, vals, params, counts, grid2=ranges, extra=extra)


def pcf_guan(p, direction, grid, h_d=None, kernel="epanechnikov", intensity=None):
    """Guan's pcf estimator ``sum k_{h_d}(v - r u) / |W_x cap W_y|`` with a
    radially symmetric kernel in R^d.

    Values at ``r`` of order ``h_d`` or below are biased by the kernel mass
    that reaches the origin.
    """
    grid = np.asarray(grid, dtype=float)
    u = direction.u if isinstance(direction, Direction) else Direction(direction).u
    h = default_range_bandwidth(p) if h_d is None else float(h_d)
    if not h > 0:
        raise ValueError("bandwidth must be positive")
    pairs = pair_data(p, grid.max() + h, intensity)
    _check_overlap(pairs, slice(None))
    vals = np.empty(grid.size)
    counts = np.empty(grid.size, dtype=int)
    for m, r in enumerate(grid):
        k = kernel_nd(pairs.v - r * u, h, kernel) if pairs.v.size else np.zeros(0)
        vals[m] = k @ pairs.weight
        counts[m] = int(np.count_nonzero(k))
    return SummaryCurve("pcf_guan", grid, vals, {"direction": u.tolist(), "h_d": h,
                                                 "kernel": kernel}, counts,
                        extra={"boundary_biased": _range_flags(grid, h)})


def pcf_conical(p, sector, grid, h_r=None, kernel="epanechnikov", intensity=None):
    """Conical pcf: pairs whose direction lies within angle ``eps`` of ``u``
    (a single cone), normalized by ``2 r eps`` (2D) or
    ``2 pi r^2 (1 - cos eps)`` (3D). With ``eps = pi`` this is the
    isotropic pcf."""
    grid = np.asarray(grid, dtype=float)
    eps = float(sector.half_angle)
    u = sector.direction.u
    h = default_range_bandwidth(p, directional=eps < np.pi) if h_r is None else float(h_r)
    pairs = pair_data(p, grid.max() + h, intensity)
    _check_overlap(pairs, slice(None))
    with np.errstate(invalid="ignore"):
        cosang = np.clip(pairs.v @ u / pairs.dist, -1.0, 1.0)
    use = np.arccos(cosang) < eps if eps < np.pi else np.ones(pairs.dist.size, bool)
    k = kernel1d(pairs.dist[use][None, :] - grid[:, None], h, kernel)
    if p.dim == 2:
        vol = 2 * grid * eps
    else:
        vol = 2 * np.pi * grid ** 2 * (1 - np.cos(eps))
    vals = k @ pairs.weight[use] / vol
    return SummaryCurve("pcf_conical", grid, vals,
                        {"direction": u.tolist(), "half_angle": eps, "h_r": h,
                         "kernel": kernel}, (k > 0).sum(axis=1),
                        extra={"boundary_biased": _range_flags(grid, h)})


def pcf_cylindrical(p, cylinder, grid, h_r=None, kernel="epanechnikov", intensity=None):
    """Cylindrical pcf: pairs within axis distance ``h_c`` of the line through
    ``u``, smoothed in ``|v . u|``.

    Normalized by ``2 b_{d-1} h_c^{d-1}`` (the cross-section counted at both
    ends of the cylinder) so a Poisson process gives one. Ranges below
    ``2 h_c``, where cylinders in different directions overlap, are flagged.
    """
    grid = np.asarray(grid, dtype=float)
    u = cylinder.direction.u
    hc = float(cylinder.half_width)
    h = default_range_bandwidth(p) if h_r is None else float(h_r)
    pairs = pair_data(p, float(np.hypot(grid.max() + h, hc)), intensity)
    _check_overlap(pairs, slice(None))
    t = pairs.v @ u
    perp = pairs.v - t[:, None] * u
    use = np.sqrt(np.sum(perp * perp, axis=1)) < hc
    k = kernel1d(np.abs(t[use])[None, :] - grid[:, None], h, kernel)
    cross = 2 * hc if p.dim == 2 else np.pi * hc ** 2
    vals = k @ pairs.weight[use] / (2 * cross)
    return SummaryCurve("pcf_cylindrical", grid, vals,
                        {"direction": u.tolist(), "half_width": hc, "h_r": h,
                         "kernel": kernel}, (k > 0).sum(axis=1),
                        extra={"boundary_biased": _range_flags(grid, h),
                               "direction_overlap": grid < 2 * hc})


def soirs_variant(estimator, p, *args, intensity, **kwargs):
    """Run an estimator in its second-order intensity reweighted form."""
    if not isinstance(intensity, IntensityModel):
        raise ValueError("intensity must be an IntensityModel")
    out = estimator(p, *args, intensity=intensity, **kwargs)
    out.parameters["intensity"] = intensity.label
    return out
