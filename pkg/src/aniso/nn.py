"""
Nearest-neighbour directional summaries.

Every estimator is built on exact nearest neighbours (ties go to the
lowest point index) and uses minus-sampling edge corrections on the
rectangular window.
"""

import warnings
from dataclasses import dataclass

import numpy as np

from .geometry import SectorSpec, border_distance, sector_extents, to_polar
from .kernels import wrapped_kernel
from .summary import SummaryCurve

__all__ = [
    "NNRecords",
    "nn_records",
    "orientation_density",
    "directional_distribution",
    "g_global",
    "g_local",
    "cone_nn_distance",
]

_BLOCK = 512


@dataclass(eq=False)
class NNRecords:
    """Nearest-neighbour records of a pattern, one row per point.

    Attributes
    ----------
    neighbour : ndarray of int
        Index of the nearest neighbour.
    distance : ndarray
        ``d_i``, distance to the nearest neighbour.
    vector : ndarray, shape (n, d)
        Vector from the point to its nearest neighbour.
    angle : ndarray
        Polar angle of ``vector`` (2D) or ``(phi, theta)`` rows (3D).
    border : ndarray
        ``e_i``, distance from the point to the window boundary.
    """

    neighbour: np.ndarray
    distance: np.ndarray
    vector: np.ndarray
    angle: np.ndarray
    border: np.ndarray

    def __len__(self):
        return self.distance.size


def _pair_dist(x, rows):
    diff = x[None, :, :] - x[rows, None, :]
    return np.sqrt(np.sum(diff * diff, axis=2))


def nn_records(p):
    """Exact nearest neighbours of every point.

    Raises
    ------
    ValueError
        If the pattern has fewer than two points.
    """
    n = p.n
    if n < 2:
        raise ValueError("insufficient points: nearest neighbours need n >= 2")
    x = p.points
    nb = np.empty(n, dtype=int)
    for start in range(0, n, _BLOCK):
        rows = np.arange(start, min(n, start + _BLOCK))
        dist = _pair_dist(x, rows)
        dist[np.arange(rows.size), rows] = np.inf
        # argmin returns the first minimum, i.e. the lowest index on ties
        nb[rows] = np.argmin(dist, axis=1)
    vec = x[nb] - x
    d = np.sqrt(np.sum(vec * vec, axis=1))
    ang = to_polar(vec)[1]
    return NNRecords(nb, d, vec, ang, border_distance(x, p.window))


def _eroded_volume(window, r):
    """``|W minus b(o, r)|`` for an array of radii (0 where empty)."""
    r = np.asarray(r, dtype=float)
    return np.prod(np.maximum(0.0, window.sides[None, :] - 2 * r[:, None]), axis=1)


def _nn_weights(p, rec):
    ok = rec.distance < rec.border
    w = np.zeros(len(rec))
    w[ok] = 1.0 / _eroded_volume(p.window, rec.distance[ok])
    return ok, w


def orientation_density(p, bandwidth=np.pi / 8, grid=None, kernel="epanechnikov",
                        records=None):
    """Kernel estimate of the nearest-neighbour orientation density.

    Only points whose nearest neighbour is closer than the window border
    contribute, each with weight ``1 / |W minus b(o, d_i)|``; the result
    is normalized by the sum of those weights so that it integrates to one
    over ``[0, 2*pi)``.

    Parameters
    ----------
    p : PointPattern
        Planar pattern.
    bandwidth : float
        Half-width of the wrapped kernel in radians.
    grid : array_like, optional
        Angles in ``[0, 2*pi)``; default 360 equally spaced angles.
    kernel : {'epanechnikov', 'box', 'gaussian'}
    records : NNRecords, optional
        Precomputed nearest neighbours.

    Returns
    -------
    SummaryCurve
    """
    if p.dim != 2:
        raise ValueError("orientation density is defined for planar patterns")
    if not bandwidth > 0:
        raise ValueError("bandwidth must be positive")
    grid = np.arange(360) * (2 * np.pi / 360) if grid is None else np.asarray(grid, float)
    rec = nn_records(p) if records is None else records
    ok, w = _nn_weights(p, rec)
    params = {"bandwidth": float(bandwidth), "kernel": kernel, "n_contributing": int(ok.sum())}
    if not ok.any():
        warnings.warn("no point has its nearest neighbour closer than the border")
        return SummaryCurve("orientation_density", grid, np.full(grid.size, np.nan),
                            params, np.zeros(grid.size, dtype=int))
    lam_nn = w.sum()
    k = wrapped_kernel(grid[:, None] - rec.angle[None, ok], bandwidth, 2 * np.pi, kernel)
    vals = k @ w[ok] / lam_nn
    params["lambda_nn"] = float(lam_nn)
    return SummaryCurve("orientation_density", grid, vals, params, (k > 0).sum(axis=1))


def directional_distribution(p, r, grid=None, records=None):
    """Nearest-neighbour directional distribution ``D_r(A(a))``.

    ``A(a)`` holds the directions with polar angle (azimuth in 3D) in
    ``[0, a]``. Points count when their nearest neighbour is closer than
    ``r`` and they lie in ``W minus b(o, r)``. In 3D a nearest-neighbour
    vector along the z-axis has no azimuth and is counted at angle 0.

    Returns
    -------
    SummaryCurve
        Nondecreasing in ``a`` with value 1 at ``a = 2*pi``.
    """
    if not r > 0:
        raise ValueError("range r must be positive")
    grid = np.linspace(0, 2 * np.pi, 361) if grid is None else np.asarray(grid, float)
    rec = nn_records(p) if records is None else records
    phi = rec.angle if p.dim == 2 else rec.angle[:, 0]
    phi = np.where(np.isnan(phi), 0.0, phi)
    use = (rec.distance < r) & (rec.border >= r)
    den = use.sum()
    num = (use[None, :] & (phi[None, :] <= grid[:, None])).sum(axis=1)
    vals = num / den if den > 0 else np.full(grid.size, np.nan)
    return SummaryCurve("directional_distribution", grid, vals,
                        {"r": float(r), "n_contributing": int(den)}, num)


def g_global(p, sector, grid, records=None):
    """Global directional nearest-neighbour distance distribution.

    Fraction of points, among those whose nearest-neighbour direction lies
    in the double cone ``C(u, eps)`` and whose nearest neighbour is closer
    than the border, with nearest-neighbour distance below ``r``.
    """
    grid = np.asarray(grid, dtype=float)
    rec = nn_records(p) if records is None else records
    inside = sector.contains(rec.vector) & (rec.border >= rec.distance)
    den = inside.sum()
    num = (inside[None, :] & (rec.distance[None, :] < grid[:, None])).sum(axis=1)
    vals = num / den if den > 0 else np.full(grid.size, np.nan)
    params = {"direction": sector.direction.u.tolist(), "half_angle": float(sector.half_angle),
              "n_contributing": int(den)}
    return SummaryCurve("g_global", grid, vals, params, num)


def cone_nn_distance(p, sector):
    """Distance from each point to its nearest neighbour inside the double
    cone ``x_i + C(u, eps)``; ``inf`` when the cone holds no other point."""
    x = p.points
    n = p.n
    out = np.full(n, np.inf)
    cone = SectorSpec(sector.direction, sector.half_angle)
    for start in range(0, n, _BLOCK):
        rows = np.arange(start, min(n, start + _BLOCK))
        diff = x[None, :, :] - x[rows, None, :]
        dist = np.sqrt(np.sum(diff * diff, axis=2))
        inc = cone.contains(diff.reshape(-1, p.dim)).reshape(dist.shape)
        dist[~inc] = np.inf
        dist[np.arange(rows.size), rows] = np.inf
        out[rows] = dist.min(axis=1)
    return out


def g_local(p, sector, grid):
    """Local directional nearest-neighbour distance distribution.

    Hanisch-type estimator built on the cone-restricted nearest-neighbour
    distances ``d_i`` with weights ``1 / |W minus S(u, eps, d_i)|``,
    normalized by its limit over all finite distances.
    """
    if not 0 < sector.half_angle <= np.pi / 2:
        raise ValueError("g_local needs a half angle in (0, pi/2]")
    grid = np.asarray(grid, dtype=float)
    d = cone_nn_distance(p, sector)
    fin = np.isfinite(d)
    unit_ext = sector_extents(SectorSpec(sector.direction, sector.half_angle, 1.0))
    ext = d[fin, None] * unit_ext[None, :]
    x = p.points[fin]
    w = p.window
    ok = np.all((x - w.lo >= ext) & (w.hi - x >= ext), axis=1)
    vol = np.prod(w.sides[None, :] - 2 * ext, axis=1)
    ok &= vol > 0
    wt = np.zeros(ok.size)
    wt[ok] = 1.0 / vol[ok]
    total = wt.sum()
    below = d[fin][None, :] < grid[:, None]
    num = below @ wt
    counts = (below & ok[None, :]).sum(axis=1)
    vals = num / total if total > 0 else np.full(grid.size, np.nan)
    params = {"direction": sector.direction.u.tolist(), "half_angle": float(sector.half_angle),
              "n_contributing": int(ok.sum()), "G_H_inf": float(total)}
    return SummaryCurve("g_local", grid, vals, params, counts)
