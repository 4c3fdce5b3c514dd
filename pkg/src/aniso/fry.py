"""
Direction estimation from pseudo-Fry contours.

A contour of level ``l`` holds, for each direction ``u`` of a direction
set, the point ``r_l(u) u`` where ``r_l(u)`` is the distance to the
``l``-th nearest Fry point inside the cone of half-angle ``eps`` around
``u``. An origin-centred ellipse (ellipsoid) ``g^T A g = 1`` is then
fitted by least squares with a correction for the bias caused by noise
in the contour points.
"""

import warnings
from dataclasses import dataclass, field
from itertools import combinations_with_replacement

import numpy as np
from scipy.optimize import brentq

from .second_order import FrySet, fry
from .simulate import make_rng

__all__ = [
    "NumericalError",
    "PseudoFryContour",
    "EllipsoidFit",
    "default_directions",
    "pseudo_fry",
    "fit_ellipsoid",
    "average_rotation",
    "fit_levels",
]


class NumericalError(ArithmeticError):
    """A fit or transform failed for numerical reasons."""


def _icosphere(levels=2):
    t = (1 + np.sqrt(5)) / 2
    v = [[-1, t, 0], [1, t, 0], [-1, -t, 0], [1, -t, 0], [0, -1, t], [0, 1, t],
         [0, -1, -t], [0, 1, -t], [t, 0, -1], [t, 0, 1], [-t, 0, -1], [-t, 0, 1]]
    f = [[0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11], [1, 5, 9], [5, 11, 4],
         [11, 10, 2], [10, 7, 6], [7, 1, 8], [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8],
         [3, 8, 9], [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1]]
    verts = [np.array(p, float) / np.linalg.norm(p) for p in v]
    for _ in range(levels):
        cache = {}
        new_f = []

        def mid(a, b):
            key = (min(a, b), max(a, b))
            if key not in cache:
                m = verts[a] + verts[b]
                verts.append(m / np.linalg.norm(m))
                cache[key] = len(verts) - 1
            return cache[key]

        for a, b, c in f:
            ab, bc, ca = mid(a, b), mid(b, c), mid(c, a)
            new_f += [[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]
        f = new_f
    return np.array(verts)


def default_directions(dim, count=None):
    """Default direction set: 36 equally spaced angles in 2D, the 162
    vertices of a twice subdivided icosahedron in 3D."""
    if dim == 2:
        m = 36 if count is None else int(count)
        a = np.arange(m) * (2 * np.pi / m)
        return np.column_stack([np.cos(a), np.sin(a)])
    if count not in (None, 162):
        raise ValueError("3D direction sets other than the 162-point icosphere "
                         "must be passed explicitly")
    return _icosphere(2)


def _default_half_angle(dim, m):
    # cones that tile the circle, or caps of equal total area on the sphere
    return np.pi / m if dim == 2 else float(np.arccos(1 - 2.0 / m))


@dataclass(eq=False)
class PseudoFryContour:
    """Pseudo-Fry contour points of one level.

    Attributes
    ----------
    level : int
    directions : ndarray, shape (m, d)
        Directions that kept a contour point.
    half_angle : float
    radii : ndarray
        ``r_l(u)`` for the kept directions.
    dropped : int
        Number of directions without ``level`` Fry points in their cone.
    cutoff : float
        Fry points beyond this norm were ignored.
    """

    level: int
    directions: np.ndarray
    half_angle: float
    radii: np.ndarray
    dropped: int = 0
    cutoff: float = np.inf

    @property
    def points(self):
        return self.radii[:, None] * self.directions


def pseudo_fry(fry_set, level, directions=None, half_angle=None, cutoff=None):
    """Extract the level-``l`` pseudo-Fry contour.

    Parameters
    ----------
    fry_set : FrySet or PointPattern
    level : int
        ``l >= 1``. Small levels (below about 10) trace the inner,
        interaction-dominated part of the Fry plot; levels above about
        100 mostly reflect the window shape.
    directions : array_like, optional
        Unit vectors; default :func:`default_directions`.
    half_angle : float, optional
        Cone half-angle; default ``pi / |U|`` in 2D.
    cutoff : float, optional
        Largest Fry vector norm used; default ``0.7`` times the smallest
        window half-side of the source pattern.

    Raises
    ------
    ValueError
        If more than a quarter of the directions lack ``level`` Fry points.
    """
    if not isinstance(fry_set, FrySet):
        fry_set = fry(fry_set)
    level = int(level)
    if level < 1:
        raise ValueError("contour level must be at least 1")
    v = fry_set.vectors
    dim = v.shape[1]
    u = default_directions(dim) if directions is None else np.asarray(directions, float)
    u = u / np.linalg.norm(u, axis=1, keepdims=True)
    eps = _default_half_angle(dim, len(u)) if half_angle is None else float(half_angle)
    if cutoff is None:
        cutoff = (0.35 * float(np.min(fry_set.pattern.window.sides))
                  if fry_set.pattern is not None else np.inf)
    nrm = np.sqrt(np.sum(v * v, axis=1))
    keep = (nrm <= cutoff) & (nrm > 0)
    v, nrm = v[keep], nrm[keep]
    cos_eps = np.cos(eps)
    radii = np.full(len(u), np.nan)
    for k, uk in enumerate(u):
        d = nrm[(v @ uk) > nrm * cos_eps]
        if d.size >= level:
            radii[k] = np.partition(d, level - 1)[level - 1]
    ok = ~np.isnan(radii)
    dropped = int((~ok).sum())
    if dropped > 0.25 * len(u):
        raise ValueError(f"{dropped} of {len(u)} directions have fewer than {level} "
                         "Fry points in their cone")
    if dropped:
        warnings.warn(f"{dropped} directions dropped from the level-{level} contour")
    return PseudoFryContour(level, u[ok], eps, radii[ok], dropped, float(cutoff))


@dataclass(eq=False)
class EllipsoidFit:
    """Origin-centred ellipse (ellipsoid) ``g^T A g = 1``.

    Attributes
    ----------
    matrix : ndarray
        Symmetric positive definite ``A``.
    semi_axes : ndarray
        Descending, ``1 / sqrt`` of the eigenvalues of ``A``.
    axes : ndarray
        Columns are the principal directions matching ``semi_axes``.
    rotation : float or ndarray
        2D: angle of the major axis in ``[0, pi)``. 3D: rotation matrix
        with the principal directions as columns.
    sigma2 : float
        Estimated variance of the contour point noise.
    coef : ndarray
        Free entries of ``A`` (see :func:`fit_ellipsoid`).
    coef_cov : ndarray
        Estimated covariance of ``coef``.
    n_points : int
    """

    matrix: np.ndarray
    semi_axes: np.ndarray
    axes: np.ndarray
    rotation: object
    sigma2: float
    coef: np.ndarray
    coef_cov: np.ndarray
    n_points: int
    info: dict = field(default_factory=dict)

    @property
    def dim(self):
        return self.matrix.shape[0]


def _exponents(dim):
    """Monomial exponents and coefficients of the free entries of A."""
    pairs = list(combinations_with_replacement(range(dim), 2))
    exps, mult = [], []
    for a, b in pairs:
        e = np.zeros(dim, dtype=int)
        e[a] += 1
        e[b] += 1
        exps.append(e)
        mult.append(1.0 if a == b else 2.0)
    return pairs, np.array(exps), np.array(mult)


def _hermite(t, k, s2):
    """Unbiased estimator of ``e^k`` from ``t = e + N(0, s2)``."""
    if k == 0:
        return np.ones_like(t)
    if k == 1:
        return t
    if k == 2:
        return t * t - s2
    if k == 3:
        return t ** 3 - 3 * s2 * t
    if k == 4:
        return t ** 4 - 6 * s2 * t * t + 3 * s2 * s2
    raise ValueError("degree too high")


def _moments(g, s2, exps, mult):
    """Noise-corrected sums of ``z z^T`` and ``z`` over contour points."""
    p = len(mult)
    psi = np.empty((p, p))
    for a in range(p):
        for b in range(a, p):
            e = exps[a] + exps[b]
            val = np.ones(g.shape[0])
            for j in range(g.shape[1]):
                val = val * _hermite(g[:, j], e[j], s2)
            psi[a, b] = psi[b, a] = mult[a] * mult[b] * val.sum()
    rhs = np.empty(p)
    for a in range(p):
        val = np.ones(g.shape[0])
        for j in range(g.shape[1]):
            val = val * _hermite(g[:, j], exps[a][j], s2)
        rhs[a] = mult[a] * val.sum()
    return psi, rhs


def _matrix_from_coef(coef, pairs, dim):
    a = np.zeros((dim, dim))
    for c, (i, j) in zip(coef, pairs):
        a[i, j] = a[j, i] = c
    return a


def _max_noise(g, exps, mult):
    """Largest noise variance keeping the corrected augmented moment
    matrix of ``(z, -1)`` positive semidefinite."""
    dim = g.shape[1]
    ex = np.vstack([exps, np.zeros(dim, dtype=int)])
    mu = np.append(mult, -1.0)

    def lam_min(s2):
        psi, _ = _moments(g, s2, ex, mu)
        return np.linalg.eigvalsh(psi)[0]

    hi = float(np.mean(np.sum(g * g, axis=1))) / dim
    if lam_min(hi) >= 0:
        return hi
    lo = 0.0
    if lam_min(lo) <= 0:
        return 0.0
    return float(brentq(lam_min, lo, hi, xtol=1e-14))


def _sampson_sigma2(g, a, npar):
    q = np.einsum("ij,jk,ik->i", g, a, g) - 1.0
    grad = 2 * np.linalg.norm(g @ a, axis=1)
    r = q / grad
    return float(np.sum(r * r) / max(1, g.shape[0] - npar))


def _score_weights(contour):
    """Dependence weights between contour points.

    The Fry set is symmetric, so antipodal directions see the same radius,
    and cones closer than twice the half-angle share Fry vectors. Weights
    fall linearly with the axial angle and vanish at ``2 * half_angle``.
    Plain arrays are treated as independent points.
    """
    if not isinstance(contour, PseudoFryContour):
        return np.eye(len(contour))
    u = contour.directions
    ang = np.arccos(np.clip(np.abs(u @ u.T), 0.0, 1.0))
    w = np.clip(1.0 - ang / (2.0 * contour.half_angle), 0.0, None)
    # clip to the nearest positive semidefinite matrix
    ev, vec = np.linalg.eigh(w)
    return (vec * np.clip(ev, 0.0, None)) @ vec.T


def fit_ellipsoid(contour, sigma2=None, iterations=2):
    """Fit ``g^T A g = 1`` to contour points.

    Ordinary least squares on the algebraic residuals ``g^T A g - 1``
    gives a start. The noise variance is then estimated from the Sampson
    (first-order geometric) residuals and the normal equations are
    replaced by their noise-corrected versions, assuming isotropic Gaussian
    errors; estimation and correction alternate ``iterations`` times.
    The variance is capped where the corrected moment matrix of
    ``(z, -1)`` turns singular, the consistent adjusted estimate. When
    the corrected form is not positive definite the uncorrected fit is
    returned (``info['noise_reduced']``). No penalty term is used.

    The coefficient covariance is a sandwich estimate. Contour points of
    overlapping sectors share Fry points, so the middle term weights
    score products by a Bartlett taper in the angle between directions;
    the effective number of points gives ``info['dof']``.

    Parameters
    ----------
    contour : PseudoFryContour or array_like, shape (m, d)
    sigma2 : float, optional
        Known noise variance; estimated when omitted.
    iterations : int

    Returns
    -------
    EllipsoidFit

    Raises
    ------
    ValueError
        Too few points.
    NumericalError
        Singular normal equations or an indefinite fitted form.
    """
    g = contour.points if isinstance(contour, PseudoFryContour) else np.asarray(contour, float)
    m, dim = g.shape
    need = 5 if dim == 2 else 9
    if m < need:
        raise ValueError(f"need at least {need} contour points, got {m}")
    pairs, exps, mult = _exponents(dim)
    npar = len(pairs)
    # rescale for conditioning; the fit is scale equivariant
    scale = float(np.sqrt(np.mean(np.sum(g * g, axis=1))))
    gs = g / scale

    def solve(s2):
        psi, rhs = _moments(gs, s2, exps, mult)
        if np.linalg.cond(psi) > 1e12:
            raise NumericalError("near-singular normal equations in ellipse fit")
        return np.linalg.solve(psi, rhs), psi

    coef, psi = solve(0.0)
    s2 = 0.0
    capped = False
    if sigma2 is None:
        # beyond this bound the corrected criterion is unbounded below;
        # contour irregularity inflates the residual variance past it
        s2_max = _max_noise(gs, exps, mult)
        for _ in range(iterations):
            s2 = _sampson_sigma2(gs, _matrix_from_coef(coef, pairs, dim), npar)
            if s2 >= s2_max:
                s2, capped = s2_max, True
            coef, psi = solve(s2)
    else:
        s2 = float(sigma2) / scale ** 2
        coef, psi = solve(s2)
    a = _matrix_from_coef(coef, pairs, dim)
    evals, evecs = np.linalg.eigh(a)
    reduced = False
    if evals[0] <= 0 < s2:
        # the corrected form is not an ellipsoid: keep the uncorrected fit
        s2, reduced = 0.0, True
        coef, psi = solve(0.0)
        a = _matrix_from_coef(coef, pairs, dim)
        evals, evecs = np.linalg.eigh(a)
    if np.any(evals <= 0):
        raise NumericalError("non-elliptical contour: fitted form is not positive definite")
    # sandwich covariance of the coefficients from the algebraic scores
    z = np.column_stack([mult[k] * np.prod(gs ** exps[k], axis=1) for k in range(npar)])
    res = z @ coef - 1.0
    sc = z * res[:, None]
    wts = _score_weights(contour)
    meat = sc.T @ wts @ sc
    # effective number of independent points under the dependence weights
    m_eff = m * m / float(np.sum(wts))
    dof = max(1.0, m_eff - npar)
    bread = np.linalg.inv(psi)
    cov = bread @ meat @ bread * m_eff / dof
    # back to the original scale: A = A_s / scale^2
    a = a / scale ** 2
    coef = coef / scale ** 2
    cov = cov / scale ** 4
    evals = evals / scale ** 2
    semi = 1.0 / np.sqrt(evals)
    axes = evecs
    if dim == 2:
        major = axes[:, 0]
        rot = float(np.arctan2(major[1], major[0]) % np.pi)
        if rot >= np.pi:
            rot = 0.0
    else:
        if np.linalg.det(axes) < 0:
            axes = axes.copy()
            axes[:, -1] *= -1
        rot = axes
    sig2 = _sampson_sigma2(g, a, npar)
    return EllipsoidFit(a, semi, axes, rot, sig2, coef, cov, m,
                        {"level": getattr(contour, "level", None),
                         "dropped": getattr(contour, "dropped", 0),
                         "noise_correction": float(s2 * scale ** 2),
                         "noise_capped": capped, "noise_reduced": reduced,
                         "dof": dof})


def average_rotation(contours, seed=0, samples_per_contour=None):
    """Consensus ellipse from several contours.

    Each accepted contour fit is resampled along the contour directions
    with its fitted noise, scaled to unit geometric-mean semi-axis, and
    all samples are superimposed and refitted.

    Parameters
    ----------
    contours : list of PseudoFryContour or EllipsoidFit
    seed : int
    samples_per_contour : int, optional
        Default: the number of points of each contour.

    Returns
    -------
    EllipsoidFit
        ``info['fits']`` holds the individual fits.
    """
    rng = make_rng(seed)
    fits, dirs = [], []
    for c in contours:
        if isinstance(c, EllipsoidFit):
            fits.append(c)
            dirs.append(None)
            continue
        try:
            fits.append(fit_ellipsoid(c))
            dirs.append(c.directions)
        except (ValueError, NumericalError) as err:
            warnings.warn(f"contour level {c.level} rejected: {err}")
    if not fits:
        raise NumericalError("all contour fits were rejected")
    samples = []
    for f, u in zip(fits, dirs):
        dim = f.dim
        m = f.n_points if samples_per_contour is None else int(samples_per_contour)
        if u is None or samples_per_contour is not None:
            u = default_directions(dim, m if dim == 2 else None)
        rho = 1.0 / np.sqrt(np.einsum("ij,jk,ik->i", u, f.matrix, u))
        s = float(np.prod(f.semi_axes) ** (1.0 / dim))
        pts = (rho[:, None] * u + rng.normal(0.0, np.sqrt(f.sigma2), u.shape)) / s
        samples.append(pts)
    out = fit_ellipsoid(np.concatenate(samples))
    out.info["fits"] = fits
    out.info["levels"] = [f.info.get("level") for f in fits]
    return out


def fit_levels(p, levels, directions=None, half_angle=None, cutoff=None, seed=0):
    """Contours for several levels of one pattern and their consensus fit."""
    fs = fry(p)
    contours = []
    for lev in levels:
        try:
            contours.append(pseudo_fry(fs, lev, directions, half_angle, cutoff))
        except ValueError as err:
            warnings.warn(str(err))
    if not contours:
        raise ValueError("no contour level could be extracted")
    return contours, average_rotation(contours, seed=seed)
