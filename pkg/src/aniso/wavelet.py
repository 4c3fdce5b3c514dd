"""
Directional wavelet summaries of planar patterns.

Two approaches are provided: the focal-point sector profile with a 1D
French Top Hat transform over angle, averaged into a directional
variance curve, and the Morlet directional continuous wavelet transform
of the point measure with its scale-angle energy density.
"""

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .geometry import RectWindow
from .summary import SummaryCurve

__all__ = [
    "SectorIntensityProfile",
    "sector_profile",
    "sector_profiles",
    "sector_areas",
    "french_top_hat",
    "top_hat_weights",
    "rosenberg_transform",
    "rosenberg_variance",
    "morlet",
    "CwtField",
    "cwt",
    "cwt_direct",
    "energy",
    "default_scales",
]

N_SECTORS = 180
MIN_K0 = 5.5


# ---------------------------------------------------------------------------
# sector profiles


@dataclass(eq=False)
class SectorIntensityProfile:
    """Combined-sector intensities around one focal point.

    Attributes
    ----------
    focal : ndarray, shape (2,)
    eta : ndarray, shape (180,)
        ``eta[i]`` is the number of other points in the two opposite 1
        degree sectors centred on ``i`` and ``i + 180`` degrees divided by
        the area of their intersection with the window.
    counts : ndarray of int
    areas : ndarray
    """

    focal: np.ndarray
    eta: np.ndarray
    counts: np.ndarray
    areas: np.ndarray


def _wall_geometry(x, window, alpha):
    """Distance to and outward normal angle of the wall hit first by the
    ray from ``x`` at angle ``alpha`` (vectorized over alpha)."""
    c, s = np.cos(alpha), np.sin(alpha)
    big = np.inf
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.stack([
            np.where(c > 0, (window.hi[0] - x[0]) / c, big),
            np.where(s > 0, (window.hi[1] - x[1]) / s, big),
            np.where(c < 0, (window.lo[0] - x[0]) / c, big),
            np.where(s < 0, (window.lo[1] - x[1]) / s, big),
        ])
    wall = np.argmin(t, axis=0)
    dist = np.array([window.hi[0] - x[0], window.hi[1] - x[1],
                     x[0] - window.lo[0], x[1] - window.lo[1]])[wall]
    normal = np.array([0.0, 0.5 * np.pi, np.pi, 1.5 * np.pi])[wall]
    return dist, normal


def sector_areas(x, window, n_cells=360):
    """Exact areas of the window intersected with each 1 degree sector
    ``[i - 1/2, i + 1/2)`` degrees around ``x``.

    Between two consecutive breakpoints (cell edges and corner angles)
    the ray leaves the window through one wall at distance ``d`` with
    normal angle ``n``, and the swept area is
    ``d^2 (tan(b - n) - tan(a - n)) / 2``.
    """
    x = np.asarray(x, dtype=float)
    step = 2 * np.pi / n_cells
    edges = (np.arange(n_cells + 1) - 0.5) * step
    corners = np.array([[window.lo[0], window.lo[1]], [window.hi[0], window.lo[1]],
                        [window.hi[0], window.hi[1]], [window.lo[0], window.hi[1]]])
    dc = corners - x
    ok = np.hypot(dc[:, 0], dc[:, 1]) > 0
    ca = np.arctan2(dc[ok, 1], dc[ok, 0])
    ca = (ca - edges[0]) % (2 * np.pi) + edges[0]
    brk = np.unique(np.concatenate([edges, ca]))
    a, b = brk[:-1], brk[1:]
    keep = b - a > 0
    a, b = a[keep], b[keep]
    dist, nrm = _wall_geometry(x, window, 0.5 * (a + b))
    with np.errstate(invalid="ignore"):
        piece = 0.5 * dist ** 2 * (np.tan(b - nrm) - np.tan(a - nrm))
    piece = np.where(dist > 0, piece, 0.0)
    cell = np.clip(np.floor((0.5 * (a + b) - edges[0]) / step).astype(int), 0, n_cells - 1)
    return np.bincount(cell, weights=piece, minlength=n_cells)


def _sector_index(v):
    deg = np.degrees(np.arctan2(v[:, 1], v[:, 0]))
    return np.floor(deg + 0.5).astype(int) % 360


def sector_profile(p, focal):
    """Sector intensity profile around the point with index ``focal``."""
    if p.dim != 2:
        raise ValueError("sector profiles are defined for planar patterns")
    if p.n < 2:
        raise ValueError("insufficient points: need n >= 2")
    x = p.points[focal]
    others = np.delete(p.points, focal, axis=0)
    cnt360 = np.bincount(_sector_index(others - x), minlength=360)
    area360 = sector_areas(x, p.window)
    cnt = cnt360[:N_SECTORS] + cnt360[N_SECTORS:]
    area = area360[:N_SECTORS] + area360[N_SECTORS:]
    eta = np.where(area > 0, cnt / np.where(area > 0, area, 1.0), 0.0)
    return SectorIntensityProfile(x.copy(), eta, cnt, area)


def sector_profiles(p, focal=None):
    """Profiles of several focal points stacked as an ``(m, 180)`` array."""
    focal = np.arange(p.n) if focal is None else np.asarray(focal, dtype=int)
    return np.array([sector_profile(p, i).eta for i in focal]).reshape(-1, N_SECTORS)


# ---------------------------------------------------------------------------
# French Top Hat transform over angle


def french_top_hat(t):
    """``1`` on ``|t| <= 1``, ``-1/2`` on ``1 < |t| <= 3``, else 0."""
    a = np.abs(np.asarray(t, dtype=float))
    return np.where(a <= 1, 1.0, np.where(a <= 3, -0.5, 0.0))


def _top_hat_primitive(t):
    """Antiderivative of the French Top Hat with value 0 at ``t = 0``."""
    t = np.asarray(t, dtype=float)
    a = np.abs(t)
    val = np.where(a <= 1, a, np.where(a <= 3, 1.0 - 0.5 * (a - 1), 0.0))
    return np.sign(t) * val


def top_hat_weights(scale, n=N_SECTORS, period=180.0):
    """Circulant weights ``w[k]`` for angular offset ``k`` degrees.

    ``w[k]`` is the integral of ``psi(t / scale)`` over the 1 degree cell
    ``[k - 1/2, k + 1/2]``, summed over all periodic images, so the
    weights add up to exactly zero.
    """
    if not scale > 0:
        raise ValueError("scale must be positive")
    k = np.arange(n, dtype=float)
    k = np.where(k >= n / 2, k - n, k)
    reach = int(np.ceil((3 * scale + 1) / period)) + 1
    out = np.zeros(n)
    for m in range(-reach, reach + 1):
        lo = (k - 0.5 + m * period) / scale
        hi = (k + 0.5 + m * period) / scale
        out += scale * (_top_hat_primitive(hi) - _top_hat_primitive(lo))
    return out


def _transform_matrix(scales, n=N_SECTORS):
    """Matrix ``M`` with ``(eta @ M)[theta, k] = W(theta, b_k)``."""
    mats = []
    idx = np.arange(n)
    for b in scales:
        w = top_hat_weights(b, n)
        # entry (i, theta) = w[(i - theta) mod n] / b
        mats.append(w[(idx[:, None] - idx[None, :]) % n] / b)
    return np.stack(mats, axis=-1)


def rosenberg_transform(profile, theta=None, scales=None):
    """French Top Hat transform ``W(theta, b)`` of a sector profile.

    Parameters
    ----------
    profile : SectorIntensityProfile or array_like, shape (..., 180)
    theta : array_like of int, optional
        Directions in whole degrees; default ``0..179``.
    scales : array_like, optional
        Scales in degrees, default ``1..45``.

    Returns
    -------
    ndarray, shape (..., len(theta), len(scales))
    """
    eta = profile.eta if isinstance(profile, SectorIntensityProfile) else np.asarray(profile, float)
    scales = np.arange(1, 46, dtype=float) if scales is None else np.atleast_1d(np.asarray(scales, float))
    theta = np.arange(N_SECTORS) if theta is None else np.asarray(theta, dtype=int) % N_SECTORS
    mat = _transform_matrix(scales)[:, theta, :]
    return np.tensordot(eta, mat, axes=([-1], [0]))


def rosenberg_variance(p, scales=None, border_margin=None):
    """Directional wavelet variance ``Pbar(theta)`` for ``theta = 0..179``.

    ``P(x, theta)`` is the mean of ``W(x, theta, b)^2`` over the scales;
    it is averaged over the focal points farther than ``border_margin``
    from the window boundary (default 10% of the shortest side).
    """
    if p.dim != 2:
        raise ValueError("defined for planar patterns")
    scales = np.arange(1, 46, dtype=float) if scales is None else np.asarray(scales, float)
    if border_margin is None:
        border_margin = 0.1 * float(np.min(p.window.sides))
    if border_margin < 0:
        raise ValueError("border margin must be >= 0")
    x = p.points
    w = p.window
    dist = np.min(np.concatenate([x - w.lo, w.hi - x], axis=1), axis=1)
    focal = np.flatnonzero(dist > border_margin)
    if focal.size == 0:
        raise ValueError("no focal point lies farther than the border margin")
    eta = sector_profiles(p, focal)
    mat = _transform_matrix(scales)
    theta = np.arange(N_SECTORS)
    pbar = np.zeros(N_SECTORS)
    for k in range(scales.size):
        wk = eta @ mat[:, :, k]
        pbar += np.mean(wk * wk, axis=0)
    pbar /= scales.size
    return SummaryCurve("rosenberg_variance", theta.astype(float), pbar,
                        {"scales_deg": scales.tolist(), "border_margin": float(border_margin),
                         "n_focal": int(focal.size)},
                        np.full(N_SECTORS, focal.size))


# ---------------------------------------------------------------------------
# Morlet continuous wavelet transform


def _check_morlet(D, k0):
    k0 = np.asarray(k0, dtype=float)
    if not D > 0:
        raise ValueError("anisotropy ratio D must be positive")
    if k0.shape != (2,) or np.linalg.norm(k0) < MIN_K0 - 1e-12:
        raise ValueError(f"wave vector k0 must have norm >= {MIN_K0}")
    return k0


def _zero_mean_offset(D, k0):
    # integral of exp(i k0.x - x^T M x / 2) is 2 pi / D * exp(-k0^T M^-1 k0 / 2), M = diag(D^2, 1)
    return np.exp(-0.5 * (k0[0] ** 2 / D ** 2 + k0[1] ** 2))


def morlet(x, D=0.1, k0=(0.0, 5.5), zero_mean=False):
    """Morlet mother wavelet
    ``sqrt(D/pi) exp(i k0.x) exp(-x^T A^T A x / 2)`` with ``A = diag(D, 1)``.

    With ``zero_mean`` the Gaussian envelope times
    ``exp(-k0^T (A^T A)^{-1} k0 / 2)`` is subtracted so the wavelet
    integrates to zero.
    """
    k0 = _check_morlet(D, k0)
    x = np.asarray(x, dtype=float)
    env = np.exp(-0.5 * ((D * x[..., 0]) ** 2 + x[..., 1] ** 2))
    wave = np.exp(1j * (k0[0] * x[..., 0] + k0[1] * x[..., 1]))
    if zero_mean:
        wave = wave - _zero_mean_offset(D, k0)
    return np.sqrt(D / np.pi) * wave * env


def default_scales(window, count=16):
    """``count`` log-spaced scales in ``[0.02, 1]`` times the mean edge."""
    edge = float(np.mean(window.sides))
    return np.geomspace(0.02, 1.0, count) * edge


@dataclass(eq=False)
class CwtField:
    """Directional CWT coefficients on per-angle translation lattices.

    For angle ``theta`` the translations are
    ``b = c + R_theta (s_1 h, s_2 h)`` for integer offsets ``s``, i.e. a
    square lattice of spacing ``h`` aligned with the wavelet and centred
    on the window centre ``c``. Each node stands for the square cell of
    side ``h`` around it; ``weights`` holds the cell area inside ``W``.

    Attributes
    ----------
    scales, angles : ndarray
    offsets : ndarray
        Lattice offsets ``s h`` along each rotated axis.
    coef : ndarray, complex, shape (len(scales), len(angles), m, m)
        ``S(a, b, theta)``; zero at nodes whose cell misses ``W``.
    weights : ndarray, shape (len(angles), m, m)
        Area of each lattice cell inside the window.
    spacing : float
    D : float
    k0 : ndarray
    """

    scales: np.ndarray
    angles: np.ndarray
    offsets: np.ndarray
    coef: np.ndarray
    weights: np.ndarray
    spacing: float
    centre: np.ndarray
    D: float
    k0: np.ndarray
    zero_mean: bool = False
    extra: dict = field(default_factory=dict)

    @property
    def mask(self):
        return self.weights > 0

    def translations(self, angle_index):
        """Translation vectors ``b`` of one angle, shape ``(m, m, 2)``."""
        th = self.angles[angle_index]
        s1, s2 = np.meshgrid(self.offsets, self.offsets, indexing="ij")
        c, s = np.cos(th), np.sin(th)
        return np.stack([self.centre[0] + c * s1 - s * s2,
                         self.centre[1] + s * s1 + c * s2], axis=-1)


def _clip_box(poly, lo, hi):
    """Clip a convex polygon (rows of vertices) to an axis-aligned box."""
    for axis in (0, 1):
        for bound, sign in ((lo[axis], 1.0), (hi[axis], -1.0)):
            if len(poly) == 0:
                return poly
            d = sign * (poly[:, axis] - bound)
            nxt = np.roll(poly, -1, axis=0)
            dn = np.roll(d, -1)
            out = []
            for v, u, dv, du in zip(poly, nxt, d, dn):
                if dv >= 0:
                    out.append(v)
                if dv * du < 0:
                    out.append(v + (u - v) * (dv / (dv - du)))
            poly = np.array(out).reshape(-1, 2)
    return poly


def _polygon_area(poly):
    if len(poly) < 3:
        return 0.0
    x, y = poly[:, 0], poly[:, 1]
    return 0.5 * abs(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))


def _cell_weights(b, theta, h, window):
    """Area of the rotated square cells of side ``h`` centred on ``b``
    that falls inside the window."""
    m = b.shape[0]
    flat = b.reshape(-1, 2)
    reach = h / np.sqrt(2)
    lo = flat - window.lo
    hi = window.hi - flat
    inside = np.all((lo >= reach) & (hi >= reach), axis=1)
    outside = np.any((lo <= -reach) | (hi <= -reach), axis=1)
    w = np.where(inside, h * h, 0.0)
    c, s = np.cos(theta), np.sin(theta)
    corners = 0.5 * h * np.array([[-1, -1], [1, -1], [1, 1], [-1, 1]], dtype=float)
    corners = corners @ np.array([[c, s], [-s, c]])
    for i in np.flatnonzero(~inside & ~outside):
        w[i] = _polygon_area(_clip_box(flat[i] + corners, window.lo, window.hi))
    return w.reshape(m, m)


@lru_cache(maxsize=1024)
def _window_weights(lo, hi, theta, resolution):
    """Cell weights of one angle; they depend only on the window and the
    lattice, so Monte Carlo runs in a fixed window reuse them."""
    window = RectWindow(np.array(lo), np.array(hi))
    h, offs = _lattice(window, resolution)
    s1, s2 = np.meshgrid(offs, offs, indexing="ij")
    c, s = np.cos(theta), np.sin(theta)
    centre = window.center
    b = np.stack([centre[0] + c * s1 - s * s2, centre[1] + s * s1 + c * s2], axis=-1)
    w = _cell_weights(b, theta, h, window)
    w.flags.writeable = False
    return w


def _lattice(window, resolution):
    h = float(np.min(window.sides)) / resolution
    half = 0.5 * float(np.hypot(*window.sides)) + h
    m = int(np.ceil(half / h))
    return h, np.arange(-m, m + 1) * h


def cwt(p, scales=None, angles=None, D=0.1, k0=(0.0, 5.5), resolution=32, zero_mean=False):
    """Directional Morlet CWT ``S(a, b, theta) = a^-1 sum conj(psi_{a,b,theta}(x))``.

    In the frame rotated by ``theta`` the wavelet factorizes into a
    function of each rotated coordinate, and on a lattice aligned with
    that frame the coefficient array is a product of two
    ``(m x n)`` matrices.

    Parameters
    ----------
    p : PointPattern
        Planar pattern in a rectangular window.
    scales : array_like, optional
        Default :func:`default_scales`.
    angles : array_like, optional
        Radians, default 1 degree steps ``1..180`` degrees.
    D, k0 : float, array_like
        Morlet anisotropy ratio and wave vector.
    resolution : int
        Lattice nodes per shortest window side.
    zero_mean : bool
        Use the zero-integral wavelet.

    Returns
    -------
    CwtField
    """
    if p.dim != 2:
        raise ValueError("the CWT is implemented for planar patterns")
    k0 = _check_morlet(D, k0)
    w = p.window
    scales = default_scales(w) if scales is None else np.atleast_1d(np.asarray(scales, float))
    if np.any(scales <= 0):
        raise ValueError("scales must be positive")
    angles = (np.radians(np.arange(1, 181)) if angles is None
              else np.atleast_1d(np.asarray(angles, float)))
    if int(resolution) < 2:
        raise ValueError("resolution must be >= 2")
    h, offs = _lattice(w, int(resolution))
    m = offs.size
    centre = w.center
    x = p.points - centre
    coef = np.zeros((scales.size, angles.size, m, m), dtype=complex)
    weights = np.zeros((angles.size, m, m))
    off_val = _zero_mean_offset(D, k0) if zero_mean else 0.0
    norm = np.sqrt(D / np.pi)
    field_ = CwtField(scales, angles, offs, coef, weights, h, centre, float(D), k0, bool(zero_mean))
    for j, th in enumerate(angles):
        weights[j] = _window_weights(tuple(map(float, w.lo)), tuple(map(float, w.hi)),
                                     float(th), int(resolution))
        live = weights[j] > 0
        if p.n == 0:
            continue
        c, s = np.cos(th), np.sin(th)
        # rotated point coordinates R_{-theta} x
        u1 = c * x[:, 0] + s * x[:, 1]
        u2 = -s * x[:, 0] + c * x[:, 1]
        d1 = (u1[None, :] - offs[:, None]) ** 2
        d2 = (u2[None, :] - offs[:, None]) ** 2
        for i, a in enumerate(scales):
            env1 = np.exp((-0.5 * D * D / (a * a)) * d1)
            env2 = np.exp((-0.5 / (a * a)) * d2)
            # exp(-i k0.(u - s)/a) splits into a point factor and a node factor
            ph = np.exp(-1j * (k0[0] * u1 + k0[1] * u2) / a)
            val = env1 @ (env2 * ph.real).T + 1j * (env1 @ (env2 * ph.imag).T)
            val *= np.exp(1j * k0[0] * offs / a)[:, None] * np.exp(1j * k0[1] * offs / a)[None, :]
            if zero_mean:
                val = val - off_val * (env1 @ env2.T)
            coef[i, j] = np.where(live, norm * val / a, 0.0)
    return field_


def cwt_direct(p, scale, angle, b, D=0.1, k0=(0.0, 5.5), zero_mean=False):
    """``S(a, b, theta)`` at explicit translations ``b`` (rows), by summing
    the conjugate wavelet over points one translation at a time."""
    b = np.atleast_2d(np.asarray(b, dtype=float))
    c, s = np.cos(angle), np.sin(angle)
    rot = np.array([[c, s], [-s, c]])
    out = np.empty(b.shape[0], dtype=complex)
    for k, bk in enumerate(b):
        u = (p.points - bk) @ rot.T / scale
        out[k] = np.sum(np.conj(morlet(u, D, k0, zero_mean))) / scale
    return out


def energy(field_):
    """Scale-angle energy density ``nu(a, theta) = sum_b w_b |S(a, b, theta)|^2``
    with ``w_b`` the area of the lattice cell of ``b`` inside the window.

    Returns
    -------
    SummaryCurve
        ``values[i, j]`` is ``nu(scales[i], angles[j])``; ``grid`` holds
        the scales and ``grid2`` the angles.
    """
    s = field_.coef
    nu = np.einsum("jkl,ijkl->ij", field_.weights, s.real ** 2 + s.imag ** 2)
    counts = np.broadcast_to(field_.mask.sum(axis=(1, 2))[None, :], nu.shape)
    return SummaryCurve("scale_angle_energy", field_.scales, nu,
                        {"D": field_.D, "k0": field_.k0.tolist(), "spacing": field_.spacing,
                         "zero_mean": field_.zero_mean}, counts, grid2=field_.angles)
