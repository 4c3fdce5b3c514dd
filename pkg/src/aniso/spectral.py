"""
Bartlett periodogram of planar point patterns and its polar summaries.

The periodogram is evaluated on the bias-cancelling lattice of
frequencies ``omega = 2*pi*(p1/l1, p2/l2)`` with integer ``p1 in 0..P``
and ``p2 in -P..P-1``. Because ``F(-omega) = F(omega)`` the lattice half
plane carries all the information; the R and Theta spectra average over
the distinct ordinates ``p1 > 0`` and ``p1 = 0, p2 > 0``.
"""

from dataclasses import dataclass, field, replace

import numpy as np
from scipy import ndimage
from scipy.stats import chi2

from .geometry import RectWindow
from .summary import SummaryCurve

__all__ = [
    "PeriodogramGrid",
    "periodogram",
    "periodogram_direct",
    "bias_term",
    "smooth",
    "r_spectrum",
    "theta_spectrum",
    "chi2_envelope",
]

DEFAULT_P = 16
# 3x3 moving-average weights (centre 4, edges 2, corners 1)
_MA_KERNEL = np.outer([1.0, 2.0, 1.0], [1.0, 2.0, 1.0]) / 16.0


@dataclass(eq=False)
class PeriodogramGrid:
    """Periodogram values on the integer frequency lattice.

    Attributes
    ----------
    p1, p2 : ndarray of int
        Lattice indices, ``0..P`` and ``-P..P-1``.
    omega1, omega2 : ndarray
        Frequencies ``2*pi*p1/l1`` and ``2*pi*p2/l2``.
    values : ndarray, shape (P + 1, 2P)
        ``F(omega)``; ``values[i, j]`` belongs to ``(p1[i], p2[j])``.
    intensity : float
        ``n / |W|`` of the (possibly standardized) pattern.
    n : int
    window : RectWindow
        Window the frequencies refer to.
    smoothed : dict or None
        Smoothing method and parameters, None for the raw periodogram.
    """

    p1: np.ndarray
    p2: np.ndarray
    omega1: np.ndarray
    omega2: np.ndarray
    values: np.ndarray
    intensity: float
    n: int
    window: RectWindow
    standardized: bool = False
    smoothed: dict = None
    extra: dict = field(default_factory=dict)

    @property
    def pmax(self):
        return int(self.p1[-1])

    def origin_index(self):
        return 0, int(self.pmax)

    def half_plane_mask(self):
        """True on the distinct ordinates (origin excluded)."""
        pp1, pp2 = np.meshgrid(self.p1, self.p2, indexing="ij")
        return (pp1 > 0) | ((pp1 == 0) & (pp2 > 0))

    def to_rows(self):
        """Long-form rows ``(p1, p2, omega1, omega2, value)``."""
        pp1, pp2 = np.meshgrid(self.p1, self.p2, indexing="ij")
        o1, o2 = np.meshgrid(self.omega1, self.omega2, indexing="ij")
        return np.column_stack([pp1.ravel(), pp2.ravel(), o1.ravel(), o2.ravel(),
                                self.values.ravel()])


def _prepare(p, standardize):
    if p.dim != 2:
        raise ValueError("the periodogram is implemented for planar patterns only")
    w = p.window
    if not isinstance(w, RectWindow):
        raise ValueError("the periodogram needs a rectangular window")
    x = p.points - w.lo
    if standardize:
        n = max(p.n, 1)
        x = x * (n / w.sides)
        w = RectWindow([0.0, 0.0], [float(n), float(n)])
    else:
        w = RectWindow([0.0, 0.0], w.sides)
    return x, w


def _lattice(pmax, window):
    if int(pmax) != pmax or pmax < 1:
        raise ValueError("P must be a positive integer")
    pmax = int(pmax)
    p1 = np.arange(0, pmax + 1)
    p2 = np.arange(-pmax, pmax)
    l1, l2 = window.sides
    return p1, p2, 2 * np.pi * p1 / l1, 2 * np.pi * p2 / l2


def periodogram(p, P=DEFAULT_P, standardize=False):
    """Periodogram ``F(omega) = A(omega)^2 + B(omega)^2`` on the lattice.

    The discrete Fourier transform ``|W|^{-1/2} sum exp(-i omega.x)`` is
    separable in the coordinates, so it is evaluated as a product of two
    ``(P + 1) x n`` and ``n x 2P`` exponential matrices. Coordinates are
    measured from the lower-left window corner.

    Parameters
    ----------
    p : PointPattern
        Planar pattern in a rectangular window.
    P : int
        Largest lattice index.
    standardize : bool
        Replace ``x_j`` by ``n x_j / l_j`` first. Off by default since it
        distorts non-square windows.

    Returns
    -------
    PeriodogramGrid
    """
    x, w = _prepare(p, standardize)
    p1, p2, om1, om2 = _lattice(P, w)
    e1 = np.exp(-1j * np.outer(om1, x[:, 0]))
    e2 = np.exp(-1j * np.outer(x[:, 1], om2))
    dft = (e1 @ e2) / np.sqrt(w.volume)
    vals = dft.real ** 2 + dft.imag ** 2
    return PeriodogramGrid(p1, p2, om1, om2, vals, p.n / w.volume, p.n, w,
                           standardized=bool(standardize),
                           extra={"A": dft.real, "B": dft.imag})


def periodogram_direct(p, P=DEFAULT_P, standardize=False):
    """Periodogram by explicit summation over points, frequency by frequency."""
    x, w = _prepare(p, standardize)
    p1, p2, om1, om2 = _lattice(P, w)
    vals = np.empty((p1.size, p2.size))
    for i, a in enumerate(om1):
        for j, b in enumerate(om2):
            s = np.sum(np.exp(-1j * (a * x[:, 0] + b * x[:, 1]))) / np.sqrt(w.volume)
            vals[i, j] = s.real ** 2 + s.imag ** 2
    return vals


def bias_term(lam, window, omega):
    """Bias ``lam^2 |W| prod sinc^2(l_j omega_j / 2)`` of the periodogram.

    Vanishes on the lattice away from the origin and equals ``lam^2 |W|``
    at ``omega = 0``.
    """
    omega = np.atleast_2d(np.asarray(omega, dtype=float))
    half = 0.5 * omega * window.sides[None, :]
    # np.sinc(t) = sin(pi t) / (pi t) with the limit 1 at t = 0
    fac = np.prod(np.sinc(half / np.pi) ** 2, axis=1)
    out = lam * lam * window.volume * fac
    return out[0] if out.size == 1 else out


def _full_plane(grid):
    """Symmetric full-plane array over ``p1, p2 in -P..P`` with NaN where
    neither ``p`` nor ``-p`` is stored and at the origin."""
    P = grid.pmax
    full = np.full((2 * P + 1, 2 * P + 1), np.nan)
    # stored block: p1 in 0..P -> rows P..2P, p2 in -P..P-1 -> cols 0..2P-1
    full[P:, :2 * P] = grid.values
    mirror = np.full_like(full, np.nan)
    mirror[P:, :2 * P] = grid.values
    mirror = mirror[::-1, ::-1]
    full = np.where(np.isnan(full), mirror, full)
    full[P, P] = np.nan
    return full


def smooth(grid, method="gaussian", sigma=1.0, repeats=1):
    """Smooth the periodogram, leaving the origin out.

    The ordinate at ``omega = 0`` is neither used as input nor smoothed;
    every other ordinate is replaced by a normalized (mask-aware) weighted
    average over the symmetric full lattice, so a constant surface stays
    constant and symmetry is preserved.

    Parameters
    ----------
    grid : PeriodogramGrid
    method : {'gaussian', 'moving_average'}
    sigma : float
        Gaussian standard deviation in lattice units.
    repeats : int
        Number of 3x3 moving-average passes.

    Returns
    -------
    PeriodogramGrid
    """
    full = _full_plane(grid)
    mask = ~np.isnan(full)
    if method == "gaussian":
        if not sigma > 0:
            raise ValueError("sigma must be positive")
        half = int(np.ceil(4 * sigma))
        t = np.arange(-half, half + 1)
        k1 = np.exp(-0.5 * (t / sigma) ** 2)
        kernels = [np.outer(k1, k1) / k1.sum() ** 2]
        params = {"method": "gaussian", "sigma": float(sigma)}
    elif method == "moving_average":
        if int(repeats) != repeats or repeats < 1:
            raise ValueError("repeats must be a positive integer")
        kernels = [_MA_KERNEL] * int(repeats)
        params = {"method": "moving_average", "repeats": int(repeats)}
    else:
        raise ValueError(f"unknown smoothing method {method!r}")
    cur = np.where(mask, full, 0.0)
    for k in kernels:
        num = ndimage.convolve(cur, k, mode="constant", cval=0.0)
        den = ndimage.convolve(mask.astype(float), k, mode="constant", cval=0.0)
        cur = np.where(mask, num / np.where(den > 0, den, 1.0), 0.0)
    P = grid.pmax
    out = cur[P:, :2 * P].copy()
    out[0, P] = grid.values[0, P]
    return replace(grid, values=out, smoothed=params, extra={})


def _ordinates(grid):
    pp1, pp2 = np.meshgrid(grid.p1, grid.p2, indexing="ij")
    keep = grid.half_plane_mask()
    r = np.hypot(pp1[keep], pp2[keep])
    theta = np.degrees(np.arctan2(pp2[keep], pp1[keep])) % 180.0
    return r, theta, grid.values[keep]


def r_spectrum(grid):
    """Annular averages over ``r - 1 < |p| <= r``, ``r = 1..P``.

    ``counts`` holds the number of ordinates per bin.
    """
    r, _, v = _ordinates(grid)
    rs = np.arange(1, grid.pmax + 1)
    vals = np.full(rs.size, np.nan)
    counts = np.zeros(rs.size, dtype=int)
    for k, rr in enumerate(rs):
        sel = (r > rr - 1) & (r <= rr)
        counts[k] = sel.sum()
        if counts[k]:
            vals[k] = v[sel].mean()
    return SummaryCurve("r_spectrum", rs, vals, {"P": grid.pmax, "smoothed": grid.smoothed},
                        counts, extra={"intensity": grid.intensity})


def theta_spectrum(grid, step=10.0):
    """Angular averages over ``theta - step/2 < theta' <= theta + step/2``.

    Angles ``theta' = atan2(p2, p1)`` are taken modulo 180 degrees and only
    ordinates with ``0 < |p| <= P`` enter, so every direction sees the
    same radial range. The grid is in degrees.

    ``extra['mean_ordinate']`` is the average of the ordinates used, a
    descriptive alternative to the intensity for scaling the spectrum; no
    calibrated test is attached to it.
    """
    r, th, v = _ordinates(grid)
    keep = r <= grid.pmax
    th, v = th[keep], v[keep]
    centres = np.arange(0.0, 180.0, step)
    vals = np.full(centres.size, np.nan)
    counts = np.zeros(centres.size, dtype=int)
    for k, c in enumerate(centres):
        d = (th - c + 90.0) % 180.0 - 90.0
        sel = (d > -step / 2) & (d <= step / 2)
        counts[k] = sel.sum()
        if counts[k]:
            vals[k] = v[sel].mean()
    return SummaryCurve("theta_spectrum", centres, vals,
                        {"P": grid.pmax, "step_deg": float(step), "smoothed": grid.smoothed},
                        counts, extra={"intensity": grid.intensity,
                                       "mean_ordinate": float(v.mean()) if v.size else np.nan})


def chi2_envelope(m, level=0.95):
    """Central ``level`` interval of ``chi2_{2m} / (2m)``."""
    m = np.asarray(m, dtype=float)
    if np.any(m < 1):
        raise ValueError("number of ordinates must be >= 1")
    if not 0 < level < 1:
        raise ValueError("level must lie in (0, 1)")
    a = (1 - level) / 2
    return chi2.ppf(a, 2 * m) / (2 * m), chi2.ppf(1 - a, 2 * m) / (2 * m)
