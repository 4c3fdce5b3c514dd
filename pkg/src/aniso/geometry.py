"""
Geometric substrate: windows, point patterns, directions, directional
test sets and the edge-correction volumes used by every estimator.

Angles follow the usual convention: in 2D the polar angle runs
anticlockwise from the x-axis in [0, 2*pi); in 3D the azimuth is
measured the same way and the polar angle is ``arccos(z / r)``.
The angle of the zero vector is undefined and reported as
:data:`UNDEFINED`.
"""

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "UNDEFINED",
    "TOL",
    "RectWindow",
    "PointPattern",
    "Direction",
    "SectorSpec",
    "CylinderSpec",
    "TransformedSet",
    "to_polar",
    "from_polar",
    "is_undefined",
    "translation_overlap",
    "erode_by_ball",
    "erode_by_sector",
    "sector_extents",
    "membership",
    "border_distance",
]

#: Sentinel returned for the angle of the zero vector (and the azimuth at
#: the 3D poles). It is a NaN, so it never compares equal to a real angle.
UNDEFINED = float("nan")

#: Absolute tolerance used for comparisons of normalized quantities.
TOL = 1e-12

TWO_PI = 2.0 * np.pi


def is_undefined(angle):
    """Return True where ``angle`` is the undefined sentinel."""
    return np.isnan(angle)


@dataclass(frozen=True, eq=False)
class RectWindow:
    """Axis-aligned box ``[lo_1, hi_1] x ... x [lo_d, hi_d]``.

    Parameters
    ----------
    lo, hi : array_like
        Lower and upper corners. Every side must have positive length.
    """

    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        lo = np.array(self.lo, dtype=float).ravel()
        hi = np.array(self.hi, dtype=float).ravel()
        if lo.shape != hi.shape or lo.size not in (2, 3):
            raise ValueError("window corners must both have length 2 or 3")
        if not np.all(np.isfinite(lo)) or not np.all(np.isfinite(hi)):
            raise ValueError("window corners must be finite")
        if np.any(hi <= lo):
            raise ValueError("window needs hi > lo on every axis")
        lo.setflags(write=False)
        hi.setflags(write=False)
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @classmethod
    def square(cls, a, b, dim=2):
        """The cube ``[a, b]^dim``."""
        return cls([a] * dim, [b] * dim)

    @property
    def dim(self):
        return self.lo.size

    @property
    def sides(self):
        return self.hi - self.lo

    @property
    def volume(self):
        return float(np.prod(self.sides))

    @property
    def center(self):
        return 0.5 * (self.lo + self.hi)

    def contains(self, points, tol=0.0):
        """Boolean mask of points inside the closed window."""
        x = np.atleast_2d(np.asarray(points, dtype=float))
        return np.all((x >= self.lo - tol) & (x <= self.hi + tol), axis=1)

    def shrink(self, extents):
        """Shrink each side by ``extents`` on both ends; None if empty."""
        e = np.broadcast_to(np.asarray(extents, dtype=float), self.lo.shape)
        lo = self.lo + e
        hi = self.hi - e
        if np.any(hi <= lo):
            return None
        return RectWindow(lo, hi)

    def to_dict(self):
        return {"lo": self.lo.tolist(), "hi": self.hi.tolist()}

    def __eq__(self, other):
        return (isinstance(other, RectWindow) and np.array_equal(self.lo, other.lo)
                and np.array_equal(self.hi, other.hi))

    def __repr__(self):
        return f"RectWindow(lo={self.lo.tolist()}, hi={self.hi.tolist()})"


@dataclass(frozen=True, eq=False)
class PointPattern:
    """A finite simple point pattern observed in a rectangular window.

    Parameters
    ----------
    points : array_like, shape (n, d)
        Point coordinates, all inside the closed window.
    window : RectWindow
        Observation window.
    metadata : dict, optional
        Free-form provenance (model, seed, flags).
    check_duplicates : bool
        Reject coincident points. Disable only for trusted input.
    """

    points: np.ndarray
    window: RectWindow
    metadata: dict = field(default_factory=dict)
    check_duplicates: bool = True

    def __post_init__(self):
        x = np.array(self.points, dtype=float)
        if x.size == 0:
            x = x.reshape(0, self.window.dim)
        if x.ndim != 2 or x.shape[1] != self.window.dim:
            raise ValueError(
                f"points must have shape (n, {self.window.dim}) to match the window")
        if not np.all(np.isfinite(x)):
            raise ValueError("point coordinates must be finite")
        if not np.all(self.window.contains(x)):
            raise ValueError("all points must lie inside the window")
        if self.check_duplicates and len(x) > 1:
            if len(np.unique(x, axis=0)) != len(x):
                raise ValueError("pattern contains duplicate points")
        x.setflags(write=False)
        object.__setattr__(self, "points", x)

    @property
    def n(self):
        return self.points.shape[0]

    @property
    def dim(self):
        return self.window.dim

    @property
    def intensity(self):
        """Plain intensity estimate ``n / |W|``."""
        return self.n / self.window.volume

    def __len__(self):
        return self.n


def to_polar(v):
    """Polar (2D) or spherical (3D) coordinates of vectors.

    Parameters
    ----------
    v : array_like, shape (d,) or (m, d)

    Returns
    -------
    r : float or ndarray
        Euclidean norms.
    angles : float or ndarray
        In 2D the angle ``phi`` in [0, 2*pi). In 3D an array
        ``(..., 2)`` holding ``(phi, theta)`` with ``theta`` in [0, pi].
        Undefined angles are :data:`UNDEFINED`.
    """
    v = np.asarray(v, dtype=float)
    single = v.ndim == 1
    x = np.atleast_2d(v)
    d = x.shape[1]
    if d not in (2, 3):
        raise ValueError("vectors must have dimension 2 or 3")
    r = np.sqrt(np.sum(x * x, axis=1))
    phi = np.arctan2(x[:, 1], x[:, 0]) % TWO_PI
    # arctan2 of a tiny negative y rounds to 2*pi after the wrap
    phi[phi >= TWO_PI] = 0.0
    planar = np.hypot(x[:, 0], x[:, 1])
    phi[planar == 0] = UNDEFINED
    if d == 2:
        ang = phi
    else:
        with np.errstate(invalid="ignore", divide="ignore"):
            theta = np.arccos(np.clip(x[:, 2] / r, -1.0, 1.0))
        theta[r == 0] = UNDEFINED
        ang = np.column_stack([phi, theta])
    if single:
        return float(r[0]), (float(ang[0]) if d == 2 else ang[0])
    return r, ang


def from_polar(r, phi, theta=None):
    """Inverse of :func:`to_polar`.

    Returns an array of shape (..., 2) for 2D or (..., 3) when ``theta``
    is given.
    """
    r = np.asarray(r, dtype=float)
    phi = np.asarray(phi, dtype=float)
    if theta is None:
        return np.stack([r * np.cos(phi), r * np.sin(phi)], axis=-1)
    theta = np.asarray(theta, dtype=float)
    s = np.sin(theta)
    return np.stack([r * s * np.cos(phi), r * s * np.sin(phi), r * np.cos(theta)], axis=-1)


@dataclass(frozen=True, eq=False)
class Direction:
    """A unit vector in 2D or 3D.

    Build with :meth:`from_angle` (2D), :meth:`from_angles` (3D) or from
    any nonzero vector, which is normalized.
    """

    u: np.ndarray

    def __post_init__(self):
        u = np.array(self.u, dtype=float).ravel()
        if u.size not in (2, 3):
            raise ValueError("direction must have dimension 2 or 3")
        nrm = np.linalg.norm(u)
        if not nrm > 0:
            raise ValueError("direction vector must be nonzero")
        u = u / nrm
        u.setflags(write=False)
        object.__setattr__(self, "u", u)

    @classmethod
    def from_angle(cls, phi):
        return cls([np.cos(phi), np.sin(phi)])

    @classmethod
    def from_angles(cls, phi, theta):
        return cls(from_polar(1.0, phi, theta))

    @property
    def dim(self):
        return self.u.size

    def angles(self):
        """``phi`` in 2D, ``(phi, theta)`` in 3D."""
        return to_polar(self.u)[1]


def _as_unit(direction):
    if isinstance(direction, Direction):
        return direction.u
    return Direction(direction).u


@dataclass(frozen=True, eq=False)
class SectorSpec:
    """Double cone ``C(u, eps)`` or its truncation ``S(u, eps, r)``.

    A vector belongs to the cone when its axial angle to ``u`` (the angle
    to ``u`` or ``-u``, whichever is smaller) is below ``half_angle``.

    Parameters
    ----------
    direction : Direction or array_like
    half_angle : float
        Cone half opening angle in (0, pi]. Values of pi/2 or more cover
        every direction.
    radius : float, optional
        Truncation radius; None for the infinite cone.
    """

    direction: Direction
    half_angle: float
    radius: float = None

    def __post_init__(self):
        if not isinstance(self.direction, Direction):
            object.__setattr__(self, "direction", Direction(self.direction))
        if not 0 < self.half_angle <= np.pi:
            raise ValueError("half_angle must lie in (0, pi]")
        if self.radius is not None and not self.radius > 0:
            raise ValueError("radius must be positive")

    @property
    def dim(self):
        return self.direction.dim

    @property
    def bounding_radius(self):
        return np.inf if self.radius is None else float(self.radius)

    def with_radius(self, r):
        return SectorSpec(self.direction, self.half_angle, r)

    def contains(self, v):
        v = np.atleast_2d(np.asarray(v, dtype=float))
        nrm = np.sqrt(np.sum(v * v, axis=1))
        proj = np.abs(v @ self.direction.u)
        with np.errstate(invalid="ignore", divide="ignore"):
            cosang = np.where(nrm > 0, proj / nrm, 1.0)
        ok = cosang > np.cos(self.half_angle) - TOL
        if self.half_angle >= np.pi / 2:
            ok[:] = True
        if self.radius is not None:
            ok &= nrm <= self.radius + TOL
        return ok


@dataclass(frozen=True, eq=False)
class CylinderSpec:
    """Origin-centred cylinder ``L(r, u, h_c)``: ``|v.u| <= r`` and distance
    to the axis at most ``h_c``."""

    direction: Direction
    half_height: float
    half_width: float

    def __post_init__(self):
        if not isinstance(self.direction, Direction):
            object.__setattr__(self, "direction", Direction(self.direction))
        if not self.half_height > 0:
            raise ValueError("half_height must be positive")
        if not 0 < self.half_width < self.half_height:
            raise ValueError("cylinder needs 0 < h_c < r")

    @property
    def dim(self):
        return self.direction.dim

    @property
    def bounding_radius(self):
        return float(np.hypot(self.half_height, self.half_width))

    def with_radius(self, r):
        return CylinderSpec(self.direction, r, self.half_width)

    def contains(self, v):
        v = np.atleast_2d(np.asarray(v, dtype=float))
        t = v @ self.direction.u
        perp = v - t[:, None] * self.direction.u
        dist = np.sqrt(np.sum(perp * perp, axis=1))
        return (np.abs(t) <= self.half_height + TOL) & (dist <= self.half_width + TOL)


@dataclass(frozen=True, eq=False)
class TransformedSet:
    """The image ``T B`` of a test set under an invertible linear map."""

    base: object
    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=float)
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "_inv", np.linalg.inv(m))

    @property
    def dim(self):
        return self.matrix.shape[0]

    @property
    def bounding_radius(self):
        return float(np.linalg.norm(self.matrix, 2) * self.base.bounding_radius)

    def contains(self, v):
        v = np.atleast_2d(np.asarray(v, dtype=float))
        return self.base.contains(v @ self._inv.T)


def membership(v, test_set):
    """Whether vector(s) ``v`` belong to a sector, cone or cylinder.

    The zero vector belongs to every set (apex convention).
    """
    v = np.asarray(v, dtype=float)
    out = test_set.contains(v)
    return bool(out[0]) if v.ndim == 1 else out


def translation_overlap(window, h):
    """Volume ``|W cap W_h|`` of a box and its translate by ``h``.

    Parameters
    ----------
    window : RectWindow
    h : array_like, shape (d,) or (m, d)

    Returns
    -------
    float or ndarray
    """
    h = np.asarray(h, dtype=float)
    ov = np.prod(np.maximum(0.0, window.sides - np.abs(h)), axis=-1)
    return float(ov) if h.ndim == 1 else ov


def erode_by_ball(window, r):
    """``W minus b(o, r)``: the box shrunk by ``r``; None when empty."""
    if r < 0:
        raise ValueError("erosion radius must be nonnegative")
    return window.shrink(r)


def sector_extents(sector):
    """Per-axis half extents of the truncated double cone ``S(u, eps, r)``.

    For axis ``e_j`` at axial angle ``beta_j`` to ``u`` the largest
    ``|v_j|`` over the sector is ``r cos(max(0, beta_j - eps))``.
    """
    if sector.radius is None:
        raise ValueError("sector erosion needs a finite radius")
    u = sector.direction.u
    beta = np.arccos(np.clip(np.abs(u), 0.0, 1.0))
    return sector.radius * np.cos(np.maximum(0.0, beta - sector.half_angle))


def erode_by_sector(window, sector):
    """``W minus S(u, eps, r)`` for a box: shrink by the sector extents.

    For an axis-aligned box this shrinkage is exactly the erosion by any
    set with the same per-axis extents. Returns None when empty.
    """
    return window.shrink(sector_extents(sector))


def border_distance(points, window):
    """Distance from each point to the window boundary."""
    x = np.atleast_2d(np.asarray(points, dtype=float))
    return np.minimum(x - window.lo, window.hi - x).min(axis=1)
