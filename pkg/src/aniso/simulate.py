"""
Point process simulators and geometric transforms.

All randomness flows through :func:`make_rng`, which derives an
independent counter-based stream for every ``(seed, task id)`` pair, so
replicate ``k`` of a Monte Carlo run is reproducible regardless of how
the replicates are scheduled.
"""

from dataclasses import dataclass, field, asdict

import numpy as np
from numba import njit
from scipy.optimize import minimize
from scipy.spatial import cKDTree

from .geometry import PointPattern, RectWindow

__all__ = [
    "make_rng",
    "Poisson",
    "Strauss",
    "MaternII",
    "Thomas",
    "LineStripes",
    "GeometricTransform",
    "simulate",
    "apply_transform",
    "inscribed_window",
    "clip_to_window",
    "simulate_transformed",
    "regular_archetype",
    "clustered_archetype",
    "model_from_dict",
]


def make_rng(seed, *task):
    """Counter-based generator for ``seed`` and an optional task id path.

    Parameters
    ----------
    seed : int
        Nonnegative master seed.
    *task : int
        Sub-stream identifiers, e.g. the replicate index.
    """
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(t) for t in task))
    return np.random.Generator(np.random.Philox(ss))


@dataclass(frozen=True)
class Poisson:
    """Homogeneous Poisson process with intensity ``lam``."""

    lam: float

    def __post_init__(self):
        if not self.lam > 0:
            raise ValueError("Poisson intensity must be positive")


@dataclass(frozen=True)
class Strauss:
    """Strauss process with density proportional to
    ``beta^n gamma^s(x)``, ``s`` the number of R-close pairs."""

    beta: float
    gamma: float
    R: float
    mcmc_steps: int = 100_000

    def __post_init__(self):
        if not self.beta > 0 or not self.R > 0:
            raise ValueError("Strauss beta and R must be positive")
        if not 0 <= self.gamma <= 1:
            raise ValueError("Strauss gamma must lie in [0, 1]")
        if self.mcmc_steps < 1:
            raise ValueError("mcmc_steps must be positive")


@dataclass(frozen=True)
class MaternII:
    """Matern type II hard-core process (proposal intensity, hard-core r)."""

    lam_prop: float
    r: float

    def __post_init__(self):
        if not self.lam_prop > 0 or not self.r > 0:
            raise ValueError("MaternII parameters must be positive")


@dataclass(frozen=True)
class Thomas:
    """Thomas cluster process: parent intensity ``kappa``, mean cluster
    size ``mu`` and Gaussian cluster covariance ``cov``."""

    kappa: float
    mu: float
    cov: tuple

    def __post_init__(self):
        if not self.kappa > 0 or not self.mu > 0:
            raise ValueError("Thomas kappa and mu must be positive")
        c = np.asarray(self.cov, dtype=float)
        if c.ndim != 2 or c.shape[0] != c.shape[1] or not np.allclose(c, c.T):
            raise ValueError("cluster covariance must be a symmetric matrix")
        if np.any(np.linalg.eigvalsh(c) <= 0):
            raise ValueError("cluster covariance must be positive definite")
        object.__setattr__(self, "cov", tuple(map(tuple, c.tolist())))


@dataclass(frozen=True)
class LineStripes:
    """Poisson background plus Gaussian stripes around straight lines.

    Each line is ``(anchor, angle)`` with the angle measured from the
    x-axis; the stripe intensity is ``amplitude * N(dist; 0, sigma^2)``
    with ``dist`` the perpendicular distance to the line, i.e.
    ``amplitude`` points per unit line length.
    """

    lam_bg: float
    lines: tuple
    amplitude: float
    sigma: float

    def __post_init__(self):
        if not self.lam_bg > 0 or not self.amplitude > 0 or not self.sigma > 0:
            raise ValueError("LineStripes rates and sigma must be positive")
        lines = tuple((tuple(float(c) for c in a), float(t)) for a, t in self.lines)
        object.__setattr__(self, "lines", lines)


_MODELS = {"poisson": Poisson, "strauss": Strauss, "maternii": MaternII,
           "thomas": Thomas, "linestripes": LineStripes}


def model_from_dict(name, params):
    """Build a model spec from its name and a parameter dict."""
    key = name.lower().replace("_", "").replace("-", "")
    if key not in _MODELS:
        raise ValueError(f"unknown model {name!r}; choose from {sorted(_MODELS)}")
    params = dict(params)
    if "lambda" in params:
        params["lam"] = params.pop("lambda")
    try:
        return _MODELS[key](**params)
    except TypeError as err:
        raise ValueError(f"bad parameters for {name}: {err}") from None


def model_to_dict(spec):
    d = asdict(spec)
    d["model"] = type(spec).__name__
    return d


def _rotation_matrix(angle, axis=None):
    if axis is None:
        c, s = np.cos(angle), np.sin(angle)
        return np.array([[c, -s], [s, c]])
    k = np.asarray(axis, dtype=float)
    k = k / np.linalg.norm(k)
    kx = np.array([[0, -k[2], k[1]], [k[2], 0, -k[0]], [-k[1], k[0], 0]])
    return np.eye(3) + np.sin(angle) * kx + (1 - np.cos(angle)) * kx @ kx


@dataclass(frozen=True, eq=False)
class GeometricTransform:
    """Linear map ``T = R C`` with rotation ``R`` and positive diagonal
    scaling ``C`` (no shear).

    Parameters
    ----------
    scaling : array_like
        Diagonal of ``C``.
    angle : float
        Anticlockwise rotation angle (use a negative angle for clockwise).
    axis : array_like, optional
        Rotation axis in 3D.
    """

    scaling: np.ndarray
    angle: float = 0.0
    axis: np.ndarray = None
    matrix: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        c = np.array(self.scaling, dtype=float).ravel()
        if c.size not in (2, 3) or np.any(c <= 0):
            raise ValueError("scaling must be 2 or 3 positive numbers")
        if c.size == 3 and self.angle != 0 and self.axis is None:
            raise ValueError("3D rotation needs an axis")
        rot = _rotation_matrix(self.angle, None if c.size == 2 else
                               (self.axis if self.axis is not None else [0, 0, 1]))
        object.__setattr__(self, "scaling", c)
        object.__setattr__(self, "matrix", rot @ np.diag(c))

    @property
    def det(self):
        return float(np.prod(self.scaling))

    @classmethod
    def compression(cls, factor, angle=0.0, dim=2, axis=None):
        """Volume-preserving compression by ``factor`` along the last axis.

        In 2D ``C = diag(1/c, c)``; in 3D ``C = diag(1/sqrt(c), 1/sqrt(c), c)``.
        """
        if dim == 2:
            sc = [1.0 / factor, factor]
        else:
            sc = [factor ** -0.5, factor ** -0.5, factor]
        return cls(sc, angle, axis)


def _box_corners(window):
    d = window.dim
    signs = np.array(np.meshgrid(*[[0, 1]] * d, indexing="ij")).reshape(d, -1).T
    return window.lo + signs * window.sides


def _image_bbox(window, matrix):
    c = _box_corners(window) @ np.asarray(matrix).T
    return RectWindow(c.min(axis=0), c.max(axis=0))


def apply_transform(p, t):
    """Map every point by ``T``; the window becomes the bounding box of
    ``T W`` (flagged in the metadata when ``T W`` is not a box)."""
    m = t.matrix if isinstance(t, GeometricTransform) else np.asarray(t, dtype=float)
    bbox = _image_bbox(p.window, m)
    exact = np.isclose(bbox.volume, abs(np.linalg.det(m)) * p.window.volume, rtol=1e-12)
    meta = dict(p.metadata)
    meta["transform"] = m.tolist()
    if not exact:
        meta["window-is-bounding-box"] = True
    pts = p.points @ m.T
    # images of boundary points may fall a rounding error outside
    pts = np.clip(pts, bbox.lo, bbox.hi)
    return PointPattern(pts, bbox, meta, check_duplicates=False)


def inscribed_window(window, matrix):
    """Largest axis-aligned box inside the parallelepiped ``T W``,
    centred at the image of the window centre."""
    m = np.asarray(matrix, dtype=float)
    a = np.abs(np.linalg.inv(m))
    b = window.sides / 2.0
    d = window.dim

    def neg(logs):
        return -np.sum(logs)

    cons = {"type": "ineq", "fun": lambda logs: b - a @ np.exp(logs),
            "jac": lambda logs: -a * np.exp(logs)[None, :]}
    start = np.log(np.full(d, 0.5 * np.min(b / a.sum(axis=1))))
    res = minimize(neg, start, jac=lambda logs: -np.ones(d), constraints=[cons],
                   method="SLSQP", options={"ftol": 1e-14, "maxiter": 500})
    s = np.exp(res.x)
    s *= min(1.0, np.min(b / (a @ s)))
    c = m @ window.center
    return RectWindow(c - s, c + s)


def clip_to_window(p, window):
    """Restrict a pattern to a smaller window."""
    keep = window.contains(p.points)
    meta = dict(p.metadata)
    meta.pop("window-is-bounding-box", None)
    return PointPattern(p.points[keep], window, meta, check_duplicates=False)


def _uniform(rng, n, window):
    return window.lo + rng.random((n, window.dim)) * window.sides


def _sim_poisson(spec, window, rng):
    n = rng.poisson(spec.lam * window.volume)
    return _uniform(rng, n, window), {}


@njit(cache=True, error_model="numpy")
def _strauss_kernel(x0, lo, sides, beta, gamma, r2, kind, loc, pick, acc, cap):
    d = lo.shape[0]
    vol = 1.0
    for j in range(d):
        vol *= sides[j]
    pts = np.empty((cap, d))
    n = x0.shape[0]
    for i in range(n):
        for j in range(d):
            pts[i, j] = x0[i, j]
    nacc = 0
    for s in range(kind.shape[0]):
        k = kind[s]
        if k < 1.0 / 3.0:
            # birth
            t = 0
            for i in range(n):
                dd = 0.0
                for j in range(d):
                    z = pts[i, j] - (lo[j] + loc[s, j] * sides[j])
                    dd += z * z
                if dd <= r2:
                    t += 1
            ratio = beta * vol * gamma ** t / (n + 1)
            if acc[s] < ratio and n < cap:
                for j in range(d):
                    pts[n, j] = lo[j] + loc[s, j] * sides[j]
                n += 1
                nacc += 1
        elif n == 0:
            continue
        else:
            i0 = min(int(pick[s] * n), n - 1)
            t_old = 0
            for i in range(n):
                if i == i0:
                    continue
                dd = 0.0
                for j in range(d):
                    z = pts[i, j] - pts[i0, j]
                    dd += z * z
                if dd <= r2:
                    t_old += 1
            if k < 2.0 / 3.0:
                # death
                ratio = n / (beta * vol * gamma ** t_old)
                if acc[s] < ratio:
                    for j in range(d):
                        pts[i0, j] = pts[n - 1, j]
                    n -= 1
                    nacc += 1
            else:
                # move
                t_new = 0
                for i in range(n):
                    if i == i0:
                        continue
                    dd = 0.0
                    for j in range(d):
                        z = pts[i, j] - (lo[j] + loc[s, j] * sides[j])
                        dd += z * z
                    if dd <= r2:
                        t_new += 1
                if t_new <= t_old:
                    ratio = 1.0
                elif gamma == 0.0:
                    ratio = 0.0
                else:
                    ratio = gamma ** (t_new - t_old)
                if acc[s] < ratio:
                    for j in range(d):
                        pts[i0, j] = lo[j] + loc[s, j] * sides[j]
                    nacc += 1
    return pts[:n].copy(), nacc


def _sim_strauss(spec, window, rng):
    steps = int(spec.mcmc_steps)
    kind = rng.random(steps)
    loc = rng.random((steps, window.dim))
    pick = rng.random(steps)
    acc = rng.random(steps)
    cap = steps + 1
    x, nacc = _strauss_kernel(np.empty((0, window.dim)), window.lo.copy(),
                              window.sides.copy(), float(spec.beta), float(spec.gamma),
                              float(spec.R) ** 2, kind, loc, pick, acc, cap)
    x = np.clip(x, window.lo, window.hi)
    meta = {"mcmc_steps": steps, "accepted": int(nacc)}
    # beta |W| bounds the expected count from above
    if steps < 10 * spec.beta * window.volume:
        meta["warning"] = "mcmc_steps below 10 times the expected point count"
    return x, meta


def _sim_matern(spec, window, rng):
    big = window.shrink(-spec.r)
    n = rng.poisson(spec.lam_prop * big.volume)
    x = _uniform(rng, n, big)
    marks = rng.random(n)
    keep = np.ones(n, dtype=bool)
    if n > 1:
        pairs = cKDTree(x).query_pairs(spec.r, output_type="ndarray")
        i, j = pairs[:, 0], pairs[:, 1]
        # the later-born point of each close pair is removed
        loser = np.where(marks[i] > marks[j], i, j)
        keep[loser] = False
    x = x[keep]
    return x[window.contains(x)], {}


def _sim_thomas(spec, window, rng):
    cov = np.asarray(spec.cov, dtype=float)
    if cov.shape[0] != window.dim:
        raise ValueError("cluster covariance dimension does not match the window")
    buf = 4.0 * np.sqrt(np.max(np.linalg.eigvalsh(cov)))
    big = window.shrink(-buf)
    npar = rng.poisson(spec.kappa * big.volume)
    parents = _uniform(rng, npar, big)
    sizes = rng.poisson(spec.mu, npar)
    chol = np.linalg.cholesky(cov)
    off = rng.standard_normal((int(sizes.sum()), window.dim)) @ chol.T
    x = np.repeat(parents, sizes, axis=0) + off
    return x[window.contains(x)], {"parent_buffer": float(buf)}


def _segment_in_box(anchor, u, lo, hi):
    """Parameter interval of the line ``anchor + t u`` inside a 2D box."""
    tmin, tmax = -np.inf, np.inf
    for j in range(2):
        if abs(u[j]) < 1e-15:
            if not lo[j] <= anchor[j] <= hi[j]:
                return None
            continue
        t1 = (lo[j] - anchor[j]) / u[j]
        t2 = (hi[j] - anchor[j]) / u[j]
        tmin = max(tmin, min(t1, t2))
        tmax = min(tmax, max(t1, t2))
    return (tmin, tmax) if tmax > tmin else None


def _sim_stripes(spec, window, rng):
    if window.dim != 2:
        raise ValueError("LineStripes is a planar model")
    x, _ = _sim_poisson(Poisson(spec.lam_bg), window, rng)
    parts = [x]
    # stripe points beyond 8 sigma from the line have negligible mass
    pad = 8.0 * spec.sigma
    for anchor, ang in spec.lines:
        u = np.array([np.cos(ang), np.sin(ang)])
        nrm = np.array([-u[1], u[0]])
        seg = _segment_in_box(np.asarray(anchor), u, window.lo - pad, window.hi + pad)
        if seg is None:
            continue
        length = seg[1] - seg[0]
        m = rng.poisson(spec.amplitude * length)
        t = seg[0] + rng.random(m) * length
        s = rng.normal(0.0, spec.sigma, m)
        y = np.asarray(anchor) + t[:, None] * u + s[:, None] * nrm
        parts.append(y[window.contains(y)])
    return np.concatenate(parts), {}


_SIMULATORS = {Poisson: _sim_poisson, Strauss: _sim_strauss, MaternII: _sim_matern,
               Thomas: _sim_thomas, LineStripes: _sim_stripes}


def simulate(spec, window, seed, task=()):
    """Simulate a model in a window.

    Parameters
    ----------
    spec : Poisson, Strauss, MaternII, Thomas or LineStripes
    window : RectWindow
    seed : int
    task : tuple of int
        Sub-stream identifiers, e.g. ``(replicate,)``.

    Returns
    -------
    PointPattern
        With metadata holding the model spec, seed and sampler diagnostics.
    """
    if type(spec) not in _SIMULATORS:
        raise ValueError(f"unsupported model spec {spec!r}")
    rng = make_rng(seed, *task)
    x, extra = _SIMULATORS[type(spec)](spec, window, rng)
    meta = {"model": model_to_dict(spec), "seed": int(seed), "task": list(task)}
    meta.update(extra)
    return PointPattern(x, window, meta, check_duplicates=False)


def simulate_transformed(spec, t, window, seed, task=(), margin=0.0):
    """Simulate ``T X_0`` observed in ``window``.

    ``X_0`` is simulated on the bounding box of ``T^{-1} W`` enlarged by
    ``margin`` (to keep sampler edge effects out of the window), mapped by
    ``T`` and clipped to ``window``.
    """
    m = t.matrix if isinstance(t, GeometricTransform) else np.asarray(t, dtype=float)
    pre = _image_bbox(window, np.linalg.inv(m)).shrink(-margin)
    base = simulate(spec, pre, seed, task)
    pts = base.points @ m.T
    keep = window.contains(pts)
    meta = dict(base.metadata)
    meta["transform"] = m.tolist()
    return PointPattern(pts[keep], window, meta, check_duplicates=False)


def regular_archetype(seed, task=(), window=None, compression=0.6, angle=-np.pi / 6,
                      beta=100.0, gamma=0.1, R=0.1, mcmc_steps=100_000):
    """Compressed and rotated Strauss pattern.

    ``C = diag(1/c, c)`` followed by a rotation by ``angle`` (clockwise
    by pi/6 by default), so the compression axis points at
    ``pi/2 + angle``.
    """
    window = window or RectWindow.square(-1.0, 1.0)
    t = GeometricTransform.compression(compression, angle)
    return simulate_transformed(Strauss(beta, gamma, R, mcmc_steps), t, window, seed,
                                task, margin=3 * R)


def clustered_archetype(seed, task=(), window=None, angle_to_y=np.pi / 5,
                        offsets=(-0.6, 0.0, 0.6), lam_bg=200.0, amplitude=100.0,
                        sigma=0.03):
    """Poisson background with three parallel Gaussian stripes.

    The stripes run at ``angle_to_y`` anticlockwise from the y-axis
    (direction ``pi/2 + angle_to_y`` from the x-axis) and pass through the
    window centre shifted by ``offsets`` along their normal.
    """
    window = window or RectWindow.square(-1.0, 1.0)
    ang = np.pi / 2 + angle_to_y
    nrm = np.array([-np.sin(ang), np.cos(ang)])
    lines = tuple((tuple(window.center + o * nrm), ang) for o in offsets)
    return simulate(LineStripes(lam_bg, lines, amplitude, sigma), window, seed, task)
