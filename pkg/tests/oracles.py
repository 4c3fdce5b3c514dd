"""Direct-formula oracles.

Plain loops over points and pairs using only the ``math`` module, written
from the estimator definitions rather than from the vectorized code.
Only suitable for small patterns.
"""

import cmath
import math

import numpy as np


def epan(t, h):
    t = t / h
    return 0.75 * (1 - t * t) / h if abs(t) <= 1 else 0.0


def epan_wrapped(t, h, period):
    return sum(epan(t + m * period, h) for m in range(-3, 4))


def epan_nd(z, h):
    d = len(z)
    s2 = sum(c * c for c in z) / (h * h)
    ball = math.pi if d == 2 else 4 * math.pi / 3
    return (d + 2) / (2 * ball) * (1 - s2) / h ** d if s2 <= 1 else 0.0


def norm(v):
    return math.sqrt(sum(c * c for c in v))


def sub(a, b):
    return [x - y for x, y in zip(a, b)]


def dot(a, b):
    return sum(x * y for x, y in zip(a, b))


def angle2(v):
    a = math.atan2(v[1], v[0])
    return a + 2 * math.pi if a < 0 else a


def axial_angle(v, u):
    c = abs(dot(v, u)) / (norm(v) * norm(u))
    return math.acos(min(1.0, c))


def box(p):
    return list(p.window.lo), list(p.window.hi)


def border(x, lo, hi):
    return min(min(xi - a, b - xi) for xi, a, b in zip(x, lo, hi))


def nn_table(p):
    pts = p.points.tolist()
    out = []
    for i, x in enumerate(pts):
        best, bj = math.inf, -1
        for j, y in enumerate(pts):
            if j != i:
                d = norm(sub(y, x))
                if d < best:
                    best, bj = d, j
        out.append((bj, best, sub(pts[bj], x)))
    return out


def orientation_density(p, h, grid):
    lo, hi = box(p)
    pts = p.points.tolist()
    ws, angs = [], []
    for i, (j, d, v) in enumerate(nn_table(p)):
        if d < border(pts[i], lo, hi):
            vol = 1.0
            for a, b in zip(lo, hi):
                vol *= max(0.0, (b - a) - 2 * d)
            ws.append(1.0 / vol)
            angs.append(angle2(v))
    tot = sum(ws)
    return [sum(w * epan_wrapped(g - a, h, 2 * math.pi) for w, a in zip(ws, angs)) / tot
            for g in grid]


def directional_distribution(p, r, grid):
    lo, hi = box(p)
    pts = p.points.tolist()
    used = []
    for i, (j, d, v) in enumerate(nn_table(p)):
        if d < r and border(pts[i], lo, hi) >= r:
            used.append(angle2(v))
    return [sum(1 for a in used if a <= g) / len(used) for g in grid]


def g_global(p, u, eps, grid):
    lo, hi = box(p)
    pts = p.points.tolist()
    ds = []
    for i, (j, d, v) in enumerate(nn_table(p)):
        if axial_angle(v, u) < eps and border(pts[i], lo, hi) >= d:
            ds.append(d)
    return [sum(1 for d in ds if d < r) / len(ds) for r in grid]


def _extent_2d(alpha, eps, r):
    """Half extents of the planar double cone by scanning the arc ends."""
    if eps >= math.pi / 2:
        return [r, r]
    out = []
    for f in (math.cos, math.sin):
        zero = 0.0 if f is math.cos else math.pi / 2
        # does the arc [alpha - eps, alpha + eps] contain zero + k*pi?
        k = math.ceil((alpha - eps - zero) / math.pi)
        if zero + k * math.pi <= alpha + eps:
            out.append(r)
        else:
            out.append(r * max(abs(f(alpha - eps)), abs(f(alpha + eps))))
    return out


def g_local(p, alpha, eps, grid):
    lo, hi = box(p)
    pts = p.points.tolist()
    u = [math.cos(alpha), math.sin(alpha)]
    ds, ws = [], []
    for i, x in enumerate(pts):
        best = math.inf
        for j, y in enumerate(pts):
            v = sub(y, x)
            if j != i and axial_angle(v, u) < eps:
                best = min(best, norm(v))
        if not math.isfinite(best):
            continue
        ext = _extent_2d(alpha, eps, best)
        inside = all(x[k] - lo[k] >= ext[k] and hi[k] - x[k] >= ext[k] for k in range(2))
        vol = (hi[0] - lo[0] - 2 * ext[0]) * (hi[1] - lo[1] - 2 * ext[1])
        ds.append(best)
        ws.append(1.0 / vol if inside and vol > 0 else 0.0)
    tot = sum(ws)
    return [sum(w for d, w in zip(ds, ws) if d < r) / tot for r in grid]


def pairs(p):
    """Ordered pairs ``(v, weight)`` with the stationary translation weight."""
    lo, hi = box(p)
    pts = p.points.tolist()
    n = len(pts)
    vol = 1.0
    for a, b in zip(lo, hi):
        vol *= b - a
    lam2 = n * (n - 1) / vol ** 2
    out = []
    for i in range(n):
        for j in range(n):
            if i != j:
                v = sub(pts[j], pts[i])
                ov = 1.0
                for k in range(len(v)):
                    ov *= (hi[k] - lo[k]) - abs(v[k])
                out.append((v, 1.0 / (ov * lam2)))
    return out


def k_sector(p, u, eps, grid):
    pr = pairs(p)
    return [sum(w for v, w in pr if norm(v) <= r and axial_angle(v, u) < eps) for r in grid]


def k_cylinder(p, u, hc, grid):
    pr = pairs(p)
    out = []
    for r in grid:
        s = 0.0
        for v, w in pr:
            t = dot(v, u)
            perp = norm([a - t * b for a, b in zip(v, u)])
            if perp <= hc and abs(t) <= r:
                s += w
        out.append(s)
    return out


def pcf_isotropic(p, h, grid):
    pr = pairs(p)
    surf = (lambda r: 2 * math.pi * r) if p.dim == 2 else (lambda r: 4 * math.pi * r * r)
    return [sum(w * epan(norm(v) - r, h) for v, w in pr) / surf(r) for r in grid]


def pcf_conical(p, u, eps, h, grid):
    pr = pairs(p)
    out = []
    for r in grid:
        s = 0.0
        for v, w in pr:
            ang = math.acos(max(-1.0, min(1.0, dot(v, u) / norm(v))))
            if ang < eps:
                s += w * epan(norm(v) - r, h)
        vol = 2 * r * eps if p.dim == 2 else 2 * math.pi * r * r * (1 - math.cos(eps))
        out.append(s / vol)
    return out


def pcf_cylindrical(p, u, hc, h, grid):
    pr = pairs(p)
    cross = 2 * hc if p.dim == 2 else math.pi * hc * hc
    out = []
    for r in grid:
        s = 0.0
        for v, w in pr:
            t = dot(v, u)
            if norm([a - t * b for a, b in zip(v, u)]) < hc:
                s += w * epan(abs(t) - r, h)
        out.append(s / (2 * cross))
    return out


def pcf_aniso_2d(p, angles, ranges, h, ha):
    pr = pairs(p)
    out = np.empty((len(angles), len(ranges)))
    for k, a in enumerate(angles):
        for m, r in enumerate(ranges):
            s = 0.0
            for v, w in pr:
                phi = angle2(v)
                ka = epan_wrapped(phi - a, ha, 2 * math.pi) + epan_wrapped(phi - a - math.pi, ha,
                                                                           2 * math.pi)
                s += w * epan(norm(v) - r, h) * ka
            out[k, m] = s / (2 * r)
    return out


def pcf_aniso_3d(p, angles, ranges, h, ha):
    pr = pairs(p)
    out = np.empty((len(angles), len(ranges)))
    for k, (aphi, ath) in enumerate(angles):
        for m, r in enumerate(ranges):
            s = 0.0
            for v, w in pr:
                phi = angle2(v[:2])
                th = math.acos(v[2] / norm(v))
                k1 = epan_wrapped(phi - aphi, ha, 2 * math.pi) * epan(th - ath, ha)
                k2 = epan_wrapped(phi - aphi - math.pi, ha, 2 * math.pi) * epan(
                    th - (math.pi - ath), ha)
                s += w * epan(norm(v) - r, h) * (k1 + k2)
            out[k, m] = s / (2 * r * r * math.sin(ath))
    return out


def pcf_guan(p, u, h, grid):
    pr = pairs(p)
    return [sum(w * epan_nd([a - r * b for a, b in zip(v, u)], h) for v, w in pr) for r in grid]


def orientation_density_2nd(p, r1, r2, h, grid):
    sel = [(angle2(v) % math.pi, w) for v, w in pairs(p) if r1 < norm(v) < r2]
    tot = sum(w for _, w in sel)
    return [sum(w * epan_wrapped(g - a, h, math.pi) for a, w in sel) / tot for g in grid]


def periodogram(p, P):
    lo, hi = box(p)
    l1, l2 = hi[0] - lo[0], hi[1] - lo[1]
    pts = [(x - lo[0], y - lo[1]) for x, y in p.points.tolist()]
    out = np.empty((P + 1, 2 * P))
    for i, p1 in enumerate(range(0, P + 1)):
        for j, p2 in enumerate(range(-P, P)):
            w1, w2 = 2 * math.pi * p1 / l1, 2 * math.pi * p2 / l2
            s = sum(cmath.exp(-1j * (w1 * x + w2 * y)) for x, y in pts)
            out[i, j] = abs(s) ** 2 / (l1 * l2)
    return out


# ---------------------------------------------------------------------------
# wavelets


def _clip(poly, a, b, c):
    """Clip a convex polygon to the half plane ``a x + b y <= c``."""
    out = []
    for k in range(len(poly)):
        p, q = poly[k], poly[(k + 1) % len(poly)]
        fp, fq = a * p[0] + b * p[1] - c, a * q[0] + b * q[1] - c
        if fp <= 0:
            out.append(p)
        if fp * fq < 0:
            t = fp / (fp - fq)
            out.append((p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])))
    return out


def _area(poly):
    s = 0.0
    for k in range(len(poly)):
        x1, y1 = poly[k]
        x2, y2 = poly[(k + 1) % len(poly)]
        s += x1 * y2 - x2 * y1
    return abs(s) / 2


def wedge_area(x, lo, hi, a, b):
    """Area of the window inside the wedge from ``x`` between angles
    ``a < b`` (``b - a < pi``), by polygon clipping."""
    big = 10 * (sum(h - l for l, h in zip(lo, hi)))
    poly = [tuple(x), (x[0] + big * math.cos(a), x[1] + big * math.sin(a)),
            (x[0] + big * math.cos(0.5 * (a + b)) / math.cos(0.5 * (b - a)),
             x[1] + big * math.sin(0.5 * (a + b)) / math.cos(0.5 * (b - a))),
            (x[0] + big * math.cos(b), x[1] + big * math.sin(b))]
    for (aa, bb, cc) in ((1, 0, hi[0]), (-1, 0, -lo[0]), (0, 1, hi[1]), (0, -1, -lo[1])):
        poly = _clip(poly, aa, bb, cc)
        if not poly:
            return 0.0
    return _area(poly)


def top_hat_cell(k, scale, period=180):
    """Integral of the French top hat ``psi(t / scale)`` over ``[k - 1/2,
    k + 1/2]`` and its periodic images, from interval overlaps."""
    def overlap(a, b, c, d):
        return max(0.0, min(b, d) - max(a, c))
    s = 0.0
    for m in range(-5, 6):
        a, b = k - 0.5 + m * period, k + 0.5 + m * period
        s += overlap(a, b, -scale, scale)
        s -= 0.5 * (overlap(a, b, -3 * scale, -scale) + overlap(a, b, scale, 3 * scale))
    return s


def rosenberg_variance(p, scales, margin):
    lo, hi = box(p)
    pts = p.points.tolist()
    weights = {b: [top_hat_cell(k if k < 90 else k - 180, b) for k in range(180)]
               for b in scales}
    acc = [0.0] * 180
    nf = 0
    for i, x in enumerate(pts):
        if border(x, lo, hi) <= margin:
            continue
        nf += 1
        cnt = [0] * 360
        for j, y in enumerate(pts):
            if j != i:
                deg = math.degrees(math.atan2(y[1] - x[1], y[0] - x[0]))
                cnt[int(math.floor(deg + 0.5)) % 360] += 1
        eta = []
        for t in range(180):
            area = sum(wedge_area(x, lo, hi, math.radians(c - 0.5), math.radians(c + 0.5))
                       for c in (t, t + 180))
            eta.append((cnt[t] + cnt[t + 180]) / area)
        for th in range(180):
            for b in scales:
                w = weights[b]
                val = sum(eta[t] * w[(t - th) % 180] for t in range(180)) / b
                acc[th] += val * val
    return [a / (nf * len(scales)) for a in acc]


def morlet(u1, u2, D, k0):
    env = math.exp(-0.5 * ((D * u1) ** 2 + u2 ** 2))
    return math.sqrt(D / math.pi) * cmath.exp(1j * (k0[0] * u1 + k0[1] * u2)) * env


def cwt_coef(p, a, theta, b, D, k0):
    c, s = math.cos(theta), math.sin(theta)
    tot = 0j
    for x, y in p.points.tolist():
        dx, dy = x - b[0], y - b[1]
        u1 = (c * dx + s * dy) / a
        u2 = (-s * dx + c * dy) / a
        tot += morlet(u1, u2, D, k0).conjugate()
    return tot / a
