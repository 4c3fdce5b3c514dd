"""Smoothing kernels on the line, the circle and in R^d.

Bandwidths are support half-widths for the compact kernels (the
Epanechnikov kernel with bandwidth ``h`` vanishes outside ``[-h, h]``)
and the standard deviation for the Gaussian.
"""

import numpy as np
from scipy.special import gamma as gamma_fn

__all__ = ["kernel1d", "wrapped_kernel", "kernel_nd", "KERNELS"]

KERNELS = ("epanechnikov", "box", "gaussian")


def kernel1d(t, h, kind="epanechnikov"):
    """Evaluate a unit-mass kernel ``k_h(t)``."""
    t = np.asarray(t, dtype=float) / h
    if kind == "epanechnikov":
        return np.where(np.abs(t) <= 1, 0.75 * (1 - t * t), 0.0) / h
    if kind == "box":
        return np.where(np.abs(t) <= 1, 0.5, 0.0) / h
    if kind == "gaussian":
        return np.exp(-0.5 * t * t) / (np.sqrt(2 * np.pi) * h)
    raise ValueError(f"unknown kernel {kind!r}; choose from {KERNELS}")


def wrapped_kernel(t, h, period=2 * np.pi, kind="epanechnikov"):
    """Kernel wrapped around a circle of the given period.

    Sums ``k_h(t + m * period)`` over every image that can contribute,
    so the result integrates to 1 over one period.
    """
    t = np.remainder(np.asarray(t, dtype=float) + period / 2, period) - period / 2
    reach = 8 * h if kind == "gaussian" else h
    m_max = int(np.ceil(reach / period)) + 1
    out = np.zeros_like(t)
    for m in range(-m_max, m_max + 1):
        out += kernel1d(t + m * period, h, kind)
    return out


def _ball_volume(d):
    return np.pi ** (d / 2) / gamma_fn(d / 2 + 1)


def kernel_nd(z, h, kind="epanechnikov"):
    """Radially symmetric unit-mass kernel in R^d evaluated at rows of ``z``."""
    z = np.atleast_2d(np.asarray(z, dtype=float))
    d = z.shape[1]
    s2 = np.sum(z * z, axis=1) / (h * h)
    if kind == "epanechnikov":
        c = (d + 2) / (2 * _ball_volume(d))
        return np.where(s2 <= 1, c * (1 - s2), 0.0) / h ** d
    if kind == "box":
        return np.where(s2 <= 1, 1.0 / _ball_volume(d), 0.0) / h ** d
    if kind == "gaussian":
        return np.exp(-0.5 * s2) / ((2 * np.pi) ** (d / 2) * h ** d)
    raise ValueError(f"unknown kernel {kind!r}; choose from {KERNELS}")
