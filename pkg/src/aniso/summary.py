"""Containers for estimator output."""

from dataclasses import dataclass, field

import numpy as np

__all__ = ["SummaryCurve"]


@dataclass(eq=False)
class SummaryCurve:
    """A function estimate sampled on a grid.

    Parameters
    ----------
    name : str
        Estimator name.
    grid : ndarray
        Strictly increasing abscissae (ranges or angles).
    values : ndarray
        Estimates, shape ``(len(grid),)`` or ``(len(grid), len(grid2))``.
        Missing values (zero denominators) are NaN.
    parameters : dict
        Every tuning input used, defaults included.
    counts : ndarray
        Number of contributing points or pairs per grid node.
    grid2 : ndarray, optional
        Second abscissa for two-argument estimates.
    extra : dict
        Auxiliary outputs (e.g. a cumulative curve).
    """

    name: str
    grid: np.ndarray
    values: np.ndarray
    parameters: dict = field(default_factory=dict)
    counts: np.ndarray = None
    grid2: np.ndarray = None
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        self.grid = np.asarray(self.grid, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        for g in (self.grid, self.grid2):
            if g is not None and g.size > 1 and np.any(np.diff(g) <= 0):
                raise ValueError("summary grid must be strictly increasing")
        if self.grid2 is not None:
            self.grid2 = np.asarray(self.grid2, dtype=float)
        if self.counts is None:
            self.counts = np.zeros(self.values.shape, dtype=int)
        self.counts = np.asarray(self.counts)

    @property
    def missing(self):
        return np.isnan(self.values)
