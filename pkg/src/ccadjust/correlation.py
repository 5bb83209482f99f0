"""Two-block data and its correlation structure.

A two-block dataset holds an X block (n x p) and a Y block (n x q) over
the same observations. Standardization uses the sample standard
deviation with the n - 1 denominator; the choice cancels inside
correlation matrices but fixes the scale of standardized scores.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import DataError
from .linalg import RANK_TOL, sym_eig

__all__ = ["TwoBlockData", "CorrelationStructure", "standardize", "correlations"]


@dataclass
class TwoBlockData:
    """Two numeric data blocks sharing row observations.

    supplementary holds columns excluded from fitting (kept as raw
    values, typically group labels for biplot points).
    """

    x: np.ndarray
    y: np.ndarray
    x_names: tuple
    y_names: tuple
    supplementary: dict = field(default_factory=dict)

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=float)
        self.y = np.asarray(self.y, dtype=float)
        self.x_names = tuple(str(n) for n in self.x_names)
        self.y_names = tuple(str(n) for n in self.y_names)
        if self.x.ndim != 2 or self.y.ndim != 2:
            raise ValueError("x and y must be 2-dimensional")
        if self.x.shape[0] != self.y.shape[0]:
            raise ValueError(
                "x and y must have equal row counts, got %d and %d"
                % (self.x.shape[0], self.y.shape[0])
            )
        if self.x.shape[0] < 2:
            raise DataError("need at least 2 observations")
        if len(self.x_names) != self.x.shape[1]:
            raise ValueError("x_names length does not match x columns")
        if len(self.y_names) != self.y.shape[1]:
            raise ValueError("y_names length does not match y columns")
        for block, names in ((self.x, self.x_names), (self.y, self.y_names)):
            if not np.all(np.isfinite(block)):
                j = int(np.argwhere(~np.isfinite(block))[0][1])
                raise DataError("column '%s' contains a non-finite value" % names[j])
            sd = block.std(axis=0, ddof=1)
            if np.any(sd <= 0):
                j = int(np.argmin(sd))
                raise DataError("column '%s' has zero variance" % names[j])

    @property
    def n(self):
        return self.x.shape[0]

    @property
    def p(self):
        return self.x.shape[1]

    @property
    def q(self):
        return self.y.shape[1]


@dataclass
class CorrelationStructure:
    """Within-set and between-set correlation matrices with ranks."""

    rxx: np.ndarray
    ryy: np.ndarray
    rxy: np.ndarray
    rank_xx: int
    rank_yy: int

    @property
    def p(self):
        return self.rxy.shape[0]

    @property
    def q(self):
        return self.rxy.shape[1]


def _standardize_block(block, names):
    block = np.asarray(block, dtype=float)
    centered = block - block.mean(axis=0)
    centered -= centered.mean(axis=0)
    sd = centered.std(axis=0, ddof=1)
    if np.any(sd <= 0):
        j = int(np.argmin(sd))
        raise DataError("column '%s' has zero variance" % names[j])
    return centered / sd


def standardize(data):
    """Standardized X and Y blocks (mean 0, unit sample sd per column)."""
    xs = _standardize_block(data.x, data.x_names)
    ys = _standardize_block(data.y, data.y_names)
    return xs, ys


def _rank(m, rank_tol):
    vals, _ = sym_eig(m)
    lam_max = float(vals[0]) if vals.size else 0.0
    return int(np.sum(vals > rank_tol * lam_max))


def correlations(data, rank_tol=RANK_TOL):
    """Correlation structure of a two-block dataset.

    Builds Rxx, Ryy and Rxy from the standardized blocks, forces exact
    symmetry and unit diagonals on the within-set matrices, and computes
    their effective ranks with the given relative eigenvalue tolerance.
    """
    xs, ys = standardize(data)
    n = data.n
    rxx = xs.T @ xs / (n - 1)
    ryy = ys.T @ ys / (n - 1)
    rxy = xs.T @ ys / (n - 1)
    rxx = (rxx + rxx.T) / 2.0
    ryy = (ryy + ryy.T) / 2.0
    np.fill_diagonal(rxx, 1.0)
    np.fill_diagonal(ryy, 1.0)
    return CorrelationStructure(
        rxx=rxx,
        ryy=ryy,
        rxy=rxy,
        rank_xx=_rank(rxx, rank_tol),
        rank_yy=_rank(ryy, rank_tol),
    )
