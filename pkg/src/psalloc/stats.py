"""Goodness-of-fit tests for simulation output against exact probabilities.

Successive states of a Markov chain are correlated, so Pearson's statistic on
raw counts is not chi-square distributed.  Each replication instead yields
one vector of time fractions; replications are independent, and the
replication means are tested with Hotelling's T^2 (a chi-square statistic
with estimated covariance, exact F law for normal batch means).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats


@dataclass(frozen=True)
class FitResult:
    statistic: float
    dof: tuple[int, int]
    pvalue: float
    cells: int

    def passed(self, level: float = 0.01) -> bool:
        return self.pvalue >= level


def hotelling_fit(samples: np.ndarray, expected: np.ndarray) -> FitResult:
    """Test H0: E[samples[i]] = expected, rows of ``samples`` i.i.d."""
    X = np.asarray(samples, dtype=float)
    mu = np.asarray(expected, dtype=float)
    B, p = X.shape
    if B <= p:
        raise ValueError(f"need more replications ({B}) than cells ({p})")
    diff = X.mean(axis=0) - mu
    S = np.cov(X, rowvar=False)
    t2 = B * float(diff @ np.linalg.solve(S, diff))
    F = (B - p) / (p * (B - 1.0)) * t2
    return FitResult(F, (p, B - p), float(stats.f.sf(F, p, B - p)), p)


def select_cells(expected: np.ndarray, floor: float) -> np.ndarray:
    """Flat indices of cells whose exact probability exceeds ``floor``."""
    return np.flatnonzero(np.asarray(expected).ravel() > floor)


def fit_table(reps: np.ndarray, exact: np.ndarray, floor: float = 1e-5) -> FitResult:
    """Hotelling fit of per-replication tables against an exact table.

    Both tables are aligned on their common leading block.
    """
    cols = min(reps.shape[-1], exact.shape[-1])
    ex = exact[..., :cols]
    X = reps[..., :cols].reshape(reps.shape[0], -1)
    idx = select_cells(ex, floor)
    return hotelling_fit(X[:, idx], ex.ravel()[idx])


def within_sigma(samples: np.ndarray, expected: float, k: float = 3.0) -> bool:
    """Replication mean within ``k`` standard errors of ``expected``."""
    x = np.asarray(samples, dtype=float)
    se = x.std(ddof=1) / np.sqrt(x.size)
    return abs(x.mean() - expected) <= k * se
