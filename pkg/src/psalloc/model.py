"""Model definition, shared result types and universal consistency checks.

The storage model has ``m`` primary spaces, infinitely many secondary ones and a
single processor-sharing server of rate 1, so the arrival rate equals the
traffic intensity ``rho``.  ``pi[k, r]`` is the stationary probability of ``k``
occupied primary and ``r`` occupied secondary spaces.
"""
from __future__ import annotations

import math
import numbers
from dataclasses import dataclass, field
from typing import Any

import numpy as np

METHODS = ("ctmc", "closed_form", "spectral", "asymptotic", "empirical")

#: values below this are flushed to zero and flagged
FLUSH_BELOW = 1e-300


class ModelError(Exception):
    """Base class for all errors raised by this package."""


class ParameterError(ModelError, ValueError):
    pass


class UnstableError(ParameterError):
    """rho outside (0, 1)."""


class MRangeError(ParameterError):
    """m < 1 or not an integer."""


class TruncationError(ModelError, IndexError):
    """Requested index lies outside the stored/truncated range."""


class SolverError(ModelError, ArithmeticError):
    """Numerical failure: singular system, non-convergence, negative mass."""


@dataclass(frozen=True)
class ModelParams:
    m: int
    rho: float

    @property
    def lam(self) -> float:
        return self.rho

    @property
    def eps(self) -> float:
        return 1.0 - self.rho


@dataclass(frozen=True)
class StateIndex:
    k: int
    r: int

    @property
    def N(self) -> int:
        return self.k + self.r


@dataclass(frozen=True)
class SolverConfig:
    """Knobs shared by the numerical solvers.

    ``R=None`` means: pick the default truncation for the model at hand
    (see :func:`default_truncation`).
    """

    R: int | None = None
    quad_points: int = 10
    tol_rel: float = 1e-12
    max_terms: int = 100_000

    def __post_init__(self):
        if self.quad_points < 8:
            raise ParameterError("quad_points must be >= 8")
        if not 0.0 < self.tol_rel < 1.0:
            raise ParameterError("tol_rel must lie in (0, 1)")
        if self.max_terms < 1:
            raise ParameterError("max_terms must be >= 1")

    def truncation(self, p: ModelParams) -> int:
        R = default_truncation(p) if self.R is None else int(self.R)
        if R < p.m + 2:
            raise TruncationError(f"R={R} too small: need R >= m+2 = {p.m + 2}")
        return R


def validate_params(p: ModelParams) -> ModelParams:
    m, rho = p.m, p.rho
    if isinstance(m, bool) or int(m) != m or m < 1:
        raise MRangeError(f"m out of range: m={m!r} (need integer >= 1)")
    if isinstance(rho, bool) or not isinstance(rho, numbers.Real) or math.isnan(rho):
        raise UnstableError(f"rho must be a real number, got {rho!r}")
    if rho <= 0.0:
        raise UnstableError(f"rho out of range: rho={rho} (need 0 < rho < 1)")
    if rho >= 1.0:
        raise UnstableError(f"unstable: rho={rho} >= 1 violates the stability condition")
    return p


def check_rho(rho: float) -> float:
    validate_params(ModelParams(1, rho))
    return float(rho)


def default_truncation(p: ModelParams) -> int:
    """Smallest R with rho**R < 1e-16 * (1 - rho), and at least m + 2."""
    R = math.ceil(math.log(1e-16 * (1.0 - p.rho)) / math.log(p.rho))
    return max(R, p.m + 2)


@dataclass(frozen=True, eq=False)
class JointDistribution:
    """Table ``values[k, r]`` for ``0 <= k <= m``, ``0 <= r <= R``.

    ``tol`` is the residual/tolerance the producing method achieved.  Entries
    that are undefined for the method (e.g. heavy-traffic at r = 0) are NaN.
    """

    params: ModelParams
    R: int
    values: np.ndarray
    method: str
    tol: float
    meta: dict[str, Any] = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.method not in METHODS:
            raise ParameterError(f"unknown method {self.method!r}")
        vals = np.array(self.values, dtype=float)
        if vals.shape != (self.params.m + 1, self.R + 1):
            raise ParameterError(
                f"values shape {vals.shape} != {(self.params.m + 1, self.R + 1)}"
            )
        tiny = np.abs(vals) < FLUSH_BELOW
        flushed = bool(np.any(tiny & (vals != 0.0)))
        vals[tiny] = 0.0
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)
        if flushed:
            self.meta["flushed"] = True

    def __eq__(self, other):
        if not isinstance(other, JointDistribution):
            return NotImplemented
        return (
            self.params == other.params
            and self.R == other.R
            and self.method == other.method
            and self.tol == other.tol
            and np.array_equal(self.values, other.values, equal_nan=True)
        )

    __hash__ = None

    @property
    def m(self) -> int:
        return self.params.m

    @property
    def rho(self) -> float:
        return self.params.rho

    def __getitem__(self, kr):
        k, r = kr
        if not (0 <= k <= self.m and 0 <= r <= self.R):
            raise TruncationError(f"state ({k}, {r}) outside stored table")
        return float(self.values[k, r])

    def diagonal_sum(self, N: int) -> float:
        """Sum of pi(k, N-k) over the stored part of anti-diagonal N."""
        k = np.arange(max(0, N - self.R), min(self.m, N) + 1)
        return float(self.values[k, N - k].sum())


def geometric_identity_residual(d: JointDistribution, N: int) -> float:
    """|sum_k pi(k, N-k) - (1-rho) rho^N| for a fully stored anti-diagonal."""
    if N < 0:
        raise TruncationError(f"N={N} must be >= 0")
    if N > d.R:
        raise TruncationError(f"anti-diagonal N={N} not fully stored (R={d.R})")
    return abs(d.diagonal_sum(N) - (1.0 - d.rho) * d.rho**N)


def normalization_residual(d: JointDistribution) -> float:
    """Stored mass minus the exact mass of the fully stored anti-diagonals.

    Only diagonals ``N = 0..R`` are counted (every ``k`` is present for
    those); the ragged corner ``k + r > R`` is left out.  Their exact total
    is ``1 - rho**(R+1)``.
    """
    if d.method == "asymptotic":
        raise ParameterError("normalization is undefined for asymptotic tables")
    k = np.arange(d.m + 1)[:, None]
    r = np.arange(d.R + 1)[None, :]
    stored = math.fsum(d.values[(k + r) <= d.R].tolist())
    return abs(stored - (1.0 - d.rho ** (d.R + 1)))


def structural_report(d: JointDistribution, n_max: int | None = None) -> dict[str, float]:
    """Max residuals of the checks every non-asymptotic table must pass."""
    n_max = d.R - d.m if n_max is None else n_max
    geo = max(geometric_identity_residual(d, N) for N in range(n_max + 1))
    return {
        "pi00": abs(d.values[0, 0] - (1.0 - d.rho)),
        "geometric": geo,
        "normalization": normalization_residual(d),
        "min_value": float(np.nanmin(d.values)),
    }
