"""Distribution of the wasted spaces W = Max S - |S|.

P[W = L] is a sum over j of row-0 probabilities pi(j, 0; M) taken from the
models with M = L + j and M = L + j - 1 primary spaces.  Each M needs its
own stationary solve; the row pi(., 0; M) is cached across L.
"""
from __future__ import annotations

import math
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import ctmc, spectral
from .model import ModelParams, ParameterError, SolverConfig, SolverError, check_rho

ROW_METHODS = ("ctmc", "spectral")


def level_cap(rho: float, tol: float) -> int:
    """Blocking level for the per-M solves: rho**n_max < tol * (1 - rho)."""
    return max(2, math.ceil(math.log(tol * (1.0 - rho)) / math.log(rho)))


class RowCache:
    """Thread-safe memo of M -> (pi(0,0;M), ..., pi(M,0;M))."""

    def __init__(self, rho: float, n_max: int, method: str = "ctmc"):
        if method not in ROW_METHODS:
            raise ParameterError(f"method must be one of {ROW_METHODS}")
        self.rho = rho
        self.n_max = n_max
        self.method = method
        self._rows: dict[int, np.ndarray] = {}
        self._lock = threading.Lock()

    def __len__(self) -> int:
        return len(self._rows)

    def row(self, M: int) -> np.ndarray:
        with self._lock:
            got = self._rows.get(M)
        if got is not None:
            return got
        if M == 0:
            # no primary spaces: only the empty state has r = 0
            val = np.array([1.0 - self.rho])
        elif self.method == "spectral":
            cfg = SolverConfig(R=max(self.n_max, M + 2))
            val = spectral.solve_spectral(ModelParams(M, self.rho), cfg).values[:, 0].copy()
        else:
            val = ctmc.level_truncated_row0(M, self.rho, self.n_max)
        with self._lock:
            return self._rows.setdefault(M, val)

    def pi(self, j: int, M: int) -> float:
        return float(self.row(M)[j])


@dataclass(frozen=True)
class WastedSpaceDistribution:
    rho: float
    Lmax: int
    pmf: np.ndarray
    jmax: int
    n_max: int
    diagnostics: dict = field(default_factory=dict, compare=False)

    @property
    def mean(self) -> float:
        return w_mean(self)

    @property
    def total(self) -> float:
        return math.fsum(self.pmf.tolist())


def _jmax(rho: float, tol: float) -> int:
    # sum_{j > J} (1-rho) rho^j = rho^(J+1) bounds every discarded summand total
    return max(1, math.ceil(math.log(tol) / math.log(rho)))


def w_pmf(
    rho: float,
    Lmax: int,
    cfg: SolverConfig | None = None,
    *,
    threads: int = 1,
    cache: RowCache | None = None,
    method: str = "ctmc",
) -> WastedSpaceDistribution:
    rho = check_rho(rho)
    if int(Lmax) != Lmax or Lmax < 0:
        raise ParameterError(f"Lmax must be a non-negative integer, got {Lmax!r}")
    cfg = cfg or SolverConfig()
    tol = max(cfg.tol_rel, 1e-15)
    J = _jmax(rho, tol)
    if J > cfg.max_terms:
        raise SolverError(f"j-sum needs {J} terms > max_terms={cfg.max_terms}")
    n_max = level_cap(rho, tol)
    cache = cache or RowCache(rho, n_max, method)
    needed = range(0, Lmax + J + 1)
    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            list(pool.map(cache.row, needed))

    pmf = np.empty(Lmax + 1)
    pmf[0] = math.fsum(cache.pi(j, j) for j in range(J + 1))
    neg = 0.0
    for L in range(1, Lmax + 1):
        pmf[L] = math.fsum(cache.pi(j, L + j) - cache.pi(j, L + j - 1) for j in range(J + 1))
        neg = min(neg, pmf[L])
    if neg < -1e-9:
        raise SolverError(f"negative probability {neg:.3e} in the W pmf")
    # the partial sums telescope: sum_{L<=Lmax} p[L] = sum_j pi(j, 0; Lmax + j)
    telescoped = math.fsum(cache.pi(j, Lmax + j) for j in range(J + 1))
    diag = {
        "jsum_discarded_bound": rho ** (J + 1),
        "level_truncation_bound": rho**n_max,
        "tail_mass": max(0.0, 1.0 - math.fsum(pmf.tolist())),
        "telescoped_total": telescoped,
        "p0_complement": 1.0 - math.fsum(pmf[1:].tolist()),
        "models_solved": len(cache),
    }
    return WastedSpaceDistribution(rho, Lmax, pmf, J, n_max, diag)


def w_mean(dist: WastedSpaceDistribution) -> float:
    L = np.arange(dist.Lmax + 1)
    return math.fsum((L * dist.pmf).tolist())


def w_mean_tail_estimate(dist: WastedSpaceDistribution) -> float:
    """Lower bound (Lmax + 1) * P[W > Lmax] on the mean mass beyond Lmax."""
    return (dist.Lmax + 1) * dist.diagnostics["tail_mass"]


def coffman_mitrani_band(rho: float) -> tuple[float, float]:
    """Heavy-traffic bounds on E[W]; a diagnostic, not a finite-rho guarantee."""
    rho = check_rho(rho)
    eps = 1.0 - rho
    return 0.5 * math.sqrt(math.pi / eps), (math.pi**2 / 6.0 - 1.0) / eps


def coffman_mitrani_check(value: float, rho: float) -> dict:
    lo, hi = coffman_mitrani_band(rho)
    return {"lower": lo, "upper": hi, "value": value, "inside": lo <= value <= hi}
