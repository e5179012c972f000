"""Truncated balance equations of the (N1, N2) chain and their direct solution.

Unknowns are ordered r-major, ``index(k, r) = r*(m+1) + k``, which gives a
banded matrix with ``m+1`` sub- and super-diagonals.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .model import (
    JointDistribution,
    ModelParams,
    SolverConfig,
    SolverError,
    TruncationError,
    geometric_identity_residual,
    validate_params,
)

CLOSURES = ("tail", "zero")


@dataclass(frozen=True)
class BalanceSystem:
    """Balance equations ``A pi = 0`` on ``0<=k<=m, 0<=r<=R``.

    ``ab`` is LAPACK banded storage: ``ab[bw + i - j, j] = A[i, j]`` with
    ``bw = m + 1``.  ``weights`` is the normalization row (ones on the fully
    stored anti-diagonals) and ``target`` its right-hand side.
    """

    params: ModelParams
    R: int
    closure: str
    ab: np.ndarray
    weights: np.ndarray
    target: float

    @property
    def bandwidth(self) -> int:
        return self.params.m + 1

    @property
    def n(self) -> int:
        return (self.params.m + 1) * (self.R + 1)

    def index(self, k: int, r: int) -> int:
        return r * (self.params.m + 1) + k

    def coefficient(self, row: tuple[int, int], col: tuple[int, int]) -> float:
        i, j = self.index(*row), self.index(*col)
        bw = self.bandwidth
        if abs(i - j) > bw:
            return 0.0
        return float(self.ab[bw + i - j, j])

    def to_sparse(self) -> sp.csr_matrix:
        bw = self.bandwidth
        offsets = np.arange(bw, -bw - 1, -1)
        # dia_matrix wants data[d, j] = A[j - offset, j]: same column layout as ab
        return sp.dia_matrix((self.ab, offsets), shape=(self.n, self.n)).tocsr()


def _tail_ratio(m: int, k: int, rho: float, R: int) -> float:
    # pi(k, R+1) / pi(k, R) from pi(k, r) ~ (1-rho) rho^(m+r) r^(k-m) m!/k!
    return rho * (R / (R + 1.0)) ** (m - k)


def assemble(params: ModelParams, R: int, closure: str = "tail") -> BalanceSystem:
    validate_params(params)
    m, rho = params.m, params.rho
    if R < m + 2:
        raise TruncationError(f"R={R} too small: need R >= m+2 = {m + 2}")
    if closure not in CLOSURES:
        raise ValueError(f"closure must be one of {CLOSURES}")
    bw = m + 1
    n = (m + 1) * (R + 1)
    ab = np.zeros((2 * bw + 1, n))

    def put(k, r, kk, rr, v):
        i, j = r * bw + k, rr * bw + kk
        ab[bw + i - j, j] += v

    for r in range(R + 1):
        for k in range(m + 1):
            put(k, r, k, r, (1.0 if k + r > 0 else 0.0) + rho)
            if k >= 1:
                put(k, r, k - 1, r, -rho)
            if k < m:
                put(k, r, k + 1, r, -(k + 1) / (k + r + 1))
            down = -(r + 1) / (k + r + 1)
            if r < R:
                put(k, r, k, r + 1, down)
            elif closure == "tail":
                put(k, r, k, r, down * _tail_ratio(m, k, rho, R))
            if k == m and r >= 1:
                put(k, r, m, r - 1, -rho)

    kk = np.tile(np.arange(m + 1), R + 1)
    rr = np.repeat(np.arange(R + 1), m + 1)
    weights = ((kk + rr) <= R).astype(float)
    return BalanceSystem(params, R, closure, ab, weights, 1.0 - rho ** (R + 1))


def balance_residuals(system: BalanceSystem, x: np.ndarray) -> np.ndarray:
    """Absolute residual of every balance row (including the one the solve drops)."""
    return np.abs(system.to_sparse() @ x)


def solve_system(system: BalanceSystem) -> np.ndarray:
    """Solve with the (0,0) balance row replaced by the normalization row.

    With row 0 replaced by ``w.x = target`` the matrix is a rank-one update
    of the banded matrix ``B`` whose row 0 is ``e_0``; Sherman-Morrison then
    reduces to: solve ``B z = e_0`` and rescale ``x = target * z / (w.z)``.
    """
    bw = system.bandwidth
    ab = system.ab.copy()
    # row 0 -> e_0: entries A[0, j] live at ab[bw - j, j]
    for j in range(0, min(bw, system.n - 1) + 1):
        ab[bw - j, j] = 0.0
    ab[bw, 0] = 1.0
    rhs = np.zeros(system.n)
    rhs[0] = 1.0
    try:
        z = scipy.linalg.solve_banded((bw, bw), ab, rhs, check_finite=False)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise SolverError(f"banded LU failed for {system.params}, R={system.R}: {exc}") from exc
    scale = float(system.weights @ z)
    if not np.all(np.isfinite(z)) or not math.isfinite(scale) or scale <= 0.0:
        raise SolverError(
            f"ill-conditioned balance system for {system.params}, R={system.R}: "
            f"normalization weight {scale!r}"
        )
    return system.target * z / scale


def solve_stationary(
    params: ModelParams, cfg: SolverConfig | None = None, closure: str = "tail"
) -> JointDistribution:
    cfg = cfg or SolverConfig()
    validate_params(params)
    R = cfg.truncation(params)
    system = assemble(params, R, closure)
    x = solve_system(system)
    res = balance_residuals(system, x)
    table = x.reshape(R + 1, params.m + 1).T
    if table.min() < -1e-14:
        raise SolverError(f"negative probability {table.min():.3e}: increase R")
    dist = JointDistribution(
        params,
        R,
        np.clip(table, 0.0, None),
        "ctmc",
        tol=max(float(res.max()), cfg.tol_rel),
        meta={"closure": closure, "max_balance_residual": float(res.max())},
    )
    if res.max() > cfg.tol_rel:
        raise SolverError(f"balance residual {res.max():.3e} exceeds tol {cfg.tol_rel:.1e}; increase R")
    geo = max(geometric_identity_residual(dist, N) for N in range(R - params.m + 1))
    dist.meta["max_geometric_residual"] = geo
    if geo > 10 * cfg.tol_rel:
        raise SolverError(f"geometric identity residual {geo:.3e} too large; increase R")
    return dist


def level_truncated_row0(m: int, rho: float, n_max: int) -> np.ndarray:
    """``pi(k, 0)`` for ``k = 0..m`` on the state space ``{k + r <= n_max}``.

    Used for families of models with large ``m`` where a rectangular strip
    would be wasteful.  Arrivals at level ``n_max`` are blocked; the
    resulting error is of order ``rho**n_max``.
    """
    validate_params(ModelParams(m, rho))
    if n_max < 1:
        raise TruncationError("n_max must be >= 1")
    if m >= n_max:
        # secondary spaces are never reached below the blocking level
        out = np.zeros(m + 1)
        k = np.arange(n_max + 1)
        out[: n_max + 1] = (1.0 - rho) * rho**k
        return out
    # states ordered by level N, then k; level N holds k = 0..min(m, N)
    width = np.minimum(np.arange(n_max + 1), m) + 1
    offset = np.concatenate([[0], np.cumsum(width)])
    N = np.repeat(np.arange(n_max + 1), width)
    k = np.arange(offset[-1]) - offset[N]
    r = N - k

    def idx(kk, NN):
        return offset[NN] + kk

    n = offset[-1]
    i = np.arange(n)
    # generator entries Q[i, j]; assembled directly as the transpose A = Q^T
    up = N < n_max
    to_k = up & (k < m)
    to_r = up & (k == m)
    down_k = k > 0
    down_r = r > 0
    Nsafe = np.maximum(N, 1)
    rows = np.concatenate([
        i,
        idx(k[to_k] + 1, N[to_k] + 1),
        idx(k[to_r], N[to_r] + 1),
        idx(k[down_k] - 1, N[down_k] - 1),
        idx(k[down_r], N[down_r] - 1),
    ])
    cols = np.concatenate([i, i[to_k], i[to_r], i[down_k], i[down_r]])
    vals = np.concatenate([
        -((N > 0).astype(float) + rho * up),
        np.full(to_k.sum(), rho),
        np.full(to_r.sum(), rho),
        k[down_k] / Nsafe[down_k],
        r[down_r] / Nsafe[down_r],
    ])
    # the balance row of state (0, 0) is replaced by pi(0,0) = 1; the
    # solution is rescaled to the geometric mass afterwards
    keep = rows != 0
    rows = np.append(rows[keep], 0)
    cols = np.append(cols[keep], 0)
    vals = np.append(vals[keep], 1.0)
    A = sp.csc_matrix((vals, (rows, cols)), shape=(n, n))
    b = np.zeros(n)
    b[0] = 1.0
    z = spla.spsolve(A, b)
    if not np.all(np.isfinite(z)):
        raise SolverError(f"level-truncated solve failed for m={m}, rho={rho}")
    z *= (1.0 - rho ** (n_max + 1)) / z.sum()
    return z[idx(np.arange(m + 1), np.arange(m + 1))]
