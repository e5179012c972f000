"""Semi-numerical solution for general m via separable solutions.

pi(k, r) is expanded as ``sum_l (-1)^l d(r+l) C(l+r, r) A(k, r; l)`` where
``A(k, r; l)`` is the z^(k-l) Taylor coefficient of
``(1-z)^(-s-1) (1-rho z)^(rho s - 1)`` with ``s = (l+r)/(1-rho)``.  The
expansion holds for r > 0 and on the row k = m; the remaining row r = 0 is
recovered by summing balance equations along it.

The unknowns d(1..R) come from one banded linear system.  Its rows are the
probability-flux balances across the cuts between secondary levels,

    rho pi(m, r-1) = sum_k r/(k+r) pi(k, r),     r = 1..R,

with d(0) fixed and the tail closed by d(j) = d(R) rho^(j-R) (R/j)^m.  The
order-(m+2) difference system satisfied by d(r) is the first difference of
these rows; it is evaluated as a diagnostic only, because solving it directly
lets a non-decaying homogeneous mode absorb rounding error.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .model import (
    JointDistribution,
    ModelParams,
    ParameterError,
    SolverConfig,
    SolverError,
    TruncationError,
    validate_params,
)

DIFFERENCE_FAIL = 1e-6


def _a_coeffs(rho: float, n: int, s) -> np.ndarray:
    """z^n coefficient of (1-z)^(-s-1) (1-rho z)^(rho s - 1); ``s`` may be an array."""
    s = np.asarray(s, dtype=float)
    c = [np.ones_like(s)]
    e = [np.ones_like(s)]
    for j in range(1, n + 1):
        c.append(c[-1] * (s + j) / j)
        e.append(e[-1] * (rho * s - j) / j * (-rho))
    return sum(c[j] * e[n - j] for j in range(n + 1))


def compute_A(params: ModelParams, k: int, r: int, l: int) -> float:
    """A(k, r; l); zero when l > k (the contour integrand is then analytic)."""
    validate_params(params)
    if min(k, r, l) < 0:
        raise ParameterError("k, r, l must be non-negative")
    if l > k:
        return 0.0
    rho = params.rho
    return float(_a_coeffs(rho, k - l, (l + r) / (1.0 - rho)))


def _binom_r(r: np.ndarray, l: int) -> np.ndarray:
    # C(l+r, r) as a product of l ratios
    out = np.ones_like(r, dtype=float)
    for i in range(1, l + 1):
        out = out * (r + i) / i
    return out


@dataclass(frozen=True)
class AKernel:
    """Cache ``table[k, r, l]`` of A(k, r; l) for k <= m+1, r <= rmax."""

    params: ModelParams
    rmax: int
    table: np.ndarray = field(repr=False)

    @classmethod
    def build(cls, params: ModelParams, rmax: int) -> "AKernel":
        validate_params(params)
        m, rho = params.m, params.rho
        r = np.arange(rmax + 1, dtype=float)
        table = np.zeros((m + 2, rmax + 1, m + 2))
        for k in range(m + 2):
            for l in range(k + 1):
                table[k, :, l] = _a_coeffs(rho, k - l, (l + r) / (1.0 - rho))
        table.flags.writeable = False
        return cls(params, rmax, table)

    def __call__(self, k: int, r: int, l: int) -> float:
        if l > k:
            return 0.0
        if not (0 <= k <= self.params.m + 1 and 0 <= r <= self.rmax):
            raise TruncationError(f"A({k},{r};{l}) outside the cached range")
        return float(self.table[k, r, l])

    def pi_coeffs(self, k: int, r) -> np.ndarray:
        """Weights w[.., l] with pi(k, r) = sum_l w[.., l] d(r + l)."""
        r = np.atleast_1d(np.asarray(r))
        w = np.zeros((r.size, k + 1))
        for l in range(k + 1):
            w[:, l] = (-1) ** l * _binom_r(r, l) * self.table[k, r, l]
        return w


@dataclass(frozen=True)
class DSequence:
    params: ModelParams
    R: int
    values: np.ndarray
    residuals: dict = field(default_factory=dict, compare=False)

    def extended(self, upto: int) -> np.ndarray:
        """d(0..upto), using the tail closure beyond R."""
        if upto <= self.R:
            return self.values[: upto + 1]
        m, rho, R = self.params.m, self.params.rho, self.R
        j = np.arange(R + 1, upto + 1)
        tail = self.values[R] * rho ** (j - R) * (R / j) ** m
        return np.concatenate([self.values, tail])


def d0(params: ModelParams, kernel: AKernel) -> float:
    m, rho = params.m, params.rho
    return (1.0 - rho) * rho**m / kernel(m, 0, 0)


def A_identity_residual(kernel: AKernel, m: int, n: int) -> float:
    """|A(m,0;n) - sum_{l=n}^m n (1 - rho^(m-l+1)) / (l (1-rho)) A(l,0;n)|."""
    if not 1 <= n <= m:
        raise ParameterError("need 1 <= n <= m")
    rho = kernel.params.rho
    rhs = sum(n * (1.0 - rho ** (m - l + 1)) / (l * (1.0 - rho)) * kernel(l, 0, n) for l in range(n, m + 1))
    return abs(kernel(m, 0, n) - rhs)


def _pi_from_d(kernel: AKernel, k: int, r: np.ndarray, d: np.ndarray) -> np.ndarray:
    w = kernel.pi_coeffs(k, r)
    idx = r[:, None] + np.arange(k + 1)[None, :]
    return (w * d[idx]).sum(axis=1)


def solve_d(params: ModelParams, kernel: AKernel | None = None, cfg: SolverConfig | None = None) -> DSequence:
    """Solve the banded flux system for d(1..R)."""
    cfg = cfg or SolverConfig()
    validate_params(params)
    m, rho = params.m, params.rho
    R = cfg.truncation(params) + m
    if kernel is None:
        kernel = AKernel.build(params, R + m + 1)
    if kernel.rmax < R:
        raise TruncationError(f"kernel covers r <= {kernel.rmax}, need {R}")
    dz = d0(params, kernel)

    # column j-1 holds d(j); unknowns are scaled by cs[j] ~ size of d(j)
    js = np.arange(1, R + 1)
    cs = rho**js * (js + 1.0) ** (-m)
    lower, upper = 1, m
    ab = np.zeros((lower + upper + 1, R))
    b = np.zeros(R)

    def put(i: int, j: int, v: float):
        if j == 0:
            b[i] -= v * dz
            return
        if j > R:
            v = v * rho ** (j - R) * (R / j) ** m
            j = R
        ab[upper + i - (j - 1), j - 1] += v * cs[j - 1]

    rr = np.arange(1, R + 1)
    wm = kernel.pi_coeffs(m, rr - 1)
    wk = [kernel.pi_coeffs(k, rr) for k in range(m + 1)]
    for i, r in enumerate(rr):
        for l in range(m + 1):
            put(i, r - 1 + l, rho * wm[i, l])
        for k in range(m + 1):
            for l in range(k + 1):
                put(i, r + l, -r / (k + r) * wk[k][i, l])
    # row equilibration
    scale = np.zeros(R)
    for i in range(R):
        lo, hi = max(0, i - lower), min(R, i + upper + 1)
        cols = np.arange(lo, hi)
        scale[i] = np.abs(ab[upper + i - cols, cols]).max()
    if np.any(scale == 0.0):
        raise SolverError("flux system has an empty row")
    for i in range(R):
        lo, hi = max(0, i - lower), min(R, i + upper + 1)
        cols = np.arange(lo, hi)
        ab[upper + i - cols, cols] /= scale[i]
    b = b / scale
    try:
        e = scipy.linalg.solve_banded((lower, upper), ab, b, check_finite=False)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise SolverError(f"flux system singular for {params}, R={R}: {exc}") from exc
    if not np.all(np.isfinite(e)):
        raise SolverError(f"flux system ill-conditioned for {params}, R={R}")
    d = np.concatenate([[dz], e * cs])
    seq = DSequence(params, R, d)
    if d[1:].min() < -cfg.tol_rel * abs(dz):
        raise SolverError(f"negative d(r) = {d[1:].min():.3e}: increase R")
    seq.residuals.update(_diagnostics(kernel, seq))
    # the difference rows lose ~log10(1/(1-rho)) digits to cancellation, so
    # only a gross violation is treated as failure
    if seq.residuals["difference_rel"] > DIFFERENCE_FAIL:
        raise SolverError(
            f"difference-row residual {seq.residuals['difference_rel']:.3e} exceeds {DIFFERENCE_FAIL:.0e}"
        )
    return seq


def _diagnostics(kernel: AKernel, seq: DSequence) -> dict:
    """Relative residuals of the order-(m+2) difference rows and the corner row."""
    m, rho, R = seq.params.m, seq.params.rho, seq.R
    d = seq.extended(R + m + 2)
    rr = np.arange(1, R - m)
    # (m+1)/(m+r+1) pi(m+1, r) = rho pi(m, r-1), with pi(m+1, .) from the expansion
    w1 = kernel.pi_coeffs(m + 1, rr) * ((m + 1.0) / (m + rr + 1.0))[:, None]
    w2 = kernel.pi_coeffs(m, rr - 1) * rho
    t1 = w1 * d[rr[:, None] + np.arange(m + 2)[None, :]]
    t2 = w2 * d[rr[:, None] - 1 + np.arange(m + 1)[None, :]]
    res = np.abs(t1.sum(1) - t2.sum(1))
    mag = np.abs(t1).sum(1) + np.abs(t2).sum(1)
    diff_rel = float((res / mag).max()) if rr.size else 0.0

    pm0 = float(_pi_from_d(kernel, m, np.array([0]), d)[0])
    pm1 = float(_pi_from_d(kernel, m, np.array([1]), d)[0])
    row0 = _row0(kernel, d)
    corner = abs((1.0 + rho) * pm0 - rho * row0[m - 1] - pm1 / (m + 1))
    return {"difference_rel": diff_rel, "corner": corner, "row0_m_consistency": abs(row0[m] - pm0)}


def _row0(kernel: AKernel, d: np.ndarray) -> np.ndarray:
    m, rho = kernel.params.m, kernel.params.rho
    p1 = [float(_pi_from_d(kernel, l, np.array([1]), d)[0]) for l in range(m + 1)]
    out = np.empty(m + 1)
    for k in range(m + 1):
        s = sum(p1[l] / (l + 1) * (1.0 - rho ** (k - l)) / (1.0 - rho) for l in range(k))
        out[k] = (1.0 - rho) * rho**k - s
    return out


def reconstruct_pi(params: ModelParams, kernel: AKernel, dseq: DSequence) -> JointDistribution:
    m = params.m
    R = dseq.R - m
    d = dseq.values
    values = np.empty((m + 1, R + 1))
    r = np.arange(1, R + 1)
    for k in range(m + 1):
        values[k, 1:] = _pi_from_d(kernel, k, r, d)
    values[:, 0] = _row0(kernel, d)
    if values.min() < -1e-12:
        raise SolverError(f"negative probability {values.min():.3e} in reconstruction")
    tol = max(dseq.residuals.get("corner", 0.0), 1e-14)
    return JointDistribution(
        params, R, np.clip(values, 0.0, None), "spectral", tol=tol, meta=dict(dseq.residuals)
    )


def solve_spectral(params: ModelParams, cfg: SolverConfig | None = None) -> JointDistribution:
    """Kernel, d-sequence and table in one call; the table has R = cfg R (default truncation)."""
    cfg = cfg or SolverConfig()
    validate_params(params)
    R = cfg.truncation(params) + params.m
    kernel = AKernel.build(params, R + params.m + 2)
    return reconstruct_pi(params, kernel, solve_d(params, kernel, cfg))
