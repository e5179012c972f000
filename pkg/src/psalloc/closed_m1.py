"""Exact stationary distribution for one primary space (m = 1).

Several independent representations of pi(0, r) and pi(1, r) are provided so
they can be cross-checked against each other and against the CTMC solve.
Integrands are rescaled by their peak value so that large ``r`` neither
underflows nor loses the peak to a coarse partition.
"""
from __future__ import annotations

import math

import numpy as np

from .model import JointDistribution, ModelParams, ParameterError, SolverConfig, check_rho
from .quadrature import graded_breaks, integrate

#: beyond this r the integrands are too peaked; the series is used instead
SERIES_ONLY_R = 500

QUAD_TOL = 1e-14


def _levels(r: int) -> int:
    return max(2, int(math.log2(r + 1)) + 2)


def _geometric_series(coef, x: float, tol: float, max_terms: int) -> float:
    """Sum coef(n) * x**n for n >= 1, with 0 <= coef(n) <= 1.

    Stops once the remaining tail, bounded by x**(n+1)/(1-x), drops under
    ``tol`` times the partial sum.
    """
    terms = []
    xn = 1.0
    for n in range(1, max_terms + 1):
        xn *= x
        terms.append(coef(n) * xn)
        s = math.fsum(terms)
        if xn * x / (1.0 - x) < tol * s:
            return s
    raise ArithmeticError(f"series did not converge in {max_terms} terms")


def pi0_series(rho: float, r: int, tol: float = 1e-16, max_terms: int = 100_000) -> float:
    """pi(0, r) = (1-rho)/(1+rho) rho^r sum_{n>=1} n/(r+n) (rho/(1+rho))^n."""
    rho = check_rho(rho)
    if r == 0:
        return 1.0 - rho
    x = rho / (1.0 + rho)
    s = _geometric_series(lambda n: n / (r + n), x, tol, max_terms)
    return (1.0 - rho) / (1.0 + rho) * rho**r * s


def pi1_series(rho: float, r: int, tol: float = 1e-16, max_terms: int = 100_000) -> float:
    """pi(1, r) = (1-rho) rho^r sum_{L>=1} (r+1)/(r+L) (rho/(1+rho))^L."""
    rho = check_rho(rho)
    x = rho / (1.0 + rho)
    if r == 0:
        return (1.0 - rho) * math.log1p(rho)
    s = _geometric_series(lambda n: (r + 1) / (r + n), x, tol, max_terms)
    return (1.0 - rho) * rho**r * s


def pi0_integral(rho: float, r: int, tol: float = QUAD_TOL) -> float:
    """(1-rho)(1+rho)^(r-1) int_1^(1+rho) (1 - 1/u)^r du."""
    rho = check_rho(rho)
    if r == 0:
        return 1.0 - rho
    if r > SERIES_ONLY_R:
        return pi0_series(rho, r)
    return (1.0 - rho) * _power_integral(rho, r, tol)


def _power_integral(rho: float, r: int, tol: float) -> float:
    """(1+rho)^(r-1) int_1^(1+rho) (1 - 1/u)^r du; also valid at rho = 1."""
    b = 1.0 + rho
    # (1 - 1/u)^r peaks at u = 1+rho with value (rho/(1+rho))^r
    log_peak = r * math.log(rho / b)

    def f(u):
        return np.exp(r * np.log1p(-1.0 / u) - log_peak)

    val, _ = integrate(f, 1.0, b, tol=tol, breaks=graded_breaks(1.0, b, "b", _levels(r)))
    return rho**r / b * val


def pi0_integral_alt(rho: float, r: int, tol: float = QUAD_TOL) -> float:
    """(1-rho) rho^(r+1) int_0^1 u^r / (1 + rho - u rho)^2 du."""
    rho = check_rho(rho)
    if r == 0:
        return 1.0 - rho
    if r > SERIES_ONLY_R:
        return pi0_series(rho, r)

    def f(u):
        return np.exp(r * np.log(u)) / (1.0 + rho - u * rho) ** 2

    val, _ = integrate(f, 0.0, 1.0, tol=tol, breaks=graded_breaks(0.0, 1.0, "b", _levels(r)))
    return (1.0 - rho) * rho ** (r + 1) * val


def pi1_integral(rho: float, r: int, tol: float = QUAD_TOL) -> float:
    """(1-rho) rho^(r+1) (r+1) int_0^1 u^r / (1 + rho - u rho) du."""
    rho = check_rho(rho)
    if r > SERIES_ONLY_R:
        return pi1_series(rho, r)

    def f(u):
        return np.exp(r * np.log(u)) / (1.0 + rho - u * rho)

    val, _ = integrate(f, 0.0, 1.0, tol=tol, breaks=graded_breaks(0.0, 1.0, "b", _levels(r)))
    return (1.0 - rho) * rho ** (r + 1) * (r + 1) * val


def pi1_integral_log(rho: float, r: int, tol: float = QUAD_TOL) -> float:
    """(1-rho)(1+rho)^r (r+1) int_1^(1+rho) (1/u)(1 - 1/u)^r du."""
    rho = check_rho(rho)
    if r == 0:
        return (1.0 - rho) * math.log1p(rho)
    if r > SERIES_ONLY_R:
        return pi1_series(rho, r)
    b = 1.0 + rho
    log_peak = r * math.log(rho / b)

    def f(u):
        return np.exp(r * np.log1p(-1.0 / u) - log_peak) / u

    val, _ = integrate(f, 1.0, b, tol=tol, breaks=graded_breaks(1.0, b, "b", _levels(r)))
    return (1.0 - rho) * (r + 1) * rho**r * val


def pi1(rho: float, r: int, tol: float = QUAD_TOL) -> float:
    """pi(1, r) via the single-integral form; see also the alternatives above."""
    return pi1_integral(rho, r, tol)


def pi1_from_identity(rho: float, r: int) -> float:
    """pi(1, r) = (1-rho) rho^(r+1) - pi(0, r+1)."""
    rho = check_rho(rho)
    return (1.0 - rho) * rho ** (r + 1) - pi0_series(rho, r + 1)


def pi0_alternating(rho: float, r: int) -> float:
    """Alternating-series form, kept for r <= 10 only (heavy cancellation)."""
    rho = check_rho(rho)
    if r == 0:
        return 1.0 - rho
    if r > 10:
        raise ParameterError("alternating series is only reliable for r <= 10")
    terms = []
    # (L+r)!/L! built incrementally to avoid factorial overflow
    ratio = math.factorial(r)
    for L in range(0, 5000):
        if L > 0:
            ratio *= (L + r) / L
        t = (-rho) ** L * ratio * (1.0 / (L + r + 1) + rho / (L + r + 2))
        terms.append(t)
        if L > r and abs(t) < 1e-18 * abs(math.fsum(terms)):
            break
    s = math.fsum(terms)
    return (1.0 - rho) * (1.0 + rho) ** (r - 1) * rho ** (r + 1) / math.factorial(r) * s


def full_distribution_m1(rho: float, R: int, cfg: SolverConfig | None = None) -> JointDistribution:
    cfg = cfg or SolverConfig()
    rho = check_rho(rho)
    tol = min(cfg.tol_rel, 1e-12)
    values = np.empty((2, R + 1))
    values[0, 0] = 1.0 - rho
    for r in range(1, R + 1):
        values[0, r] = pi0_series(rho, r, tol=tol * 1e-3)
    for r in range(R + 1):
        values[1, r] = pi1_series(rho, r, tol=tol * 1e-3)
    return JointDistribution(ModelParams(1, rho), R, values, "closed_form", tol=tol)
