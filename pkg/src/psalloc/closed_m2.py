"""Exact stationary distribution for two primary spaces (m = 2).

The production path is a pair of double integrals over the unit square.  With
``w = (1-u)(1-t)`` the integrands carry ``[w/(1 + rho w)]^r`` and so concentrate
in a corner of width O(1/r) near ``u = t = 0``; they are evaluated in log form
after dividing out their value at that corner.  The substitution ``1 - t = v^2``
removes the non-integer power ``(1-t)^(r - a*)`` at ``t = 1``.

The alternating series representations are kept as cross-checks for small r.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import JointDistribution, ModelParams, ParameterError, SolverConfig, check_rho
from .quadrature import graded_breaks, integrate2d

QUAD_TOL = 1e-13
SERIES_MAX_R = 8


@dataclass(frozen=True)
class M2Constants:
    rho: float

    @property
    def a_star(self) -> float:
        return self.rho / (1.0 + self.rho) ** 2

    @property
    def c(self) -> float:
        # coefficient of t(1-u) in the exponential factor
        return self.rho**2 / (1.0 + self.rho) ** 2


def _levels(r: int) -> int:
    return max(2, int(math.log2(r + 1)) + 3)


def _log_common(u, v, rho: float, r: int, power: int):
    """log of the shared integrand factors after t = 1 - v^2, scaled by (1+rho)^power."""
    k = M2Constants(rho)
    w = (1.0 - u) * v * v
    return (
        k.c * (1.0 - v * v) * (1.0 - u)
        + 2.0 * np.log(u)
        + (r - 1) * np.log1p(-u)
        + (2.0 * (r - k.a_star) + 1.0) * np.log(v)
        + math.log(2.0)
        - power * np.log((1.0 + rho * w) / (1.0 + rho))
    ), w


def _square(f, r: int, tol: float) -> float:
    lv = _levels(r)
    ub = graded_breaks(0.0, 1.0, "a", lv)
    vb = graded_breaks(0.0, 1.0, "b", lv)
    val, _ = integrate2d(f, ub, vb, tol=tol)
    return val


def _pi0_core(rho: float, r: int, tol: float) -> float:
    """pi(0, r) / (1 - rho) for r >= 1; finite at rho = 1."""

    def f(u, v):
        lg, _ = _log_common(u, v, rho, r, r + 2)
        return np.exp(lg)

    I = _square(f, r, tol)
    return rho ** (r + 2) * r * (r + 1) / (1.0 + rho) ** 4 * I


def _pi1_core(rho: float, r: int, tol: float) -> float:
    """pi(1, r) / (1 - rho) for r >= 1; finite at rho = 1."""

    def f(u, v):
        lg, w = _log_common(u, v, rho, r, r + 3)
        # r - 2 rho w can change sign only when r = 1
        return np.exp(lg) * (r - 2.0 * rho * w)

    I = _square(f, r, tol)
    return rho ** (r + 2) * (r + 1) ** 2 / (1.0 + rho) ** 4 * I


def pi0_m2(rho: float, r: int, tol: float = QUAD_TOL) -> float:
    """pi(0, r) for m = 2 from its double-integral representation."""
    rho = check_rho(rho)
    if r < 0:
        raise ParameterError("r must be >= 0")
    if r == 0:
        return 1.0 - rho
    return (1.0 - rho) * _pi0_core(rho, r, tol)


def pi1_m2(rho: float, r: int, tol: float = QUAD_TOL) -> float:
    """pi(1, r) for m = 2; r = 0 goes through the corner balance at (0, 0)."""
    rho = check_rho(rho)
    if r < 0:
        raise ParameterError("r must be >= 0")
    if r == 0:
        return rho * (1.0 - rho) - pi0_m2(rho, 1, tol)
    return (1.0 - rho) * _pi1_core(rho, r, tol)


def pi2_m2(rho: float, r: int, tol: float = QUAD_TOL) -> float:
    """pi(2, r) from the anti-diagonal identity at N = r + 2."""
    rho = check_rho(rho)
    return (1.0 - rho) * rho ** (r + 2) - pi1_m2(rho, r + 1, tol) - pi0_m2(rho, r + 2, tol)


def _gamma_tail(x2: float, a: float, start: int) -> float:
    """sum_{l >= start} x2^l / (l(l-1)(l-2)) * Gamma(start-1-a)/Gamma(l-a)."""
    terms = []
    g = 1.0 / (start - 1 - a)
    l = start
    while True:
        t = x2**l / (l * (l - 1) * (l - 2)) * g
        terms.append(t)
        if t < 1e-20 * terms[0]:
            break
        g /= l - a
        l += 1
    return math.fsum(terms)


def _check_series_r(r: int) -> None:
    if r < 1:
        raise ParameterError("series forms need r >= 1")
    if r > SERIES_MAX_R:
        raise ParameterError(
            f"series form refused for r={r} > {SERIES_MAX_R}: "
            "the (-1/a*)^L growth cancels catastrophically"
        )


def pi0_m2_series(rho: float, r: int, max_terms: int = 2000) -> float:
    """Alternating double-series form of pi(0, r), m = 2; cross-check only."""
    rho = check_rho(rho)
    _check_series_r(r)
    a = M2Constants(rho).a_star
    x2 = (rho / (1.0 + rho)) ** 2
    terms = []
    for L in range(max_terms):
        lf = math.lgamma(L + r + 2) - math.lgamma(L + 1) - math.lgamma(r) - L * math.log(a)
        t = (-1) ** L * math.exp(lf) * _gamma_tail(x2, a, L + r + 2)
        terms.append(t)
        if L > 20 and abs(t) < 1e-18 * abs(math.fsum(terms)):
            break
    else:
        raise ArithmeticError("pi0 series did not converge")
    return 2.0 * (1.0 - rho) * (1.0 + rho) ** (3 * r + 2) / rho ** (r + 2) * math.fsum(terms)


def pi1_m2_series(rho: float, r: int, max_terms: int = 3000) -> float:
    """Alternating double-series form of pi(1, r), m = 2; cross-check only."""
    rho = check_rho(rho)
    _check_series_r(r)
    a = M2Constants(rho).a_star
    x2 = (rho / (1.0 + rho)) ** 2
    terms = []
    for n in range(r - 1, r - 1 + max_terms):
        lf = (
            math.log(n + 1)
            + math.lgamma(n + 3)
            - math.lgamma(n - r + 2)
            - n * math.log(a)
        )
        t = (-1) ** (n - r + 1) * math.exp(lf) * _gamma_tail(x2, a, n + 3)
        terms.append(t)
        if n > r + 20 and abs(t) < 1e-18 * abs(math.fsum(terms)):
            break
    else:
        raise ArithmeticError("pi1 series did not converge")
    s = math.fsum(terms)
    return 2.0 * (r + 1) / math.factorial(r) * (1.0 - rho) * (1.0 + rho) ** (r + 5) / rho**3 * s


def full_distribution_m2(rho: float, R: int, cfg: SolverConfig | None = None) -> JointDistribution:
    cfg = cfg or SolverConfig()
    rho = check_rho(rho)
    tol = max(min(cfg.tol_rel, 1e-12), 1e-14)
    p0 = [pi0_m2(rho, r, tol) for r in range(R + 3)]
    p1 = [pi1_m2(rho, r, tol) for r in range(R + 2)]
    p2 = [(1.0 - rho) * rho ** (r + 2) - p1[r + 1] - p0[r + 2] for r in range(R + 1)]
    values = np.array([p0[: R + 1], p1[: R + 1], p2])
    return JointDistribution(ModelParams(2, rho), R, values, "closed_form", tol=tol)
