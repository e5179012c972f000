"""Asymptotic approximations of pi(k, r).

* heavy traffic, rho = 1 - eps with r = Y/eps: one- and two-term outer expansion;
* fixed rho, r -> infinity: the tail law;
* heavy traffic with r = O(1): pi = eps * (Q0 + eps Q1 + ...), leading terms known
  in closed form for m = 1 and m = 2 (and Q1 for m = 1).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import closed_m1, closed_m2
from .model import JointDistribution, ModelParams, ParameterError, check_rho, validate_params

QUAD_TOL = 1e-13


@dataclass(frozen=True)
class HeavyTrafficPoint:
    m: int
    k: int
    epsilon: float
    r: int

    def __post_init__(self):
        if not 0.0 < self.epsilon < 1.0:
            raise ParameterError("epsilon must lie in (0, 1)")
        if self.m < 1 or not 0 <= self.k <= self.m:
            raise ParameterError("need m >= 1 and 0 <= k <= m")
        if self.r < 1:
            raise ParameterError("Y = 0: the outer expansion is invalid at r = 0")

    @property
    def Y(self) -> float:
        return self.epsilon * self.r


@dataclass(frozen=True)
class HeavyTrafficValue:
    value: float
    terms: int

    @property
    def negative(self) -> bool:
        return self.value < 0.0


def heavy_traffic_pi(m: int, k: int, epsilon: float, r: int, terms: int = 2) -> HeavyTrafficValue:
    """Outer expansion in Y = eps*r; the two-term value may be negative and is kept as is."""
    if terms not in (1, 2):
        raise ParameterError("terms must be 1 or 2")
    pt = HeavyTrafficPoint(m, k, epsilon, r)
    Y = pt.Y
    lead = epsilon ** (m - k + 1) * math.factorial(m) / math.factorial(k) * math.exp(-Y) * Y ** (k - m)
    if terms == 1:
        return HeavyTrafficValue(lead, 1)
    corr = Y / 2.0 + m + (m * m + (2 - k) * m - k) / Y
    return HeavyTrafficValue(lead * (1.0 - epsilon * corr), 2)


def tail_pi(m: int, k: int, rho: float, r: int) -> float:
    """(1-rho) rho^(m+r) r^(k-m) m!/k!, the r -> infinity law at fixed rho."""
    rho = check_rho(rho)
    if r < 1:
        raise ParameterError("tail law needs r >= 1")
    if m < 1 or not 0 <= k <= m:
        raise ParameterError("need m >= 1 and 0 <= k <= m")
    return (1.0 - rho) * rho ** (m + r) * float(r) ** (k - m) * math.factorial(m) / math.factorial(k)


def boundary_layer_Q0(m: int, k: int, r: int, tol: float = QUAD_TOL) -> float:
    """Leading boundary-layer term Q0(k, r) = lim pi(k, r)/eps for m in {1, 2}."""
    if m not in (1, 2):
        raise ParameterError(f"Q0 is only available for m = 1, 2 (got m={m})")
    if not 0 <= k <= m or r < 0:
        raise ParameterError("need 0 <= k <= m and r >= 0")
    if k == 0 and r == 0:
        return 1.0
    if m == 1:
        if k == 0:
            return closed_m1._power_integral(1.0, r, tol)
        return 1.0 - boundary_layer_Q0(1, 0, r + 1, tol)
    if k == 0:
        return closed_m2._pi0_core(1.0, r, tol)
    if k == 1:
        if r == 0:
            return 1.0 - boundary_layer_Q0(2, 0, 1, tol)
        return closed_m2._pi1_core(1.0, r, tol)
    return 1.0 - boundary_layer_Q0(2, 1, r + 1, tol) - boundary_layer_Q0(2, 0, r + 2, tol)


def boundary_layer_Q1_m1(k: int, r: int, tol: float = QUAD_TOL) -> float:
    """First correction Q1(k, r) for m = 1."""
    if k not in (0, 1) or r < 0:
        raise ParameterError("need k in {0, 1} and r >= 0")
    if k == 0:
        if r == 0:
            return 0.0
        # 2^(r-2) int (1-1/u)^r = Q0(0, r) / 2
        return -(r - 1) * closed_m1._power_integral(1.0, r, tol) / 2.0 - 0.5
    return -r - 1.0 - boundary_layer_Q1_m1(0, r + 1, tol)


def _table(params: ModelParams, R: int, fn, meta: dict) -> JointDistribution:
    validate_params(params)
    values = np.full((params.m + 1, R + 1), np.nan)
    for k in range(params.m + 1):
        for r in range(1, R + 1):
            values[k, r] = fn(k, r)
    return JointDistribution(params, R, values, "asymptotic", tol=0.0, meta=meta)


def heavy_traffic_table(params: ModelParams, R: int, terms: int = 2) -> JointDistribution:
    """Outer expansion on 1 <= r <= R; r = 0 is undefined (NaN)."""
    eps = params.eps
    return _table(
        params, R,
        lambda k, r: heavy_traffic_pi(params.m, k, eps, r, terms).value,
        {"approximation": "heavy_traffic", "terms": terms},
    )


def tail_table(params: ModelParams, R: int) -> JointDistribution:
    return _table(
        params, R,
        lambda k, r: tail_pi(params.m, k, params.rho, r),
        {"approximation": "tail"},
    )
