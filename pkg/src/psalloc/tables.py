"""Reproduction of the two reference tables for m = 3.

Table 1 (heavy traffic, Y = eps*r = 1) is printed with values cut to three
significant figures; Table 2 (rho = 0.5, large r) is printed rounded.  The
printed digits are kept here so reproductions can be compared cell by cell.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from . import asymptotics, ctmc, spectral
from .model import ModelParams, SolverConfig

M = 3

#: eps -> (exact, one-term, two-term) for k = 0..3; None marks a printed "<0"
TABLE1_PRINTED = {
    0.1: ([5.40e-5, 6.96e-4, 4.63e-3, 2.10e-2], [2.20e-4, 2.20e-3, 1.10e-2, 3.67e-2], [None, None, None, 1.28e-2]),
    0.05: ([6.28e-6, 1.46e-4, 1.72e-3, 1.36e-2], [1.37e-5, 2.75e-4, 2.75e-3, 1.83e-2], [1.03e-6, 7.58e-5, 1.31e-3, 1.24e-2]),
    0.02: ([2.50e-7, 1.34e-5, 3.61e-4, 6.49e-3], [3.53e-7, 1.76e-5, 4.41e-4, 7.35e-3], [2.22e-7, 1.25e-5, 3.48e-4, 6.40e-3]),
    0.01: ([1.84e-8, 1.91e-6, 9.96e-5, 3.45e-3], [2.20e-8, 2.20e-6, 1.10e-4, 3.67e-3], [1.79e-8, 1.88e-6, 9.87e-5, 3.43e-3]),
}

TABLE2_RHO = 0.5

#: r -> (exact, asymptotic) for k = 0..3
TABLE2_PRINTED = {
    5: ([2.29e-5, 1.58e-4, 6.02e-4, 1.65e-3], [9.38e-5, 4.69e-4, 1.17e-3, 1.95e-3]),
    10: ([1.60e-7, 1.94e-6, 1.23e-5, 5.49e-5], [3.66e-7, 3.66e-6, 1.83e-5, 6.10e-5]),
    20: ([2.83e-11, 6.29e-10, 7.18e-9, 5.60e-8], [4.47e-11, 8.94e-10, 8.94e-9, 5.96e-8]),
    30: ([9.41e-15, 3.04e-13, 5.00e-12, 5.57e-11], [1.29e-14, 3.88e-13, 5.82e-12, 5.82e-11]),
    40: ([4.18e-18, 1.77e-16, 3.79e-15, 5.49e-14], [5.33e-18, 2.13e-16, 4.26e-15, 5.68e-14]),
    50: ([2.19e-21, 1.15e-19, 3.03e-18, 5.40e-17], [2.66e-21, 1.33e-19, 3.31e-18, 5.55e-17]),
}


def _digits(x: float, mode: str) -> tuple[int, int]:
    """(mantissa as a 3-digit integer, exponent) of |x| cut or rounded to 3 s.f."""
    e = math.floor(math.log10(abs(x)))
    scaled = abs(x) / 10.0 ** (e - 2)
    if mode == "truncate":
        mant = math.floor(scaled + 1e-9)
    else:
        mant = math.floor(scaled + 0.5)
    if mant >= 1000:
        mant, e = mant // 10, e + 1
    return mant, e


def sig3(x: float, mode: str = "round") -> float:
    mant, e = _digits(x, mode)
    return math.copysign(mant * 10.0 ** (e - 2), x)


def same_3sf(computed: float, printed: float | None, mode: str) -> bool:
    """Does ``computed`` print as ``printed`` (None meaning "<0")?"""
    if printed is None:
        return computed < 0.0
    if computed <= 0.0:
        return False
    return _digits(computed, mode) == _digits(printed, "round")


def fmt3(x: float, mode: str = "round") -> str:
    if x < 0.0:
        return "<0"
    mant, e = _digits(x, mode)
    return f"{mant / 100:.2f}e{e:+03d}"


@dataclass(frozen=True)
class Table1Row:
    eps: float
    k: int
    exact: float
    one_term: float
    two_term: float


@dataclass(frozen=True)
class Table2Row:
    r: int
    k: int
    exact: float
    spectral: float
    asymptotic: float


def table1(eps_values=tuple(TABLE1_PRINTED)) -> list[Table1Row]:
    rows = []
    for eps in eps_values:
        r = round(1.0 / eps)
        d = ctmc.solve_stationary(ModelParams(M, 1.0 - eps))
        for k in range(M + 1):
            rows.append(
                Table1Row(
                    eps, k, float(d.values[k, r]),
                    asymptotics.heavy_traffic_pi(M, k, eps, r, 1).value,
                    asymptotics.heavy_traffic_pi(M, k, eps, r, 2).value,
                )
            )
    return rows


def table2(r_values=tuple(TABLE2_PRINTED), cfg: SolverConfig | None = None) -> list[Table2Row]:
    p = ModelParams(M, TABLE2_RHO)
    d = ctmc.solve_stationary(p, cfg)
    s = spectral.solve_spectral(p, cfg)
    return [
        Table2Row(r, k, float(d.values[k, r]), float(s.values[k, r]), asymptotics.tail_pi(M, k, TABLE2_RHO, r))
        for r in r_values
        for k in range(M + 1)
    ]
