from __future__ import annotations

import math

import numpy as np
import pytest

from psalloc import ctmc
from psalloc.model import (
    ModelParams,
    SolverConfig,
    SolverError,
    TruncationError,
    geometric_identity_residual,
    normalization_residual,
)


def test_row_for_state_0_1_matches_balance_equation():
    s = ctmc.assemble(ModelParams(1, 0.5), 3)
    row = (0, 1)
    # (1 + rho) pi(0,1) = pi(1,1) * (k+1)/(k+r+1) + pi(0,2) * (r+1)/(k+r+1)
    assert s.coefficient(row, (0, 1)) == pytest.approx(1.5)
    assert s.coefficient(row, (1, 1)) == pytest.approx(-1 / 2)
    assert s.coefficient(row, (0, 2)) == pytest.approx(-2 / 2)
    assert s.coefficient(row, (1, 0)) == 0.0


def test_generic_interior_and_boundary_rows():
    rho = 0.3
    s = ctmc.assemble(ModelParams(3, rho), 10)
    assert s.coefficient((1, 4), (1, 4)) == pytest.approx(1 + rho)
    assert s.coefficient((1, 4), (0, 4)) == pytest.approx(-rho)
    assert s.coefficient((1, 4), (2, 4)) == pytest.approx(-2 / 6)
    assert s.coefficient((1, 4), (1, 5)) == pytest.approx(-5 / 6)
    # k = m row receives the arrival from (m, r-1)
    assert s.coefficient((3, 4), (3, 3)) == pytest.approx(-rho)
    assert s.coefficient((3, 4), (3, 5)) == pytest.approx(-5 / 8)


def test_corner_rows():
    rho = 0.4
    s = ctmc.assemble(ModelParams(2, rho), 6)
    # rho pi(0,0) = pi(1,0) + pi(0,1)
    assert s.coefficient((0, 0), (0, 0)) == pytest.approx(rho)
    assert s.coefficient((0, 0), (1, 0)) == pytest.approx(-1.0)
    assert s.coefficient((0, 0), (0, 1)) == pytest.approx(-1.0)
    # (1+rho) pi(m,0) = rho pi(m-1,0) + pi(m,1)/(m+1)
    assert s.coefficient((2, 0), (2, 0)) == pytest.approx(1 + rho)
    assert s.coefficient((2, 0), (1, 0)) == pytest.approx(-rho)
    assert s.coefficient((2, 0), (2, 1)) == pytest.approx(-1 / 3)


def test_row_count_and_bandwidth():
    s = ctmc.assemble(ModelParams(2, 0.5), 10)
    assert s.n == 33
    A = s.to_sparse().tocoo()
    assert np.abs(A.row - A.col).max() <= 3


def test_assemble_rejects_small_R():
    with pytest.raises(TruncationError):
        ctmc.assemble(ModelParams(3, 0.5), 4)
    with pytest.raises(ValueError):
        ctmc.assemble(ModelParams(3, 0.5), 10, closure="magic")


def test_pi10_m1(ctmc_cache):
    d = ctmc_cache(1, 0.5)
    assert d[1, 0] == pytest.approx(0.5 * math.log(1.5), rel=1e-13)


def test_geometric_identity_at_N8(ctmc_cache):
    d = ctmc_cache(3, 0.5)
    assert geometric_identity_residual(d, 8) <= 1e-10
    assert d.diagonal_sum(8) == pytest.approx(1.953125e-3, rel=1e-12)


def test_normalization_m1(ctmc_cache):
    assert normalization_residual(ctmc_cache(1, 0.5, 60)) <= 1e-10


@pytest.mark.parametrize(
    "k,printed", [(0, 5.40e-5), (1, 6.96e-4), (2, 4.63e-3), (3, 2.10e-2)]
)
def test_table1_exact_column_eps01(ctmc_cache, k, printed):
    d = ctmc_cache(3, 0.9)
    assert abs(d[k, 10] / printed - 1) < 5e-3


def test_table2_spot_values(ctmc_cache):
    d = ctmc_cache(3, 0.5)
    assert abs(d[0, 5] / 2.29e-5 - 1) < 5e-3
    assert abs(d[3, 5] / 1.65e-3 - 1) < 5e-3


def test_postconditions(ctmc_cache):
    for m, rho in [(1, 0.3), (2, 0.8), (4, 0.5)]:
        d = ctmc_cache(m, rho)
        assert d.meta["max_balance_residual"] <= 1e-12
        assert d.meta["max_geometric_residual"] <= 1e-11
        assert d.values.min() >= 0.0
        assert d.method == "ctmc"


def test_closures_agree():
    p = ModelParams(2, 0.5)
    a = ctmc.solve_stationary(p, SolverConfig(R=60), closure="tail").values
    b = ctmc.solve_stationary(p, SolverConfig(R=60), closure="zero").values
    assert np.abs(a[:, :40] - b[:, :40]).max() < 1e-12


def test_invariance_under_doubling_R():
    p = ModelParams(3, 0.5)
    a = ctmc.solve_stationary(p, SolverConfig(R=60)).values
    b = ctmc.solve_stationary(p, SolverConfig(R=120)).values
    assert np.abs(a - b[:, :61]).max() <= 1e-10


def test_too_small_R_is_reported():
    # rho = 0.9 needs R ~ 370; R = 60 leaves mass ~ 1e-3 beyond the strip
    with pytest.raises(SolverError, match="increase R"):
        ctmc.solve_stationary(ModelParams(1, 0.9), SolverConfig(R=60))


def test_heavy_traffic_system_solves_fast():
    d = ctmc.solve_stationary(ModelParams(3, 0.99))
    assert d.R > 4000
    assert d[3, 100] == pytest.approx(3.452e-3, rel=1e-3)


def test_level_truncated_row_matches_strip(ctmc_cache):
    for m, rho in [(1, 0.5), (3, 0.5), (2, 0.8)]:
        d = ctmc_cache(m, rho)
        row = ctmc.level_truncated_row0(m, rho, d.R)
        assert np.abs(row - d.values[:, 0]).max() < 1e-15


def test_level_truncated_trivial_when_m_exceeds_level():
    row = ctmc.level_truncated_row0(50, 0.5, 40)
    assert row[:3] == pytest.approx([0.5, 0.25, 0.125])
    assert np.all(row[41:] == 0.0)
