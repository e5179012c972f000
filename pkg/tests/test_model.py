from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from psalloc.model import (
    FLUSH_BELOW,
    JointDistribution,
    ModelParams,
    MRangeError,
    ParameterError,
    SolverConfig,
    StateIndex,
    TruncationError,
    UnstableError,
    default_truncation,
    geometric_identity_residual,
    normalization_residual,
    structural_report,
    validate_params,
)


def test_validate_accepts_in_range():
    p = ModelParams(3, 0.5)
    assert validate_params(p) is p


def test_validate_rejects_unstable():
    with pytest.raises(UnstableError, match="unstable"):
        validate_params(ModelParams(3, 1.0))


def test_validate_rejects_bad_m():
    with pytest.raises(MRangeError, match="m out of range"):
        validate_params(ModelParams(0, 0.5))


def test_validate_rejects_nonpositive_rho():
    with pytest.raises(UnstableError, match="rho out of range"):
        validate_params(ModelParams(2, 0.0))
    with pytest.raises(UnstableError):
        validate_params(ModelParams(2, -0.1))


def test_errors_are_distinct_per_constraint():
    msgs = set()
    for p in (ModelParams(3, 1.0), ModelParams(0, 0.5), ModelParams(3, -1.0)):
        with pytest.raises(ParameterError) as info:
            validate_params(p)
        msgs.add(str(info.value).split(":")[0])
    assert len(msgs) == 3


def test_validate_rejects_nan_and_bool():
    with pytest.raises(ParameterError):
        validate_params(ModelParams(1, float("nan")))
    with pytest.raises(MRangeError):
        validate_params(ModelParams(True, 0.5))


def test_params_derived():
    p = ModelParams(2, 0.75)
    assert p.lam == 0.75 and p.eps == pytest.approx(0.25)
    assert StateIndex(2, 5).N == 7


def test_solver_config_invariants():
    with pytest.raises(ParameterError):
        SolverConfig(quad_points=4)
    with pytest.raises(ParameterError):
        SolverConfig(tol_rel=0.0)
    with pytest.raises(TruncationError):
        SolverConfig(R=3).truncation(ModelParams(2, 0.5))


@given(st.floats(0.01, 0.99), st.integers(1, 10))
def test_default_truncation_bounds_discarded_mass(rho, m):
    p = ModelParams(m, rho)
    R = default_truncation(p)
    assert rho**R < 1e-16 * (1 - rho) or R == m + 2
    assert R >= m + 2


def _geometric_table(m, rho, R):
    # a table satisfying every anti-diagonal identity: all mass of level N on k = min(N, m)
    v = np.zeros((m + 1, R + 1))
    for N in range(R + m + 1):
        k = min(N, m)
        r = N - k
        if r <= R:
            v[k, r] = (1 - rho) * rho**N
    return JointDistribution(ModelParams(m, rho), R, v, "ctmc", 1e-15)


def test_geometric_residual_zero_on_exact_table():
    d = _geometric_table(2, 0.5, 20)
    assert max(geometric_identity_residual(d, N) for N in range(21)) < 1e-17
    assert geometric_identity_residual(d, 0) == pytest.approx(abs(d[0, 0] - 0.5))


def test_geometric_residual_out_of_range():
    d = _geometric_table(2, 0.5, 20)
    with pytest.raises(TruncationError):
        geometric_identity_residual(d, 21)
    with pytest.raises(TruncationError):
        geometric_identity_residual(d, -1)


def test_normalization_residual_counts_full_diagonals():
    d = _geometric_table(2, 0.5, 20)
    assert normalization_residual(d) < 1e-16


def test_normalization_rejects_asymptotic():
    d = JointDistribution(ModelParams(1, 0.5), 3, np.ones((2, 4)), "asymptotic", 0.0)
    with pytest.raises(ParameterError):
        normalization_residual(d)


def test_distribution_is_immutable_and_flushes():
    v = np.full((2, 3), 0.1)
    v[1, 2] = 1e-310
    d = JointDistribution(ModelParams(1, 0.5), 2, v, "ctmc", 1e-12)
    assert d.values[1, 2] == 0.0 and d.meta["flushed"]
    assert FLUSH_BELOW == 1e-300
    with pytest.raises(ValueError):
        d.values[0, 0] = 1.0
    v[0, 0] = 7.0  # the table owns a copy
    assert d[0, 0] == 0.1


def test_distribution_shape_and_method_checked():
    with pytest.raises(ParameterError):
        JointDistribution(ModelParams(1, 0.5), 2, np.zeros((3, 3)), "ctmc", 0.0)
    with pytest.raises(ParameterError):
        JointDistribution(ModelParams(1, 0.5), 2, np.zeros((2, 3)), "magic", 0.0)


def test_getitem_out_of_range():
    d = _geometric_table(1, 0.5, 4)
    with pytest.raises(TruncationError):
        d[2, 0]
    with pytest.raises(TruncationError):
        d[0, 5]


def test_equality_ignores_meta_and_handles_nan():
    v = np.full((2, 3), np.nan)
    a = JointDistribution(ModelParams(1, 0.5), 2, v, "asymptotic", 0.0, {"x": 1})
    b = JointDistribution(ModelParams(1, 0.5), 2, v, "asymptotic", 0.0)
    assert a == b


def test_structural_report_keys():
    rep = structural_report(_geometric_table(2, 0.3, 30))
    assert set(rep) == {"pi00", "geometric", "normalization", "min_value"}
    assert rep["pi00"] == 0.0 and math.isclose(rep["min_value"], 0.0)
