from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from psalloc import closed_m1, closed_m2, ctmc, spectral as sp
from psalloc.model import ModelParams, ParameterError, SolverConfig, TruncationError, default_truncation


def kernel(m, rho, rmax=20):
    return sp.AKernel.build(ModelParams(m, rho), rmax)


def test_A_fixtures():
    assert sp.compute_A(ModelParams(2, 0.5), 2, 1, 0) == pytest.approx(6.0, rel=1e-15)
    assert sp.compute_A(ModelParams(1, 0.5), 1, 2, 0) == pytest.approx(4.5, rel=1e-15)
    assert sp.compute_A(ModelParams(2, 0.5), 1, 1, 2) == 0.0


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 5), st.floats(0.05, 0.95))
def test_A_identities(m, rho):
    K = kernel(m, rho)
    r = np.arange(K.rmax + 1)
    for l in range(m + 2):
        assert np.abs(K.table[l, :, l] - 1.0).max() <= 1e-12
    assert np.abs(K.table[1, :, 0] - (1 + rho) * (r + 1)).max() <= 1e-12 * (K.rmax + 1)
    for n in range(1, m + 1):
        assert sp.A_identity_residual(K, m, n) <= 1e-12 * max(1.0, K(m, 0, n))


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 4), st.floats(0.05, 0.95))
def test_A_shift_identity(m, rho):
    # A(k+1, r-1; l+1) = A(k, r; l) for r >= 1
    K = kernel(m, rho)
    for k in range(m + 1):
        for l in range(k + 1):
            for r in range(1, K.rmax + 1):
                assert K(k + 1, r - 1, l + 1) == pytest.approx(K(k, r, l), rel=1e-12)


def test_d0_fixtures():
    for rho in (0.3, 0.5, 0.8):
        assert sp.d0(ModelParams(1, rho), kernel(1, rho)) == pytest.approx(rho * (1 - rho) / (1 + rho), rel=1e-15)
        assert sp.d0(ModelParams(2, rho), kernel(2, rho)) == pytest.approx(
            rho**2 * (1 - rho) / (1 + rho + rho**2), rel=1e-15
        )
    assert sp.d0(ModelParams(2, 0.5), kernel(2, 0.5)) == pytest.approx(1 / 14, rel=1e-15)


def test_kernel_range_checked():
    K = kernel(2, 0.5, 5)
    assert K(1, 0, 2) == 0.0
    with pytest.raises(TruncationError):
        K(1, 6, 0)
    with pytest.raises(ParameterError):
        sp.compute_A(ModelParams(2, 0.5), -1, 0, 0)


def test_m1_d_equals_pi0():
    s = sp.solve_d(ModelParams(1, 0.5))
    for r in range(1, 25):
        assert s.values[r] == pytest.approx(closed_m1.pi0_series(0.5, r), rel=1e-8)


@pytest.mark.parametrize("rho", [0.3, 0.5, 0.8])
def test_m1_summation_constant_vanishes(rho):
    d = sp.solve_d(ModelParams(1, rho)).values
    for r in range(len(d) - 2):
        theta = rho * (1 + rho) * (r + 1) * d[r] - ((1 + 2 * rho) * (r + 1) + 1) * d[r + 1] + (r + 1) * d[r + 2]
        assert abs(theta) <= 1e-12 * d[r]


@pytest.mark.parametrize("rho", [0.3, 0.5, 0.8])
def test_m2_corner_fixture(rho):
    d = sp.solve_d(ModelParams(2, rho)).values
    rhs = rho**3 * (1 - rho) - 0.5 * (6 + 9 * rho + 6 * rho**2) * d[1] + 3 * (1 + rho) * d[2]
    assert d[3] == pytest.approx(rhs, rel=1e-12)


def test_d_tail_extension():
    s = sp.solve_d(ModelParams(2, 0.5))
    ext = s.extended(s.R + 5)
    assert ext.shape == (s.R + 6,)
    assert np.all(ext[s.R + 1:] < ext[s.R])
    assert s.extended(3).shape == (4,)


def test_residual_diagnostics_small():
    s = sp.solve_d(ModelParams(3, 0.5))
    assert s.residuals["difference_rel"] < 1e-12
    assert s.residuals["corner"] < 1e-14
    assert s.residuals["row0_m_consistency"] < 1e-14


@pytest.mark.parametrize("m", [1, 2, 3, 4])
@pytest.mark.parametrize("rho", [0.3, 0.5, 0.8])
def test_matches_ctmc(m, rho):
    # both solvers on a doubled strip, compared over the default one, so
    # neither truncation edge enters the comparison
    p = ModelParams(m, rho)
    R0 = default_truncation(p)
    cfg = SolverConfig(R=2 * R0)
    ref = ctmc.solve_stationary(p, cfg).values[:, : R0 + 1]
    got = sp.solve_spectral(p, cfg).values[:, : R0 + 1]
    mask = ref > 0
    assert np.abs(got[mask] / ref[mask] - 1).max() <= 1e-7


def test_m2_matches_closed_form():
    got = sp.solve_spectral(ModelParams(2, 0.5))
    for r in range(1, 26):
        assert got[0, r] == pytest.approx(closed_m2.pi0_m2(0.5, r), rel=1e-7)
        assert got[1, r] == pytest.approx(closed_m2.pi1_m2(0.5, r), rel=1e-7)


def test_reconstruction_properties():
    p = ModelParams(3, 0.5)
    K = sp.AKernel.build(p, 100)
    s = sp.solve_d(p, K)
    d = sp.reconstruct_pi(p, K, s)
    assert d.method == "spectral"
    assert d[0, 0] == pytest.approx(0.5, abs=1e-15)
    rho = 0.5
    dv = s.values
    for r in range(1, 30):
        assert d[1, r] == pytest.approx(dv[r] * (1 + rho) * (r + 1) - dv[r + 1] * (r + 1), rel=1e-12)
