from __future__ import annotations

import sys

import numpy as np
import pytest

from psalloc import ctmc
from psalloc.model import ModelParams, SolverConfig


@pytest.fixture(scope="session")
def ctmc_cache():
    """Memoised ctmc solves keyed by (m, rho, R)."""
    store = {}

    def get(m, rho, R=None):
        key = (m, rho, R)
        if key not in store:
            store[key] = ctmc.solve_stationary(ModelParams(m, rho), SolverConfig(R=R))
        return store[key]

    return get


def rel_err(a, b):
    a, b = np.asarray(a, float), np.asarray(b, float)
    return np.abs(a / b - 1.0)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for text in mod.summary_lines():
        terminalreporter.write_line(text)
