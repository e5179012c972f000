"""Compare the compiled and pure-Python simulation kernels.

    python3 benchmarks/bench_simcore.py [events]

Both kernels are fed the same pre-drawn arrays; the script checks that their
outputs are identical and prints events per second for each.
"""
from __future__ import annotations

import sys
import time

import numpy as np

from psalloc import _simcore_py

try:
    from psalloc import _simcore
except ImportError:
    _simcore = None


def _aggregate(mod, expo, unif):
    state = np.zeros(2, dtype=np.int64)
    occ = np.zeros((4, 4096))
    t = time.perf_counter()
    mod.aggregate_run(3, 0.5, expo, unif, 0, state, occ, True)
    return time.perf_counter() - t, occ


def _detailed(mod, expo, unif):
    used = np.zeros(4096, dtype=np.uint8)
    occ_list = np.zeros(4096, dtype=np.int64)
    pos = np.zeros(4096, dtype=np.int64)
    state = np.array([0, 0, 1, 0], dtype=np.int64)
    wocc = np.zeros(4096)
    occ = np.zeros((4, 4096))
    t = time.perf_counter()
    mod.detailed_run(3, 0.5, expo, unif, 0, used, occ_list, pos, state, wocc, occ, True)
    return time.perf_counter() - t, wocc


def main(events: int = 500_000) -> None:
    rng = np.random.Generator(np.random.PCG64(2024))
    expo, unif = rng.standard_exponential(events), rng.random(events)
    mods = [("python", _simcore_py)] + ([("compiled", _simcore)] if _simcore else [])
    for name, run in (("aggregate", _aggregate), ("detailed", _detailed)):
        outs = {}
        for label, mod in mods:
            dt, out = run(mod, expo, unif)
            outs[label] = out
            print(f"{name:9s} {label:8s} {events / dt:14,.0f} events/s")
        if len(outs) == 2:
            same = np.array_equal(outs["python"], outs["compiled"])
            print(f"{name:9s} identical output: {same}")
    if _simcore is None:
        print("compiled kernels not built; only the fallback was timed")


if __name__ == "__main__":
    main(int(sys.argv[1]) if len(sys.argv) > 1 else 500_000)
