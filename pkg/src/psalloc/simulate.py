"""Seeded event simulation of the storage model.

Two simulators share one random-number layout: replication ``i`` draws from
PCG64 seeded with the key ``(seed ^ i, seed)`` in fixed blocks of ``BLOCK`` (exponential,
uniform) pairs, so the compiled and the pure-Python kernels see the same
stream and produce identical output.

Occupancy statistics are time-weighted: each holding time is credited to the
state it was spent in.  Set ``PSALLOC_PURE_PYTHON=1`` to force the fallback
kernels.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .model import ModelParams, ParameterError, check_rho, validate_params

if os.environ.get("PSALLOC_PURE_PYTHON"):
    from . import _simcore_py as _kernels
else:
    try:
        from . import _simcore as _kernels
    except ImportError:  # extension not built
        from . import _simcore_py as _kernels

KERNEL = "compiled" if _kernels.__name__.endswith("_simcore") else "python"

BLOCK = 65536


@dataclass(frozen=True)
class SimConfig:
    seed: int = 12345
    warmup_events: int = 10_000
    sample_events: int = 1_000_000
    replications: int = 10

    def __post_init__(self):
        if self.sample_events < 1:
            raise ParameterError("sample_events must be >= 1")
        if self.replications < 1:
            raise ParameterError("replications must be >= 1")
        if self.warmup_events < 0:
            raise ParameterError("warmup_events must be >= 0")
        if not 0 <= self.seed < 2**64:
            raise ParameterError("seed must be a 64-bit unsigned integer")


@dataclass
class SimulationSummary:
    mode: str
    rho: float
    m: int
    config: SimConfig
    kernel: str
    pi_reps: np.ndarray  # (reps, m+1, rcols) time fractions per replication
    w_reps: np.ndarray | None = None  # (reps, wcols) time fractions of W
    events: int = 0
    meta: dict = field(default_factory=dict)

    @property
    def pi_hat(self) -> np.ndarray:
        return self.pi_reps.mean(axis=0)

    @property
    def w_pmf(self) -> np.ndarray:
        if self.w_reps is None:
            raise ParameterError("W statistics exist only in detailed mode")
        return self.w_reps.mean(axis=0)

    @property
    def w_mean_reps(self) -> np.ndarray:
        L = np.arange(self.w_reps.shape[1])
        return self.w_reps @ L

    @property
    def w_mean(self) -> float:
        return float(self.w_mean_reps.mean())

    def half_width(self, values: np.ndarray, level: float = 0.99) -> np.ndarray:
        """t-based confidence half-width of the mean over replications."""
        B = values.shape[0]
        if B < 2:
            return np.full(values.shape[1:], np.inf)
        sd = values.std(axis=0, ddof=1)
        t = stats.t.ppf(0.5 + level / 2.0, B - 1)
        return np.maximum(t * sd / np.sqrt(B), np.finfo(float).tiny)

    def pi_half_width(self, level: float = 0.99) -> np.ndarray:
        return self.half_width(self.pi_reps, level)

    def w_mean_interval(self, level: float = 0.99) -> tuple[float, float]:
        h = float(self.half_width(self.w_mean_reps[:, None], level)[0])
        mu = self.w_mean
        return mu - h, mu + h

    def to_dict(self) -> dict:
        out = {
            "mode": self.mode,
            "rho": self.rho,
            "m": self.m,
            "seed": self.config.seed,
            "warmup_events": self.config.warmup_events,
            "sample_events": self.config.sample_events,
            "replications": self.config.replications,
            "events": self.events,
            "pi_hat": _trim(self.pi_hat).tolist(),
            "pi_half_width_99": _trim_like(self.pi_half_width(), self.pi_hat).tolist(),
        }
        if self.w_reps is not None:
            lo, hi = self.w_mean_interval()
            out["w_pmf"] = np.trim_zeros(self.w_pmf, "b").tolist()
            out["w_mean"] = self.w_mean
            out["w_mean_ci99"] = [lo, hi]
        return out


def _trim(a: np.ndarray) -> np.ndarray:
    cols = np.flatnonzero(a.any(axis=0))
    return a[:, : (cols[-1] + 1 if cols.size else 1)]


def _trim_like(a: np.ndarray, ref: np.ndarray) -> np.ndarray:
    return a[:, : _trim(ref).shape[1]]


def _stream(seed: int, rep: int):
    # seed ^ rep alone maps the replication set of one seed onto a permutation
    # of another's (1^i and 2^i cover the same values), so the seed is mixed in
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed ^ rep, seed])))
    while True:
        yield rng.standard_exponential(BLOCK), rng.random(BLOCK)


def _grow2(a: np.ndarray) -> np.ndarray:
    out = np.zeros((a.shape[0], 2 * a.shape[1]))
    out[:, : a.shape[1]] = a
    return out


def _grow1(a: np.ndarray, fill=0) -> np.ndarray:
    out = np.full(2 * a.shape[0], fill, dtype=a.dtype)
    out[: a.shape[0]] = a
    return out


def _run_aggregate(m: int, rho: float, cfg: SimConfig, rep: int) -> np.ndarray:
    state = np.zeros(2, dtype=np.int64)
    occ = np.zeros((m + 1, 64))
    total_events = cfg.warmup_events + cfg.sample_events
    done = 0
    for expo, unif in _stream(cfg.seed, rep):
        n = min(BLOCK, total_events - done)
        expo, unif = expo[:n], unif[:n]
        # split the block at the end of warmup
        cut = min(max(cfg.warmup_events - done, 0), n)
        for lo, hi, acc in ((0, cut, False), (cut, n, True)):
            i = lo
            while i < hi:
                i = _kernels.aggregate_run(m, rho, expo[:hi], unif[:hi], i, state, occ, acc)
                if i < hi:
                    occ = _grow2(occ)
        done += n
        if done >= total_events:
            break
    return occ / occ.sum()


class _DetailedState:
    def __init__(self, m: int):
        self.used = np.zeros(256, dtype=np.uint8)
        self.occ_list = np.zeros(256, dtype=np.int64)
        self.pos = np.zeros(256, dtype=np.int64)
        self.state = np.array([0, 0, 1, 0], dtype=np.int64)  # n, max_s, lo, nprim
        self.wocc = np.zeros(64)
        self.occ = np.zeros((m + 1, 64))

    def grow(self):
        n_c, max_s = int(self.state[0]), int(self.state[1])
        if max_s - n_c >= self.wocc.shape[0] - 1:
            self.wocc = _grow1(self.wocc)
        if n_c - int(self.state[3]) >= self.occ.shape[1] - 1:
            self.occ = _grow2(self.occ)
        if int(self.state[2]) + n_c + 2 >= self.used.shape[0] or max_s + 2 >= self.used.shape[0]:
            self.used = _grow1(self.used)
            self.occ_list = _grow1(self.occ_list)
            self.pos = _grow1(self.pos)


def _run_detailed(m: int, rho: float, cfg: SimConfig, rep: int) -> tuple[np.ndarray, np.ndarray]:
    st = _DetailedState(m)
    total_events = cfg.warmup_events + cfg.sample_events
    done = 0
    for expo, unif in _stream(cfg.seed, rep):
        n = min(BLOCK, total_events - done)
        expo, unif = expo[:n], unif[:n]
        cut = min(max(cfg.warmup_events - done, 0), n)
        for lo, hi, acc in ((0, cut, False), (cut, n, True)):
            i = lo
            while i < hi:
                i = _kernels.detailed_run(
                    m, rho, expo[:hi], unif[:hi], i,
                    st.used, st.occ_list, st.pos, st.state, st.wocc, st.occ, acc,
                )
                if i < hi:
                    st.grow()
        done += n
        if done >= total_events:
            break
    t = st.wocc.sum()
    return st.occ / t, st.wocc / t


def _pad_stack(arrs: list[np.ndarray]) -> np.ndarray:
    shape = tuple(max(a.shape[d] for a in arrs) for d in range(arrs[0].ndim))
    out = np.zeros((len(arrs),) + shape)
    for i, a in enumerate(arrs):
        out[(i,) + tuple(slice(0, s) for s in a.shape)] = a
    return out


def _map(fn, reps: int, threads: int):
    # results are merged in replication order, so threading never changes output
    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            return list(pool.map(fn, range(reps)))
    return [fn(i) for i in range(reps)]


def simulate_aggregate(params: ModelParams, cfg: SimConfig | None = None, threads: int = 1) -> SimulationSummary:
    """Time-weighted occupancy of the (N1, N2) chain, one table per replication."""
    validate_params(params)
    cfg = cfg or SimConfig()
    m, rho = params.m, params.rho
    tabs = _map(lambda i: _run_aggregate(m, rho, cfg, i), cfg.replications, threads)
    return SimulationSummary(
        "aggregate", rho, m, cfg, KERNEL, _pad_stack(tabs),
        events=cfg.replications * (cfg.warmup_events + cfg.sample_events),
    )


def simulate_detailed(rho: float, cfg: SimConfig | None = None, m: int = 1, threads: int = 1) -> SimulationSummary:
    """Occupied-set simulation; W pmf plus the (N1, N2) projection for ``m``."""
    rho = check_rho(rho)
    validate_params(ModelParams(m, rho))
    cfg = cfg or SimConfig()
    res = _map(lambda i: _run_detailed(m, rho, cfg, i), cfg.replications, threads)
    return SimulationSummary(
        "detailed", rho, m, cfg, KERNEL,
        _pad_stack([r[0] for r in res]),
        _pad_stack([r[1] for r in res]),
        events=cfg.replications * (cfg.warmup_events + cfg.sample_events),
    )
