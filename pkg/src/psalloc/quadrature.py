"""Adaptive composite Gauss-Legendre quadrature on finite intervals and rectangles.

Panels are bisected until the n-point estimate of each panel agrees with the
sum over its two halves.  Integrands must be vectorised: they receive numpy
arrays of nodes and return arrays of the same shape.
"""
from __future__ import annotations

from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from .model import SolverError

Func1D = Callable[[np.ndarray], np.ndarray]
Func2D = Callable[[np.ndarray, np.ndarray], np.ndarray]


@lru_cache(maxsize=None)
def _rule(n: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(n)
    # nodes on [0, 1]
    return (x + 1.0) / 2.0, w / 2.0


def graded_breaks(a: float, b: float, toward: str | None, levels: int) -> list[float]:
    """Breakpoints on [a, b], halving geometrically toward one or both ends."""
    if toward is None or levels <= 0:
        return [a, b]
    h = b - a
    pts = {a, b}
    if toward in ("a", "both"):
        pts.update(a + h * 0.5**j for j in range(1, levels + 1))
    if toward in ("b", "both"):
        pts.update(b - h * 0.5**j for j in range(1, levels + 1))
    return sorted(pts)


def _panel_sums(f: Func1D, lo: np.ndarray, hi: np.ndarray, n: int) -> np.ndarray:
    x, w = _rule(n)
    width = hi - lo
    nodes = lo[:, None] + width[:, None] * x[None, :]
    vals = f(nodes)
    return (vals * w[None, :]).sum(axis=1) * width


def integrate(
    f: Func1D,
    a: float,
    b: float,
    *,
    tol: float = 1e-13,
    n: int = 10,
    breaks: Sequence[float] | None = None,
    max_panels: int = 20000,
) -> tuple[float, float]:
    """Integrate ``f`` over [a, b]; returns (value, error estimate).

    ``breaks`` seeds the panel partition (e.g. from :func:`graded_breaks`).
    """
    edges = np.asarray(breaks if breaks is not None else [a, b], dtype=float)
    lo, hi = edges[:-1], edges[1:]
    coarse = _panel_sums(f, lo, hi, n)
    done_val, done_err = [], []
    while True:
        mid = 0.5 * (lo + hi)
        left = _panel_sums(f, lo, mid, n)
        right = _panel_sums(f, mid, hi, n)
        fine = left + right
        err = np.abs(fine - coarse)
        total = abs(fine.sum() + sum(done_val))
        budget = tol * total / max(len(lo) + len(done_val), 1)
        ok = err <= budget
        done_val.extend(fine[ok].tolist())
        done_err.extend(err[ok].tolist())
        if ok.all():
            break
        bad = ~ok
        if len(done_val) + 2 * bad.sum() > max_panels:
            raise SolverError(
                f"quadrature did not converge within {max_panels} panels "
                f"(err {err[bad].sum():.3e}, value {total:.3e})"
            )
        lo = np.concatenate([lo[bad], mid[bad]])
        hi = np.concatenate([mid[bad], hi[bad]])
        coarse = np.concatenate([left[bad], right[bad]])
    order = np.argsort(np.abs(done_val))
    value = float(np.sum(np.asarray(done_val)[order]))
    return value, float(np.sum(done_err))


def _rect_sums(f: Func2D, x0, x1, y0, y1, n: int) -> np.ndarray:
    x, w = _rule(n)
    wx, wy = x1 - x0, y1 - y0
    X = x0[:, None, None] + wx[:, None, None] * x[None, :, None]
    Y = y0[:, None, None] + wy[:, None, None] * x[None, None, :]
    X, Y = np.broadcast_arrays(X, Y)
    vals = f(X, Y)
    return np.einsum("pij,i,j->p", vals, w, w) * wx * wy


def integrate2d(
    f: Func2D,
    xbreaks: Sequence[float],
    ybreaks: Sequence[float],
    *,
    tol: float = 1e-12,
    n: int = 10,
    max_panels: int = 200000,
) -> tuple[float, float]:
    """Integrate ``f(x, y)`` over the rectangle spanned by the break lists.

    Each rectangle is compared against its x-bisection and its y-bisection;
    it is split only along the direction(s) that disagree, so edge
    singularities do not trigger refinement in the tangential direction.
    """
    xb = np.asarray(xbreaks, dtype=float)
    yb = np.asarray(ybreaks, dtype=float)
    X0, Y0 = np.meshgrid(xb[:-1], yb[:-1], indexing="ij")
    X1, Y1 = np.meshgrid(xb[1:], yb[1:], indexing="ij")
    x0, x1, y0, y1 = (a.ravel().copy() for a in (X0, X1, Y0, Y1))
    coarse = _rect_sums(f, x0, x1, y0, y1, n)
    done_val, done_err = [], []
    while True:
        xm, ym = 0.5 * (x0 + x1), 0.5 * (y0 + y1)
        xl = _rect_sums(f, x0, xm, y0, y1, n)
        xr = _rect_sums(f, xm, x1, y0, y1, n)
        yl = _rect_sums(f, x0, x1, y0, ym, n)
        yr = _rect_sums(f, x0, x1, ym, y1, n)
        ex = np.abs(xl + xr - coarse)
        ey = np.abs(yl + yr - coarse)
        err = np.maximum(ex, ey)
        est = 0.5 * (xl + xr + yl + yr)
        total = abs(est.sum() + sum(done_val))
        budget = tol * total / max(len(x0) + len(done_val), 1)
        ok = err <= budget
        done_val.extend(est[ok].tolist())
        done_err.extend(err[ok].tolist())
        if ok.all():
            break
        if len(done_val) + 4 * (~ok).sum() > max_panels:
            raise SolverError(f"2-D quadrature did not converge within {max_panels} panels")
        # split along x, y, or both
        bad = ~ok
        sx = bad & (ex >= 0.25 * ey)
        sy = bad & (ey >= 0.25 * ex)
        both = sx & sy
        only_x = sx & ~sy
        only_y = sy & ~sx
        nx0, nx1, ny0, ny1, nco = [], [], [], [], []
        for sel in (only_x,):
            nx0 += [x0[sel], xm[sel]]
            nx1 += [xm[sel], x1[sel]]
            ny0 += [y0[sel], y0[sel]]
            ny1 += [y1[sel], y1[sel]]
            nco += [xl[sel], xr[sel]]
        for sel in (only_y,):
            nx0 += [x0[sel], x0[sel]]
            nx1 += [x1[sel], x1[sel]]
            ny0 += [y0[sel], ym[sel]]
            ny1 += [ym[sel], y1[sel]]
            nco += [yl[sel], yr[sel]]
        if both.any():
            q = [(x0, xm, y0, ym), (xm, x1, y0, ym), (x0, xm, ym, y1), (xm, x1, ym, y1)]
            for a0, a1, b0, b1 in q:
                nx0.append(a0[both])
                nx1.append(a1[both])
                ny0.append(b0[both])
                ny1.append(b1[both])
            sub = _rect_sums(
                f,
                np.concatenate(nx0[-4:]),
                np.concatenate(nx1[-4:]),
                np.concatenate(ny0[-4:]),
                np.concatenate(ny1[-4:]),
                n,
            )
            nco.append(sub)
        x0, x1 = np.concatenate(nx0), np.concatenate(nx1)
        y0, y1 = np.concatenate(ny0), np.concatenate(ny1)
        coarse = np.concatenate(nco)
    order = np.argsort(np.abs(done_val))
    return float(np.sum(np.asarray(done_val)[order])), float(np.sum(done_err))
