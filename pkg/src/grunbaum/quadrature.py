"""Adaptive quadrature used throughout the package.

The workhorse is an adaptive Simpson rule with absolute tolerance, run in
batches (all pending subintervals are refined with a single vectorized call
to the integrand).  Half-infinite domains are handled by an exponential
substitution x = m -/+ e^u on the unbounded side, integrated in blocks of
doubling reach; a moment is declared divergent when the block contributions
stop shrinking.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

DEFAULT_TOL = 1e-10
TAIL_TOL = 1e-12
MAX_DEPTH = 60

__all__ = [
    "DivergentIntegralError",
    "TailInfo",
    "adaptive_simpson",
    "cell_integrals",
    "effective_interval",
    "integrate_with_tails",
]


class DivergentIntegralError(ArithmeticError):
    """Truncated integrals fail the doubling-stability test."""


def _simpson_batch(f, lo, hi, flo, fmid, fhi):
    mid = 0.5 * (lo + hi)
    h = hi - lo
    left_mid = 0.5 * (lo + mid)
    right_mid = 0.5 * (mid + hi)
    f_lm = np.asarray(f(left_mid), dtype=float)
    f_rm = np.asarray(f(right_mid), dtype=float)
    s_whole = h / 6.0 * (flo + 4.0 * fmid + fhi)
    s_left = h / 12.0 * (flo + 4.0 * f_lm + fmid)
    s_right = h / 12.0 * (fmid + 4.0 * f_rm + fhi)
    # Boole's rule on the same five points: an independent error gauge that
    # does not share the Simpson pair's cancellation pattern (plain
    # |S2 - S1| can vanish on kinked integrands while both are wrong).
    boole = h / 90.0 * (7.0 * flo + 32.0 * f_lm + 12.0 * fmid + 32.0 * f_rm + 7.0 * fhi)
    return mid, left_mid, right_mid, f_lm, f_rm, s_whole, s_left, s_right, boole


def adaptive_simpson(
    f: Callable[[np.ndarray], np.ndarray],
    a: float,
    b: float,
    tol: float = DEFAULT_TOL,
    max_depth: int = MAX_DEPTH,
) -> float:
    """Integrate a vectorized integrand over the finite interval [a, b]."""
    return float(cell_integrals(f, np.array([a, b], dtype=float), tol, max_depth)[0])


def cell_integrals(
    f: Callable[[np.ndarray], np.ndarray],
    edges: np.ndarray,
    tol: float = DEFAULT_TOL,
    max_depth: int = MAX_DEPTH,
) -> np.ndarray:
    """Per-cell integrals of f over consecutive [edges[i], edges[i+1]].

    All cells are refined together; the tolerance is distributed over the
    cells proportionally to their share of the total length, and halves with
    each bisection so the accumulated error stays below ``tol``.
    """
    edges = np.asarray(edges, dtype=float)
    if edges.ndim != 1 or edges.size < 2:
        raise ValueError("edges must be a 1-d array with at least two entries")
    if not np.all(np.isfinite(edges)):
        raise ValueError("cell_integrals requires finite edges")
    ncell = edges.size - 1
    out = np.zeros(ncell, dtype=float)

    lo = edges[:-1].copy()
    hi = edges[1:].copy()
    width = hi - lo
    if np.any(width < 0):
        raise ValueError("edges must be nondecreasing")
    active = width > 0
    if not np.any(active):
        return out

    lo, hi = lo[active], hi[active]
    cell = np.nonzero(active)[0]
    total = float(np.sum(hi - lo))
    cell_tol = tol * (hi - lo) / total
    flo = np.asarray(f(lo), dtype=float)
    fhi = np.asarray(f(hi), dtype=float)
    fmid = np.asarray(f(0.5 * (lo + hi)), dtype=float)
    depth = np.zeros(lo.shape, dtype=int)

    while lo.size:
        mid, lmid, rmid, f_lm, f_rm, s_whole, s_left, s_right, boole = _simpson_batch(
            f, lo, hi, flo, fmid, fhi
        )
        s2 = s_left + s_right
        err = np.maximum(np.abs(s2 - s_whole) / 15.0, np.abs(s2 - boole))
        done = ((err <= cell_tol) & (depth >= 2)) | (depth >= max_depth)
        if np.any(done):
            # Richardson extrapolation on the accepted panels.
            np.add.at(out, cell[done], s2[done] + (s2[done] - s_whole[done]) / 15.0)
        keep = ~done
        if not np.any(keep):
            break
        lo = np.concatenate([lo[keep], mid[keep]])
        hi = np.concatenate([mid[keep], hi[keep]])
        flo = np.concatenate([flo[keep], fmid[keep]])
        fhi = np.concatenate([fmid[keep], fhi[keep]])
        fmid = np.concatenate([f_lm[keep], f_rm[keep]])
        cell = np.concatenate([cell[keep], cell[keep]])
        cell_tol = np.concatenate([cell_tol[keep] / 2.0, cell_tol[keep] / 2.0])
        depth = np.concatenate([depth[keep] + 1, depth[keep] + 1])
    return out


@dataclass(frozen=True)
class TailInfo:
    """Where an unbounded integral was truncated and the discarded estimate."""

    lower: float
    upper: float
    tail_estimate: float


def _tail_integral(
    f, anchor: float, sign: float, tol: float, rel_floor: float
) -> tuple[float, float]:
    """Integral of f over the unbounded side beyond ``anchor``.

    sign=-1 integrates (-inf, anchor], sign=+1 integrates [anchor, inf).
    Substituting x = anchor + sign*e^u maps the tail to u in [u0, inf); the
    transformed integrand is summed over u-blocks of width log 2 (each block
    doubles the reach) until the newest block is negligible relative to the
    running total.  Non-shrinking blocks raise DivergentIntegralError.
    """

    def g(u):
        x = anchor + sign * np.exp(u)
        return np.asarray(f(x), dtype=float) * np.exp(u)

    # x within distance 1 of the anchor is integrated without substitution.
    if sign < 0:
        head = adaptive_simpson(f, anchor - 1.0, anchor, tol)
    else:
        head = adaptive_simpson(f, anchor, anchor + 1.0, tol)

    total = head
    block = math.log(2.0)
    u = 0.0
    prev = math.inf
    stall = 0
    for _ in range(220):  # reach e^(220 log2 / ...) ~ far beyond overflow-safe range
        piece = adaptive_simpson(g, u, u + block, tol)
        total += piece
        u += block
        scale = max(abs(total), rel_floor)
        if abs(piece) <= 1e-8 * scale and abs(piece) <= max(tol, 1e-14 * scale):
            # One confirming block, then stop.
            confirm = adaptive_simpson(g, u, u + block, tol)
            total += confirm
            if abs(confirm) <= 1e-8 * max(abs(total), rel_floor):
                reach = anchor + sign * math.exp(u + block)
                return total, reach
            u += block
        if abs(piece) >= prev and abs(piece) > 1e-8 * scale:
            stall += 1
            if stall >= 8:
                raise DivergentIntegralError(
                    "tail contributions do not decay; integral diverges"
                )
        else:
            stall = 0
        prev = abs(piece)
        if u > 700.0:  # e^u overflows beyond this; tail must have converged
            raise DivergentIntegralError(
                "tail truncation did not stabilize within representable range"
            )
    raise DivergentIntegralError("tail truncation did not converge")


def integrate_with_tails(
    f: Callable[[np.ndarray], np.ndarray],
    lower: float,
    upper: float,
    tol: float = DEFAULT_TOL,
    rel_floor: float = 1.0,
) -> tuple[float, TailInfo | None]:
    """Integrate f over (lower, upper), either end possibly infinite.

    Returns the value and, when a substitution was used, the truncation
    record.  Raises DivergentIntegralError when the doubling-stability test
    fails (the k vs 2k agreement check).
    """
    lo_inf = math.isinf(lower)
    hi_inf = math.isinf(upper)
    if not lo_inf and not hi_inf:
        return adaptive_simpson(f, lower, upper, tol), None

    if lo_inf and hi_inf:
        left, reach_l = _tail_integral(f, 0.0, -1.0, tol, rel_floor)
        right, reach_r = _tail_integral(f, 0.0, +1.0, tol, rel_floor)
        return left + right, TailInfo(reach_l, reach_r, 0.0)
    if lo_inf:
        core_anchor = upper
        tail, reach = _tail_integral(f, core_anchor, -1.0, tol, rel_floor)
        return tail, TailInfo(reach, upper, 0.0)
    tail, reach = _tail_integral(f, lower, +1.0, tol, rel_floor)
    return tail, TailInfo(lower, reach, 0.0)


def effective_interval(
    f: Callable[[np.ndarray], np.ndarray],
    lower: float,
    upper: float,
    mass: float,
    tail_tol: float = TAIL_TOL,
) -> tuple[float, float]:
    """Finite [lo, hi] outside of which f carries less than tail_tol * mass.

    Used to place grids on unbounded supports.  The search doubles the
    distance from the finite side until the discarded mass estimate is below
    the threshold.
    """
    target = tail_tol * max(mass, 1e-300)

    def find(anchor: float, sign: float) -> float:
        reach = 1.0
        for _ in range(2000):
            a = anchor + sign * reach
            b = anchor + sign * 2.0 * reach
            lo_, hi_ = (min(a, b), max(a, b))
            block = adaptive_simpson(f, lo_, hi_, max(target * 1e-3, 1e-16))
            if abs(block) < 0.25 * target and reach > 4.0:
                return anchor + sign * 2.0 * reach
            reach *= 2.0
            if reach > 1e280:
                break
        return anchor + sign * reach

    lo = lower if math.isfinite(lower) else find(upper if math.isfinite(upper) else 0.0, -1.0)
    hi = upper if math.isfinite(upper) else find(lower if math.isfinite(lower) else 0.0, +1.0)
    return lo, hi
