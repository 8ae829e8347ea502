"""Cumulative profiles: the CDF on a grid, its moments, and envelope bounds.

For a centered density w with CDF R the two workhorse facts are

    int_a^b R(x) dx = b                       (bounded support, zero mean)
    R(x) <= R(0) (1 + cx/N)^N,  c = w(0)/R(0)

with the obvious log-concave variant log R(x) <= log R(0) + cx and the same
upper-envelope direction for the negative regime.  Equality in the envelope
is exactly the extremal (cone / exponential) situation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .concavity import ConcavityClass
from .density import Density1D, Interval
from .quadrature import DivergentIntegralError, adaptive_simpson, effective_interval

__all__ = [
    "CdfProfile",
    "EnvelopeReport",
    "cdf_profile",
    "check_envelope",
    "intR_identity",
    "profile_shape_defect",
]


@dataclass(frozen=True)
class CdfProfile:
    """CDF samples of a normalized density plus the scalars used everywhere.

    c = w(0)/R(0) is defined only when 0 is interior to the support and
    R(0) > 0; otherwise it is None and downstream checks refuse the input.
    """

    density: Density1D
    grid: np.ndarray
    values: np.ndarray
    barycenter: float
    second_moment: float
    w0: float
    r0: float
    c: float | None
    endpoint_defect: float

    @property
    def support(self) -> Interval:
        return self.density.support

    def cdf_at(self, x) -> np.ndarray:
        return self.density.cdf_values(np.asarray(x, dtype=float))


def cdf_profile(d: Density1D, grid: int | np.ndarray = 2048) -> CdfProfile:
    """Sample the CDF of a normalized density on a grid containing 0.

    R(0), w(0), the barycenter and the second moment are computed by direct
    integration, not read off the grid; the second moment is +inf when the
    truncation-stability test flags divergence.
    """
    if abs(d.mass - 1.0) > 1e-8:
        raise ValueError("cdf_profile expects a normalized density")
    lo, hi = effective_interval(d, d.support.lower, d.support.upper, 1.0)
    if isinstance(grid, (int, np.integer)):
        xs = np.linspace(lo, hi, int(grid))
    else:
        xs = np.asarray(grid, dtype=float)
    if lo < 0.0 < hi:
        xs = np.union1d(xs, [0.0])
    values = np.clip(d.cdf_values(xs), 0.0, 1.0)
    values = np.maximum.accumulate(values)
    endpoint_defect = max(abs(values[0] - d.integrate(d.support.lower, xs[0])), abs(1.0 - values[-1]))

    bary = d.moment(1)
    try:
        m2 = d.moment(2)
    except DivergentIntegralError:
        m2 = math.inf
    w0 = float(d(0.0))
    r0 = float(d.integrate(d.support.lower, 0.0))
    interior = d.support.lower < 0.0 < d.support.upper
    c = w0 / r0 if (interior and r0 > 0.0) else None
    return CdfProfile(d, xs, values, bary, m2, w0, r0, c, endpoint_defect)


def intR_identity(p: CdfProfile, tol: float = 1e-8) -> tuple[bool, float]:
    """Check int R = b for a centered density on a bounded interval.

    The integral of R is taken by adaptive quadrature on the exact CDF, so
    the residual reflects genuine numerical error rather than the identity
    used to derive it.
    """
    sup = p.support
    if not sup.bounded:
        raise ValueError("identity requires a bounded support")
    if abs(p.barycenter) > max(tol, 1e-9):
        raise ValueError("identity requires a centered density")
    integral = adaptive_simpson(lambda x: p.cdf_at(x), sup.lower, sup.upper, tol=1e-12)
    residual = abs(integral - sup.upper)
    return residual <= tol, residual


@dataclass(frozen=True)
class EnvelopeReport:
    cls: ConcavityClass
    c: float
    passed: bool
    worst_violation: float
    location: float | None
    sup_deviation: float

    def to_dict(self) -> dict:
        return {
            "class": self.cls.to_dict(),
            "c": self.c,
            "passed": self.passed,
            "worst_violation": self.worst_violation,
            "location": self.location,
            "sup_deviation": self.sup_deviation,
        }


def envelope_values(cls: ConcavityClass, r0: float, c: float, x: np.ndarray) -> np.ndarray:
    """Upper envelope U(x) for the CDF; +inf where the formula degenerates."""
    one = cls.one_dimensional()
    x = np.asarray(x, dtype=float)
    if one.kind == "log_concave":
        return r0 * np.exp(c * x)
    n = one.param
    u = 1.0 + (c / n) * x
    if one.kind == "positive":
        return r0 * np.maximum(u, 0.0) ** n
    # negative regime: the formula is valid while 1 + cx/N > 0; above that
    # point the envelope is vacuous.
    out = np.full(x.shape, np.inf)
    ok = u > 0
    out[ok] = r0 * u[ok] ** n
    return out


def check_envelope(p: CdfProfile, cls: ConcavityClass, tol: float = 1e-8) -> EnvelopeReport:
    """Pointwise check R <= U on the profile grid.

    sup_deviation records max |R - U| over the support (equality detection:
    it vanishes exactly for the extremal profiles).
    """
    if p.c is None:
        raise ValueError("envelope needs c = w(0)/R(0); 0 must be interior to the support")
    U = envelope_values(cls, p.r0, p.c, p.grid)
    resid = p.values - U
    finite = np.isfinite(U)
    viol = np.where(finite, resid, -np.inf)
    worst = float(np.max(viol))
    loc = float(p.grid[int(np.argmax(viol))]) if viol.size else None
    sup_dev = float(np.max(np.abs(np.where(finite, resid, 0.0))))
    return EnvelopeReport(cls, p.c, worst <= tol, max(worst, 0.0), loc, sup_dev)


def profile_shape_defect(p: CdfProfile, cls: ConcavityClass) -> float:
    """Worst midpoint defect of the transformed CDF profile.

    For the positive regime R^(1/N) must be concave, for the negative regime
    R^(1/N) convex, and log R concave in the log-concave regime; the return
    value is the largest violation found on the grid (<= 0 means clean).
    """
    one = cls.one_dimensional()
    mask = (p.values > 1e-13) & (p.values < 1.0 + 1e-15)
    x = p.grid[mask]
    if one.kind == "log_concave":
        h = np.log(p.values[mask])
    else:
        h = p.values[mask] ** (1.0 / one.param)
    dx = x[2:] - x[:-2]
    lam = (x[1:-1] - x[:-2]) / dx
    chord = (1.0 - lam) * h[:-2] + lam * h[2:]
    defect = chord - h[1:-1]
    if one.kind == "negative":
        defect = -defect
    scale = np.maximum(np.abs(h[1:-1]), max(float(np.median(np.abs(h))), 1e-12))
    return float(np.max(defect / scale)) if defect.size else 0.0
