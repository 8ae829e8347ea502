"""Quantitative stability: how close a near-extremal density is to a model.

Pipeline for a normalized centered density w of a given class with CDF R:

    eps   = R(0)/bound - 1            (clamped at 0; the near-equality gap)
    c     = w(0)/R(0)
    F     = extremal model CDF of the class with scale c
    LHS   = int |R - F| dx
    RHS   = explicit class constant:
        positive N:   4*sqrt(3) N^(N+1)/(N+1)^N (1+eps)(1-(1+eps)^(-1/N)) sqrt(m2)
        log-concave:  (4*sqrt(3)/e) (1+eps) log(1+eps) sqrt(m2)
        negative N:   (2N/w(0)) (N/(N+1))^N (1+eps)(1-(1+eps)^(-1/N))

and the certificate passes when LHS <= RHS (the inequality this toolkit
certifies numerically).  The moment sandwich

    2(N+1)(N+2)/N^2 * m2  <=  1/w(0)^2  <=  12 * m2

supplies the second-moment control; its right half also holds log-concave
(sub-exponential tails give all moments), while the negative regime has no
known sandwich and is refused.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .concavity import ConcavityClass, grunbaum_bound
from .density import Density1D
from .profile import CdfProfile
from .quadrature import DivergentIntegralError, cell_integrals, effective_interval
from .verify1d import ModelCdf, PreconditionError, model_cdf

__all__ = [
    "MomentSandwichReport",
    "NeedleStabilityReport",
    "StabilityCertificate",
    "l1_cdf_distance",
    "model_cdf",
    "moment_sandwich",
    "needle_stability",
    "stability_certificate",
    "stability_rhs",
]


# ---------------------------------------------------------------------------
# Moment sandwich
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MomentSandwichReport:
    cls: ConcavityClass
    second_moment: float
    w0: float
    lower_margin: float | None  # 1/w0^2 - lower bound (positive regime only)
    upper_margin: float  # 12*m2 - 1/w0^2
    passed: bool

    def to_dict(self) -> dict:
        return {
            "class": self.cls.to_dict(),
            "second_moment": self.second_moment,
            "w0": self.w0,
            "lower_margin": self.lower_margin,
            "upper_margin": self.upper_margin,
            "passed": self.passed,
        }


def moment_sandwich(
    target: CdfProfile | Density1D, cls: ConcavityClass, tol: float = 1e-9
) -> MomentSandwichReport:
    """Two-sided bound between 1/w(0)^2 and the second moment.

    Available for the positive regime (both inequalities) and log-concave
    densities (upper inequality only); the negative regime is refused since
    no analogue is known there.
    """
    one = cls.one_dimensional()
    if one.kind == "negative":
        raise ValueError("moment sandwich is not available for the negative regime")
    if isinstance(target, CdfProfile):
        d, m2, w0, bary = target.density, target.second_moment, target.w0, target.barycenter
    else:
        d = target
        bary = d.moment(1)
        m2 = d.moment(2)
        w0 = float(d(0.0))
    if abs(bary) > 1e-6:
        raise PreconditionError("moment sandwich requires a centered density")
    if not math.isfinite(m2):
        raise DivergentIntegralError("second moment is infinite")
    if w0 <= 0:
        raise PreconditionError("w(0) must be positive")
    mid = 1.0 / w0**2
    upper = 12.0 * m2 - mid
    scale = max(1.0, mid)
    if one.kind == "positive":
        n = one.param
        lower = mid - (2.0 * (n + 1.0) * (n + 2.0) / n**2) * m2
        passed = lower >= -tol * scale and upper >= -tol * scale
        return MomentSandwichReport(cls, m2, w0, lower, upper, passed)
    return MomentSandwichReport(cls, m2, w0, None, upper, upper >= -tol * scale)


# ---------------------------------------------------------------------------
# L1 distance between a CDF and a model CDF
# ---------------------------------------------------------------------------


def _cdf_point(d: Density1D, x: float) -> float:
    return float(d.cdf_values(np.array([x]))[0])


def _lower_tail_R(d: Density1D, t: float) -> float:
    """int_{-inf}^t R dx = t R(t) - int_{-inf}^t x w dx."""
    return t * _cdf_point(d, t) - d.integrate(d.support.lower, t, 1)


def _upper_tail_R(d: Density1D, t: float) -> float:
    """int_t^inf (1 - R) dx = int_t^b x w dx - t (1 - R(t))."""
    return d.integrate(t, d.support.upper, 1) - t * (1.0 - _cdf_point(d, t))


def _upper_tail_F(F: ModelCdf, t: float) -> float:
    if F.orientation == "left-apex":
        top = F.support.upper
        if t >= top:
            return 0.0
        return float(F.antiderivative(np.array([t]))[0]) - t
    return float(F._a_left(np.asarray([-t]))[0])


def l1_cdf_distance(d: Density1D, F: ModelCdf, n_cells: int = 2048) -> float:
    """int |R - F| over the union of supports, exact tails included.

    The finite window is split into cells; on each cell the signed integrals
    of R (by parts, through the first-moment kernel) and F (closed-form
    antiderivative) are exact, and cells where R - F changes sign are split
    at a root.  Outside the window both CDFs are within 1e-13 of 0 or 1 and
    the closed-form tail integrals are used.
    """
    if abs(d.mass - 1.0) > 1e-8:
        raise ValueError("l1_cdf_distance expects a normalized density")
    d_lo, d_hi = effective_interval(d, d.support.lower, d.support.upper, 1.0, tail_tol=1e-13)

    # window below/above which both CDFs are flat to ~1e-13
    c = F.c
    one = F.cls
    if F.orientation == "left-apex":
        if one.kind == "log_concave":
            f_lo = (math.log(1e-14) + 1.0) / c
        elif one.kind == "negative":
            n = one.param
            f_lo = (n / c) * ((1e-14 / grunbaum_bound(one)) ** (1.0 / n) - 1.0)
        else:
            f_lo = F.support.lower
        f_hi = F.support.upper
    else:
        f_lo = F.support.lower
        if math.isfinite(F.support.upper):
            f_hi = F.support.upper
        elif one.kind == "log_concave":
            f_hi = -(math.log(1e-14) + 1.0) / c
        else:
            n = one.param
            f_hi = -(n / c) * ((1e-14 / grunbaum_bound(one)) ** (1.0 / n) - 1.0)

    lo = min(d_lo, f_lo)
    hi = max(d_hi, f_hi)
    edges = np.linspace(lo, hi, n_cells + 1)
    marks = [x for x in (0.0, d_lo, d_hi, f_lo, f_hi, F.support.lower, F.support.upper) if math.isfinite(x)]
    edges = np.union1d(edges, [m for m in marks if lo <= m <= hi])

    R = np.clip(d.cdf_values(edges), 0.0, 1.0)
    Fv = F(edges)
    G = R - Fv
    # signed cell integrals of R by parts and of F by antiderivative
    m1 = _cell_first_moments(d, edges)
    IR = edges[1:] * R[1:] - edges[:-1] * R[:-1] - m1
    AF = F.antiderivative(edges)
    IF = AF[1:] - AF[:-1]

    total = 0.0
    thresh = 1e-12
    for i in range(edges.size - 1):
        gl, gh = G[i], G[i + 1]
        if (gl >= -thresh and gh >= -thresh) or (gl <= thresh and gh <= thresh):
            total += abs(IR[i] - IF[i])
            continue
        root = brentq(
            lambda x: _cdf_point(d, x) - float(F(np.array([x]))[0]),
            edges[i],
            edges[i + 1],
            xtol=1e-14,
        )
        r_root = _cdf_point(d, root)
        m_left = d.integrate(edges[i], root, 1)
        m_right = d.integrate(root, edges[i + 1], 1)
        ir_left = root * r_root - edges[i] * R[i] - m_left
        ir_right = edges[i + 1] * R[i + 1] - root * r_root - m_right
        a_root = float(F.antiderivative(np.array([root]))[0])
        total += abs(ir_left - (a_root - AF[i])) + abs(ir_right - (AF[i + 1] - a_root))

    # exact tails beyond the window
    total += abs(_lower_tail_R(d, lo) - float(F.antiderivative(np.array([lo]))[0]))
    total += abs(_upper_tail_R(d, hi) - _upper_tail_F(F, hi))
    return total


def _cell_first_moments(d: Density1D, edges: np.ndarray) -> np.ndarray:
    if d.kernel is not None:
        pref = d.kernel.prefix(edges, 1)
        return np.diff(pref)
    return cell_integrals(lambda x: x * d(x), edges)


# ---------------------------------------------------------------------------
# Right-hand sides and certificates
# ---------------------------------------------------------------------------


def stability_rhs(
    cls: ConcavityClass,
    eps: float,
    second_moment: float | None = None,
    w0: float | None = None,
) -> float:
    """Explicit stability bound for the class at near-equality gap eps.

    The positive and log-concave regimes consume the second moment; the
    negative regime consumes w(0) instead (its right-hand side needs no
    moment control).  Supplying the wrong statistic raises.
    """
    if eps < 0:
        raise ValueError("eps must be nonnegative")
    one = cls.one_dimensional()
    if one.kind in ("positive", "log_concave"):
        if second_moment is None:
            raise ValueError("this regime requires the second moment")
        if w0 is not None:
            raise ValueError("w0 is not used in this regime")
        if not math.isfinite(second_moment) or second_moment < 0:
            raise ValueError("second moment must be finite and nonnegative")
        if one.kind == "positive":
            n = one.param
            const = 4.0 * math.sqrt(3.0) * n ** (n + 1.0) / (n + 1.0) ** n
            return const * (1.0 + eps) * (1.0 - (1.0 + eps) ** (-1.0 / n)) * math.sqrt(second_moment)
        return (
            4.0
            * math.sqrt(3.0)
            / math.e
            * (1.0 + eps)
            * math.log1p(eps)
            * math.sqrt(second_moment)
        )
    if w0 is None:
        raise ValueError("the negative regime requires w0")
    if second_moment is not None:
        raise ValueError("the second moment is not used in the negative regime")
    if w0 <= 0:
        raise ValueError("w0 must be positive")
    n = one.param
    return (2.0 * n / w0) * (n / (n + 1.0)) ** n * (1.0 + eps) * (1.0 - (1.0 + eps) ** (-1.0 / n))


@dataclass(frozen=True)
class StabilityCertificate:
    cls: ConcavityClass
    eps: float
    c: float
    model_id: str
    lhs: float
    rhs: float
    statistic_kind: str  # "second_moment" or "w0"
    statistic: float
    r0: float
    bound: float
    passed: bool

    def to_dict(self) -> dict:
        return {
            "class": self.cls.to_dict(),
            "eps": self.eps,
            "c": self.c,
            "model": self.model_id,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "statistic_kind": self.statistic_kind,
            "statistic": self.statistic,
            "r0": self.r0,
            "bound": self.bound,
            "passed": self.passed,
        }


def _certificate(
    d: Density1D, cls: ConcavityClass, eps: float, tol: float
) -> StabilityCertificate:
    one = cls.one_dimensional()
    r0 = d.integrate(d.support.lower, 0.0)
    w0 = float(d(0.0))
    if not d.support.lower < 0.0 < d.support.upper or r0 <= 0 or w0 <= 0:
        raise PreconditionError("certificate needs 0 interior to the support with w(0) > 0")
    bound = grunbaum_bound(cls)
    c = w0 / r0
    F = model_cdf(one, c)
    lhs = l1_cdf_distance(d, F)
    if one.kind == "negative":
        rhs = stability_rhs(one, eps, w0=w0)
        stat_kind, stat = "w0", w0
    else:
        m2 = d.moment(2)
        rhs = stability_rhs(one, eps, second_moment=m2)
        stat_kind, stat = "second_moment", m2
    return StabilityCertificate(
        cls,
        float(eps),
        float(c),
        F.describe(),
        float(lhs),
        float(rhs),
        stat_kind,
        float(stat),
        float(r0),
        float(bound),
        bool(lhs <= rhs + tol),
    )


def stability_certificate(
    d: Density1D, cls: ConcavityClass, tol: float = 1e-6
) -> StabilityCertificate:
    """Self-contained certificate: eps is measured from R(0), never supplied.

    Preconditions: normalized, centered (within 1e-8), class-valid input.
    """
    if abs(d.mass - 1.0) > 1e-8:
        raise PreconditionError("density must be normalized")
    bary = d.moment(1)
    if abs(bary) > 1e-8:
        raise PreconditionError("density must be centered")
    r0 = d.integrate(d.support.lower, 0.0)
    eps = max(r0 / grunbaum_bound(cls) - 1.0, 0.0)
    return _certificate(d, cls, eps, tol)


# ---------------------------------------------------------------------------
# Needle-level stability
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class NeedleStabilityReport:
    eps: float
    delta: float
    eps_prime: float
    selected: list
    selected_mass: float
    required_mass: float
    certificates: list
    passed: bool

    def to_dict(self) -> dict:
        return {
            "eps": self.eps,
            "delta": self.delta,
            "eps_prime": self.eps_prime,
            "selected": list(self.selected),
            "selected_mass": self.selected_mass,
            "required_mass": self.required_mass,
            "certificates": [c.to_dict() for c in self.certificates],
            "passed": self.passed,
        }


def needle_stability(
    decomposition,
    cls: ConcavityClass,
    eps: float,
    delta: float,
    tol: float = 1e-6,
) -> NeedleStabilityReport:
    """Select the good needles under a global near-equality hypothesis.

    Given weights alpha_q and normalized needle densities, the needles whose
    left mass is at most (1+delta)(1+eps)*bound form a subfamily of weight
    at least delta/(1+delta), and each selected needle satisfies the
    stability bound with the inflated gap eps' = eps + delta + eps*delta.
    The decomposition argument needs a ``needles`` attribute of objects with
    ``weight`` and ``density``.
    """
    if delta <= 0:
        raise ValueError("delta must be positive")
    if eps < 0:
        raise ValueError("eps must be nonnegative")
    needles = list(decomposition.needles)
    bound = grunbaum_bound(cls)
    lefts = [n.density.integrate(n.density.support.lower, 0.0) for n in needles]
    weights = np.array([n.weight for n in needles], dtype=float)
    global_left = float(np.sum(weights * np.asarray(lefts)))
    if global_left > (1.0 + eps) * bound + tol:
        raise PreconditionError(
            f"global left mass {global_left:.6g} exceeds (1+eps)*bound = "
            f"{(1.0 + eps) * bound:.6g}"
        )
    threshold = (1.0 + delta) * (1.0 + eps) * bound
    selected = [i for i, left in enumerate(lefts) if left <= threshold + 1e-12]
    selected_mass = float(np.sum(weights[selected]))
    required = delta / (1.0 + delta)
    eps_prime = eps + delta + eps * delta
    certs = [_certificate(needles[i].density, cls, eps_prime, tol) for i in selected]
    passed = selected_mass >= required - tol and all(c.passed for c in certs)
    return NeedleStabilityReport(
        eps, delta, eps_prime, selected, selected_mass, required, certs, passed
    )
