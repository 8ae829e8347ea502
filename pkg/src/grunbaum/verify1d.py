"""One-dimensional halfspace-mass verification and extremal-model detection.

verify_grunbaum_1d checks the two one-sided masses of a centered density
against the sharp class bound.  rigidity_detect fits the extremal model of
the class (cone power, exponential, or heavy-tailed cone) through
c = w(0)/R(0) and measures the sup distance between the CDFs; the input is
declared extremal when both the distance and the bound gap vanish within
tolerance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .classify import ClassReport, check_class
from .concavity import ConcavityClass, grunbaum_bound
from .density import Density1D, Interval
from .profile import CdfProfile

__all__ = [
    "ModelCdf",
    "ModelParams",
    "PreconditionError",
    "RigidityResult",
    "VerificationReport",
    "model_cdf",
    "rigidity_detect",
    "verify_grunbaum_1d",
]


class PreconditionError(ValueError):
    """The input violates a hypothesis of the inequality being checked."""


@dataclass(frozen=True)
class VerificationReport:
    cls: ConcavityClass
    left_mass: float
    right_mass: float
    bound: float
    margin_left: float
    margin_right: float
    passed: bool
    class_report: ClassReport
    barycenter: float

    @property
    def margin(self) -> float:
        return min(self.margin_left, self.margin_right)

    def to_dict(self) -> dict:
        return {
            "class": self.cls.to_dict(),
            "masses": {"left": self.left_mass, "right": self.right_mass},
            "bound": self.bound,
            "margins": {"left": self.margin_left, "right": self.margin_right},
            "passed": self.passed,
            "barycenter": self.barycenter,
            "violations": []
            if self.class_report.passed
            else [
                {
                    "kind": "class",
                    "worst": self.class_report.worst_violation,
                    "location": self.class_report.location,
                    "reason": self.class_report.reason,
                }
            ],
        }


def verify_grunbaum_1d(
    d: Density1D,
    cls: ConcavityClass,
    tol: float = 1e-8,
    center_tol: float | None = None,
    class_tol: float = 1e-8,
) -> VerificationReport:
    """Check both one-sided masses at 0 against the class bound.

    Preconditions (violations raise PreconditionError): unit mass, barycenter
    at 0 within tolerance, and 0 strictly interior to the support with
    nondegenerate mass on both sides.  A failed shape test does not raise;
    it is reported as the (failing) verdict.
    """
    center_tol = tol if center_tol is None else center_tol
    if abs(d.mass - 1.0) > 1e-8:
        raise PreconditionError("density must be normalized to unit mass")
    bary = d.moment(1)
    if abs(bary) > center_tol:
        raise PreconditionError(
            f"barycenter {bary:.3e} is not at 0; recenter the density first"
        )
    if not d.support.lower < 0.0 < d.support.upper:
        raise PreconditionError("0 must be interior to the support (a < 0 < b)")
    left = d.integrate(d.support.lower, 0.0)
    right = d.integrate(0.0, d.support.upper)
    if left <= 1e-12 or left >= 1.0 - 1e-12:
        raise PreconditionError("degenerate split: barycenter sits at the support boundary")

    class_report = check_class(d, cls, tol=class_tol)
    bound = grunbaum_bound(cls)
    margin_left = left - bound
    margin_right = right - bound
    passed = class_report.passed and margin_left >= -tol and margin_right >= -tol
    return VerificationReport(
        cls, left, right, bound, margin_left, margin_right, passed, class_report, bary
    )


# ---------------------------------------------------------------------------
# Extremal models and rigidity detection
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ModelParams:
    cls: ConcavityClass
    c: float
    orientation: str = "left-apex"

    def __post_init__(self):
        if self.c <= 0:
            raise ValueError("model scale c must be positive")
        if self.orientation not in ("left-apex", "right-apex"):
            raise ValueError("orientation must be 'left-apex' or 'right-apex'")

    def to_dict(self) -> dict:
        return {"class": self.cls.to_dict(), "c": self.c, "orientation": self.orientation}


class ModelCdf:
    """Extremal cumulative profile F for a regime and scale c.

    Left-apex conventions (the right-apex family is the mirror image):

        positive N:   F = (N/(N+1))^N (1+cx/N)^N on [-N/c, 1/c]
        negative N:   same formula on (-inf, 1/c]
        log-concave:  F = e^(cx-1)    on (-inf, 1/c]

    ``antiderivative`` returns int_{-inf}^x F, closed form, used for exact
    L1 distances including unbounded tails.
    """

    def __init__(self, cls: ConcavityClass, c: float, orientation: str = "left-apex"):
        one = cls.one_dimensional()
        if c <= 0:
            raise ValueError("model scale c must be positive")
        self.cls = one
        self.c = float(c)
        self.orientation = orientation
        if orientation not in ("left-apex", "right-apex"):
            raise ValueError("orientation must be 'left-apex' or 'right-apex'")
        if one.kind == "positive":
            lo = -one.param / c
        else:
            lo = -math.inf
        self.support = (
            Interval(lo, 1.0 / c)
            if orientation == "left-apex"
            else Interval(-1.0 / c, -lo if math.isfinite(lo) else math.inf)
        )

    # left-apex primitives ------------------------------------------------

    def _f_left(self, x: np.ndarray) -> np.ndarray:
        c = self.c
        one = self.cls
        x = np.asarray(x, dtype=float)
        if one.kind == "log_concave":
            out = np.exp(np.minimum(c * x - 1.0, 0.0))
            return np.where(x >= 1.0 / c, 1.0, out)
        n = one.param
        bound = (n / (n + 1.0)) ** n
        u = 1.0 + (c / n) * x
        if one.kind == "positive":
            vals = bound * np.maximum(u, 0.0) ** n
        else:
            with np.errstate(over="ignore"):
                vals = np.where(u > 0, bound * np.maximum(u, 1e-300) ** n, np.inf)
        return np.where(x >= 1.0 / c, 1.0, np.minimum(vals, 1.0))

    def _a_left(self, x: np.ndarray) -> np.ndarray:
        """int_{-inf}^x F for the left-apex model."""
        c = self.c
        one = self.cls
        x = np.asarray(x, dtype=float)
        top = 1.0 / c
        if one.kind == "log_concave":
            inside = np.exp(np.minimum(c * np.minimum(x, top) - 1.0, 0.0)) / c
            return inside + np.maximum(x - top, 0.0)
        n = one.param
        bound = (n / (n + 1.0)) ** n
        coef = bound * n / (c * (n + 1.0))
        xx = np.minimum(x, top)
        u = 1.0 + (c / n) * xx
        if one.kind == "positive":
            inside = coef * np.maximum(u, 0.0) ** (n + 1.0)
        else:
            inside = coef * np.maximum(u, 1e-300) ** (n + 1.0)  # -> 0 at -inf
        return inside + np.maximum(x - top, 0.0)

    # public (orientation-aware) ------------------------------------------

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.orientation == "left-apex":
            return self._f_left(x)
        return 1.0 - self._f_left(-x)

    def antiderivative(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.orientation == "left-apex":
            return self._a_left(x)
        # mirrored model starts at -1/c; int_{-1/c}^x (1 - F_L(-u)) du
        return np.maximum(x + 1.0 / self.c, 0.0) - (self._a_left(1.0 / self.c) - self._a_left(-x))

    def density(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        c = self.c
        one = self.cls
        sign = 1.0 if self.orientation == "left-apex" else -1.0
        xs = sign * x
        if one.kind == "log_concave":
            vals = c * np.exp(c * xs - 1.0)
        else:
            n = one.param
            u = 1.0 + (c / n) * xs
            vals = c * (n / (n + 1.0)) ** n * np.maximum(u, 0.0) ** (n - 1.0)
        inside = (x >= self.support.lower) & (x <= self.support.upper)
        return np.where(inside, vals, 0.0)

    def describe(self) -> str:
        return f"{self.cls.describe()} model, c={self.c:g}, {self.orientation}"


def model_cdf(cls: ConcavityClass, c: float, orientation: str = "left-apex") -> ModelCdf:
    """Extremal CDF of the class with scale c (see ModelCdf)."""
    return ModelCdf(cls, c, orientation)


@dataclass(frozen=True)
class RigidityResult:
    extremal: bool
    model: ModelParams | None
    sup_distance: float
    bound_gap: float
    orientation: str

    def to_dict(self) -> dict:
        return {
            "extremal": self.extremal,
            "model": None if self.model is None else self.model.to_dict(),
            "sup_distance": self.sup_distance,
            "bound_gap": self.bound_gap,
            "orientation": self.orientation,
        }


def rigidity_detect(p: CdfProfile, cls: ConcavityClass, tol: float = 1e-6) -> RigidityResult:
    """Fit the extremal model through c = w(0)/R(0) and test for equality.

    Both orientations are tried (equality in the left inequality gives the
    left-apex family, in the right inequality its mirror); the verdict is
    extremal only when the sup distance of the CDFs on the grid and the gap
    |R(0) - bound| (mirrored for right-apex) are both within tolerance.
    """
    if p.c is None:
        raise PreconditionError("rigidity detection needs 0 interior to the support")
    bound = grunbaum_bound(cls)
    candidates = []
    # left-apex: left mass sits at the bound
    c_left = p.w0 / p.r0
    F = model_cdf(cls, c_left, "left-apex")
    dist = float(np.max(np.abs(p.values - F(p.grid))))
    candidates.append((dist, abs(p.r0 - bound), c_left, "left-apex"))
    # right-apex: right mass sits at the bound
    if p.r0 < 1.0:
        c_right = p.w0 / (1.0 - p.r0)
        F = model_cdf(cls, c_right, "right-apex")
        dist = float(np.max(np.abs(p.values - F(p.grid))))
        candidates.append((dist, abs((1.0 - p.r0) - bound), c_right, "right-apex"))

    dist, gap, c_fit, orient = min(candidates, key=lambda t: max(t[0], t[1]))
    extremal = dist <= tol and gap <= tol
    params = ModelParams(cls.one_dimensional(), c_fit, orient) if extremal else None
    return RigidityResult(extremal, params, dist, gap, orient)
