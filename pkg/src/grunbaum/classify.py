"""Grid tests for membership in a concavity regime.

The transformed profile (w^(1/(N-1)), log w, as dictated by the class) is
checked for midpoint concavity or convexity on a grid.  Tabulated and
piecewise families are checked at their knots only, where the piecewise
shape is fully determined.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .concavity import ConcavityClass
from .density import Density1D
from .quadrature import effective_interval

__all__ = ["ClassReport", "check_class"]

DEFAULT_GRID = 2048
DEFAULT_TOL = 1e-8


@dataclass(frozen=True)
class ClassReport:
    cls: ConcavityClass
    passed: bool
    worst_violation: float
    location: float | None
    n_points: int
    reason: str | None = None

    def to_dict(self) -> dict:
        return {
            "class": self.cls.to_dict(),
            "passed": self.passed,
            "worst_violation": self.worst_violation,
            "location": self.location,
            "n_points": self.n_points,
            "reason": self.reason,
        }


def _chord_defects(x: np.ndarray, h: np.ndarray) -> np.ndarray:
    """chord(x_i) - h(x_i) over interior triples; positive means h dips
    below its chords (a convexity signature)."""
    dx = x[2:] - x[:-2]
    lam = (x[1:-1] - x[:-2]) / dx
    chord = (1.0 - lam) * h[:-2] + lam * h[2:]
    return chord - h[1:-1]


def check_class(
    d: Density1D,
    cls: ConcavityClass,
    tol: float = DEFAULT_TOL,
    n_grid: int = DEFAULT_GRID,
) -> ClassReport:
    """Test whether the density satisfies the regime's shape condition.

    Positive regimes require a bounded support (a normalized density with a
    concave power profile cannot extend to infinity); violations are
    measured relative to the local magnitude of the transformed profile.
    """
    one = cls.one_dimensional()
    if one.kind == "positive" and not d.support.bounded:
        return ClassReport(cls, False, np.inf, None, 0, "unbounded support in positive regime")

    if d.knots is not None:
        x = np.asarray(d.knots, dtype=float)
    else:
        lo, hi = effective_interval(d, d.support.lower, d.support.upper, max(d.mass, 1e-12))
        x = np.linspace(lo, hi, n_grid)
    w = d(x)
    pos = w > 0
    if not np.any(pos):
        return ClassReport(cls, False, np.inf, None, 0, "density vanishes at every test point")
    # Class conditions hold on {w > 0}; strip zero-valued endpoint runs.
    idx = np.nonzero(pos)[0]
    first, last = idx[0], idx[-1]
    x, w = x[first : last + 1], w[first : last + 1]
    interior_zero = ~(w > 0)
    if np.any(interior_zero):
        return ClassReport(cls, False, np.inf, float(x[interior_zero][0]), x.size, "zero density inside support")
    if x.size < 3:
        # At most two test points: any pair lies on an affine profile, which
        # is both concave and convex, so the shape is unconstrained here.
        return ClassReport(cls, True, 0.0, None, x.size)

    h = cls.transform_profile(w)
    defects = _chord_defects(x, h)
    if one.kind == "negative":
        raw = -defects  # convexity expected: chord >= h
    else:
        raw = defects  # concavity expected: chord <= h

    local = np.maximum(np.abs(h[:-2]), np.maximum(np.abs(h[1:-1]), np.abs(h[2:])))
    floor = max(float(np.median(np.abs(h))), 1e-12)
    rel = raw / np.maximum(local, floor)
    worst = float(np.max(rel)) if rel.size else 0.0
    loc = float(x[1:-1][int(np.argmax(rel))]) if rel.size else None
    return ClassReport(cls, worst <= tol, max(worst, 0.0), loc, x.size)
