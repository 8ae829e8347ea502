"""Concavity regimes, the s-mean, and the sharp halfspace-mass bounds.

A one-dimensional density w belongs to a regime through the shape of a
transformed profile:

    positive N > 1      w^(1/(N-1)) concave     bound (N/(N+1))^N
    log-concave         log w concave           bound 1/e
    negative beta < -1  w^(1/(beta-1)) convex   bound (beta/(beta+1))^beta
    s-concave measure   s in (-1, 1/n]          bound (1/(1+s))^(1/s)

The s-concave regime lives on R^n; its one-dimensional shadow (the class of
any 1-d marginal) is the regime with parameter 1/s.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = ["ConcavityClass", "grunbaum_bound", "s_mean"]


def s_mean(a: float, b: float, lam: float, s: float) -> float:
    """Generalized mean M_s(a, b; lam) of two nonnegative numbers.

    Case split: power mean for s > 0, and for s < 0 when a*b > 0; zero for
    s < 0 when a*b = 0; geometric mean at s = 0; min / max at s = -inf / inf.
    """
    if a < 0 or b < 0:
        raise ValueError("s_mean requires nonnegative inputs")
    if not 0.0 < lam < 1.0:
        raise ValueError("lam must lie in (0, 1)")
    if math.isinf(s):
        return max(a, b) if s > 0 else min(a, b)
    if s == 0.0:
        return a ** (1.0 - lam) * b**lam
    if s < 0.0 and a * b == 0.0:
        return 0.0
    if s > 0.0 and a * b == 0.0:
        # Power mean is still defined; 0^s = 0 for s > 0.
        return ((1.0 - lam) * a**s + lam * b**s) ** (1.0 / s)
    u, v = math.log(a), math.log(b)
    if abs(s) * (abs(u - v) + 1.0) < 5e-6:
        # Tiny |s|: the direct power mean loses ~eps/|s| relative accuracy
        # through the outer 1/s power; expand around the geometric mean
        # instead (the second-order cumulant term keeps monotonicity in s).
        m1 = (1.0 - lam) * u + lam * v
        var = (1.0 - lam) * lam * (u - v) ** 2
        return math.exp(m1 + 0.5 * s * var)
    return ((1.0 - lam) * math.exp(s * u) + lam * math.exp(s * v)) ** (1.0 / s)


@dataclass(frozen=True)
class ConcavityClass:
    """Tag for the hypothesis regime of a density or measure.

    kind is one of "positive", "log_concave", "negative", "s_concave";
    param holds N, None, beta, or s respectively; ambient_dim is only
    meaningful for the s-concave regime (validity s <= 1/n).
    """

    kind: str
    param: float | None = None
    ambient_dim: int = 1

    def __post_init__(self):
        if self.kind == "positive":
            if self.param is None or not self.param > 1.0:
                raise ValueError("positive regime requires N > 1")
        elif self.kind == "negative":
            if self.param is None or not self.param < -1.0:
                raise ValueError("negative regime requires beta < -1")
        elif self.kind == "log_concave":
            if self.param is not None:
                raise ValueError("log-concave regime carries no parameter")
        elif self.kind == "s_concave":
            n = self.ambient_dim
            if n < 1:
                raise ValueError("ambient dimension must be >= 1")
            if self.param is None or not (-1.0 < self.param <= 1.0 / n):
                raise ValueError(f"s must lie in (-1, 1/{n}]")
        else:
            raise ValueError(f"unknown concavity kind {self.kind!r}")

    # Constructors -----------------------------------------------------

    @staticmethod
    def positive(n: float) -> "ConcavityClass":
        return ConcavityClass("positive", float(n))

    @staticmethod
    def log_concave() -> "ConcavityClass":
        return ConcavityClass("log_concave", None)

    @staticmethod
    def negative(beta: float) -> "ConcavityClass":
        return ConcavityClass("negative", float(beta))

    @staticmethod
    def s_concave(s: float, ambient_dim: int) -> "ConcavityClass":
        return ConcavityClass("s_concave", float(s), int(ambient_dim))

    # Derived facts -----------------------------------------------------

    @property
    def bound(self) -> float:
        return grunbaum_bound(self)

    def one_dimensional(self) -> "ConcavityClass":
        """The regime of a 1-d marginal density of a measure in this class.

        An s-concave measure projects to a density whose q-th power is
        concave with q = s/(1-s), i.e. the 1-d regime with parameter 1/s.
        Regimes that already describe 1-d densities are returned unchanged.
        """
        if self.kind != "s_concave":
            return self
        s = self.param
        if s == 0.0:
            return ConcavityClass.log_concave()
        if s > 0.0:
            if 1.0 / s <= 1.0:
                raise ValueError("1-d regime undefined for s >= 1")
            return ConcavityClass.positive(1.0 / s)
        return ConcavityClass.negative(1.0 / s)

    def profile_exponent(self) -> float | None:
        """Exponent t with w^t tested for shape; None for the log transform."""
        cls = self.one_dimensional()
        if cls.kind == "log_concave":
            return None
        return 1.0 / (cls.param - 1.0)

    def expects_concave(self) -> bool:
        """True when the transformed profile must be concave (else convex)."""
        return self.one_dimensional().kind in ("positive", "log_concave")

    def transform_profile(self, w: np.ndarray) -> np.ndarray:
        """Apply the class transform to positive density values."""
        w = np.asarray(w, dtype=float)
        expo = self.profile_exponent()
        if expo is None:
            return np.log(w)
        return np.power(w, expo)

    def describe(self) -> str:
        cls = self
        if cls.kind == "positive":
            return f"positive(N={cls.param:g})"
        if cls.kind == "negative":
            return f"negative(beta={cls.param:g})"
        if cls.kind == "log_concave":
            return "log-concave"
        return f"s-concave(s={cls.param:g}, n={cls.ambient_dim})"

    def to_dict(self) -> dict:
        d: dict = {"kind": self.kind}
        if self.kind == "positive":
            d["N"] = self.param
        elif self.kind == "negative":
            d["beta"] = self.param
        elif self.kind == "s_concave":
            d["s"] = self.param
            d["dim"] = self.ambient_dim
        return d

    @staticmethod
    def from_dict(d: dict) -> "ConcavityClass":
        kind = d["kind"]
        if kind == "positive":
            return ConcavityClass.positive(d["N"])
        if kind == "negative":
            return ConcavityClass.negative(d["beta"])
        if kind == "log_concave":
            return ConcavityClass.log_concave()
        if kind == "s_concave":
            return ConcavityClass.s_concave(d["s"], d["dim"])
        raise ValueError(f"unknown concavity kind {kind!r}")


def grunbaum_bound(cls: ConcavityClass) -> float:
    """Sharp lower bound on either one-sided mass at the barycenter."""
    if cls.kind == "positive" or cls.kind == "negative":
        p = cls.param
        return (p / (p + 1.0)) ** p
    if cls.kind == "log_concave":
        return math.exp(-1.0)
    s = cls.param
    if s == 0.0:
        return math.exp(-1.0)
    return (1.0 / (1.0 + s)) ** (1.0 / s)
