"""One-dimensional densities: construction, moments, and transforms.

A Density1D bundles a support interval, a vectorized evaluator, and (for the
built-in families) a *moment kernel* that knows closed-form antiderivatives
of x^k w(x) for k = 0, 1, 2.  Everything downstream (CDF profiles, masses,
barycenters, stability certificates) reduces to ``integrate(lo, hi, k)``;
densities without a kernel fall back to adaptive quadrature, and the test
suite cross-checks the kernels against quadrature.

Families:

    uniform          w = 1 on [a, b]                        (mass b - a)
    cone             w = c (N/(N+1))^N (1 + cx/N)^(N-1)     on [-N/c, 1/c]
    exponential      w = c e^(cx - 1)                       on (-inf, 1/c]
    neg_cone         cone formula with N < -1               on (-inf, 1/c]
    polynomial       nonnegative polynomial on [a, b]
    gaussian         restricted Gaussian
    tabulated        piecewise-linear through given knots
    plpow / plexp    PL profile to a power / exp of a PL exponent

The cone, exponential, and neg_cone families are the extremal profiles of
the halfspace-mass inequality for their regimes; each is normalized with
zero barycenter by construction (verified by quadrature in the tests).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np
from scipy.optimize import brentq
from scipy.special import erf

from .concavity import ConcavityClass
from .quadrature import (
    DivergentIntegralError,
    adaptive_simpson,
    cell_integrals,
    effective_interval,
    integrate_with_tails,
)

__all__ = [
    "Density1D",
    "Interval",
    "barycenter_1d",
    "cone_density",
    "exp_density",
    "gaussian_density",
    "make_density",
    "neg_cone_density",
    "normalize",
    "plexp_density",
    "plpow_density",
    "polynomial_density",
    "random_class_density",
    "recenter",
    "tabulated_density",
    "truncate_normalize",
    "uniform_density",
]


@dataclass(frozen=True)
class Interval:
    """Support interval (lower, upper); either endpoint may be infinite."""

    lower: float
    upper: float

    def __post_init__(self):
        if not self.lower < self.upper:
            raise ValueError(f"empty interval [{self.lower}, {self.upper}]")

    @property
    def bounded(self) -> bool:
        return math.isfinite(self.lower) and math.isfinite(self.upper)

    def contains(self, x, closed: bool = True):
        x = np.asarray(x, dtype=float)
        if closed:
            return (x >= self.lower) & (x <= self.upper)
        return (x > self.lower) & (x < self.upper)


# ---------------------------------------------------------------------------
# Moment kernels: vectorized prefix integrals M_k(x) = int_{lower}^x u^k w(u) du
# ---------------------------------------------------------------------------


class _Kernel:
    def prefix(self, x: np.ndarray, k: int) -> np.ndarray:
        raise NotImplementedError

    def total(self, k: int) -> float:
        raise NotImplementedError

    def scaled(self, factor: float) -> "_Kernel":
        raise NotImplementedError


def _binom(k: int, j: int) -> float:
    return float(math.comb(k, j))


class PowerKernel(_Kernel):
    """w(x) = coef * (alpha_j + beta_j x)^p on segment j of a knot partition.

    Covers uniform (p arbitrary, beta=0), tabulated piecewise-linear (p=1),
    the cone and negative-cone extremal families (single segment), and
    powers of piecewise-linear profiles.  The affine argument must stay
    nonnegative on every segment.
    """

    def __init__(self, knots, alphas, betas, p, coef):
        self.knots = np.asarray(knots, dtype=float)
        self.alphas = np.asarray(alphas, dtype=float)
        self.betas = np.asarray(betas, dtype=float)
        self.p = float(p)
        self.coef = float(coef)
        self._cums: dict[int, np.ndarray] = {}

    def _moment(self, a, b, lo, hi, k: int):
        """Integral of u^k (a + b u)^p over [lo, hi], elementwise in a, b.

        Infinite endpoints are admissible only where a + b x -> +inf with a
        fast-decaying power (p + k + 1 < 0); otherwise the moment diverges.
        """
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        lo = np.broadcast_to(np.asarray(lo, dtype=float), a.shape).astype(float)
        hi = np.broadcast_to(np.asarray(hi, dtype=float), a.shape).astype(float)
        p = self.p
        out = np.zeros(a.shape, dtype=float)

        flat = b == 0.0
        if np.any(flat):
            if np.any(~np.isfinite(lo[flat])) or np.any(~np.isfinite(hi[flat])):
                raise DivergentIntegralError("flat segment on an unbounded interval")
            af = a[flat]
            vals = np.where(af > 0, af, 1.0) ** p
            vals = np.where(af > 0, vals, 0.0 if p > 0 else np.inf)
            if np.any(~np.isfinite(vals)):
                raise DivergentIntegralError("flat segment with negative power at zero")
            out[flat] = vals * (hi[flat] ** (k + 1) - lo[flat] ** (k + 1)) / (k + 1)

        sl = ~flat
        if np.any(sl):
            aa, bb, ll, hh = a[sl], b[sl], lo[sl], hi[sl]
            lo_inf = ~np.isfinite(ll)
            hi_inf = ~np.isfinite(hh)
            if np.any(lo_inf | hi_inf):
                # An infinite endpoint is admissible only where a + b x -> +inf.
                def _adm(x_):
                    return (
                        np.isfinite(x_)
                        | (np.isneginf(x_) & (bb < 0))
                        | (np.isposinf(x_) & (bb > 0))
                    )

                if not np.all(_adm(ll) & _adm(hh)):
                    raise DivergentIntegralError("affine argument negative at infinity")
                # A genuinely unbounded span (endpoints not equal) needs decay.
                span_inf = (lo_inf | hi_inf) & ~(ll == hh)
                if np.any(span_inf) and p + k + 1 >= 0:
                    raise DivergentIntegralError("moment diverges on unbounded segment")
            else:
                span_inf = np.zeros(aa.shape, dtype=bool)
            acc = np.zeros(aa.shape, dtype=float)
            for j in range(k + 1):
                q = p + j + 1
                cterm = _binom(k, j) * (-aa) ** (k - j) / bb ** (k + 1)
                if q == 0.0:
                    if np.any(span_inf):
                        raise DivergentIntegralError("logarithmic divergence at infinity")
                    ul = np.maximum(aa + bb * np.where(lo_inf, 0.0, ll), 1e-300)
                    uh = np.maximum(aa + bb * np.where(hi_inf, 0.0, hh), 1e-300)
                    term = np.log(uh) - np.log(ul)
                    term = np.where(lo_inf & hi_inf, 0.0, term)
                    acc += cterm * term
                else:
                    # u^q, with value 0 at an infinite end (only reached with q<0
                    # on a true span; for empty spans both sides cancel to 0)
                    ql = np.maximum(aa + bb * np.where(lo_inf, 0.0, ll), 0.0) ** q
                    qh = np.maximum(aa + bb * np.where(hi_inf, 0.0, hh), 0.0) ** q
                    ql = np.where(lo_inf, 0.0, ql)
                    qh = np.where(hi_inf, 0.0, qh)
                    acc += cterm * (qh - ql) / q
            out[sl] = acc
        return self.coef * out

    def _cum(self, k: int) -> np.ndarray:
        if k not in self._cums:
            parts = self._moment(self.alphas, self.betas, self.knots[:-1], self.knots[1:], k)
            self._cums[k] = np.concatenate([[0.0], np.cumsum(parts)])
        return self._cums[k]

    def prefix(self, x, k: int):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        xc = np.clip(x, self.knots[0], self.knots[-1])
        seg = np.clip(np.searchsorted(self.knots, xc, side="right") - 1, 0, len(self.alphas) - 1)
        cum = self._cum(k)
        partial = self._moment(self.alphas[seg], self.betas[seg], self.knots[seg], xc, k)
        return cum[seg] + partial

    def total(self, k: int) -> float:
        return float(self._cum(k)[-1])

    def scaled(self, factor: float) -> "PowerKernel":
        return PowerKernel(self.knots, self.alphas, self.betas, self.p, self.coef * factor)


class ExpKernel(_Kernel):
    """w(x) = exp(a_j + b_j x) on segment j; covers exponential-family and
    exp of piecewise-linear (log-concave) profiles."""

    def __init__(self, knots, aa, bb):
        self.knots = np.asarray(knots, dtype=float)
        self.aa = np.asarray(aa, dtype=float)
        self.bb = np.asarray(bb, dtype=float)
        self._cums: dict[int, np.ndarray] = {}

    def _anti(self, a, b, x, k: int):
        """Antiderivative of u^k e^(a + b u) at x, elementwise in a, b.

        The value is 0 at an infinite end where the exponential decays;
        flat (b = 0) segments or wrong-sign infinities diverge.
        """
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        x = np.broadcast_to(np.asarray(x, dtype=float), a.shape).astype(float)
        inf_mask = ~np.isfinite(x)
        if np.any(inf_mask):
            bad = inf_mask & (
                (b == 0.0) | (np.isneginf(x) & (b < 0)) | (np.isposinf(x) & (b > 0))
            )
            if np.any(bad):
                raise DivergentIntegralError("exponential moment diverges")
        out = np.empty(a.shape, dtype=float)
        flat = b == 0.0
        if np.any(flat):
            out[flat] = np.exp(a[flat]) * x[flat] ** (k + 1) / (k + 1)
        sl = ~flat
        if np.any(sl):
            bb = b[sl]
            xf = np.where(inf_mask[sl], 0.0, x[sl])
            e = np.exp(a[sl] + bb * xf)
            if k == 0:
                poly = 1.0 / bb
            elif k == 1:
                poly = xf / bb - 1.0 / bb**2
            else:
                poly = xf**2 / bb - 2.0 * xf / bb**2 + 2.0 / bb**3
            out[sl] = np.where(inf_mask[sl], 0.0, e * poly)
        return out

    def _cum(self, k: int) -> np.ndarray:
        if k not in self._cums:
            parts = self._anti(self.aa, self.bb, self.knots[1:], k) - self._anti(
                self.aa, self.bb, self.knots[:-1], k
            )
            self._cums[k] = np.concatenate([[0.0], np.cumsum(parts)])
        return self._cums[k]

    def prefix(self, x, k: int):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        xc = np.clip(x, self.knots[0], self.knots[-1])
        seg = np.clip(np.searchsorted(self.knots, xc, side="right") - 1, 0, len(self.aa) - 1)
        cum = self._cum(k)
        a, b = self.aa[seg], self.bb[seg]
        partial = self._anti(a, b, xc, k) - self._anti(a, b, self.knots[seg], k)
        return cum[seg] + partial

    def total(self, k: int) -> float:
        return float(self._cum(k)[-1])

    def scaled(self, factor: float) -> "ExpKernel":
        if factor <= 0:
            raise ValueError("scale factor must be positive")
        return ExpKernel(self.knots, self.aa + math.log(factor), self.bb)


class GaussKernel(_Kernel):
    """w(x) = coef * exp(-(x - m)^2 / (2 s^2)) restricted to [lo, hi]."""

    def __init__(self, m, s, lo, hi, coef):
        self.m, self.s, self.lo, self.hi, self.coef = (
            float(m),
            float(s),
            float(lo),
            float(hi),
            float(coef),
        )

    def _anti(self, x, k: int):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        z = (x - self.m) / self.s
        g = math.sqrt(math.pi / 2.0) * (1.0 + erf(z / math.sqrt(2.0)))
        phi = np.exp(-0.5 * z * z)  # 0 at infinite z, no NaN
        m, s = self.m, self.s
        if k == 0:
            core = g
        elif k == 1:
            core = m * g - s * phi
        else:
            zz = np.where(np.isfinite(z), z, 0.0)
            core = (m**2 + s**2) * g - s * (2.0 * m + s * zz) * phi
        return self.coef * self.s * core

    def prefix(self, x, k: int):
        x = np.clip(np.atleast_1d(np.asarray(x, dtype=float)), self.lo, self.hi)
        return self._anti(x, k) - self._anti(self.lo, k)

    def total(self, k: int) -> float:
        return float((self._anti(self.hi, k) - self._anti(self.lo, k)).reshape(-1)[0])

    def scaled(self, factor: float) -> "GaussKernel":
        return GaussKernel(self.m, self.s, self.lo, self.hi, self.coef * factor)


class PolyKernel(_Kernel):
    """Polynomial density on a bounded interval."""

    def __init__(self, coeffs, lo, hi):
        self.coeffs = np.asarray(coeffs, dtype=float)  # highest power first
        self.lo, self.hi = float(lo), float(hi)
        self._anti = {
            k: np.polyint(np.polymul(self.coeffs, [1.0] + [0.0] * k)) for k in range(3)
        }

    def prefix(self, x, k: int):
        x = np.clip(np.atleast_1d(np.asarray(x, dtype=float)), self.lo, self.hi)
        return np.polyval(self._anti[k], x) - np.polyval(self._anti[k], self.lo)

    def total(self, k: int) -> float:
        return float(np.polyval(self._anti[k], self.hi) - np.polyval(self._anti[k], self.lo))

    def scaled(self, factor: float) -> "PolyKernel":
        return PolyKernel(self.coeffs * factor, self.lo, self.hi)


class AffineKernel(_Kernel):
    """Kernel of the pushforward of a density under x -> scale*x + shift."""

    def __init__(self, base: _Kernel, scale: float, shift: float):
        if scale == 0.0:
            raise ValueError("scale must be nonzero")
        self.base, self.scale, self.shift = base, float(scale), float(shift)

    def _inner_point(self, y):
        return (np.asarray(y, dtype=float) - self.shift) / self.scale

    def prefix(self, y, k: int):
        t, s = self.scale, self.shift
        u = np.atleast_1d(self._inner_point(y))
        acc = np.zeros(u.shape, dtype=float)
        for j in range(k + 1):
            coeff = _binom(k, j) * t**j * s ** (k - j)
            if t > 0:
                acc = acc + coeff * self.base.prefix(u, j)
            else:
                acc = acc + coeff * (self.base.total(j) - self.base.prefix(u, j))
        return acc

    def total(self, k: int) -> float:
        t, s = self.scale, self.shift
        return float(
            sum(_binom(k, j) * t**j * s ** (k - j) * self.base.total(j) for j in range(k + 1))
        )

    def scaled(self, factor: float) -> "AffineKernel":
        return AffineKernel(self.base.scaled(factor * abs(self.scale)), self.scale, self.shift)


class RestrictedKernel(_Kernel):
    """Kernel of scale * w restricted to [lo, hi]."""

    def __init__(self, base: _Kernel, lo: float, hi: float, scale: float = 1.0):
        self.base, self.lo, self.hi, self.scale = base, float(lo), float(hi), float(scale)

    def prefix(self, x, k: int):
        x = np.clip(np.atleast_1d(np.asarray(x, dtype=float)), self.lo, self.hi)
        return self.scale * (self.base.prefix(x, k) - self.base.prefix(self.lo, k))

    def total(self, k: int) -> float:
        diff = self.base.prefix(self.hi, k) - self.base.prefix(self.lo, k)
        return float(self.scale * np.reshape(diff, -1)[0])

    def scaled(self, factor: float) -> "RestrictedKernel":
        return RestrictedKernel(self.base, self.lo, self.hi, self.scale * factor)


# ---------------------------------------------------------------------------
# Density1D
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Density1D:
    """Immutable one-dimensional density.

    ``mass`` records the total integral at construction time; use
    :func:`normalize` for the probability rescaling.  ``knots`` is set for
    piecewise families (class checks for tabulated data are knot-determined).
    """

    support: Interval
    pdf: Callable[[np.ndarray], np.ndarray]
    mass: float
    family: str = "custom"
    params: dict = field(default_factory=dict)
    kernel: _Kernel | None = None
    knots: np.ndarray | None = None

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        scalar = x.ndim == 0
        x = np.atleast_1d(x)
        out = np.zeros_like(x)
        inside = self.support.contains(x)
        if np.any(inside):
            out[inside] = np.maximum(np.asarray(self.pdf(x[inside]), dtype=float), 0.0)
        return float(out[0]) if scalar else out

    # -- integration ----------------------------------------------------

    def integrate(self, lo: float, hi: float, k: int = 0) -> float:
        """Integral of x^k w(x) over [lo, hi] (clipped to the support)."""
        lo = max(lo, self.support.lower)
        hi = min(hi, self.support.upper)
        if not lo < hi:
            return 0.0
        if self.kernel is not None:
            diff = self.kernel.prefix(np.asarray(hi), k) - self.kernel.prefix(np.asarray(lo), k)
            return float(np.reshape(diff, -1)[0])
        f = (lambda x: self(x)) if k == 0 else (lambda x: x**k * self(x))
        value, _ = integrate_with_tails(f, lo, hi, rel_floor=max(self.mass, 1e-12))
        return value

    def moment(self, k: int = 0) -> float:
        return self.integrate(self.support.lower, self.support.upper, k)

    def cdf_values(self, xs: np.ndarray) -> np.ndarray:
        """Cumulative integral of w from the lower end of the support."""
        xs = np.asarray(xs, dtype=float)
        if self.kernel is not None:
            return np.asarray(self.kernel.prefix(xs, 0), dtype=float)
        order = np.argsort(xs, kind="stable")
        sx = np.clip(xs[order], self.support.lower, self.support.upper)
        lo, _ = effective_interval(self, self.support.lower, self.support.upper, self.mass)
        edges = np.concatenate([[min(lo, sx[0] if np.isfinite(sx[0]) else lo)], sx])
        edges = np.maximum.accumulate(edges)
        vals = np.cumsum(cell_integrals(self, edges))
        out = np.empty_like(vals)
        out[order] = vals
        return out

    # -- transforms -----------------------------------------------------

    def affine_image(self, scale: float, shift: float) -> "Density1D":
        """Density of scale*X + shift for X distributed with this density."""
        if scale == 0.0:
            raise ValueError("scale must be nonzero")
        pts = sorted([scale * self.support.lower + shift, scale * self.support.upper + shift])
        sup = Interval(pts[0], pts[1])
        base_pdf = self.pdf
        inv = 1.0 / scale
        absinv = abs(inv)

        def pdf(x):
            return np.asarray(base_pdf((np.asarray(x, dtype=float) - shift) * inv)) * absinv

        kern = AffineKernel(self.kernel, scale, shift) if self.kernel is not None else None
        kn = None
        if self.knots is not None:
            kn = np.sort(scale * self.knots + shift)
        return Density1D(sup, pdf, self.mass, self.family, dict(self.params), kern, kn)

    def translated(self, shift: float) -> "Density1D":
        return self.affine_image(1.0, shift)

    def dilated(self, t: float) -> "Density1D":
        if t <= 0:
            raise ValueError("dilation factor must be positive")
        return self.affine_image(t, 0.0)

    def reflected(self) -> "Density1D":
        return self.affine_image(-1.0, 0.0)


def normalize(d: Density1D) -> Density1D:
    """Rescale to unit mass.  Idempotent within floating-point accuracy."""
    if not (d.mass > 0 and math.isfinite(d.mass)):
        raise ValueError("cannot normalize a density with nonpositive or infinite mass")
    if abs(d.mass - 1.0) < 1e-15:
        return d
    scale = 1.0 / d.mass
    base_pdf = d.pdf

    def pdf(x):
        return np.asarray(base_pdf(x), dtype=float) * scale

    kern = d.kernel.scaled(scale) if d.kernel is not None else None
    return replace(d, pdf=pdf, mass=1.0, kernel=kern)


def barycenter_1d(d: Density1D) -> float:
    """First moment of a normalized density; raises on divergence."""
    return d.moment(1) / d.mass


def recenter(d: Density1D) -> Density1D:
    """Translate so the barycenter sits at zero."""
    return d.translated(-barycenter_1d(d))


def truncate_normalize(d: Density1D, k: float) -> Density1D:
    """Restrict an unbounded density to a zero-barycenter window of reach k.

    The infinite side is cut at distance ``k`` and the opposite cut is found
    by monotone root-finding so that the restricted, renormalized density is
    centered.  Bounded densities are returned unchanged.
    """
    if k <= 0:
        raise ValueError("truncation level must be positive")
    lo, hi = d.support.lower, d.support.upper
    if d.support.bounded:
        return d

    if math.isinf(hi):
        upper_cut = k
        if not upper_cut > max(lo, 0.0):
            raise ValueError("truncation level does not reach past the barycenter")

        def g(s):
            return d.integrate(s, upper_cut, 1)

        left_edge = lo if math.isfinite(lo) else effective_interval(d, lo, upper_cut, d.mass)[0]
        if g(left_edge) >= 0.0:
            raise ValueError("no admissible lower cut: mass below the level is insufficient")
        lower_cut = brentq(g, left_edge, -1e-300, xtol=1e-14)
    else:
        lower_cut = -k
        if not lower_cut < min(hi, 0.0):
            raise ValueError("truncation level does not reach past the barycenter")

        def g(s):
            return d.integrate(lower_cut, s, 1)

        if g(hi) <= 0.0:
            raise ValueError("no admissible upper cut: mass above the level is insufficient")
        upper_cut = brentq(g, 1e-300, hi, xtol=1e-14)

    m = d.integrate(lower_cut, upper_cut, 0)
    if m <= 0:
        raise ValueError("truncated window carries no mass")
    sup = Interval(lower_cut, upper_cut)
    base_pdf = d.pdf
    scale = 1.0 / m

    def pdf(x):
        return np.asarray(base_pdf(x), dtype=float) * scale

    kern = RestrictedKernel(d.kernel, lower_cut, upper_cut, scale) if d.kernel else None
    kn = None
    if d.knots is not None:
        inner = d.knots[(d.knots > lower_cut) & (d.knots < upper_cut)]
        kn = np.concatenate([[lower_cut], inner, [upper_cut]])
    params = dict(d.params)
    params["truncated_to"] = (lower_cut, upper_cut)
    return Density1D(sup, pdf, 1.0, d.family, params, kern, kn)


# ---------------------------------------------------------------------------
# Families
# ---------------------------------------------------------------------------


def uniform_density(a: float, b: float) -> Density1D:
    """w = 1 on [a, b]; mass b - a (normalize for the probability version)."""
    sup = Interval(a, b)
    if not sup.bounded:
        raise ValueError("uniform density needs a bounded interval")
    kern = PowerKernel([a, b], [1.0], [0.0], 1.0, 1.0)
    return Density1D(
        sup,
        lambda x: np.ones_like(np.asarray(x, dtype=float)),
        b - a,
        "uniform",
        {"a": a, "b": b},
        kern,
        np.array([a, b]),
    )


def _oriented(d: Density1D, orientation: str) -> Density1D:
    if orientation == "left-apex":
        return d
    if orientation == "right-apex":
        r = d.reflected()
        return replace(r, family=d.family, params={**d.params, "orientation": "right-apex"})
    raise ValueError("orientation must be 'left-apex' or 'right-apex'")


def cone_density(n: float, c: float, orientation: str = "left-apex") -> Density1D:
    """Extremal profile for the positive regime: the cone-power density.

    w(x) = c (N/(N+1))^N (1 + cx/N)^(N-1) on [-N/c, 1/c]; normalized with
    zero barycenter, apex (vanishing end) at the left endpoint.
    """
    if not (n > 1 and c > 0):
        raise ValueError("cone density requires N > 1 and c > 0")
    coef = c * (n / (n + 1.0)) ** n
    sup = Interval(-n / c, 1.0 / c)
    kern = PowerKernel([sup.lower, sup.upper], [1.0], [c / n], n - 1.0, coef)

    def pdf(x):
        u = np.maximum(1.0 + (c / n) * np.asarray(x, dtype=float), 0.0)
        return coef * u ** (n - 1.0)

    d = Density1D(sup, pdf, 1.0, "cone", {"N": n, "c": c, "orientation": "left-apex"}, kern)
    return _oriented(d, orientation)


def exp_density(c: float, orientation: str = "left-apex") -> Density1D:
    """Extremal profile for the log-concave regime: w(x) = c e^(cx-1) on (-inf, 1/c]."""
    if not c > 0:
        raise ValueError("exponential density requires c > 0")
    sup = Interval(-math.inf, 1.0 / c)
    kern = ExpKernel([-math.inf, 1.0 / c], [math.log(c) - 1.0], [c])

    def pdf(x):
        return c * np.exp(c * np.asarray(x, dtype=float) - 1.0)

    d = Density1D(sup, pdf, 1.0, "exponential", {"c": c, "orientation": "left-apex"}, kern)
    return _oriented(d, orientation)


def neg_cone_density(n: float, c: float, orientation: str = "left-apex") -> Density1D:
    """Extremal heavy-tailed profile for the negative regime (beta = n < -1).

    Same cone formula with negative exponent, supported on (-inf, 1/c].
    The first moment is finite for n < -1; the second only for n < -2.
    """
    if not (n < -1 and c > 0):
        raise ValueError("negative-cone density requires N < -1 and c > 0")
    coef = c * (n / (n + 1.0)) ** n
    sup = Interval(-math.inf, 1.0 / c)
    kern = PowerKernel([-math.inf, 1.0 / c], [1.0], [c / n], n - 1.0, coef)

    def pdf(x):
        u = 1.0 + (c / n) * np.asarray(x, dtype=float)
        return coef * u ** (n - 1.0)

    d = Density1D(
        sup,
        pdf,
        1.0,
        "neg_cone",
        {
            "N": n,
            "c": c,
            "orientation": "left-apex",
            "second_moment_finite": bool(n < -2),
        },
        kern,
    )
    return _oriented(d, orientation)


def polynomial_density(coeffs, a: float, b: float) -> Density1D:
    """Polynomial w on [a, b] (highest power first); must be nonnegative."""
    sup = Interval(a, b)
    if not sup.bounded:
        raise ValueError("polynomial density needs a bounded interval")
    coeffs = np.asarray(coeffs, dtype=float)
    probe = np.linspace(a, b, 4097)
    vals = np.polyval(coeffs, probe)
    if np.min(vals) < -1e-12 * max(1.0, np.max(np.abs(vals))):
        raise ValueError("polynomial is negative on the support")
    kern = PolyKernel(coeffs, a, b)
    return Density1D(
        sup,
        lambda x: np.maximum(np.polyval(coeffs, np.asarray(x, dtype=float)), 0.0),
        kern.total(0),
        "polynomial",
        {"coeffs": list(map(float, coeffs)), "a": a, "b": b},
        kern,
    )


def gaussian_density(mean: float, sigma: float, a: float = -math.inf, b: float = math.inf) -> Density1D:
    """Gaussian restricted to [a, b]; mass is the contained probability."""
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    coef = 1.0 / (sigma * math.sqrt(2.0 * math.pi))
    sup = Interval(a, b)
    kern = GaussKernel(mean, sigma, a, b, coef)

    def pdf(x):
        z = (np.asarray(x, dtype=float) - mean) / sigma
        return coef * np.exp(-0.5 * z**2)

    return Density1D(
        sup, pdf, kern.total(0), "gaussian", {"mean": mean, "sigma": sigma, "a": a, "b": b}, kern
    )


def _pl_coeffs(xs: np.ndarray, ys: np.ndarray):
    betas = np.diff(ys) / np.diff(xs)
    alphas = ys[:-1] - betas * xs[:-1]
    return alphas, betas


def tabulated_density(xs, ys) -> Density1D:
    """Piecewise-linear density through (xs, ys); ys must be finite and >= 0."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if xs.ndim != 1 or xs.size < 2:
        raise ValueError("need at least two knots")
    if not np.all(np.diff(xs) > 0):
        raise ValueError("knots must be strictly increasing")
    if not (np.all(np.isfinite(xs)) and np.all(np.isfinite(ys))):
        raise ValueError("non-finite values in tabulation")
    if np.min(ys) < 0:
        raise ValueError("negative values in tabulation")
    alphas, betas = _pl_coeffs(xs, ys)
    kern = PowerKernel(xs, alphas, betas, 1.0, 1.0)

    def pdf(x):
        return np.interp(np.asarray(x, dtype=float), xs, ys)

    return Density1D(
        Interval(xs[0], xs[-1]), pdf, kern.total(0), "tabulated", {}, kern, xs.copy()
    )


def plpow_density(xs, phi, expo: float) -> Density1D:
    """w = phi(x)^expo with phi piecewise linear through (xs, phi).

    The transformed profile w^(1/expo) is exactly the PL function phi, so
    class checks on these densities are knot-determined and exact.
    """
    xs = np.asarray(xs, dtype=float)
    phi = np.asarray(phi, dtype=float)
    if np.min(phi) < 0:
        raise ValueError("profile must be nonnegative")
    if expo < 0 and np.min(phi) <= 0:
        raise ValueError("negative power of a vanishing profile")
    alphas, betas = _pl_coeffs(xs, phi)
    kern = PowerKernel(xs, alphas, betas, expo, 1.0)

    def pdf(x):
        return np.maximum(np.interp(np.asarray(x, dtype=float), xs, phi), 0.0) ** expo

    return Density1D(
        Interval(xs[0], xs[-1]),
        pdf,
        kern.total(0),
        "plpow",
        {"exponent": float(expo)},
        kern,
        xs.copy(),
    )


def plexp_density(xs, psi) -> Density1D:
    """w = exp(-psi(x)) with psi piecewise linear through (xs, psi)."""
    xs = np.asarray(xs, dtype=float)
    psi = np.asarray(psi, dtype=float)
    alphas, betas = _pl_coeffs(xs, psi)
    kern = ExpKernel(xs, -alphas, -betas)

    def pdf(x):
        return np.exp(-np.interp(np.asarray(x, dtype=float), xs, psi))

    return Density1D(
        Interval(xs[0], xs[-1]), pdf, kern.total(0), "plexp", {}, kern, xs.copy()
    )


def make_density(spec: dict) -> Density1D:
    """Build a density from a specification document.

    Expected shape: {"family": str, "params": {...}, "support": [a, b],
    "grid": [...], "values": [...]} with grid/values only for "tabulated".
    """
    if not isinstance(spec, dict) or "family" not in spec:
        raise ValueError("density spec must be a mapping with a 'family' key")
    family = spec["family"]
    params = spec.get("params", {})
    support = spec.get("support")

    def _sup(default=(-math.inf, math.inf)):
        if support is None:
            return default
        a = -math.inf if support[0] is None else float(support[0])
        b = math.inf if support[1] is None else float(support[1])
        return a, b

    if family == "uniform":
        a, b = _sup()
        return uniform_density(a, b)
    if family == "cone":
        return cone_density(
            params["N"], params["c"], params.get("orientation", "left-apex")
        )
    if family == "exponential":
        return exp_density(params["c"], params.get("orientation", "left-apex"))
    if family == "neg_cone":
        return neg_cone_density(
            params["N"], params["c"], params.get("orientation", "left-apex")
        )
    if family == "polynomial":
        a, b = _sup()
        return polynomial_density(params["coeffs"], a, b)
    if family == "gaussian":
        a, b = _sup()
        return gaussian_density(params.get("mean", 0.0), params.get("sigma", 1.0), a, b)
    if family == "tabulated":
        if "grid" not in spec or "values" not in spec:
            raise ValueError("tabulated spec needs 'grid' and 'values'")
        return tabulated_density(spec["grid"], spec["values"])
    raise ValueError(f"unknown density family {family!r}")


# ---------------------------------------------------------------------------
# Random class-valid densities (for randomized verification suites)
# ---------------------------------------------------------------------------


def _random_pl(rng: np.random.Generator, concave: bool, interval=(-1.0, 1.0), floor_frac=None):
    """Random positive piecewise-linear profile, concave or convex."""
    a, b = interval
    nseg = int(rng.integers(3, 8))
    inner = np.sort(rng.uniform(a, b, size=nseg - 1))
    xs = np.concatenate([[a], inner, [b]])
    slopes = np.sort(rng.normal(0.0, 1.0, size=nseg))
    if concave:
        slopes = slopes[::-1]
    ys = np.concatenate([[0.0], np.cumsum(slopes * np.diff(xs))])
    span = np.ptp(ys) + 0.1
    lift = (rng.uniform(0.3, 0.8) if floor_frac is None else floor_frac) * span
    ys = ys - np.min(ys) + lift
    return xs, ys


def random_class_density(
    cls: ConcavityClass, rng: np.random.Generator, interval=(-1.0, 1.0)
) -> Density1D:
    """Normalized, centered density that satisfies the given regime exactly.

    Positive regime: a random concave PL profile raised to the N-1 power;
    negative: a convex profile to the (negative) N-1 power; log-concave:
    exp(-psi) with psi a random convex PL exponent.
    """
    one = cls.one_dimensional()
    if one.kind == "positive":
        xs, phi = _random_pl(rng, concave=True, interval=interval, floor_frac=float(rng.uniform(0.05, 0.6)))
        d = plpow_density(xs, phi, one.param - 1.0)
    elif one.kind == "negative":
        xs, phi = _random_pl(rng, concave=False, interval=interval)
        d = plpow_density(xs, phi, one.param - 1.0)
    else:
        xs, psi = _random_pl(rng, concave=False, interval=interval, floor_frac=0.0)
        d = plexp_density(xs, rng.uniform(0.5, 3.0) * psi)
    return recenter(normalize(d))
