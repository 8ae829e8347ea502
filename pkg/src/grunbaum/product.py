"""Split spaces R x Y with a finite weighted fiber set Y.

A ProductDensity stores rho(t, y) on a t-grid (piecewise linear in t) over
finitely many fibers with positive weights n_y.  Everything the verified
identities need flows through the pushforward onto the line,

    w(t) = sum_y rho(t, y) n_y,

so no fiber geometry enters: sublevel masses, the zero-mean identity for
the first coordinate, and class checks all reduce to one-dimensional work
on w.  Needle decompositions are never synthesized except in the separable
case rho = w(t) g(y), where the vertical lines trivially inherit the zero
mean; supplied decompositions are verified instead.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .classify import ClassReport, check_class
from .concavity import ConcavityClass, grunbaum_bound
from .density import Density1D, normalize, tabulated_density
from .profile import cdf_profile
from .verify1d import (
    PreconditionError,
    VerificationReport,
    model_cdf,
    rigidity_detect,
    verify_grunbaum_1d,
)

__all__ = [
    "FiberSpace",
    "Needle",
    "NeedleDecomposition",
    "NeedleReport",
    "ProductDensity",
    "PushforwardClassReport",
    "RigidityProfileReport",
    "barycenter_busemann",
    "busemann_mass",
    "check_pushforward_class",
    "cylinder_fixture",
    "needle_verify",
    "pushforward_busemann",
    "recenter_product",
    "rigidity_profile_check",
    "separable_needles",
    "separable_product",
    "verify_main_theorem",
]


@dataclass(frozen=True)
class FiberSpace:
    """Finite weighted fiber set (Y, n); the metric is optional metadata."""

    weights: np.ndarray
    labels: tuple = ()
    metric: np.ndarray | None = None

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        object.__setattr__(self, "weights", w)
        if w.ndim != 1 or w.size == 0 or np.any(w <= 0):
            raise ValueError("fiber weights must be a nonempty positive vector")
        if not self.labels:
            object.__setattr__(self, "labels", tuple(range(w.size)))
        if len(self.labels) != w.size:
            raise ValueError("labels and weights must have equal length")
        if self.metric is not None:
            m = np.asarray(self.metric, dtype=float)
            if m.shape != (w.size, w.size):
                raise ValueError("metric table must be square over the fibers")
            if not np.allclose(m, m.T, atol=1e-12):
                raise ValueError("metric table must be symmetric")
            if np.any(np.diag(m) != 0):
                raise ValueError("metric diagonal must vanish")
            # triangle inequality on the finite set
            for k in range(w.size):
                if np.any(m > m[:, k][:, None] + m[k, :][None, :] + 1e-12):
                    raise ValueError("metric table violates the triangle inequality")
            object.__setattr__(self, "metric", m)

    @property
    def size(self) -> int:
        return self.weights.size

    @property
    def total_weight(self) -> float:
        return float(np.sum(self.weights))


@dataclass(frozen=True)
class ProductDensity:
    """Density rho(t, y) on R x Y, piecewise linear in t per fiber."""

    t_grid: np.ndarray
    fiber: FiberSpace
    values: np.ndarray  # shape (len(t_grid), fiber.size), nonnegative
    cls: ConcavityClass | None = None

    def __post_init__(self):
        t = np.asarray(self.t_grid, dtype=float)
        v = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "t_grid", t)
        object.__setattr__(self, "values", v)
        if t.ndim != 1 or t.size < 2 or not np.all(np.diff(t) > 0):
            raise ValueError("t_grid must be strictly increasing with >= 2 points")
        if v.shape != (t.size, self.fiber.size):
            raise ValueError("values must have shape (len(t_grid), n_fibers)")
        if np.any(v < 0) or not np.all(np.isfinite(v)):
            raise ValueError("density values must be finite and nonnegative")

    @property
    def mass(self) -> float:
        col = np.trapezoid(self.values, self.t_grid, axis=0)
        return float(np.sum(col * self.fiber.weights))

    def normalized(self) -> "ProductDensity":
        m = self.mass
        if m <= 0:
            raise ValueError("cannot normalize a product density with zero mass")
        return ProductDensity(self.t_grid, self.fiber, self.values / m, self.cls)

    def fiber_masses(self) -> np.ndarray:
        """mu-mass carried by each vertical fiber line: n_y * int rho(., y)."""
        return np.trapezoid(self.values, self.t_grid, axis=0) * self.fiber.weights


def pushforward_busemann(pd: ProductDensity) -> Density1D:
    """Density of the first coordinate: w(t) = sum_y rho(t, y) n_y."""
    return tabulated_density(pd.t_grid, pd.values @ pd.fiber.weights)


def busemann_mass(pd: ProductDensity, r: float, side: str = "le") -> float:
    """Mass of the sublevel {t <= r} or superlevel {t >= r} slab."""
    w = pushforward_busemann(pd)
    if side == "le":
        return w.integrate(w.support.lower, r, 0)
    if side == "ge":
        return w.integrate(r, w.support.upper, 0)
    raise ValueError("side must be 'le' or 'ge'")


def barycenter_busemann(pd: ProductDensity, verify: bool = False, tol: float = 1e-10) -> float:
    """First moment of the pushforward; with verify=True assert it vanishes."""
    w = pushforward_busemann(pd)
    bary = w.moment(1) / w.mass
    if verify and abs(bary) > tol:
        raise PreconditionError(f"first coordinate has nonzero mean {bary:.3e}")
    return bary


def recenter_product(pd: ProductDensity) -> ProductDensity:
    """Translate the t-grid so the first-coordinate mean is zero."""
    bary = barycenter_busemann(pd)
    return ProductDensity(pd.t_grid - bary, pd.fiber, pd.values, pd.cls)


@dataclass(frozen=True)
class PushforwardClassReport:
    pushforward: ClassReport
    fiber_failures: list
    passed: bool

    def to_dict(self) -> dict:
        return {
            "pushforward": self.pushforward.to_dict(),
            "fiber_failures": list(self.fiber_failures),
            "passed": self.passed,
        }


def check_pushforward_class(pd: ProductDensity, tol: float = 1e-8) -> PushforwardClassReport:
    """Class membership of the pushforward, with garbage-in detection.

    Each fiber profile rho(., y) is checked first (a necessary condition
    along vertical lines); failures there are reported before any verdict
    on w itself.
    """
    if pd.cls is None:
        raise ValueError("product density carries no class tag")
    failures = []
    for j in range(pd.fiber.size):
        col = pd.values[:, j]
        if not np.any(col > 0):
            continue
        rep = check_class(tabulated_density(pd.t_grid, col), pd.cls, tol)
        if not rep.passed:
            failures.append(
                {"fiber": pd.fiber.labels[j], "worst": rep.worst_violation, "reason": rep.reason}
            )
    push = check_class(pushforward_busemann(pd), pd.cls, tol)
    return PushforwardClassReport(push, failures, push.passed and not failures)


def verify_main_theorem(pd: ProductDensity, tol: float = 1e-8) -> VerificationReport:
    """Both sublevel masses at 0 against the class bound, via the pushforward."""
    if pd.cls is None:
        raise ValueError("product density carries no class tag")
    if abs(pd.mass - 1.0) > 1e-8:
        raise PreconditionError("product density must be normalized")
    w = normalize(pushforward_busemann(pd))
    return verify_grunbaum_1d(w, pd.cls, tol)


# ---------------------------------------------------------------------------
# Needles
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Needle:
    """One vertical line of the decomposition with its quotient weight."""

    weight: float
    density: Density1D
    label: object = None

    def __post_init__(self):
        if not self.weight > 0:
            raise ValueError("needle weight must be positive")
        if abs(self.density.mass - 1.0) > 1e-8:
            raise ValueError("needle density must be normalized")


@dataclass(frozen=True)
class NeedleDecomposition:
    needles: tuple

    def __post_init__(self):
        object.__setattr__(self, "needles", tuple(self.needles))
        if not self.needles:
            raise ValueError("decomposition needs at least one needle")
        total = sum(n.weight for n in self.needles)
        if abs(total - 1.0) > 1e-8:
            raise ValueError(f"needle weights sum to {total:.8f}, expected 1")
        for n in self.needles:
            if n.density.support.upper - n.density.support.lower < 1e-12:
                raise ValueError("degenerate needle supported on a single point")

    @property
    def weights(self) -> np.ndarray:
        return np.array([n.weight for n in self.needles])


def separable_product(
    profile: Density1D, t_grid: np.ndarray, fiber: FiberSpace, g: np.ndarray | None = None
) -> ProductDensity:
    """Build rho(t, y) = w(t) g(y) on the given grid and fiber set.

    The result is normalized: g defaults to the constant making the fiber
    factor a probability weight against n.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    if g is None:
        g = np.full(fiber.size, 1.0 / fiber.total_weight)
    g = np.asarray(g, dtype=float)
    if np.any(g <= 0):
        raise ValueError("fiber factor must be positive")
    vals = np.outer(profile(t_grid), g)
    pd = ProductDensity(t_grid, fiber, vals, profile_class_of(profile))
    return pd.normalized()


def profile_class_of(profile: Density1D) -> ConcavityClass | None:
    fam = profile.family
    if fam == "cone":
        return ConcavityClass.positive(profile.params["N"])
    if fam == "exponential":
        return ConcavityClass.log_concave()
    if fam == "neg_cone":
        return ConcavityClass.negative(profile.params["N"])
    return None


def cylinder_fixture(n_fibers: int = 64, n_t: int = 257) -> ProductDensity:
    """Uniform distribution on [-1, 1] x S^1 with a discretized circle.

    The circle is an n_fibers-point fiber set of total weight 2*pi; the flat
    product is the archetypal example with a whole circle of barycenters at
    t = 0.  Tagged with the dimension-2 regime whose bound is (2/3)^2.
    """
    fiber = FiberSpace(np.full(n_fibers, 2.0 * math.pi / n_fibers))
    t = np.linspace(-1.0, 1.0, n_t)
    vals = np.full((n_t, n_fibers), 1.0 / (4.0 * math.pi))
    return ProductDensity(t, fiber, vals, ConcavityClass.positive(2.0))


def separable_needles(pd: ProductDensity, tol: float = 1e-8) -> NeedleDecomposition:
    """Decompose a separable product density into one needle per fiber.

    Separability is tested by comparing rho against the outer product of its
    two marginals; non-separable input is rejected with the factorization
    residual.  Needle weights are the fiber masses alpha_y = n_y * int
    rho(., y); every needle density integrates t to zero whenever the input
    is recentered, because each equals the common profile w.
    """
    if abs(pd.mass - 1.0) > 1e-8:
        raise PreconditionError("separable_needles expects a normalized product density")
    w_vals = pd.values @ pd.fiber.weights
    col_masses = np.trapezoid(pd.values, pd.t_grid, axis=0)
    predicted = np.outer(w_vals, col_masses)
    scale = float(np.max(pd.values)) or 1.0
    residual = float(np.max(np.abs(pd.values - predicted))) / scale
    if residual > tol:
        raise ValueError(f"product density is not separable: residual {residual:.3e}")
    alphas = col_masses * pd.fiber.weights
    needles = []
    for j in range(pd.fiber.size):
        if alphas[j] <= 0:
            continue  # fiber carries no mass: dropped
        d = normalize(tabulated_density(pd.t_grid, pd.values[:, j]))
        needles.append(Needle(float(alphas[j]), d, pd.fiber.labels[j]))
    return NeedleDecomposition(tuple(needles))


@dataclass(frozen=True)
class NeedleReport:
    """Per-needle verification matrix plus the global summary."""

    per_needle: list = field(default_factory=list)
    slab_residual: float = 0.0
    global_left: float = 0.0
    global_right: float = 0.0
    aggregation_residual: float = 0.0
    passed: bool = False

    def to_dict(self) -> dict:
        return {
            "per_needle": list(self.per_needle),
            "slab_residual": self.slab_residual,
            "global": {"left": self.global_left, "right": self.global_right},
            "aggregation_residual": self.aggregation_residual,
            "passed": self.passed,
        }


def needle_verify(
    decomposition: NeedleDecomposition,
    pd: ProductDensity,
    cls: ConcavityClass,
    tol: float = 1e-8,
    n_slabs: int = 20,
    rng: np.random.Generator | None = None,
) -> NeedleReport:
    """Five checks tying a decomposition to its product density.

    (a) the weighted needle masses of random slabs reproduce the slab
        masses of the pushforward; (b) every needle has zero first moment;
    (c) every needle satisfies the class shape condition; (d) every needle
        meets the halfspace-mass bound on both sides; (e) the weighted
        needle masses at 0 reproduce the global one-sided masses.
    """
    rng = rng or np.random.default_rng(0)
    w = pushforward_busemann(pd)
    bound = grunbaum_bound(cls)
    t_lo, t_hi = pd.t_grid[0], pd.t_grid[-1]

    slab_res = 0.0
    for _ in range(n_slabs):
        r1, r2 = np.sort(rng.uniform(t_lo, t_hi, size=2))
        global_mass = w.integrate(r1, r2, 0)
        local = sum(
            n.weight * n.density.integrate(r1, r2, 0) for n in decomposition.needles
        )
        slab_res = max(slab_res, abs(global_mass - local))

    rows = []
    all_ok = True
    for i, n in enumerate(decomposition.needles):
        d = n.density
        mean = d.moment(1)
        crep = check_class(d, cls, tol=1e-8)
        left = d.integrate(d.support.lower, 0.0)
        right = d.integrate(0.0, d.support.upper)
        row = {
            "needle": i,
            "label": n.label,
            "weight": n.weight,
            "zero_mean": abs(mean) <= tol,
            "mean": mean,
            "class_ok": crep.passed,
            "class_violation": crep.worst_violation,
            "left_mass": left,
            "right_mass": right,
            "bound_ok": left >= bound - tol and right >= bound - tol,
        }
        row["passed"] = row["zero_mean"] and row["class_ok"] and row["bound_ok"]
        all_ok = all_ok and row["passed"]
        rows.append(row)

    weights = decomposition.weights
    lefts = np.array([r["left_mass"] for r in rows])
    rights = np.array([r["right_mass"] for r in rows])
    global_left = w.integrate(w.support.lower, 0.0)
    global_right = w.integrate(0.0, w.support.upper)
    agg = max(
        abs(float(weights @ lefts) - global_left),
        abs(float(weights @ rights) - global_right),
    )
    passed = all_ok and slab_res <= tol and agg <= tol
    return NeedleReport(rows, slab_res, global_left, global_right, agg, passed)


@dataclass(frozen=True)
class RigidityProfileReport:
    passed: bool
    common_c: float | None
    c_values: list
    extremal_flags: list
    profile_deviation: float

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "common_c": self.common_c,
            "c_values": list(self.c_values),
            "extremal_flags": list(self.extremal_flags),
            "profile_deviation": self.profile_deviation,
        }


def rigidity_profile_check(
    decomposition: NeedleDecomposition,
    cls: ConcavityClass,
    tol: float = 1e-8,
    product: ProductDensity | None = None,
) -> RigidityProfileReport:
    """Shared-scale extremality across needles plus the fiber-mass profile.

    Every needle must be extremal with one common c, and the aggregated
    level-set mass profile sum_q alpha_q w_q(t) must match the closed-form
    extremal profile of the class with that c, pointwise on the t-grid.
    """
    cs: list[float | None] = []
    flags = []
    for n in decomposition.needles:
        res = rigidity_detect(cdf_profile(n.density), cls, tol=max(tol, 1e-9))
        flags.append(res.extremal)
        cs.append(res.model.c if res.model is not None else None)
    fitted = [c for c in cs if c is not None]
    common: float | None = None
    same_c = False
    if fitted and all(flags):
        ref = float(np.median(fitted))
        same_c = max(abs(c - ref) for c in fitted) <= max(tol, 1e-9) * max(1.0, ref)
        common = ref if same_c else None

    if product is not None:
        t = product.t_grid
        prof = product.values @ product.fiber.weights
    else:
        t = np.unique(np.concatenate([n.density.knots for n in decomposition.needles if n.density.knots is not None]))
        if t.size == 0:
            raise ValueError("needles carry no knots; supply the product density")
        prof = np.zeros_like(t)
        for n in decomposition.needles:
            prof += n.weight * n.density(t)

    dev = math.inf
    if common is not None:
        model = model_cdf(cls, common)
        dev = float(np.max(np.abs(prof - model.density(t))))
    passed = bool(all(flags)) and same_c and dev <= tol
    return RigidityProfileReport(passed, common, cs, flags, dev)
