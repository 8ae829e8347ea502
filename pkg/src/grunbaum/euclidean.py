"""Euclidean measures: sample clouds, grid densities, and their geometry.

Measures come in two concrete forms.  A SampleCloud is a weighted point set
(the empirical stand-in used by the Monte Carlo paths); a GridDensityND is a
piecewise-constant density given by cell-average values on a rectangular
grid with at most three axes.  Halfspace masses, barycenters, marginals,
and the Minkowski-combination test work on both where meaningful.

Convex polygons can be rasterized exactly (cell values are exact coverage
fractions), which keeps grid marginals of convex bodies free of
discretization noise in their shape checks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial import Delaunay

from .concavity import ConcavityClass, s_mean
from .density import Density1D, normalize, tabulated_density

__all__ = [
    "GridDensityND",
    "Halfspace",
    "Marginal1D",
    "MinkowskiReport",
    "SampleCloud",
    "barycenter_nd",
    "cone_uniform",
    "gaussian",
    "halfspace_mass",
    "make_rng",
    "marginal_1d",
    "minkowski_test",
    "polygon_grid_density",
    "uniform_polytope",
    "uniform_simplex",
]


def make_rng(seed: int | None) -> np.random.Generator:
    return np.random.default_rng(seed)


# ---------------------------------------------------------------------------
# Measure containers
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SampleCloud:
    """Weighted point cloud; weights are normalized to sum to one."""

    points: np.ndarray
    weights: np.ndarray | None = None

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[0] == 0:
            raise ValueError("points must be a nonempty (m, n) array")
        object.__setattr__(self, "points", pts)
        if self.weights is None:
            w = np.full(pts.shape[0], 1.0 / pts.shape[0])
        else:
            w = np.asarray(self.weights, dtype=float)
            if w.shape != (pts.shape[0],) or np.any(w <= 0):
                raise ValueError("weights must be positive, one per point")
            w = w / np.sum(w)
        object.__setattr__(self, "weights", w)

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    @property
    def size(self) -> int:
        return self.points.shape[0]


@dataclass(frozen=True)
class GridDensityND:
    """Cell-average density values on a rectangular grid (dim <= 3).

    axes are the cell-edge arrays; values[i, j, ...] is the (constant)
    density on the corresponding cell.
    """

    axes: tuple
    values: np.ndarray

    def __post_init__(self):
        axes = tuple(np.asarray(a, dtype=float) for a in self.axes)
        object.__setattr__(self, "axes", axes)
        v = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", v)
        if not 1 <= len(axes) <= 3:
            raise ValueError("grid densities support 1 to 3 axes")
        for a in axes:
            if a.ndim != 1 or a.size < 2 or not np.all(np.diff(a) > 0):
                raise ValueError("each axis must be strictly increasing edges")
        if v.shape != tuple(a.size - 1 for a in axes):
            raise ValueError("values shape must match the cell counts")
        if np.any(v < 0) or not np.all(np.isfinite(v)):
            raise ValueError("density values must be finite and nonnegative")
        if self.mass <= 0:
            raise ValueError("grid density must carry positive mass")

    @property
    def dim(self) -> int:
        return len(self.axes)

    def cell_widths(self) -> tuple:
        return tuple(np.diff(a) for a in self.axes)

    def cell_centers(self) -> tuple:
        return tuple(0.5 * (a[:-1] + a[1:]) for a in self.axes)

    def cell_volumes(self) -> np.ndarray:
        widths = self.cell_widths()
        vol = widths[0]
        for wdt in widths[1:]:
            vol = np.multiply.outer(vol, wdt)
        return vol

    @property
    def mass(self) -> float:
        return float(np.sum(self.values * self.cell_volumes()))

    def normalized(self) -> "GridDensityND":
        return GridDensityND(self.axes, self.values / self.mass)

    def box_mass(self, lo, hi) -> float:
        """Exact mass of an axis-aligned box under the cell-average density."""
        lo = np.asarray(lo, dtype=float)
        hi = np.asarray(hi, dtype=float)
        fracs = []
        for a, lo_i, hi_i in zip(self.axes, lo, hi):
            overlap = np.minimum(hi_i, a[1:]) - np.maximum(lo_i, a[:-1])
            fracs.append(np.maximum(overlap, 0.0))
        weight = fracs[0]
        for f in fracs[1:]:
            weight = np.multiply.outer(weight, f)
        return float(np.sum(self.values * weight))


@dataclass(frozen=True)
class Halfspace:
    """Closed halfspace {x : <v, x> <= r} (or >= r)."""

    direction: np.ndarray
    offset: float
    orientation: str = "le"

    def __post_init__(self):
        v = np.asarray(self.direction, dtype=float)
        nrm = float(np.linalg.norm(v))
        if nrm == 0:
            raise ValueError("direction must be nonzero")
        object.__setattr__(self, "direction", v / nrm)
        if self.orientation not in ("le", "ge"):
            raise ValueError("orientation must be 'le' or 'ge'")

    def contains(self, points: np.ndarray) -> np.ndarray:
        proj = np.asarray(points, dtype=float) @ self.direction
        return proj <= self.offset if self.orientation == "le" else proj >= self.offset


# ---------------------------------------------------------------------------
# Generators
# ---------------------------------------------------------------------------


def uniform_simplex(n: int, size: int, rng: np.random.Generator) -> SampleCloud:
    """Uniform samples from the standard simplex {x >= 0, sum x <= 1}."""
    if n < 1:
        raise ValueError("dimension must be >= 1")
    bary = rng.dirichlet(np.ones(n + 1), size=size)
    return SampleCloud(bary[:, :n])


def _sample_in_simplices(vertices, simplices, vols, size, rng):
    probs = vols / vols.sum()
    counts = rng.multinomial(size, probs)
    chunks = []
    for idx, cnt in zip(simplices, counts):
        if cnt == 0:
            continue
        verts = vertices[idx]
        bary = rng.dirichlet(np.ones(verts.shape[0]), size=cnt)
        chunks.append(bary @ verts)
    pts = np.vstack(chunks)
    rng.shuffle(pts, axis=0)
    return pts


def uniform_polytope(vertices, size: int, rng: np.random.Generator) -> SampleCloud:
    """Uniform samples from the convex hull of the given vertices.

    The hull is triangulated and simplices are drawn in proportion to their
    volume; degenerate (flat) vertex sets are rejected.
    """
    vertices = np.asarray(vertices, dtype=float)
    n = vertices.shape[1]
    if vertices.shape[0] < n + 1:
        raise ValueError("need at least n+1 vertices for a full-dimensional polytope")
    tri = Delaunay(vertices)
    simplices = tri.simplices
    vols = np.abs(
        np.linalg.det(vertices[simplices[:, 1:]] - vertices[simplices[:, :1]])
    ) / math.factorial(n)
    if vols.sum() <= 0:
        raise ValueError("degenerate polytope: zero volume")
    return SampleCloud(_sample_in_simplices(vertices, simplices, vols, size, rng))


def gaussian(mean, cov, size: int, rng: np.random.Generator) -> SampleCloud:
    """Gaussian cloud; the covariance must be symmetric positive definite."""
    mean = np.asarray(mean, dtype=float)
    cov = np.asarray(cov, dtype=float)
    try:
        chol = np.linalg.cholesky(cov)
    except np.linalg.LinAlgError as e:
        raise ValueError("covariance must be positive definite") from e
    z = rng.standard_normal((size, mean.size))
    return SampleCloud(mean + z @ chol.T)


def cone_uniform(base_vertices, apex, size: int, rng: np.random.Generator) -> SampleCloud:
    """Uniform samples from the cone over a flat base with the given apex.

    A point is drawn uniformly in the base (a simplex or triangulated flat
    polytope) and pulled toward the apex with the radial law t = U^(1/n)
    that makes the cone sample uniform.
    """
    base = np.asarray(base_vertices, dtype=float)
    apex = np.asarray(apex, dtype=float)
    n = apex.size
    k = base.shape[0]
    if k < n:
        raise ValueError("base needs at least n vertices spanning dimension n-1")
    if k == n:
        bary = rng.dirichlet(np.ones(k), size=size)
        b = bary @ base
    else:
        # flatten the base into (n-1)-d coordinates and triangulate there
        origin = base[0]
        edges = base[1:] - origin
        q, _ = np.linalg.qr(edges.T)
        basis = q[:, : n - 1]
        coords = (base - origin) @ basis
        tri = Delaunay(coords)
        vols = np.abs(
            np.linalg.det(coords[tri.simplices[:, 1:]] - coords[tri.simplices[:, :1]])
        ) / math.factorial(n - 1)
        flat = _sample_in_simplices(coords, tri.simplices, vols, size, rng)
        b = origin + flat @ basis.T
    t = rng.uniform(size=size) ** (1.0 / n)
    return SampleCloud(apex + t[:, None] * (b - apex))


# ---------------------------------------------------------------------------
# Barycenter and halfspace masses
# ---------------------------------------------------------------------------


def barycenter_nd(mu: SampleCloud | GridDensityND) -> np.ndarray:
    if isinstance(mu, SampleCloud):
        return mu.weights @ mu.points
    centers = mu.cell_centers()
    cell_mass = mu.values * mu.cell_volumes()
    total = cell_mass.sum()
    out = []
    for axis in range(mu.dim):
        shape = [1] * mu.dim
        shape[axis] = -1
        out.append(float(np.sum(cell_mass * centers[axis].reshape(shape))) / total)
    return np.array(out)


def halfspace_mass(mu: SampleCloud | GridDensityND, hs: Halfspace) -> float:
    """Measure of a closed halfspace.

    Clouds count weights (boundary atoms included on both sides); grids sum
    cell masses with a linear partial-coverage ramp across the boundary,
    which is exact in the aggregate for densities constant on cells up to
    the usual first-order cut approximation.
    """
    if isinstance(mu, SampleCloud):
        return float(np.sum(mu.weights[hs.contains(mu.points)]))
    grid = mu
    centers = grid.cell_centers()
    mesh = np.meshgrid(*centers, indexing="ij")
    proj = sum(hs.direction[i] * mesh[i] for i in range(grid.dim))
    widths = grid.cell_widths()
    half_span = 0.0
    for i in range(grid.dim):
        shape = [1] * grid.dim
        shape[i] = -1
        half_span = half_span + 0.5 * abs(hs.direction[i]) * widths[i].reshape(shape)
    signed = hs.offset - proj if hs.orientation == "le" else proj - hs.offset
    with np.errstate(divide="ignore", invalid="ignore"):
        frac = np.where(half_span > 0, 0.5 + signed / (2.0 * half_span), (signed >= 0) * 1.0)
    frac = np.clip(frac, 0.0, 1.0)
    cell_mass = grid.values * grid.cell_volumes()
    return float(np.sum(cell_mass * frac) / cell_mass.sum())


# ---------------------------------------------------------------------------
# Marginals
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Marginal1D:
    density: Density1D
    expected_class: ConcavityClass | None
    direction: np.ndarray
    method: str


def _fd_bins(proj: np.ndarray) -> int:
    iqr = float(np.subtract(*np.percentile(proj, [75, 25])))
    if iqr <= 0:
        return 64
    width = 2.0 * iqr / proj.size ** (1.0 / 3.0)
    nbins = int(np.ceil((proj.max() - proj.min()) / width))
    return int(np.clip(nbins, 8, 1024))


def marginal_1d(
    mu: SampleCloud | GridDensityND,
    direction,
    s: float | None = None,
) -> Marginal1D:
    """Pushforward density of <v, .>, normalized.

    Sample clouds are binned with the Freedman-Diaconis rule (shape checks
    on such marginals are advisory: binning noise is not a counterexample).
    Grid densities along an axis direction use exact column sums; oblique
    directions deposit cell masses into bins with linear sharing.
    """
    v = np.asarray(direction, dtype=float)
    v = v / np.linalg.norm(v)
    n = mu.dim
    expected = None
    if s is not None:
        expected = ConcavityClass.s_concave(s, n).one_dimensional()

    if isinstance(mu, SampleCloud):
        proj = mu.points @ v
        nbins = _fd_bins(proj)
        hist, edges = np.histogram(proj, bins=nbins, weights=mu.weights, density=True)
        centers = 0.5 * (edges[:-1] + edges[1:])
        d = normalize(tabulated_density(centers, hist))
        return Marginal1D(d, expected, v, "histogram-fd")

    grid = mu
    axis = int(np.argmax(np.abs(v)))
    aligned = abs(abs(v[axis]) - 1.0) < 1e-12
    cell_mass = grid.values * grid.cell_volumes()
    if aligned:
        other = tuple(i for i in range(grid.dim) if i != axis)
        col = cell_mass.sum(axis=other) / np.diff(grid.axes[axis])
        centers = grid.cell_centers()[axis]
        if v[axis] < 0:
            centers, col = -centers[::-1], col[::-1]
        d = normalize(tabulated_density(centers, col))
        return Marginal1D(d, expected, v, "grid-columns")

    centers = grid.cell_centers()
    mesh = np.meshgrid(*centers, indexing="ij")
    proj = sum(v[i] * mesh[i] for i in range(grid.dim)).ravel()
    mass = cell_mass.ravel()
    nbins = max(64, int(2 * max(grid.values.shape)))
    t0, t1 = proj.min(), proj.max()
    tgrid = np.linspace(t0, t1, nbins)
    step = tgrid[1] - tgrid[0]
    pos = np.clip((proj - t0) / step, 0.0, nbins - 1.0 - 1e-12)
    idx = pos.astype(int)
    frac = pos - idx
    acc = np.zeros(nbins)
    np.add.at(acc, idx, mass * (1.0 - frac))
    np.add.at(acc, np.minimum(idx + 1, nbins - 1), mass * frac)
    d = normalize(tabulated_density(tgrid, acc / step))
    return Marginal1D(d, expected, v, "grid-projected")


# ---------------------------------------------------------------------------
# Minkowski-combination test
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MinkowskiReport:
    s: float
    trials: int
    worst_margin: float
    worst_case: dict | None
    passed: bool

    def to_dict(self) -> dict:
        return {
            "s": self.s,
            "trials": self.trials,
            "worst_margin": self.worst_margin,
            "worst_case": self.worst_case,
            "passed": self.passed,
        }


def minkowski_test(
    mu: GridDensityND,
    s: float,
    trials: int = 100,
    lambdas=(0.25, 0.5, 0.75),
    rng: np.random.Generator | None = None,
    tol: float = 1e-9,
) -> MinkowskiReport:
    """Randomized check of mu((1-l)A + lB) >= M_s(mu(A), mu(B); l) on boxes.

    A and B are random axis-aligned boxes inside the grid's bounding box;
    their lambda-combination is again a box, so all three masses are exact
    under the cell-average convention.  Limited to dim <= 2 by the cost of
    Minkowski sums in the non-box generalization this mirrors.
    """
    if mu.dim > 2:
        raise ValueError("combination test is limited to one or two axes")
    rng = rng or np.random.default_rng(0)
    los = np.array([a[0] for a in mu.axes])
    his = np.array([a[-1] for a in mu.axes])
    worst = math.inf
    worst_case = None
    for _ in range(trials):
        a_lo = rng.uniform(los, his)
        a_hi = rng.uniform(a_lo, his)
        b_lo = rng.uniform(los, his)
        b_hi = rng.uniform(b_lo, his)
        ma = mu.box_mass(a_lo, a_hi)
        mb = mu.box_mass(b_lo, b_hi)
        for lam in lambdas:
            c_lo = (1.0 - lam) * a_lo + lam * b_lo
            c_hi = (1.0 - lam) * a_hi + lam * b_hi
            mc = mu.box_mass(c_lo, c_hi)
            margin = mc - s_mean(ma, mb, lam, s)
            if margin < worst:
                worst = margin
                worst_case = {
                    "A": [a_lo.tolist(), a_hi.tolist()],
                    "B": [b_lo.tolist(), b_hi.tolist()],
                    "lambda": lam,
                    "masses": [ma, mb, mc],
                }
    return MinkowskiReport(s, trials, worst, worst_case, worst >= -tol)


# ---------------------------------------------------------------------------
# Exact rasterization of convex polygons
# ---------------------------------------------------------------------------


def _clip_polygon(subject: np.ndarray, edge_p: np.ndarray, edge_q: np.ndarray) -> np.ndarray:
    """Clip a polygon against the left side of the directed line p -> q."""
    out = []
    m = subject.shape[0]
    for i in range(m):
        cur, nxt = subject[i], subject[(i + 1) % m]
        d = edge_q - edge_p
        side_cur = d[0] * (cur[1] - edge_p[1]) - d[1] * (cur[0] - edge_p[0])
        side_nxt = d[0] * (nxt[1] - edge_p[1]) - d[1] * (nxt[0] - edge_p[0])
        if side_cur >= 0:
            out.append(cur)
        if (side_cur > 0 and side_nxt < 0) or (side_cur < 0 and side_nxt > 0):
            t = side_cur / (side_cur - side_nxt)
            out.append(cur + t * (nxt - cur))
    return np.array(out) if out else np.empty((0, 2))


def _poly_area(poly: np.ndarray) -> float:
    if poly.shape[0] < 3:
        return 0.0
    x, y = poly[:, 0], poly[:, 1]
    return 0.5 * abs(float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1))))


def polygon_grid_density(vertices, xs, ys) -> GridDensityND:
    """Exact cell-coverage rasterization of a convex polygon (uniform law).

    Cell values are the exact area fraction of the polygon in each cell, so
    axis marginals of the result agree with the true slice-length profile
    up to cell averaging (which preserves affinity and concavity at the
    column level).
    """
    poly = np.asarray(vertices, dtype=float)
    if poly.shape[0] < 3:
        raise ValueError("polygon needs at least three vertices")
    # enforce counterclockwise orientation
    area2 = float(
        np.dot(poly[:, 0], np.roll(poly[:, 1], -1)) - np.dot(poly[:, 1], np.roll(poly[:, 0], -1))
    )
    if area2 < 0:
        poly = poly[::-1]
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    nx, ny = xs.size - 1, ys.size - 1

    # corner-inside classification against all polygon halfplanes
    gx, gy = np.meshgrid(xs, ys, indexing="ij")
    inside = np.ones(gx.shape, dtype=bool)
    for i in range(poly.shape[0]):
        p, q = poly[i], poly[(i + 1) % poly.shape[0]]
        cross = (q[0] - p[0]) * (gy - p[1]) - (q[1] - p[1]) * (gx - p[0])
        inside &= cross >= -1e-13
    full = inside[:-1, :-1] & inside[1:, :-1] & inside[:-1, 1:] & inside[1:, 1:]
    empty = ~(inside[:-1, :-1] | inside[1:, :-1] | inside[:-1, 1:] | inside[1:, 1:])

    # cells containing a polygon vertex can intersect without corner mixing
    vx = np.clip(np.searchsorted(xs, poly[:, 0], side="right") - 1, 0, nx - 1)
    vy = np.clip(np.searchsorted(ys, poly[:, 1], side="right") - 1, 0, ny - 1)
    vertex_cells = set(zip(vx.tolist(), vy.tolist()))

    frac = np.zeros((nx, ny))
    frac[full] = 1.0
    boundary = ~full & ~empty
    for i, j in vertex_cells:
        boundary[i, j] = True
    for i, j in zip(*np.nonzero(boundary)):
        cell = np.array(
            [[xs[i], ys[j]], [xs[i + 1], ys[j]], [xs[i + 1], ys[j + 1]], [xs[i], ys[j + 1]]]
        )
        clipped = cell
        for k in range(poly.shape[0]):
            clipped = _clip_polygon(clipped, poly[k], poly[(k + 1) % poly.shape[0]])
            if clipped.shape[0] == 0:
                break
        area = _poly_area(clipped)
        frac[i, j] = area / ((xs[i + 1] - xs[i]) * (ys[j + 1] - ys[j]))
    return GridDensityND((xs, ys), frac).normalized()
