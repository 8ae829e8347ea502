"""Tukey depth estimation by direction search.

The depth of a point x is the infimum of the measure of closed halfspaces
containing x; the infimum is attained with x on the boundary, so for each
unit direction v it suffices to measure {<v, .> <= <v, x>}.  The search is
two-stage: a quasi-uniform, prefix-extensible direction sequence (so a
larger budget only refines the estimate downward), then Nelder-Mead
refinement around the best few directions.  The result is an upper bound on
the true depth that tightens with the budget.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .concavity import ConcavityClass, grunbaum_bound
from .euclidean import GridDensityND, Halfspace, SampleCloud, barycenter_nd, halfspace_mass

__all__ = [
    "DepthBoundReport",
    "DepthReport",
    "DepthSearchConfig",
    "direction_sequence",
    "tukey_depth",
    "verify_depth_bound",
]

_GOLDEN = (1.0 + math.sqrt(5.0)) / 2.0


def _van_der_corput(count: int) -> np.ndarray:
    out = np.zeros(count)
    for i in range(count):
        n, base, q = i + 1, 0.5, 0.0
        while n:
            n, r = divmod(n, 2)
            q += base * r
            base *= 0.5
        out[i] = q
    return out


def direction_sequence(dim: int, count: int, rng: np.random.Generator | None = None) -> np.ndarray:
    """Quasi-uniform unit directions; prefixes of a fixed infinite sequence.

    dim 1 alternates the two signs; dim 2 walks the golden angle; dim 3
    pairs a bit-reversed z coordinate with the golden angle.  Higher
    dimensions fall back to seeded Gaussian directions (still reproducible,
    no longer nested).
    """
    if dim == 1:
        return np.array([[1.0], [-1.0]] * ((count + 1) // 2))[:count]
    idx = np.arange(count)
    if dim == 2:
        theta = 2.0 * math.pi * np.mod(idx / _GOLDEN, 1.0)
        return np.column_stack([np.cos(theta), np.sin(theta)])
    if dim == 3:
        z = 2.0 * _van_der_corput(count) - 1.0
        r = np.sqrt(np.maximum(1.0 - z * z, 0.0))
        theta = 2.0 * math.pi * np.mod(idx / _GOLDEN, 1.0)
        return np.column_stack([r * np.cos(theta), r * np.sin(theta), z])
    rng = rng or np.random.default_rng(0)
    v = rng.standard_normal((count, dim))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


@dataclass(frozen=True)
class DepthSearchConfig:
    n_directions: int = 720
    refine: bool = True
    refine_top: int = 5
    refine_maxiter: int = 200
    seed: int | None = 0
    directions: np.ndarray | None = None  # explicit override (e.g. equivariance tests)


@dataclass(frozen=True)
class DepthReport:
    point: np.ndarray
    depth: float
    direction: np.ndarray
    n_directions: int
    n_samples: int
    half_width: float
    seed: int | None = None
    refined: bool = False

    def to_dict(self) -> dict:
        return {
            "point": np.asarray(self.point).tolist(),
            "depth": self.depth,
            "direction": np.asarray(self.direction).tolist(),
            "n_directions": self.n_directions,
            "n_samples": self.n_samples,
            "confidence_half_width": self.half_width,
            "seed": self.seed,
            "refined": self.refined,
        }


def _mass_le(mu, v: np.ndarray, x: np.ndarray) -> float:
    if isinstance(mu, SampleCloud):
        proj = mu.points @ v
        return float(np.sum(mu.weights[proj <= float(v @ x)]))
    return halfspace_mass(mu, Halfspace(v, float(v @ x), "le"))


def tukey_depth(
    mu: SampleCloud | GridDensityND,
    x,
    cfg: DepthSearchConfig = DepthSearchConfig(),
) -> DepthReport:
    """Upper-bound estimate of the depth of x via direction search.

    Yields min over tested directions of the closed halfspace mass through
    x; the reported direction v minimizes mass({<v,.> <= <v,x>}).
    """
    x = np.asarray(x, dtype=float)
    dim = mu.dim
    if cfg.directions is not None:
        dirs = np.asarray(cfg.directions, dtype=float)
        dirs = dirs / np.linalg.norm(dirs, axis=1, keepdims=True)
    else:
        rng = np.random.default_rng(cfg.seed)
        dirs = direction_sequence(dim, cfg.n_directions, rng)

    if isinstance(mu, SampleCloud):
        masses = np.empty(dirs.shape[0])
        t_all = dirs @ x
        chunk = max(1, int(5e7 // max(mu.size, 1)))
        for start in range(0, dirs.shape[0], chunk):
            block = dirs[start : start + chunk]
            proj = mu.points @ block.T
            inside = proj <= t_all[start : start + chunk][None, :]
            masses[start : start + chunk] = mu.weights @ inside
        n_samples = mu.size
        w2 = float(np.sum(mu.weights**2))
    else:
        masses = np.array([_mass_le(mu, v, x) for v in dirs])
        n_samples = int(np.prod(mu.values.shape))
        w2 = 0.0

    order = np.argsort(masses)
    best = float(masses[order[0]])
    best_dir = dirs[order[0]]
    refined = False
    if cfg.refine:
        for k in order[: cfg.refine_top]:
            res = minimize(
                lambda u: _mass_le(mu, u / np.linalg.norm(u), x),
                dirs[k],
                method="Nelder-Mead",
                options={"maxiter": cfg.refine_maxiter, "xatol": 1e-4, "fatol": 1e-7},
            )
            if res.fun < best:
                best = float(res.fun)
                best_dir = res.x / np.linalg.norm(res.x)
                refined = True

    p = min(max(best, 0.0), 1.0)
    half_width = 1.96 * math.sqrt(max(p * (1.0 - p) * w2, 0.0))
    return DepthReport(
        x, best, best_dir, dirs.shape[0], n_samples, half_width, cfg.seed, refined
    )


@dataclass(frozen=True)
class DepthBoundReport:
    s: float
    bound: float
    report: DepthReport
    passed: bool

    def to_dict(self) -> dict:
        return {
            "s": self.s,
            "bound": self.bound,
            "depth": self.report.to_dict(),
            "passed": self.passed,
        }


def verify_depth_bound(
    mu: SampleCloud | GridDensityND,
    s: float,
    tol: float = 0.01,
    cfg: DepthSearchConfig = DepthSearchConfig(),
    point=None,
) -> DepthBoundReport:
    """Depth at the barycenter against the sharp bound (1/(1+s))^(1/s).

    The measure is declared (by the caller) to be s-concave with
    s in (-1, 1/n]; no extrapolation outside that range is offered.
    """
    cls = ConcavityClass.s_concave(s, mu.dim)
    bound = grunbaum_bound(cls)
    pt = barycenter_nd(mu) if point is None else np.asarray(point, dtype=float)
    rep = tukey_depth(mu, pt, cfg)
    return DepthBoundReport(s, bound, rep, rep.depth >= bound - tol)
