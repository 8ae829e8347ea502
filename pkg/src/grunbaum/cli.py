"""Command-line front end.

Subcommands: verify1d, depth, marginal, product, needles, stability, models.
Exit codes: 0 = all checks passed, 1 = a mathematical check failed,
2 = malformed input or violated precondition.  Every report embeds the
resolved configuration and the input digest; --reproducible suppresses
timestamps so identical configurations yield byte-identical outputs.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from .concavity import ConcavityClass, grunbaum_bound
from .density import normalize, recenter
from .depth import DepthSearchConfig, direction_sequence, tukey_depth, verify_depth_bound
from .euclidean import (
    GridDensityND,
    SampleCloud,
    barycenter_nd,
    gaussian,
    halfspace_mass,
    make_rng,
    marginal_1d,
    uniform_polytope,
    uniform_simplex,
)
from .classify import check_class
from .product import (
    barycenter_busemann,
    busemann_mass,
    cylinder_fixture,
    needle_verify,
    pushforward_busemann,
    recenter_product,
    rigidity_profile_check,
    separable_needles,
    verify_main_theorem,
)
from .profile import cdf_profile
from .specio import (
    density_to_spec,
    load_density_spec,
    load_needles,
    load_product,
    load_samples_csv,
    save_json,
    save_product,
    write_csv_rows,
    write_report,
)
from .stability import stability_certificate
from .verify1d import PreconditionError, model_cdf, rigidity_detect, verify_grunbaum_1d
from .density import Density1D, cone_density, exp_density, neg_cone_density

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_INPUT = 2


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--tol", type=float, default=1e-8, help="verification tolerance")
    p.add_argument("--seed", type=int, default=0, help="seed for all randomized work")
    p.add_argument("--out", type=Path, default=Path("."), help="output directory")
    p.add_argument(
        "--format",
        default="json",
        help="comma-separated outputs among json,csv,svg (default json)",
    )
    p.add_argument("--reproducible", action="store_true", help="omit timestamps from reports")
    p.add_argument("--config", type=Path, default=None, help="JSON config file with defaults")


def _add_class(p: argparse.ArgumentParser) -> None:
    p.add_argument(
        "--class",
        dest="cls",
        choices=["positive", "log-concave", "negative", "s-concave"],
        help="concavity regime of the input",
    )
    p.add_argument("--n", type=float, default=None, help="N for the positive regime")
    p.add_argument("--beta", type=float, default=None, help="beta for the negative regime")
    p.add_argument("--s", type=float, default=None, help="s for the s-concave regime")
    p.add_argument("--dim", type=int, default=2, help="ambient dimension for --s")


def _class_from_args(args) -> ConcavityClass:
    if args.cls == "positive":
        if args.n is None:
            raise ValueError("--class positive requires --n")
        return ConcavityClass.positive(args.n)
    if args.cls == "log-concave":
        return ConcavityClass.log_concave()
    if args.cls == "negative":
        if args.beta is None:
            raise ValueError("--class negative requires --beta")
        return ConcavityClass.negative(args.beta)
    if args.cls == "s-concave":
        if args.s is None:
            raise ValueError("--class s-concave requires --s")
        return ConcavityClass.s_concave(args.s, args.dim)
    raise ValueError("a --class is required for this command")


def _formats(args) -> set:
    return {f.strip() for f in args.format.split(",") if f.strip()}


def _resolved_config(args, keys) -> dict:
    out = {"command": args.command}
    for k in keys:
        v = getattr(args, k, None)
        if isinstance(v, Path):
            v = str(v)
        out[k] = v
    return out


def _svg_setup(reproducible: bool):
    import matplotlib

    matplotlib.use("Agg")
    if reproducible:
        matplotlib.rcParams["svg.hashsalt"] = "grunbaum"
    import matplotlib.pyplot as plt

    return plt


def _save_svg(plt, fig, path: Path, reproducible: bool) -> None:
    fig.savefig(path, format="svg", metadata={"Date": None} if reproducible else None)
    plt.close(fig)


def _require_1d(obj) -> Density1D:
    if isinstance(obj, GridDensityND):
        raise ValueError("this command needs a one-dimensional density spec")
    return obj


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def cmd_verify1d(args) -> int:
    d, spec, digest = load_density_spec(args.input)
    d = _require_1d(d)
    cls = _class_from_args(args)
    d = normalize(d)
    if args.recenter:
        d = recenter(d)
    rep = verify_grunbaum_1d(d, cls, tol=args.tol)
    prof = cdf_profile(d, args.grid)
    rig = rigidity_detect(prof, cls, tol=max(args.tol, 1e-9))
    body = rep.to_dict()
    body["rigidity"] = rig.to_dict()
    cfg = _resolved_config(args, ["input", "tol", "recenter", "grid", "seed"])
    cfg["class"] = cls.to_dict()
    args.out.mkdir(parents=True, exist_ok=True)
    fm = _formats(args)
    if "json" in fm:
        write_report(body, args.out / "verify1d_report.json", cfg, digest, args.reproducible)
    if "csv" in fm:
        write_csv_rows(
            [
                {
                    "left_mass": rep.left_mass,
                    "right_mass": rep.right_mass,
                    "bound": rep.bound,
                    "margin_left": rep.margin_left,
                    "margin_right": rep.margin_right,
                    "passed": rep.passed,
                }
            ],
            args.out / "verify1d_report.csv",
        )
    if "svg" in fm:
        plt = _svg_setup(args.reproducible)
        fig, ax = plt.subplots(figsize=(6, 4))
        ax.plot(prof.grid, prof.values, label="input CDF")
        if prof.c is not None:
            F = model_cdf(cls, prof.c)
            ax.plot(prof.grid, F(prof.grid), "--", label="extremal model")
        ax.axvline(0.0, color="gray", lw=0.5)
        ax.axhline(rep.bound, color="gray", lw=0.5)
        ax.set_xlabel("x")
        ax.set_ylabel("R(x)")
        ax.legend()
        _save_svg(plt, fig, args.out / "verify1d_cdf.svg", args.reproducible)
    print(
        f"verify1d: left={rep.left_mass:.9f} right={rep.right_mass:.9f} "
        f"bound={rep.bound:.9f} passed={rep.passed}"
    )
    return EXIT_PASS if rep.passed else EXIT_FAIL


def _load_cloud(args) -> tuple[SampleCloud, str | None]:
    if args.input is not None:
        return load_samples_csv(args.input), str(args.input)
    rng = make_rng(args.seed)
    m = args.mc_samples
    gen = args.generate
    if gen == "triangle":
        return uniform_simplex(2, m, rng), None
    if gen == "simplex3":
        return uniform_simplex(3, m, rng), None
    if gen == "gaussian":
        return gaussian([0.0, 0.0], np.eye(2), m, rng), None
    if gen == "square":
        return (
            uniform_polytope(np.array([[0, 0], [1, 0], [0, 1], [1, 1]], float), m, rng),
            None,
        )
    raise ValueError("provide --input samples.csv or --generate")


def cmd_depth(args) -> int:
    mu, src = _load_cloud(args)
    point = (
        barycenter_nd(mu)
        if args.point is None
        else np.array([float(t) for t in args.point.split(",")])
    )
    cfg = DepthSearchConfig(n_directions=args.directions, seed=args.seed)
    if args.s is not None:
        bound_rep = verify_depth_bound(mu, args.s, tol=args.depth_tol, cfg=cfg, point=point)
        rep = bound_rep.report
        body = bound_rep.to_dict()
        passed = bound_rep.passed
    else:
        rep = tukey_depth(mu, point, cfg)
        body = rep.to_dict()
        passed = True
    rcfg = _resolved_config(
        args, ["input", "generate", "mc_samples", "directions", "seed", "s", "depth_tol"]
    )
    args.out.mkdir(parents=True, exist_ok=True)
    fm = _formats(args)
    if "json" in fm:
        write_report(
            body, args.out / "depth_report.json", rcfg, None if src is None else None, args.reproducible
        )
    if "svg" in fm:
        dirs = direction_sequence(mu.dim, min(args.directions, 720))
        masses = []
        t_all = dirs @ np.asarray(point)
        for v, t in zip(dirs, t_all):
            masses.append(float(np.sum(mu.weights[mu.points @ v <= t])))
        plt = _svg_setup(args.reproducible)
        fig, ax = plt.subplots(figsize=(6, 4))
        ax.plot(masses, lw=0.7)
        ax.axhline(rep.depth, color="red", lw=0.8, label=f"depth estimate {rep.depth:.4f}")
        ax.set_xlabel("direction index")
        ax.set_ylabel("halfspace mass")
        ax.legend()
        _save_svg(plt, fig, args.out / "depth_profile.svg", args.reproducible)
    print(
        f"depth: {rep.depth:.6f} at point {np.asarray(point).round(6).tolist()} "
        f"(directions={rep.n_directions}, samples={rep.n_samples}, passed={passed})"
    )
    return EXIT_PASS if passed else EXIT_FAIL


def cmd_marginal(args) -> int:
    if str(args.input).endswith(".json"):
        mu, spec, digest = load_density_spec(args.input)
        if not isinstance(mu, GridDensityND):
            raise ValueError("marginal of a 1-d density is itself; supply a grid or samples")
        advisory = False
    else:
        mu = load_samples_csv(args.input)
        digest = None
        advisory = True
    v = np.array([float(t) for t in args.direction.split(",")])
    marg = marginal_1d(mu, v, s=args.s)
    body = {
        "direction": (v / np.linalg.norm(v)).tolist(),
        "method": marg.method,
        "knots": marg.density.knots.tolist(),
        "values": marg.density(marg.density.knots).tolist(),
        "mass": marg.density.mass,
    }
    passed = True
    if marg.expected_class is not None:
        rep = check_class(marg.density, marg.expected_class, tol=args.class_tol)
        body["expected_class"] = marg.expected_class.to_dict()
        body["class_check"] = rep.to_dict()
        body["advisory"] = advisory
        if not rep.passed and not advisory:
            passed = False
        if not rep.passed and advisory:
            print("warning: sampled marginal fails the advisory shape check", file=sys.stderr)
    cfg = _resolved_config(args, ["input", "direction", "s", "class_tol", "seed"])
    args.out.mkdir(parents=True, exist_ok=True)
    if "json" in _formats(args):
        write_report(body, args.out / "marginal_report.json", cfg, digest, args.reproducible)
    print(f"marginal: method={marg.method} knots={len(body['knots'])} passed={passed}")
    return EXIT_PASS if passed else EXIT_FAIL


def _load_product(args):
    if args.fixture == "cylinder":
        return cylinder_fixture(), None
    if args.input is None:
        raise ValueError("provide --input product.json or --fixture cylinder")
    return load_product(args.input)


def cmd_product(args) -> int:
    pd, digest = _load_product(args)
    pd = pd.normalized()
    if args.recenter:
        pd = recenter_product(pd)
    bary = barycenter_busemann(pd)
    left = busemann_mass(pd, 0.0, "le")
    right = busemann_mass(pd, 0.0, "ge")
    rep = verify_main_theorem(pd, tol=args.tol)
    body = rep.to_dict()
    body["busemann_barycenter"] = bary
    body["masses"] = {"left": left, "right": right}
    cfg = _resolved_config(args, ["input", "fixture", "tol", "recenter", "seed"])
    args.out.mkdir(parents=True, exist_ok=True)
    if "json" in _formats(args):
        write_report(body, args.out / "product_report.json", cfg, digest, args.reproducible)
    print(
        f"product: masses=({left:.9f}, {right:.9f}) bound={rep.bound:.9f} "
        f"barycenter={bary:.3e} passed={rep.passed}"
    )
    return EXIT_PASS if rep.passed else EXIT_FAIL


def cmd_needles(args) -> int:
    pd, digest = _load_product(args)
    pd = pd.normalized()
    if args.recenter:
        pd = recenter_product(pd)
    if pd.cls is None:
        raise ValueError("product density carries no class tag")
    if args.needles is not None:
        decomposition, _ = load_needles(args.needles)
    else:
        decomposition = separable_needles(pd, tol=args.tol)
    rep = needle_verify(decomposition, pd, pd.cls, tol=args.tol, rng=make_rng(args.seed))
    body = rep.to_dict()
    if args.rigidity:
        rig = rigidity_profile_check(decomposition, pd.cls, tol=args.tol, product=pd)
        body["rigidity_profile"] = rig.to_dict()
    cfg = _resolved_config(args, ["input", "fixture", "needles", "tol", "rigidity", "seed"])
    args.out.mkdir(parents=True, exist_ok=True)
    if "json" in _formats(args):
        write_report(body, args.out / "needles_report.json", cfg, digest, args.reproducible)
    failing = [row["needle"] for row in rep.per_needle if not row["passed"]]
    if failing:
        print(f"needles: FAILED for needle indices {failing}", file=sys.stderr)
    print(
        f"needles: count={len(rep.per_needle)} slab_residual={rep.slab_residual:.3e} "
        f"global_left={rep.global_left:.9f} passed={rep.passed}"
    )
    return EXIT_PASS if rep.passed else EXIT_FAIL


def cmd_stability(args) -> int:
    d, spec, digest = load_density_spec(args.input)
    d = _require_1d(d)
    cls = _class_from_args(args)
    d = normalize(d)
    if args.recenter:
        d = recenter(d)
    cert = stability_certificate(d, cls, tol=args.cert_tol)
    body = cert.to_dict()
    body["seed"] = args.seed
    cfg = _resolved_config(args, ["input", "cert_tol", "recenter", "seed"])
    cfg["class"] = cls.to_dict()
    args.out.mkdir(parents=True, exist_ok=True)
    fm = _formats(args)
    if "json" in fm:
        write_report(body, args.out / "stability_report.json", cfg, digest, args.reproducible)
    if "csv" in fm:
        write_csv_rows([body | {"input": str(args.input)}], args.out / "stability_report.csv")
    if "svg" in fm:
        prof = cdf_profile(d)
        F = model_cdf(cls, cert.c)
        plt = _svg_setup(args.reproducible)
        fig, ax = plt.subplots(figsize=(6, 4))
        ax.plot(prof.grid, prof.values, label="input CDF")
        ax.plot(prof.grid, F(prof.grid), "--", label="fitted extremal model")
        ax.set_xlabel("x")
        ax.set_ylabel("CDF")
        ax.set_title(f"eps={cert.eps:.4g}  L1={cert.lhs:.4g}  bound={cert.rhs:.4g}")
        ax.legend()
        _save_svg(plt, fig, args.out / "stability_overlay.svg", args.reproducible)
    print(
        f"stability: eps={cert.eps:.6g} lhs={cert.lhs:.6g} rhs={cert.rhs:.6g} passed={cert.passed}"
    )
    return EXIT_PASS if cert.passed else EXIT_FAIL


def cmd_models(args) -> int:
    out = args.out
    out.mkdir(parents=True, exist_ok=True)
    n = args.n if args.n is not None else 2.0
    beta = args.beta if args.beta is not None else -3.0
    c = args.c
    save_json(density_to_spec(cone_density(n, c)), out / "cone.json")
    save_json(density_to_spec(exp_density(c)), out / "exponential.json")
    save_json(density_to_spec(neg_cone_density(beta, c)), out / "neg_cone.json")
    save_product(cylinder_fixture(args.fibers), out / "cylinder.json")
    print(f"models: wrote cone.json, exponential.json, neg_cone.json, cylinder.json to {out}")
    return EXIT_PASS


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="grunbaum",
        description="Verification toolkit for sharp halfspace-mass bounds at barycenters",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify1d", help="one-dimensional mass bound verification")
    p.add_argument("--input", type=Path, required=True, help="density spec JSON")
    p.add_argument("--recenter", action="store_true", help="translate the barycenter to 0")
    p.add_argument("--grid", type=int, default=2048)
    _add_class(p)
    _add_common(p)
    p.set_defaults(func=cmd_verify1d)

    p = sub.add_parser("depth", help="Tukey depth estimation / bound check")
    p.add_argument("--input", type=Path, default=None, help="samples CSV (one point per row)")
    p.add_argument(
        "--generate",
        choices=["triangle", "simplex3", "gaussian", "square"],
        default=None,
        help="generate samples instead of reading a CSV",
    )
    p.add_argument("--mc-samples", type=int, default=10**6, dest="mc_samples")
    p.add_argument("--point", default=None, help="comma-separated point (default: barycenter)")
    p.add_argument("--directions", type=int, default=720)
    p.add_argument("--s", type=float, default=None, help="check the depth bound for this s")
    p.add_argument("--depth-tol", type=float, default=0.01, dest="depth_tol")
    _add_common(p)
    p.set_defaults(func=cmd_depth)

    p = sub.add_parser("marginal", help="1-d marginal of samples or a grid density")
    p.add_argument("--input", type=Path, required=True, help="samples CSV or grid-density JSON")
    p.add_argument("--direction", required=True, help="comma-separated direction vector")
    p.add_argument("--s", type=float, default=None)
    p.add_argument("--class-tol", type=float, default=1e-6, dest="class_tol")
    _add_common(p)
    p.set_defaults(func=cmd_marginal)

    p = sub.add_parser("product", help="sublevel masses on a split product density")
    p.add_argument("--input", type=Path, default=None, help="product density JSON")
    p.add_argument("--fixture", choices=["cylinder"], default=None)
    p.add_argument("--recenter", action="store_true")
    _add_common(p)
    p.set_defaults(func=cmd_product)

    p = sub.add_parser("needles", help="verify a needle decomposition")
    p.add_argument("--input", type=Path, default=None, help="product density JSON")
    p.add_argument("--fixture", choices=["cylinder"], default=None)
    p.add_argument("--needles", type=Path, default=None, help="decomposition JSON (default: separable)")
    p.add_argument("--recenter", action="store_true")
    p.add_argument("--rigidity", action="store_true", help="also run the shared-scale profile check")
    _add_common(p)
    p.set_defaults(func=cmd_needles)

    p = sub.add_parser("stability", help="stability certificate for a 1-d density")
    p.add_argument("--input", type=Path, required=True, help="density spec JSON")
    p.add_argument("--recenter", action="store_true")
    p.add_argument("--cert-tol", type=float, default=1e-6, dest="cert_tol")
    _add_class(p)
    _add_common(p)
    p.set_defaults(func=cmd_stability)

    p = sub.add_parser("models", help="emit extremal model and cylinder fixture files")
    p.add_argument("--c", type=float, default=1.0)
    p.add_argument("--fibers", type=int, default=64)
    _add_class(p)
    _add_common(p)
    p.set_defaults(func=cmd_models)

    return parser


def _merge_config(args, argv) -> None:
    if getattr(args, "config", None) is None:
        return
    config = json.loads(Path(args.config).read_text())
    given = set()
    for tok in argv:
        if tok.startswith("--"):
            given.add(tok[2:].split("=")[0].replace("-", "_"))
    for key, value in config.items():
        dest = key.replace("-", "_")
        if dest in given or not hasattr(args, dest):
            continue
        if dest in ("input", "out", "needles"):
            value = Path(value)
        setattr(args, dest, value)


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _merge_config(args, argv)
        return args.func(args)
    except (PreconditionError,) as e:
        print(f"precondition violated: {e}", file=sys.stderr)
        return EXIT_INPUT
    except (ValueError, KeyError, OSError, json.JSONDecodeError) as e:
        print(f"input error: {e}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
