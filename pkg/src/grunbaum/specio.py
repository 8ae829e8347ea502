"""File formats: density specs, sample CSVs, product densities, reports.

Density spec (JSON): {"family": ..., "params": {...}, "support": [a, b],
"grid": [...], "values": [...]}; the additional family "grid" carries
{"axes": [[...], ...], "values": nested} and loads as a GridDensityND.
Product density files carry a t-grid, a fiber table, row-major values and a
class tag; needle files are a list of (weight, density spec) pairs.
Reports are JSON documents embedding the resolved configuration, the input
digest, and (unless suppressed for reproducibility) a timestamp.
"""

from __future__ import annotations

import csv
import datetime
import hashlib
import json
import math
from pathlib import Path

import numpy as np

from .concavity import ConcavityClass
from .density import Density1D, make_density, normalize, tabulated_density
from .euclidean import GridDensityND, SampleCloud
from .product import FiberSpace, Needle, NeedleDecomposition, ProductDensity

__all__ = [
    "density_to_spec",
    "file_digest",
    "load_density_spec",
    "load_grid_density",
    "load_needles",
    "load_product",
    "load_samples_csv",
    "save_json",
    "save_product",
    "write_csv_rows",
    "write_report",
]


def file_digest(path: str | Path) -> str:
    h = hashlib.sha256()
    h.update(Path(path).read_bytes())
    return h.hexdigest()


def _jsonable(obj):
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, float) and math.isinf(obj):
        return "inf" if obj > 0 else "-inf"
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return obj


def save_json(doc: dict, path: str | Path) -> None:
    Path(path).write_text(json.dumps(_jsonable(doc), sort_keys=True, indent=2) + "\n")


def load_density_spec(path: str | Path) -> tuple[Density1D | GridDensityND, dict, str]:
    """Load a density spec; returns (density, raw spec, sha256 digest)."""
    spec = json.loads(Path(path).read_text())
    digest = file_digest(path)
    if spec.get("family") == "grid":
        return load_grid_density(spec), spec, digest
    return make_density(spec), spec, digest


def load_grid_density(spec: dict) -> GridDensityND:
    axes = tuple(np.asarray(a, dtype=float) for a in spec["axes"])
    values = np.asarray(spec["values"], dtype=float)
    return GridDensityND(axes, values)


def density_to_spec(d: Density1D) -> dict:
    """Spec document for a density of one of the named families."""
    fam = d.family
    if fam in ("cone", "exponential", "neg_cone"):
        params = {k: v for k, v in d.params.items() if k in ("N", "c", "orientation")}
        return {"family": fam, "params": params}
    if fam == "uniform":
        return {"family": "uniform", "support": [d.params["a"], d.params["b"]]}
    if fam == "polynomial":
        return {
            "family": "polynomial",
            "params": {"coeffs": d.params["coeffs"]},
            "support": [d.params["a"], d.params["b"]],
        }
    if fam == "gaussian":
        return {
            "family": "gaussian",
            "params": {"mean": d.params["mean"], "sigma": d.params["sigma"]},
            "support": [
                None if math.isinf(d.params["a"]) else d.params["a"],
                None if math.isinf(d.params["b"]) else d.params["b"],
            ],
        }
    if d.knots is not None:
        xs = np.asarray(d.knots, dtype=float)
        return {"family": "tabulated", "grid": xs.tolist(), "values": d(xs).tolist()}
    raise ValueError(f"cannot serialize density family {fam!r}")


def load_samples_csv(path: str | Path) -> SampleCloud:
    """One point per row, comma separated; an optional header row is skipped."""
    rows = []
    with open(path, newline="") as fh:
        for row in csv.reader(fh):
            if not row:
                continue
            try:
                rows.append([float(x) for x in row])
            except ValueError:
                if rows:
                    raise
                continue  # header
    if not rows:
        raise ValueError(f"no numeric rows in {path}")
    return SampleCloud(np.asarray(rows, dtype=float))


def save_samples_csv(cloud: SampleCloud, path: str | Path) -> None:
    np.savetxt(path, cloud.points, delimiter=",", fmt="%.17g")


def save_product(pd: ProductDensity, path: str | Path) -> None:
    doc = {
        "t_grid": pd.t_grid.tolist(),
        "fibers": {
            "weights": pd.fiber.weights.tolist(),
            "labels": list(pd.fiber.labels),
        },
        "values": pd.values.tolist(),  # row-major: one row per t, one column per fiber
        "class": None if pd.cls is None else pd.cls.to_dict(),
    }
    save_json(doc, path)


def load_product(path: str | Path) -> tuple[ProductDensity, str]:
    doc = json.loads(Path(path).read_text())
    fiber = FiberSpace(
        np.asarray(doc["fibers"]["weights"], dtype=float),
        tuple(doc["fibers"].get("labels", ())),
    )
    cls = None if doc.get("class") is None else ConcavityClass.from_dict(doc["class"])
    pd = ProductDensity(
        np.asarray(doc["t_grid"], dtype=float),
        fiber,
        np.asarray(doc["values"], dtype=float),
        cls,
    )
    return pd, file_digest(path)


def save_needles(decomposition: NeedleDecomposition, path: str | Path) -> None:
    doc = {
        "needles": [
            {"weight": n.weight, "label": n.label, "density": density_to_spec(n.density)}
            for n in decomposition.needles
        ]
    }
    save_json(doc, path)


def load_needles(path: str | Path) -> tuple[NeedleDecomposition, str]:
    doc = json.loads(Path(path).read_text())
    needles = []
    for item in doc["needles"]:
        spec = item["density"]
        if spec.get("family") == "grid":
            raise ValueError("needle densities must be one-dimensional")
        d = normalize(make_density(spec))
        needles.append(Needle(float(item["weight"]), d, item.get("label")))
    return NeedleDecomposition(tuple(needles)), file_digest(path)


def write_report(
    body: dict,
    path: str | Path,
    config: dict,
    input_digest: str | None = None,
    reproducible: bool = False,
) -> None:
    doc = dict(body)
    doc["config"] = config
    if input_digest is not None:
        doc["input_digest"] = input_digest
    if not reproducible:
        doc["timestamp"] = datetime.datetime.now(datetime.timezone.utc).isoformat()
    save_json(doc, path)


def write_csv_rows(rows: list[dict], path: str | Path) -> None:
    if not rows:
        Path(path).write_text("")
        return
    keys = list(rows[0].keys())
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=keys)
        writer.writeheader()
        for row in rows:
            writer.writerow({k: _jsonable(v) for k, v in row.items()})


def tabulated_from_grid(xs, ys) -> Density1D:
    return tabulated_density(np.asarray(xs, dtype=float), np.asarray(ys, dtype=float))
