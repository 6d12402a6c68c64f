"""Deterministic trial-and-error: scan a parameter box for embedded flex ranges.

Samples come from a seeded scrambled Halton sequence, so a scan with the same
seed and budget reproduces its table exactly. Each sample builds the model,
traces its flex over the empirically found motion range, and scores the
longest contiguous embedded driver run.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.stats import qmc

from .catalog import MODELS, catalog
from .collision import path_embedding
from .errors import CatalogError, SolveError
from .flexion import DistanceDriver, find_motion_range, problem_for, trace
from .meshio import mesh_to_dict
from .twinning import Crinkle, Twin


@dataclass(frozen=True)
class SampleResult:
    params: dict[str, float]
    status: str  # "ok" | "build_failed" | "trace_failed"
    embedded_range: float
    embedded_fraction: float
    worst_depth: float
    driver_range: tuple[float, float] | None
    detail: str = ""

    def to_dict(self) -> dict:
        return {
            "params": {k: float(v) for k, v in sorted(self.params.items())},
            "status": self.status,
            "embedded_range": self.embedded_range,
            "embedded_fraction": self.embedded_fraction,
            "worst_depth": self.worst_depth,
            "driver_range": list(self.driver_range) if self.driver_range else None,
            "detail": self.detail,
        }


@dataclass(frozen=True)
class EmbeddingScan:
    template: str
    seed: int
    box: dict[str, tuple[float, float]]
    samples: tuple[SampleResult, ...]
    best_index: int | None

    def to_dict(self) -> dict:
        return {
            "template": self.template,
            "seed": self.seed,
            "box": {k: list(v) for k, v in sorted(self.box.items())},
            "samples": [s.to_dict() for s in self.samples],
            "best_index": self.best_index,
        }


def _problem_for_model(obj, name: str):
    if isinstance(obj, (Twin, Crinkle)):
        return problem_for(obj)
    spec = MODELS[name]
    if spec.driver_labels is None:
        raise SolveError(f"model {name!r} declares no default driver", "missing_driver")
    i = obj.index_of(spec.driver_labels[0])
    j = obj.index_of(spec.driver_labels[1])
    return problem_for(obj, drivers=[DistanceDriver(i, j)])


def _mesh_of(obj):
    return obj.mesh if isinstance(obj, (Twin, Crinkle)) else obj


def evaluate_sample(template: str, params: dict[str, float], frames: int = 25) -> SampleResult:
    """Build -> trace over the discovered motion range -> embedding score."""
    try:
        obj = catalog(template, params)
        problem = _problem_for_model(obj, template)
    except (CatalogError, SolveError, ValueError) as exc:
        return SampleResult(params, "build_failed", 0.0, 0.0, 0.0, None, detail=str(exc))
    try:
        lo, hi = find_motion_range(problem)
        if hi - lo <= 0:
            return SampleResult(params, "trace_failed", 0.0, 0.0, 0.0, None, detail="no motion")
        path = trace(problem, np.linspace(lo, hi, frames))
    except SolveError as exc:
        return SampleResult(params, "trace_failed", 0.0, 0.0, 0.0, None, detail=str(exc))
    emb = path_embedding(path, _mesh_of(obj))
    n = len(emb.embedded_flags)
    return SampleResult(
        params=params,
        status="ok",
        embedded_range=emb.embedded_range_length,
        embedded_fraction=sum(emb.embedded_flags) / n if n else 0.0,
        worst_depth=emb.worst_depth,
        driver_range=(lo, hi),
    )


def search_embedding(
    template: str,
    box: dict[str, tuple[float, float]],
    budget: int,
    seed: int = 0,
    frames: int = 25,
    out_dir: str | Path | None = None,
) -> EmbeddingScan:
    """Low-discrepancy scan of the box, ranked by embedded driver-range length.

    The box center is evaluated first (it must at least build); the remaining
    budget comes from a scrambled Halton sequence with the given seed. When
    `out_dir` is set, the best sample's mesh and path are persisted there.
    """
    spec = MODELS.get(template)
    if spec is None:
        raise CatalogError(f"unknown template {template!r}")
    names = sorted(box)
    lo = np.array([box[k][0] for k in names], dtype=float)
    hi = np.array([box[k][1] for k in names], dtype=float)
    if np.any(hi < lo):
        raise CatalogError("parameter box has inverted bounds")

    center = dict(zip(names, (lo + hi) / 2.0))
    results = [evaluate_sample(template, center, frames)]
    if results[0].status == "build_failed":
        return EmbeddingScan(template, seed, dict(box), tuple(results), None)

    if budget > 1 and names:
        sampler = qmc.Halton(d=len(names), scramble=True, seed=seed)
        pts = sampler.random(budget - 1)
        for row in pts:
            params = dict(zip(names, lo + row * (hi - lo)))
            results.append(evaluate_sample(template, params, frames))

    best = None
    for k, r in enumerate(results):
        if r.status != "ok":
            continue
        if best is None or r.embedded_range > results[best].embedded_range:
            best = k
    scan = EmbeddingScan(template, seed, dict(box), tuple(results), best)

    if out_dir is not None and best is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        obj = catalog(template, results[best].params)
        problem = _problem_for_model(obj, template)
        lo_d, hi_d = results[best].driver_range
        path = trace(problem, np.linspace(lo_d, hi_d, frames))
        (out / "best_mesh.json").write_text(json.dumps(mesh_to_dict(_mesh_of(obj)), indent=2))
        (out / "best_path.json").write_text(json.dumps(path.to_dict()))
        (out / "scan.json").write_text(json.dumps(scan.to_dict(), indent=2))
    return scan
