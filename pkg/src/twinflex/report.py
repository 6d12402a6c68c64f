"""Check/flex reports: delimited tables plus rendered diagnostic figures.

Every report lands as a CSV file next to one or more PNG figures in the
requested directory, so a run leaves both a machine-readable table and
something a human can eyeball.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .collision import self_intersections
from .errors import MeshError
from .geometry import TriMesh, signed_volume
from .rigidity import analyze, dof_count, framework_from_mesh


def check_mesh(mesh: TriMesh, rank_tol: float = 1e-8) -> dict:
    """Rigidity + intersection + volume summary of a single mesh."""
    fw = framework_from_mesh(mesh)
    rep = analyze(fw, rank_tol)
    inter = self_intersections(mesh)
    vol = None
    if mesh.is_closed():
        vol = signed_volume(mesh)
    return {
        "dof": dof_count(fw),
        "rank": rep.matrix_rank,
        "trivial": rep.trivial_motions,
        "flex_modes": len(rep.flex_modes),
        "isostatic": rep.is_isostatic,
        "singular_values": [float(s) for s in rep.singular_values],
        "volume": vol,
        "embedded": inter.is_embedded,
        "intersections": [p.to_dict() for p in inter.pairs],
        "touching": len(inter.touching),
    }


def check_path(mesh: TriMesh, frames: list[dict], rank_tol: float = 1e-8) -> dict:
    """Per-frame embeddedness and volume along a traced path."""
    rows = []
    for k, fr in enumerate(frames):
        coords = np.asarray(fr["vertices"], dtype=float)
        if coords.shape != mesh.vertices.shape:
            raise MeshError(f"frame {k} has {coords.shape[0]} vertices, mesh has {len(mesh.vertices)}")
        inter = self_intersections(mesh, coords, frame_index=k)
        vol = signed_volume(mesh, coords) if mesh.is_closed() else None
        diag = fr.get("diag", {})
        rows.append({
            "frame": k,
            "t": fr.get("t"),
            "edge_err": diag.get("edge_err"),
            "volume": vol,
            "sym_residual": diag.get("sym_residual"),
            "min_sv": diag.get("min_sv"),
            "embedded": inter.is_embedded,
            "intersections": len(inter.pairs),
            "pairs": [[p.f1, p.f2] for p in inter.pairs],
        })
    static = check_mesh(mesh, rank_tol)
    return {"mesh_check": static, "frames": rows}


def _write_csv(path: Path, rows: list[dict], columns: list[str]) -> None:
    with path.open("w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=columns)
        writer.writeheader()
        for row in rows:
            writer.writerow({c: row.get(c) for c in columns})


def render_mesh_report(report: dict, out_dir: str | Path) -> list[Path]:
    """report.csv plus the rigidity spectrum figure for a single-mesh check."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []

    columns = ["dof", "rank", "trivial", "flex_modes", "isostatic", "volume", "embedded", "touching"]
    csv_path = out / "report.csv"
    _write_csv(csv_path, [report], columns)
    written.append(csv_path)

    sv = np.asarray(report["singular_values"], dtype=float)
    fig, ax = plt.subplots(figsize=(6, 4))
    if sv.size:
        ax.semilogy(np.arange(1, len(sv) + 1), np.maximum(sv, 1e-300), "o-", ms=4)
    ax.set_xlabel("singular value index")
    ax.set_ylabel("singular value")
    ax.set_title(f"rigidity spectrum (rank {report['rank']}, {report['flex_modes']} flex mode(s))")
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    fig_path = out / "rigidity_spectrum.png"
    fig.savefig(fig_path, dpi=150)
    plt.close(fig)
    written.append(fig_path)

    (out / "report.json").write_text(json.dumps(report, indent=2))
    written.append(out / "report.json")
    return written


def render_path_report(report: dict, out_dir: str | Path) -> list[Path]:
    """frames.csv plus a 2x2 diagnostics figure for a traced path."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    rows = report["frames"]

    columns = ["frame", "t", "edge_err", "volume", "sym_residual", "min_sv", "embedded", "intersections"]
    csv_path = out / "frames.csv"
    _write_csv(csv_path, rows, columns)
    written.append(csv_path)

    t = np.array([r["t"] if isinstance(r["t"], (int, float)) else r["frame"] for r in rows], dtype=float)

    def series(key):
        return np.array([np.nan if r.get(key) is None else r[key] for r in rows], dtype=float)

    fig, axes = plt.subplots(2, 2, figsize=(10, 7))
    ax = axes[0, 0]
    ax.semilogy(t, np.maximum(series("edge_err"), 1e-300))
    ax.set_title("max relative edge error")
    ax = axes[0, 1]
    vol = series("volume")
    ax.plot(t, vol)
    ax.set_title("signed volume")
    if np.isfinite(vol).any():
        drift = np.nanmax(vol) - np.nanmin(vol)
        ax.annotate(f"drift {drift:.2e}", xy=(0.02, 0.92), xycoords="axes fraction")
    ax = axes[1, 0]
    ax.semilogy(t, np.maximum(series("sym_residual"), 1e-300))
    ax.set_title("equator symmetry residual")
    ax = axes[1, 1]
    ax.semilogy(t, np.maximum(series("min_sv"), 1e-300), label="min singular value")
    emb = series("embedded")
    if np.isfinite(emb).any():
        ax2 = ax.twinx()
        ax2.fill_between(t, 0, emb, alpha=0.2, step="mid", color="green")
        ax2.set_ylim(0, 3)
        ax2.set_yticks([0, 1])
        ax2.set_ylabel("embedded")
    ax.set_title("constraint conditioning / embedded frames")
    for a in axes.flat:
        a.grid(True, alpha=0.3)
        a.set_xlabel("driver value")
    fig.tight_layout()
    fig_path = out / "diagnostics.png"
    fig.savefig(fig_path, dpi=150)
    plt.close(fig)
    written.append(fig_path)

    (out / "report.json").write_text(json.dumps(report, indent=2))
    written.append(out / "report.json")
    return written


def render_scan_report(scan: dict, out_dir: str | Path) -> list[Path]:
    """scan.csv plus the embedded-range bar chart for a parameter scan."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    rows = []
    for k, s in enumerate(scan["samples"]):
        row = {"sample": k, "status": s["status"], "embedded_range": s["embedded_range"],
               "embedded_fraction": s["embedded_fraction"], "worst_depth": s["worst_depth"]}
        row.update({f"p_{k2}": v for k2, v in s["params"].items()})
        rows.append(row)
    columns = list(rows[0].keys()) if rows else ["sample"]
    csv_path = out / "scan.csv"
    _write_csv(csv_path, rows, columns)
    written.append(csv_path)

    fig, ax = plt.subplots(figsize=(8, 4))
    ranges = [r["embedded_range"] for r in rows]
    colors = ["tab:green" if scan["samples"][k]["status"] == "ok" else "tab:red" for k in range(len(rows))]
    ax.bar(np.arange(len(rows)), ranges, color=colors)
    if scan.get("best_index") is not None:
        ax.axvline(scan["best_index"], color="k", ls="--", lw=1)
    ax.set_xlabel("sample")
    ax.set_ylabel("embedded driver range")
    ax.set_title(f"scan of {scan['template']} (seed {scan['seed']})")
    fig.tight_layout()
    fig_path = out / "scan.png"
    fig.savefig(fig_path, dpi=150)
    plt.close(fig)
    written.append(fig_path)
    return written
