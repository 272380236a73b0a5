"""Output files of a run: per-point JSONL, state sidecars, events, summary."""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from ._linalg import det_sign
from .problem_model import Point


def _plain(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, Point):
        return {"lambda": obj.lam, "u": obj.u.tolist()}
    raise TypeError(f"not serializable: {type(obj).__name__}")


def write_json(path: Path, payload) -> None:
    text = json.dumps(payload, indent=2, sort_keys=True, default=_plain)
    path.write_text(text + "\n", encoding="utf-8")


def point_records(system, branch, mesh=None) -> list[dict]:
    from .mcbvp import grad_sup

    by_step: dict[int, list[str]] = {}
    for ev in branch.events:
        by_step.setdefault(ev.step, []).append(ev.kind.value)
    domain = system.domain
    records = []
    for k, p in enumerate(branch.points):
        rec = {
            "step": k,
            "lambda": p.lam,
            "u_inf_norm": float(np.max(np.abs(p.u))),
            "det_sign": det_sign(system.Fu(p)),
            "margin": float(domain.margin(p.lam, p.u)),
            "residual_norm": system.residual_norm(p),
            "event": by_step.get(k),
        }
        if mesh is not None:
            rec["grad_inf_norm"] = grad_sup(mesh, p.u)
        records.append(rec)
    return records


def write_states(path: Path, branch) -> None:
    """One row per point: lambda followed by the state vector, full precision."""
    with path.open("w", encoding="utf-8") as fh:
        for p in branch.points:
            fh.write(" ".join(repr(float(v)) for v in p.vector()) + "\n")


def read_states(path: Path) -> list[Point]:
    rows = [line.split() for line in Path(path).read_text(encoding="utf-8").splitlines() if line]
    return [Point(float(r[0]), [float(v) for v in r[1:]]) for r in rows]


def write_branch(outdir: Path, system, branch, mesh=None) -> list[dict]:
    records = point_records(system, branch, mesh)
    with (outdir / f"branch_{branch.side.value}.jsonl").open("w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec, sort_keys=True, default=_plain) + "\n")
    write_states(outdir / f"states_{branch.side.value}.txt", branch)
    return records


def write_summary(outdir: Path, records_by_side: dict) -> None:
    with (outdir / "summary.csv").open("w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["side", "step", "lambda", "u_inf_norm", "det_sign", "margin"])
        for side, records in records_by_side.items():
            for r in records:
                w.writerow([side, r["step"], repr(r["lambda"]), repr(r["u_inf_norm"]),
                            r["det_sign"], repr(r["margin"])])
