"""Report serialization: JSON (full nested structure), CSV (per-radius
rows of a stability report), and companion matplotlib figures rendered
next to the delimited output."""

from __future__ import annotations

import csv
import json
import os

import numpy as np

from .model import Diagnostic, ProblemInstance, to_dict
from .recession import QprVerdict, RecessionCone
from .regularity import RegularityResult
from .solver import SolveResult
from .stability import ConditionReport, StabilityReport

CSV_COLUMNS = ("delta", "usc_excess", "lsc_deficiency", "value_gap",
               "lipschitz_quotient_max", "infeasible_fraction",
               "unbounded_fraction")


def _jsonable(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        if np.isposinf(v):
            return "inf"
        if np.isneginf(v):
            return "-inf"
        if np.isnan(v):
            return "nan"
        return v
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    return obj


def solve_result_to_dict(r: SolveResult) -> dict:
    return _jsonable({
        "status": r.status,
        "value": r.value,
        "minimizers": [m.tolist() for m in r.minimizers],
        "diameter": r.diameter,
        "multipliers": [m.tolist() for m in r.multipliers],
        "unbounded_certificate": (r.unbounded_certificate.tolist()
                                  if r.unbounded_certificate is not None else None),
        "diagnostics": r.diagnostics,
    })


def regularity_to_dict(r: RegularityResult) -> dict:
    return _jsonable({
        "status": r.status,
        "witness": r.witness.tolist() if r.witness is not None else None,
        "margin": r.margin,
        "note": r.note,
    })


def recession_to_dict(cone: RecessionCone) -> dict:
    return _jsonable({
        "ambient_dim": cone.ambient_dim,
        "kernel_dim": cone.kernel_dim,
        "kernel_basis": cone.kernel_basis.tolist(),
        "halfspace_matrix": cone.halfspace_matrix.tolist(),
    })


def qpr_to_dict(v: QprVerdict) -> dict:
    return _jsonable({
        "trivial": v.trivial,
        "witness": v.witness.tolist() if v.witness is not None else None,
        "min_rayleigh": v.min_rayleigh,
        "inconclusive": v.inconclusive,
    })


def conditions_to_dict(c: ConditionReport) -> dict:
    return _jsonable({
        "cond_i": c.cond_i,
        "cond_ii": c.cond_ii,
        "cond_iii": c.cond_iii,
        "predictions": c.predictions,
        "value": c.value,
        "details": c.details,
    })


def stability_to_dict(rep: StabilityReport) -> dict:
    return _jsonable({
        "applicable": rep.applicable,
        "note": rep.note,
        "base_value": rep.base_value,
        "conditions": conditions_to_dict(rep.conditions) if rep.conditions else None,
        "rows": [{col: getattr(row, col) for col in CSV_COLUMNS} for row in rep.rows],
    })


def diagnostics_to_dict(diags: list[Diagnostic]) -> dict:
    return {"valid": not diags,
            "diagnostics": [{"kind": d.kind, "where": d.where, "detail": d.detail}
                            for d in diags]}


def write_json(payload: dict, path) -> None:
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_stability_csv(rep: StabilityReport, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(CSV_COLUMNS)
        for row in rep.rows:
            w.writerow([repr(float(getattr(row, col))) for col in CSV_COLUMNS])


def render_stability_figure(rep: StabilityReport, path) -> None:
    """Log-log moduli-vs-radius figure next to the CSV output."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    deltas = [row.delta for row in rep.rows]
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 3.6))
    for col in ("usc_excess", "lsc_deficiency", "value_gap"):
        ax1.loglog(deltas, [max(getattr(r, col), 1e-16) for r in rep.rows],
                   marker="o", label=col)
    ax1.set_xlabel("perturbation radius")
    ax1.set_ylabel("modulus")
    ax1.legend(fontsize=8)
    ax1.grid(True, which="both", alpha=0.3)

    ax2.semilogx(deltas, [r.lipschitz_quotient_max for r in rep.rows],
                 marker="s", label="lipschitz_quotient_max")
    ax2.semilogx(deltas, [r.infeasible_fraction for r in rep.rows],
                 marker="^", label="infeasible_fraction")
    ax2.semilogx(deltas, [r.unbounded_fraction for r in rep.rows],
                 marker="v", label="unbounded_fraction")
    ax2.set_xlabel("perturbation radius")
    ax2.legend(fontsize=8)
    ax2.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)


def emit_stability(rep: StabilityReport, fmt: str, path, plot: bool = True) -> list[str]:
    """Write a stability report; CSV output also renders a figure."""
    written = []
    if fmt == "json":
        write_json(stability_to_dict(rep), path)
        written.append(str(path))
    elif fmt == "csv":
        write_stability_csv(rep, path)
        written.append(str(path))
        if plot and rep.rows:
            figpath = os.path.splitext(str(path))[0] + ".png"
            render_stability_figure(rep, figpath)
            written.append(figpath)
    else:
        raise ValueError(f"unknown format {fmt!r}")
    return written
