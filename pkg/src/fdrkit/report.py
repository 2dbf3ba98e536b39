"""Rendering of evaluation results as text tables, JSON and CSV.

The text table has one column per operating point and one row per
``(enroll-probe)`` FMR cell, per-demographic FNMR row, and the FDR row.
JSON carries every rendered number at full precision next to its rounded
string, so the two outputs always agree.
"""

from __future__ import annotations

import csv
import io
import json
from typing import Mapping, Sequence

from .fdr import FdrCurve, GridEvaluation, verdict

RATE_DECIMALS = 3
FDR_DECIMALS = 4
MISSING = "-"


def fmt_rate(value: float | None) -> str:
    return MISSING if value is None else f"{value:.{RATE_DECIMALS}f}"


def fmt_fdr(value: float) -> str:
    """Four decimals with one trailing zero dropped: 0.9205, 0.989, 1.000."""
    text = f"{value:.{FDR_DECIMALS}f}"
    return text[:-1] if text.endswith("0") else text


def fmt_exponent(x: float) -> str:
    return f"10^-{x:g}"


def _cell(value: float | None, text: str) -> dict:
    return {"value": value, "text": text}


def evaluation_report(evaluation: GridEvaluation, alpha: float = 0.5,
                      epsilon: float | None = None, label: str | None = None) -> dict:
    """Plain-data summary of a grid evaluation (the JSON document)."""
    curve = evaluation.curve(alpha)
    labels = sorted({d for t in evaluation.tables for d in t.labels})
    pairs = sorted({p for t in evaluation.tables for p in t.fmr_cells})
    points = []
    for x, table, point in zip(evaluation.grid, evaluation.tables, curve.points):
        th = point.threshold
        entry = {
            "exponent": x,
            "tau": th.tau,
            "target_fmr": th.target_fmr,
            "achieved_dev_fmr": th.achieved_dev_fmr,
            "degenerate": th.degenerate,
            "fmr": [
                {"enroll": e, "probe": p, **_cell(table.fmr(e, p), fmt_rate(table.fmr(e, p))),
                 **({"errors": table.fmr_cells[(e, p)].errors, "total": table.fmr_cells[(e, p)].total}
                    if (e, p) in table.fmr_cells else {})}
                for e, p in pairs
            ],
            "fnmr": [
                {"demographic": d, **_cell(table.fnmr(d), fmt_rate(table.fnmr(d))),
                 **({"errors": table.fnmr_cells[d].errors, "total": table.fnmr_cells[d].total}
                    if d in table.fnmr_cells else {})}
                for d in labels
            ],
            "a_gap": point.a_gap,
            "b_gap": point.b_gap,
            "fdr": _cell(point.fdr, fmt_fdr(point.fdr)),
        }
        if epsilon is not None:
            entry["fair"] = verdict(point.fdr, epsilon).fair
        points.append(entry)
    doc = {
        "label": label,
        "alpha": alpha,
        "epsilon": epsilon,
        "demographics": labels,
        "points": points,
        "aufdr": None if curve.aufdr is None else _cell(curve.aufdr, fmt_fdr(curve.aufdr)),
        "exponent_range": list(curve.exponent_range),
        "diagnostics": list(evaluation.diagnostics),
    }
    return doc


def _grid_text(rows: Sequence[Sequence[str]]) -> str:
    widths = [max(len(r[i]) for r in rows) for i in range(len(rows[0]))]
    lines = []
    for r in rows:
        first = r[0].ljust(widths[0])
        rest = [c.rjust(w) for c, w in zip(r[1:], widths[1:])]
        lines.append("  ".join([first, *rest]).rstrip())
    return "\n".join(lines)


def render_table(doc: Mapping) -> str:
    """Text table in the per-demographic ``(e-p)`` layout."""
    points = doc["points"]
    rows = [["", *(fmt_exponent(p["exponent"]) for p in points)]]
    rows.append(["tau", *(f"{p['tau']:.6g}" for p in points)])
    for i, c in enumerate(points[0]["fmr"]):
        rows.append([f"FMR  ({c['enroll']}-{c['probe']})", *(p["fmr"][i]["text"] for p in points)])
    for i, c in enumerate(points[0]["fnmr"]):
        d = c["demographic"]
        rows.append([f"FNMR ({d}-{d})", *(p["fnmr"][i]["text"] for p in points)])
    rows.append([f"FDR (alpha={doc['alpha']:g})", *(p["fdr"]["text"] for p in points)])
    if doc["epsilon"] is not None:
        rows.append([f"fair (eps={doc['epsilon']:g})", *("yes" if p["fair"] else "no" for p in points)])
    out = []
    if doc.get("label"):
        out.append(str(doc["label"]))
    out.append(_grid_text(rows))
    lo, hi = doc["exponent_range"]
    if doc["aufdr"] is not None:
        out.append(f"AUFDR = {doc['aufdr']['text']} over x in [{lo:g}, {hi:g}]")
    else:
        out.append(f"AUFDR undefined for a single operating point (x = {lo:g})")
    degenerate = [fmt_exponent(p["exponent"]) for p in points if p["degenerate"]]
    if degenerate:
        out.append("reject-all threshold at: " + ", ".join(degenerate))
    return "\n".join(out) + "\n"


def dumps_json(doc) -> str:
    return json.dumps(doc, indent=2, sort_keys=False, allow_nan=False) + "\n"


def curves_csv(curves: Mapping[str, FdrCurve]) -> str:
    """Long-form ``system,x,fdr`` rows for one or more labelled curves."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["system", "x", "fdr"])
    for name, curve in curves.items():
        for p in curve.points:
            w.writerow([name, f"{p.exponent:g}", repr(p.fdr)])
    return buf.getvalue()


def aufdr_csv(curves: Mapping[str, FdrCurve]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["system", "alpha", "aufdr", "x_min", "x_max"])
    for name, c in curves.items():
        w.writerow([name, f"{c.alpha:g}", "" if c.aufdr is None else repr(c.aufdr),
                    f"{c.exponent_range[0]:g}", f"{c.exponent_range[1]:g}"])
    return buf.getvalue()


def det_csv(series: Mapping[str, tuple]) -> str:
    """``demographic,tau,fmr,fnmr`` rows; ``series[d] = (taus, fmr, fnmr)``."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["demographic", "tau", "fmr", "fnmr"])
    for d, (taus, fm, fn) in series.items():
        for t, a, b in zip(taus.tolist(), fm.tolist(), fn.tolist()):
            w.writerow([d, repr(t), repr(a), repr(b)])
    return buf.getvalue()
