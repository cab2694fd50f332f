"""Text serialisation of results (CSV, JSON, JSON lines).

CSV floats use 17 significant digits; JSON floats use Python's shortest
round-trip repr.  Both are locale independent and every document ends in
a newline.
"""

from __future__ import annotations

import csv
import io
import json
from typing import Iterable, Sequence

import numpy as np

from .analysis import BasinReport, ThresholdReport
from .simplex import FixedPoint, GradientField

FIELD_COLUMNS = ["x_d", "x_c", "x_cm", "dx_d", "dx_c", "dx_cm"]


def fmt(value) -> str:
    if isinstance(value, (int, np.integer)) and not isinstance(value, bool):
        return str(int(value))
    return format(float(value), ".17g")


def _csv(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([v if isinstance(v, str) else fmt(v) for v in row])
    return buf.getvalue()


def dumps_json(obj, indent: int | None = 2) -> str:
    return json.dumps(_plain(obj), indent=indent, sort_keys=True) + "\n"


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    return obj


def field_csv(field: GradientField) -> str:
    extra = list(field.extra)
    rows = (
        [*p, *v, *(field.extra[c][n] for c in extra)]
        for n, (p, v) in enumerate(zip(field.points, field.vectors))
    )
    return _csv(FIELD_COLUMNS + extra, rows)


def field_json(field: GradientField) -> str:
    return dumps_json(
        {
            "resolution": field.resolution,
            "points": field.points,
            "vectors": field.vectors,
            **{k: v for k, v in field.extra.items()},
        },
        indent=None,
    )


def read_field_csv(text: str) -> GradientField:
    rows = list(csv.DictReader(io.StringIO(text)))
    pts = np.array([[float(r[c]) for c in FIELD_COLUMNS[:3]] for r in rows])
    vec = np.array([[float(r[c]) for c in FIELD_COLUMNS[3:]] for r in rows])
    extra_cols = [c for c in (rows[0].keys() if rows else []) if c not in FIELD_COLUMNS]
    extra = {c: np.array([int(r[c]) for r in rows]) for c in extra_cols}
    return GradientField(0, pts, vec, extra)


def fixed_points_json(points: Sequence[FixedPoint]) -> str:
    return dumps_json([fp.to_dict() for fp in points])


def fixed_points_csv(points: Sequence[FixedPoint]) -> str:
    rows = []
    for fp in points:
        e = list(fp.eigenvalues)
        rows.append([*fp.location, e[0].real, e[0].imag, e[1].real, e[1].imag, fp.stability.value])
    return _csv(["x_d", "x_c", "x_cm", "re1", "im1", "re2", "im2", "stability"], rows)


def basin_csv(report: BasinReport) -> str:
    return _csv(["x_d", "x_c", "x_cm", "label"], ([*p, str(lab)] for p, lab in zip(report.points, report.labels)))


def basin_json(report: BasinReport) -> str:
    return dumps_json(report.summary())


def thresholds_jsonl(reports: Sequence[ThresholdReport]) -> str:
    return "".join(dumps_json(r.to_dict(), indent=None) for r in reports)


def thresholds_csv(reports: Sequence[ThresholdReport]) -> str:
    rows = [
        [r.to_dict()["perception"], "" if r.m_star is None else fmt(r.m_star), r.method,
         str(r.interior).lower(), r.error or ""]
        for r in reports
    ]
    return _csv(["perception", "m_star", "method", "interior", "error"], rows)


def trajectory_csv(path: np.ndarray) -> str:
    return _csv(["step", "k_d", "k_c", "k_cm"], ([n, *k] for n, k in enumerate(path)))


def trajectory_json(path: np.ndarray) -> str:
    return dumps_json({"columns": ["k_d", "k_c", "k_cm"], "path": path}, indent=None)


def matrix_csv(states: np.ndarray, matrix: np.ndarray) -> str:
    m = len(states)
    header = ["index", "k_d", "k_c", "k_cm"] + [f"p{j}" for j in range(m)]
    return _csv(header, ([n, *states[n], *matrix[n]] for n in range(m)))


def matrix_json(states: np.ndarray, matrix: np.ndarray) -> str:
    return dumps_json({"states": states, "matrix": matrix}, indent=None)


def stationary_csv(states: np.ndarray, pi: np.ndarray) -> str:
    return _csv(["index", "k_d", "k_c", "k_cm", "probability"],
                ([n, *states[n], pi[n]] for n in range(len(states))))


def stationary_json(states: np.ndarray, pi: np.ndarray) -> str:
    return dumps_json({"states": states, "distribution": pi}, indent=None)
