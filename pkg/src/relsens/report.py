"""Text, CSV and JSON-lines renderings of analysis results.

Text and CSV carry the same numbers, each printed with six significant
digits. JSON lines keep full precision so a study summary can be read back
exactly.
"""
from __future__ import annotations

import csv
import io
import json
import math

from .harness import StudyRow, StudySummary

FORMATS = ("text", "csv", "json-lines")


def fmt(v):
    if v is None:
        return ""
    if isinstance(v, str):
        return v
    if isinstance(v, int) and not isinstance(v, bool):
        return str(v)
    v = float(v)
    if math.isnan(v):
        return "nan"
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return f"{v:.6g}"


def summary_rows(summary):
    rows = []
    for r in summary.rows:
        rows.append(dict(method=r.method, N=r.n_samples, delta_var=r.delta_var, run="mean",
                         beta_hat=r.beta_mean, pf_hat=r.pf_mean, S=list(r.index_mean)))
        rows.append(dict(method=r.method, N=r.n_samples, delta_var=r.delta_var, run="std",
                         beta_hat=r.beta_std, pf_hat=None,
                         S=list(r.index_std) if r.index_std is not None else [None] * len(r.index_mean)))
    return rows


def _columns(m):
    return ["method", "N", "delta_var", "run", "beta_hat", "pf_hat"] + [f"S_{i + 1}" for i in range(m)]


def _cells(row):
    return [fmt(row["method"]), fmt(row["N"]), fmt(row["delta_var"]), fmt(row["run"]),
            fmt(row["beta_hat"]), fmt(row["pf_hat"])] + [fmt(s) for s in row["S"]]


def format_csv(rows, m):
    buf = io.StringIO()
    out = csv.writer(buf, lineterminator="\n")
    out.writerow(_columns(m))
    for row in rows:
        out.writerow(_cells(row))
    return buf.getvalue()


def format_text(rows, names, title=None, notes=()):
    header = ["method", "N", "dvar", "run", "beta", "pf"] + [f"S[{n}]" for n in names]
    body = []
    prev = None
    for row in rows:
        cells = _cells(row)
        key = tuple(cells[:3])
        if key == prev:
            cells[:3] = ["", "", ""]
        prev = key
        body.append([c if c != "" else "-" if i >= 4 else "" for i, c in enumerate(cells)])
    widths = [max(len(h), *(len(r[i]) for r in body)) if body else len(h) for i, h in enumerate(header)]
    lines = []
    if title:
        lines.append(title)
    lines.extend(notes)
    lines.append("  ".join(h.ljust(w) if i < 4 else h.rjust(w) for i, (h, w) in enumerate(zip(header, widths))))
    lines.append("  ".join("-" * w for w in widths))
    for r in body:
        lines.append("  ".join(c.ljust(w) if i < 4 else c.rjust(w) for i, (c, w) in enumerate(zip(r, widths))))
    return "\n".join(lines) + "\n"


def _jsonable(v):
    if isinstance(v, float) and not math.isfinite(v):
        return "nan" if math.isnan(v) else ("inf" if v > 0 else "-inf")
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    return v


def _from_json(v):
    if isinstance(v, str) and v in ("nan", "inf", "-inf"):
        return float(v)
    if isinstance(v, list):
        return tuple(_from_json(x) for x in v)
    return v


def summary_to_jsonl(summary):
    lines = [json.dumps({"type": "summary", "names": list(summary.names),
                         "wall_time": summary.wall_time})]
    for r in summary.rows:
        rec = {"type": "row"}
        rec.update({k: _jsonable(getattr(r, k)) for k in StudyRow.__dataclass_fields__})
        lines.append(json.dumps(rec))
    return "\n".join(lines) + "\n"


def summary_from_jsonl(text):
    summary = None
    for line in text.splitlines():
        if not line.strip():
            continue
        rec = json.loads(line)
        kind = rec.pop("type")
        if kind == "summary":
            summary = StudySummary(tuple(rec["names"]), [], rec["wall_time"])
        elif kind == "row":
            if summary is None:
                raise ValueError("row before summary header")
            summary.rows.append(StudyRow(**{k: _from_json(v) for k, v in rec.items()}))
    if summary is None:
        raise ValueError("no summary header found")
    return summary


def records_to_jsonl(records):
    return "".join(json.dumps({k: _jsonable(v) for k, v in rec.items()}) + "\n" for rec in records)
