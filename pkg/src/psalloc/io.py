"""CSV/JSON export and import of stationary tables.

CSV: ``# key: <json>`` metadata lines, then a ``k,r,pi`` header and one row
per state, values in 17-significant-digit scientific notation.  JSON: one
object ``{"meta": ..., "rows": [{"k", "r", "pi"}, ...]}``, NaN as null.
Both round-trip a :class:`JointDistribution` exactly.
"""
from __future__ import annotations

import csv
import io
import json
import math

import numpy as np

from .model import JointDistribution, ModelParams

FORMATS = ("csv", "json")


def _meta(d: JointDistribution) -> dict:
    meta = {"m": d.m, "rho": d.rho, "R": d.R, "method": d.method, "tol": d.tol}
    for key, val in d.meta.items():
        if isinstance(val, (bool, int, float, str)) or val is None:
            meta[key] = val
        elif isinstance(val, np.generic):
            meta[key] = val.item()
    return meta


def _rebuild(meta: dict, rows) -> JointDistribution:
    m, R = int(meta["m"]), int(meta["R"])
    values = np.full((m + 1, R + 1), np.nan)
    for k, r, pi in rows:
        values[k, r] = pi
    extra = {k: v for k, v in meta.items() if k not in ("m", "rho", "R", "method", "tol")}
    return JointDistribution(ModelParams(m, float(meta["rho"])), R, values, meta["method"], float(meta["tol"]), extra)


def to_csv(d: JointDistribution) -> str:
    buf = io.StringIO()
    for key, val in _meta(d).items():
        buf.write(f"# {key}: {json.dumps(val)}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["k", "r", "pi"])
    for k in range(d.m + 1):
        for r in range(d.R + 1):
            w.writerow([k, r, f"{d.values[k, r]:.16e}"])
    return buf.getvalue()


def from_csv(text: str) -> JointDistribution:
    meta, body = {}, []
    for line in text.splitlines():
        if line.startswith("#"):
            key, _, val = line[1:].partition(":")
            meta[key.strip()] = json.loads(val)
        elif line.strip():
            body.append(line)
    reader = csv.reader(body)
    header = next(reader)
    if header != ["k", "r", "pi"]:
        raise ValueError(f"unexpected CSV header {header!r}")
    return _rebuild(meta, ((int(k), int(r), float(p)) for k, r, p in reader))


def to_json(d: JointDistribution) -> str:
    rows = [
        {"k": k, "r": r, "pi": None if math.isnan(v) else float(v)}
        for k in range(d.m + 1)
        for r, v in enumerate(d.values[k])
    ]
    return json.dumps({"meta": _meta(d), "rows": rows}, indent=1)


def from_json(text: str) -> JointDistribution:
    obj = json.loads(text)
    rows = ((row["k"], row["r"], math.nan if row["pi"] is None else row["pi"]) for row in obj["rows"])
    return _rebuild(obj["meta"], rows)


def dumps(d: JointDistribution, fmt: str) -> str:
    if fmt not in FORMATS:
        raise ValueError(f"format must be one of {FORMATS}")
    return to_csv(d) if fmt == "csv" else to_json(d)


def loads(text: str, fmt: str) -> JointDistribution:
    if fmt not in FORMATS:
        raise ValueError(f"format must be one of {FORMATS}")
    return from_csv(text) if fmt == "csv" else from_json(text)
