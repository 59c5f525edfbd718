"""Deterministic serialization of solver results (JSON, flat tables, CSV)."""

from __future__ import annotations

import csv
import dataclasses
import io
import json
import math
from typing import Any

import numpy as np

from .families import OutcomeFamily
from .foa import FoaReport
from .model import Constant, Linear, QuotaBonus, Step

SIG_DIGITS = 12


def _num(x: float):
    if math.isnan(x):
        return None
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return float(f"{x:.{SIG_DIGITS}g}")


def contract_dict(s) -> dict:
    if isinstance(s, Constant):
        body = {"kind": "constant", "w": s.w}
    elif isinstance(s, Linear):
        body = {"kind": "linear", "alpha": s.alpha, "beta": s.beta}
    elif isinstance(s, QuotaBonus):
        body = {"kind": "quota-bonus", "q": s.q, "b": s.b}
    elif isinstance(s, Step):
        body = {"kind": "step", "thresholds": list(s.thresholds), "payments": list(s.payments)}
    else:
        raise TypeError(f"not a contract: {s!r}")
    return to_jsonable(body)


def to_jsonable(obj: Any) -> Any:
    """Plain JSON data with floats rounded to 12 significant digits."""
    if obj is None or isinstance(obj, (bool, str)):
        return obj
    if isinstance(obj, (Constant, Linear, QuotaBonus, Step)):
        return contract_dict(obj)
    if isinstance(obj, OutcomeFamily):
        return to_jsonable(obj.to_dict())
    if isinstance(obj, FoaReport):
        out = {f.name: to_jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
        out["foa_misleads"] = obj.foa_misleads
        out["op_violates_ric"] = obj.op_violates_ric
        return out
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return _num(float(obj))
    if dataclasses.is_dataclass(obj):
        out = {f.name: to_jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
        if hasattr(obj, "ok") and isinstance(getattr(type(obj), "ok", None), property):
            out["ok"] = obj.ok
        return out
    if hasattr(obj, "_asdict"):
        return {k: to_jsonable(v) for k, v in obj._asdict().items()}
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [to_jsonable(v) for v in obj]
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps_json(data: Any) -> str:
    return json.dumps(to_jsonable(data), sort_keys=True, indent=2) + "\n"


def flatten(data: Any, prefix: str = "") -> list[tuple[str, Any]]:
    data = to_jsonable(data)
    rows: list[tuple[str, Any]] = []
    if isinstance(data, dict):
        for key in sorted(data):
            rows += flatten(data[key], f"{prefix}.{key}" if prefix else key)
    elif isinstance(data, list) and data and any(isinstance(v, (dict, list)) for v in data):
        for i, v in enumerate(data):
            rows += flatten(v, f"{prefix}[{i}]")
    else:
        rows.append((prefix, data))
    return rows


def _cell(v: Any) -> str:
    if v is None:
        return "null"
    if isinstance(v, list):
        return "[" + ", ".join(_cell(x) for x in v) + "]"
    return str(v)


def render_table(data: Any) -> str:
    rows = flatten(data)
    width = max((len(k) for k, _ in rows), default=0)
    return "".join(f"{k:<{width}}  {_cell(v)}\n" for k, v in rows)


def render_csv(data: Any, header: tuple[str, ...] | None = None, rows: list | None = None) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    if rows is not None:
        writer.writerow(header)
        writer.writerows([[_cell(to_jsonable(v)) for v in row] for row in rows])
    else:
        writer.writerow(("key", "value"))
        writer.writerows((k, _cell(v)) for k, v in flatten(data))
    return buf.getvalue()
