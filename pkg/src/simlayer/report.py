"""JSON and CSV serialization of solver output.

Floats are written with 17 significant digits so every double survives a
round trip; non-finite values become null.
"""

from __future__ import annotations

import csv
import io
import json
import math
from typing import Any, Iterable, Optional

from .analysis import NonexistenceVerdict
from .problem import ProblemSpec
from .shooting import ShotOutcome, SolveReport

CSV_HEADER = ("swept_value", "status", "gamma_star", "mu_est", "fp_at_horizon", "iterations")


def _num(x: Optional[float]):
    if x is None or not math.isfinite(x):
        return None
    return float(x)


def format_float(x: float) -> str:
    text = "%.17g" % x
    if not any(ch in text for ch in ".en"):
        text += ".0"
    return text


def report_to_dict(report: SolveReport, with_samples: bool = False) -> dict:
    lo, hi = report.mu_bounds
    out = {
        "problem": report.problem.describe(),
        "gamma_star": float(report.gamma_star),
        "mu_est": float(report.mu_est),
        "mu_lo": _num(lo),
        "mu_hi": _num(hi),
        "fpp_at_horizon": float(report.fpp_at_horizon),
        "fp_at_horizon": float(report.fp_at_horizon),
        "identity_residual_max": float(report.identity_residual_max),
        "iterations": int(report.iterations),
        "t_max": float(report.t_max),
        "status": report.status,
    }
    if with_samples:
        out["samples"] = [[float(v) for v in s] for s in report.outcome.trajectory.samples]
    return out


def failure_to_dict(p: ProblemSpec, status: str, t_max: float, message: str = "",
                    verdict: Optional[NonexistenceVerdict] = None,
                    diagnostics: Optional[dict] = None) -> dict:
    """Report for a problem without an accepted solution; numeric fields are null."""
    out = {"problem": p.describe(), "gamma_star": None, "mu_est": None, "mu_lo": None,
           "mu_hi": None, "fpp_at_horizon": None, "fp_at_horizon": None,
           "identity_residual_max": None, "iterations": 0, "t_max": float(t_max),
           "status": status}
    if message:
        out["message"] = message
    if verdict is not None:
        out["nonexistence"] = verdict.describe()
    if diagnostics:
        out["diagnostics"] = _plain(diagnostics)
    return out


def outcome_to_dict(p: ProblemSpec, outcome: ShotOutcome, with_samples: bool = False) -> dict:
    out = {"problem": p.describe()}
    out.update(outcome.describe(with_samples))
    return out


def _plain(v: Any):
    """Diagnostics may carry enums, tuples and dataclasses; reduce to JSON types."""
    if isinstance(v, dict):
        return {str(k): _plain(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_plain(x) for x in v]
    if isinstance(v, ShotOutcome):
        return v.describe()
    if hasattr(v, "describe"):
        return _plain(v.describe())
    if hasattr(v, "value") and isinstance(getattr(v, "value"), str):
        return v.value
    if isinstance(v, (bool, int, float, str)) or v is None:
        return v
    if hasattr(v, "__dataclass_fields__"):
        return {k: _plain(getattr(v, k)) for k in v.__dataclass_fields__}
    return str(v)


def _emit(v, indent: int, level: int, out: list) -> None:
    pad = "\n" + " " * (indent * (level + 1))
    end = "\n" + " " * (indent * level)
    if v is None:
        out.append("null")
    elif v is True or v is False:
        out.append("true" if v else "false")
    elif isinstance(v, int):
        out.append(str(v))
    elif isinstance(v, float):
        out.append(format_float(v) if math.isfinite(v) else "null")
    elif isinstance(v, str):
        out.append(json.dumps(v))
    elif isinstance(v, dict):
        if not v:
            out.append("{}")
            return
        out.append("{")
        for i, (k, x) in enumerate(v.items()):
            out.append(("," if i else "") + pad + json.dumps(str(k)) + ": ")
            _emit(x, indent, level + 1, out)
        out.append(end + "}")
    elif isinstance(v, (list, tuple)):
        if not v:
            out.append("[]")
            return
        # numeric rows (profile samples) stay on one line
        if all(not isinstance(x, (dict, list, tuple)) for x in v):
            out.append("[")
            for i, x in enumerate(v):
                out.append(", " if i else "")
                _emit(x, indent, level + 1, out)
            out.append("]")
            return
        out.append("[")
        for i, x in enumerate(v):
            out.append(("," if i else "") + pad)
            _emit(x, indent, level + 1, out)
        out.append(end + "]")
    else:
        raise TypeError(f"cannot serialize {type(v).__name__}")


def emit_json(obj, indent: int = 2) -> str:
    out: list = []
    _emit(obj, indent, 0, out)
    return "".join(out) + "\n"


def parse_json(text: str):
    return json.loads(text)


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return format_float(v) if math.isfinite(v) else ""
    return str(v)


def emit_csv(rows: Iterable[tuple]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for row in rows:
        w.writerow([_cell(v) for v in row])
    return buf.getvalue()
