"""Serialization: deterministic JSON and CSV emission, problem loading.

Every float is written with 17 significant digits, so output bytes depend
only on the computed values and a float survives a write/read round trip.
JSON results share the top-level layout ``{"meta", "data", "checks"}``.
"""

from __future__ import annotations

import csv
import io as _io
import json
import math
from pathlib import Path

import jsonschema
import numpy as np

from .checks import Check
from .exceptions import UsageError
from .linop import operator_from_descriptor
from .solver import ProblemSpec, StateForcing
from .weights import WEIGHT_KINDS, admissibility

__all__ = [
    "format_float",
    "dumps",
    "result_document",
    "write_text",
    "solution_csv",
    "load_solution_csv",
    "sidecar_path",
    "load_json_config",
    "PROBLEM_SCHEMA",
    "OPTIONS_SCHEMA",
    "problem_from_config",
]


def format_float(x: float) -> str:
    x = float(x)
    if math.isnan(x):
        return "NaN"
    if math.isinf(x):
        return "Infinity" if x > 0 else "-Infinity"
    if x == 0:
        return "0.0" if math.copysign(1.0, x) > 0 else "-0.0"
    text = format(x, ".17g")
    # keep floats recognizable as floats when read back
    return text if any(c in text for c in ".e") else text + ".0"


def _plain(obj):
    """Convert numpy containers and scalars to built-in types."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    if isinstance(obj, Check):
        return obj.as_dict()
    return obj


def _emit(obj, indent, level, out):
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if isinstance(obj, dict):
        if not obj:
            out.append("{}")
            return
        out.append("{\n")
        for i, key in enumerate(sorted(obj)):
            out.append(pad + json.dumps(key) + ": ")
            _emit(obj[key], indent, level + 1, out)
            out.append(",\n" if i < len(obj) - 1 else "\n")
        out.append(end + "}")
    elif isinstance(obj, list):
        if not obj:
            out.append("[]")
            return
        if all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in obj):
            out.append("[" + ", ".join(_scalar(v) for v in obj) + "]")
            return
        out.append("[\n")
        for i, v in enumerate(obj):
            out.append(pad)
            _emit(v, indent, level + 1, out)
            out.append(",\n" if i < len(obj) - 1 else "\n")
        out.append(end + "]")
    else:
        out.append(_scalar(obj))


def _scalar(v) -> str:
    if isinstance(v, bool) or v is None or isinstance(v, str):
        return json.dumps(v)
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        return format_float(v)
    raise UsageError(f"cannot serialize value of type {type(v).__name__}")


def dumps(obj, indent: int = 2) -> str:
    """JSON text with sorted keys, 17-digit floats and a trailing newline."""
    out: list[str] = []
    _emit(_plain(obj), indent, 0, out)
    return "".join(out) + "\n"


def result_document(meta: dict, data: dict, checks) -> dict:
    return {"meta": meta, "data": data, "checks": [c.as_dict() for c in checks]}


def write_text(text: str, path: str | Path | None) -> None:
    """Write ``text`` to ``path``; ``None`` or ``-`` means standard output."""
    if path is None or str(path) == "-":
        import sys

        sys.stdout.write(text)
        return
    Path(path).write_text(text, encoding="utf-8", newline="\n")


def table_csv(header: list[str], rows) -> str:
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([str(v) if isinstance(v, (int, np.integer)) else format_float(v) for v in row])
    return buf.getvalue()


def solution_csv(u: np.ndarray) -> str:
    """CSV with columns ``n, component_0 .. component_{d-1}``."""
    u = np.asarray(u, dtype=float)
    if u.ndim == 1:
        u = u[:, None]
    header = ["n"] + [f"component_{i}" for i in range(u.shape[1])]
    return table_csv(header, ([n, *row] for n, row in enumerate(u.tolist())))


def load_solution_csv(path_or_text) -> np.ndarray:
    """Inverse of :func:`solution_csv`; returns shape ``(N+1, d)``."""
    text = path_or_text
    if isinstance(path_or_text, Path) or "\n" not in str(path_or_text):
        text = Path(path_or_text).read_text(encoding="utf-8")
    rows = list(csv.reader(_io.StringIO(text)))
    if not rows or rows[0][:1] != ["n"]:
        raise UsageError("solution CSV must start with a header beginning with 'n'")
    body = rows[1:]
    for i, r in enumerate(body):
        if int(r[0]) != i:
            raise UsageError(f"row {i + 2}: expected n = {i}, got {r[0]}")
    return np.array([[float(v) for v in r[1:]] for r in body], dtype=float).reshape(len(body), -1)


def sidecar_path(out: str | Path) -> Path:
    p = Path(out)
    return p.with_suffix(".json") if p.suffix.lower() == ".csv" else p.with_name(p.name + ".json")


# -- configuration ----------------------------------------------------------

_NUM = {"type": "number"}
_VEC = {"type": "array", "items": _NUM}

OPERATOR_SCHEMA = {
    "type": "object",
    "required": ["type"],
    "properties": {
        "type": {"enum": ["dense", "diagonal", "laplacian1d", "zero"]},
        "matrix": {"type": "array", "items": _VEC},
        "multipliers": _VEC,
        "grid": _VEC,
        "interval": {"type": "array", "items": _NUM, "minItems": 2, "maxItems": 2},
        "points": {"type": "integer", "minimum": 1},
        "dim": {"type": "integer", "minimum": 1},
    },
    "allOf": [
        {"if": {"properties": {"type": {"const": "dense"}}}, "then": {"required": ["matrix"]}},
        {"if": {"properties": {"type": {"const": "diagonal"}}},
         "then": {"required": ["multipliers"]}},
        {"if": {"properties": {"type": {"const": "laplacian1d"}}},
         "then": {"required": ["interval", "points"]}},
        {"if": {"properties": {"type": {"const": "zero"}}}, "then": {"required": ["dim"]}},
    ],
}

PROBLEM_SCHEMA = {
    "type": "object",
    "required": ["alpha", "operator", "u0", "u1", "horizon"],
    "additionalProperties": False,
    "properties": {
        "alpha": {"type": "number", "exclusiveMinimum": 1, "maximum": 2},
        "operator": OPERATOR_SCHEMA,
        "u0": _VEC,
        "u1": _VEC,
        "horizon": {"type": "integer", "minimum": 4},
        "method": {"enum": ["auto", "recurrence", "series", "beta"]},
        "forcing": {
            "type": "object",
            "required": ["type"],
            "properties": {
                "type": {"enum": ["none", "sequence", "saturating"]},
                "payload": {},
            },
        },
        "weight": {
            "type": "object",
            "required": ["kind"],
            "properties": {
                "kind": {"enum": list(WEIGHT_KINDS)},
                "param": {"type": "number", "exclusiveMinimum": 0},
                "values": _VEC,
            },
        },
    },
}

OPTIONS_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "alpha": _NUM,
        "beta": _NUM,
        "n": {"type": "integer", "minimum": 0},
        "steps": {"type": "integer", "minimum": 0},
        "dim": {"type": "integer", "minimum": 1},
        "method": {"enum": ["auto", "recurrence", "series", "beta"]},
        "tol": {"type": "number", "exclusiveMinimum": 0},
        "format": {"enum": ["csv", "json"]},
        "function": {"type": "string"},
        "op": {"type": ["string", "object"]},
        "source": _NUM,
        "shift": {"type": "number", "minimum": 0},
    },
}


def _locate(text: str, path) -> int:
    """1-based line of the innermost object key on ``path``."""
    pos = 0
    for part in path:
        if isinstance(part, str):
            hit = text.find(json.dumps(part), pos)
            if hit >= 0:
                pos = hit
    return text.count("\n", 0, pos) + 1


def load_json_config(path: str | Path, schema: dict) -> dict:
    """Read and validate a JSON file.

    Errors name the file and line: decoding errors give the exact position,
    schema errors the line of the innermost offending key.
    """
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read {p}: {exc.strerror}") from None
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"{p}:{exc.lineno}:{exc.colno}: invalid JSON: {exc.msg}") from None
    validator = jsonschema.Draft202012Validator(schema)
    errors = sorted(validator.iter_errors(obj), key=lambda e: list(map(str, e.absolute_path)))
    if errors:
        err = errors[0]
        where = "/".join(map(str, err.absolute_path)) or "<root>"
        line = _locate(text, list(err.absolute_path))
        raise UsageError(f"{p}:{line}: {where}: {err.message}")
    return obj


def _saturating(scale: float, pulse=None):
    pulse = None if pulse is None else np.asarray(pulse, dtype=float)

    def f(n, v):
        out = scale * math.sin(n) / (1.0 + n**3) * v / (1.0 + float(np.linalg.norm(v)))
        return out + pulse if (pulse is not None and n == 0) else out

    # the growth envelope only holds without the additive pulse
    envelope = {} if pulse is not None else dict(
        M=lambda n: abs(scale) / (1.0 + n**3), W=lambda y: y / (1.0 + y), C=1.0)
    return StateForcing(f, 2.0 * abs(scale), name=f"saturating:{scale:g}", **envelope)


def problem_from_config(cfg: dict):
    """Build ``(ProblemSpec, WeightedSpace, method)`` from a validated problem
    object.

    Forcing types: ``none``; ``sequence`` with payload ``g(0..N-2)`` as a list
    of vectors; ``saturating`` with payload ``{"scale": c}`` giving
    ``f(n, v) = c sin(n) / (1 + n^3) * v / (1 + |v|)`` (``L = 2|c|``), plus an
    optional vector ``"pulse"`` added at ``n = 0``.
    """
    err = jsonschema.exceptions.best_match(
        jsonschema.Draft202012Validator(PROBLEM_SCHEMA).iter_errors(cfg))
    if err is not None:
        where = "/".join(map(str, err.absolute_path)) or "<root>"
        raise UsageError(f"problem: {where}: {err.message}")
    A = operator_from_descriptor(cfg["operator"])
    N = int(cfg["horizon"])
    forcing_cfg = cfg.get("forcing", {"type": "none"})
    kind = forcing_cfg["type"]
    payload = forcing_cfg.get("payload")
    if kind == "none":
        forcing = None
    elif kind == "sequence":
        if payload is None:
            raise UsageError("sequence forcing needs a payload")
        forcing = np.asarray(payload, dtype=float)
    else:
        payload = payload or {}
        pulse = payload.get("pulse")
        if pulse is not None and len(pulse) != A.dim:
            raise UsageError(f"forcing pulse must have {A.dim} entries, got {len(pulse)}")
        forcing = _saturating(float(payload.get("scale", 1.0)), pulse)
    P = ProblemSpec(cfg["alpha"], A, cfg["u0"], cfg["u1"], N, forcing)
    wcfg = cfg.get("weight", {"kind": "n_factorial"})
    W = admissibility(wcfg["kind"], N, param=wcfg.get("param"), values=wcfg.get("values"))
    return P, W, cfg.get("method", "auto")
