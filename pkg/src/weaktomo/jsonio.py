"""JSON and CSV encoding of states, weak values and pointer models.

Floats are written with 17 significant digits in JSON, enough to round-trip
every double, and 12 in CSV.
"""

from __future__ import annotations

import json
import math
from collections.abc import Mapping

import numpy as np

from .errors import DimensionMismatchError
from .states import PostSelection, PureState
from .weakvalues import PointerModel, WeakValueVector

JSON_DIGITS = 17
CSV_DIGITS = 12


class ParseError(ValueError):
    """Input text is not valid JSON or lacks a required field."""


def format_float(x: float, digits: int = JSON_DIGITS) -> str:
    x = float(x)
    if not math.isfinite(x):
        return "null"
    s = format(x, f".{digits}g")
    # keep floats recognizable as floats
    if not any(c in s for c in ".eEn"):
        s += ".0"
    return s


def _encode(obj, digits: int, indent: int, level: int) -> str:
    pad = "\n" + " " * (indent * (level + 1)) if indent else ""
    end = "\n" + " " * (indent * level) if indent else ""
    sep = "," if indent else ", "
    if isinstance(obj, (bool, np.bool_)) or obj is None:
        return json.dumps(bool(obj) if obj is not None else None)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return format_float(obj, digits)
    if isinstance(obj, (complex, np.complexfloating)):
        return _encode([obj.real, obj.imag], digits, 0, 0)
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    if isinstance(obj, Mapping):
        if not obj:
            return "{}"
        items = [pad + json.dumps(str(k), ensure_ascii=False) + ": " + _encode(v, digits, indent, level + 1)
                 for k, v in obj.items()]
        return "{" + sep.join(items) + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        # short numeric rows stay on one line
        flat = all(not isinstance(v, (list, tuple, Mapping, np.ndarray)) for v in obj)
        if flat:
            return "[" + ", ".join(_encode(v, digits, 0, 0) for v in obj) + "]"
        items = [pad + _encode(v, digits, indent, level + 1) for v in obj]
        return "[" + sep.join(items) + end + "]"
    raise TypeError(f"cannot encode {type(obj).__name__}")


def dumps(obj, digits: int = JSON_DIGITS, indent: int = 2) -> str:
    return _encode(obj, digits, indent, 0)


def complex_pairs(z) -> list[list[float]]:
    z = np.asarray(z, dtype=complex)
    if z.ndim == 0:
        return [float(z.real), float(z.imag)]
    return [complex_pairs(v) for v in z]


def _parse_pairs(data, field: str) -> np.ndarray:
    try:
        arr = np.asarray(data, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ParseError(f"'{field}' must be an array of [re, im] pairs") from exc
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ParseError(f"'{field}' must be an array of [re, im] pairs, got shape {arr.shape}")
    return arr[:, 0] + 1j * arr[:, 1]


def loads(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc}") from exc


def _require(data, *fields):
    if not isinstance(data, Mapping):
        raise ParseError("expected a JSON object")
    missing = [f for f in fields if f not in data]
    if missing:
        raise ParseError(f"missing field(s): {', '.join(missing)}")


def _check_dim(data, values: np.ndarray):
    dim = data["dim"]
    if not isinstance(dim, int) or isinstance(dim, bool):
        raise ParseError("'dim' must be an integer")
    if dim != values.size:
        raise DimensionMismatchError(f"'dim' is {dim} but {values.size} components were given")


def state_to_json(psi: PureState | PostSelection) -> dict:
    return {"dim": psi.dim, "amps": complex_pairs(psi.amps)}


def _amps_from_json(data) -> np.ndarray:
    _require(data, "dim", "amps")
    amps = _parse_pairs(data["amps"], "amps")
    _check_dim(data, amps)
    return amps


def state_from_json(data) -> PureState:
    return PureState(_amps_from_json(data))


def postselection_from_json(data) -> PostSelection:
    return PostSelection(_amps_from_json(data))


def weak_values_to_json(w: WeakValueVector) -> dict:
    return {"dim": w.dim, "w": complex_pairs(w.w)}


def weak_values_from_json(data) -> WeakValueVector:
    _require(data, "dim", "w")
    w = _parse_pairs(data["w"], "w")
    _check_dim(data, w)
    return WeakValueVector(w)


def pointer_to_json(pointer: PointerModel) -> dict:
    return {"delta": float(pointer.delta), "ensemble": int(pointer.ensemble)}


def pointer_from_json(data) -> PointerModel:
    _require(data, "delta", "ensemble")
    delta, ens = data["delta"], data["ensemble"]
    if not isinstance(delta, (int, float)) or isinstance(delta, bool):
        raise ParseError("'delta' must be a number")
    if not isinstance(ens, int) or isinstance(ens, bool):
        raise ParseError("'ensemble' must be an integer")
    return PointerModel(float(delta), ens)


def csv_lines(header: list[str], rows, digits: int = CSV_DIGITS) -> str:
    out = [",".join(header)]
    for row in rows:
        out.append(",".join(format_float(v, digits) if isinstance(v, (float, np.floating)) else str(v)
                            for v in row))
    return "\n".join(out) + "\n"
