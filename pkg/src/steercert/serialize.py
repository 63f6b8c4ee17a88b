"""JSON and CSV encodings for states, measurement sets and results.

Complex numbers are ``[re, im]`` pairs. A state is
``{"dim_a": 2, "dim_b": d, "amplitudes": [[re, im], ...]}`` in row-major
|i>_A |j>_B order; a measurement set is
``{"settings": [{"elements": [matrix, ...]}, ...]}`` with each matrix a nested
list of ``[re, im]`` pairs.
"""

from __future__ import annotations

import json
import math

import numpy as np

from .povm import MeasurementSet, Povm


class ParseError(ValueError):
    """Malformed input; the message starts with the offending field path."""


def _fail(path: str, msg: str):
    raise ParseError(f"{path}: {msg}")


def parse_complex(obj, path: str) -> complex:
    if not isinstance(obj, list) or len(obj) != 2:
        _fail(path, "expected [re, im]")
    re, im = obj
    for part, name in ((re, "re"), (im, "im")):
        if isinstance(part, bool) or not isinstance(part, (int, float)):
            _fail(path, f"{name} is not a number")
        if not math.isfinite(part):
            _fail(path, f"{name} is not finite")
    return complex(re, im)


def encode_complex(z: complex) -> list:
    return [float(np.real(z)), float(np.imag(z))]


def parse_matrix(obj, path: str) -> np.ndarray:
    if not isinstance(obj, list) or not obj:
        _fail(path, "expected a non-empty list of rows")
    rows = []
    for i, row in enumerate(obj):
        if not isinstance(row, list):
            _fail(f"{path}[{i}]", "expected a row")
        rows.append([parse_complex(z, f"{path}[{i}][{j}]") for j, z in enumerate(row)])
    if len({len(r) for r in rows}) != 1 or len(rows[0]) != len(rows):
        _fail(path, f"matrix must be square, got {len(rows)} rows of lengths {[len(r) for r in rows]}")
    return np.array(rows, dtype=complex)


def encode_matrix(m: np.ndarray) -> list:
    return [[encode_complex(z) for z in row] for row in m]


def _require(obj, key: str, path: str):
    if not isinstance(obj, dict):
        _fail(path, "expected an object")
    if key not in obj:
        _fail(path, f"missing field {key!r}")
    return obj[key]


def parse_state(obj, path: str = "state") -> np.ndarray:
    dim_a = _require(obj, "dim_a", path)
    dim_b = _require(obj, "dim_b", path)
    amps = _require(obj, "amplitudes", path)
    for name, v in (("dim_a", dim_a), ("dim_b", dim_b)):
        if isinstance(v, bool) or not isinstance(v, int) or v < 1:
            _fail(f"{path}.{name}", "expected a positive integer")
    if dim_a != 2:
        _fail(f"{path}.dim_a", "Alice's system must be a qubit (dim_a = 2)")
    if not isinstance(amps, list):
        _fail(f"{path}.amplitudes", "expected a list")
    if len(amps) != dim_a * dim_b:
        _fail(f"{path}.amplitudes", f"expected {dim_a * dim_b} entries, got {len(amps)}")
    return np.array([parse_complex(z, f"{path}.amplitudes[{i}]") for i, z in enumerate(amps)])


def encode_state(psi: np.ndarray, dim_a: int = 2) -> dict:
    return {
        "dim_a": dim_a,
        "dim_b": len(psi) // dim_a,
        "amplitudes": [encode_complex(z) for z in psi],
    }


def parse_measurements(obj, path: str = "measurements") -> MeasurementSet:
    settings = _require(obj, "settings", path)
    if not isinstance(settings, list) or not settings:
        _fail(f"{path}.settings", "expected a non-empty list")
    povms = []
    for x, s in enumerate(settings):
        p = f"{path}.settings[{x}]"
        elements = _require(s, "elements", p)
        if not isinstance(elements, list) or not elements:
            _fail(f"{p}.elements", "expected a non-empty list")
        mats = [parse_matrix(m, f"{p}.elements[{a}]") for a, m in enumerate(elements)]
        if len({m.shape for m in mats}) != 1:
            _fail(f"{p}.elements", "elements differ in size")
        povms.append(Povm(tuple(mats)))
    if len({q.dim for q in povms}) != 1:
        _fail(f"{path}.settings", "settings act on spaces of different dimension")
    return MeasurementSet(tuple(povms))


def encode_measurements(m: MeasurementSet) -> dict:
    return {"settings": [{"elements": [encode_matrix(e) for e in p.elements]} for p in m]}


def load_json(path) -> object:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, allow_nan=False) + "\n"


def fmt_number(x: float) -> str:
    """Shortest round-trip repr, capped at 12 significant digits."""
    # %g drops trailing zeros, so this is already the shortest form within 12 digits.
    return format(float(x) + 0.0, ".12g")


def csv_lines(header: str, rows) -> str:
    out = [header]
    out.extend(",".join(fmt_number(v) if not isinstance(v, (int, np.integer)) else str(v) for v in r)
               for r in rows)
    return "\n".join(out) + "\n"
