"""JSON encodings for scalars, matrices and series.

* complex  -> ``[re, im]``
* matrix   -> ``{"rows": r, "cols": c, "entries": [[re, im], ...]}`` (row-major)
* series   -> ``{"var": "s", "order": N, "coeffs": [[re, im], ...]}``

Decoders raise :class:`SchemaError` carrying a JSON-pointer-like ``path``.
"""
from __future__ import annotations

import math

import numpy as np

from ..errors import UsageError
from .series import TruncatedSeries


class SchemaError(UsageError):
    def __init__(self, path: str, message: str):
        super().__init__(f"{path or '/'}: {message}")
        self.path = path or "/"


def complex_to_json(z) -> list:
    z = complex(z)
    return [z.real, z.imag]


def complex_from_json(obj, path: str = "") -> complex:
    if isinstance(obj, (int, float)) and not isinstance(obj, bool):
        val = complex(obj)
    elif isinstance(obj, (list, tuple)) and len(obj) == 2 and all(
        isinstance(x, (int, float)) and not isinstance(x, bool) for x in obj
    ):
        val = complex(obj[0], obj[1])
    else:
        raise SchemaError(path, "expected [re, im]")
    if not (math.isfinite(val.real) and math.isfinite(val.imag)):
        raise SchemaError(path, "non-finite complex number")
    return val


def matrix_to_json(m) -> dict:
    m = np.atleast_2d(np.asarray(m, dtype=complex))
    return {
        "rows": int(m.shape[0]),
        "cols": int(m.shape[1]),
        "entries": [complex_to_json(z) for z in m.reshape(-1)],
    }


def matrix_from_json(obj, path: str = "") -> np.ndarray:
    if not isinstance(obj, dict):
        raise SchemaError(path, "expected a matrix object")
    for key in ("rows", "cols", "entries"):
        if key not in obj:
            raise SchemaError(f"{path}/{key}", "missing")
    rows, cols, entries = obj["rows"], obj["cols"], obj["entries"]
    if not isinstance(rows, int) or not isinstance(cols, int) or rows < 0 or cols < 0:
        raise SchemaError(path, "rows/cols must be non-negative integers")
    if not isinstance(entries, list) or len(entries) != rows * cols:
        raise SchemaError(f"{path}/entries", f"expected {rows * cols} entries")
    vals = [complex_from_json(e, f"{path}/entries/{i}") for i, e in enumerate(entries)]
    return np.array(vals, dtype=complex).reshape(rows, cols)


def vector_to_json(v) -> list:
    return [complex_to_json(z) for z in np.asarray(v).reshape(-1)]


def vector_from_json(obj, path: str = "") -> np.ndarray:
    if not isinstance(obj, list):
        raise SchemaError(path, "expected an array of [re, im]")
    return np.array([complex_from_json(e, f"{path}/{i}") for i, e in enumerate(obj)], dtype=complex)


def series_to_json(s: TruncatedSeries) -> dict:
    return {"var": s.var, "order": s.order, "coeffs": vector_to_json(s.coeffs)}


def series_from_json(obj, path: str = "") -> TruncatedSeries:
    if not isinstance(obj, dict):
        raise SchemaError(path, "expected a series object")
    for key in ("var", "order", "coeffs"):
        if key not in obj:
            raise SchemaError(f"{path}/{key}", "missing")
    coeffs = vector_from_json(obj["coeffs"], f"{path}/coeffs")
    if not isinstance(obj["order"], int) or obj["order"] != coeffs.size:
        raise SchemaError(f"{path}/order", "order must equal the number of coefficients")
    try:
        return TruncatedSeries(obj["var"], coeffs)
    except UsageError as exc:
        raise SchemaError(f"{path}/var", str(exc)) from None
