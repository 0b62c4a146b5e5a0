"""Parallel transport ``psi' = -A(z) psi`` along plane paths and monodromy.

Laurent-polynomial connections (anything with a ``terms`` dict, e.g.
:class:`~nchodge.quantum_connection.MeromorphicConnection`) run on the
compiled kernel when it is available; plain callables ``z -> A(z)`` and the
fallback backend use the numpy kernel. Both implement the same adaptive
Dormand-Prince 5(4) scheme with error control per unit arclength.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import TransportError, UsageError
from . import _transport_py
from .paths import PlanePath

try:
    from . import _transport_ext
except ImportError:  # pragma: no cover - depends on the build
    _transport_ext = None

MAX_STEPS = 1_000_000
DEFAULT_TOL = 1e-10

_backend = "compiled" if _transport_ext is not None else "python"


def compiled_available() -> bool:
    return _transport_ext is not None


def get_backend() -> str:
    return _backend


def set_backend(name: str) -> str:
    """Select ``"compiled"`` or ``"python"``; returns the previous backend."""
    global _backend
    if name not in ("compiled", "python"):
        raise UsageError(f"unknown backend {name!r}")
    if name == "compiled" and _transport_ext is None:
        raise UsageError("compiled transport kernel is not built")
    prev, _backend = _backend, name
    return prev


@dataclass(frozen=True, eq=False)
class FlatFrame:
    """Values of flat sections (columns) at ``basepoint``."""

    basepoint: complex
    columns: np.ndarray

    def __post_init__(self):
        cols = np.array(self.columns, dtype=complex)
        if cols.ndim != 2 or cols.shape[0] != cols.shape[1]:
            raise UsageError("a flat frame needs a square matrix of columns")
        if abs(np.linalg.det(cols)) == 0.0:
            raise UsageError("flat frame columns must be invertible")
        object.__setattr__(self, "columns", cols)
        object.__setattr__(self, "basepoint", complex(self.basepoint))


def _laurent_data(conn):
    terms = getattr(conn, "terms", None)
    if not isinstance(terms, dict) or not terms:
        return None
    exps = np.array(sorted(terms), dtype=np.int64)
    mats = np.ascontiguousarray(np.stack([np.asarray(terms[k], dtype=complex) for k in exps]))
    return exps, mats


def _segment_rhs(conn, laurent, seg):
    if laurent is not None:
        exps, mats = laurent

        def eval_a(z):
            out = np.zeros(mats.shape[1:], dtype=complex)
            for k, m in zip(exps, mats):
                out += m * z ** int(k)
            return out
    else:
        def eval_a(z):
            return np.asarray(conn(z), dtype=complex)

    def rhs(t):
        return -seg.velocity(t) * eval_a(seg.point(t))

    return rhs


def _run(conn, path: PlanePath, y0: np.ndarray, tol: float, record: list | None, backend: str | None):
    if not isinstance(path, PlanePath):
        raise UsageError("path must be a PlanePath")
    if not tol > 0:
        raise UsageError("tol must be positive")
    backend = backend or _backend
    laurent = _laurent_data(conn)
    use_ext = backend == "compiled" and laurent is not None and _transport_ext is not None
    if backend == "compiled" and _transport_ext is None:
        raise UsageError("compiled transport kernel is not built")
    y = np.ascontiguousarray(y0, dtype=complex)
    if laurent is not None and laurent[1].shape[1] != y.shape[0]:
        raise UsageError(f"vector length {y.shape[0]} does not match connection rank {laurent[1].shape[1]}")
    budget = MAX_STEPS
    total = 0
    segs = path.segments
    for i, seg in enumerate(segs):
        seg_record = [] if record is not None else None
        if use_ext:
            kind, p0, p1, p2, p3 = seg.packed()
            y, status, steps, t = _transport_ext.integrate_segment(
                laurent[0], laurent[1], kind, p0, p1, p2, p3, y, seg.length, tol, budget, seg_record
            )
        else:
            rhs = _segment_rhs(conn, laurent, seg)
            y, status, steps, t = _transport_py.integrate_segment(rhs, y, seg.length, tol, budget, seg_record)
        total += steps
        budget -= steps
        if record is not None:
            record.extend(((i + tt) / len(segs), yy) for tt, yy in seg_record)
        if status != _transport_py.OK:
            position = (i + t) / len(segs)
            point = complex(seg.point(t))
            why = "step size underflow" if status == _transport_py.UNDERFLOW else "step budget exhausted"
            raise TransportError(
                f"transport failed ({why}) at path position {position:.6g}, z = {point:.6g}",
                position=position,
                point=point,
            )
    return y, total


def transport(conn, path: PlanePath, v0, tol: float = DEFAULT_TOL, backend: str | None = None):
    """Flat continuation of ``v0`` along ``path``.

    Parameters
    ----------
    conn : callable or Laurent matrix
        ``z -> A(z)``; the section solves ``psi' = -A psi``.
    path : PlanePath
    v0 : array_like
        Vector of length ``r`` or an ``r x p`` matrix of columns.
    tol : float
        Local error bound per unit arclength.

    Raises
    ------
    TransportError
        With ``position`` (path parameter in ``[0, 1]``) and ``point``.
    """
    v = np.asarray(v0, dtype=complex)
    if v.ndim not in (1, 2):
        raise UsageError("v0 must be a vector or a matrix")
    y, _ = _run(conn, path, v.reshape(v.shape[0], -1), tol, None, backend)
    return y.reshape(v.shape)


def transport_trajectory(conn, path: PlanePath, v0, tol: float = DEFAULT_TOL, backend: str | None = None):
    """Accepted-step samples ``(s, z, psi)`` with ``s`` the path parameter in ``[0, 1]``."""
    v = np.asarray(v0, dtype=complex).reshape(-1)
    record: list = []
    _run(conn, path, v.reshape(-1, 1), tol, record, backend)
    segs = path.segments
    out = [(0.0, path.start, v.copy())]
    for s, y in record:
        i = min(int(s * len(segs)), len(segs) - 1)
        t = s * len(segs) - i
        out.append((s, complex(segs[i].point(t)), y.reshape(-1)))
    return out


def monodromy(conn, loop: PlanePath, tol: float = DEFAULT_TOL, backend: str | None = None) -> np.ndarray:
    """Continuation matrix of a flat frame once around the closed ``loop``."""
    if not loop.is_closed():
        raise UsageError("monodromy needs a closed loop")
    r = _rank_of(conn, loop.start)
    return transport(conn, loop, np.eye(r, dtype=complex), tol, backend)


def _rank_of(conn, z) -> int:
    laurent = _laurent_data(conn)
    if laurent is not None:
        return laurent[1].shape[1]
    return np.asarray(conn(z)).shape[0]


def trace_integral(conn, loop: PlanePath, samples: int = 4096) -> complex:
    """``oint tr A dz`` by the trapezoid rule on each segment (spectrally accurate on full circles)."""
    total = 0j
    t = np.linspace(0.0, 1.0, samples + 1)
    for seg in loop.segments:
        vals = np.array([np.trace(np.asarray(conn(seg.point(s)))) * seg.velocity(s) for s in t])
        total += np.sum((vals[1:] + vals[:-1]) / 2) / samples
    return complex(total)
