"""Pure-numpy Dormand-Prince 5(4) integrator for ``dY/dt = M(t) Y``.

This is the reference implementation; ``_transport_ext`` runs the same
algorithm (same tableau, controller and acceptance rule) in compiled code
for Laurent-polynomial connections.
"""
from __future__ import annotations

import numpy as np

C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
B5 = np.array(A[6] + (0.0,))
B4 = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])
E = B5 - B4

SAFETY = 0.9
MIN_FACTOR = 0.2
MAX_FACTOR = 5.0
H_INITIAL = 1e-2
H_MIN = 1e-14
T_EPS = 1e-15

OK, UNDERFLOW, BUDGET = 0, 1, 2


def integrate_segment(rhs, y0, length, tol, max_steps, record=None):
    """Integrate ``dY/dt = rhs(t) @ Y`` for ``t`` in ``[0, 1]``.

    Parameters
    ----------
    rhs : callable
        ``t -> M(t)``, the connection pulled back to the parameter ``t``
        (already including the minus sign and the velocity factor).
    y0 : ndarray
        Initial state, shape ``(r, p)``.
    length : float
        Arclength of the segment; the local error per unit arclength is kept
        below ``tol`` (errors are scaled by ``max(1, |Y|)``).
    max_steps : int
        Attempted-step budget for this call.
    record : list, optional
        Accepted ``(t, Y)`` pairs are appended here.

    Returns
    -------
    y, status, steps, t
        ``status`` is ``OK``, ``UNDERFLOW`` or ``BUDGET``; ``t`` is where
        integration stopped.
    """
    y = np.array(y0, dtype=complex)
    t = 0.0
    h = H_INITIAL
    steps = 0
    length = max(length, 1e-300)
    k = [None] * 7
    while 1.0 - t > T_EPS:
        if steps >= max_steps:
            return y, BUDGET, steps, t
        if h < H_MIN:
            return y, UNDERFLOW, steps, t
        h = min(h, 1.0 - t)
        steps += 1
        with np.errstate(all="ignore"):
            if k[0] is None:
                k[0] = rhs(t) @ y
            for s in range(1, 7):
                acc = y.copy()
                for j, a in enumerate(A[s]):
                    if a != 0.0:
                        acc += (h * a) * k[j]
                k[s] = rhs(t + C[s] * h) @ acc
            y_new = y
            for j in range(6):
                if B5[j] != 0.0:
                    y_new = y_new + (h * B5[j]) * k[j]
            err_vec = sum((h * E[j]) * k[j] for j in range(7) if E[j] != 0.0)
            scale = max(1.0, float(np.max(np.abs(y_new))))
            err = float(np.max(np.abs(err_vec))) / scale
        if not np.isfinite(err) or not np.all(np.isfinite(y_new)):
            h *= MIN_FACTOR
            continue
        allowed = tol * h * length
        if err <= allowed:
            t = t + h
            y = y_new
            k[0] = k[6]
            if record is not None:
                record.append((t, y.copy()))
            factor = MAX_FACTOR if err == 0.0 else min(MAX_FACTOR, SAFETY * (allowed / err) ** 0.25)
            h *= max(1.0, factor)
        else:
            h *= max(MIN_FACTOR, SAFETY * (allowed / err) ** 0.25)
    return y, OK, steps, 1.0
