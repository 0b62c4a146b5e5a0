# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled Dormand-Prince 5(4) stepper for Laurent-polynomial connections.

Mirrors ``_transport_py.integrate_segment`` step for step; the right-hand
side is ``M(t) = -z'(t) * sum_j mats[j] z(t)^exps[j]`` on one segment.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport cos, sin, sqrt, fabs, pow, isfinite

cnp.import_array()

cdef double SAFETY = 0.9
cdef double MIN_FACTOR = 0.2
cdef double MAX_FACTOR = 5.0
cdef double H_INITIAL = 1e-2
cdef double H_MIN = 1e-14
cdef double T_EPS = 1e-15

cdef double C[7]
cdef double A[7][6]
cdef double B5[7]
cdef double E[7]

C[:] = [0.0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0]
A[0][:] = [0.0, 0.0, 0.0, 0.0, 0.0, 0.0]
A[1][:] = [1.0 / 5, 0.0, 0.0, 0.0, 0.0, 0.0]
A[2][:] = [3.0 / 40, 9.0 / 40, 0.0, 0.0, 0.0, 0.0]
A[3][:] = [44.0 / 45, -56.0 / 15, 32.0 / 9, 0.0, 0.0, 0.0]
A[4][:] = [19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729, 0.0, 0.0]
A[5][:] = [9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656, 0.0]
A[6][:] = [35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84]
B5[:] = [35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84, 0.0]
E[:] = [35.0 / 384 - 5179.0 / 57600, 0.0, 500.0 / 1113 - 7571.0 / 16695,
        125.0 / 192 - 393.0 / 640, -2187.0 / 6784 + 92097.0 / 339200,
        11.0 / 84 - 187.0 / 2100, -1.0 / 40]


cdef inline double cabs_(double complex z) nogil:
    return sqrt(z.real * z.real + z.imag * z.imag)


cdef inline double complex cpow_int(double complex z, long k) nogil:
    cdef double complex out = 1.0
    cdef double complex base = z
    cdef long e = k
    if e < 0:
        base = 1.0 / z
        e = -e
    while e:
        if e & 1:
            out = out * base
        base = base * base
        e >>= 1
    return out


cdef void eval_rhs(double t, int kind, double complex p0, double complex p1,
                   double complex p2, double complex p3,
                   long[::1] exps, double complex[:, :, ::1] mats,
                   double complex[:, ::1] out) noexcept nogil:
    cdef double complex z, dz, w, coef
    cdef double th
    cdef Py_ssize_t r = mats.shape[1]
    cdef Py_ssize_t m = mats.shape[0]
    cdef Py_ssize_t i, j, l
    if kind == 0:
        z = p0 + (p1 - p0) * t
        dz = p1 - p0
    else:
        th = p2.real + p3.real * t
        w = cos(th) + 1j * sin(th)
        z = p0 + p1.real * w
        dz = 1j * p3.real * p1.real * w
    for i in range(r):
        for j in range(r):
            out[i, j] = 0.0
    for l in range(m):
        coef = -dz * cpow_int(z, exps[l])
        for i in range(r):
            for j in range(r):
                out[i, j] = out[i, j] + coef * mats[l, i, j]


cdef void matmul(double complex[:, ::1] a, double complex[:, ::1] y,
                 double complex[:, ::1] out) noexcept nogil:
    cdef Py_ssize_t r = a.shape[0]
    cdef Py_ssize_t p = y.shape[1]
    cdef Py_ssize_t i, j, l
    cdef double complex acc
    for i in range(r):
        for j in range(p):
            acc = 0.0
            for l in range(r):
                acc = acc + a[i, l] * y[l, j]
            out[i, j] = acc


def integrate_segment(long[::1] exps, double complex[:, :, ::1] mats, int kind,
                      double complex p0, double complex p1, double complex p2,
                      double complex p3, y0, double length, double tol,
                      long max_steps, record=None):
    """Integrate one segment; returns ``(y, status, steps, t)`` like the Python kernel."""
    cdef Py_ssize_t r = mats.shape[1]
    y_arr = np.array(y0, dtype=np.complex128, order="C")
    cdef double complex[:, ::1] y = y_arr
    cdef Py_ssize_t p = y.shape[1]
    cdef double complex[:, :, ::1] k = np.zeros((7, r, p), dtype=np.complex128)
    cdef double complex[:, ::1] acc = np.zeros((r, p), dtype=np.complex128)
    cdef double complex[:, ::1] ynew = np.zeros((r, p), dtype=np.complex128)
    cdef double complex[:, ::1] mat = np.zeros((r, r), dtype=np.complex128)
    cdef double t = 0.0
    cdef double h = H_INITIAL
    cdef long steps = 0
    cdef bint have_k0 = False
    cdef bint finite
    cdef double err, scale, allowed, factor, v
    cdef double complex e
    cdef Py_ssize_t s, j, i, c
    if length < 1e-300:
        length = 1e-300
    while 1.0 - t > T_EPS:
        if steps >= max_steps:
            return y_arr, 2, steps, t
        if h < H_MIN:
            return y_arr, 1, steps, t
        if h > 1.0 - t:
            h = 1.0 - t
        steps += 1
        with nogil:
            if not have_k0:
                eval_rhs(t, kind, p0, p1, p2, p3, exps, mats, mat)
                matmul(mat, y, k[0])
                have_k0 = True
            for s in range(1, 7):
                for i in range(r):
                    for c in range(p):
                        e = y[i, c]
                        for j in range(s):
                            if A[s][j] != 0.0:
                                e = e + (h * A[s][j]) * k[j, i, c]
                        acc[i, c] = e
                eval_rhs(t + C[s] * h, kind, p0, p1, p2, p3, exps, mats, mat)
                matmul(mat, acc, k[s])
            err = 0.0
            scale = 1.0
            finite = True
            for i in range(r):
                for c in range(p):
                    e = y[i, c]
                    for j in range(6):
                        if B5[j] != 0.0:
                            e = e + (h * B5[j]) * k[j, i, c]
                    ynew[i, c] = e
                    v = cabs_(e)
                    if not isfinite(v):
                        finite = False
                    elif v > scale:
                        scale = v
                    e = 0.0
                    for j in range(7):
                        if E[j] != 0.0:
                            e = e + (h * E[j]) * k[j, i, c]
                    v = cabs_(e)
                    if not isfinite(v):
                        finite = False
                    elif v > err:
                        err = v
            err = err / scale
        if not finite:
            h *= MIN_FACTOR
            continue
        allowed = tol * h * length
        if err <= allowed:
            t = t + h
            y[:, :] = ynew
            k[0, :, :] = k[6, :, :]
            if record is not None:
                record.append((t, np.array(y_arr)))
            if err == 0.0:
                factor = MAX_FACTOR
            else:
                factor = SAFETY * pow(allowed / err, 0.25)
                if factor > MAX_FACTOR:
                    factor = MAX_FACTOR
            if factor > 1.0:
                h *= factor
        else:
            factor = SAFETY * pow(allowed / err, 0.25)
            if factor < MIN_FACTOR:
                factor = MIN_FACTOR
            h *= factor
    return y_arr, 0, steps, 1.0
