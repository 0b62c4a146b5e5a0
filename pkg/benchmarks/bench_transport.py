"""Compare the compiled and pure-Python transport kernels.

Runs the same monodromy computations on both backends, checks that the
results agree and prints the wall-clock times and the speedup.

    python benchmarks/bench_transport.py [--repeat 3] [--tol 1e-10]
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from nchodge.flat_transport import PlanePath, compiled_available, monodromy
from nchodge.quantum_connection import build_cpn_u_connection

CASES = [
    ("CP^1 u-loop, q=1", 2, 1.0),
    ("CP^2 u-loop, q=0.3-0.1i", 3, 0.3 - 0.1j),
    ("CP^4 u-loop, q=0", 5, 0.0),
]


def best_time(fn, repeat: int):
    best = float("inf")
    result = None
    for _ in range(repeat):
        start = time.perf_counter()
        result = fn()
        best = min(best, time.perf_counter() - start)
    return best, result


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=3)
    parser.add_argument("--tol", type=float, default=1e-10)
    args = parser.parse_args(argv)
    if not compiled_available():
        print("compiled kernel not built; nothing to compare")
        return 1
    loop = PlanePath.circle(0.0, 1.0)
    print(f"{'case':28s} {'python [s]':>11s} {'compiled [s]':>13s} {'speedup':>8s} {'max diff':>9s}")
    for name, n, q in CASES:
        conn = build_cpn_u_connection(n, q)
        t_py, m_py = best_time(lambda: monodromy(conn, loop, args.tol, backend="python"), args.repeat)
        t_c, m_c = best_time(lambda: monodromy(conn, loop, args.tol, backend="compiled"), args.repeat)
        diff = float(np.max(np.abs(m_py - m_c)))
        print(f"{name:28s} {t_py:11.4f} {t_c:13.4f} {t_py / t_c:8.1f} {diff:9.1e}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
