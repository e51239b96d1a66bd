"""Numba vs numpy timings for the hot kernels and two end-to-end evaluations.

Run:  python benchmarks/bench_kernels.py [--repeat N]

Both backends run in one process by toggling ``kernels.USE_NUMBA``; the
numba column excludes the first (compiling) call.  Results of the two paths
are compared so a speedup never hides a wrong answer.
"""
import argparse
import time

import numpy as np

from partialtheta import kernels, modular
from partialtheta.rootsys import parse_type
from partialtheta.theta import QuadLattice, kostant_theta_eval


def _time(fn, repeat):
    best = float("inf")
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def _box_case():
    tau = 0.05j
    A = np.array([[4.0, -2.0], [-2.0, 4.0]])
    quad = 1j * np.pi * tau * A
    lin = np.array([2 * np.pi * (-0.3 + 0.1j), 2 * np.pi * (-0.2)])
    lo = np.array([0, 0])
    dims = np.array([400, 400])
    return lambda: kernels.box_sum(lo, dims, np.full(2, 0.5), quad, lin)[0]


def _grid_case():
    nodes = np.linspace(-6, 6, 801)
    quad = -np.pi * 0.5 * np.array([[0.5, 0.25], [0.25, 0.5]]) + 0j
    lin = np.array([0.3j, -0.2j])
    rows = np.eye(2, dtype=complex)
    offs = np.array([0.35j, 0.25j])
    return lambda: kernels.grid_sum(nodes, quad, lin, 0j, rows, offs)


def _kostant_case():
    roots = parse_type("A3").positive_roots
    return lambda: kernels.kostant_table([24, 24, 24], roots).sum()


def _kostant_theta_case():
    rs = parse_type("A2")
    return lambda: kostant_theta_eval(rs, 2, [0.1, -0.2], [-0.05, -0.04], 0.02j, 1e-12).value


def _h_case():
    L = QuadLattice([[2, -1], [-1, 2]])
    return lambda: modular.h_integral(L, [0.1, 0.2], [-0.3, -0.4], 0.8j, 1e-9).value


CASES = [
    ("box_sum 400x400", _box_case),
    ("grid_sum 801^2", _grid_case),
    ("kostant_table A3 24^3", _kostant_case),
    ("kostant_theta_eval A2", _kostant_theta_case),
    ("h_integral rank 2", _h_case),
]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    if not kernels.HAVE_NUMBA:
        print("numba unavailable (or disabled); only the numpy column is meaningful")
    print(f"{'case':26s} {'numpy [s]':>10s} {'numba [s]':>10s} {'speedup':>8s}  agree")
    for name, make in CASES:
        fn = make()
        kernels.USE_NUMBA = False
        t_np, v_np = _time(fn, args.repeat)
        if kernels.HAVE_NUMBA:
            kernels.USE_NUMBA = True
            fn()  # compile
            t_nb, v_nb = _time(fn, args.repeat)
        else:
            t_nb, v_nb = float("nan"), v_np
        kernels.USE_NUMBA = kernels.HAVE_NUMBA
        agree = bool(np.allclose(v_np, v_nb, rtol=1e-9, atol=1e-12))
        print(f"{name:26s} {t_np:10.4f} {t_nb:10.4f} {t_np / t_nb:8.1f}  {agree}")


if __name__ == "__main__":
    main()
