import itertools
import os
import subprocess
import sys

import numpy as np
import pytest

from partialtheta import kernels
from partialtheta.rootsys import parse_type

needs_numba = pytest.mark.skipif(not kernels.HAVE_NUMBA, reason="numba unavailable")


def both(fn):
    old = kernels.USE_NUMBA
    try:
        kernels.USE_NUMBA = False
        a = fn()
        kernels.USE_NUMBA = True
        b = fn()
    finally:
        kernels.USE_NUMBA = old
    return a, b


def naive_box(lo, dims, offset, quad, lin, shift, weights, alternating):
    total = 0j
    for flat, k in enumerate(itertools.product(*[range(l, l + d) for l, d in zip(lo, dims)])):
        x = np.array(k) + offset
        w = 1.0 if weights is None else weights[flat]
        s = (-1) ** sum(k) if alternating else 1
        total += w * s * np.exp(x @ quad @ x + lin @ x - shift)
    return total


@pytest.mark.parametrize("alternating", [False, True])
def test_box_sum_matches_naive(alternating, rng):
    lo, dims = np.array([-3, 0]), np.array([7, 5])
    offset = np.array([0.5, 0.25 + 0.1j])
    quad = -0.3 * np.array([[1.0, 0.2], [0.2, 1.5]]) + 0.1j
    lin = np.array([0.2 + 0.4j, -0.1j])
    weights = rng.uniform(0, 3, size=int(np.prod(dims)))
    ref = naive_box(lo, dims, offset, quad, lin, 0.7, weights, alternating)
    old = kernels.USE_NUMBA
    try:
        for flag in ([False, True] if kernels.HAVE_NUMBA else [False]):
            kernels.USE_NUMBA = flag
            val, absum = kernels.box_sum(lo, dims, offset, quad, lin, 0.7, weights, alternating)
            assert abs(val - ref) < 1e-12 * max(1, abs(ref))
            assert absum >= abs(val) - 1e-12
    finally:
        kernels.USE_NUMBA = old


@needs_numba
def test_grid_sum_backends():
    nodes = np.linspace(-3, 3, 61)
    quad = -np.pi * 0.5 * np.array([[0.5, 0.25], [0.25, 0.5]]) + 0j
    lin = np.array([0.3j, -0.2j])
    rows = np.array([[1, 0], [0, 1], [1, 1]], dtype=complex)
    offs = np.array([0.35j, 0.25j, 0.6j])
    a, b = both(lambda: kernels.grid_sum(nodes, quad, lin, 0.1j, rows, offs))
    a, b = np.asarray(a), np.asarray(b)
    assert np.allclose(a, b, rtol=1e-12, atol=1e-14)


def test_grid_sum_no_denominator():
    nodes = np.linspace(-8, 8, 321)
    h = nodes[1] - nodes[0]
    quad = np.array([[-0.5]], dtype=complex)
    out = kernels.grid_sum(nodes, quad, np.zeros(1, dtype=complex))
    val = out[0] if isinstance(out, tuple) else out
    assert abs(val * h - np.sqrt(2 * np.pi)) < 1e-12


@needs_numba
def test_kostant_table_backends():
    roots = parse_type("A3").positive_roots
    a, b = both(lambda: kernels.kostant_table([6, 7, 5], roots))
    assert np.array_equal(a, b)
    exact = kernels.kostant_table([6, 7, 5], roots, exact=True)
    assert np.array_equal(a, exact.astype(float))


def test_env_flag_selects_numpy():
    env = dict(os.environ, PARTIALTHETA_NO_NUMBA="1")
    out = subprocess.run([sys.executable, "-c", "from partialtheta import kernels; print(kernels.backend())"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "numpy"
