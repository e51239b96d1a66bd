"""Inner loops: lattice-box exponential sums, tensor-grid quadrature, Kostant DP.

Each kernel has a numba ``@njit`` implementation and a pure-numpy fallback
with identical semantics.  Set ``PARTIALTHETA_NO_NUMBA=1`` to force the numpy
path (used by the benchmark and by the cross-backend tests).
"""
from __future__ import annotations

import os

import numpy as np

_DISABLE = os.environ.get("PARTIALTHETA_NO_NUMBA", "").strip().lower() in {"1", "true", "yes"}

try:  # pragma: no cover - depends on environment
    if _DISABLE:
        raise ImportError
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA

_CHUNK = 1 << 16


def backend() -> str:
    return "numba" if USE_NUMBA else "numpy"


# --------------------------------------------------------------------------
# lattice box sums
#
#   sum_{k in box} weight[k] * (-1)^{sum k if alternating}
#                  * exp((x, Q x) + (b, x) - shift),    x = k + offset
# --------------------------------------------------------------------------


def _box_sum_numpy(lo, dims, offset, quad, lin, shift, weights, alternating):
    n = len(dims)
    total = int(np.prod(dims))
    acc = 0j
    acc_abs = 0.0
    strides = np.ones(n, dtype=np.int64)
    for i in range(n - 2, -1, -1):
        strides[i] = strides[i + 1] * dims[i + 1]
    for start in range(0, total, _CHUNK):
        flat = np.arange(start, min(total, start + _CHUNK), dtype=np.int64)
        k = (flat[:, None] // strides[None, :]) % dims[None, :] + lo[None, :]
        x = k + offset[None, :]
        e = np.einsum("pi,ij,pj->p", x, quad, x) + x @ lin - shift
        t = np.exp(e)
        if weights.size:
            t = t * weights[flat]
        if alternating:
            t = t * np.where(k.sum(axis=1) % 2 == 0, 1.0, -1.0)
        acc += t.sum()
        acc_abs += np.abs(t).sum()
    return acc, acc_abs


if HAVE_NUMBA:

    @njit(cache=True, fastmath=False)
    def _box_sum_numba(lo, dims, offset, quad, lin, shift, weights, alternating):
        n = dims.shape[0]
        total = 1
        for i in range(n):
            total *= dims[i]
        k = np.zeros(n, dtype=np.int64)
        x = np.zeros(n, dtype=np.complex128)
        acc = 0j
        acc_abs = 0.0
        use_w = weights.shape[0] > 0
        for flat in range(total):
            rem = flat
            ksum = 0
            for i in range(n - 1, -1, -1):
                k[i] = rem % dims[i] + lo[i]
                rem //= dims[i]
                ksum += k[i]
                x[i] = k[i] + offset[i]
            e = -shift + 0j
            for i in range(n):
                e += lin[i] * x[i]
                s = 0j
                for j in range(n):
                    s += quad[i, j] * x[j]
                e += x[i] * s
            t = np.exp(e)
            if use_w:
                t *= weights[flat]
            if alternating and (ksum % 2 != 0):
                t = -t
            acc += t
            acc_abs += abs(t)
        return acc, acc_abs


def box_sum(lo, dims, offset, quad, lin, shift=0.0, weights=None, alternating=False):
    """Weighted exponential-quadratic sum over an integer box.

    ``lo``/``dims`` describe the box ``lo_i <= k_i < lo_i + dims_i`` in C order,
    which is also the flat layout expected for ``weights``.  Returns the sum and
    the sum of absolute values of the terms.
    """
    lo = np.ascontiguousarray(lo, dtype=np.int64)
    dims = np.ascontiguousarray(dims, dtype=np.int64)
    offset = np.ascontiguousarray(offset, dtype=np.complex128)
    quad = np.ascontiguousarray(quad, dtype=np.complex128)
    lin = np.ascontiguousarray(lin, dtype=np.complex128)
    if weights is None:
        weights = np.zeros(0, dtype=np.float64)
    weights = np.ascontiguousarray(weights, dtype=np.float64).ravel()
    if USE_NUMBA:
        return _box_sum_numba(lo, dims, offset, quad, lin, float(shift), weights, bool(alternating))
    return _box_sum_numpy(lo, dims, offset, quad, lin, float(shift), weights, bool(alternating))


# --------------------------------------------------------------------------
# tensor-grid trapezoid sums
#
#   sum_{w in nodes^n} exp((w, Q w) + (b, w) + c) / prod_r sin(pi((R_r, w) + d_r))
# --------------------------------------------------------------------------


def _grid_sum_numpy(nodes, quad, lin, const, rows, offs):
    n = quad.shape[0]
    m = len(nodes)
    total = m ** n
    acc = 0j
    for start in range(0, total, _CHUNK):
        flat = np.arange(start, min(total, start + _CHUNK), dtype=np.int64)
        idx = np.empty((flat.size, n), dtype=np.int64)
        rem = flat.copy()
        for i in range(n - 1, -1, -1):
            idx[:, i] = rem % m
            rem //= m
        w = nodes[idx]
        e = np.einsum("pi,ij,pj->p", w, quad, w) + w @ lin + const
        val = np.exp(e)
        if rows.shape[0]:
            arg = w @ rows.T + offs[None, :]
            val = val / np.prod(np.sin(np.pi * arg), axis=1)
        acc += val.sum()
    return acc


if HAVE_NUMBA:

    @njit(cache=True, fastmath=False)
    def _grid_sum_numba(nodes, quad, lin, const, rows, offs):
        n = quad.shape[0]
        m = nodes.shape[0]
        nr = rows.shape[0]
        total = 1
        for i in range(n):
            total *= m
        w = np.zeros(n, dtype=np.complex128)
        acc = 0j
        for flat in range(total):
            rem = flat
            for i in range(n - 1, -1, -1):
                w[i] = nodes[rem % m]
                rem //= m
            e = const
            for i in range(n):
                e += lin[i] * w[i]
                s = 0j
                for j in range(n):
                    s += quad[i, j] * w[j]
                e += w[i] * s
            val = np.exp(e)
            for r in range(nr):
                a = offs[r]
                for i in range(n):
                    a += rows[r, i] * w[i]
                val /= np.sin(np.pi * a)
            acc += val
        return acc


def grid_sum(nodes, quad, lin, const=0j, rows=None, offs=None):
    """Sum of the exponential-quadratic / product-of-sines integrand over a tensor grid.

    The caller multiplies by the cell volume.  ``nodes`` may be complex, which
    is how shifted contours ``R^n + i c`` are handled (all axes share nodes).
    """
    nodes = np.ascontiguousarray(nodes, dtype=np.complex128)
    quad = np.ascontiguousarray(quad, dtype=np.complex128)
    lin = np.ascontiguousarray(lin, dtype=np.complex128)
    n = quad.shape[0]
    if rows is None:
        rows = np.zeros((0, n))
        offs = np.zeros(0)
    rows = np.ascontiguousarray(rows, dtype=np.complex128)
    offs = np.ascontiguousarray(offs, dtype=np.complex128)
    if USE_NUMBA:
        return _grid_sum_numba(nodes, quad, lin, complex(const), rows, offs)
    return _grid_sum_numpy(nodes, quad, lin, complex(const), rows, offs)


# --------------------------------------------------------------------------
# Kostant partition table: coefficients of prod_alpha (1 - x^alpha)^{-1}
# --------------------------------------------------------------------------


def _kostant_dp_numpy(dims, roots, dtype):
    table = np.zeros(tuple(int(d) for d in dims), dtype=dtype)
    table[(0,) * len(dims)] = 1
    for alpha in roots:
        # multiply by 1/(1 - x^alpha): running sum along the alpha direction,
        # processed one alpha-layer at a time so earlier layers are final
        src = table.copy()
        steps = min(int((d - 1) // a) for d, a in zip(dims, alpha) if a > 0)
        for j in range(1, steps + 1):
            dest = tuple(slice(j * a, None) for a in alpha)
            srcs = tuple(slice(0, d - j * a) for d, a in zip(dims, alpha))
            table[dest] += src[srcs]
    return table


if HAVE_NUMBA:

    @njit(cache=True)
    def _kostant_dp_numba(dims, roots):
        n = dims.shape[0]
        total = 1
        for i in range(n):
            total *= dims[i]
        strides = np.ones(n, dtype=np.int64)
        for i in range(n - 2, -1, -1):
            strides[i] = strides[i + 1] * dims[i + 1]
        t = np.zeros(total, dtype=np.float64)
        t[0] = 1.0
        k = np.zeros(n, dtype=np.int64)
        for r in range(roots.shape[0]):
            off = 0
            for i in range(n):
                off += roots[r, i] * strides[i]
            for flat in range(total):
                rem = flat
                ok = True
                for i in range(n - 1, -1, -1):
                    k[i] = rem % dims[i]
                    rem //= dims[i]
                    if k[i] < roots[r, i]:
                        ok = False
                if ok:
                    t[flat] += t[flat - off]
        return t


def kostant_table(dims, roots, exact: bool = False) -> np.ndarray:
    """Kostant partition values on the box ``0 <= beta_i < dims_i``.

    ``exact=True`` returns Python integers (object array) via the numpy path;
    otherwise float64, which is exact below 2**53.
    """
    dims = np.asarray(dims, dtype=np.int64)
    roots = np.ascontiguousarray(roots, dtype=np.int64)
    if exact:
        return _kostant_dp_numpy(dims, roots, object)
    if USE_NUMBA:
        return _kostant_dp_numba(dims, roots).reshape(tuple(int(d) for d in dims))
    return _kostant_dp_numpy(dims, roots, np.float64)
