import itertools
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given, strategies as st

from partialtheta import kernels
from partialtheta.errors import NonConvergent, PreconditionError
from partialtheta.qseries import qx_eval
from partialtheta.rootsys import kostant_partition, parse_type
from partialtheta.theta import (
    QuadLattice, RegEps, as_eps, elliptic_law_check, kostant_theta_eval, kostant_theta_series,
    partial_theta_eval, partial_theta_series, theta_B_eval,
)

F = Fraction


def brute_partial(A, u, eps, tau, R=30, weight=None):
    """Naive sum over the shifted cone box 0 <= j < R."""
    A = np.asarray(A, dtype=float)
    n = A.shape[0]
    total = 0j
    for j in itertools.product(range(R), repeat=n):
        k = np.array(j) + 0.5
        w = 1.0 if weight is None else weight(j)
        total += w * np.exp(1j * np.pi * tau * k @ A @ k + 2j * np.pi * k @ A @ np.asarray(u)
                            + 2 * np.pi * k @ np.asarray(eps))
    return total


def test_regeps_validation():
    with pytest.raises(PreconditionError):
        RegEps([0.0 + 1j])
    with pytest.raises(PreconditionError):
        RegEps([-0.3, 0.0])
    e = RegEps([-0.3, 0.2 + 1j])
    assert e.re_signs.tolist() == [-1, 1]
    assert e.stokes_clearance is None
    a2 = parse_type("A2")
    att = e.attach(a2)
    assert att.stokes_clearance == pytest.approx(0.1)
    assert as_eps([0.1, -0.5], a2).stokes_clearance == pytest.approx(0.1)


def test_quadlattice_validation():
    with pytest.raises(PreconditionError):
        QuadLattice([[1, 2], [0, 1]])
    with pytest.raises(PreconditionError):
        QuadLattice([[1, 2], [2, 1]])
    L = QuadLattice.from_root_system(parse_type("A2"), 3)
    assert L.A.tolist() == [[6, -3], [-3, 6]] and L.det == 27


def test_rank1_direct_example():
    L = QuadLattice([[1]])
    r = partial_theta_eval(L, [0], [-1], 1j, 1e-14)
    ref = mpmath.nsum(lambda k: mpmath.exp(-mpmath.pi * (k + 0.5) ** 2 - 2 * mpmath.pi * (k + 0.5)),
                      [0, mpmath.inf])
    assert abs(r.value - complex(ref)) < 1e-12
    assert r.error < 1e-12


@pytest.mark.parametrize("A,u,eps,tau", [
    ([[1]], [0.13 + 0.02j], [-0.4 + 0.3j], 0.7j),
    ([[3]], [-0.2], [0.5], 0.2 + 0.9j),
    ([[2, -1], [-1, 2]], [0.1, -0.05 + 0.01j], [-0.3, 0.2 + 0.1j], 0.8j),
    ([[4, -2], [-2, 4]], [0.0, 0.0], [-0.5, -0.5], 1j),
])
def test_partial_theta_brute(A, u, eps, tau):
    r = partial_theta_eval(QuadLattice(A), u, eps, tau, 1e-13)
    ref = brute_partial(A, u, eps, tau)
    assert abs(r.value - ref) < 1e-11 * max(1, abs(ref))


def test_tol_tightening_stable():
    L = QuadLattice([[2, -1], [-1, 2]])
    a = partial_theta_eval(L, [0.1, 0.2], [-0.2, 0.3], 0.6j, 1e-6)
    b = partial_theta_eval(L, [0.1, 0.2], [-0.2, 0.3], 0.6j, 1e-14)
    assert abs(a.value - b.value) <= a.error + b.error + 1e-15


def test_unregularized_recovery(rng):
    for _ in range(5):
        A = np.array([[2, -1], [-1, 2]])
        L = QuadLattice(A)
        eps = -rng.uniform(0.1, 0.6, size=2) + 1j * rng.normal(size=2) * 0.2
        u = rng.normal(size=2) * 0.3
        tau = 0.9j
        # P_eps(u) summand equals the eps = 0 summand at u + i A^{-1} eps / ... up to sign of i
        shifted = u - 1j * np.linalg.solve(A, eps)
        a = partial_theta_eval(L, u, eps, tau, 1e-13).value
        b = brute_partial(A, shifted, [0, 0], tau)
        assert abs(a - b) < 1e-11 * max(1, abs(a))


@pytest.mark.parametrize("rank", [1, 2, 3])
def test_elliptic_law(rank, rng):
    A = {1: [[2]], 2: [[2, -1], [-1, 2]], 3: [[2, -1, 0], [-1, 2, -1], [0, -1, 2]]}[rank]
    L = QuadLattice(A)
    for _ in range(6):
        u = rng.normal(size=rank) * 0.2 + 1j * rng.normal(size=rank) * 0.05
        eps = rng.uniform(-0.5, 0.5, size=rank) + 1j * rng.normal(size=rank) * 0.1
        m = rng.integers(-1, 2, size=rank)
        ell = rng.integers(-2, 3, size=rank)
        d = elliptic_law_check(L, u, eps, 0.7j + 0.1, m, ell)
        assert d["residual"] < 1e-9
        if not np.any(m):
            assert d["residual_without_boundary"] < 1e-9


def test_elliptic_printed_law_needs_cone_shift():
    L = QuadLattice([[2, -1], [-1, 2]])
    d = elliptic_law_check(L, [0.1, 0.0], [-0.3, -0.2], 0.8j, [1, 0], [1, 0])
    assert d["residual"] < 1e-9
    assert d["residual_without_boundary"] > 1e-3


def test_kostant_a1_is_partial():
    rs = parse_type("A1")
    for p in (2, 3):
        a = kostant_theta_eval(rs, p, [0.1 + 0.02j], [-0.3], 0.8j).value
        b = partial_theta_eval(QuadLattice([[2 * p]]), [0.1 + 0.02j], [-0.3], 0.8j).value
        assert abs(a - b) < 1e-13


def test_kostant_a2_brute():
    rs = parse_type("A2")
    A = 2 * rs.cartan
    r = kostant_theta_eval(rs, 2, [0, 0], [-0.5, -0.5], 1j, 1e-14)
    ref = brute_partial(A, [0, 0], [-0.5, -0.5], 1j, R=20, weight=lambda j: kostant_partition(rs, j))
    assert abs(r.value - ref) < 1e-12 * max(1, abs(ref))


def test_kostant_lowest_weight():
    for label in ["A1", "A2", "A3", "D4"]:
        rs = parse_type(label)
        assert kostant_partition(rs, [0] * rs.rank) == 1
        s = kostant_theta_series(rs, 2, None, None, cap=F(5, 2) * rs.rank)
        lowest = s.terms[0]
        assert lowest[1] == 1
        assert lowest[0] == F(rs.form([F(1, 2)] * rs.rank, [F(1, 2)] * rs.rank) * 2, 2)


def test_partial_series_example():
    s = partial_theta_series(QuadLattice([[2]]), None, None, cap=F(10))
    assert s.as_dict() == {F(1, 4): 1, F(9, 4): 1, F(25, 4): 1}


@pytest.mark.parametrize("rs_label,p,v,eps", [
    ("A1", 2, [F(1, 3)], [-0.2 + 0.1j]),
    ("A2", 2, [F(1, 4), F(-1, 6)], [-0.3, -0.1 + 0.2j]),
    ("A2", 3, [F(0), F(1, 2)], None),
])
def test_series_matches_eval(rs_label, p, v, eps):
    rs = parse_type(rs_label)
    tau = 0.9j
    s = kostant_theta_series(rs, p, v, eps, cap=F(40))
    vf = np.array([float(x) for x in v])
    e = np.zeros(rs.rank) if eps is None else np.asarray(eps)
    if eps is None:
        # eps = 0 is only possible on the series side; compare with a tiny regulator
        e = -np.full(rs.rank, 1e-13)
    direct = kostant_theta_eval(rs, p, vf * tau, e, tau, 1e-14).value
    assert abs(qx_eval(s, tau).value - direct) < 1e-10


def test_theta_B_examples():
    r = theta_B_eval([[1]], [0], [0], 1j, 1e-15)
    ref = mpmath.nsum(lambda n: (-1) ** abs(int(n)) * mpmath.exp(-mpmath.pi * n * n),
                      [-mpmath.inf, mpmath.inf])
    assert abs(r.value - complex(ref)) < 1e-13
    # the n = i eps term carries sign +1; at large Im tau it dominates
    eps = 0.2
    v = theta_B_eval([[1]], [eps], [0], 6j, 1e-15).value
    lead = np.exp(1j * np.pi * 6j * (1j * eps) ** 2)
    assert abs(v - lead) < 1e-6 * lead
    with pytest.raises(NonConvergent):
        theta_B_eval([[1, 2], [2, 1]], [0, 0], [0, 0], 1j)


def test_theta_B_rank1_vs_brute(rng):
    for _ in range(5):
        eps = complex(rng.uniform(-0.5, 0.5), rng.uniform(-0.3, 0.3))
        z = complex(rng.normal() * 0.2, rng.normal() * 0.05)
        tau = complex(rng.uniform(-0.3, 0.3), rng.uniform(0.6, 1.2))
        got = theta_B_eval([[1]], [eps], [z], tau, 1e-14).value
        ref = sum((-1) ** abs(n) * np.exp(1j * np.pi * tau * (n + 1j * eps) ** 2
                                         + 2j * np.pi * z * (n + 1j * eps)) for n in range(-40, 41))
        assert abs(got - ref) < 1e-12 * max(1, abs(ref))


def test_backends_agree():
    if not kernels.HAVE_NUMBA:
        pytest.skip("numba unavailable")
    rs = parse_type("A2")
    args = (rs, 2, [0.1, -0.2 + 0.05j], [-0.3, 0.2], 0.5j + 0.1, 1e-13)
    old = kernels.USE_NUMBA
    try:
        kernels.USE_NUMBA = True
        a = kostant_theta_eval(*args).value
        kernels.USE_NUMBA = False
        b = kostant_theta_eval(*args).value
    finally:
        kernels.USE_NUMBA = old
    assert abs(a - b) < 1e-12 * max(1, abs(a))


@given(st.floats(-0.45, 0.45), st.floats(-0.8, -0.05), st.floats(0.4, 1.5))
def test_box_doubling_stability(u, e, t):
    L = QuadLattice([[3]])
    a = partial_theta_eval(L, [u], [e], 1j * t, 1e-8)
    b = partial_theta_eval(L, [u], [e], 1j * t, 1e-15)
    assert abs(a.value - b.value) <= a.error + 1e-14


def test_translating_series_identity(rng):
    # P_eps(u/tau, -1/tau) = P_{eps - alpha}((u - i A^{-1} alpha tau)/tau, -1/tau)
    L = QuadLattice([[2, -1], [-1, 2]])
    tau = 0.3 + 1.1j
    for _ in range(5):
        u = rng.normal(size=2) * 0.2
        eps = -rng.uniform(0.1, 0.5, size=2)
        alpha = rng.normal(size=2) * 0.2 + 1j * rng.normal(size=2) * 0.2
        s = -1 / tau
        a = partial_theta_eval(L, u / tau, eps, s, 1e-13).value
        shifted = (u - 1j * np.linalg.solve(L.Af, alpha) * tau) / tau
        b = partial_theta_eval(L, shifted, eps - alpha, s, 1e-13).value
        assert abs(a - b) < 1e-10 * max(1, abs(a))
