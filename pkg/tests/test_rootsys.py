import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from partialtheta.errors import GroupTooLarge, PreconditionError, UnsupportedType
from partialtheta.rootsys import (
    build_root_system, kostant_partition, parse_type, weyl_character, weyl_denominator_product,
    weyl_dimension, weyl_group, weyl_numerator,
)

TYPES = [("A", 1), ("A", 2), ("A", 3), ("A", 4), ("D", 4), ("D", 5), ("E", 6), ("E", 7), ("E", 8)]


def n_pos_expected(family, n):
    if family == "A":
        return n * (n + 1) // 2
    if family == "D":
        return n * (n - 1)
    return {6: 36, 7: 63, 8: 120}[n]


@pytest.mark.parametrize("family,rank", TYPES)
def test_root_system_invariants(family, rank):
    rs = build_root_system(family, rank)
    X = rs.cartan
    assert np.array_equal(X, X.T)
    assert np.all(np.diag(X) == 2)
    off = X[~np.eye(rank, dtype=bool)]
    assert set(off.tolist()) <= {0, -1}
    assert np.all(np.linalg.eigvalsh(X.astype(float)) > 0)
    assert rs.n_pos == n_pos_expected(family, rank)
    assert np.all(rs.positive_roots >= 0)
    roots = {tuple(r) for r in rs.positive_roots.tolist()}
    for i in range(rank):
        e = [0] * rank
        e[i] = 1
        assert tuple(e) in roots
        assert rs.form(list(rs.rho_alpha), e) == 1


def test_a1_and_a2_roots():
    a1 = build_root_system("A", 1)
    assert a1.positive_roots.tolist() == [[1]]
    assert a1.cartan.tolist() == [[2]]
    a2 = parse_type("A2")
    assert {tuple(r) for r in a2.positive_roots.tolist()} == {(1, 0), (0, 1), (1, 1)}


@pytest.mark.parametrize("family,rank", [("B", 2), ("D", 3), ("E", 5), ("E", 9), ("A", 0)])
def test_unsupported_types(family, rank):
    with pytest.raises(UnsupportedType):
        build_root_system(family, rank)


@pytest.mark.parametrize("label,order", [("A1", 2), ("A2", 6), ("A3", 24), ("D4", 192)])
def test_weyl_group_orders(label, order):
    rs = parse_type(label)
    W = weyl_group(rs)
    assert len(W) == order
    assert len({w.matrix.tobytes() for w in W}) == order
    assert W[0].length == 0 and np.array_equal(W[0].matrix, np.eye(rs.rank))
    assert sum(w.sign for w in W) == 0
    X = rs.cartan
    for w in W:
        assert np.array_equal(w.matrix.T @ X @ w.matrix, X)
        assert round(np.linalg.det(w.matrix)) == w.sign
        images = rs.positive_roots @ w.matrix.T
        for img in images:
            assert np.all(img >= 0) or np.all(img <= 0)


def test_weyl_group_cap():
    with pytest.raises(GroupTooLarge):
        weyl_group(parse_type("D4"), cap=50)


def _brute_kostant(rs, beta):
    """Count multisets of positive roots summing to beta by recursion over roots."""
    roots = [tuple(r) for r in rs.positive_roots.tolist()]

    def count(rem, i):
        if all(c == 0 for c in rem):
            return 1
        if i == len(roots):
            return 0
        total = 0
        r = roots[i]
        cur = rem
        while all(c >= 0 for c in cur):
            total += count(cur, i + 1)
            cur = tuple(c - d for c, d in zip(cur, r))
        return total

    return count(tuple(beta), 0)


def test_kostant_examples():
    a2 = parse_type("A2")
    assert kostant_partition(a2, [0, 0]) == 1
    assert kostant_partition(a2, [1, 1]) == 2
    assert kostant_partition(a2, [2, 1]) == 2
    for a in range(6):
        for b in range(6):
            assert kostant_partition(a2, [a, b]) == min(a, b) + 1


@pytest.mark.parametrize("label", ["A1", "A2", "A3"])
def test_kostant_brute_force(label):
    rs = parse_type(label)
    for beta in itertools.product(range(9), repeat=rs.rank):
        if sum(beta) <= 8:
            assert kostant_partition(rs, beta) == _brute_kostant(rs, beta)


def test_kostant_generating_function():
    # expand prod (1 - z^alpha)^{-1} to total degree 8 as a dense array
    rs = parse_type("A3")
    deg = 8
    series = np.zeros((deg + 1,) * 3, dtype=np.int64)
    series[0, 0, 0] = 1
    for alpha in rs.positive_roots.tolist():
        # multiply by 1/(1 - z^alpha): s[b] += s[b - alpha] in increasing order
        for b in itertools.product(range(deg + 1), repeat=3):
            prev = tuple(x - a for x, a in zip(b, alpha))
            if min(prev) >= 0:
                series[b] += series[prev]
    for b in itertools.product(range(deg + 1), repeat=3):
        if sum(b) <= deg:
            assert series[b] == kostant_partition(rs, b)


def test_kostant_negative_rejected():
    with pytest.raises(PreconditionError):
        kostant_partition(parse_type("A2"), [-1, 0])


def test_numerator_a1_and_zero():
    rs = parse_type("A1")
    x = [0.37 + 0.1j]
    rho_x = 0.5 * x[0]
    val = weyl_numerator(rs, [0], x)
    assert abs(val - (np.exp(2j * np.pi * rho_x) - np.exp(-2j * np.pi * rho_x))) < 1e-13
    for label in ["A1", "A2", "D4"]:
        rs = parse_type(label)
        lam = rs.weight_from_omega([1] * rs.rank)
        assert abs(weyl_numerator(rs, lam, [0] * rs.rank)) < 1e-10


def test_numerator_denominator_formula(rng):
    for label in ["A2", "A3", "D4"]:
        rs = parse_type(label)
        for _ in range(5):
            x = rng.normal(size=rs.rank) * 0.3 + 1j * rng.normal(size=rs.rank) * 0.05
            num = weyl_numerator(rs, [0] * rs.rank, x)
            assert abs(num - weyl_denominator_product(rs, x)) < 1e-12 * max(1, abs(num))


def test_characters():
    a1 = parse_type("A1")
    for m in range(6):
        assert weyl_character(a1, a1.weight_from_omega([m]), [0]) == pytest.approx(m + 1)
    a2 = parse_type("A2")
    assert weyl_character(a2, a2.fundamental_weight(1), [0, 0]) == pytest.approx(3)
    assert weyl_character(a2, [0, 0], [0.123, -0.31]) == pytest.approx(1)
    assert weyl_dimension(a2, a2.weight_from_omega([1, 1])) == Fraction(8)
    d4 = parse_type("D4")
    assert weyl_dimension(d4, d4.fundamental_weight(2)) == 28


def test_character_singular_path():
    a2 = parse_type("A2")
    lam = a2.weight_from_omega([2, 1])
    near = weyl_character(a2, lam, [1e-11, -2e-11])
    assert near == pytest.approx(15, rel=1e-6)


def test_character_a1_closed_form(rng):
    a1 = parse_type("A1")
    for m in range(5):
        x = rng.uniform(0.05, 0.45)
        # chi_m(x) = sin(pi (m+1) x) / sin(pi x) with (omega, x) = x/2
        expected = np.sin(np.pi * (m + 1) * x) / np.sin(np.pi * x)
        got = weyl_character(a1, a1.weight_from_omega([m]), [x])
        assert abs(got - expected) < 1e-11


def test_shifted_action_sign():
    rs = parse_type("A2")
    rho = np.array([float(r) for r in rs.rho_alpha])
    x = np.array([0.211 + 0.03j, -0.137])
    lam = np.array([float(c) for c in rs.weight_from_omega([2, 1])])
    base = weyl_numerator(rs, lam, x)
    for w in weyl_group(rs):
        wl = w.matrix @ (lam + rho) - rho
        assert abs(weyl_numerator(rs, wl, x) - w.sign * base) < 1e-11


@given(st.lists(st.integers(0, 6), min_size=2, max_size=2))
def test_kostant_a2_closed_form_property(beta):
    assert kostant_partition(parse_type("A2"), beta) == min(beta) + 1
