from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given, strategies as st

from partialtheta.errors import ModeMismatch, PreconditionError, TailBoundTooLarge
from partialtheta.qseries import (
    EXACT, NUMERIC, QExpansion, eta_expansion, eta_inverse_expansion, eta_numeric, expand_eta,
    qx_add, qx_eval, qx_inverse, qx_mul, qx_scale,
)

F = Fraction

series_st = st.dictionaries(
    st.integers(0, 24).map(lambda k: F(k, 6)), st.integers(-5, 5), max_size=6,
).map(lambda d: QExpansion.from_terms(d))


def _convolve(f, g):
    out = {}
    for e1, c1 in f.terms:
        for e2, c2 in g.terms:
            out[e1 + e2] = out.get(e1 + e2, 0) + c1 * c2
    return {e: c for e, c in out.items() if c != 0}


def test_normal_form():
    f = QExpansion.from_terms([(F(3, 2), 2), (F(1, 2), 1), (F(3, 2), -2), (F(5), 0)])
    assert f.terms == ((F(1, 2), F(1)),)
    g = QExpansion.from_terms({F(1): 1, F(4): 1}, cap=F(3))
    assert g.exponents == [F(1)] and g.dropped == 1


def test_small_examples():
    f = QExpansion.from_terms({F(1, 8): 1, F(9, 8): -1})
    g = QExpansion.monomial(F(1, 8))
    assert (f * g).as_dict() == {F(1, 4): 1, F(5, 4): -1}
    assert (f * QExpansion.one()).same_as(f)
    assert (f - f).terms == ()


def test_mul_matches_convolution(rng):
    for _ in range(10):
        def rand():
            e = rng.choice(np.arange(0, 200), size=20, replace=False)
            return QExpansion.from_terms({F(int(k), 7): int(rng.integers(-9, 10)) or 1 for k in e})
        f, g = rand(), rand()
        assert (f * g).as_dict() == _convolve(f, g)


def test_mul_cap_rule():
    f = QExpansion.from_terms({F(1): 1, F(2): 1}, cap=F(5))
    g = QExpansion.from_terms({F(1, 2): 1}, cap=F(3))
    h = f * g
    assert h.cap == min(F(5) + F(1, 2), F(3) + F(1))
    # a truncated empty series is O(q^cap), not zero
    empty = QExpansion.from_terms({}, cap=F(4))
    prod = QExpansion.from_terms({F(1): 1}) * empty
    assert prod.terms == () and prod.cap == F(5)


def test_add_cap_and_modes():
    f = QExpansion.from_terms({F(1): 1, F(6): 1}, cap=F(10))
    g = QExpansion.from_terms({F(2): 1}, cap=F(4))
    assert (f + g).cap == F(4) and F(6) not in (f + g).as_dict()
    with pytest.raises(ModeMismatch):
        f + f.to_numeric()
    with pytest.raises(ModeMismatch):
        qx_scale(1j, f)
    with pytest.raises(PreconditionError):
        qx_add(f, f.with_eta_power(1))


@given(series_st, series_st, series_st)
def test_ring_axioms(f, g, h):
    assert qx_mul(qx_mul(f, g), h).same_as(qx_mul(f, qx_mul(g, h)))
    assert qx_mul(f, qx_add(g, h)).same_as(qx_add(qx_mul(f, g), qx_mul(f, h)))
    assert qx_mul(f, g).same_as(qx_mul(g, f))
    assert qx_add(f, g).same_as(qx_add(g, f))


def _pentagonal_coeffs(m):
    c = [0] * (m + 1)
    k = 0
    while True:
        hit = False
        for j in (k, -k) if k else (0,):
            g = j * (3 * j - 1) // 2
            if g <= m:
                c[g] = (-1) ** abs(j)
                hit = True
        if not hit and k > 0:
            break
        k += 1
    return c


def test_eta_pentagonal():
    eta = eta_expansion(200)
    want = _pentagonal_coeffs(199)
    got = {e - F(1, 24): c for e, c in eta.terms}
    for n in range(200):
        assert got.get(n, 0) == want[n]
    assert set(eta.coefficients) <= {-1, 1}
    assert eta.exponents[:6] == [F(1, 24) + k for k in (0, 1, 2, 5, 7, 12)]


def test_eta_inverse():
    cap = F(30)
    prod = qx_mul(eta_expansion(cap + 1), eta_inverse_expansion(cap))
    low = prod.truncate(cap - 1)
    assert low.as_dict() == {F(0): 1}
    # 1/eta is q^{-1/24} times the partition generating function
    inv = eta_inverse_expansion(F(12))
    parts = [1, 1, 2, 3, 5, 7, 11, 15, 22, 30, 42]
    for n, pn in enumerate(parts):
        assert inv.coefficient(F(-1, 24) + n) == pn


def test_eta_numeric_closed_form():
    mpmath.mp.dps = 30
    ref = mpmath.gamma(0.25) / (2 * mpmath.pi ** 0.75)
    assert abs(eta_numeric(1j) - complex(ref)) < 1e-10
    tau = 0.23 + 0.61j
    ref2 = complex(mpmath.exp(2j * mpmath.pi * tau / 24) * mpmath.qp(mpmath.exp(2j * mpmath.pi * tau)))
    assert abs(eta_numeric(tau) - ref2) < 1e-12


def test_expand_eta_consistent():
    f = QExpansion.from_terms({F(1, 3): 2, F(2): -1}, cap=F(15)).with_eta_power(-2)
    tau = 0.9j
    a = qx_eval(f, tau).value
    b = qx_eval(expand_eta(f), tau).value
    assert abs(a - b) < 1e-10


def test_qx_eval_examples():
    assert qx_eval(QExpansion.from_terms({}), 1j).value == 0
    v = qx_eval(QExpansion.monomial(F(1, 8)), 1j)
    assert abs(v.value - np.exp(-np.pi / 4)) < 1e-15
    with pytest.raises(PreconditionError):
        qx_eval(QExpansion.one(), -1j)
    trunc = QExpansion.from_terms({F(0): 1}, cap=F(1, 10))
    with pytest.raises(TailBoundTooLarge):
        qx_eval(trunc, 0.1j, tol=1e-12)


def test_qx_eval_bound_conservative(rng):
    mpmath.mp.dps = 40
    for _ in range(100):
        tau = complex(rng.uniform(-0.5, 0.5), rng.uniform(0.3, 1.2))
        n = 30
        exps = sorted(set(int(k) for k in rng.integers(0, 240, size=n)))
        coeffs = rng.normal(size=len(exps)) + 1j * rng.normal(size=len(exps))
        f = QExpansion.from_terms({F(k, 8): complex(c) for k, c in zip(exps, coeffs)}, mode=NUMERIC)
        r = qx_eval(f, tau)
        mtau = mpmath.mpc(tau.real, tau.imag)
        ref = sum(mpmath.mpc(c.real, c.imag) * mpmath.exp(2j * mpmath.pi * mtau * mpmath.mpf(k) / 8)
                  for k, c in zip(exps, coeffs))
        assert abs(r.value - complex(ref)) <= r.error


def test_inverse_requires_nonzero():
    with pytest.raises(PreconditionError):
        qx_inverse(QExpansion.from_terms({}), F(3))
    with pytest.raises(PreconditionError):
        eta_expansion(0)


def test_json_roundtrip():
    f = QExpansion.from_terms({F(1, 8): F(3, 2), F(9, 8): -1}, cap=F(20)).with_eta_power(-1)
    doc = f.to_json()
    assert doc["terms"][0]["exponent"] == "1/8"
    assert doc["cap"] == "20/1"
    assert QExpansion.from_json(doc).same_as(f)
    g = QExpansion.from_terms({F(1, 3): 0.5 - 2j}, cap=F(4), mode=NUMERIC)
    back = QExpansion.from_json(g.to_json())
    assert back.same_as(g) and back.mode == NUMERIC
    assert f.mode == EXACT
