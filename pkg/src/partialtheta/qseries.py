"""Truncated q-expansions with exact rational exponents.

A :class:`QExpansion` is ``eta(tau)**eta_power * sum_e c_e q**e``; the eta factor
is kept symbolic.  ``cap`` is the exponent up to which the stored terms are
complete (``None`` for a finite, exact polynomial).
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

import numpy as np

from .errors import ModeMismatch, PreconditionError, TailBoundTooLarge
from .numeric import NumericResult

EXACT = "exact"
NUMERIC = "numeric"
DEFAULT_CAP = Fraction(20)


def _exp(e):
    if isinstance(e, float):
        return e
    return Fraction(e)


def _min_cap(a, b):
    if a is None:
        return b
    if b is None:
        return a
    return min(a, b)


def _clean(c, mode):
    if mode == EXACT:
        c = Fraction(c)
        return c, c == 0
    c = complex(c)
    return c, c == 0


@dataclass(frozen=True)
class QExpansion:
    terms: tuple[tuple[Fraction | float, Fraction | complex], ...]
    cap: Fraction | None = None
    eta_power: int = 0
    mode: str = EXACT
    dropped: int = 0

    @classmethod
    def from_terms(cls, terms, cap=None, eta_power: int = 0, mode: str = EXACT) -> "QExpansion":
        if isinstance(terms, Mapping):
            terms = terms.items()
        acc: dict = {}
        for e, c in terms:
            e = _exp(e)
            acc[e] = acc.get(e, 0) + c
        cap = None if cap is None else _exp(cap)
        out = []
        dropped = 0
        for e in sorted(acc):
            c, zero = _clean(acc[e], mode)
            if zero:
                continue
            if cap is not None and e > cap:
                dropped += 1
                continue
            out.append((e, c))
        return cls(tuple(out), cap, int(eta_power), mode, dropped)

    @classmethod
    def one(cls, mode: str = EXACT) -> "QExpansion":
        return cls.from_terms({Fraction(0): 1}, None, 0, mode)

    @classmethod
    def monomial(cls, exponent, coeff=1, mode: str = EXACT, eta_power: int = 0) -> "QExpansion":
        return cls.from_terms({exponent: coeff}, None, eta_power, mode)

    # -- basic accessors ------------------------------------------------------

    def __len__(self) -> int:
        return len(self.terms)

    @property
    def exponents(self):
        return [e for e, _ in self.terms]

    @property
    def coefficients(self):
        return [c for _, c in self.terms]

    @property
    def valuation(self):
        return self.terms[0][0] if self.terms else None

    @property
    def exact_exponents(self) -> bool:
        return all(isinstance(e, Fraction) for e, _ in self.terms)

    def as_dict(self) -> dict:
        return dict(self.terms)

    def coefficient(self, e):
        return self.as_dict().get(_exp(e), 0)

    def truncate(self, cap) -> "QExpansion":
        return QExpansion.from_terms(self.terms, _min_cap(self.cap, _exp(cap)), self.eta_power, self.mode)

    def to_numeric(self) -> "QExpansion":
        if self.mode == NUMERIC:
            return self
        return QExpansion.from_terms([(e, complex(c)) for e, c in self.terms], self.cap,
                                     self.eta_power, NUMERIC)

    def with_eta_power(self, k: int) -> "QExpansion":
        return QExpansion(self.terms, self.cap, int(k), self.mode, self.dropped)

    # -- ring operations ------------------------------------------------------

    def _check(self, other: "QExpansion"):
        if self.mode != other.mode:
            raise ModeMismatch(f"cannot combine {self.mode} and {other.mode} series")

    def __add__(self, other: "QExpansion") -> "QExpansion":
        return qx_add(self, other)

    def __sub__(self, other: "QExpansion") -> "QExpansion":
        return qx_add(self, qx_scale(-1, other))

    def __neg__(self) -> "QExpansion":
        return qx_scale(-1, self)

    def __mul__(self, other):
        if isinstance(other, QExpansion):
            return qx_mul(self, other)
        return qx_scale(other, self)

    __rmul__ = __mul__

    def same_as(self, other: "QExpansion", atol: float = 0.0) -> bool:
        """Term-by-term equality (exact, or within ``atol`` in numeric mode)."""
        if self.eta_power != other.eta_power:
            return False
        a, b = self.as_dict(), other.as_dict()
        keys = set(a) | set(b)
        if atol == 0.0:
            return all(a.get(k, 0) == b.get(k, 0) for k in keys)
        return all(abs(complex(a.get(k, 0)) - complex(b.get(k, 0))) <= atol for k in keys)

    # -- serialization --------------------------------------------------------

    def to_json(self) -> dict:
        rows = []
        for e, c in self.terms:
            row = {"exponent": _frac_str(e)}
            cc = complex(c)
            row["coeff_re"] = cc.real
            row["coeff_im"] = cc.imag
            if self.mode == EXACT:
                row["coeff"] = _frac_str(c)
            rows.append(row)
        return {
            "terms": rows,
            "eta_power": self.eta_power,
            "cap": None if self.cap is None else _frac_str(self.cap),
            "mode": self.mode,
        }

    @classmethod
    def from_json(cls, data: dict) -> "QExpansion":
        mode = data.get("mode", NUMERIC)
        terms = []
        for row in data["terms"]:
            e = _parse_frac(row["exponent"])
            if mode == EXACT:
                c = Fraction(row["coeff"])
            else:
                c = complex(row["coeff_re"], row["coeff_im"])
            terms.append((e, c))
        cap = None if data.get("cap") is None else _parse_frac(data["cap"])
        return cls.from_terms(terms, cap, data.get("eta_power", 0), mode)


def _frac_str(x) -> str:
    if isinstance(x, float):
        return repr(x)
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def _parse_frac(s: str):
    try:
        return Fraction(s)
    except ValueError:
        return float(s)


def qx_add(f: QExpansion, g: QExpansion) -> QExpansion:
    f._check(g)
    if f.eta_power != g.eta_power:
        raise PreconditionError("cannot add series with different eta powers")
    terms = list(f.terms) + list(g.terms)
    return QExpansion.from_terms(terms, _min_cap(f.cap, g.cap), f.eta_power, f.mode)


def qx_scale(c, f: QExpansion) -> QExpansion:
    if f.mode == EXACT and isinstance(c, complex):
        raise ModeMismatch("complex scalar applied to an exact series")
    return QExpansion.from_terms([(e, c * a) for e, a in f.terms], f.cap, f.eta_power, f.mode)


def qx_mul(f: QExpansion, g: QExpansion) -> QExpansion:
    f._check(g)
    # a series known to cap_f starting at val_f, times one known to cap_g from val_g,
    # is known to min(cap_f + val_g, cap_g + val_f)
    # an empty truncated series is O(q^cap); an empty exact series is zero
    if (not f.terms and f.cap is None) or (not g.terms and g.cap is None):
        return QExpansion.from_terms({}, None, f.eta_power + g.eta_power, f.mode)
    vf = f.valuation if f.terms else f.cap
    vg = g.valuation if g.terms else g.cap
    cap = None
    if f.cap is not None:
        cap = f.cap + vg
    if g.cap is not None:
        cap = _min_cap(cap, g.cap + vf)
    acc: dict = {}
    for e1, c1 in f.terms:
        for e2, c2 in g.terms:
            e = e1 + e2
            if cap is not None and e > cap:
                continue
            acc[e] = acc.get(e, 0) + c1 * c2
    return QExpansion.from_terms(acc, cap, f.eta_power + g.eta_power, f.mode)


def qx_inverse(f: QExpansion, cap) -> QExpansion:
    """Multiplicative inverse, complete up to exponent ``cap``."""
    if not f.terms:
        raise PreconditionError("cannot invert the zero series")
    e0, c0 = f.terms[0]
    cap = _exp(cap)
    rel = cap + e0  # precision needed for g = f / (c0 q^e0) - 1
    if f.cap is not None:
        rel = min(rel, f.cap - e0)
    inv_c0 = (1 / Fraction(c0)) if f.mode == EXACT else 1 / complex(c0)
    g = QExpansion.from_terms([(e - e0, c * inv_c0) for e, c in f.terms[1:]], rel, 0, f.mode)
    # 1/(1+g) = sum_j (-g)^j; g has positive valuation
    result = QExpansion.from_terms({Fraction(0): 1}, rel, 0, f.mode)
    power = result
    neg_g = qx_scale(-1, g)
    while True:
        power = qx_mul(power, neg_g).truncate(rel)
        if not power.terms:
            break
        result = qx_add(result, power)
    terms = [(e - e0, c * inv_c0) for e, c in result.terms]
    return QExpansion.from_terms(terms, rel - e0, -f.eta_power, f.mode)


# --------------------------------------------------------------------------
# Dedekind eta
# --------------------------------------------------------------------------


def _euler_product_coeffs(m: int) -> list[int]:
    """Coefficients of prod_{k>=1} (1 - q^k) up to q^m."""
    c = [0] * (m + 1)
    c[0] = 1
    for k in range(1, m + 1):
        for j in range(m, k - 1, -1):
            c[j] -= c[j - k]
    return c


def eta_expansion(cap=DEFAULT_CAP) -> QExpansion:
    """q^{1/24} prod_{k>=1} (1 - q^k), complete up to exponent ``cap``."""
    cap = Fraction(cap)
    if cap <= 0:
        raise PreconditionError("cap must be positive")
    m = math.floor(cap - Fraction(1, 24))
    if m < 0:
        return QExpansion.from_terms({}, cap, 0, EXACT)
    c = _euler_product_coeffs(m)
    return QExpansion.from_terms({Fraction(1, 24) + j: c[j] for j in range(m + 1)}, cap, 0, EXACT)


def eta_inverse_expansion(cap=DEFAULT_CAP) -> QExpansion:
    cap = Fraction(cap)
    return qx_inverse(eta_expansion(cap + 1), cap).with_eta_power(0)


def eta_numeric(tau: complex, tol: float = 1e-16) -> complex:
    """eta(tau) by direct evaluation of the product."""
    tau = complex(tau)
    if tau.imag <= 0:
        raise PreconditionError("Im(tau) must be positive")
    q = cmath.exp(2j * math.pi * tau)
    val = cmath.exp(2j * math.pi * tau / 24)
    qk = q
    while abs(qk) > tol:
        val *= 1 - qk
        qk *= q
    return val


def expand_eta(f: QExpansion, cap=None) -> QExpansion:
    """Multiply out the symbolic eta**eta_power factor."""
    if f.eta_power == 0:
        return f
    cap = _exp(cap) if cap is not None else (f.cap if f.cap is not None else DEFAULT_CAP)
    k = f.eta_power
    base = eta_expansion(cap + 1) if k > 0 else qx_inverse(eta_expansion(cap + 2), cap + 1)
    base = base.with_eta_power(0)
    if f.mode == NUMERIC:
        base = base.to_numeric()
    out = f.with_eta_power(0)
    for _ in range(abs(k)):
        out = qx_mul(out, base)
    return out.truncate(cap)


def qx_eval(f: QExpansion, tau: complex, tol: float | None = None) -> NumericResult:
    """Numeric value of the series at tau, with rounding and truncation bound."""
    tau = complex(tau)
    if tau.imag <= 0:
        raise PreconditionError("Im(tau) must be positive")
    eps = np.finfo(float).eps
    if not f.terms:
        return NumericResult(0j, 0.0, {"terms": 0})
    e = np.array([float(x) for x in f.exponents])
    c = np.array([complex(x) for x in f.coefficients])
    arg = 2j * np.pi * tau * e
    t = c * np.exp(arg)
    value = complex(t.sum())
    mags = np.abs(t)
    rounding = float(np.sum(mags * eps * (8.0 + np.abs(arg))) + len(t) * eps * mags.sum())
    tail = 0.0
    if f.cap is not None:
        qa = math.exp(-2 * math.pi * tau.imag)
        last = float(np.max(np.abs(c[-min(5, len(c)):])))
        tail = last * qa ** float(f.cap) / (1.0 - qa)
    if f.eta_power:
        eta = eta_numeric(tau) ** f.eta_power
        value *= eta
        rounding *= abs(eta)
        tail *= abs(eta)
        rounding += abs(value) * eps * 8 * abs(f.eta_power)
    if tol is not None and tail > tol:
        raise TailBoundTooLarge(f"estimated tail {tail:.3g} exceeds tolerance {tol:.3g}")
    return NumericResult(value, rounding + tail, {"terms": len(t), "tail": tail})
