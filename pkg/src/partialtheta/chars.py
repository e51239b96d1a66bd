"""Weight decomposition and the characters of the narrow W-algebra modules.

Weights of L^0 are given by integer coordinates ``m`` in the basis
lambda_j = omega_j / sqrt(p).  Internally every weight is stored as a rational
vector in alpha coordinates with sqrt(p) absorbed: a vector ``c`` stands for
sqrt(p) * c in h*, and its squared length is p <c, c> = (c, A c) with A = pX.
With this convention

* gamma' = gamma + lambda_hat has omega coordinates t = (m - (1 - s)) / p;
* kappa = -sqrt(p) lambda_bar = sum_j (s_j - 1) omega_j is dominant.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import InternalInconsistency, PreconditionError
from .qseries import EXACT, NUMERIC, QExpansion, qx_add, qx_mul, qx_scale
from .rootsys import RootSystem, kostant_partition, weyl_dimension, weyl_group
from .theta import kostant_theta_series

# omega-coordinate indices (1-based) of the nonzero coset representatives of P/Q
_COSET_REPS = {
    "A": lambda n: list(range(1, n + 1)),
    "D": lambda n: [1, n - 1, n],
    "E": lambda n: {6: [1, 6], 7: [7], 8: []}[n],
}


def coset_representatives(rs: RootSystem) -> list[tuple[int, ...]]:
    """omega coordinates of the fixed representatives of P/Q (zero first)."""
    n = rs.rank
    reps = [tuple([0] * n)]
    for i in _COSET_REPS[rs.family](n):
        reps.append(tuple(int(i == j + 1) for j in range(n)))
    return reps


def _omega_to_alpha(rs: RootSystem, t) -> tuple[Fraction, ...]:
    return rs.weight_from_omega(t)


def _alpha_to_omega(rs: RootSystem, a) -> tuple:
    X = rs.cartan
    return tuple(sum(int(X[i, j]) * a[j] for j in range(rs.rank)) for i in range(rs.rank))


def _is_integral(v) -> bool:
    return all(Fraction(x).denominator == 1 for x in v)


@dataclass(frozen=True)
class WeightDecomposition:
    rs: RootSystem
    p: int
    mu_coords: tuple[int, ...]
    lambda_hat: tuple[int, ...]           # omega coordinates of the representative
    s: tuple[int, ...]
    gamma: tuple[int, ...]                # alpha coordinates, integral

    @property
    def lambda_hat_alpha(self) -> tuple[Fraction, ...]:
        return _omega_to_alpha(self.rs, self.lambda_hat)

    @property
    def gamma_prime(self) -> tuple[Fraction, ...]:
        """alpha coordinates of gamma + lambda_hat."""
        return tuple(Fraction(g) + l for g, l in zip(self.gamma, self.lambda_hat_alpha))

    @property
    def kappa_omega(self) -> tuple[int, ...]:
        return tuple(sj - 1 for sj in self.s)

    @property
    def kappa(self) -> tuple[Fraction, ...]:
        """alpha coordinates of -sqrt(p) lambda_bar = sum (s_j - 1) omega_j."""
        return _omega_to_alpha(self.rs, self.kappa_omega)

    @property
    def lambda_bar_coords(self) -> tuple[int, ...]:
        """Coefficients of lambda_bar in the basis lambda_j."""
        return tuple(1 - sj for sj in self.s)

    @property
    def is_vacuum(self) -> bool:
        return not any(self.mu_coords)

    def to_json(self) -> dict:
        return {
            "type": self.rs.label,
            "p": self.p,
            "mu_coords": list(self.mu_coords),
            "lambda_hat_omega": list(self.lambda_hat),
            "s": list(self.s),
            "gamma_alpha": list(self.gamma),
            "kappa_omega": list(self.kappa_omega),
        }


def reassemble(rs: RootSystem, p: int, lambda_hat, s, gamma) -> tuple[int, ...]:
    """mu coordinates m = p (omega coordinates of lambda_hat + gamma) + (1 - s)."""
    g_om = _alpha_to_omega(rs, [Fraction(x) for x in gamma])
    return tuple(int(p * (int(l) + int(g)) + 1 - int(sj)) for l, g, sj in zip(lambda_hat, g_om, s))


def decompose_weight(rs: RootSystem, p: int, mu_coords: Sequence[int]) -> WeightDecomposition:
    """Split mu = sqrt(p) lambda_hat + sum (1 - s_j) lambda_j + sqrt(p) gamma."""
    p = int(p)
    if p < 2:
        raise PreconditionError("p must be at least 2")
    m = tuple(int(x) for x in mu_coords)
    if len(m) != rs.rank:
        raise PreconditionError("mu has the wrong length")
    s = tuple((-mj) % p + 1 for mj in m)
    t = tuple((mj - 1 + sj) // p for mj, sj in zip(m, s))
    rep = None
    for r in coset_representatives(rs):
        if _is_integral(_omega_to_alpha(rs, [a - b for a, b in zip(t, r)])):
            rep = r
            break
    if rep is None:
        raise InternalInconsistency("no coset representative matched")
    gamma = tuple(int(x) for x in _omega_to_alpha(rs, [a - b for a, b in zip(t, rep)]))
    dec = WeightDecomposition(rs, p, m, rep, s, gamma)
    if reassemble(rs, p, rep, s, gamma) != m:
        raise InternalInconsistency("reassembly failed")
    return dec


def _as_decomposition(rs, p, mu) -> WeightDecomposition:
    if isinstance(mu, WeightDecomposition):
        return mu
    return decompose_weight(rs, p, mu)


def _norm(rs: RootSystem, c) -> Fraction:
    return rs.form(c, c)


def _w_apply(w, v) -> tuple[Fraction, ...]:
    M = w.matrix
    n = len(v)
    return tuple(sum(int(M[i, j]) * v[j] for j in range(n)) for i in range(n))


# --------------------------------------------------------------------------
# characters
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class CharacterRecord:
    kind: str
    decomposition: WeightDecomposition | None
    lam: tuple | None
    eps: np.ndarray | None
    series: QExpansion

    def to_json(self) -> dict:
        out = {"kind": self.kind, "series": self.series.to_json()}
        if self.decomposition is not None:
            out["decomposition"] = self.decomposition.to_json()
        if self.lam is not None:
            out["lambda"] = [str(x) for x in self.lam]
        out["eps"] = None if self.eps is None else [[complex(e).real, complex(e).imag] for e in self.eps]
        return out


def _v_vector(dec: WeightDecomposition, w) -> tuple[Fraction, ...]:
    """v_w = -e/2 + rho - gamma' + w(kappa + rho)/p, alpha coordinates."""
    rs, p = dec.rs, dec.p
    kr = tuple(k + r for k, r in zip(dec.kappa, rs.rho_alpha))
    wk = _w_apply(w, kr)
    half = Fraction(1, 2)
    return tuple(-half + r - g + x / p for r, g, x in zip(rs.rho_alpha, dec.gamma_prime, wk))


def _eps_array(eps, n):
    if eps is None:
        return None
    e = np.asarray(eps, dtype=complex).ravel()
    if e.size != n:
        raise PreconditionError("eps has the wrong length")
    if not np.any(e):
        return None
    return e


def atypical_character(rs: RootSystem, p: int, mu, eps=None, order=10) -> CharacterRecord:
    """eta^n ch[W^0(p,mu)]^eps = (-1)^{|Delta+|} sum_w (-1)^{l(w)} A_w^eps as a q-series.

    A_w^eps = e^{2 pi (v + e/2, eps)} q^{(v,Av)/2} K_eps(v tau, tau).  ``eps=None``
    gives the exact unregularized series.  The returned series carries
    eta_power = -rank.
    """
    dec = _as_decomposition(rs, p, mu)
    n = rs.rank
    p = int(p)
    order = Fraction(order)
    e = _eps_array(eps, n)
    mode = EXACT if e is None else NUMERIC
    total = QExpansion.from_terms({}, order, 0, mode)
    sign0 = -1 if rs.n_pos % 2 else 1
    W = weyl_group(rs)
    # each A_w is a sum of q^{(k+v,A(k+v))/2} with k_i >= 1/2, and
    # (x,Ax)/2 >= lam_min |x|^2 / 2, so w-terms whose bound exceeds the order vanish
    kr = np.array([float(k + r) for k, r in zip(dec.kappa, rs.rho_alpha)])
    base = np.array([float(r - g) - 0.5 for r, g in zip(rs.rho_alpha, dec.gamma_prime)])
    V = base[None, :] + np.stack([w.matrix for w in W]) @ kr / p
    lam = p * float(np.linalg.eigvalsh(rs.cartan.astype(float)).min())
    lower = 0.5 * lam * np.sum(np.maximum(V + 0.5, 0.0) ** 2, axis=1)
    for w, lb in zip(W, lower):
        if lb > float(order) + 1e-9:
            continue
        v = _v_vector(dec, w)
        vAv = p * _norm(rs, v)
        series = kostant_theta_series(rs, p, v, e, order - vAv / 2)
        pref = QExpansion.monomial(vAv / 2, 1, mode)
        coeff = sign0 * w.sign
        if e is not None:
            coeff = coeff * complex(np.exp(2 * math.pi * np.dot([float(x) + 0.5 for x in v], e)))
        term = qx_scale(coeff, qx_mul(pref, series)).truncate(order)
        total = qx_add(total, term)
    total = QExpansion.from_terms(total.terms, order, -n, mode)
    return CharacterRecord("atypical", dec, None, e, total)


def _enumerate_lattice(rs: RootSystem, centre, radius2: float):
    """Integer alpha-vectors a with <a - centre, a - centre> <= radius2."""
    lam = float(np.linalg.eigvalsh(rs.cartan.astype(float)).min())
    r = math.sqrt(max(radius2, 0.0) / lam) + 1
    c = np.array([float(x) for x in centre])
    axes = [np.arange(math.floor(ci - r), math.ceil(ci + r) + 1) for ci in c]
    X = rs.cartan.astype(float)
    for a in itertools.product(*axes):
        d = np.array(a, dtype=float) - c
        if d @ X @ d <= radius2 + 1e-9:
            yield tuple(int(x) for x in a)


def constant_term_character(rs: RootSystem, p: int, mu, order=10) -> QExpansion:
    """eta^n ch[W^0(p,mu)] by extracting the z^{gamma'} coefficient of the full character.

    The coefficient of q^{E(alpha)}, E(alpha) = p <c, c>/2 with
    c = alpha + rho + lambda_hat - (kappa + rho)/p, is
    (-1)^{|Delta+|} sum_w (-1)^{l(w)} K(gamma' - rho - w(alpha + rho + lambda_hat)).
    """
    dec = _as_decomposition(rs, p, mu)
    n = rs.rank
    p = int(p)
    order = Fraction(order)
    rho = rs.rho_alpha
    lh = dec.lambda_hat_alpha
    gp = dec.gamma_prime
    shift = tuple((k + r) / p - r - l for k, r, l in zip(dec.kappa, rho, lh))
    W = weyl_group(rs)
    sign0 = -1 if rs.n_pos % 2 else 1
    terms: dict = {}
    for a in _enumerate_lattice(rs, shift, 2 * float(order) / p):
        beta = tuple(x + r + l for x, r, l in zip(a, rho, lh))
        c = tuple(b - (k + r) / p for b, k, r in zip(beta, dec.kappa, rho))
        E = p * _norm(rs, c) / 2
        if E > order:
            continue
        coeff = 0
        for w in W:
            arg = tuple(g - r - x for g, r, x in zip(gp, rho, _w_apply(w, beta)))
            if all(Fraction(x).denominator == 1 and x >= 0 for x in arg):
                coeff += w.sign * kostant_partition(rs, [int(x) for x in arg])
        if coeff:
            terms[E] = terms.get(E, 0) + sign0 * coeff
    return QExpansion.from_terms(terms, order, -n, EXACT)


def full_character_specialized(rs: RootSystem, p: int, lam_rep, order=10) -> QExpansion:
    """eta^n ch[W(p, lambda)](tau) at z = 1: sum over alpha in Q with lambda_hat + alpha dominant of
    dim V(lambda_hat + alpha) sum_w (-1)^{l(w)} q^{|| sqrt(p) w(alpha + rho + lambda_hat) + lambda_bar - rho/sqrt(p) ||^2 / 2}.

    ``lam_rep`` is a WeightDecomposition (only lambda_hat and s are used) or a
    pair (lambda_hat omega coordinates, s).
    """
    if isinstance(lam_rep, WeightDecomposition):
        lh_om, s = lam_rep.lambda_hat, lam_rep.s
    else:
        lh_om, s = (tuple(int(x) for x in lam_rep[0]), tuple(int(x) for x in lam_rep[1]))
    n = rs.rank
    p = int(p)
    order = Fraction(order)
    rho = rs.rho_alpha
    kr = tuple(k + r for k, r in zip(_omega_to_alpha(rs, [x - 1 for x in s]), rho))
    W = weyl_group(rs)
    # || p w(beta) - (kappa + rho) || >= p ||beta|| - ||kappa + rho||, so bound ||beta||
    kr_norm = math.sqrt(float(_norm(rs, kr)))
    bmax = (math.sqrt(2 * p * float(order)) + kr_norm) / p
    Xinv = rs.cartan_inv_float
    lam = float(np.linalg.eigvalsh(Xinv).min())
    top = int(math.ceil(bmax / math.sqrt(lam))) + 1
    terms: dict = {}
    for om in itertools.product(range(top + 1), repeat=n):
        # om = omega coordinates of the dominant weight lambda_hat + alpha
        if not _is_integral(_omega_to_alpha(rs, [a - b for a, b in zip(om, lh_om)])):
            continue
        hw = _omega_to_alpha(rs, om)
        beta = tuple(h + r for h, r in zip(hw, rho))
        if math.sqrt(float(_norm(rs, beta))) > bmax + 1e-9:
            continue
        dim = weyl_dimension(rs, hw)
        for w in W:
            c = tuple(p * x - k for x, k in zip(_w_apply(w, beta), kr))
            E = _norm(rs, c) / (2 * p)
            if E <= order:
                terms[E] = terms.get(E, 0) + w.sign * dim
    return QExpansion.from_terms(terms, order, -n, EXACT)


def alpha0_rho(rs: RootSystem, p: int) -> tuple[Fraction, ...]:
    """(sqrt(p) - 1/sqrt(p)) rho in coordinates of the basis sqrt(p) alpha_i."""
    return tuple((1 - Fraction(1, int(p))) * r for r in rs.rho_alpha)


def typical_character(rs: RootSystem, p: int, lam, eps=None) -> CharacterRecord:
    """ch[F_lam]^eps = e^{2 pi (eps, lam - alpha0 rho)} q^{||lam - alpha0 rho||^2 / 2} / eta^n.

    ``lam`` is given in coordinates of the basis sqrt(p) alpha_i of L (Gram
    matrix A = pX); rational input gives an exact exponent.
    """
    n = rs.rank
    p = int(p)
    if len(lam) != n:
        raise PreconditionError("lambda has the wrong length")
    shift = alpha0_rho(rs, p)
    exact_lam = all(isinstance(x, (int, Fraction)) for x in lam)
    e = _eps_array(eps, n)
    A = p * rs.cartan
    if exact_lam:
        d = [Fraction(x) - s for x, s in zip(lam, shift)]
        E = sum(d[i] * int(A[i, j]) * d[j] for i in range(n) for j in range(n)) / 2
    else:
        d = [complex(x) - float(s) for x, s in zip(lam, shift)]
        dv = np.array(d)
        E = complex(dv @ A.astype(float) @ dv) / 2
        if abs(E.imag) > 1e-14 * max(1.0, abs(E)):
            raise PreconditionError("complex q-exponents are not representable")
        E = float(E.real)
    coeff = 1
    mode = EXACT
    if e is not None or not exact_lam:
        mode = NUMERIC
        coeff = complex(np.exp(2 * math.pi * np.dot(np.array([complex(x) for x in d]), e))) if e is not None else 1.0
    series = QExpansion.from_terms({E: coeff}, None, -n, mode)
    return CharacterRecord("typical", None, tuple(lam), e, series)


def weyl_shifted_decomposition(dec: WeightDecomposition, w) -> WeightDecomposition:
    """The weight whose gamma' is w(gamma') at the same lambda_hat class and s."""
    rs, p = dec.rs, dec.p
    new_gp = _w_apply(w, dec.gamma_prime)
    t = _alpha_to_omega(rs, new_gp)
    m = tuple(int(p * ti + 1 - sj) for ti, sj in zip(t, dec.s))
    return decompose_weight(rs, p, m)


def weyl_invariance_check(rs: RootSystem, p: int, mu, w, order=10) -> bool:
    """ch[W^0(p, mu)] = ch[W^0(p, w.mu)] as exact series up to ``order``."""
    dec = _as_decomposition(rs, p, mu)
    other = weyl_shifted_decomposition(dec, w)
    a = atypical_character(rs, p, dec, None, order).series
    b = atypical_character(rs, p, other, None, order).series
    return a.same_as(b)


def singlet_a1_series(p: int, mu_coords: int, order=10) -> QExpansion:
    """eta ch for A_1 from the two closed rank-one singlet formulas (direct summation).

    mu = m omega / sqrt(p).  For m = j + 2pk with -(p-1) <= j <= 0 the first
    family applies; for m = p - j + 2pk with 0 <= j <= p-1 the second.
    """
    p = int(p)
    m = int(mu_coords)
    order = Fraction(order)
    r = m % (2 * p)
    if r == 0 or r > p:
        j = r - 2 * p if r > p else 0
        k = (m - j) // (2 * p)
        a = Fraction(p + j - 1, 2 * p)
        b = Fraction(p - j + 1, 2 * p)
    else:
        j = p - r
        k = (m - p + j) // (2 * p)
        a = Fraction(2 * p - j - 1, 2 * p)
        b = Fraction(2 * p + j + 1, 2 * p)
    terms: dict = {}
    nmax = int(math.isqrt(int(order / p) + 1)) + 3
    for nn in range(k, max(k, nmax) + 1):
        for off, sgn in ((a, 1), (b, -1)):
            E = p * (nn + off) ** 2
            if E <= order:
                terms[E] = terms.get(E, 0) + sgn
    return QExpansion.from_terms(terms, order, -1, EXACT)
