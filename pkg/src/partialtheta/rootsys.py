"""ADE root data, Weyl groups, Kostant partition function, Weyl characters.

Vectors live in the simple-root basis ("alpha coordinates").  Two pairings are
in use throughout the package:

* ``(u, v)``: the plain coordinate dot product;
* ``<u, v> = (u, X v)``: the invariant form of the root lattice, with ``X`` the
  Cartan (= Gram) matrix.
"""
from __future__ import annotations

import threading
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import numpy as np

from . import kernels
from .errors import GroupTooLarge, PreconditionError, SingularEvaluationFailed, UnsupportedType
from .numeric import richardson

WEYL_GROUP_CAP = 10**6
SINGULAR_THRESHOLD = 1e-9

# Bourbaki numbering; node 2 hangs off node 4.
_E_EDGES = {
    6: [(1, 3), (3, 4), (4, 5), (5, 6), (2, 4)],
    7: [(1, 3), (3, 4), (4, 5), (5, 6), (6, 7), (2, 4)],
    8: [(1, 3), (3, 4), (4, 5), (5, 6), (6, 7), (7, 8), (2, 4)],
}


def _cartan(family: str, rank: int) -> np.ndarray:
    if family == "A" and rank >= 1:
        edges = [(i, i + 1) for i in range(1, rank)]
    elif family == "D" and rank >= 4:
        edges = [(i, i + 1) for i in range(1, rank - 1)] + [(rank - 2, rank)]
    elif family == "E" and rank in _E_EDGES:
        edges = _E_EDGES[rank]
    else:
        raise UnsupportedType(f"no simply-laced root system {family}{rank}")
    X = 2 * np.eye(rank, dtype=np.int64)
    for a, b in edges:
        X[a - 1, b - 1] = X[b - 1, a - 1] = -1
    return X


def exact_inverse(M) -> list[list[Fraction]]:
    """Inverse of an integer/rational matrix by Gauss-Jordan over the rationals."""
    n = len(M)
    a = [[Fraction(M[i][j]) for j in range(n)] + [Fraction(int(i == j)) for j in range(n)]
         for i in range(n)]
    for c in range(n):
        piv = next(r for r in range(c, n) if a[r][c] != 0)
        a[c], a[piv] = a[piv], a[c]
        inv = 1 / a[c][c]
        a[c] = [x * inv for x in a[c]]
        for r in range(n):
            if r != c and a[r][c] != 0:
                f = a[r][c]
                a[r] = [x - f * y for x, y in zip(a[r], a[c])]
    return [row[n:] for row in a]


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class WeylElement:
    matrix: np.ndarray
    length: int
    sign: int


@dataclass(frozen=True, eq=False)
class RootSystem:
    family: str
    rank: int
    cartan: np.ndarray
    positive_roots: np.ndarray
    rho_alpha: tuple[Fraction, ...]
    fund_weights_alpha: tuple[tuple[Fraction, ...], ...]
    cartan_inv: tuple[tuple[Fraction, ...], ...] = field(repr=False)

    @property
    def label(self) -> str:
        return f"{self.family}{self.rank}"

    @property
    def n_pos(self) -> int:
        return len(self.positive_roots)

    @property
    def rho(self) -> np.ndarray:
        return np.array([float(x) for x in self.rho_alpha])

    @property
    def cartan_inv_float(self) -> np.ndarray:
        return np.array([[float(x) for x in row] for row in self.cartan_inv])

    def fundamental_weight(self, i: int) -> tuple[Fraction, ...]:
        """alpha coordinates of omega_i (1-based index)."""
        return self.fund_weights_alpha[i - 1]

    def weight_from_omega(self, coeffs: Sequence[int | Fraction]) -> tuple[Fraction, ...]:
        """alpha coordinates of sum_i coeffs_i omega_i, i.e. X^{-1} coeffs."""
        return tuple(sum((Fraction(c) * self.cartan_inv[i][j] for j, c in enumerate(coeffs)),
                         Fraction(0)) for i in range(self.rank))

    def form(self, u, v):
        """Invariant form <u, v> = (u, X v); exact when the inputs are rational."""
        X = self.cartan
        return sum(u[i] * int(X[i, j]) * v[j] for i in range(self.rank) for j in range(self.rank))

    def __repr__(self) -> str:
        return f"RootSystem({self.label})"


def _positive_roots(X: np.ndarray) -> np.ndarray:
    n = X.shape[0]
    simple = [tuple(int(i == j) for j in range(n)) for i in range(n)]
    found = set(simple)
    frontier = list(simple)
    while frontier:
        new = []
        for beta in frontier:
            b = np.array(beta)
            pairing = X @ b
            for i in range(n):
                img = b.copy()
                img[i] -= pairing[i]
                t = tuple(int(c) for c in img)
                if all(c >= 0 for c in t) and any(t) and t not in found:
                    found.add(t)
                    new.append(t)
        frontier = new
    return np.array(sorted(found, key=lambda r: (sum(r), tuple(-c for c in r))), dtype=np.int64)


@lru_cache(maxsize=None)
def build_root_system(family: str, rank: int) -> RootSystem:
    family = family.upper()
    X = _cartan(family, int(rank))
    Xinv = exact_inverse(X.tolist())
    n = X.shape[0]
    fund = tuple(tuple(Xinv[i][j] for i in range(n)) for j in range(n))
    rho = tuple(sum(Xinv[i], Fraction(0)) for i in range(n))
    return RootSystem(
        family=family,
        rank=n,
        cartan=_frozen(X),
        positive_roots=_frozen(_positive_roots(X)),
        rho_alpha=rho,
        fund_weights_alpha=fund,
        cartan_inv=tuple(tuple(r) for r in Xinv),
    )


def parse_type(label: str) -> RootSystem:
    """``"A2"`` -> build_root_system("A", 2)."""
    label = label.strip().upper()
    if len(label) < 2 or not label[1:].isdigit():
        raise UnsupportedType(f"cannot parse root system type {label!r}")
    return build_root_system(label[0], int(label[1:]))


def simple_reflection(rs: RootSystem, i: int) -> np.ndarray:
    """Matrix of s_i on alpha coordinates (0-based i): v -> v - <v, alpha_i> e_i."""
    S = np.eye(rs.rank, dtype=np.int64)
    S[i, :] -= rs.cartan[i, :]
    return S


_weyl_lock = threading.Lock()
_weyl_cache: dict[tuple[str, int], list[WeylElement]] = {}


def weyl_group(rs: RootSystem, cap: int = WEYL_GROUP_CAP) -> list[WeylElement]:
    """Breadth-first enumeration of W by left multiplication with simple reflections."""
    key = (rs.family, rs.rank)
    with _weyl_lock:
        if key in _weyl_cache:
            W = _weyl_cache[key]
            if len(W) > cap:
                raise GroupTooLarge(f"|W({rs.label})| exceeds cap {cap}")
            return W
    gens = [simple_reflection(rs, i) for i in range(rs.rank)]
    ident = np.eye(rs.rank, dtype=np.int64)
    seen = {ident.tobytes()}
    out = [WeylElement(_frozen(ident), 0, 1)]
    frontier = [ident]
    depth = 0
    while frontier:
        depth += 1
        new = []
        for w in frontier:
            for s in gens:
                m = s @ w
                b = m.tobytes()
                if b not in seen:
                    seen.add(b)
                    if len(seen) > cap:
                        raise GroupTooLarge(f"|W({rs.label})| exceeds cap {cap}")
                    new.append(m)
                    out.append(WeylElement(_frozen(m), depth, -1 if depth % 2 else 1))
        frontier = new
    with _weyl_lock:
        _weyl_cache[key] = out
    return out


@lru_cache(maxsize=None)
def _weyl_arrays(family: str, rank: int):
    W = weyl_group(build_root_system(family, rank))
    mats = np.stack([w.matrix for w in W]).astype(float)
    signs = np.array([w.sign for w in W], dtype=float)
    return mats, signs


# --------------------------------------------------------------------------
# Kostant partition function
# --------------------------------------------------------------------------

_kp_lock = threading.Lock()
_kp_cache: dict[tuple[str, int], np.ndarray] = {}


def kostant_partition(rs: RootSystem, beta: Sequence[int]) -> int:
    """Number of ways to write beta as a nonnegative integer combination of positive roots."""
    beta = tuple(int(b) for b in beta)
    if len(beta) != rs.rank:
        raise PreconditionError("beta has wrong length")
    if any(b < 0 for b in beta):
        raise PreconditionError("kostant_partition needs nonnegative coordinates")
    key = (rs.family, rs.rank)
    with _kp_lock:
        tab = _kp_cache.get(key)
        if tab is None or any(b >= d for b, d in zip(beta, tab.shape)):
            old = tab.shape if tab is not None else (1,) * rs.rank
            dims = [max(b + 1, d) for b, d in zip(beta, old)]
            tab = kernels.kostant_table(dims, rs.positive_roots, exact=True)
            _kp_cache[key] = tab
        return int(tab[beta])


def kostant_weights(rs: RootSystem, dims: Sequence[int]) -> np.ndarray:
    """Float table of K(beta) on the box 0 <= beta_i < dims_i (for theta sums)."""
    return kernels.kostant_table(dims, rs.positive_roots)


# --------------------------------------------------------------------------
# Weyl numerators and characters
# --------------------------------------------------------------------------


def _as_vec(x) -> np.ndarray:
    return np.asarray([complex(c) for c in x], dtype=complex)


def weyl_numerator(rs: RootSystem, lam, x) -> complex:
    """num_lam(x) = sum_w (-1)^l(w) exp(2 pi i (w(lam + rho), x)), plain pairing."""
    mats, signs = _weyl_arrays(rs.family, rs.rank)
    shifted = np.array([float(a) + float(r) for a, r in zip(lam, rs.rho_alpha)])
    orbit = mats @ shifted
    return complex(np.sum(signs * np.exp(2j * np.pi * (orbit @ _as_vec(x)))))


def weyl_denominator_product(rs: RootSystem, x) -> complex:
    """prod_{alpha > 0} (e^{pi i (alpha, x)} - e^{-pi i (alpha, x)})."""
    ax = rs.positive_roots @ _as_vec(x)
    return complex(np.prod(2j * np.sin(np.pi * ax)))


def weyl_dimension(rs: RootSystem, lam) -> Fraction:
    lr = [Fraction(a) + r for a, r in zip(lam, rs.rho_alpha)]
    out = Fraction(1)
    for alpha in rs.positive_roots:
        a = [int(c) for c in alpha]
        out *= rs.form(lr, a) / rs.form(list(rs.rho_alpha), a)
    return out


def weyl_character(rs: RootSystem, lam, x, *, seed: int = 12345, rtol: float = 1e-8) -> complex:
    """chi_lam(x) = num_lam(x) / num_0(x), with a limit path near singular x."""
    xv = _as_vec(x)
    if not np.any(xv):
        return complex(float(weyl_dimension(rs, lam)))
    den = weyl_numerator(rs, [0] * rs.rank, xv)
    if abs(den) >= SINGULAR_THRESHOLD:
        return weyl_numerator(rs, lam, xv) / den
    rng = np.random.default_rng(seed)
    d = rng.normal(size=rs.rank)
    d /= np.linalg.norm(d)
    hs = 0.05 * 0.5 ** np.arange(7)
    vals = [weyl_numerator(rs, lam, xv + h * d) / weyl_numerator(rs, [0] * rs.rank, xv + h * d)
            for h in hs]
    diag = richardson(hs, vals)
    est, prev = diag[-1], diag[-2]
    if abs(est - prev) > rtol * max(1.0, abs(est)) * 1e3:
        raise SingularEvaluationFailed(f"extrapolation unstable: {est} vs {prev}")
    return complex(est)
