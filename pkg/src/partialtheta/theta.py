"""Regularized partial theta P_eps, Kostant theta K_eps and the rank-r theta_{B,eps}.

Numeric evaluation sums the lattice directly over a box centred on the
Gaussian peak; the box radius is grown until an envelope bound on the
discarded terms is below tolerance.  Exact q-expansions enumerate all lattice
points below the cap.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import kernels
from .errors import NonConvergent, PreconditionError
from .numeric import NumericResult
from .qseries import EXACT, NUMERIC, QExpansion
from .rootsys import RootSystem, kostant_partition, kostant_weights

MAX_BOX_POINTS = 40_000_000
_EPS = np.finfo(float).eps


@dataclass(frozen=True, eq=False)
class RegEps:
    """Regularization vector eps, paired with lattice vectors by the plain dot product."""

    eps: np.ndarray
    rs: RootSystem | None = None

    def __post_init__(self):
        e = np.array(self.eps, dtype=complex).ravel()
        if np.any(e.real == 0):
            raise PreconditionError("every component of eps needs a nonzero real part")
        e.setflags(write=False)
        object.__setattr__(self, "eps", e)

    @property
    def n(self) -> int:
        return self.eps.size

    @property
    def re_signs(self) -> np.ndarray:
        return np.sign(self.eps.real).astype(int)

    @property
    def stokes_clearance(self) -> float | None:
        if self.rs is None:
            return None
        return float(np.min(np.abs(self.rs.positive_roots @ self.eps.real)))

    def attach(self, rs: RootSystem) -> "RegEps":
        return RegEps(self.eps, rs)


def as_eps(eps, rs: RootSystem | None = None) -> RegEps:
    if isinstance(eps, RegEps):
        return eps if rs is None else eps.attach(rs)
    return RegEps(np.asarray(eps, dtype=complex), rs)


def _leading_minors_positive(A: np.ndarray) -> bool:
    return all(np.linalg.det(A[:k, :k]) > 0.5 for k in range(1, A.shape[0] + 1))


@dataclass(frozen=True, eq=False)
class QuadLattice:
    """Integral symmetric positive-definite Gram matrix A (optionally A = pX)."""

    A: np.ndarray
    p: int | None = None
    rs: RootSystem | None = None

    def __post_init__(self):
        A = np.array(self.A, dtype=np.int64)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise PreconditionError("A must be square")
        if not np.array_equal(A, A.T):
            raise PreconditionError("A must be symmetric")
        if not _leading_minors_positive(A.astype(float)):
            raise PreconditionError("A must be positive definite")
        A.setflags(write=False)
        object.__setattr__(self, "A", A)

    @classmethod
    def from_root_system(cls, rs: RootSystem, p: int) -> "QuadLattice":
        if int(p) < 1:
            raise PreconditionError("p must be a positive integer")
        return cls(int(p) * rs.cartan, int(p), rs)

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def Af(self) -> np.ndarray:
        return self.A.astype(float)

    @property
    def det(self) -> int:
        return int(round(np.linalg.det(self.Af)))


# --------------------------------------------------------------------------
# box summation with Gaussian envelope
# --------------------------------------------------------------------------


def _tail_envelope(a: float, n: int, R: int, poly) -> float:
    """Bound for sum over integer shells r > R of shell_count * poly(r) * exp(-a (r - 1/2)^2)."""
    total = 0.0
    r = R + 1
    while True:
        d = max(r - 0.5, 0.0)
        t = 2 * n * (2 * r + 1) ** (n - 1) * poly(r) * math.exp(-a * d * d)
        total += t
        if d > 1.0 and t < 1e-18 * max(total, 1e-300) and a * d > 1.0:
            break
        if r > R + 100000:
            break
        r += 1
    return total


def _gauss_box_sum(M: np.ndarray, tau: complex, lin: np.ndarray, offset: np.ndarray, cone: bool,
                   tol: float, shift, alternating: bool = False, weight_fn=None, weight_poly=None,
                   max_points: int = MAX_BOX_POINTS):
    """Sum of exp(pi i tau (x,Mx) + (lin,x)) over x in Z^n + offset (cone: x - offset >= 0)."""
    n = M.shape[0]
    tau = complex(tau)
    if tau.imag <= 0:
        raise PreconditionError("Im(tau) must be positive")
    Mf = np.asarray(M, dtype=float)
    lam_min = float(np.linalg.eigvalsh(Mf).min())
    if lam_min <= 0:
        raise NonConvergent("quadratic form is not positive definite")
    a = math.pi * tau.imag * lam_min
    off = np.asarray(offset, dtype=complex)
    b = np.asarray(lin, dtype=complex)
    # exponent at x = m + off as a function of integer m
    Q = 1j * math.pi * tau * Mf
    bm = b + 2 * (Q @ off)
    cm = complex(off @ Q @ off + b @ off)
    rb = bm.real
    m0 = np.linalg.solve(Mf, rb) / (2 * math.pi * tau.imag)
    log_peak = cm.real + 0.5 * float(rb @ m0)
    if shift == "auto":
        shift = log_peak
    shift = float(shift)
    centre = np.rint(m0).astype(np.int64)
    if cone:
        centre = np.maximum(centre, 0)
    scale = math.exp(min(log_peak - shift, 700.0))
    target = tol * max(1.0, scale)
    poly = weight_poly or (lambda r: 1.0)
    R = max(2, int(math.ceil(math.sqrt(max(math.log(1.0 / max(tol, 1e-300)), 1.0) / a))))
    while True:
        tail = scale * _tail_envelope(a, n, R, poly)
        if tail <= target:
            break
        R += max(1, R // 4)
        if (2 * R + 1) ** n > 4 * max_points:
            break
    lo = centre - R
    hi = centre + R
    if cone:
        lo = np.maximum(lo, 0)
    dims = hi - lo + 1
    npts = int(np.prod(dims))
    if npts > max_points:
        raise NonConvergent(f"summation box with {npts} points exceeds cap {max_points}")
    weights = None
    if weight_fn is not None:
        weights = weight_fn(lo, hi)
    # evaluate on m (integers) with offset folded into linear/const terms
    s, s_abs = kernels.box_sum(lo, dims, np.zeros(n), Q, bm, shift=shift - cm.real,
                               weights=weights, alternating=alternating)
    s = complex(s) * complex(np.exp(1j * cm.imag))
    rmax = float(np.abs(lo).max() + dims.max())
    max_arg = math.pi * abs(tau) * float(np.abs(Mf).sum()) * rmax ** 2 + float(np.abs(bm).sum()) * rmax
    rounding = s_abs * _EPS * (16.0 + max_arg) + npts * _EPS * s_abs
    info = {"box_lo": lo.tolist(), "box_hi": hi.tolist(), "points": npts, "tail": tail,
            "shift": shift, "backend": kernels.backend()}
    return NumericResult(s, tail + rounding, info)


def _check_u(u, n):
    u = np.asarray(u, dtype=complex).ravel()
    if u.size != n:
        raise PreconditionError("u has the wrong length")
    return u


def partial_theta_eval(L: QuadLattice, u, eps, tau, tol: float = 1e-12, *, shift=0.0,
                       max_points: int = MAX_BOX_POINTS) -> NumericResult:
    """P_eps(u, tau) = sum_{k in (Z>=0 + 1/2)^n} q^{(k,Ak)/2} e^{2 pi i (k,Au)} e^{2 pi (k,eps)}.

    With ``shift`` (a float or ``"auto"``) the returned value is scaled by exp(-shift).
    """
    E = as_eps(eps)
    n = L.n
    u = _check_u(u, n)
    if E.n != n:
        raise PreconditionError("eps has the wrong length")
    lin = 2j * math.pi * (L.Af @ u) + 2 * math.pi * E.eps
    return _gauss_box_sum(L.Af, tau, lin, np.full(n, 0.5), True, tol, shift, max_points=max_points)


def kostant_theta_eval(rs: RootSystem, p: int, u, eps, tau, tol: float = 1e-12, *, shift=0.0,
                       max_points: int = MAX_BOX_POINTS) -> NumericResult:
    """K_eps(u, tau): as P_eps with A = pX and weights K(k - e/2)."""
    if int(p) < 2:
        raise PreconditionError("p must be at least 2")
    L = QuadLattice.from_root_system(rs, p)
    E = as_eps(eps)
    n = L.n
    u = _check_u(u, n)
    if E.n != n:
        raise PreconditionError("eps has the wrong length")
    lin = 2j * math.pi * (L.Af @ u) + 2 * math.pi * E.eps
    npos = rs.n_pos

    def weights(lo, hi):
        tab = kostant_weights(rs, [int(h) + 1 for h in hi])
        sl = tuple(slice(int(a), int(b) + 1) for a, b in zip(lo, hi))
        return np.ascontiguousarray(tab[sl]).ravel()

    # K(beta) <= (1 + |beta|_1)^{|Delta+|}; |beta|_1 on shell r is bounded crudely
    c_inf = 0.0

    def poly(r):
        return (1.0 + n * (c_inf + r + 1)) ** npos

    # centre is needed for the polynomial bound; estimate it as in _gauss_box_sum
    tau_c = complex(tau)
    if tau_c.imag > 0:
        Q = 1j * math.pi * tau_c * L.Af
        rb = (lin + 2 * (Q @ np.full(n, 0.5))).real
        m0 = np.linalg.solve(L.Af, rb) / (2 * math.pi * tau_c.imag)
        c_inf = float(np.abs(np.maximum(np.rint(m0), 0)).max())
    return _gauss_box_sum(L.Af, tau, lin, np.full(n, 0.5), True, tol, shift,
                          weight_fn=weights, weight_poly=poly, max_points=max_points)


def theta_B_eval(B, eps_r, u_r, tau, tol: float = 1e-12, *, shift=0.0,
                 max_points: int = MAX_BOX_POINTS) -> NumericResult:
    """theta_{B,eps}(u; tau) = sum_{n in Z^r + i eps} (-1)^{(n - i eps, e)} q^{(n,Bn)/2} e^{2 pi i (u,n)}."""
    Bf = np.array([[float(Fraction(x)) if not isinstance(x, float) else x for x in row]
                   for row in np.atleast_2d(np.asarray(B, dtype=object))], dtype=float)
    r = Bf.shape[0]
    if not np.allclose(Bf, Bf.T):
        raise PreconditionError("B must be symmetric")
    if np.linalg.eigvalsh(Bf).min() <= 0:
        raise NonConvergent("B is not positive definite")
    e = np.asarray(eps_r, dtype=complex).ravel()
    u = _check_u(u_r, r)
    if e.size != r:
        raise PreconditionError("eps has the wrong length")
    lin = 2j * math.pi * u
    return _gauss_box_sum(Bf, tau, lin, 1j * e, False, tol, shift,
                          alternating=True, max_points=max_points)


# --------------------------------------------------------------------------
# exact specializations u = v tau
# --------------------------------------------------------------------------


def _series_points(Af: np.ndarray, w: np.ndarray, cap: float):
    """Integer j >= 0 with (k,Ak)/2 + (k,w) <= cap for k = j + e/2, as an array.

    The condition is the ellipsoid |R (k + c)|^2 <= 2 cap + (c,Ac) with c = A^{-1} w
    and A = R^T R; coordinates are fixed from the last one down so that only
    points inside the ellipsoid (and the cone) are ever generated.
    """
    n = Af.shape[0]
    c = np.linalg.solve(Af, w)
    r2 = 2.0 * cap + float(c @ Af @ c) + 1e-9
    if r2 < 0:
        return np.zeros((0, n), dtype=np.int64)
    R = np.linalg.cholesky(Af).T
    off = 0.5 + c  # y = j + off
    tails = np.zeros((1, 0), dtype=np.int64)
    used = np.zeros(1)
    for m in range(n - 1, -1, -1):
        y_tail = tails + off[m + 1:]
        s = y_tail @ R[m, m + 1:] if m + 1 < n else np.zeros(len(tails))
        rem = np.maximum(r2 - used, 0.0)
        root = np.sqrt(rem)
        lo = np.ceil((-s - root) / R[m, m] - off[m] - 1e-12).astype(np.int64)
        hi = np.floor((-s + root) / R[m, m] - off[m] + 1e-12).astype(np.int64)
        lo = np.maximum(lo, 0)
        cnt = np.maximum(hi - lo + 1, 0)
        if cnt.sum() == 0:
            return np.zeros((0, n), dtype=np.int64)
        idx = np.repeat(np.arange(len(tails)), cnt)
        start = np.repeat(lo, cnt)
        jm = start + (np.arange(cnt.sum()) - np.repeat(np.cumsum(cnt) - cnt, cnt))
        val = R[m, m] * (jm + off[m]) + s[idx]
        used = used[idx] + val * val
        tails = np.column_stack([jm, tails[idx]])
        keep = used <= r2
        tails, used = tails[keep], used[keep]
    return tails


def _frac_vec(v, n):
    if v is None:
        return [Fraction(0)] * n
    v = [Fraction(x) for x in v]
    if len(v) != n:
        raise PreconditionError("v has the wrong length")
    return v


def _theta_series(A: np.ndarray, v, eps, cap, weight=None) -> QExpansion:
    n = A.shape[0]
    v = _frac_vec(v, n)
    cap = Fraction(cap)
    Ai = [[int(x) for x in row] for row in A]
    Av = [sum(Ai[i][j] * v[j] for j in range(n)) for i in range(n)]
    exact = eps is None or not np.any(np.asarray(eps, dtype=complex))
    mode = EXACT if exact else NUMERIC
    e = None if exact else np.asarray(eps, dtype=complex).ravel()
    pts = _series_points(A.astype(float), np.array([float(x) for x in Av]), float(cap))
    terms = {}
    half = Fraction(1, 2)
    for j in pts:
        k = [int(x) + half for x in j]
        ex = sum(k[i] * Ai[i][l] * k[l] for i in range(n) for l in range(n)) / 2
        ex += sum(k[i] * Av[i] for i in range(n))
        if ex > cap:
            continue
        c = 1 if weight is None else weight(tuple(int(x) for x in j))
        if c == 0:
            continue
        if not exact:
            c = c * complex(np.exp(2 * math.pi * np.dot([float(x) for x in k], e)))
        terms[ex] = terms.get(ex, 0) + c
    return QExpansion.from_terms(terms, cap, 0, mode)


def partial_theta_series(L: QuadLattice, v, eps=None, cap=20) -> QExpansion:
    """q-expansion of P_eps(v tau, tau): exponents (k,Ak)/2 + (Ak,v), coefficients e^{2 pi (k,eps)}.

    ``eps=None`` (or zero) gives the exact series of the unregularized function.
    """
    return _theta_series(L.A, v, eps, cap)


def kostant_theta_series(rs: RootSystem, p: int, v, eps=None, cap=20) -> QExpansion:
    """q-expansion of K_eps(v tau, tau) for A = pX, weights K(k - e/2)."""
    if int(p) < 2:
        raise PreconditionError("p must be at least 2")
    return _theta_series(int(p) * rs.cartan, v, eps, cap, weight=lambda b: kostant_partition(rs, b))


# --------------------------------------------------------------------------
# elliptic translations
# --------------------------------------------------------------------------


def elliptic_prefactor(L: QuadLattice, u, eps, tau, m, ell) -> complex:
    """e^{pi i (e,A l)} q^{-(m,Am)/2} e^{-2 pi i (m,Au)} e^{-2 pi (m,eps)}."""
    A = L.Af
    u = _check_u(u, L.n)
    e = as_eps(eps).eps
    m = np.asarray(m, dtype=float)
    ell = np.asarray(ell, dtype=float)
    tau = complex(tau)
    expo = (1j * math.pi * np.sum(A @ ell) - 1j * math.pi * tau * (m @ A @ m)
            - 2j * math.pi * (m @ A @ u) - 2 * math.pi * (m @ e))
    return complex(np.exp(expo))


def shifted_cone_sum(L: QuadLattice, u, eps, tau, m, tol: float = 1e-13) -> NumericResult:
    """Sum of the P_eps(u) summand over the translated cone k - m in (Z>=0 + 1/2)^n.

    Translating u by m tau moves the summation cone by m, so the quasi-periodicity
    in the tau direction relates P_eps(u + m tau) to this sum rather than to
    P_eps(u) itself; the two differ by finitely many lower-rank boundary slabs.
    """
    E = as_eps(eps)
    n = L.n
    u = _check_u(u, n)
    m = np.asarray(m, dtype=np.int64)
    lin = 2j * math.pi * (L.Af @ u) + 2 * math.pi * E.eps

    def weights(lo, hi):
        axes = [np.arange(int(a), int(b) + 1) for a, b in zip(lo, hi)]
        J = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, n)
        return np.all(J - m >= 0, axis=1).astype(float)

    return _gauss_box_sum(L.Af, tau, lin, np.full(n, 0.5), False, tol, 0.0, weight_fn=weights)


def elliptic_law_check(L: QuadLattice, u, eps, tau, m, ell, tol: float = 1e-13) -> dict:
    """Compare P_eps(u + m tau + l) with prefactor * shifted_cone_sum(u, m).

    ``residual_without_boundary`` compares against prefactor * P_eps(u), i.e. the
    law with the cone translation ignored; it vanishes only for m = 0.
    """
    u = _check_u(u, L.n)
    tau = complex(tau)
    shifted = u + np.asarray(m) * tau + np.asarray(ell)
    lhs = partial_theta_eval(L, shifted, eps, tau, tol)
    cone = shifted_cone_sum(L, u, eps, tau, m, tol)
    base = partial_theta_eval(L, u, eps, tau, tol)
    pref = elliptic_prefactor(L, u, eps, tau, m, ell)
    scale = 1.0 + abs(lhs.value)
    return {
        "lhs": lhs.value,
        "rhs": pref * cone.value,
        "residual": abs(lhs.value - pref * cone.value) / scale,
        "residual_without_boundary": abs(lhs.value - pref * base.value) / scale,
        "bound": (lhs.error + abs(pref) * cone.error) / scale,
    }
