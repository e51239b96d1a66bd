"""S-transform side: Gaussian integrals h_eps and k_eps, the 1-D contour lemma,
the subset correction for Re(eps_j) > 0, and positive-region dominance data.

All integrals over R^n use a tensor-product trapezoid rule.  Its error estimate
is the difference to the same rule at twice the step (a subset of the nodes)
plus a Gaussian tail bound beyond the cutoff.
"""
from __future__ import annotations

import cmath
import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import conventions as cv
from . import kernels
from .errors import (ContourThroughPole, PoleTooClose, PreconditionError,
                     QuadratureBudgetExceeded, StokesHyperplane)
from .numeric import NumericResult
from .rootsys import RootSystem
from .theta import QuadLattice, as_eps, kostant_theta_eval, partial_theta_eval, theta_B_eval, _gauss_box_sum

POLE_CLEARANCE = 0.02
QUAD_BUDGET = 20_000_000


@dataclass(frozen=True)
class QuadratureSpec:
    R: float
    h: float
    n: int
    tail_bound: float
    est_error: float = 0.0

    @property
    def nodes_per_axis(self) -> int:
        return 2 * int(round(self.R / self.h)) + 1


def choose_quadrature(decay: float, im_tau: float, n: int, tol: float, growth: float = 0.0,
                      h_max: float = 0.1) -> QuadratureSpec:
    """Cutoff R with exp(-pi Im(tau) decay R^2 + growth R) < tol/10; step at most h_max."""
    a = math.pi * im_tau * decay
    target = math.log(10.0 / tol)
    R = (growth + math.sqrt(growth * growth + 4 * a * target)) / (2 * a)
    R = max(R, 1.0)
    # even number of steps per half-axis so the coarse grid keeps the origin
    steps = 2 * int(math.ceil(R / h_max / 2))
    h = R / steps
    tail = math.exp(-a * R * R + growth * R)
    return QuadratureSpec(R, h, n, tail)


def _trapezoid(spec: QuadratureSpec, Q, lin, const, rows, offs, budget: int = QUAD_BUDGET):
    m = spec.nodes_per_axis
    if m ** spec.n > budget:
        raise QuadratureBudgetExceeded(f"{m}^{spec.n} nodes exceeds budget {budget}")
    half = (m - 1) // 2
    nodes = spec.h * np.arange(-half, half + 1)
    fine = kernels.grid_sum(nodes, Q, lin, const, rows, offs) * spec.h ** spec.n
    coarse = kernels.grid_sum(nodes[::2], Q, lin, const, rows, offs) * (2 * spec.h) ** spec.n
    return complex(fine), abs(fine - coarse)


def _step_cap(u, eps, clearance):
    return min(1.0 / (8.0 * (1.0 + float(np.linalg.norm(u)) + float(np.max(np.abs(eps))))),
               0.25 * clearance)


# --------------------------------------------------------------------------
# Gauss integral closed form
# --------------------------------------------------------------------------


def gauss_closed_form(M, b) -> complex:
    """sqrt((2 pi)^n / det M) exp((b, M^{-1} b)/2)."""
    M = np.asarray(M, dtype=float)
    b = np.asarray(b, dtype=complex)
    n = M.shape[0]
    return complex(math.sqrt((2 * math.pi) ** n / np.linalg.det(M)) * np.exp(0.5 * b @ np.linalg.solve(M, b)))


def gauss_integral_check(M, b, tol: float = 1e-10) -> tuple[complex, complex, float]:
    """Quadrature of exp(-(w,Mw)/2 + (b,w)) over R^n against the closed form (n <= 3)."""
    M = np.asarray(M, dtype=float)
    b = np.asarray(b, dtype=complex)
    n = M.shape[0]
    if n > 3:
        raise PreconditionError("numeric Gauss check limited to n <= 3")
    lam = float(np.linalg.eigvalsh(M).min())
    if lam <= 0:
        raise PreconditionError("M must be positive definite")
    # centre of the Gaussian in the real directions
    c = np.linalg.solve(M, b.real)
    spec = choose_quadrature(lam / (2 * math.pi), 1.0, n, tol, h_max=0.25 / max(1.0, math.sqrt(float(np.linalg.eigvalsh(M).max()))))
    # shift w -> w + c so the grid is centred
    Q = -0.5 * M
    lin = b - M @ c
    const = complex(-0.5 * c @ M @ c + b @ c)
    num, _ = _trapezoid(spec, Q, lin, const, None, None)
    closed = gauss_closed_form(M, b)
    return num, closed, abs(num - closed)


# --------------------------------------------------------------------------
# h_eps and k_eps
# --------------------------------------------------------------------------


def _h_raw(L: QuadLattice, u, eps, tau, tol, clearance=POLE_CLEARANCE, shift=None,
           budget=QUAD_BUDGET):
    """integral over R^n + shift of q^{(w,A^{-1}w)/2} e^{-2 pi i (u,w)} / prod sin(pi(w_j - i eps_j))."""
    n = L.n
    u = np.asarray(u, dtype=complex)
    e = as_eps(eps).eps
    tau = complex(tau)
    if tau.imag <= 0:
        raise PreconditionError("Im(tau) must be positive")
    Ainv = np.linalg.inv(L.Af)
    c = np.zeros(n, dtype=complex) if shift is None else np.asarray(shift, dtype=complex)
    # distance of the poles w_j = m + i eps_j - c_j from the real integration axis
    dist = np.abs(e.real - c.imag)
    if dist.min() < clearance:
        raise PoleTooClose(f"pole within {dist.min():.3g} of the contour (clearance {clearance})")
    decay = float(np.linalg.eigvalsh(Ainv).min())
    growth = 2 * math.pi * (float(np.linalg.norm(u.imag)) + abs(tau) * float(np.linalg.norm(Ainv @ c)))
    spec = choose_quadrature(decay, tau.imag, n, tol, growth, h_max=_step_cap(u, e, dist.min()))
    Q = 1j * math.pi * tau * Ainv
    lin = 2j * math.pi * tau * (Ainv @ c) + cv.H_PHASE_SIGN * 2j * math.pi * u
    const = 1j * math.pi * tau * (c @ Ainv @ c) + cv.H_PHASE_SIGN * 2j * math.pi * (u @ c)
    rows = np.eye(n)
    offs = c - 1j * e
    val, err = _trapezoid(spec, Q, lin, const, rows, offs, budget)
    return val, err + spec.tail_bound * _sine_bound(dist.min(), n), spec


def _sine_bound(d, count):
    return 1.0 / max(math.sinh(math.pi * d), 1e-300) ** count


def h_prefactor(L: QuadLattice, u, tau) -> complex:
    u = np.asarray(u, dtype=complex)
    return cv.gauss_prefactor(complex(u @ L.Af @ u), tau, L.n, float(L.det)) * cv.H_PREFACTOR_BASE ** (-L.n)


def h_integral(L: QuadLattice, u, eps, tau, tol: float = 1e-9, *, clearance: float = POLE_CLEARANCE,
               budget: int = QUAD_BUDGET) -> NumericResult:
    """h_eps(u, tau) = C (-2i)^{-n} int_{R^n} q^{(w,A^{-1}w)/2} e^{-2 pi i (u,w)} / prod_j sin(pi(w_j - i eps_j)) dw."""
    if L.n > 3 and budget == QUAD_BUDGET:
        raise QuadratureBudgetExceeded("h_integral limited to n <= 3 under the default budget")
    val, err, spec = _h_raw(L, u, eps, tau, tol, clearance, budget=budget)
    pref = h_prefactor(L, u, tau)
    return NumericResult(pref * val, abs(pref) * err, {"R": spec.R, "h": spec.h})


def h_integral_shifted(L: QuadLattice, u, eps, tau, shift, tol: float = 1e-9,
                       clearance: float = POLE_CLEARANCE) -> NumericResult:
    """The h_eps integral taken over R^n + shift instead of R^n (same prefactor)."""
    val, err, spec = _h_raw(L, u, eps, tau, tol, clearance, shift=shift)
    pref = h_prefactor(L, u, tau)
    return NumericResult(pref * val, abs(pref) * err, {"R": spec.R, "h": spec.h})


def rho_linear(rs: RootSystem, v) -> complex:
    """rho_v = (1/2) sum_{alpha>0} (alpha, v)."""
    v = np.asarray(v, dtype=complex)
    return complex(0.5 * np.sum(rs.positive_roots @ v))


def k_integral(rs: RootSystem, p: int, u, eps, tau, tol: float = 1e-8, *, clearance: float = POLE_CLEARANCE,
               budget: int = QUAD_BUDGET) -> NumericResult:
    """k_eps(u, tau), the Gaussian integral against the inverted Weyl denominator at z = w + i eps."""
    if int(p) < 2:
        raise PreconditionError("p must be at least 2")
    L = QuadLattice.from_root_system(rs, p)
    n = L.n
    E = as_eps(eps, rs)
    e = E.eps
    if E.stokes_clearance < clearance:
        raise StokesHyperplane(f"(alpha, Re eps) clearance {E.stokes_clearance:.3g} below {clearance}")
    u = np.asarray(u, dtype=complex)
    tau = complex(tau)
    if tau.imag <= 0:
        raise PreconditionError("Im(tau) must be positive")
    if n > 3 and budget == QUAD_BUDGET:
        raise QuadratureBudgetExceeded("k_integral limited to n <= 3 under the default budget")
    Ainv = np.linalg.inv(L.Af)
    roots = rs.positive_roots.astype(float)
    # e^{K_DELTA_SIGN pi i (e,z)} e^{-K_DELTA_SIGN 2 pi i rho_z}: linear in z with coefficient r
    r = cv.K_DELTA_SIGN * 1j * math.pi * (np.ones(n) - roots.sum(axis=0))
    decay = float(np.linalg.eigvalsh(Ainv).min())
    growth = 2 * math.pi * float(np.linalg.norm(u.imag)) + float(np.abs(r).sum())
    spec = choose_quadrature(decay, tau.imag, n, tol, growth,
                             h_max=_step_cap(u, e, E.stokes_clearance))
    Q = 1j * math.pi * tau * Ainv
    lin = cv.K_PHASE_SIGN * 2j * math.pi * u + r
    const = complex(r @ (1j * e))
    offs = roots @ (1j * e)
    val, err = _trapezoid(spec, Q, lin, const, roots, offs, budget)
    err += spec.tail_bound * _sine_bound(E.stokes_clearance, len(roots))
    pref = cv.gauss_prefactor(complex(u @ L.Af @ u), tau, n, float(L.det)) * cv.K_PREFACTOR_BASE ** (-rs.n_pos)
    return NumericResult(pref * val, abs(pref) * err, {"R": spec.R, "h": spec.h})


# --------------------------------------------------------------------------
# S-transform checks
# --------------------------------------------------------------------------


def _s_side(u, tau):
    tau = complex(tau)
    return np.asarray(u, dtype=complex) / tau, -1.0 / tau


def _residual_dict(lhs: NumericResult, rhs: NumericResult, **extra) -> dict:
    out = {
        "lhs": lhs.value,
        "rhs": rhs.value,
        "residual": abs(lhs.value - rhs.value),
        "relative": abs(lhs.value - rhs.value) / (1.0 + abs(lhs.value)),
        "bound": lhs.error + rhs.error,
    }
    out.update(extra)
    return out


def s_check_negative(L: QuadLattice, u, eps, tau, tol: float = 1e-9) -> dict:
    """P_eps(u/tau, -1/tau) against h_eps(u, tau) for Re(eps) < 0."""
    e = as_eps(eps).eps
    if np.any(e.real >= 0):
        raise PreconditionError("all Re(eps_j) must be negative")
    us, ts = _s_side(u, tau)
    lhs = partial_theta_eval(L, us, e, ts, tol * 1e-3)
    rhs = h_integral(L, u, e, tau, tol)
    return _residual_dict(lhs, rhs)


def s_check_kostant_negative(rs: RootSystem, p: int, u, eps, tau, tol: float = 1e-8) -> dict:
    """K_eps(u/tau, -1/tau) against k_eps(u, tau) for Re(eps) < 0."""
    e = as_eps(eps).eps
    if np.any(e.real >= 0):
        raise PreconditionError("all Re(eps_j) must be negative")
    us, ts = _s_side(u, tau)
    lhs = kostant_theta_eval(rs, p, us, e, ts, tol * 1e-3)
    rhs = k_integral(rs, p, u, e, tau, tol)
    return _residual_dict(lhs, rhs)


def unregularized_partial_theta(L: QuadLattice, u, tau, tol: float = 1e-12) -> NumericResult:
    """P(u, tau) = sum over the cone of q^{(k,Ak)/2} e^{2 pi i (k,Au)}."""
    u = np.asarray(u, dtype=complex)
    lin = 2j * math.pi * (L.Af @ u)
    return _gauss_box_sum(L.Af, tau, lin, np.full(L.n, 0.5), True, tol, 0.0)


def unregularized_check(L: QuadLattice, u, eps, tau, tol: float = 1e-9) -> dict:
    """P(u/tau, -1/tau) against the integral over R^n - i eps with denominators prod sin(pi w_j)."""
    e = as_eps(eps).eps
    if np.any(e.real >= 0):
        raise PreconditionError("all Re(eps_j) must be negative")
    us, ts = _s_side(u, tau)
    lhs = unregularized_partial_theta(L, us, ts, tol * 1e-3)
    # the contour R^n - i eps with sin(pi w) equals R^n - i eps + ... with
    # sin(pi (w' - i eps)) after w = w' - i eps: evaluate on R^n - i eps directly
    # using a zero regularization in the denominator offsets
    n = L.n
    Ainv = np.linalg.inv(L.Af)
    c = -1j * e
    uu = np.asarray(u, dtype=complex)
    tau = complex(tau)
    dist = float(np.abs(e.real).min())
    decay = float(np.linalg.eigvalsh(Ainv).min())
    growth = 2 * math.pi * (float(np.linalg.norm(uu.imag)) + abs(tau) * float(np.linalg.norm(Ainv @ c)))
    spec = choose_quadrature(decay, tau.imag, n, tol, growth, h_max=_step_cap(uu, e, dist))
    Q = 1j * math.pi * tau * Ainv
    lin = 2j * math.pi * tau * (Ainv @ c) - 2j * math.pi * uu
    const = 1j * math.pi * tau * (c @ Ainv @ c) - 2j * math.pi * (uu @ c)
    val, err = _trapezoid(spec, Q, lin, const, np.eye(n), c)
    pref = h_prefactor(L, uu, tau)
    rhs = NumericResult(pref * val, abs(pref) * (err + spec.tail_bound * _sine_bound(dist, n)))
    return _residual_dict(lhs, rhs)


def imaginary_shift_check(L: QuadLattice, u, eps, tau, alpha, tol: float = 1e-9) -> dict:
    """For alpha in i R^n the contour R^n + i alpha is R^n translated; both integrals agree."""
    alpha = np.asarray(alpha, dtype=complex)
    if np.any(np.abs(alpha.real) > 0):
        raise PreconditionError("alpha must be purely imaginary")
    base = h_integral(L, u, eps, tau, tol)
    moved = h_integral_shifted(L, u, eps, tau, 1j * alpha, tol)
    return _residual_dict(base, moved)


# --------------------------------------------------------------------------
# one-dimensional contour lemma
# --------------------------------------------------------------------------


def delta_table(eps: complex, mu: complex) -> int:
    re_e, re_m = complex(eps).real, complex(mu).real
    if re_e == 0:
        raise PreconditionError("Re(eps) must be nonzero")
    if re_m == re_e:
        raise ContourThroughPole("Re(mu) = Re(eps) puts the poles on the shifted line")
    if re_e > 0:
        return 1 if re_m > re_e else 0
    return -1 if re_m < re_e else 0


def _rank1_theta_alt(eps, z, tau, tol=1e-16):
    """sum_n (-1)^n z^{n + i eps} q^{(n + i eps)^2 / 2}."""
    log_z = cmath.log(z)
    r = theta_B_eval([[1.0]], [eps], [log_z / (2j * math.pi)], tau, tol)
    return r


def contour_lemma_1d(eps: complex, mu: complex, z_arg: complex, tau: complex, R: float = 6.0,
                     h: float | None = None) -> dict:
    """Closed-contour integral of q^{x^2/2} z^x / sin(pi(x - i eps)) between R and R + i mu.

    The contour is [-R, R], the segment R -> R + i mu, the line R + i mu traversed
    backwards and the segment -R + i mu -> -R.
    """
    eps, mu, z, tau = complex(eps), complex(mu), complex(z_arg), complex(tau)
    delta = delta_table(eps, mu)
    log_z = cmath.log(z)
    gap = min(abs(eps.real), abs(eps.real - mu.real))
    if h is None:
        h = min(0.01, gap / 4)
    if gap < h:
        raise ContourThroughPole(f"pole within {gap:.3g} of the contour")

    def f(x):
        return np.exp(1j * math.pi * tau * x * x + x * log_z) / np.sin(math.pi * (x - 1j * eps))

    steps = int(math.ceil(2 * R / h))
    xs = np.linspace(-R, R, steps + 1)
    wts = np.full(xs.size, 2 * R / steps)
    wts[0] *= 0.5
    wts[-1] *= 0.5
    bottom = np.sum(wts * f(xs.astype(complex)))
    top = np.sum(wts * f(xs + 1j * mu))
    gx, gw = np.polynomial.legendre.leggauss(80)
    t = 0.5 * (gx + 1)
    gw = 0.5 * gw
    right = np.sum(gw * f(R + 1j * mu * t)) * 1j * mu
    left = -np.sum(gw * f(-R + 1j * mu * t)) * 1j * mu
    numeric = complex(bottom - top + right + left)
    th = _rank1_theta_alt(eps, z, tau)
    theta_side = 2j * th.value * delta
    return {
        "numeric": numeric,
        "theta_side": complex(theta_side),
        "theta_sum": th.value,
        "delta": delta,
        "vertical_magnitude": float(abs(right) + abs(left)),
        "residual": abs(numeric - theta_side),
    }


# --------------------------------------------------------------------------
# subset correction for Re(eps_j) > 0
# --------------------------------------------------------------------------


def _theta_B_many(B: np.ndarray, eps_v: np.ndarray, Z: np.ndarray, tau: complex, tol=1e-15):
    """theta_{B,eps}(z; tau) for each row z of Z, vectorized over a common lattice box."""
    r = B.shape[0]
    tau = complex(tau)
    lam = float(np.linalg.eigvalsh(B).min())
    ie = 1j * eps_v
    # real peak of the summand in m for each z
    base = (2j * math.pi * tau * (B @ ie)).real
    m0 = (base[None, :] - 2 * math.pi * Z.imag) @ np.linalg.inv(B).T / (2 * math.pi * tau.imag)
    width = math.sqrt(math.log(1.0 / tol) / (math.pi * tau.imag * lam)) + 2
    lo = np.floor(m0.min(axis=0) - width).astype(int)
    hi = np.ceil(m0.max(axis=0) + width).astype(int)
    axes = [np.arange(a, b + 1) for a, b in zip(lo, hi)]
    M = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, r)
    sign = np.where(M.sum(axis=1) % 2 == 0, 1.0, -1.0)
    N = M + ie[None, :]
    quad = 1j * math.pi * tau * np.einsum("ki,ij,kj->k", N, B, N)
    out = np.empty(Z.shape[0], dtype=complex)
    for s in range(0, Z.shape[0], 4096):
        ex = quad[None, :] + 2j * math.pi * (Z[s:s + 4096] @ N.T)
        out[s:s + 4096] = np.exp(ex) @ sign
    return out


def _subset_integral(L: QuadLattice, u, e, tau, v: tuple[int, ...], tol: float) -> NumericResult:
    """I^{(v)}: integral over the coordinates outside v of theta_{B^{(v)}} times the h integrand."""
    n = L.n
    Ainv = np.linalg.inv(L.Af)
    vv = list(v)
    rest = [j for j in range(n) if j not in v]
    B = Ainv[np.ix_(vv, vv)]
    if not rest:
        th = theta_B_eval(B, e[vv], -u[vv], tau, tol * 1e-3)
        return th
    d = len(rest)
    if d > 1:
        raise QuadratureBudgetExceeded("subset integrals implemented for one remaining direction")
    tau = complex(tau)
    dist = float(np.abs(e[rest].real).min())
    if dist < POLE_CLEARANCE:
        raise PoleTooClose("pole too close to the real axis")
    # the theta factor grows like the Gaussian of B^{-1}; net decay is governed by (A_rest)^{-1}
    decay = 1.0 / float(np.linalg.eigvalsh(L.Af[np.ix_(rest, rest)]).max())
    growth = 2 * math.pi * float(np.linalg.norm(u.imag)) + 2 * math.pi * float(np.abs(e).sum())
    spec = choose_quadrature(decay, tau.imag, d, tol, growth, h_max=_step_cap(u, e, dist))
    m = spec.nodes_per_axis
    half = (m - 1) // 2
    nodes = spec.h * np.arange(-half, half + 1)

    def integrate(xs, step):
        W = np.zeros((xs.size, n))
        W[:, rest[0]] = xs
        X = W @ Ainv.T  # rows: A^{-1} w
        Z = X[:, vv] * tau - u[vv][None, :]
        th = _theta_B_many(B, e[vv], Z, tau)
        g = np.exp(1j * math.pi * tau * np.einsum("pi,ij,pj->p", W, Ainv, W) - 2j * math.pi * (W @ u))
        s = np.sin(math.pi * (xs - 1j * e[rest[0]]))
        return complex(np.sum(th * g / s) * step)

    fine = integrate(nodes, spec.h)
    coarse = integrate(nodes[::2], 2 * spec.h)
    return NumericResult(fine, abs(fine - coarse) + spec.tail_bound, {"R": spec.R, "h": spec.h})


def i_correction(L: QuadLattice, u, eps, tau, tol: float = 1e-9) -> NumericResult:
    """I = sum over nonempty v of SUBSET_WEIGHT^{|v|} I^{(v)}.

    Only subsets of the directions with Re(eps_j) > 0 contribute.  The
    S-transform is P_eps(u/tau, -1/tau) = h_eps(u, tau) + C (-2i)^{-n} I.
    """
    n = L.n
    if n > 2:
        raise QuadratureBudgetExceeded("i_correction limited to n <= 2")
    e = as_eps(eps).eps
    u = np.asarray(u, dtype=complex)
    pos = [j for j in range(n) if e[j].real > 0]
    total = 0j
    err = 0.0
    parts = {}
    for size in range(1, len(pos) + 1):
        for v in itertools.combinations(pos, size):
            Iv = _subset_integral(L, u, e, tau, v, tol)
            w = cv.SUBSET_WEIGHT ** size
            total += w * Iv.value
            err += abs(w) * Iv.error
            parts[str(list(v))] = [Iv.value.real, Iv.value.imag]
    return NumericResult(total, err, {"subsets": parts})


def s_check_full(L: QuadLattice, u, eps, tau, tol: float = 1e-9) -> dict:
    """Residual of P_eps(u/tau, -1/tau) = h_eps(u, tau) + C (-2i)^{-n} I for any eps off i R^n."""
    e = as_eps(eps).eps
    us, ts = _s_side(u, tau)
    lhs = partial_theta_eval(L, us, e, ts, tol * 1e-3)
    h = h_integral(L, u, e, tau, tol)
    corr = i_correction(L, u, e, tau, tol)
    pref = h_prefactor(L, u, tau)
    rhs = NumericResult(h.value + pref * corr.value, h.error + abs(pref) * corr.error)
    return _residual_dict(lhs, rhs, h=h.value, correction=pref * corr.value)


# --------------------------------------------------------------------------
# pole orders and positive-region analysis
# --------------------------------------------------------------------------


def pole_orders_typeA(R_subset, n: int) -> list[int]:
    """m_{r_i} = min{m >= 0 : r_i + m + 1 not in R} for each r_i in the descending list R."""
    R = [int(r) for r in R_subset]
    if any(r < 1 or r > n for r in R):
        raise PreconditionError("indices must lie in 1..n")
    if any(a <= b for a, b in zip(R, R[1:])):
        raise PreconditionError("R must be strictly descending")
    Rs = set(R)
    out = []
    for r in R:
        m = 0
        while r + m + 1 in Rs:
            m += 1
        out.append(m)
    return out


@dataclass(frozen=True)
class RegionData:
    y: np.ndarray
    cell: list[tuple[int, ...]]
    k_star: tuple[int, ...]
    d_value: float
    e_values: dict = field(default_factory=dict)
    unique: bool = True
    in_N: bool = False
    cell_meets_N: bool = False
    large: list[bool] = field(default_factory=list)
    d_exceeds_e: bool = False

    @property
    def conditions_met(self) -> bool:
        return self.cell_meets_N and all(self.large) and self.unique and self.k_star in self.cell

    def to_json(self) -> dict:
        return {
            "y": [float(x) for x in self.y],
            "cell": [list(c) for c in self.cell],
            "k_star": list(self.k_star),
            "d_value": self.d_value,
            "e_values": self.e_values,
            "unique": self.unique,
            "k_star_in_N": self.in_N,
            "cell_meets_N": self.cell_meets_N,
            "large": self.large,
            "d_exceeds_e": self.d_exceeds_e,
            "conditions_met": self.conditions_met,
        }


def in_N(rs: RootSystem, p: int, k) -> bool:
    """Delta(e^{-2 pi i k/p}) != 0, i.e. no positive root has (alpha, k) divisible by p."""
    return bool(np.all((rs.positive_roots @ np.asarray(k, dtype=np.int64)) % int(p) != 0))


def large_condition(rs: RootSystem, p: int, x) -> list[bool]:
    """x_i^2 (A^{-1})_ii > (1/4) sum_{l,j} (A^{-1})_{lj}, exact in A^{-1} = (pX)^{-1}."""
    Xinv = rs.cartan_inv
    p = int(p)
    total = sum(sum(row) for row in Xinv) / p
    out = []
    for i, xi in enumerate(x):
        xi = Fraction(xi) if not isinstance(xi, float) else Fraction(xi).limit_denominator(10**12)
        out.append(bool(xi * xi * Xinv[i][i] / p > total / 4))
    return out


def region_analysis(rs: RootSystem, p: int, eps, box: int = 3) -> RegionData:
    """Cell J(y), minimizer of d, membership in N and the eq:large test for Re(eps) > 0."""
    e = np.asarray(eps, dtype=complex).ravel()
    if np.any(e.real <= 0):
        raise PreconditionError("region analysis needs Re(eps_i) > 0")
    n = rs.rank
    Ainv = np.linalg.inv(int(p) * rs.cartan.astype(float))
    y = e.imag
    centre = np.rint(-y).astype(int)
    axes = [np.arange(c - box, c + box + 1) for c in centre]
    cands = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, n)
    cands = cands[np.max(np.abs(cands + y[None, :]), axis=1) <= box]

    def d_of(k):
        z = e + 1j * k
        return float(-0.5 * (z @ Ainv @ z).real)

    ds = np.array([d_of(k) for k in cands])
    order = np.argsort(ds, kind="stable")
    best = cands[order[0]]
    unique = len(ds) < 2 or ds[order[1]] - ds[order[0]] > 1e-12 * max(1.0, abs(ds[order[0]]))
    cell = [tuple(int(c) for c in m) for m in cands if np.all(np.abs(m + y) < 0.5)]
    k_star = tuple(int(c) for c in best)
    z = e + 1j * best
    e_vals = {}
    for size in range(1, n):
        for sub in itertools.combinations(range(n), size):
            Bm = np.zeros_like(Ainv)
            idx = list(sub)
            Bm[np.ix_(idx, idx)] = Ainv[np.ix_(idx, idx)]
            e_vals[",".join(str(i + 1) for i in sub)] = float(0.5 * (z @ Bm @ z).real)
    dval = float(ds[order[0]])
    return RegionData(
        y=y,
        cell=cell,
        k_star=k_star,
        d_value=dval,
        e_values=e_vals,
        unique=bool(unique),
        in_N=in_N(rs, p, k_star),
        cell_meets_N=any(in_N(rs, p, m) for m in cell),
        large=large_condition(rs, p, [float(x) for x in e.real]),
        d_exceeds_e=all(dval > ev for ev in e_vals.values()),
    )
