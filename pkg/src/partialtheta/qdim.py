"""Regularized quantum dimensions.

qdim[M]^eps is the limit of ch[M]^eps(it) / ch[W^0(p,0)]^eps(it) as t -> 0+.
The eta^{-n} factors cancel, so the numeric path evaluates the two eta^n ch
sums directly in log-scaled form and extrapolates in t.  Closed forms cover
Re(eps) < 0, the positive region (under the cell conditions) and eps = 0.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .chars import WeightDecomposition, _as_decomposition, _v_vector, alpha0_rho
from .errors import NoConvergence, PreconditionError, QuadratureBudgetExceeded, SineSingularity
from .modular import QUAD_BUDGET, choose_quadrature, region_analysis
from .numeric import NumericResult, richardson
from .rootsys import RootSystem, weyl_character, weyl_dimension, weyl_group
from .theta import RegEps, as_eps, kostant_theta_eval

DEFAULT_T = tuple(0.2 * 0.5 ** j for j in range(7))
REGIONS = ("neg", "pos", "eps0")
SINE_ZERO = 1e-12


def _region_of(eps: np.ndarray) -> str:
    if np.all(eps.real < 0):
        return "neg"
    if np.all(eps.real > 0):
        return "pos"
    return "mixed"


@dataclass(frozen=True)
class QdimRequest:
    """Module label, regularization and the limit path tau = i t."""

    kind: str
    label: tuple
    eps: RegEps | None
    region: str
    t_sequence: tuple = DEFAULT_T

    def __post_init__(self):
        if self.kind not in ("atypical", "typical"):
            raise PreconditionError(f"unknown module kind {self.kind!r}")
        if self.region not in REGIONS:
            raise PreconditionError(f"unknown region {self.region!r}")
        if self.region == "eps0":
            if self.eps is not None and np.any(self.eps.eps):
                raise PreconditionError("region eps0 needs eps = 0")
        else:
            if self.eps is None:
                raise PreconditionError("eps is required outside the eps0 region")
            if _region_of(self.eps.eps) != self.region:
                raise PreconditionError("region does not match the sign pattern of Re(eps)")
        ts = [float(t) for t in self.t_sequence]
        if not ts or any(t <= 0 for t in ts) or any(b >= a for a, b in zip(ts, ts[1:])):
            raise PreconditionError("t_sequence must be positive and strictly decreasing")

    @classmethod
    def make(cls, kind, label, eps, region=None, t_sequence=DEFAULT_T) -> "QdimRequest":
        if eps is None or not np.any(np.asarray(eps, dtype=complex)):
            return cls(kind, tuple(label), None, region or "eps0", tuple(t_sequence))
        E = as_eps(eps)
        return cls(kind, tuple(label), E, region or _region_of(E.eps), tuple(t_sequence))


@dataclass(frozen=True)
class ConditionsUnmet:
    """The positive-region closed form does not apply; flags say which condition failed."""

    flags: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"conditions_met": False, **self.flags}


# --------------------------------------------------------------------------
# direct evaluation of eta^n ch at tau = i t, in log-scaled form
# --------------------------------------------------------------------------


def _logsum(parts):
    """Combine (log_scale, value, error) triples into one triple."""
    m = max(p[0] for p in parts)
    s = sum(v * math.exp(l - m) for l, v, _ in parts)
    err = sum(e * math.exp(l - m) for l, _, e in parts)
    return m, complex(s), err


def _eta_ch_atypical(dec: WeightDecomposition, eps: np.ndarray, t: float, tol: float):
    rs, p = dec.rs, dec.p
    tau = 1j * t
    A = p * rs.cartan.astype(float)
    sign0 = -1 if rs.n_pos % 2 else 1
    parts = []
    for w in weyl_group(rs):
        v = np.array([float(x) for x in _v_vector(dec, w)])
        r = kostant_theta_eval(rs, p, v * tau, eps, tau, tol, shift="auto")
        lp = complex(2 * math.pi * np.dot(v + 0.5, eps) + 1j * math.pi * tau * (v @ A @ v))
        val = sign0 * w.sign * complex(np.exp(1j * lp.imag)) * r.value
        parts.append((lp.real + r.info["shift"], val, r.error))
    return _logsum(parts)


def _eta_ch_typical(rs: RootSystem, p: int, lam, eps: np.ndarray, t: float):
    d = np.array([complex(x) for x in lam]) - np.array([float(s) for s in alpha0_rho(rs, p)])
    A = p * rs.cartan.astype(float)
    lp = complex(2 * math.pi * np.dot(d, eps) - math.pi * t * (d @ A @ d))
    return lp.real, complex(np.exp(1j * lp.imag)), 0.0


def qdim_ratio(rs: RootSystem, p: int, request: QdimRequest, t: float, tol: float = 1e-13) -> NumericResult:
    """ch[M]^eps(it) / ch[W^0(p,0)]^eps(it) at a single t."""
    eps = request.eps.eps
    vac = _as_decomposition(rs, p, [0] * rs.rank)
    ld, sd, ed = _eta_ch_atypical(vac, eps, t, tol)
    if request.kind == "atypical":
        ln, sn, en = _eta_ch_atypical(_as_decomposition(rs, p, request.label), eps, t, tol)
    else:
        ln, sn, en = _eta_ch_typical(rs, p, request.label, eps, t)
    if sd == 0:
        raise NoConvergence("vacuum character vanishes at this t")
    scale = math.exp(min(ln - ld, 700.0))
    val = scale * sn / sd
    err = abs(val) * (en / max(abs(sn), 1e-300) + ed / abs(sd))
    return NumericResult(val, err, {"t": t, "log_num": ln, "log_den": ld,
                                    "abs_num": abs(sn), "abs_den": abs(sd)})


def qdim_numeric(rs: RootSystem, p: int, request: QdimRequest, tol: float = 1e-13,
                 order: int = 4) -> NumericResult:
    """Ratio sequence along tau = i t with Richardson extrapolation to t = 0."""
    if request.eps is None:
        raise PreconditionError("the numeric limit needs a nonzero regularization")
    ts = [float(t) for t in request.t_sequence]
    rats = [qdim_ratio(rs, p, request, t, tol) for t in ts]
    vals = [r.value for r in rats]
    diag = richardson(ts, vals, order)
    diffs = [float(abs(b - a)) for a, b in zip(diag, diag[1:])]
    est = complex(diag[-1])
    last = diffs[-3:]
    if len(last) == 3 and last[2] > last[1] > last[0] and last[2] > 1e-6 * max(1.0, abs(est)):
        raise NoConvergence(f"successive estimates diverge: {last}")
    err = (diffs[-1] if diffs else 0.0) + rats[-1].error
    info = {
        "region": request.region,
        "t": ts,
        "ratios": vals,
        "extrapolants": [complex(x) for x in diag],
        "successive_differences": last,
        "ratio_at_smallest_t": vals[-1],
        "abs_num_smallest_t": rats[-1].info["abs_num"] * math.exp(
            min(rats[-1].info["log_num"] - rats[-1].info["log_den"], 700.0)),
    }
    return NumericResult(est, err, info)


# --------------------------------------------------------------------------
# closed forms
# --------------------------------------------------------------------------


def _check_neg(eps) -> np.ndarray:
    e = np.asarray(eps, dtype=complex).ravel()
    if not np.all(e.real < 0):
        raise PreconditionError("closed form needs Re(eps_i) < 0 for all i")
    return e


def qdim_atypical_closed(rs: RootSystem, p: int, mu, eps) -> complex:
    """e^{-2 pi (gamma', eps)} chi_kappa(-i eps / p) for Re(eps) < 0.

    gamma' = gamma + lambda_hat and kappa = -sqrt(p) lambda_bar, both in
    alpha coordinates.
    """
    dec = _as_decomposition(rs, p, mu)
    e = _check_neg(eps)
    if e.size != rs.rank:
        raise PreconditionError("eps has the wrong length")
    g = np.array([float(x) for x in dec.gamma_prime])
    chi = weyl_character(rs, list(dec.kappa), -1j * e / int(p))
    return complex(np.exp(-2 * math.pi * np.dot(g, e)) * chi)


def _typical_prefactor(rs, p, lam, e):
    d = np.array([complex(x) for x in lam]) - np.array([float(s) for s in alpha0_rho(rs, p)])
    return complex(np.exp(2 * math.pi * np.dot(d, e)))


def qdim_typical_closed(rs: RootSystem, p: int, lam, eps, variant: str = "derived") -> complex:
    """Typical quantum dimension for Re(eps) < 0.

    ``variant="derived"`` is the limit of the direct ratio,
    e^{2 pi (eps, lam - alpha0 rho)} e^{-pi (e, eps)} prod sinh(pi(alpha,eps)) / sinh(pi(alpha,eps)/p),
    which tends to p^{|Delta+|} as eps -> 0.  ``variant="printed"`` is
    e^{2 pi (eps, lam - alpha0 rho)} prod sin((alpha, i eps/p)) / sin((alpha, i eps)).
    """
    e = _check_neg(eps)
    p = int(p)
    ae = rs.positive_roots.astype(float) @ e
    pref = _typical_prefactor(rs, p, lam, e)
    if variant == "derived":
        den = np.sinh(math.pi * ae / p)
        if np.any(np.abs(den) < SINE_ZERO):
            raise SineSingularity("eps lies on or next to a zero of a sinh denominator")
        return complex(pref * np.exp(-math.pi * e.sum()) * np.prod(np.sinh(math.pi * ae) / den))
    if variant == "printed":
        den = np.sin(1j * ae)
        if np.any(np.abs(den) < SINE_ZERO):
            raise SineSingularity("eps lies on or next to a zero of a sine denominator")
        return complex(pref * np.prod(np.sin(1j * ae / p) / den))
    raise PreconditionError(f"unknown variant {variant!r}")


def qdim_eps0(rs: RootSystem, p: int, kind: str, label) -> dict:
    """eps = 0 values: dim V(kappa) for atypicals; both candidate typical values."""
    p = int(p)
    if kind == "atypical":
        dec = _as_decomposition(rs, p, label)
        return {"value": float(weyl_dimension(rs, list(dec.kappa))), "kernel": "dim V(kappa)"}
    npos = rs.n_pos
    return {"value": float(p ** npos), "alternative": float(p ** -npos),
            "note": "limit of the direct ratio is p^|Delta+|; the factor-wise limit of the sine "
                    "ratio product is p^-|Delta+|"}


def qdim_positive_region(rs: RootSystem, p: int, kind: str, label, eps, variant: str = "derived"):
    """Closed form for Re(eps) > 0 when the cell conditions hold, else ConditionsUnmet.

    With k = k* the minimizer of the dual exponent, the atypical value is
    e^{2 pi i (gamma', k)} chi_kappa(-k/p) (``variant="derived"``) or
    e^{-2 pi (gamma', k)} chi_kappa(-k/p) (``variant="printed"``); typicals give 0.
    """
    e = np.asarray(eps, dtype=complex).ravel()
    reg = region_analysis(rs, p, e)
    if not reg.conditions_met:
        return ConditionsUnmet(reg.to_json())
    if kind == "typical":
        return 0j
    dec = _as_decomposition(rs, p, label)
    k = np.array(reg.k_star, dtype=float)
    g = np.array([float(x) for x in dec.gamma_prime])
    chi = weyl_character(rs, list(dec.kappa), -k / int(p))
    if variant == "derived":
        return complex(np.exp(2j * math.pi * np.dot(g, k)) * chi)
    if variant == "printed":
        return complex(np.exp(-2 * math.pi * np.dot(g, k)) * chi)
    raise PreconditionError(f"unknown variant {variant!r}")


# --------------------------------------------------------------------------
# typical S-kernel
# --------------------------------------------------------------------------


def s_kernel_typical(rs: RootSystem, p: int, lam, mu_var, eps) -> complex:
    """S^eps_{lam + alpha0 rho, mu + alpha0 rho} = e^{2 pi (eps, lam - mu)} e^{-2 pi i (lam, A^{-1} mu)}.

    lam and mu are in the basis sqrt(p) alpha (Gram A), with A^{-1} mu read as
    the dual-basis coordinates of mu, so the phase pairing is lam . A mu.
    """
    lam = np.asarray(lam, dtype=complex).ravel()
    mu = np.asarray(mu_var, dtype=complex).ravel()
    e = np.asarray(eps, dtype=complex).ravel()
    A = int(p) * rs.cartan.astype(float)
    return complex(np.exp(2 * math.pi * np.dot(e, lam - mu) - 2j * math.pi * (lam @ A @ mu)))


def _typical_eta_ch(rs, p, lam, eps, tau):
    """eta^n ch[F_{lam + alpha0 rho}]^eps(tau) for arrays of lam (rows)."""
    A = p * rs.cartan.astype(float)
    quad = np.einsum("...i,ij,...j->...", lam, A, lam)
    return np.exp(2 * math.pi * (lam @ eps) + 1j * math.pi * tau * quad)


def s_kernel_check(rs: RootSystem, p: int, lam, eps, tau, tol: float = 1e-8) -> dict:
    """ch[F_{lam+alpha0 rho}]^eps(-1/tau) vs the S-kernel integral of ch[F_{mu+alpha0 rho}]^eps(tau).

    eta(-1/tau)^n = (-i tau)^{n/2} eta(tau)^n, so the check compares
    (-i tau)^{-n/2} eta^n ch at -1/tau against the integral of the
    kernel against eta^n ch(tau) over mu in L tensor R.
    """
    p = int(p)
    n = rs.rank
    tau = complex(tau)
    if tau.imag <= 0:
        raise PreconditionError("Im(tau) must be positive")
    lam = np.asarray(lam, dtype=complex).ravel()
    e = np.asarray(eps, dtype=complex).ravel()
    A = p * rs.cartan.astype(float)
    lhs = complex(_typical_eta_ch(rs, p, lam[None, :], e, -1.0 / tau)[0])
    # integrand |.| ~ exp(-pi Im(tau) (mu, A mu) + 2 pi Re(e) . mu); centre on the peak
    lam_min = float(np.linalg.eigvalsh(A).min())
    centre = np.linalg.solve(A, e.real) / tau.imag
    spec = choose_quadrature(lam_min, tau.imag, n, tol)
    R, h = spec.R, spec.h
    m = int(math.ceil(R / h))
    if (2 * m + 1) ** n > QUAD_BUDGET:
        raise QuadratureBudgetExceeded(f"{(2 * m + 1) ** n} nodes exceed the budget {QUAD_BUDGET}")
    axis = np.arange(-m, m + 1) * h
    grids = np.meshgrid(*([axis] * n), indexing="ij")
    mu = np.stack([g.ravel() for g in grids], axis=-1) + centre[None, :]
    ker = np.exp(2 * math.pi * ((lam[None, :] - mu) @ e) - 2j * math.pi * (mu @ A @ lam))
    vals = ker * _typical_eta_ch(rs, p, mu, e, tau)
    # Euclidean measure on L tensor R: d mu = sqrt(det A) d(coordinates)
    rhs = complex(vals.sum() * h ** n) * math.sqrt(float(np.linalg.det(A)))
    lhs = lhs / np.sqrt(-1j * tau) ** n
    res = abs(lhs - rhs)
    return {"lhs": lhs, "rhs": rhs, "residual": res, "relative": res / max(1.0, abs(lhs)),
            "quadrature": {"R": R, "h": h}}
