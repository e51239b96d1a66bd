"""Acceptance criteria as callable checks.

Each criterion returns a CriterionResult; ``run_all`` is what the ``verify``
command and the acceptance test module execute.
"""
from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import chars, modular, qdim
from .errors import PartialThetaError
from .qseries import eta_expansion
from .rootsys import kostant_partition, parse_type, weyl_dimension, weyl_group
from .theta import QuadLattice, elliptic_law_check

GRAM_A2 = [[2, -1], [-1, 2]]


@dataclass
class CriterionResult:
    number: int
    title: str
    passed: bool
    worst: float
    threshold: float
    seconds: float = 0.0
    detail: dict = field(default_factory=dict)

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return (f"[{tag}] criterion {self.number}: {self.title} "
                f"(worst {self.worst:.3g} vs {self.threshold:.3g}, {self.seconds:.1f}s)")

    def to_json(self) -> dict:
        return {"criterion": self.number, "title": self.title, "passed": self.passed,
                "worst": self.worst, "threshold": self.threshold, "seconds": self.seconds,
                "detail": self.detail}


def _rand_eps(rng, n, lo, hi, imag=0.4):
    return rng.uniform(lo, hi, n) + 1j * rng.uniform(-imag, imag, n)


def _rand_u(rng, n, radius=0.5):
    u = rng.normal(size=n)
    return u / np.linalg.norm(u) * rng.uniform(0, radius)


TAUS = (0.5j, 0.8j, 0.3 + 0.7j)


def criterion_1(seed: int = 0) -> CriterionResult:
    rng = np.random.default_rng(seed)
    lattices = [QuadLattice([[1]]), QuadLattice([[2]]), QuadLattice([[3]]),
                QuadLattice(2 * np.array(GRAM_A2)), QuadLattice(GRAM_A2)]
    t0 = time.perf_counter()
    worst = 0.0
    for i in range(20):
        L = lattices[i % len(lattices)]
        eps = _rand_eps(rng, L.n, -1.0, -0.1)
        u = _rand_u(rng, L.n)
        tau = TAUS[i % 3]
        r = modular.s_check_negative(L, u, eps, tau, tol=1e-9)
        worst = max(worst, r["residual"] / (1 + abs(r["lhs"])))
    dt = time.perf_counter() - t0
    return CriterionResult(1, "S-transform of P_eps equals h_eps for Re(eps) < 0", worst < 1e-6 and dt < 60,
                           worst, 1e-6, dt)


def criterion_2(seed: int = 0) -> CriterionResult:
    rng = np.random.default_rng(seed + 1)
    cases = [("A1", 2), ("A1", 3), ("A2", 2)]
    t0 = time.perf_counter()
    worst = 0.0
    for i in range(12):
        name, p = cases[i % 3]
        rs = parse_type(name)
        eps = _rand_eps(rng, rs.rank, -1.0, -0.1)
        u = _rand_u(rng, rs.rank)
        tau = TAUS[i % 3]
        r = modular.s_check_kostant_negative(rs, p, u, eps, tau, tol=1e-8)
        worst = max(worst, r["residual"] / (1 + abs(r["lhs"])))
    dt = time.perf_counter() - t0
    return CriterionResult(2, "S-transform of K_eps equals k_eps for Re(eps) < 0", worst < 1e-5 and dt < 120,
                           worst, 1e-5, dt)


def criterion_3(seed: int = 0) -> CriterionResult:
    rng = np.random.default_rng(seed + 2)
    t0 = time.perf_counter()
    worst = 0.0
    for i in range(10):
        if i < 5:
            L = QuadLattice([[1 + i % 3]])
            eps = _rand_eps(rng, 1, 0.1, 1.0)
        else:
            L = QuadLattice(GRAM_A2 if i % 2 else 2 * np.array(GRAM_A2))
            eps = np.array([_rand_eps(rng, 1, 0.1, 1.0)[0], _rand_eps(rng, 1, -1.0, -0.1)[0]])
            if i % 3 == 0:
                eps = eps[::-1].copy()
        u = _rand_u(rng, L.n)
        r = modular.s_check_full(L, u, eps, TAUS[i % 3], tol=1e-9)
        worst = max(worst, r["relative"])
    dt = time.perf_counter() - t0
    return CriterionResult(3, "full S-transform with subset correction", worst < 1e-5 and dt < 120,
                           worst, 1e-5, dt)


def criterion_4() -> CriterionResult:
    t0 = time.perf_counter()
    cases = [(0.3 + 0.1j, 0.7), (0.3 - 0.2j, -0.4), (-0.3 + 0.1j, -0.7), (-0.35, 0.4)]
    worst = 0.0
    detail = {}
    for eps, mu in cases:
        r = modular.contour_lemma_1d(eps, mu, 0.6 + 0.3j, 0.9j, R=6.0)
        res = r["residual"] if r["delta"] else abs(r["numeric"])
        detail[f"eps={eps}, mu={mu}"] = {"delta": r["delta"], "residual": res}
        worst = max(worst, res)
    deltas = sorted(d["delta"] for d in detail.values())
    ok = worst < 1e-6 and deltas == [-1, 0, 0, 1]
    return CriterionResult(4, "one-dimensional contour lemma, all delta cases", ok, worst, 1e-6,
                           time.perf_counter() - t0, detail)


def criterion_5() -> CriterionResult:
    t0 = time.perf_counter()
    A1, A2 = parse_type("A1"), parse_type("A2")
    bad = []
    count = 0
    for p in (2, 3):
        for m in range(-p, p):
            a = chars.atypical_character(A1, p, [m], None, 10).series
            c = chars.constant_term_character(A1, p, [m], 10)
            s = chars.singlet_a1_series(p, m, 10)
            count += 1
            if not (a.same_as(c) and a.same_as(s)):
                bad.append(("A1", p, m))
    for mu in ([0, 0], [1, 0], [-1, -2]):
        a = chars.atypical_character(A2, 2, mu, None, 10).series
        c = chars.constant_term_character(A2, 2, mu, 10)
        count += 1
        if not a.same_as(c):
            bad.append(("A2", 2, mu))
    return CriterionResult(5, "atypical characters: Kostant path = constant-term path = singlet sums",
                           not bad, float(len(bad)), 0.0, time.perf_counter() - t0,
                           {"cases": count, "mismatches": bad})


def criterion_6() -> CriterionResult:
    t0 = time.perf_counter()
    bad = []
    for name, mus in (("A1", ([0], [1], [-3])), ("A2", ([0, 0], [1, 0], [2, -1]))):
        rs = parse_type(name)
        for mu in mus:
            for i, w in enumerate(weyl_group(rs)):
                if not chars.weyl_invariance_check(rs, 2, mu, w, 10):
                    bad.append((name, mu, i))
    return CriterionResult(6, "Weyl invariance of atypical characters", not bad, float(len(bad)), 0.0,
                           time.perf_counter() - t0, {"failures": bad})


def criterion_7() -> CriterionResult:
    t0 = time.perf_counter()
    A1, A2 = parse_type("A1"), parse_type("A2")
    atyp = [(A1, 2, [-1], [-0.3]), (A1, 2, [1], [-0.5 + 0.2j]), (A1, 2, [3], [-0.4]),
            (A1, 3, [2], [-0.4 + 0.2j]), (A1, 3, [-2], [-0.6]), (A1, 3, [4], [-0.5 - 0.1j]),
            (A2, 2, [1, 0], [-0.3, -0.5]), (A2, 2, [-1, -2], [-0.4 + 0.1j, -0.3]),
            (A2, 2, [0, 1], [-0.5, -0.4 - 0.2j]), (A2, 2, [2, -1], [-0.6, -0.5])]
    typ = [(A1, 2, [0.3], [-0.3]), (A1, 3, [0.1], [-0.5 + 0.2j]), (A1, 2, [-0.45], [-0.7]),
           (A2, 2, [0.2, 0.1], [-0.3, -0.4]), (A2, 2, [-0.1, 0.35], [-0.5 + 0.1j, -0.35])]
    worst = 0.0
    detail = {}
    for rs, p, mu, eps in atyp:
        num = qdim.qdim_numeric(rs, p, qdim.QdimRequest.make("atypical", mu, eps)).value
        cl = qdim.qdim_atypical_closed(rs, p, mu, eps)
        err = abs(num - cl) / max(1.0, abs(cl))
        worst = max(worst, err)
        detail[f"atypical {rs.label} p={p} mu={mu}"] = err
    for rs, p, lam, eps in typ:
        num = qdim.qdim_numeric(rs, p, qdim.QdimRequest.make("typical", lam, eps)).value
        cl = qdim.qdim_typical_closed(rs, p, lam, eps)
        err = abs(num - cl) / max(1.0, abs(cl))
        worst = max(worst, err)
        detail[f"typical {rs.label} p={p} lam={lam}"] = err
    # eps -> 0- limit of the atypical closed form
    limit_worst = 0.0
    for rs, p, mu, _ in atyp:
        dec = chars.decompose_weight(rs, p, mu)
        d = float(weyl_dimension(rs, list(dec.kappa)))
        v = qdim.qdim_atypical_closed(rs, p, mu, [-1e-6 * (1 + 0.3 * j) for j in range(rs.rank)])
        limit_worst = max(limit_worst, abs(v - d))
    detail["eps->0 limit worst"] = limit_worst
    ok = worst < 1e-3 and limit_worst < 1e-3
    return CriterionResult(7, "quantum dimensions for Re(eps) < 0: closed forms vs numeric limits", ok,
                           max(worst, limit_worst), 1e-3, time.perf_counter() - t0, detail)


def _a2p2_condition_cases():
    """Search an eps grid for A2, p = 2 inputs that satisfy the positive-region conditions."""
    A2 = parse_type("A2")
    found = []
    ys = np.linspace(-2.0, 2.0, 17)
    for x1, x2 in ((4.0, 4.0), (6.0, 5.0)):
        for y1, y2 in itertools.product(ys, ys):
            eps = [x1 + 1j * y1, x2 + 1j * y2]
            if modular.region_analysis(A2, 2, eps).conditions_met:
                found.append(eps)
    return found


def criterion_8() -> CriterionResult:
    t0 = time.perf_counter()
    A1, A2 = parse_type("A1"), parse_type("A2")
    worst = 0.0
    detail = {}
    required = [(A1, 2, [3 - 1.0j], [2]), (A1, 2, [3 - 1.0j], [-2]), (A1, 2, [3 - 1.0j], [0])]
    a2p2 = _a2p2_condition_cases()
    required += [(A2, 2, eps, [1, 0]) for eps in a2p2[:3]]
    # supplementary evidence for the rank-2 closed form; not a substitute for p = 2
    extra = [(A1, 3, [4 - 0.9j], [-1]), (A1, 3, [4 - 0.9j], [2]),
             (A2, 3, [6 - 0.95j, 6.3 - 1.05j], [-1, -1]), (A2, 3, [6 - 0.95j, 6.3 - 1.05j], [1, 0])]
    extra_worst = 0.0
    for group, (rs, p, eps, mu) in [("required", c) for c in required] + [("extra", c) for c in extra]:
        key = f"{rs.label} p={p} eps={eps} mu={mu}"
        cl = qdim.qdim_positive_region(rs, p, "atypical", mu, eps)
        if isinstance(cl, qdim.ConditionsUnmet):
            detail[key] = "conditions unexpectedly unmet"
            err = math.inf
        else:
            num = qdim.qdim_numeric(rs, p, qdim.QdimRequest.make("atypical", mu, eps)).value
            err = abs(num - cl)
            detail[key] = err
        if group == "required":
            worst = max(worst, err)
        else:
            extra_worst = max(extra_worst, err)
    detail["supplementary A1/A2 p=3 worst"] = extra_worst
    # typicals vanish
    typ_worst = 0.0
    for rs, p, eps, lam in ((A1, 2, [3 - 1.0j], [0.3]), (A2, 3, [6 - 0.95j, 6.3 - 1.05j], [0.1, 0.2])):
        val = qdim.qdim_positive_region(rs, p, "typical", lam, eps)
        r = qdim.qdim_numeric(rs, p, qdim.QdimRequest.make("typical", lam, eps))
        typ_worst = max(typ_worst, abs(r.info["ratio_at_smallest_t"]))
        if val != 0:
            typ_worst = math.inf
    detail["typical ratio at smallest t"] = typ_worst
    # conditions-unmet flags
    flagged = []
    for rs, p, eps in ((A1, 2, [3 - 0.1j]), (A2, 2, [4 - 1.0j, 4 - 0.2j]), (A2, 2, [4 - 1.0j, 4 - 1.0j]),
                       (A2, 2, [5 - 0.4j, 6 - 1.3j])):
        flagged.append(isinstance(qdim.qdim_positive_region(rs, p, "atypical", [1] * rs.rank, eps),
                                  qdim.ConditionsUnmet))
    detail["unmet flagged"] = flagged
    detail["A2 p=2 condition-satisfying eps found"] = len(a2p2)
    if not a2p2:
        detail["analysis"] = (
            "no A2 p=2 input satisfies the hypotheses: N needs k1, k2 and k1 + k2 all odd, "
            "which is impossible, so J(y) meets N for no y; the A2 p=2 comparison cannot be run "
            "(p = 2 is below the dual Coxeter number 3 of A2)")
    ok = bool(a2p2) and worst < 5e-3 and typ_worst < 1e-4 and all(flagged)
    return CriterionResult(8, "quantum dimensions for Re(eps) > 0", ok, worst, 5e-3,
                           time.perf_counter() - t0, detail)


def _kostant_brute(rs, beta) -> int:
    roots = rs.positive_roots
    top = int(sum(beta))
    count = 0
    for mult in itertools.product(range(top + 1), repeat=len(roots)):
        if sum(mult) > top:
            continue
        if np.array_equal(np.asarray(mult) @ roots, np.asarray(beta)):
            count += 1
    return count


def _pentagonal(cap: int) -> dict:
    """q^{1/24} sum_k (-1)^k q^{k(3k-1)/2}, exponents up to cap."""
    out = {}
    k = 0
    while True:
        hit = False
        for kk in ((k, -k) if k else (0,)):
            e = Fraction(kk * (3 * kk - 1), 2) + Fraction(1, 24)
            if e <= cap:
                out[e] = (-1) ** (kk % 2)
                hit = True
        if not hit:
            break
        k += 1
    return out


def criterion_9(seed: int = 0) -> CriterionResult:
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed + 9)
    detail = {}
    g_worst = 0.0
    for n in (1, 2, 3):
        for _ in range(3):
            B = rng.normal(size=(n, n))
            M = B @ B.T + n * np.eye(n)
            b = rng.normal(size=n) + 1j * rng.normal(size=n)
            _, _, res = modular.gauss_integral_check(M, b)
            g_worst = max(g_worst, res)
    detail["gauss"] = g_worst
    e_worst = 0.0
    lattices = [QuadLattice([[1]]), QuadLattice([[3]]), QuadLattice(GRAM_A2), QuadLattice(2 * np.array(GRAM_A2))]
    for i in range(50):
        L = lattices[i % 4]
        eps = _rand_eps(rng, L.n, -1.0, -0.1)
        u = rng.uniform(-0.5, 0.5, L.n) + 1j * rng.uniform(-0.1, 0.1, L.n)
        m = rng.integers(-2, 3, L.n)
        ell = rng.integers(-3, 4, L.n)
        r = elliptic_law_check(L, u, eps, TAUS[i % 3], m, ell)
        e_worst = max(e_worst, r["residual"] / (1 + abs(r["lhs"])))
    detail["elliptic"] = e_worst
    eta = eta_expansion(200).as_dict()
    penta = _pentagonal(200)
    eta_ok = {k: v for k, v in eta.items() if v} == penta
    detail["eta_matches_pentagonal"] = eta_ok
    kp_bad = []
    for name in ("A1", "A2", "A3"):
        rs = parse_type(name)
        for beta in itertools.product(range(9), repeat=rs.rank):
            if sum(beta) > 8 or (name == "A3" and sum(beta) > 6):
                continue
            if kostant_partition(rs, beta) != _kostant_brute(rs, beta):
                kp_bad.append((name, beta))
    detail["kostant_mismatches"] = kp_bad
    ok = g_worst < 1e-8 and e_worst < 1e-9 and eta_ok and not kp_bad
    return CriterionResult(9, "infrastructure: Gauss lemma, elliptic law, eta, Kostant partitions", ok,
                           max(g_worst, e_worst), 1e-9, time.perf_counter() - t0, detail)


CRITERIA = {1: criterion_1, 2: criterion_2, 3: criterion_3, 4: criterion_4, 5: criterion_5,
            6: criterion_6, 7: criterion_7, 8: criterion_8, 9: criterion_9}


def run_criterion(number: int, seed: int = 0) -> CriterionResult:
    fn = CRITERIA[number]
    t0 = time.perf_counter()
    try:
        if "seed" in fn.__code__.co_varnames:
            res = fn(seed)
        else:
            res = fn()
    except PartialThetaError as exc:
        res = CriterionResult(number, fn.__name__, False, math.inf, 0.0, time.perf_counter() - t0,
                              {"error": repr(exc)})
    return res


def run_all(seed: int = 0, numbers=None) -> list[CriterionResult]:
    return [run_criterion(k, seed) for k in (numbers or sorted(CRITERIA))]
