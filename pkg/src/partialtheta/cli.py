"""Command-line interface.

Every command prints one JSON document (or CSV / a readable table) and exits
with 0 on success, 2 on usage errors, 3 on violated preconditions, 4 on
numeric failures and 5 when a verification fails.
"""
from __future__ import annotations

import argparse
import csv
import importlib.resources
import io
import itertools
import json
import math
import re
import sys
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction

import numpy as np

from . import __version__, chars, modular, qdim
from .errors import PartialThetaError, PreconditionError
from .rootsys import build_root_system, kostant_partition, parse_type, weyl_group
from .theta import QuadLattice, kostant_theta_eval, partial_theta_eval

EXIT_USAGE, EXIT_PRECONDITION, EXIT_NUMERIC, EXIT_VERIFY = 2, 3, 4, 5

DEFAULTS = {"format": "json", "tol": None, "seed": 0, "order": 10, "workers": 1}


# --------------------------------------------------------------------------
# parsing helpers
# --------------------------------------------------------------------------


def parse_complex(s: str) -> complex:
    """'a+bi', '-0.3', '2i', '1-0.5j' -> complex."""
    t = str(s).strip().replace(" ", "").replace("I", "i").replace("i", "j")
    if t in ("j", "+j"):
        return 1j
    if t == "-j":
        return -1j
    try:
        return complex(t)
    except ValueError as exc:
        raise PreconditionError(f"cannot parse complex number {s!r}") from exc


def parse_complex_list(s: str) -> np.ndarray:
    return np.array([parse_complex(x) for x in str(s).split(",") if x.strip()], dtype=complex)


def parse_int_list(s: str) -> list[int]:
    try:
        return [int(x) for x in str(s).split(",") if x.strip()]
    except ValueError as exc:
        raise PreconditionError(f"expected comma-separated integers, got {s!r}") from exc


def parse_rational_list(s: str) -> list:
    out = []
    for x in str(s).split(","):
        x = x.strip()
        if not x:
            continue
        try:
            out.append(Fraction(x))
        except ValueError:
            out.append(float(x))
    return out


def parse_matrix(s: str) -> np.ndarray:
    rows = [r for r in str(s).split(";") if r.strip()]
    return np.array([parse_int_list(r) for r in rows], dtype=np.int64)


def parse_range(s: str) -> list[float]:
    """'lo:hi:n' -> n evenly spaced values; a single number -> [number]."""
    parts = str(s).split(":")
    if len(parts) == 1:
        return [float(parts[0])]
    if len(parts) != 3:
        raise PreconditionError(f"range must be lo:hi:n, got {s!r}")
    lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
    if n < 1:
        raise PreconditionError("range needs at least one point")
    return [lo] if n == 1 else list(np.linspace(lo, hi, n))


def parse_grid_component(s: str) -> list[complex]:
    """'RE[@IM]' with RE and IM each a number or lo:hi:n."""
    re_part, _, im_part = str(s).partition("@")
    res = parse_range(re_part)
    ims = parse_range(im_part) if im_part else [0.0]
    return [complex(a, b) for a in res for b in ims]


def _root_system(args):
    label = args.type
    if label is None:
        raise PreconditionError("--type is required")
    if getattr(args, "rank", None) is not None:
        return build_root_system(label, int(args.rank))
    return parse_type(label)


def _check_tau(tau: complex) -> complex:
    if tau.imag <= 0:
        raise PreconditionError("Im(tau) must be positive")
    return tau


def _check_eps_nonzero(eps) -> np.ndarray:
    e = np.asarray(eps, dtype=complex)
    if np.any(e.real == 0):
        raise PreconditionError("Re(eps_i) must be nonzero")
    return e


# --------------------------------------------------------------------------
# serialization
# --------------------------------------------------------------------------


def plain(v):
    """Recursively convert results to JSON-compatible builtins."""
    if isinstance(v, dict):
        return {str(k): plain(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [plain(x) for x in v]
    if isinstance(v, np.ndarray):
        return plain(v.tolist())
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, Fraction):
        return int(v) if v.denominator == 1 else str(v)
    if isinstance(v, (np.integer, int)):
        return int(v)
    if isinstance(v, (np.floating, float)):
        f = float(v)
        return f if math.isfinite(f) else str(f)
    if isinstance(v, complex):
        return [plain(v.real), plain(v.imag)]
    return v


def _flatten(d, prefix=""):
    out = {}
    for k, v in d.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            out.update(_flatten(v, key + "."))
        elif isinstance(v, list):
            out[key] = json.dumps(v)
        else:
            out[key] = v
    return out


def emit(doc: dict, fmt: str, out=None) -> None:
    out = out or sys.stdout
    doc = plain(doc)
    if fmt == "json":
        out.write(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    elif fmt == "csv":
        buf = io.StringIO()
        rows = doc.get("rows")
        if isinstance(rows, list) and rows and isinstance(rows[0], dict):
            cols = list(rows[0].keys())
            w = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n")
            w.writeheader()
            for r in rows:
                w.writerow({k: json.dumps(x) if isinstance(x, list) else x for k, x in r.items()})
        else:
            w = csv.writer(buf, lineterminator="\n")
            w.writerow(["key", "value"])
            for k, v in sorted(_flatten(doc).items()):
                w.writerow([k, v])
        out.write(buf.getvalue())
    else:
        for k, v in sorted(_flatten(doc).items()):
            out.write(f"{k:32s} {v}\n")


SCHEMA_NAMES = {"root-info": "root_info", "kostant": "kostant", "theta-eval": "theta_eval",
                "s-check": "s_check", "char": "char", "qdim": "qdim", "qdim-sweep": "qdim_sweep",
                "verify": "verify", "error": "error"}


def load_schema(command: str) -> dict:
    """The JSON schema shipped for a command's output (or ``"error"``)."""
    ref = importlib.resources.files("partialtheta") / "schemas" / f"{SCHEMA_NAMES[command]}.json"
    return json.loads(ref.read_text(encoding="utf-8"))


# --------------------------------------------------------------------------
# commands
# --------------------------------------------------------------------------


def cmd_root_info(args) -> dict:
    rs = _root_system(args)
    return {
        "command": "root-info",
        "type": rs.label,
        "rank": rs.rank,
        "cartan": rs.cartan,
        "positive_roots": rs.positive_roots,
        "n_pos": rs.n_pos,
        "weyl_order": len(weyl_group(rs)),
        "rho_alpha": list(rs.rho_alpha),
        "det_cartan": int(round(np.linalg.det(rs.cartan.astype(float)))),
    }


def cmd_kostant(args) -> dict:
    rs = _root_system(args)
    beta = parse_int_list(args.beta)
    if len(beta) != rs.rank:
        raise PreconditionError("beta has the wrong length")
    return {"command": "kostant", "type": rs.label, "beta": beta, "value": kostant_partition(rs, beta)}


def cmd_theta_eval(args) -> dict:
    tau = _check_tau(parse_complex(args.tau))
    u = parse_complex_list(args.u)
    eps = _check_eps_nonzero(parse_complex_list(args.eps))
    tol = args.tol or 1e-12
    if args.kind == "partial":
        res = partial_theta_eval(_lattice_arg(args), u, eps, tau, tol)
    else:
        res = kostant_theta_eval(_root_system(args), _p_arg(args), u, eps, tau, tol)
    return {"command": "theta-eval", "kind": args.kind, "result": res.to_json()}


def _p_arg(args) -> int:
    if args.p is None:
        raise PreconditionError("--p is required")
    return int(args.p)


def _lattice_arg(args):
    if args.A is not None:
        return QuadLattice(parse_matrix(args.A))
    return QuadLattice.from_root_system(_root_system(args), _p_arg(args))


def cmd_s_check(args) -> dict:
    tol = args.tol or 1e-9
    kind = args.kind
    tau = _check_tau(parse_complex(args.tau))
    if kind == "contour":
        r = modular.contour_lemma_1d(parse_complex(args.eps), parse_complex(args.mu_shift),
                                     parse_complex(args.z), tau, R=float(args.R))
    else:
        u = parse_complex_list(args.u)
        eps = _check_eps_nonzero(parse_complex_list(args.eps))
        if kind == "negative":
            r = modular.s_check_negative(_lattice_arg(args), u, eps, tau, tol)
        elif kind == "kostant":
            r = modular.s_check_kostant_negative(_root_system(args), _p_arg(args), u, eps, tau, tol)
        elif kind == "full":
            r = modular.s_check_full(_lattice_arg(args), u, eps, tau, tol)
        else:
            r = modular.unregularized_check(_lattice_arg(args), u, eps, tau, tol)
    return {"command": "s-check", "kind": kind, "result": r}


def cmd_char(args) -> dict:
    rs = _root_system(args)
    p = int(args.p)
    order = args.order if args.order is not None else DEFAULTS["order"]
    eps = None if args.eps is None else parse_complex_list(args.eps)
    if args.kind in ("atypical", "constant-term", "full"):
        if args.mu is None:
            raise PreconditionError(f"{args.kind} characters need --mu")
        mu = parse_int_list(args.mu)
        if len(mu) != rs.rank:
            raise PreconditionError("mu has the wrong length")
        if args.kind == "atypical":
            rec = chars.atypical_character(rs, p, mu, eps, order)
            out = rec.to_json()
        elif args.kind == "constant-term":
            dec = chars.decompose_weight(rs, p, mu)
            out = {"kind": "constant-term", "decomposition": dec.to_json(),
                   "series": chars.constant_term_character(rs, p, mu, order).to_json(), "eps": None}
        else:
            dec = chars.decompose_weight(rs, p, mu)
            out = {"kind": "full", "decomposition": dec.to_json(),
                   "series": chars.full_character_specialized(rs, p, dec, order).to_json(), "eps": None}
    else:
        if args.lam is None:
            raise PreconditionError("typical characters need --lam")
        lam = parse_rational_list(args.lam)
        out = chars.typical_character(rs, p, lam, eps).to_json()
    return {"command": "char", **out}


def _qdim_point(rs, p, kind, label, eps, numeric: bool, tol):
    """One quantum-dimension evaluation; returns a dict following the qdim schema."""
    e = np.asarray(eps, dtype=complex)
    doc = {"module": {"kind": kind, "label": list(label)}, "eps": [[z.real, z.imag] for z in e],
           "conditions": None, "diagnostics": {}}
    if not np.any(e):
        doc["region"] = "eps0"
        vals = qdim.qdim_eps0(rs, p, kind, label)
        doc["value_re"], doc["value_im"] = vals["value"], 0.0
        doc["diagnostics"] = {k: v for k, v in vals.items() if k != "value"}
        return doc
    if np.any(e.real == 0):
        raise PreconditionError("Re(eps_i) = 0 is a boundary of the regularization")
    if np.all(e.real < 0):
        doc["region"] = "neg"
        if kind == "atypical":
            v = qdim.qdim_atypical_closed(rs, p, label, e)
        else:
            v = qdim.qdim_typical_closed(rs, p, label, e)
            doc["diagnostics"]["printed_variant"] = qdim.qdim_typical_closed(rs, p, label, e, "printed")
    elif np.all(e.real > 0):
        doc["region"] = "pos"
        reg = modular.region_analysis(rs, p, e)
        doc["conditions"] = reg.to_json()
        v = qdim.qdim_positive_region(rs, p, kind, label, e)
        if isinstance(v, qdim.ConditionsUnmet):
            v = None
        elif kind == "atypical":
            doc["diagnostics"]["printed_variant"] = qdim.qdim_positive_region(rs, p, kind, label, e, "printed")
    else:
        raise PreconditionError("mixed-sign Re(eps) has no quantum-dimension formula")
    if v is None:
        doc["value_re"] = doc["value_im"] = None
    else:
        doc["value_re"], doc["value_im"] = complex(v).real, complex(v).imag
    if numeric:
        req = qdim.QdimRequest.make(kind, label, e)
        r = qdim.qdim_numeric(rs, p, req, tol or 1e-13)
        doc["diagnostics"]["numeric"] = r.to_json()
    return doc


def _module_label(args, rs):
    if (args.mu is None) == (args.lam is None):
        raise PreconditionError("give exactly one of --mu (atypical) or --lam (typical)")
    if args.mu is not None:
        label = parse_int_list(args.mu)
        kind = "atypical"
    else:
        label = parse_rational_list(args.lam)
        kind = "typical"
    if len(label) != rs.rank:
        raise PreconditionError("module label has the wrong length")
    return kind, label


def cmd_qdim(args) -> dict:
    rs = _root_system(args)
    kind, label = _module_label(args, rs)
    eps = parse_complex_list(args.eps) if args.eps is not None else np.zeros(rs.rank, dtype=complex)
    if eps.size != rs.rank:
        raise PreconditionError("eps has the wrong length")
    doc = _qdim_point(rs, int(args.p), kind, label, eps, args.numeric, args.tol)
    if args.region is not None and args.region != doc["region"]:
        raise PreconditionError(f"requested region {args.region} but Re(eps) lies in {doc['region']}")
    return {"command": "qdim", **doc}


def _sweep_row(job):
    label_type, rank, p, kind, label, eps = job
    rs = build_root_system(label_type, rank)
    e = np.asarray(eps, dtype=complex)
    row = {}
    for i, z in enumerate(e):
        row[f"eps_re_{i + 1}"] = z.real
        row[f"eps_im_{i + 1}"] = z.imag
    k_star = None
    try:
        doc = _qdim_point(rs, p, kind, label, e, False, None)
        region = doc["region"]
        cond = doc["conditions"]
        if cond is not None:
            k_star = cond["k_star"]
            cond = "met" if cond["conditions_met"] else "unmet"
        else:
            cond = "n/a"
        vr, vi = doc["value_re"], doc["value_im"]
    except PreconditionError as exc:
        region, cond, vr, vi = "invalid", str(exc), None, None
    row.update({"region": region, "conditions": cond, "qdim_re": vr, "qdim_im": vi, "k_star": k_star})
    return row


def cmd_qdim_sweep(args) -> dict:
    rs = _root_system(args)
    kind, label = _module_label(args, rs)
    comps = args.grid
    if len(comps) != rs.rank:
        raise PreconditionError(f"need one --grid per component ({rs.rank})")
    axes = [parse_grid_component(c) for c in comps]
    points = list(itertools.product(*axes))
    if len(points) > 100000:
        raise PreconditionError("sweep grid larger than 100000 points")
    jobs = [(rs.family, rs.rank, int(args.p), kind, label, pt) for pt in points]
    workers = args.workers or DEFAULTS["workers"]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            rows = list(ex.map(_sweep_row, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
    else:
        rows = [_sweep_row(j) for j in jobs]
    return {"command": "qdim-sweep", "type": rs.label, "p": int(args.p),
            "module": {"kind": kind, "label": list(label)}, "rows": rows}


def cmd_verify(args) -> dict:
    from . import acceptance

    numbers = parse_int_list(args.criteria) if args.criteria else None
    results = acceptance.run_all(seed=args.seed or 0, numbers=numbers)
    for r in results:
        print(r.line(), file=sys.stderr)
    rows = []
    for r in results:
        d = r.to_json()
        if not args.timings:
            d.pop("seconds")
        rows.append(d)
    return {"command": "verify", "seed": args.seed or 0, "passed": all(r.passed for r in results),
            "criteria": rows}


# --------------------------------------------------------------------------
# parser
# --------------------------------------------------------------------------


VALUE_OPTS = {"--eps", "--u", "--tau", "--mu", "--lam", "--beta", "--grid", "--z", "--mu-shift", "--A"}
_NUMERIC_START = re.compile(r"^-[\d.ij]")


def _add_type(p, rank_positional=False):
    if rank_positional:
        p.add_argument("type", help="root system, e.g. A2 or A (with RANK)")
        p.add_argument("rank", nargs="?", type=int, help="rank when TYPE is a bare family letter")
    else:
        p.add_argument("--type", required=False, default=None, help="root system, e.g. A2")
        p.add_argument("--rank", type=int, default=None)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="partialtheta", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=["json", "csv", "pretty"], default=None)
    common.add_argument("--tol", type=float, default=None)
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--config", default=None, help="key=value file merged under the flags")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("root-info", parents=[common], help="root system data")
    _add_type(p, True)
    p.set_defaults(func=cmd_root_info)

    p = sub.add_parser("kostant", parents=[common], help="Kostant partition function")
    _add_type(p, True)
    p.add_argument("--beta", required=True, help="simple-root coordinates, comma separated")
    p.set_defaults(func=cmd_kostant)

    p = sub.add_parser("theta-eval", parents=[common], help="evaluate P_eps or K_eps")
    p.add_argument("kind", choices=["partial", "kostant"])
    _add_type(p)
    p.add_argument("--A", default=None, help="Gram matrix rows separated by ';'")
    p.add_argument("--p", type=int, default=None)
    p.add_argument("--u", required=True)
    p.add_argument("--eps", required=True)
    p.add_argument("--tau", required=True)
    p.set_defaults(func=cmd_theta_eval)

    p = sub.add_parser("s-check", parents=[common], help="modular transformation checks")
    p.add_argument("kind", choices=["negative", "kostant", "full", "unregularized", "contour"])
    _add_type(p)
    p.add_argument("--A", default=None)
    p.add_argument("--p", type=int, default=None)
    p.add_argument("--u", default="0")
    p.add_argument("--eps", required=True)
    p.add_argument("--tau", required=True)
    p.add_argument("--mu-shift", dest="mu_shift", default="0.5", help="contour: imaginary shift mu")
    p.add_argument("--z", default="1", help="contour: elliptic variable z")
    p.add_argument("--R", default=6.0, type=float)
    p.set_defaults(func=cmd_s_check)

    p = sub.add_parser("char", parents=[common], help="characters as q-series")
    p.add_argument("kind", choices=["atypical", "constant-term", "full", "typical"])
    _add_type(p)
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--mu", default=None, help="integer coordinates in the omega_j/sqrt(p) basis")
    p.add_argument("--lam", default=None, help="coordinates in the sqrt(p) alpha_j basis")
    p.add_argument("--eps", default=None)
    p.add_argument("--order", type=Fraction, default=None)
    p.set_defaults(func=cmd_char)

    p = sub.add_parser("qdim", parents=[common], help="regularized quantum dimension")
    _add_type(p)
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--mu", default=None)
    p.add_argument("--lam", default=None)
    p.add_argument("--eps", default=None)
    p.add_argument("--region", choices=list(qdim.REGIONS), default=None)
    p.add_argument("--numeric", action="store_true", help="also run the numeric limit")
    p.set_defaults(func=cmd_qdim)

    p = sub.add_parser("qdim-sweep", parents=[common], help="quantum dimensions over an eps grid")
    _add_type(p)
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--mu", default=None)
    p.add_argument("--lam", default=None)
    p.add_argument("--grid", action="append", required=True,
                   help="one per component: RE[@IM], each a number or lo:hi:n")
    p.add_argument("--workers", type=int, default=None)
    p.set_defaults(func=cmd_qdim_sweep)

    p = sub.add_parser("verify", parents=[common], help="run the acceptance criteria")
    p.add_argument("--criteria", default=None, help="comma-separated criterion numbers")
    p.add_argument("--timings", action="store_true", help="include wall-clock timings in the output")
    p.set_defaults(func=cmd_verify)
    return ap


def _join_negative_values(argv):
    """Let '--eps -0.3+0.1i' through argparse by rewriting it as '--eps=-0.3+0.1i'."""
    out = []
    i = 0
    while i < len(argv):
        tok = argv[i]
        if tok in VALUE_OPTS and i + 1 < len(argv) and _NUMERIC_START.match(argv[i + 1]):
            out.append(f"{tok}={argv[i + 1]}")
            i += 2
            continue
        out.append(tok)
        i += 1
    return out


def read_config(path: str) -> dict:
    cfg = {}
    try:
        with open(path, encoding="utf-8") as fh:
            for ln, line in enumerate(fh, 1):
                line = line.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise PreconditionError(f"{path}:{ln}: expected key=value")
                k, v = line.split("=", 1)
                cfg[k.strip().replace("-", "_")] = v.strip()
    except OSError as exc:
        raise PreconditionError(f"cannot read config {path}: {exc}") from exc
    return cfg


_CONFIG_TYPES = {"tol": float, "seed": int, "p": int, "rank": int, "workers": int, "order": Fraction, "R": float}


def _merge_config(args, cfg: dict) -> None:
    for k, v in cfg.items():
        if not hasattr(args, k):
            raise PreconditionError(f"unknown config key {k!r} for this command")
        if getattr(args, k) is None:
            setattr(args, k, _CONFIG_TYPES.get(k, str)(v))


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(_join_negative_values(argv))
    try:
        if args.config:
            _merge_config(args, read_config(args.config))
        args.format = args.format or DEFAULTS["format"]
        if args.seed is None:
            args.seed = DEFAULTS["seed"]
        doc = args.func(args)
    except PartialThetaError as exc:
        err = {"error": type(exc).__name__, "message": str(exc), "exit_code": exc.exit_code}
        sys.stderr.write(json.dumps(err, sort_keys=True) + "\n")
        return exc.exit_code
    emit(doc, args.format)
    if args.command == "verify" and not doc["passed"]:
        return EXIT_VERIFY
    return 0


if __name__ == "__main__":
    sys.exit(main())
