"""effroth command line: reproducible JSON/CSV reports for every module."""
from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import os
import re
import subprocess
import sys
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path

from . import __version__
from . import constants as K
from .algebra import AlgebraicNumber, IntPolynomial, real_roots
from .census import BudgetExceeded, CensusSpec, cached_census, parse_mode
from .intervalsets import build_J, farey, len_star_farey, parse_psi, sieve_check, sigma_sum, theta

EXIT_USAGE = 2
EXIT_BUDGET = 3


@dataclass
class RunConfig:
    command: str
    params: dict
    seed: int = 0
    tol: float | None = None
    threads: int = 1
    format: str = "json"
    cache_dir: str | None = None
    budget: int | None = None
    precision_bits: int = K.PREC

    def to_dict(self) -> dict:
        return asdict(self)

    @property
    def digest(self) -> str:
        # the cache location does not change any reported value
        payload = {k: v for k, v in self.to_dict().items() if k != "cache_dir"}
        return hashlib.sha256(json.dumps(payload, sort_keys=True, default=str).encode()).hexdigest()[:16]


@dataclass
class Report:
    config: RunConfig
    results: dict = field(default_factory=dict)
    rows: list[dict] = field(default_factory=list)
    budget_exceeded: bool = False

    def header(self) -> dict:
        return {"tool": "effroth", "version": __version__, "config_hash": self.config.digest,
                "config": self.config.to_dict(), "budget_exceeded": self.budget_exceeded}

    def render(self) -> str:
        if self.config.format == "csv":
            buf = io.StringIO()
            for k, v in self.header().items():
                if k != "config":
                    buf.write(f"# {k}={v}\n")
            buf.write(f"# config={json.dumps(self.config.to_dict(), sort_keys=True, default=str)}\n")
            rows = self.rows or [_flatten(self.results)]
            keys = list(dict.fromkeys(k for r in rows for k in r))
            w = csv.DictWriter(buf, fieldnames=keys, lineterminator="\n")
            w.writeheader()
            for r in rows:
                w.writerow({k: _cell(r.get(k, "")) for k in keys})
            return buf.getvalue()
        out = self.header()
        out["results"] = self.results
        if self.rows:
            out["rows"] = self.rows
        return json.dumps(out, indent=2, sort_keys=True, default=_json_default) + "\n"


def _json_default(x):
    if isinstance(x, Fraction):
        return f"{x.numerator}/{x.denominator}"
    if hasattr(x, "to_dict"):
        return x.to_dict()
    if hasattr(x, "item"):
        return x.item()
    return str(x)


def _cell(v) -> str:
    if isinstance(v, Fraction):
        return f"{v.numerator}/{v.denominator}"
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, (dict, list)):
        return json.dumps(v, sort_keys=True, default=_json_default)
    return str(v)


def _flatten(d: dict, prefix: str = "") -> dict:
    out = {}
    for k, v in d.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            out.update(_flatten(v, key + "."))
        else:
            out[key] = v
    return out


def _frac(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


def _exact(x: Fraction) -> dict:
    return {"value": _frac(x), "float": float(x), "provenance": "exact"}


def _big(c: K.BigConstant) -> dict:
    out = c.to_dict(max_exact_digits=200)
    out["provenance"] = "exact" if c.exact is not None else "log-space"
    return out


class UsageError(Exception):
    pass


# -- argument parsing ---------------------------------------------------------

def _int_list(text: str) -> list[int]:
    return [int(x) for x in text.replace(";", ",").split(",") if x.strip()]


def _common(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("run configuration")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--tol", type=float, default=None)
    g.add_argument("--threads", type=int, default=1, help="accepted for reproducibility; work runs in one process")
    g.add_argument("--out", default=None)
    g.add_argument("--format", choices=("json", "csv"), default="json")
    g.add_argument("--cache-dir", default=None, help="defaults to $EFFROTH_CACHE")
    g.add_argument("--budget", type=int, default=None)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="effroth", description=__doc__)
    ap.add_argument("--version", action="version", version=f"effroth {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("census", help="algebraic numbers of degree d and height <= H")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--H", type=int, required=True)
    p.add_argument("--mode", default="Restricted")
    p.add_argument("--list", action="store_true", help="one row per algebraic number")
    _common(p)

    p = sub.add_parser("density", help="limit densities on a grid of points")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--kind", default="Rho", choices=("Rho", "XiPeriodised", "ChiRestricted"))
    p.add_argument("--x", type=float, action="append", default=None)
    p.add_argument("--grid", type=int, default=None, help="evenly spaced points in [lo, hi]")
    p.add_argument("--lo", type=float, default=0.0)
    p.add_argument("--hi", type=float, default=1.0)
    p.add_argument("--integral", action="store_true", help="also integrate over [lo, hi]")
    _common(p)

    p = sub.add_parser("constants", help="certified constants")
    p.add_argument("action", choices=("dump", "list"))
    p.add_argument("--name", default=None)
    for flag in ("--d", "--n", "--k", "--H", "--p", "--s", "--pZ", "--sZ"):
        p.add_argument(flag, type=int, default=None)
    p.add_argument("--mode", default=None)
    p.add_argument("--variant", default=None)
    p.add_argument("--degrees", default=None, help="comma-separated degree vector")
    _common(p)

    p = sub.add_parser("jset", help="approximation set J_Psi(Q1, Q2)")
    p.add_argument("--psi", required=True)
    p.add_argument("--q1", type=int, required=True)
    p.add_argument("--q2", type=int, required=True)
    p.add_argument("--rounding", default="exact", choices=("exact", "inner", "outer"))
    _common(p)

    p = sub.add_parser("farey", help="Farey sequence")
    p.add_argument("--order", type=int, required=True)
    _common(p)

    p = sub.add_parser("bounds", help="Roth-type bounds against the census")
    p.add_argument("--d", type=int, default=2)
    p.add_argument("--H", type=int, default=None)
    p.add_argument("--mode", default="Restricted")
    p.add_argument("--psi", default=None)
    p.add_argument("--q1", type=int, default=None)
    p.add_argument("--q2", type=int, default=None)
    p.add_argument("--delta", default="1/2")
    p.add_argument("--form", choices=("closed", "general"), default=None, help="one bound form (default: both)")
    p.add_argument("--audit", action="store_true", help="run the illustration audit instead")
    _common(p)

    p = sub.add_parser("subspace", help="generalised subspace inequality")
    p.add_argument("action", choices=("test", "solve", "member", "fibervol", "bound", "ratio", "audit"))
    p.add_argument("--lines", default=None, help='JSON rows, entries "p/q" or "root:a0,a1,...:i"')
    p.add_argument("--chart", default="stereo", choices=("stereo", "direction"))
    p.add_argument("--lam", default=None, help="integer vector, comma-separated")
    p.add_argument("--psi", default=None)
    p.add_argument("--qmax", type=int, default=None)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--q1", type=int, default=None)
    p.add_argument("--q2", type=int, default=None)
    p.add_argument("--d", default=None, help="degree vector, comma-separated")
    p.add_argument("--H", default=None, help="height vector, comma-separated")
    p.add_argument("--eta", type=float, default=None)
    p.add_argument("--base", default=None, help="stereographic base point, comma-separated floats")
    p.add_argument("--samples", type=int, default=None)
    _common(p)

    p = sub.add_parser("davenport", help="lattice points in semialgebraic fibers")
    p.add_argument("action", choices=("count", "verify", "points", "reducible"))
    p.add_argument("--fiber", default=None, help="fiber description JSON file")
    p.add_argument("--disk", type=int, default=None, help="use the disk of this radius")
    p.add_argument("--d", type=int, default=None)
    p.add_argument("--n", type=int, default=1)
    p.add_argument("--H", type=int, default=None)
    _common(p)

    p = sub.add_parser("verify-all", help="run the acceptance suite")
    p.add_argument("--tests", default=None, help="path to test_acceptance.py")
    _common(p)
    return ap


def _config(args) -> RunConfig:
    skip = {"command", "seed", "tol", "threads", "out", "format", "cache_dir", "budget"}
    params = {k: v for k, v in sorted(vars(args).items()) if k not in skip}
    cache = args.cache_dir or os.environ.get("EFFROTH_CACHE")
    return RunConfig(args.command, params, args.seed, args.tol, args.threads, args.format, cache, args.budget)


def _need(args, *names):
    missing = [n for n in names if getattr(args, n) is None]
    if missing:
        raise UsageError(f"{args.command}: missing " + ", ".join("--" + m.replace("_", "-") for m in missing))


def _psi(text):
    try:
        return parse_psi(text)
    except ValueError as e:
        raise UsageError(str(e)) from None


# -- commands --------------------------------------------------------------

def cmd_census(args, rep: Report) -> None:
    spec = CensusSpec(args.d, args.H, parse_mode(args.mode))
    kw = {} if args.budget is None else {"budget": args.budget}
    c = cached_census(spec, rep.config.cache_dir, **kw)
    rep.results = {"d": spec.d, "H": spec.H, "mode": spec.mode, "total": c.total, "distinct": len(c)}
    if args.list:
        for i in range(len(c)):
            a = c.number(i)
            rep.rows.append({"minpoly": " ".join(str(int(x)) for x in c.coeffs[i]), "lo": _frac(a.isolation.lo),
                             "hi": _frac(a.isolation.hi), "multiplicity": int(c.mult[i]), "approx": float(c.points()[i])})


def cmd_density(args, rep: Report) -> None:
    from .koleda import DensityModel

    kw = {} if args.tol is None else {"tol": args.tol}
    model = DensityModel(args.d, args.kind, seed=args.seed, **kw)
    xs = list(args.x or [])
    if args.grid:
        xs += [args.lo + (args.hi - args.lo) * i / (args.grid - 1) for i in range(args.grid)] if args.grid > 1 else [args.lo]
    for x in xs:
        e = model(x)
        rep.rows.append({"x": x, "value": e.value, "err": e.err, "tol_met": bool(e.tol_met), "provenance": "quadrature"})
    rep.results = {"d": args.d, "kind": args.kind, "points": len(xs)}
    if args.integral:
        e = model.integral(args.lo, args.hi)
        rep.results["integral"] = {"lo": args.lo, "hi": args.hi, "value": e.value, "err": e.err, "provenance": "quadrature"}


def cmd_constants(args, rep: Report) -> None:
    if args.action == "list":
        rep.rows = [{"name": n, "parameters": ",".join(K.LEDGER.parameters(n))} for n in K.NAMES]
        rep.results = {"count": len(rep.rows)}
        return
    _need(args, "name")
    if args.name not in K.NAMES:
        raise UsageError(f"unknown constant {args.name!r}; try 'constants list'")
    params = {}
    for key in K.LEDGER.parameters(args.name):
        v = getattr(args, key, None)
        if v is None:
            raise UsageError(f"constant {args.name} needs --{key}")
        params[key] = _int_list(v) if key == "degrees" else v
    c = K.get(args.name, params)
    rep.results = {"name": args.name, "params": params, "constant": _big(c)}
    entry = _big(c)
    rep.rows = [{"name": args.name, **params, "exact": entry["exact"] or "", "ln_lo": entry["ln_lo"],
                 "ln_hi": entry["ln_hi"], "provenance": entry["provenance"]}]


def cmd_jset(args, rep: Report) -> None:
    psi = _psi(args.psi)
    if not 1 <= args.q1 < args.q2:
        raise UsageError("need 1 <= q1 < q2")
    J = build_J(psi, args.q1, args.q2, args.rounding)
    rep.rows = [{"row": "component", "lo_num": a.numerator, "lo_den": a.denominator,
                 "hi_num": b.numerator, "hi_den": b.denominator} for a, b in J.components]
    rep.results = {"psi": str(psi), "Q1": args.q1, "Q2": args.q2, "components": len(J.components),
                   "measure": _exact(J.measure()), "theta": _exact(theta(psi, args.q1, args.q2, args.rounding)),
                   "sigma": _exact(sigma_sum(psi, args.q1, args.q2, args.rounding))}
    if psi.is_exact and psi.monotone_nonincreasing:
        rep.results["len_star"] = _exact(len_star_farey(psi, args.q1, args.q2))
        s = sieve_check(psi, args.q1, args.q2)
        rep.results["sieve"] = {k: (_exact(v) if isinstance(v, Fraction) else v) for k, v in asdict(s).items()}
    summary = {"row": "summary", "measure": rep.results["measure"]["value"],
               "theta": rep.results["theta"]["value"], "sigma": rep.results["sigma"]["value"]}
    if "len_star" in rep.results:
        summary["len_star"] = rep.results["len_star"]["value"]
    rep.rows.append(summary)


def cmd_farey(args, rep: Report) -> None:
    if args.order < 1:
        raise UsageError("order must be positive")
    fs = farey(args.order)
    rep.rows = [{"fraction": _frac(f.value), "p": f.value.numerator, "q": f.value.denominator} for f in fs]
    rep.results = {"order": args.order, "length": len(fs)}


def cmd_bounds(args, rep: Report) -> None:
    from . import rothbounds as R

    if args.audit:
        rep.results = R.illustration_audit()
        return
    _need(args, "H", "psi", "q1", "q2")
    p = R.BoundParams(args.d, parse_mode(args.mode), _psi(args.psi), args.q1, args.q2, args.H, Fraction(args.delta))
    census = cached_census(p.census_spec, rep.config.cache_dir)
    forms = (args.form,) if args.form else R.FORMS
    rep.results = R.verify_empirical(p, census, forms=forms)


def _entry(text):
    text = str(text).strip()
    if text.startswith("root:"):
        _, coeffs, idx = text.split(":")
        poly = IntPolynomial(_int_list(coeffs))
        roots = real_roots(poly)
        i = int(idx)
        if not 0 <= i < len(roots):
            raise UsageError(f"{text}: polynomial has {len(roots)} real roots")
        return AlgebraicNumber(poly, roots[i])
    return Fraction(text)


def _lines(args):
    from .subspace import AlgebraicLineTuple

    _need(args, "lines")
    rows = json.loads(args.lines)
    return AlgebraicLineTuple(tuple(tuple(_entry(x) for x in r) for r in rows), args.chart)


def cmd_subspace(args, rep: Report) -> None:
    from . import subspace as S

    a = args.action
    if a == "audit":
        rep.results = S.subspace_illustration_audit()
    elif a == "test":
        _need(args, "lam", "psi")
        lines = _lines(args)
        rep.results = {"verdict": S.subspace_test(lines, _int_list(args.lam), _psi(args.psi)),
                       "multi_degree": lines.multi_degree, "multi_height": lines.multi_height}
    elif a == "solve":
        _need(args, "psi", "qmax")
        sols = S.find_solutions(_lines(args), _psi(args.psi), args.qmax, args.budget)
        rep.rows = [{"q": " ".join(map(str, line.q)), "height_sq": line.height_sq, "height": h} for line, h in sols]
        rep.results = {"solutions": len(sols)}
    elif a == "member":
        _need(args, "psi", "k", "q1", "q2")
        w = S.find_witness(_lines(args), _psi(args.psi), args.k, args.q1, args.q2)
        rep.results = {"member": w is not None}
        if w is not None:
            sub, sols = w
            rep.results["witness"] = {"plucker": list(sub.plucker), "height_sq": sub.height_sq,
                                      "solutions": [list(s.q) for s in sols]}
    elif a == "fibervol":
        _need(args, "n", "eta")
        base = tuple(float(x) for x in args.base.split(",")) if args.base else (0.0,) * (args.n - 1)
        spec = S.FiberSpec(base, args.eta, args.n)
        est = S.fiber_volume_mc(spec, args.samples or 10**6, args.seed)
        bound = S.fiber_bound(args.n, args.eta)
        rep.results = {"estimate": est.estimate, "stderr": est.stderr, "bound": bound,
                       "passes": est.estimate - 3 * est.stderr <= bound, "provenance": "monte-carlo"}
    elif a == "bound":
        _need(args, "d", "k", "n", "psi", "q1")
        H = _int_list(args.H) if args.H else None
        rep.results = S.limit_sum_bound(_int_list(args.d), args.k, args.n, _psi(args.psi), args.q1, args.q2, H).to_dict()
    elif a == "ratio":
        _need(args, "d", "k", "psi", "q1", "q2", "H")
        est = S.empirical_ratio(_int_list(args.d), args.k, _psi(args.psi), args.q1, args.q2, _int_list(args.H),
                                n=args.n, samples=args.samples or 2000, seed=args.seed)
        rep.results = est.to_dict()


def _fiber(args):
    from .davenport import SemialgebraicFiber

    if args.fiber:
        return SemialgebraicFiber.from_json(Path(args.fiber).read_text())
    if args.disk is not None:
        return SemialgebraicFiber.disk(args.disk)
    raise UsageError("davenport: give --fiber or --disk")


def cmd_davenport(args, rep: Report) -> None:
    from . import davenport as D

    a = args.action
    if a == "reducible":
        _need(args, "d", "H")
        count, bound = D.reducible_count(args.d, args.H), D.reducible_bound(args.d, args.H)
        rep.results = {"d": args.d, "H": args.H, "count": count, "bound": bound, "holds": count <= bound}
        return
    f = _fiber(args)
    rep.results["fiber"] = f.to_dict()
    if a == "count":
        rep.results["count"] = D.lattice_count(f, args.budget or D.GRID_BUDGET)
    elif a == "verify":
        rep.results["report"] = D.davenport_verify(f, args.tol or 0.05, args.seed).to_dict()
    else:
        _need(args, "d", "H")
        rep.results["report"] = D.algebraic_points_check(args.d, args.n, f, args.H).to_dict()


def cmd_verify_all(args, rep: Report) -> int:
    path = Path(args.tests) if args.tests else Path(__file__).resolve().parents[2] / "tests" / "test_acceptance.py"
    if not path.exists():
        raise UsageError(f"acceptance suite not found at {path}")
    proc = subprocess.run([sys.executable, "-m", "pytest", "-q", "-s", "-p", "no:cacheprovider", str(path)],
                          capture_output=True, text=True)
    # progress dots may share a line with captured prints
    lines = [m.group(0) for m in re.finditer(r"criterion \S+: (PASS|FAIL|XFAIL)[^\n]*", proc.stdout)]
    failed = [ln for ln in lines if ": FAIL" in ln]
    rep.rows = [{"line": ln} for ln in lines]
    rep.results = {"criteria_lines": len(lines), "failed": len(failed), "pytest_exit": proc.returncode}
    return 1 if failed or proc.returncode not in (0,) else 0


COMMANDS = {"census": cmd_census, "density": cmd_density, "constants": cmd_constants, "jset": cmd_jset,
            "farey": cmd_farey, "bounds": cmd_bounds, "subspace": cmd_subspace, "davenport": cmd_davenport,
            "verify-all": cmd_verify_all}


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)  # exits with status 2 on bad flags
    rep = Report(_config(args))
    status = 0
    try:
        status = COMMANDS[args.command](args, rep) or 0
    except UsageError as e:
        ap.error(str(e))
    except BudgetExceeded as e:
        rep.budget_exceeded = True
        rep.results.setdefault("error", str(e))
        status = EXIT_BUDGET
    except ValueError as e:
        ap.error(str(e))
    text = rep.render()
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return status


if __name__ == "__main__":
    sys.exit(main())
