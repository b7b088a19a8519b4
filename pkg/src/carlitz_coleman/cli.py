"""Command-line front end.

    carlitz-coleman setup [--p 3 --pi T --L 4]
    carlitz-coleman compute <object> [options]
    carlitz-coleman selftest [--config run.cfg]
    carlitz-coleman verify --a "T*w" --n 1 --system omega

Every command prints one JSON document.  Exit codes: 0 success, 1 a
verification failed, 2 usage or configuration error.  If the environment
variable CARLITZ_COLEMAN_REPORT_DIR is set, selftest and verify also write
their report there, named by config hash.
"""

from __future__ import annotations

import argparse
import hashlib
import inspect
import json
import os
import re
import sys
from dataclasses import asdict, dataclass, fields
from fractions import Fraction

from . import checks
from .apoly import APoly, format_poly, parse_poly
from .carlitz import lambda_eval
from .coleman import ColemanOps, NormSystem, TruncLaurent, coleman_solve
from .errors import BudgetError, CarlitzError
from .pairings import DirectLimitElem, Pairings
from .tower import Tower, TowerElem

REPORT_ENV = "CARLITZ_COLEMAN_REPORT_DIR"

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


# --- configuration -----------------------------------------------------------------------


@dataclass
class InstanceConfig:
    p: int = 3
    e: int = 1
    modulus: str | None = None
    pi: str = "T"
    N: int = 48
    M: int = 256
    L: int = 4
    seed: int = 0
    samples: int | None = None

    def canonical(self) -> str:
        return json.dumps(asdict(self), sort_keys=True, separators=(",", ":"))

    def digest(self) -> str:
        return hashlib.sha256(self.canonical().encode()).hexdigest()[:16]

    def modulus_digits(self):
        if self.modulus is None:
            return None
        return tuple(int(t) for t in self.modulus.strip("[]").split(",") if t.strip())

    def tower(self) -> Tower:
        try:
            return checks.instance(self.p, self.pi, self.e, self.modulus_digits())
        except (CarlitzError, ValueError) as exc:
            raise UsageError(f"invalid instance (p={self.p}, e={self.e}, pi={self.pi}): {exc}") from exc


_INT_KEYS = {f.name for f in fields(InstanceConfig)} - {"pi", "modulus"}


def read_config_file(path: str) -> dict:
    """key = value lines; '#' starts a comment, string values may be quoted."""
    out = {}
    try:
        text = open(path).read()
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from exc
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key = value")
        key, val = (t.strip() for t in line.split("=", 1))
        out[key] = val.strip("\"'")
    return out


def build_config(args) -> tuple[InstanceConfig, set]:
    """File values first, then flags; returns the config and the keys set explicitly."""
    raw = read_config_file(args.config) if args.config else {}
    for f in fields(InstanceConfig):
        v = getattr(args, f.name, None)
        if v is not None:
            raw[f.name] = v
    known = {f.name for f in fields(InstanceConfig)}
    unknown = set(raw) - known
    if unknown:
        raise UsageError(f"unknown config keys: {', '.join(sorted(unknown))}")
    vals = {}
    for k, v in raw.items():
        if k in _INT_KEYS:
            try:
                vals[k] = int(v)
            except ValueError:
                raise UsageError(f"config key {k} needs an integer, got {v!r}") from None
        else:
            vals[k] = str(v)
    cfg = InstanceConfig(**vals)
    if cfg.N < 1 or cfg.M < 1 or cfg.L < 1:
        raise UsageError("N, M and L must be positive")
    return cfg, set(raw)


# --- text formats ----------------------------------------------------------------------------


def _split_terms(text: str) -> list[str]:
    """Split at top-level + and - (a '-' right after '^' belongs to the exponent)."""
    terms, cur, depth = [], "", 0
    for ch in text:
        depth += (ch == "(") - (ch == ")")
        if depth == 0 and ch in "+-" and cur and not cur.endswith("^"):
            terms.append(cur)
            cur = "" if ch == "+" else "-"
            continue
        cur += ch
    if cur:
        terms.append(cur)
    return terms


def _split_factors(term: str) -> list[str]:
    out, cur, depth = [], "", 0
    for ch in term:
        depth += (ch == "(") - (ch == ")")
        if ch == "*" and depth == 0:
            out.append(cur)
            cur = ""
        else:
            cur += ch
    return out + [cur]


def parse_terms(F, text: str, var: str) -> dict[int, APoly]:
    """Parse a sum of products like "(T+1)*x^2 - x^-1 + 2" into {exponent: coefficient}."""
    text = text.replace(" ", "")
    if not text:
        raise UsageError("empty expression")
    out: dict[int, APoly] = {}
    power = re.compile(rf"{var}(?:\^(-?\d+))?")
    for term in _split_terms(text):
        neg = term.startswith("-")
        c, k = APoly.const(F, 1), 0
        for factor in _split_factors(term[1:] if neg else term):
            m = power.fullmatch(factor)
            if m:
                k += int(m.group(1) or 1)
                continue
            if factor.startswith("(") and factor.endswith(")"):
                factor = factor[1:-1]
            try:
                c = c * parse_poly(F, factor)
            except CarlitzError as exc:
                raise UsageError(f"cannot parse {term!r}: {exc}") from exc
        out[k] = out.get(k, APoly.zero(F)) + (-c if neg else c)
    return out


def parse_series(tower: Tower, text: str, N: int, M: int) -> TruncLaurent:
    terms = parse_terms(tower.prime.F, text, "x")
    lo, hi = min(terms), max(terms)
    coeffs = [terms.get(i, APoly.zero(tower.prime.F)) for i in range(lo, hi + 1)]
    return TruncLaurent.from_apolys(tower.prime, coeffs, N, M, xpow=lo).normalized()


def parse_element(tower: Tower, text: str, n: int, prec: int) -> TowerElem:
    """An element of K_n written in w = omega_n, e.g. "T*w + w^2" or "w^-1"."""
    terms = parse_terms(tower.prime.F, text, "w")
    lo = min(terms)
    shift = -lo if lo < 0 else 0
    coeffs = [APoly.zero(tower.prime.F)] * (max(terms) + shift + 1)
    for k, c in terms.items():
        coeffs[k + shift] = c
    # powers of w at or above e_n are reduced by the tower arithmetic
    x = tower.zero(n)
    for i, c in enumerate(coeffs):
        if not c.is_zero():
            mono = tower.omega_power(n, i, prec) if i else tower.one(n, prec)
            x = x + mono.scale(c)
    if shift:
        x = x / tower.omega_power(n, shift, prec)
    return x


def parse_system(tower: Tower, spec: str, L: int, N: int) -> NormSystem:
    """Products like "omega^2*phi(T+1)*const(2)"; "omega" and "phi(c)" are the basic systems."""
    u = NormSystem.constant(tower, 1, L, N)
    for factor in re.findall(r"[a-z]+(?:\([^)]*\))?(?:\^\d+)?", spec.replace(" ", "")):
        m = re.fullmatch(r"([a-z]+)(?:\(([^)]*)\))?(?:\^(\d+))?", factor)
        name, arg, k = m.group(1), m.group(2), int(m.group(3) or 1)
        if name == "omega":
            base = NormSystem.omega(tower, L, N)
        elif name == "phi" and arg:
            base = NormSystem.phi(tower, parse_poly(tower.prime.F, arg), L, N)
        elif name == "const" and arg:
            base = NormSystem.constant(tower, int(arg), L, N)
        else:
            raise UsageError(f"unknown unit factor {factor!r}; use omega, phi(c) or const(z)")
        for _ in range(k):
            u = u * base
    return u


def load_units(tower: Tower, path: str, N: int) -> NormSystem:
    """JSON {"units": ["expr in w at level 1", "... level 2", ...]} with u_(i-1) = N(u_i)."""
    try:
        obj = json.load(open(path))
    except (OSError, ValueError) as exc:
        raise UsageError(f"cannot read units file {path}: {exc}") from exc
    units = [parse_element(tower, s, i, N) for i, s in enumerate(obj["units"], 1)]
    return NormSystem(tower, units)


def _jsonable(obj):
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if hasattr(obj, "to_json"):
        return _jsonable(obj.to_json())
    if isinstance(obj, float) and obj == float("inf"):
        return "inf"
    if hasattr(obj, "item"):
        return obj.item()
    return obj


def emit(doc: dict, stream=None) -> None:
    stream = stream or sys.stdout
    stream.write(json.dumps(_jsonable(doc), indent=2, sort_keys=True) + "\n")


# --- commands --------------------------------------------------------------------------------


def cmd_setup(cfg: InstanceConfig, args) -> int:
    tw = cfg.tower()
    prime = tw.prime
    levels = []
    for n in range(1, cfg.L + 1):
        psi = tw.cmap.psi(n)
        row = {"n": n, "e_n": psi.degree, "different_valuation": tw.different_valuation(n)}
        row["psi"] = psi.format() if psi.degree <= 64 else f"<degree {psi.degree}>"
        levels.append(row)
    notes = []
    if prime.q_p == 2:
        notes.append("q_p = 2: e_1 = 1, so K_1 = K and omega_1 = -pi")
    emit({"config": asdict(cfg), "config_hash": cfg.digest(), "q": prime.q, "q_p": prime.q_p,
          "d": prime.d, "pi": format_poly(prime.pi), "levels": levels, "notes": notes})
    return EXIT_OK


def _series_arg(tw, cfg, args, explicit=frozenset()) -> TruncLaurent:
    if args.series_json:
        try:
            return TruncLaurent.from_json(tw.prime, json.load(open(args.series_json)))
        except (OSError, ValueError, KeyError) as exc:
            raise UsageError(f"cannot read series file: {exc}") from exc
    if not args.series:
        raise UsageError("this object needs --series or --series-json")
    # a written-out series is a Laurent polynomial, exact in x unless --M says otherwise
    return parse_series(tw, args.series, cfg.N, cfg.M if "M" in explicit else None)


def _system_arg(tw, cfg, args) -> NormSystem:
    if args.units:
        return load_units(tw, args.units, cfg.N)
    return parse_system(tw, args.system or "omega", cfg.L, cfg.N)


def _series_doc(s: TruncLaurent) -> dict:
    doc = s.to_json()
    trunc = "exact in x" if s.M is None else f"x-truncation {s.M}"
    doc["certified"] = f"coefficients modulo pi^{s.N}, {trunc}"
    return doc


def cmd_compute(cfg: InstanceConfig, args, explicit: set = frozenset()) -> int:
    tw = cfg.tower()
    prime, obj = tw.prime, args.object
    ops = ColemanOps(tw)
    out: dict = {"object": obj, "config_hash": cfg.digest()}
    if obj == "torsion":
        a = parse_poly(prime.F, args.a) if args.a else prime.pi ** args.n
        f = tw.cmap.additive_poly(a)
        out.update(a=format_poly(a), degree=f.degree, poly=f.format(), terms=f.to_json(),
                   certified="exact")
    elif obj == "psi":
        f = tw.cmap.psi(args.n)
        out.update(n=args.n, degree=f.degree, poly=f.format(), terms=f.to_json(), certified="exact")
    elif obj == "lambda":
        series = tw.cmap.lambda_coeffs(args.terms - 1, cfg.N)
        out.update(coeffs=[c.to_json() for c in series.coeffs], valuations=series.valuations(),
                   certified=f"relative precision pi^{cfg.N} per coefficient")
        if args.a:
            a = parse_element(tw, args.a, args.n, cfg.N)
            out["lambda_a"] = lambda_eval(a, tw.cmap.lambda_coeffs(args.terms - 1, cfg.N), cfg.N).to_json()
    elif obj in ("norm-op", "trace-op"):
        g = _series_arg(tw, cfg, args, explicit)
        for _ in range(args.k):
            g = ops.norm(g) if obj == "norm-op" else ops.trace(g)
        out["series"] = _series_doc(g)
        out["text"] = _format_series(g)
    elif obj == "ninfty":
        g = _series_arg(tw, cfg, args, explicit)
        fixed, iters = ops.ninfty(g, args.target)
        out.update(series=_series_doc(fixed), text=_format_series(fixed), iterations=iters,
                   target=args.target)
    elif obj == "solve":
        u = _system_arg(tw, cfg, args)
        col, k = coleman_solve(ops, u)
        out.update(series=_series_doc(col), text=_format_series(col), certificate=k,
                   certified=f"Col(omega_i) = u_i modulo pi^{k} for i <= {k}")
    elif obj in ("pair-analytic", "pair-kummer"):
        pr = Pairings(tw, max_level=max(cfg.L, 8))
        a = DirectLimitElem(tw, parse_element(tw, args.a or "w", args.n, cfg.N))
        u = _system_arg(tw, cfg, args)
        val = pr.analytic_pair(a, u) if obj == "pair-analytic" else pr.kummer_pair(a, u)
        out["value"] = val
    else:  # argparse restricts the choices
        raise UsageError(f"unknown object {obj}")
    emit(out)
    return EXIT_OK


def _format_series(s: TruncLaurent) -> str:
    terms = []
    for i, c in enumerate(s.coeff_apolys()):
        if c.is_zero():
            continue
        k = i + s.xpow
        mono = "" if k == 0 else ("x" if k == 1 else f"x^{k}")
        cs = format_poly(c)
        if not mono:
            terms.append(cs)
        elif cs == "1":
            terms.append(mono)
        else:
            terms.append(f"({cs})*{mono}" if "+" in cs else f"{cs}*{mono}")
    return "+".join(terms) or "0"


def _check_kwargs(fn, cfg: InstanceConfig, explicit: set) -> dict:
    params = inspect.signature(fn).parameters
    inst = (cfg.p, cfg.pi, cfg.e, cfg.modulus_digits())
    kw = {"seed": cfg.seed + list(checks.ALL_CHECKS).index(fn)}
    if "instances" in params:
        kw["instances"] = (inst,)
    if "inst" in params:
        kw["inst"] = inst
    if "M" in params and "M" in explicit:
        kw["M"] = cfg.M
    if cfg.samples is not None and "samples" in params:
        kw["samples"] = cfg.samples
    return kw


def run_selftest(cfg: InstanceConfig, explicit: set) -> dict:
    results = []
    for fn in checks.ALL_CHECKS:
        try:
            res = fn(**_check_kwargs(fn, cfg, explicit))
            if cfg.samples is not None and res.failures == 0:
                # a reduced sample count is judged on failures alone
                res.passed = True
                res.detail["reduced_samples"] = True
        except BudgetError as exc:
            res = checks.CheckResult(_check_name(fn), False, failures=1,
                                     detail={"error": "budget", "message": str(exc)})
        except CarlitzError as exc:
            res = checks.CheckResult(_check_name(fn), False, failures=1,
                                     detail={"error": type(exc).__name__, "message": str(exc)})
        results.append(res)
    payload = {"config": asdict(cfg), "config_hash": cfg.digest(),
               "checks": [r.to_json(timings=False) for r in results],
               "verdict": "PASS" if all(r.passed for r in results) else "FAIL"}
    payload["payload_hash"] = hashlib.sha256(
        json.dumps(_jsonable(payload), sort_keys=True).encode()).hexdigest()[:16]
    payload["timings"] = {r.name: round(r.seconds, 3) for r in results}
    return payload


_NAMES = {
    "check_reciprocity_omega": "C1 reciprocity on the omega-line",
    "check_full_pipeline": "C2 full-pipeline reciprocity",
    "check_coleman_norm_trace": "C3 Coleman operators vs tower norms/traces",
    "check_ninfty_rate": "C4 N-infinity convergence rate",
    "check_solver_roundtrip": "C5 Coleman solver round trip",
    "check_lambda": "C6 lambda contract",
    "check_tower_metrics": "C7 tower metrics",
    "check_dlog": "C8 dlog commutation",
    "check_kummer_structure": "C9 Kummer structure",
}


def _check_name(fn) -> str:
    return _NAMES.get(fn.__name__, fn.__name__)


def _write_report(doc: dict, kind: str) -> None:
    folder = os.environ.get(REPORT_ENV)
    if not folder:
        return
    os.makedirs(folder, exist_ok=True)
    with open(os.path.join(folder, f"{kind}-{doc['config_hash']}.json"), "w") as fh:
        emit(doc, fh)


def cmd_selftest(cfg: InstanceConfig, args, explicit: set) -> int:
    report = run_selftest(cfg, explicit)
    _write_report(report, "selftest")
    emit(report)
    for c in report["checks"]:
        print(f"{c['name']}: {'PASS' if c['passed'] else 'FAIL'}", file=sys.stderr)
    return EXIT_OK if report["verdict"] == "PASS" else EXIT_FAIL


def cmd_verify(cfg: InstanceConfig, args) -> int:
    tw = cfg.tower()
    pr = Pairings(tw, max_level=max(cfg.L, 8))
    a = DirectLimitElem(tw, parse_element(tw, args.a or "T*w", args.n, cfg.N))
    u = _system_arg(tw, cfg, args)
    rep = pr.verify_reciprocity(a, u, {"a": args.a or "T*w", "n": args.n,
                                       "system": args.system or "omega"})
    rep["config_hash"] = cfg.digest()
    _write_report(rep, "verify")
    emit(rep)
    return EXIT_OK if rep["verdict"] == "PASS" else EXIT_FAIL


# --- argument parsing ----------------------------------------------------------------------


OBJECTS = ["torsion", "psi", "lambda", "norm-op", "trace-op", "ninfty", "solve",
           "pair-analytic", "pair-kummer"]


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("instance")
    g.add_argument("--config", help="key = value config file (flags override it)")
    g.add_argument("--p", type=int)
    g.add_argument("--e", type=int)
    g.add_argument("--modulus", help="F_q modulus as a digit list, low to high")
    g.add_argument("--pi", help='prime of A, e.g. "T" or "T^2+1"')
    g.add_argument("--N", type=int, help="pi-adic precision")
    g.add_argument("--M", type=int, help="x-truncation")
    g.add_argument("--L", type=int, help="top tower level")
    g.add_argument("--seed", type=int)
    g.add_argument("--samples", type=int, help="override every suite's sample count")

    ap = argparse.ArgumentParser(prog="carlitz-coleman", description=__doc__.split("\n\n")[0])
    sub = ap.add_subparsers(dest="command", required=True)
    sub.add_parser("setup", parents=[common], help="print the instance summary")
    c = sub.add_parser("compute", parents=[common], help="compute one object")
    c.add_argument("object", choices=OBJECTS)
    c.add_argument("--a", help='polynomial in T (torsion) or element in w = omega_n')
    c.add_argument("--n", type=int, default=1, help="tower level")
    c.add_argument("--k", type=int, default=1, help="number of operator applications")
    c.add_argument("--terms", type=int, default=4, help="number of lambda coefficients")
    c.add_argument("--target", type=int, default=8, help="ninfty precision target")
    c.add_argument("--series", help='Laurent series in x, e.g. "x+1"')
    c.add_argument("--series-json", help="series file {xpow, coeffs, M, N}")
    c.add_argument("--system", help='unit system, e.g. "omega*phi(T+1)"')
    c.add_argument("--units", help="JSON file of units u_1..u_L")
    sub.add_parser("selftest", parents=[common], help="run every verification suite")
    v = sub.add_parser("verify", parents=[common], help="compare both pairings on one input")
    v.add_argument("--a", help="element in w = omega_n (default T*w)")
    v.add_argument("--n", type=int, default=1)
    v.add_argument("--system", help='unit system (default "omega")')
    v.add_argument("--units", help="JSON file of units u_1..u_L")
    return ap


def main(argv=None) -> int:
    ap = _parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        cfg, explicit = build_config(args)
        if args.command == "setup":
            return cmd_setup(cfg, args)
        if args.command == "compute":
            return cmd_compute(cfg, args, explicit)
        if args.command == "selftest":
            return cmd_selftest(cfg, args, explicit)
        return cmd_verify(cfg, args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except BudgetError as exc:
        emit({"error": "budget", "message": str(exc)})
        return EXIT_FAIL
    except CarlitzError as exc:
        emit({"error": type(exc).__name__, "message": str(exc)})
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
