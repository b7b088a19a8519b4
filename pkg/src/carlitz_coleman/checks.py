"""Seeded verification suites, shared by the CLI self-test and the test suite.

Each suite returns a :class:`CheckResult`.  Samples that fall outside an
identity's admissibility conditions are counted in ``inadmissible``, never
silently dropped.
"""

from __future__ import annotations

import functools
import time
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from math import ceil, floor

import numpy as np

from .apoly import APoly
from .coleman import ColemanOps, NormSystem, TruncLaurent, coleman_solve, norm_budget
from .errors import AdmissibilityError, BudgetError
from .fields import make_field
from .padic import PadicScalar
from .pairings import DirectLimitElem, Pairings
from .prime import PrimeSpec
from .tower import Tower, TowerElem


@dataclass
class CheckResult:
    name: str
    passed: bool
    samples: int = 0
    failures: int = 0
    inadmissible: int = 0
    detail: dict = field(default_factory=dict)
    seconds: float = 0.0

    def line(self) -> str:
        verdict = "PASS" if self.passed else "FAIL"
        extra = f", inadmissible={self.inadmissible}" if self.inadmissible else ""
        return (f"{self.name}: {verdict} ({self.samples} samples, {self.failures} failures"
                f"{extra}, {self.seconds:.1f}s)")

    def to_json(self, timings: bool = True) -> dict:
        out = asdict(self)
        if not timings:
            out.pop("seconds")
        return out


_TOWERS: dict[tuple, Tower] = {}


def instance(p: int, pi: str = "T", e: int = 1, modulus=None) -> Tower:
    """A cached tower for (p, e, pi), with an optional modulus for F_q."""
    key = (p, e, pi, None if modulus is None else tuple(modulus))
    if key not in _TOWERS:
        _TOWERS[key] = Tower(PrimeSpec(make_field(p, e, modulus), pi))
    return _TOWERS[key]


def random_with_valuation(tower: Tower, rng, n: int, v_min: Fraction, v_max: Fraction,
                          prec: int) -> TowerElem:
    """pi^s * omega_n^t * unit with v = s + t/e_n drawn uniformly from [v_min, v_max]."""
    E = tower.level(n).E
    k = int(rng.integers(ceil(v_min * E), floor(v_max * E) + 1))
    s, t = divmod(k, E)
    u = tower.random_unit(rng, n, prec)
    if t:
        u = u * tower.omega_power(n, t, prec)
    return TowerElem(u.lev, s, u.vec, u.prec)


def random_unit_poly(tower: Tower, rng, deg: int) -> APoly:
    F, pi = tower.prime.F, tower.prime.pi
    while True:
        c = APoly(F, [int(x) for x in rng.integers(0, F.q, size=deg + 1)])
        if not (c % pi).is_zero():
            return c


def _budget(M: int | None, need: int) -> int:
    """The x-truncation to use; an explicit M below the budget is an error."""
    if M is None:
        return need
    if M < need:
        raise BudgetError(f"x-truncation M={M} is below the required budget {need}")
    return M


def _timed(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        t0 = time.perf_counter()
        res = fn(*args, **kwargs)
        res.seconds = time.perf_counter() - t0
        return res
    return wrapper


# --- 1. reciprocity on the omega-line ------------------------------------------------


@_timed
def check_reciprocity_omega(seed: int = 0, samples: int = 100, instances=((3, "T"), (2, "T")),
                            prec: int = 16) -> CheckResult:
    """[a, omega_n]_n = (a, omega_n)_n for random a of valuation >= 2/(q-1)."""
    rng = np.random.default_rng(seed)
    res = CheckResult("C1 reciprocity on the omega-line", True)
    per = {}
    for inst in instances:
        tw = instance(*inst)
        pr = Pairings(tw)
        bound = Fraction(2, tw.prime.q - 1)
        ok = 0
        for i in range(samples):
            n = 1 + i % 2
            a = random_with_valuation(tw, rng, n, bound, bound + 3, prec)
            x = pr.analytic_pair_level(a, tw.omega(n, prec))
            y = pr.kummer_oracle_omega(a, n)
            res.samples += 1
            if x == y:
                ok += 1
            else:
                res.failures += 1
        per[f"q={tw.prime.q},pi={tw.prime.pi}"] = ok
    res.detail["agreements"] = per
    res.passed = res.failures == 0 and res.samples >= 100 * len(instances)
    return res


# --- 2. full pipeline ----------------------------------------------------------------------


def random_system(tower: Tower, rng, L: int, N: int) -> NormSystem:
    """omega^i * prod Phi_c with 0 <= i <= 2 and one or two units c of degree <= 2."""
    i = int(rng.integers(0, 3))
    u = NormSystem.constant(tower, 1, L, N)
    for _ in range(i):
        u = u * NormSystem.omega(tower, L, N)
    for _ in range(int(rng.integers(1, 3))):
        u = u * NormSystem.phi(tower, random_unit_poly(tower, rng, int(rng.integers(0, 3))), L, N)
    return u


@_timed
def check_full_pipeline(seed: int = 1, samples: int = 30, instances=((3, "T"), (2, "T")),
                        prec: int = 16) -> CheckResult:
    """verify_reciprocity on products of omega- and Phi_c-systems."""
    rng = np.random.default_rng(seed)
    res = CheckResult("C2 full-pipeline reciprocity", True)
    reports = []
    for j in range(samples):
        tw = instance(*instances[j % len(instances)])
        pr = Pairings(tw)
        n0 = 1 + j % 2
        a = random_with_valuation(tw, rng, n0, Fraction(2, tw.prime.q - 1),
                                  Fraction(2, tw.prime.q - 1) + 3, prec)
        u = random_system(tw, rng, 5, prec)
        rep = pr.verify_reciprocity(DirectLimitElem(tw, a), u, {"index": j})
        reports.append(rep["verdict"])
        res.samples += 1
        if rep["verdict"] != "PASS":
            res.failures += 1
            res.detail.setdefault("failed", []).append(rep)
    res.passed = res.failures == 0 and res.samples >= 30
    return res


# --- 3. Coleman operators against tower norms and traces -------------------------------------


@_timed
def check_coleman_norm_trace(seed: int = 2, samples: int = 20, inst=(3, "T"), N: int = 17,
                             M: int | None = None) -> CheckResult:
    """(N^k g)(omega_n) = N(g(omega_(n+k))) and the same for traces, k, n in {1, 2}."""
    rng = np.random.default_rng(seed)
    tw = instance(*inst)
    ops = ColemanOps(tw)
    D = tw.prime.q_p
    need_top = N * tw.level(4).E
    need_op = norm_budget(N * tw.level(2).E, N, D, 2)
    M = _budget(M, max(need_top, need_op))
    res = CheckResult("C3 Coleman operators vs tower norms/traces", True, detail={"M": M, "N": N})
    min_prec = None
    for _ in range(samples):
        g = TruncLaurent.random_unit(tw.prime, rng, M, N)
        norms = [g, ops.norm(g), None]
        norms[2] = ops.norm(norms[1])
        traces = [g, ops.trace(g), None]
        traces[2] = ops.trace(traces[1])
        ok = True
        for k in (1, 2):
            for n in (1, 2):
                top = ops.eval_at_omega(g, n + k)
                pairs = [(ops.eval_at_omega(norms[k], n), tw.norm_to(top, n)),
                         (ops.eval_at_omega(traces[k], n), tw.trace_to(top, n, method="orbit"))]
                for lhs, rhs in pairs:
                    d = lhs - rhs
                    prec = min(lhs.abs_prec, rhs.abs_prec)
                    min_prec = prec if min_prec is None else min(min_prec, prec)
                    if prec < 16 or not d.is_zero_within_precision():
                        ok = False
        res.samples += 1
        res.failures += not ok
    res.detail["certified_precision"] = min_prec
    res.passed = res.failures == 0 and res.samples >= 20
    return res


# --- 4. convergence of N-iterates ------------------------------------------------------------


@_timed
def check_ninfty_rate(seed: int = 3, samples: int = 20, inst=(3, "T"), N: int = 6,
                      kmax: int = 4, M_out: int = 5, M: int | None = None) -> CheckResult:
    """N^(k+1) g = N^k g modulo pi^(k+1) for k <= kmax."""
    rng = np.random.default_rng(seed)
    tw = instance(*inst)
    ops = ColemanOps(tw)
    M = _budget(M, norm_budget(M_out, N, tw.prime.q_p, kmax + 1))
    res = CheckResult("C4 N-infinity convergence rate", True, detail={"M": M, "N": N})
    for _ in range(samples):
        g = TruncLaurent.random_unit(tw.prime, rng, M, N)
        its = [g]
        for _ in range(kmax + 1):
            its.append(ops.norm(its[-1]))
        ok = all(its[k + 1].equals(its[k], N=k + 1) for k in range(kmax + 1))
        res.samples += 1
        res.failures += not ok
    res.passed = res.failures == 0 and res.samples >= 20
    return res


# --- 5. Coleman solver round trip --------------------------------------------------------------


@_timed
def check_solver_roundtrip(seed: int = 4, samples: int = 5, instances=((3, "T"), (2, "T")),
                           L: int = 6, N: int = 5) -> CheckResult:
    """Col from u_1..u_6 reproduces u_i modulo pi^k (k = 3) at levels i <= k."""
    rng = np.random.default_rng(seed)
    res = CheckResult("C5 Coleman solver round trip", True)
    certs = []
    for inst in instances:
        tw = instance(*inst)
        ops = ColemanOps(tw)
        for _ in range(samples):
            u = NormSystem.from_top(tw, tw.random_unit(rng, L, N))
            col, k = coleman_solve(ops, u)
            certs.append(k)
            ok = k >= L // 2
            for i in range(1, k + 1):
                d = ops.eval_at_omega(col, i) - u[i]
                if not (d.is_zero_within_precision() and d.abs_prec >= k) and \
                        not (not d.is_zero_within_precision() and d.valuation() >= k):
                    ok = False
            res.samples += 1
            res.failures += not ok
    res.detail["certificates"] = sorted(set(certs))
    res.passed = res.failures == 0
    return res


# --- 6. the logarithm ------------------------------------------------------------------------


@_timed
def check_lambda(seed: int = 5, samples: int = 20, instances=((3, "T"), (2, "T"), (3, "T^2+1")),
                 terms: int = 12, prec: int = 12, upto: int = 8) -> CheckResult:
    """v(c_i) >= -i, lambda*Phi_pi = pi*lambda through tau^upto, v(lambda(a)) = v(a)."""
    from .carlitz import lambda_eval, lambda_residual

    rng = np.random.default_rng(seed)
    res = CheckResult("C6 lambda contract", True)
    for inst in instances:
        tw = instance(*inst)
        series = tw.cmap.lambda_coeffs(terms, prec)
        vals = series.valuations()
        if any(v < -i for i, v in enumerate(vals)):
            res.failures += 1
        resid = lambda_residual(tw.cmap, series, upto)
        if not all(c.is_zero_within_precision() for c in resid.coeffs):
            res.failures += 1
        res.detail[f"valuations q={tw.prime.q},pi={tw.prime.pi}"] = vals
        res.detail[f"residual_prec q={tw.prime.q},pi={tw.prime.pi}"] = [
            c.abs_prec if c.abs_prec != float("inf") else "exact" for c in resid.coeffs]
        bound = Fraction(1, tw.prime.q - 1)
        for i in range(samples):
            n = 1 + i % 2
            E = tw.level(n).E
            a = random_with_valuation(tw, rng, n, bound + Fraction(1, E), bound + 2, prec)
            lam = lambda_eval(a, series, prec)
            res.samples += 1
            if lam.valuation() != a.valuation():
                res.failures += 1
    res.passed = res.failures == 0
    return res


# --- 7. tower metrics ---------------------------------------------------------------------------


@_timed
def check_tower_metrics(seed: int = 6, samples: int = 100, instances=((3, "T"), (2, "T"), (3, "T^2+1")),
                        prec: int = 10) -> CheckResult:
    """v(psi_n'(omega_n)) = n - 1/(q_p-1) and v(Tr x) >= floor(v(x) + v(D_n))."""
    rng = np.random.default_rng(seed)
    res = CheckResult("C7 tower metrics", True)
    for inst in instances:
        tw = instance(*inst)
        top = 3 if tw.prime.q_p <= 3 else 2
        for n in range(1, top + 1):
            v = tw.different_valuation(n)
            res.detail[f"different q={tw.prime.q},pi={tw.prime.pi},n={n}"] = str(v)
            if v != n - Fraction(1, tw.prime.q_p - 1):
                res.failures += 1
    tw = instance(*instances[0])
    diff = {n: tw.different_valuation(n) for n in (1, 2, 3)}
    for i in range(samples):
        n = 1 + i % 3
        x = random_with_valuation(tw, rng, n, Fraction(0), Fraction(4), prec)
        bound = floor(x.valuation() + diff[n])
        t = tw.trace_to(x, 0)
        res.samples += 1
        if t.is_zero_within_precision():
            ok = t.abs_prec >= bound
        else:
            ok = t.valuation() >= bound
        res.failures += not ok
    res.passed = res.failures == 0
    return res


# --- 8. dlog commutation -------------------------------------------------------------------


@_timed
def check_dlog(seed: int = 7, samples: int = 20, instances=((3, "T"), (2, "T")), N: int = 8,
               M_out: int = 64) -> CheckResult:
    """T(dlog g) = pi * dlog(N g) through x-truncation M_out."""
    rng = np.random.default_rng(seed)
    res = CheckResult("C8 dlog commutation", True)
    for j in range(samples):
        tw = instance(*instances[j % len(instances)])
        ops = ColemanOps(tw)
        M = norm_budget(M_out, N, tw.prime.q_p, 1)
        g = TruncLaurent.random_unit(tw.prime, rng, M, N)
        lhs = ops.trace(g.dlog())
        rhs = ops.norm(g).dlog().scale(tw.prime.eta)
        ok = lhs.M >= M_out and rhs.M >= M_out and lhs.equals(rhs, M=M_out)
        res.samples += 1
        res.failures += not ok
    res.passed = res.failures == 0 and res.samples >= 20
    return res


# --- 9. structure of the Kummer pairing -----------------------------------------------------


@_timed
def check_kummer_structure(seed: int = 8, samples: int = 12, instances=((3, "T"), (2, "T")),
                           prec: int = 20) -> CheckResult:
    """Diagonal and root-of-unity vanishing, (c, 1-b) = (bc/(1-b), 1/b), and the threshold."""
    rng = np.random.default_rng(seed)
    res = CheckResult("C9 Kummer structure", True)
    tally = {k: [0, 0, 0] for k in ("diagonal", "roots_of_unity", "one_minus_x", "threshold")}

    def record(kind, outcome):
        # outcome: True (holds), False (fails), None (inadmissible)
        slot = 0 if outcome else (2 if outcome is None else 1)
        tally[kind][slot] += 1
        if outcome is None:
            res.inadmissible += 1
        else:
            res.samples += 1
            res.failures += not outcome

    for inst in instances:
        tw = instance(*inst)
        pr = Pairings(tw)
        qp = tw.prime.q_p
        for j in range(samples):
            # diagonal: u_n = a_n = N(u_m)
            n = 1 + j % 2
            m = n + int(rng.integers(0, 2))
            # omega_m^k has norm omega_n^k; pick k so a = u_n clears the level-m bounds
            En, Em = tw.level(n).E, tw.level(m).E
            lo = max(Fraction(2, tw.prime.q - 1) + Fraction(1, En),
                     (m + 1 + Fraction(1, qp - 1) + Fraction(1, Em)) / tw.prime.q)
            k = int(rng.integers(ceil(lo * En), ceil(lo * En) + 2 * En))
            um = tw.random_unit(rng, m, prec) * tw.omega(m, prec) ** k
            un = tw.norm_to(um, n)
            try:
                record("diagonal", pr.kummer_finite(un, un, um).is_zero())
            except AdmissibilityError:
                record("diagonal", None)

            # constant roots of unity
            zeta = int(rng.integers(1, tw.prime.q))
            lo = max(Fraction(2, tw.prime.q - 1) + Fraction(1, En),
                     (n + 1 + Fraction(1, qp - 1) + Fraction(1, En)) / tw.prime.q)
            a = random_with_valuation(tw, rng, n, lo, lo + 2, prec)
            zs = NormSystem.constant(tw, zeta, 4, prec)
            z_n = tw.scalar(n, zeta, prec)
            try:
                fin = pr.kummer_finite(a, z_n, z_n)
                record("roots_of_unity", fin.is_zero() and pr.kummer_pair(DirectLimitElem(tw, a), zs).is_zero())
            except AdmissibilityError:
                record("roots_of_unity", None)

            # (c, 1-b)_n = (bc/(1-b), 1/b)_n at m = n; for q = 2 the band below is empty at n = 1
            n1 = 2 if tw.prime.q == 2 else n
            E1 = tw.level(n1).E
            lo = max(Fraction(2, tw.prime.q - 1) + Fraction(1, E1),
                     (n1 + 1 + Fraction(1, qp - 1) + Fraction(1, E1)) / tw.prime.q)
            c = random_with_valuation(tw, rng, n1, lo, n1 + Fraction(1, qp - 1), prec)
            # over F_2 every unit is 1 mod omega, so 1 - b is a unit only for non-unit b
            t = int(rng.integers(1 if qp == 2 else 0, 3))
            b = tw.random_unit(rng, n1, prec) * tw.omega(n1, prec) ** t
            one = tw.one(n1, prec)
            try:
                if (one - b).is_zero_within_precision() or (one - b).valuation() != 0:
                    raise AdmissibilityError("1 - b must be a unit")
                lhs = pr.kummer_finite(c, one - b, one - b)
                rhs = pr.kummer_finite(b * c / (one - b), b.inv(), b.inv())
                record("one_minus_x", lhs == rhs)
            except AdmissibilityError:
                record("one_minus_x", None)

            # vanishing above n + 1/(q_p - 1)
            thr = n + Fraction(1, qp - 1)
            a = random_with_valuation(tw, rng, n, thr + Fraction(1, tw.level(n).E), thr + 2, prec)
            ok = pr.kummer_oracle_omega(a, n).is_zero() and \
                pr.analytic_pair_level(a, tw.omega(n, prec)).is_zero()
            record("threshold", ok)
    res.detail["tally(hold, fail, inadmissible)"] = tally
    res.passed = res.failures == 0 and all(v[0] > 0 for v in tally.values())
    return res


ALL_CHECKS = [check_reciprocity_omega, check_full_pipeline, check_coleman_norm_trace,
              check_ninfty_rate, check_solver_roundtrip, check_lambda, check_tower_metrics,
              check_dlog, check_kummer_structure]


def run_all(seed: int = 0) -> list[CheckResult]:
    return [chk(seed=seed + i) for i, chk in enumerate(ALL_CHECKS)]
