"""The two sides of the explicit reciprocity law.

Analytic side:  [a, u] = Tr_n(pi^-n * lambda(a_n) * dlog Col_u(omega_n)) . omega_n
Kummer side:    (a, omega_n)_n from the norm symbol, which acts on torsion by
                Phi_{v^-1}; for general u the first argument is rewritten as
                a_n * omega_n * dlog Col_u(omega_n) and paired with omega.

Values are :class:`TorsionValue` objects, i.e. residues c with the value
Phi_c(omega_level), always compared after canonicalisation.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction

from .carlitz import LambdaSeries, lambda_eval, lambda_terms_needed
from .coleman import ColemanOps, NormSystem, TruncLaurent, coleman_solve
from .errors import AdmissibilityError, ConsistencyError, PrecisionError
from .padic import PadicScalar
from .prime import PrimeSpec
from .tower import TorsionValue, Tower, TowerElem


@dataclass
class PairingValue:
    """A torsion value together with the level it was computed at."""

    value: TorsionValue
    computed_level: int
    details: dict = field(default_factory=dict, compare=False)

    def __eq__(self, other):
        return isinstance(other, PairingValue) and self.value == other.value

    def is_zero(self) -> bool:
        return self.value.is_zero()

    def to_json(self) -> dict:
        return {"level": self.value.level, "c": self.value.to_json()["c"],
                "computed_level": self.computed_level}


class DirectLimitElem:
    """The class of a_0 in lim-> K_n, with a_n = Phi_pi^(n - N0)(a_0)."""

    def __init__(self, tower: Tower, a0: TowerElem):
        self.tower = tower
        self.base_level = a0.lev.n
        self.a0 = a0
        self._cache = {self.base_level: a0}

    def at(self, n: int) -> TowerElem:
        if n < self.base_level:
            raise AdmissibilityError(f"a is only defined from level {self.base_level}")
        if n not in self._cache:
            prev = self.at(n - 1)
            self._cache[n] = self.tower.phi_apply(self.tower.prime.pi, self.tower.embed(prev, n))
        return self._cache[n]

    def is_zero(self) -> bool:
        """True for torsion base elements (their pushes vanish)."""
        a0 = self.a0
        if a0.is_zero_within_precision():
            return True
        check = self.tower.phi_apply(self.tower.prime.pi ** self.base_level, a0)
        return check.is_zero_within_precision()

    def valuation(self, n: int) -> Fraction:
        a = self.at(n)
        return a.valuation()

    def growth_constant(self, max_level: int) -> tuple[int, Fraction]:
        """(n1, c) with v(a_n) = n - c for all n >= n1.

        Once v(a_n) > 1/(q_p - 1) the term pi*a_n dominates Phi_pi(a_n), so
        each push adds exactly one to the valuation.
        """
        bound = Fraction(1, self.tower.prime.q_p - 1)
        for n in range(self.base_level, max_level + 1):
            v = self.valuation(n)
            if v > bound:
                return n, n - v
        raise PrecisionError(f"valuation did not pass 1/(q_p-1) below level {max_level}")

    def __repr__(self):
        return f"DirectLimitElem(level={self.base_level}, a0={self.a0!r})"


class Pairings:
    """Shared context: tower, Coleman operators and a lambda-series cache."""

    def __init__(self, tower: Tower, max_level: int = 8, norm_method: str = "orbit",
                 orbit_limit: int = 64):
        self.tower = tower
        self.prime: PrimeSpec = tower.prime
        self.ops = ColemanOps(tower)
        self.max_level = max_level
        self.norm_method = norm_method
        self.orbit_limit = orbit_limit
        self._lambda: LambdaSeries | None = None
        self._lambda_key = (0, 0)

    # --- helpers ------------------------------------------------------------------

    def lambda_series(self, terms: int, prec: int) -> LambdaSeries:
        t0, p0 = self._lambda_key
        if self._lambda is None or t0 < terms or p0 < prec:
            self._lambda_key = (max(terms, t0), max(prec, p0))
            self._lambda = self.tower.cmap.lambda_coeffs(*self._lambda_key)
        return self._lambda

    def lam(self, a: TowerElem, target: int) -> TowerElem:
        v = a.valuation()
        J = lambda_terms_needed(self.prime.q, v, target)
        return lambda_eval(a, self.lambda_series(J, target + J + 2), target)

    def _omega_split(self, u: TowerElem) -> tuple[int, TowerElem]:
        """u = omega^i * U with U a unit."""
        n = u.lev.n
        i = int(u.valuation() * u.lev.E)
        if i == 0:
            return 0, u
        w = self.tower.omega(n, u.abs_prec + 2)
        return i, u * w ** (-i)

    def dlog_domega(self, u: TowerElem) -> TowerElem:
        """i/omega + U'(omega)/U(omega) from the polynomial representative of U."""
        tw, ops = self.tower, self.ops
        n = u.lev.n
        i, U = self._omega_split(u)
        rep = ops.poly_rep(U)
        w = tw.omega(n, rep.N)
        dU = ops.eval_at(rep.derivative(), w) if rep.length > 1 else tw.zero(n)
        out = dU / U
        if i:
            out = out + w.inv().scale(PadicScalar.from_int(self.prime, i))
        return out

    def dlog_col_at(self, col: TruncLaurent, n: int) -> TowerElem:
        """(Col'/Col)(omega_n)."""
        ops = self.ops
        num = ops.eval_at_omega(col.derivative(), n) if col.length > 1 or col.xpow else None
        den = ops.eval_at_omega(col, n)
        if num is None:
            return self.tower.zero(n)
        return num / den

    def _trace_residue(self, x: TowerElem, n: int, what: str) -> PadicScalar:
        t = self.tower.trace_to(x, 0).to_scalar()
        if t.abs_prec < n:
            raise PrecisionError(f"{what}: trace known to pi^{t.abs_prec}, need pi^{n}")
        if not t.is_zero_within_precision() and t.val < 0:
            raise ConsistencyError(f"{what}: trace is not integral (valuation {t.val})")
        return t

    def _scalar_to_torsion(self, t: PadicScalar, n: int) -> TorsionValue:
        if t.is_zero_within_precision() and (t.is_exact_zero() or t.val >= n):
            return TorsionValue.zero(self.prime)
        return TorsionValue(self.prime, n, t.residue(n))

    def _work_prec(self, n: int, extra: int = 4) -> int:
        return 2 * n + extra

    # --- analytic side ----------------------------------------------------------------

    def analytic_pair_level(self, a: TowerElem, u: TowerElem) -> PairingValue:
        """[a, u]_n = Tr_n(pi^-n lambda(a) dlog u/d omega_n) . omega_n."""
        n = a.lev.n
        if a.is_exact_zero():
            return PairingValue(TorsionValue.zero(self.prime), n)
        if a.valuation() < Fraction(2, self.prime.q - 1):
            raise AdmissibilityError("analytic pairing needs v(a) >= 2/(q-1)")
        if u.lev.n != n:
            u = self.tower.embed(u, n) if u.lev.n < n else u
        W = min(a.abs_prec, self._work_prec(n))
        lam = self.lam(a, W)
        x = (lam * self.dlog_domega(u)).div_by_pi_power(n)
        t = self._trace_residue(x, n, "analytic pairing")
        return PairingValue(self._scalar_to_torsion(t, n), n, {"trace_prec": t.abs_prec})

    def analytic_level_for(self, a: DirectLimitElem) -> int:
        bound = Fraction(2, self.prime.q - 1)
        for n in range(max(a.base_level, 1), self.max_level + 1):
            if a.valuation(n) >= bound:
                return n
        raise AdmissibilityError(f"v(a_n) stays below 2/(q-1) up to level {self.max_level}")

    def col_of(self, u: NormSystem, n: int) -> TruncLaurent:
        if u.col is not None:
            return u.col
        col, k = coleman_solve(self.ops, u)
        if n > k:
            raise PrecisionError(f"Coleman series certified to level {k}, need level {n}")
        return col

    def analytic_pair(self, a: DirectLimitElem, u: NormSystem, n: int | None = None,
                      check_stability: bool = True) -> PairingValue:
        if a.is_zero():
            return PairingValue(TorsionValue.zero(self.prime), a.base_level, {"zero_limit": True})
        if n is None:
            n = self.analytic_level_for(a)
        val = self._analytic_at(a, u, n)
        if check_stability:
            again = self._analytic_at(a, u, n + 1)
            if again != val:
                raise ConsistencyError(f"analytic pairing unstable between levels {n} and {n + 1}")
            val.details["stability"] = True
        return val

    def _analytic_at(self, a: DirectLimitElem, u: NormSystem, n: int) -> PairingValue:
        an = a.at(n)
        if an.is_zero_within_precision():
            return PairingValue(TorsionValue.zero(self.prime), n)
        col = self.col_of(u, n)
        W = min(an.abs_prec, self._work_prec(n))
        lam = self.lam(an, W)
        x = (lam * self.dlog_col_at(col, n)).div_by_pi_power(n)
        t = self._trace_residue(x, n, "analytic pairing")
        return PairingValue(self._scalar_to_torsion(t, n), n, {"trace_prec": t.abs_prec})

    # --- Kummer side ------------------------------------------------------------------

    def oracle_level(self, a: DirectLimitElem, n: int) -> int:
        """Smallest m >= n satisfying the three valuation conditions of the oracle."""
        q, qp = self.prime.q, self.prime.q_p
        inv = Fraction(1, qp - 1)
        for m in range(n, self.max_level + 1):
            am = a.at(m)
            if am.is_zero_within_precision():
                return m
            v = am.valuation()
            vw = Fraction(1, self.tower.level(m).E)
            if (v >= Fraction(2, q - 1) and v >= (m + 1 + inv + vw) / q
                    and 2 * v - vw > m + inv):
                return m
        raise AdmissibilityError(f"no admissible oracle level up to {self.max_level}")

    def _norm_down(self, x: TowerElem) -> TowerElem:
        method = self.norm_method
        if method == "orbit" and x.lev.E > self.orbit_limit:
            method = "relative"
        return self.tower.norm_to(x, 0, method=method)

    def kummer_oracle_omega(self, a, n: int | None = None) -> PairingValue:
        """(a_n, omega_n)_n = Phi_{1 - v^-1}(omega_2m), v = N_m(1 + a_m / omega_m)."""
        tw = self.tower
        if isinstance(a, TowerElem):
            a = DirectLimitElem(tw, a)
        if n is None:
            n = a.base_level
        if a.is_zero():
            return PairingValue(TorsionValue.zero(self.prime), n, {"zero_limit": True})
        m = self.oracle_level(a, n)
        am = a.at(m)
        details = {"m": m}
        if am.is_zero_within_precision():
            return PairingValue(TorsionValue.zero(self.prime), n, details)
        need = 2 * m
        if am.abs_prec < need + 3:
            raise PrecisionError(f"oracle at level {m} needs a_m to pi^{need + 3}, have {am.abs_prec}")
        bm = am / tw.omega(m, am.abs_prec + 2)
        v = self._norm_down(tw.one(m, bm.abs_prec) + bm).to_scalar()
        vinv = v.inv()
        t = PadicScalar.from_int(self.prime, 1) - vinv
        if t.abs_prec < need:
            raise PrecisionError(f"oracle residue known to pi^{t.abs_prec}, need pi^{need}")
        tr = tw.trace_to(bm, 0).to_scalar()
        step4 = (t - tr).is_zero_within_precision() or (t - tr).val >= need
        details["step4"] = step4
        if not step4:
            raise ConsistencyError("N(1+b)^-1 != 1 - Tr(b) modulo pi^2m")
        value = TorsionValue(self.prime, need, t.residue(need))
        if value.level > n:
            raise ConsistencyError(f"oracle value lives at level {value.level} > {n}")
        return PairingValue(value, n, details)

    def kummer_reduce(self, a: DirectLimitElem, u: NormSystem, n: int | None = None):
        """a'_n = a_n * omega_n * dlog Col_u(omega_n), to be paired with omega."""
        if n is None:
            n = self.reduce_level_for(a)
        an = a.at(n)
        if a.is_zero() or an.is_exact_zero():
            return DirectLimitElem(self.tower, self.tower.zero(n)), n
        bound = Fraction(2, self.prime.q_p - 1) - Fraction(1, self.tower.level(n).E)
        if not an.is_zero_within_precision() and an.valuation() <= bound:
            raise AdmissibilityError("kummer_reduce needs v(a_n) > 2/(q_p-1) - v(omega_n)")
        col = self.col_of(u, n)
        w = self.tower.omega(n, an.abs_prec + 2)
        return DirectLimitElem(self.tower, an * w * self.dlog_col_at(col, n)), n

    def reduce_level_for(self, a: DirectLimitElem) -> int:
        for n in range(max(a.base_level, 1), self.max_level + 1):
            an = a.at(n)
            if an.is_zero_within_precision():
                return n
            bound = Fraction(2, self.prime.q_p - 1) - Fraction(1, self.tower.level(n).E)
            # the analytic side needs the same level, keep them aligned
            if an.valuation() > bound and an.valuation() >= Fraction(2, self.prime.q - 1):
                return n
        raise AdmissibilityError(f"no admissible reduction level up to {self.max_level}")

    def kummer_pair(self, a: DirectLimitElem, u: NormSystem, n: int | None = None) -> PairingValue:
        if a.is_zero():
            return PairingValue(TorsionValue.zero(self.prime), a.base_level, {"zero_limit": True})
        a2, n = self.kummer_reduce(a, u, n)
        return self.kummer_oracle_omega(a2, n)

    def kummer_finite(self, a_n: TowerElem, u_n: TowerElem, u_m: TowerElem) -> PairingValue:
        """Tr_m(a_m / pi^m * dlog u_m / d omega_m) . omega_m, with N(u_m) = u_n."""
        tw = self.tower
        n, m = a_n.lev.n, u_m.lev.n
        if m < n:
            raise AdmissibilityError("u_m must live at a level >= n")
        if not tw.norm_to(u_m, n).equals(u_n):
            raise ConsistencyError("N_n^m(u_m) != u_n")
        a = DirectLimitElem(tw, a_n)
        am = a.at(m)
        if am.is_zero_within_precision():
            return PairingValue(TorsionValue.zero(self.prime), m)
        ok, m_min = self.finite_admissible(a, m)
        if not ok:
            raise AdmissibilityError(f"level {m} inadmissible; minimal admissible level is {m_min}")
        x = (am * self.dlog_domega(u_m)).div_by_pi_power(m)
        t = self._trace_residue(x, m, "finite pairing")
        return PairingValue(self._scalar_to_torsion(t, m), m, {"m": m})

    def finite_admissible(self, a: DirectLimitElem, m: int) -> tuple[bool, int | None]:
        """Whether level m meets both valuation conditions, and the least level that does."""
        q, qp = self.prime.q, self.prime.q_p
        inv = Fraction(1, qp - 1)

        def ok_at(k):
            ak = a.at(k)
            if ak.is_zero_within_precision():
                return True
            v = ak.valuation()
            vw = Fraction(1, self.tower.level(k).E)
            return v > Fraction(2, q - 1) and v >= (k + 1 + inv + vw) / q

        m_min = None
        for k in range(a.base_level, self.max_level + 1):
            if ok_at(k):
                m_min = k
                break
        return ok_at(m), m_min

    # --- verifier -----------------------------------------------------------------------

    def verify_reciprocity(self, a: DirectLimitElem, u: NormSystem, label: dict | None = None) -> dict:
        report = {"instance": {"p": self.prime.F.p, "e": self.prime.F.e, "pi": str(self.prime.pi)},
                  "sample": label or {}, "levels": {}, "checks": {}}
        try:
            an = self.analytic_pair(a, u)
            report["analytic"] = an.to_json()
            report["levels"]["n"] = an.computed_level
            report["checks"]["stability"] = an.details.get("stability", an.is_zero())
        except Exception as exc:  # disagreement or failure is a report outcome
            report["analytic"] = {"error": f"{type(exc).__name__}: {exc}"}
            an = None
        try:
            km = self.kummer_pair(a, u, report["levels"].get("n"))
            report["kummer"] = km.to_json()
            report["levels"]["m"] = km.details.get("m")
            report["checks"]["step4"] = km.details.get("step4", km.is_zero())
        except Exception as exc:
            report["kummer"] = {"error": f"{type(exc).__name__}: {exc}"}
            km = None
        if a.is_zero() or an is None or km is None:
            report["checks"]["cont_threshold"] = None
        else:
            n = an.computed_level
            v = a.valuation(n) if not a.at(n).is_zero_within_precision() else None
            report["checks"]["cont_threshold"] = (
                v is not None and v > n + Fraction(1, self.prime.q_p - 1))
        report["verdict"] = "PASS" if (an is not None and km is not None and an == km) else "FAIL"
        report["scope"] = ("omega-axis: independent oracle" if u.col is not None and _is_x(u.col)
                           else "general u: reduced through the dlog formula")
        return report


def _is_x(col: TruncLaurent) -> bool:
    c = col.normalized()
    return c.xpow == 1 and c.length == 1 and c.coeff_apolys()[0].c == (1,)


def report_json(report: dict) -> str:
    return json.dumps(report, sort_keys=True, default=str)
