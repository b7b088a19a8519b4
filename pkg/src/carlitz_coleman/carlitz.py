"""The Carlitz module Phi_T = T + tau, its torsion polynomials and log.

Skew polynomials act on values by ``(sum c_i tau^i)(x) = sum c_i x^(q^i)``
and multiply by composition, so ``tau * c = c^q * tau``.
"""

from __future__ import annotations

import math
from fractions import Fraction

from .apoly import APoly
from .errors import AdmissibilityError, ConsistencyError, PrecisionError
from .padic import PadicScalar
from .prime import PrimeSpec
from .xpoly import AXPoly, exact_divide_sparse


class SkewPoly:
    """A truncated element of O{tau} (or F_pi{tau}) with PadicScalar coefficients."""

    def __init__(self, prime: PrimeSpec, coeffs):
        self.prime = prime
        cs = [c if isinstance(c, PadicScalar) else PadicScalar.from_apoly(prime, c)
              if isinstance(c, APoly) else PadicScalar.from_int(prime, c) for c in coeffs]
        while len(cs) > 1 and cs[-1].is_exact_zero():
            cs.pop()
        self.coeffs = cs or [PadicScalar.exact_zero(prime)]

    @property
    def tau_deg(self) -> int:
        return len(self.coeffs) - 1

    @classmethod
    def tau(cls, prime, k: int = 1):
        return cls(prime, [0] * k + [1])

    def __getitem__(self, i):
        if 0 <= i < len(self.coeffs):
            return self.coeffs[i]
        return PadicScalar.exact_zero(self.prime)

    def __add__(self, other: "SkewPoly") -> "SkewPoly":
        n = max(len(self.coeffs), len(other.coeffs))
        return SkewPoly(self.prime, [self[i] + other[i] for i in range(n)])

    def __neg__(self):
        return SkewPoly(self.prime, [-c for c in self.coeffs])

    def __sub__(self, other):
        return self + (-other)

    def mul(self, other: "SkewPoly", trunc: int | None = None) -> "SkewPoly":
        """Twisted product (f*g)_k = sum_{i+j=k} f_i g_j^(q^i), optionally truncated."""
        top = self.tau_deg + other.tau_deg
        if trunc is not None:
            top = min(top, trunc)
        out = [PadicScalar.exact_zero(self.prime) for _ in range(top + 1)]
        for i, fi in enumerate(self.coeffs):
            if fi.is_exact_zero() or i > top:
                continue
            for j, gj in enumerate(other.coeffs):
                if i + j > top:
                    break
                if gj.is_exact_zero():
                    continue
                out[i + j] = out[i + j] + fi * gj.frobenius(i, cap=fi.prec)
        return SkewPoly(self.prime, out)

    __mul__ = mul

    def scalar_left(self, c: PadicScalar) -> "SkewPoly":
        return SkewPoly(self.prime, [c * x for x in self.coeffs])

    def __eq__(self, other):
        n = max(len(self.coeffs), len(other.coeffs))
        return all(self[i] == other[i] for i in range(n))

    def __repr__(self):
        return "SkewPoly(" + " + ".join(f"{c!r}*tau^{i}" for i, c in enumerate(self.coeffs)) + ")"


def _apoly_phi_T_right(f: list[APoly], T: APoly) -> list[APoly]:
    # f * (T + tau): tau^k * T = T^(q^k) * tau^k, and tau^k * tau shifts
    out = [c * T.frobenius(k) for k, c in enumerate(f)] + [APoly.zero(T.F)]
    for k in range(1, len(out)):
        out[k] = out[k] + f[k - 1]
    return out


class CarlitzMap:
    """a -> Phi_a for the Carlitz module over A = F_q[T], localised at pi."""

    def __init__(self, prime: PrimeSpec):
        self.prime = prime
        self.F = prime.F
        self._cache: dict[APoly, list[APoly]] = {}
        self._psi: dict[int, AXPoly] = {}
        self._torsion: dict[int, AXPoly] = {}

    @property
    def phi_T(self) -> SkewPoly:
        return SkewPoly(self.prime, [APoly.T(self.F), 1])

    def phi_coeffs(self, a: APoly) -> list[APoly]:
        """Exact tau-coefficients of Phi_a, by Horner in Phi_T."""
        if isinstance(a, int):
            a = APoly.const(self.F, self.F.from_int(a))
        hit = self._cache.get(a)
        if hit is not None:
            return hit
        T = APoly.T(self.F)
        if a.is_zero():
            res = [APoly.zero(self.F)]
        else:
            res = [APoly.const(self.F, a.c[-1])]
            for coef in reversed(a.c[:-1]):
                res = _apoly_phi_T_right(res, T)
                res[0] = res[0] + APoly.const(self.F, coef)
        self._cache[a] = res
        return res

    def phi(self, a: APoly) -> SkewPoly:
        return SkewPoly(self.prime, self.phi_coeffs(a))

    def phi_of(self, a, tau_trunc: int, target: int | None = None) -> SkewPoly:
        """Phi_a for a in A (exact) or a pi-adic a (truncated at tau^tau_trunc).

        For pi-adic input the result is correct modulo pi^target and needs
        absolute input precision at least target + tau_trunc.
        """
        if isinstance(a, (APoly, int)):
            return SkewPoly(self.prime, self.phi_coeffs(a)[:tau_trunc + 1])
        if target is None:
            raise PrecisionError("a pi-adic argument needs a target precision")
        if a.val is not None and a.val < 0:
            raise AdmissibilityError("Phi_a needs an integral argument")
        need = target + tau_trunc
        if a.abs_prec < need:
            raise PrecisionError(f"phi_of needs {need} digits of a, have {a.abs_prec}")
        lift = a.residue(need)
        cs = self.phi_coeffs(lift)[:tau_trunc + 1]
        return SkewPoly(self.prime, [PadicScalar.from_apoly(self.prime, c, target) for c in cs])

    # --- torsion polynomials -------------------------------------------------

    def additive_poly(self, a: APoly) -> AXPoly:
        """Phi_a(x) = sum_i c_i x^(q^i) as an exact polynomial in A[x]."""
        q = self.F.q
        return AXPoly.from_coeffs(self.F, {q ** i: c for i, c in enumerate(self.phi_coeffs(a))})

    def torsion_poly(self, n: int) -> AXPoly:
        """Phi_{pi^n}(x), monic additive of degree q_p^n."""
        if n < 0:
            raise AdmissibilityError("torsion level must be non-negative")
        hit = self._torsion.get(n)
        if hit is None:
            hit = self._torsion[n] = self.additive_poly(self.prime.pi ** n)
        return hit

    def psi(self, n: int) -> AXPoly:
        """psi_n = Phi_{pi^n}(x) / Phi_{pi^(n-1)}(x), Eisenstein of degree e_n."""
        if n < 1:
            raise AdmissibilityError("psi_n needs n >= 1")
        hit = self._psi.get(n)
        if hit is not None:
            return hit
        qt, r = exact_divide_sparse(self.torsion_poly(n), self.torsion_poly(n - 1))
        if r.degree >= 0:
            raise ConsistencyError(f"Phi_pi^{n}(x) not divisible by Phi_pi^{n - 1}(x)")
        if qt.degree != tower_degree(self.prime, n):
            raise ConsistencyError("psi_n has the wrong degree")
        check_eisenstein(self.prime, qt)
        self._psi[n] = qt
        return qt

    def psi_by_composition(self, n: int) -> AXPoly:
        """psi_1 composed with Phi_{pi^(n-1)}; a cross-check on :meth:`psi`."""
        inner = self.torsion_poly(n - 1)
        outer = self.psi(1)
        acc = AXPoly.from_coeffs(self.F, [outer.coeff(outer.degree)])
        for i in range(outer.degree - 1, -1, -1):
            acc = acc * inner + AXPoly.from_coeffs(self.F, [outer.coeff(i)])
        return acc

    # --- Rosen's logarithm ---------------------------------------------------

    def lambda_coeffs(self, terms: int, prec: int) -> "LambdaSeries":
        """c_0..c_terms of lambda, each with relative precision ``prec``.

        c_m (pi - pi^(q^m)) = sum_{j=1}^{min(m,d)} c_{m-j} b_j^(q^(m-j)), with
        b_j the tau^j coefficient of Phi_pi.
        """
        if terms < 0:
            raise AdmissibilityError("number of lambda terms must be non-negative")
        prime = self.prime
        b = [PadicScalar.from_apoly(prime, c) for c in self.phi_coeffs(prime.pi)]
        pi = PadicScalar.from_apoly(prime, prime.pi)
        c = [PadicScalar.from_int(prime, 1)]
        for m in range(1, terms + 1):
            s = PadicScalar.exact_zero(prime)
            for j in range(1, min(m, prime.d) + 1):
                s = s + c[m - j] * b[j].frobenius(m - j, cap=prec)
            # only prec + 1 digits of the denominator matter
            denom = pi.with_abs_prec(prec + 1) - pi.frobenius(m, cap=prec + 1).with_abs_prec(prec + 1)
            c.append(s * denom.inv(prec))
        return LambdaSeries(prime, c)


class LambdaSeries:
    """lambda = sum c_i tau^i with c_0 = 1."""

    def __init__(self, prime: PrimeSpec, coeffs: list[PadicScalar]):
        self.prime = prime
        self.coeffs = coeffs

    @property
    def terms(self) -> int:
        return len(self.coeffs) - 1

    def as_skew(self) -> SkewPoly:
        return SkewPoly(self.prime, self.coeffs)

    def valuations(self) -> list[int]:
        return [c.valuation() for c in self.coeffs]


def tower_degree(prime: PrimeSpec, n: int) -> int:
    """e_n = [K_n : K] = q_p^(n-1) (q_p - 1); e_0 = 1."""
    if n == 0:
        return 1
    return prime.q_p ** (n - 1) * (prime.q_p - 1)


def check_eisenstein(prime: PrimeSpec, f: AXPoly) -> None:
    from .padic import split_valuation

    top = f.degree
    if f.coeff(top) != APoly.one(prime.F):
        raise ConsistencyError("Eisenstein polynomial must be monic")
    v0, _ = split_valuation(prime, f.coeff(0))
    if v0 != 1:
        raise ConsistencyError("constant term of psi_n must have valuation 1")
    for i in range(1, top):
        c = f.coeff(i)
        if not c.is_zero() and split_valuation(prime, c)[0] < 1:
            raise ConsistencyError(f"coefficient of x^{i} in psi_n is a unit")


def lambda_terms_needed(q: int, v_a: Fraction, target: int) -> int:
    """Smallest J with q^j v(a) - j >= target for every j > J."""
    if v_a <= 0:
        raise AdmissibilityError("lambda needs an argument of positive valuation")
    j = 0
    while q ** (j + 1) * v_a - (j + 1) < target:
        j += 1
    return j


def lambda_eval(a, series: LambdaSeries, target: int):
    """lambda(a) = sum c_i a^(q^i) for a tower element of positive valuation.

    The result is correct to absolute precision ``target`` (or less, if the
    input carries less); an error is raised when the series is too short.
    """
    if a.is_zero_within_precision():
        if a.is_exact_zero():
            return a
    v = a.valuation()
    J = lambda_terms_needed(series.prime.q, v, target)
    if J > series.terms:
        raise PrecisionError(f"lambda needs {J} terms, series has {series.terms}")
    acc = a.scale(series.coeffs[0])
    power = a
    for i in range(1, J + 1):
        power = power.frobenius(cap=target + i + 1)
        acc = acc + power.scale(series.coeffs[i])
    acc = acc.with_abs_prec(target)
    if Fraction(1, series.prime.q - 1) < v < acc.abs_prec:
        if acc.valuation() != v:
            raise ConsistencyError("lambda failed to preserve the valuation")
    return acc


def lambda_residual(cmap: CarlitzMap, series: LambdaSeries, upto: int) -> SkewPoly:
    """lambda * Phi_pi - pi * lambda, truncated at tau^upto."""
    lam = series.as_skew()
    pi = PadicScalar.from_apoly(cmap.prime, cmap.prime.pi)
    return lam.mul(cmap.phi(cmap.prime.pi), trunc=upto) - SkewPoly(
        cmap.prime, [pi * c for c in lam.coeffs[:upto + 1]])
