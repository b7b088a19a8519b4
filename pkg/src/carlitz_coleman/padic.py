"""pi-adic scalars with an explicit precision ledger.

A :class:`PadicScalar` is ``pi^val * unit`` where ``unit`` is known modulo
``pi^prec``.  ``prec`` is therefore the relative precision; the absolute
precision is ``val + prec``.  Two special states exist:

* exact values (``prec is None``), used for elements of A and of its
  localisation; the unit part is then an exact element of A;
* zero.  An exact zero has ``val is None``.  A value that vanishes to all
  known digits is an *inexact* zero: ``prec == 0`` and ``val`` holds the
  absolute precision, i.e. the value is only known to lie in pi^val O.

Output precision of each operation (``abs`` = absolute, ``rel`` = relative):

    add/sub   abs = min(abs_a, abs_b), then renormalised
    mul       rel = min(rel_a, rel_b)
    inv       rel = rel_a          (exact input needs an explicit target)
    div_pi    lossless, val shifts
    frob^t    rel = rel_a * q^t    (optionally capped)
"""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np

from .apoly import APoly, format_poly
from .errors import PrecisionError, ValuationAmbiguityError
from .prime import PrimeSpec
from .residue import apoly_to_digits, digits_to_apoly

RationalVal = Fraction
INF = math.inf


def mod_pi_power(prime: PrimeSpec, a: APoly, k: int) -> APoly:
    """Canonical residue of a modulo pi^k."""
    if k <= 0:
        return APoly.zero(prime.F)
    if prime.pi_is_T:
        return APoly(prime.F, a.c[:k])
    if len(a.c) <= k * prime.d:
        return a
    return a % (prime.pi ** k)


def split_valuation(prime: PrimeSpec, a: APoly, limit: int | None = None):
    """Write a = pi^v * u with u prime to pi; stops at ``limit`` if given."""
    if a.is_zero():
        return None, a
    v = 0
    if prime.pi_is_T:
        while a.c[v] == 0:
            v += 1
            if limit is not None and v >= limit:
                return v, APoly.zero(prime.F)
        return v, APoly(prime.F, a.c[v:])
    while True:
        qt, r = a.divmod(prime.pi)
        if not r.is_zero():
            return v, a
        a, v = qt, v + 1
        if limit is not None and v >= limit:
            return v, APoly.zero(prime.F)


def _shifted(prime: PrimeSpec, u: APoly, s: int, k: int) -> APoly:
    """pi^s * u modulo pi^k."""
    if s >= k:
        return APoly.zero(prime.F)
    u = mod_pi_power(prime, u, k - s)
    if prime.pi_is_T:
        return u.shift(s)
    return mod_pi_power(prime, u * prime.pi ** s, k)


def unit_inverse_apoly(prime: PrimeSpec, u: APoly, k: int) -> APoly:
    arr = prime.unit_inverse(apoly_to_digits(u, prime.F), k)
    return digits_to_apoly(arr, prime.F)


class PadicScalar:
    """An element of F_pi = Frac(A_pi) with tracked precision."""

    __slots__ = ("prime", "val", "unit", "prec")

    def __init__(self, prime: PrimeSpec, val, unit: APoly, prec):
        self.prime = prime
        self.val = val
        self.unit = unit
        self.prec = prec

    # --- constructors --------------------------------------------------------

    @classmethod
    def exact_zero(cls, prime):
        return cls(prime, None, APoly.zero(prime.F), None)

    @classmethod
    def inexact_zero(cls, prime, abs_prec: int):
        return cls(prime, abs_prec, APoly.zero(prime.F), 0)

    @classmethod
    def from_apoly(cls, prime, a: APoly, abs_prec: int | None = None, val_shift: int = 0):
        """pi^val_shift * a, exact unless an absolute precision is given."""
        if abs_prec is None:
            v, u = split_valuation(prime, a)
            if v is None:
                return cls.exact_zero(prime)
            return cls(prime, v + val_shift, u, None)
        return cls.from_residue(prime, mod_pi_power(prime, a, abs_prec), abs_prec, val_shift)

    @classmethod
    def from_residue(cls, prime, a: APoly, abs_prec: int, val_shift: int = 0):
        """pi^val_shift * (a mod pi^abs_prec)."""
        v, u = split_valuation(prime, mod_pi_power(prime, a, abs_prec), abs_prec)
        if v is None or v >= abs_prec:
            return cls.inexact_zero(prime, abs_prec + val_shift)
        rel = abs_prec - v
        return cls(prime, v + val_shift, mod_pi_power(prime, u, rel), rel)

    @classmethod
    def from_int(cls, prime, n: int):
        return cls.from_apoly(prime, APoly.const(prime.F, prime.F.from_int(n)))

    @classmethod
    def from_array(cls, prime, arr: np.ndarray, val_shift: int = 0):
        """From a residue digit array of shape (k*d, e)."""
        k = arr.shape[-2] // prime.d
        return cls.from_residue(prime, digits_to_apoly(arr, prime.F), k, val_shift)

    # --- queries -------------------------------------------------------------

    @property
    def is_exact(self) -> bool:
        return self.prec is None

    def is_exact_zero(self) -> bool:
        return self.val is None

    def is_zero_within_precision(self) -> bool:
        return self.val is None or self.prec == 0

    @property
    def abs_prec(self):
        if self.val is None or self.prec is None:
            return INF
        return self.val + self.prec

    def valuation(self):
        if self.val is None:
            return INF
        if self.prec == 0:
            raise ValuationAmbiguityError("valuation below precision floor")
        return self.val

    def residue(self, k: int) -> APoly:
        """Canonical residue modulo pi^k (value must be integral to that depth)."""
        if self.val is None:
            return APoly.zero(self.prime.F)
        if self.abs_prec < k:
            raise PrecisionError(f"need {k} digits, have {self.abs_prec}")
        if self.val >= k:
            return APoly.zero(self.prime.F)
        if self.val < 0:
            raise PrecisionError("residue of a non-integral value")
        return _shifted(self.prime, self.unit, self.val, k)

    def to_array(self, k: int) -> np.ndarray:
        return self.prime.ring(k).from_apoly(self.residue(k))

    def with_abs_prec(self, n: int) -> "PadicScalar":
        """Forget digits at or beyond absolute precision n."""
        if self.val is None:
            return PadicScalar.exact_zero(self.prime) if n == INF else PadicScalar.inexact_zero(self.prime, n)
        if n >= self.abs_prec:
            return self
        if n <= self.val:
            return PadicScalar.inexact_zero(self.prime, n)
        rel = n - self.val
        return PadicScalar(self.prime, self.val, mod_pi_power(self.prime, self.unit, rel), rel)

    # --- arithmetic ----------------------------------------------------------

    def _coerce(self, other):
        if isinstance(other, PadicScalar):
            return other
        if isinstance(other, int):
            return PadicScalar.from_int(self.prime, other)
        if isinstance(other, APoly):
            return PadicScalar.from_apoly(self.prime, other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        a, b, prime = self, other, self.prime
        if a.val is None:
            return b
        if b.val is None:
            return a
        if a.is_exact and b.is_exact:
            v0 = min(a.val, b.val)
            s = a.unit * prime.pi ** (a.val - v0) + b.unit * prime.pi ** (b.val - v0)
            return PadicScalar.from_apoly(prime, s, val_shift=v0)
        n_abs = min(a.abs_prec, b.abs_prec)
        v0 = min(a.val, b.val)
        if n_abs <= v0:
            return PadicScalar.inexact_zero(prime, n_abs)
        k = n_abs - v0
        s = _shifted(prime, a.unit, a.val - v0, k) + _shifted(prime, b.unit, b.val - v0, k)
        return PadicScalar.from_residue(prime, s, k, val_shift=v0)

    __radd__ = __add__

    def __neg__(self):
        return PadicScalar(self.prime, self.val, -self.unit, self.prec)

    def __sub__(self, other):
        other = self._coerce(other)
        return self + (-other)

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        a, b, prime = self, other, self.prime
        if a.val is None or b.val is None:
            if (a.val is None and a.is_exact) or (b.val is None and b.is_exact):
                return PadicScalar.exact_zero(prime)
        if a.prec == 0 or b.prec == 0:
            # an inexact zero times something of known valuation
            return PadicScalar.inexact_zero(prime, a.val + b.val)
        val = a.val + b.val
        if a.is_exact and b.is_exact:
            return PadicScalar(prime, val, a.unit * b.unit, None)
        rel = min(x.prec for x in (a, b) if x.prec is not None)
        return PadicScalar(prime, val, mod_pi_power(prime, a.unit * b.unit, rel), rel)

    __rmul__ = __mul__

    def inv(self, prec: int | None = None) -> "PadicScalar":
        """Multiplicative inverse; exact inputs need a target relative precision."""
        if self.val is None:
            raise ZeroDivisionError("inverse of exact zero")
        if self.prec == 0:
            raise PrecisionError("inverse of a value indistinguishable from zero")
        rel = self.prec if prec is None else (prec if self.prec is None else min(prec, self.prec))
        if rel is None:
            if self.unit.deg == 0:
                c = self.prime.F.inv(self.unit.c[0])
                return PadicScalar(self.prime, -self.val, APoly.const(self.prime.F, c), None)
            raise PrecisionError("inverse of an exact non-constant unit needs a precision")
        return PadicScalar(self.prime, -self.val, unit_inverse_apoly(self.prime, self.unit, rel), rel)

    def __truediv__(self, other):
        other = self._coerce(other)
        return self * other.inv(self.prec)

    def div_by_pi_power(self, j: int) -> "PadicScalar":
        if self.val is None:
            return self
        return PadicScalar(self.prime, self.val - j, self.unit, self.prec)

    def frobenius(self, times: int = 1, cap: int | None = None) -> "PadicScalar":
        """x -> x^(q^times); relative precision multiplies by q^times.

        ``cap`` bounds the relative precision of the result, which also makes
        exact inputs inexact (and keeps huge exponents cheap).
        """
        if self.val is None:
            return self
        step = self.prime.q ** times
        if self.prec is None and cap is None:
            return PadicScalar(self.prime, self.val * step, self.unit.frobenius(times), None)
        rel = cap if self.prec is None else self.prec * step
        if cap is not None:
            rel = min(rel, cap)
        if rel <= 0:
            return PadicScalar.inexact_zero(self.prime, self.val * step)
        # u^(q^t) mod pi^rel only depends on u mod pi^ceil(rel / q^t)
        u = mod_pi_power(self.prime, self.unit, -(-rel // step))
        # one step at a time: a single T -> T^(q^t) substitution blows up the degree
        for _ in range(times):
            u = mod_pi_power(self.prime, u.frobenius(1), rel)
        return PadicScalar(self.prime, self.val * step, u, rel)

    def __pow__(self, k: int):
        result = PadicScalar.from_int(self.prime, 1)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    # --- comparison & display ------------------------------------------------

    def equals_within(self, other, k: int) -> bool:
        """True if the two values agree modulo pi^k (both known that far)."""
        d = self - other
        if d.val is None:
            return True
        if d.prec == 0:
            return d.val >= k
        return d.val >= k

    def __eq__(self, other):
        other = self._coerce(other)
        if not isinstance(other, PadicScalar):
            return NotImplemented
        return (self.val, self.unit, self.prec) == (other.val, other.unit, other.prec)

    def __hash__(self):
        return hash((self.val, self.unit, self.prec))

    def __repr__(self):
        if self.val is None:
            return "PadicScalar(0)"
        if self.prec == 0:
            return f"PadicScalar(O(pi^{self.val}))"
        p = "exact" if self.prec is None else f"rel {self.prec}"
        return f"PadicScalar(pi^{self.val}*({format_poly(self.unit)}), {p})"

    def to_json(self) -> dict:
        if self.val is None:
            return {"zero": True, "exact": True}
        return {"val": self.val, "unit": format_poly(self.unit),
                "prec": self.prec, "exact": self.prec is None}


def valuation(a: PadicScalar):
    return a.valuation()
