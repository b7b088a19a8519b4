"""The totally ramified tower K_n = K(omega_n), O_n = O[x]/(psi_n).

Elements are stored as ``pi^s * vec`` where ``vec`` is a polynomial in
omega_n with coefficients in O, known modulo pi^prec, and at least one
coefficient of ``vec`` is a unit.  Since pi = omega_n^(e_n) * (unit), a pole
in pi is the same thing as a pole in omega_n, and keeping it as a power of
pi makes division by pi lossless.
"""

from __future__ import annotations

import itertools
from math import comb
from fractions import Fraction
from functools import cached_property

import numpy as np

from .apoly import APoly, format_poly
from .carlitz import CarlitzMap, tower_degree
from .errors import (AdmissibilityError, CarlitzError, ConsistencyError,
                     PrecisionError, ValuationAmbiguityError)
from .padic import INF, PadicScalar, mod_pi_power
from .polyalg import RadixBase, compose, next_pow2
from .prime import PrimeSpec
from .residue import Modulus, _pad_axis, apoly_to_digits, digits_to_apoly, ring_mul


class LevelRing:
    """O_n / pi^k with trailing shape (e_n, k*d, e)."""

    ndim = 3

    def __init__(self, level: "TowerLevel", k: int):
        self.level = level
        self.k = k
        self.res = level.prime.ring(k)
        self.p = level.prime.F.p
        self.shape = (level.E,) + self.res.shape
        self.psi = level.psi_poly.mod_pi_power(level.prime, k)
        self._mod = Modulus(self.res, self.psi) if level.n > 0 else None

    def reduce(self, a: np.ndarray) -> np.ndarray:
        a = self.res.reduce(a)
        if self._mod is None:
            return _pad_axis(a, -3, 1)
        return self._mod.rem(a)

    def one(self):
        out = np.zeros(self.shape, np.int64)
        if self.res.L:
            out[0, 0, 0] = 1
        return out

    def zero(self):
        return np.zeros(self.shape, np.int64)

    def mul(self, a, b):
        return ring_mul(self, a, b)


class TowerLevel:
    """Static data of level n: psi_n, e_n and cached rings."""

    def __init__(self, tower: "Tower", n: int):
        self.tower = tower
        self.prime = tower.prime
        self.n = n
        self.E = tower_degree(self.prime, n)
        if n == 0:
            from .xpoly import AXPoly
            self.psi_poly = AXPoly.from_coeffs(self.prime.F, [APoly.zero(self.prime.F),
                                                              APoly.one(self.prime.F)])
        else:
            self.psi_poly = tower.cmap.psi(n)
        self._rings: dict[int, LevelRing] = {}
        self._V: dict[int, np.ndarray] = {}

    def ring(self, k: int) -> LevelRing:
        r = self._rings.get(k)
        if r is None:
            r = self._rings[k] = LevelRing(self, k)
        return r

    @property
    def v_omega(self) -> Fraction:
        return Fraction(1, self.E)

    def V(self, k: int) -> np.ndarray:
        """The unit V with omega^E = pi * V, mod pi^k."""
        hit = self._V.get(k)
        if hit is None:
            low = self.psi_poly.mod_pi_power(self.prime, k + 1)[:self.E]
            low = self.prime.div_pi(low, 1)
            hit = self._V[k] = (-low) % self.prime.F.p
        return hit


class TowerElem:
    """pi^s * vec(omega_n), vec known modulo pi^prec."""

    __slots__ = ("lev", "s", "vec", "prec")

    def __init__(self, lev: TowerLevel, s, vec: np.ndarray | None, prec: int, _norm=True):
        self.lev = lev
        self.s = s
        self.vec = vec
        self.prec = prec
        if _norm and s is not None:
            self._normalize()

    # --- construction helpers ----------------------------------------------

    @classmethod
    def exact_zero(cls, lev):
        return cls(lev, None, None, 0, _norm=False)

    @classmethod
    def inexact_zero(cls, lev, abs_prec: int):
        return cls(lev, abs_prec, lev.ring(0).zero(), 0, _norm=False)

    @classmethod
    def from_vec(cls, lev, vec: np.ndarray, prec: int, s: int = 0):
        vec = lev.ring(prec).reduce(vec)
        return cls(lev, s, vec, prec)

    def _normalize(self):
        if self.prec <= 0:
            self.vec = self.lev.ring(0).zero()
            self.prec = 0
            return
        prime = self.lev.prime
        vals = prime.residue_valuation(self.vec)
        iv = int(vals.min())
        if iv >= self.prec:
            self.s = self.s + self.prec
            self.vec = self.lev.ring(0).zero()
            self.prec = 0
        elif iv > 0:
            self.vec = prime.div_pi(self.vec, iv, check=False)
            self.s += iv
            self.prec -= iv

    # --- queries -----------------------------------------------------------------

    @property
    def level(self) -> int:
        return self.lev.n

    @property
    def tower(self) -> "Tower":
        return self.lev.tower

    def is_exact_zero(self) -> bool:
        return self.s is None

    def is_zero_within_precision(self) -> bool:
        return self.s is None or self.prec == 0

    @property
    def abs_prec(self):
        return INF if self.s is None else self.s + self.prec

    def valuation(self) -> Fraction:
        if self.s is None:
            return INF
        if self.prec == 0:
            raise ValuationAmbiguityError("valuation below precision floor")
        vals = self.lev.prime.residue_valuation(self.vec)
        E = self.lev.E
        best = min(Fraction(int(v)) + Fraction(i, E) for i, v in enumerate(vals) if v < self.prec)
        return self.s + best

    def coefficient(self, i: int) -> PadicScalar:
        """Coefficient of omega^i as a PadicScalar (including the pi^s factor)."""
        if self.s is None:
            return PadicScalar.exact_zero(self.lev.prime)
        return PadicScalar.from_array(self.lev.prime, self.vec[i], val_shift=self.s)

    def coefficients(self) -> list[PadicScalar]:
        return [self.coefficient(i) for i in range(self.lev.E)]

    def to_scalar(self) -> PadicScalar:
        """The value as a PadicScalar; requires membership in K."""
        if self.s is None:
            return PadicScalar.exact_zero(self.lev.prime)
        if self.lev.n > 0:
            return self.tower.descend(self, 0).to_scalar()
        return self.coefficient(0)

    def with_abs_prec(self, n: int) -> "TowerElem":
        if self.s is None or n >= self.abs_prec:
            return self
        if n <= self.s:
            return TowerElem.inexact_zero(self.lev, n)
        k = n - self.s
        return TowerElem(self.lev, self.s, self.lev.ring(k).reduce(self.vec), k)

    def residue_array(self, k: int) -> np.ndarray:
        """vec scaled by pi^s as an array modulo pi^k (needs integrality)."""
        if self.s is None:
            return self.lev.ring(k).zero()
        if self.abs_prec < k:
            raise PrecisionError(f"need {k} digits, element has {self.abs_prec}")
        if self.s < 0:
            raise PrecisionError("residue of a non-integral element")
        return self.lev.prime.mul_pi(self.vec, self.s, k) if self.prec else self.lev.ring(k).zero()

    # --- arithmetic ----------------------------------------------------------------

    def _coerce(self, other):
        if isinstance(other, TowerElem):
            if other.lev is self.lev:
                return self, other
            if other.lev.n < self.lev.n:
                return self, self.tower.embed(other, self.lev.n)
            return self.tower.embed(self, other.lev.n), other
        if isinstance(other, (int, APoly, PadicScalar)):
            return self, self.tower.scalar(self.lev.n, other, self._work_prec())
        return NotImplemented

    def _work_prec(self) -> int:
        if self.s is None:
            return self.tower.default_prec
        return max(self.abs_prec, 1) if self.abs_prec != INF else self.tower.default_prec

    def __add__(self, other):
        pair = self._coerce(other)
        if pair is NotImplemented:
            return pair
        a, b = pair
        if a.s is None:
            return b
        if b.s is None:
            return a
        n_abs = min(a.abs_prec, b.abs_prec)
        s0 = min(a.s, b.s)
        if n_abs <= s0:
            return TowerElem.inexact_zero(a.lev, n_abs)
        k = n_abs - s0
        prime = a.lev.prime
        va = prime.mul_pi(a.vec, a.s - s0, k) if a.prec else a.lev.ring(k).zero()
        vb = prime.mul_pi(b.vec, b.s - s0, k) if b.prec else b.lev.ring(k).zero()
        return TowerElem(a.lev, s0, (va + vb) % prime.F.p, k)

    __radd__ = __add__

    def __neg__(self):
        if self.s is None:
            return self
        return TowerElem(self.lev, self.s, (-self.vec) % self.lev.prime.F.p, self.prec, _norm=False)

    def __sub__(self, other):
        pair = self._coerce(other)
        if pair is NotImplemented:
            return pair
        a, b = pair
        return a + (-b)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, PadicScalar):
            return self.scale(other)
        pair = self._coerce(other)
        if pair is NotImplemented:
            return pair
        a, b = pair
        if a.s is None or b.s is None:
            return TowerElem.exact_zero(a.lev)
        if a.prec == 0 or b.prec == 0:
            return TowerElem.inexact_zero(a.lev, a.s + b.s)
        k = min(a.prec, b.prec)
        R = a.lev.ring(k)
        va = a.lev.prime.ring(k).reduce(a.vec)
        vb = a.lev.prime.ring(k).reduce(b.vec)
        return TowerElem(a.lev, a.s + b.s, R.mul(va, vb), k)

    __rmul__ = __mul__

    def scale(self, c) -> "TowerElem":
        """Multiply by a scalar of K."""
        if not isinstance(c, PadicScalar):
            c = PadicScalar.from_apoly(self.lev.prime, c) if isinstance(c, APoly) else \
                PadicScalar.from_int(self.lev.prime, c)
        if self.s is None or c.is_exact_zero():
            return TowerElem.exact_zero(self.lev)
        if c.prec == 0 or self.prec == 0:
            return TowerElem.inexact_zero(self.lev, self.s + c.val)
        k = self.prec if c.prec is None else min(self.prec, c.prec)
        u = self.lev.prime.ring(k).from_apoly(mod_pi_power(self.lev.prime, c.unit, k))
        vec = self.lev.prime.ring(k).reduce(self.vec)
        return TowerElem(self.lev, self.s + c.val, self.lev.ring(k).mul(vec, u[None]), k)

    def div_by_pi_power(self, j: int) -> "TowerElem":
        if self.s is None:
            return self
        return TowerElem(self.lev, self.s - j, self.vec, self.prec, _norm=False)

    def unit_inverse(self) -> "TowerElem":
        """Inverse of an element of valuation 0 by Newton iteration."""
        lev = self.lev
        k = self.prec
        R = lev.ring(k)
        prime = lev.prime
        inv0 = prime.unit_inverse(self.vec[0], 1)
        y = R.reduce(np.pad(prime.ring(k).reduce(inv0)[None], [(0, lev.E - 1), (0, 0), (0, 0)]))
        # precision in omega-digits doubles each round, starting from 1
        target = k * lev.E
        got = 1
        p = prime.F.p
        while got < target:
            err = R.mul(self.vec, y)
            corr = (-err) % p
            corr = (corr + 2 * R.one()) % p
            y = R.mul(y, corr)
            got *= 2
        return TowerElem(lev, -self.s, y, k)

    def inv(self) -> "TowerElem":
        if self.s is None:
            raise ZeroDivisionError("inverse of exact zero")
        if self.prec == 0:
            raise PrecisionError("inverse of an element indistinguishable from zero")
        lev = self.lev
        v = self.valuation() - self.s  # valuation of vec, in [0, 1)
        t = int(v * lev.E)
        if t == 0:
            u = TowerElem(lev, 0, self.vec, self.prec, _norm=False)
            return u.unit_inverse().div_by_pi_power(self.s)
        # vec = omega^t * u; omega^(-t) = omega^(E-t) / (pi V)
        k = self.prec
        R = lev.ring(k)
        w = self.tower.omega_power(lev.n, lev.E - t, k)
        u_times_V_pi = TowerElem(lev, 0, R.mul(self.vec, w.vec), k)  # = pi * V * u
        u_times_V = u_times_V_pi.div_by_pi_power(1)
        uv_inv = u_times_V.unit_inverse()
        # 1/(omega^t u) = omega^(E-t) / (pi V u)
        res = (w * uv_inv).div_by_pi_power(1)
        return res.div_by_pi_power(self.s)

    def __truediv__(self, other):
        pair = self._coerce(other)
        if pair is NotImplemented:
            return pair
        a, b = pair
        return a * b.inv()

    def __pow__(self, k: int) -> "TowerElem":
        if k < 0:
            return self.inv() ** (-k)
        result = self.tower.one(self.lev.n, max(self.prec, 1))
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def frobenius(self, times: int = 1, cap: int | None = None) -> "TowerElem":
        """a -> a^(q^times): scatter T- and omega-exponents, then reduce."""
        if self.s is None:
            return self
        lev = self.lev
        prime = lev.prime
        step = prime.q ** times
        s_new = self.s * step
        k_new = self.prec * step
        if cap is not None:
            k_new = min(k_new, max(cap - s_new, 0))
        if self.prec == 0 or k_new <= 0:
            return TowerElem.inexact_zero(lev, s_new + max(k_new, 0))
        vec = prime.frobenius_residue(self.vec, times, k_out=k_new)
        E = lev.E
        spread = np.zeros(((E - 1) * step + 1,) + vec.shape[1:], np.int64)
        spread[::step] = vec
        return TowerElem(lev, s_new, lev.ring(k_new).reduce(spread), k_new)

    # --- comparison & display ------------------------------------------------------

    def equals(self, other, upto: int | None = None) -> bool:
        """Agreement modulo pi^upto (default: to the joint precision)."""
        d = self - other
        if d.s is None:
            return True
        if d.prec == 0:
            return upto is None or d.s >= upto
        return upto is not None and d.valuation() >= upto

    def __repr__(self):
        if self.s is None:
            return f"TowerElem(level={self.lev.n}, 0)"
        if self.prec == 0:
            return f"TowerElem(level={self.lev.n}, O(pi^{self.s}))"
        terms = []
        for i in range(self.lev.E):
            c = digits_to_apoly(self.vec[i], self.lev.prime.F)
            if not c.is_zero():
                terms.append(f"({format_poly(c)})*w^{i}" if i else f"({format_poly(c)})")
        return f"TowerElem(level={self.lev.n}, pi^{self.s}*[{' + '.join(terms)}] + O(pi^{self.abs_prec}))"

    def to_json(self) -> dict:
        if self.s is None:
            return {"level": self.lev.n, "pole": 0, "coeffs": [], "zero": True}
        F = self.lev.prime.F
        coeffs = [format_poly(digits_to_apoly(self.vec[i], F)) for i in range(self.lev.E)]
        return {"level": self.lev.n, "pi_power": self.s, "pole": max(-self.s, 0) * self.lev.E,
                "coeffs": coeffs, "prec": self.abs_prec}


class GaloisElem:
    """sigma_c : omega_n -> Phi_c(omega_n) for c in (A/pi^n)^*."""

    def __init__(self, prime: PrimeSpec, n: int, c):
        if isinstance(c, int):
            c = APoly.const(prime.F, prime.F.from_int(c))
        c = mod_pi_power(prime, c, n) if n > 0 else c
        if n > 0 and (c % prime.pi).is_zero():
            raise AdmissibilityError("Galois residue must be a unit modulo pi")
        self.prime = prime
        self.n = n
        self.c = c

    def __mul__(self, other: "GaloisElem") -> "GaloisElem":
        return GaloisElem(self.prime, self.n, self.c * other.c)

    def __eq__(self, other):
        return self.n == other.n and self.c == other.c

    def __repr__(self):
        return f"sigma[{format_poly(self.c)}]"


class TorsionValue:
    """Phi_c(omega_n) in Phi[pi^n], kept at its minimal level."""

    __slots__ = ("prime", "level", "c")

    def __init__(self, prime: PrimeSpec, level: int, c: APoly):
        if isinstance(c, int):
            c = APoly.const(prime.F, prime.F.from_int(c))
        c = mod_pi_power(prime, c, level)
        while level > 0 and not c.is_zero() and (c % prime.pi).is_zero():
            c = c // prime.pi
            level -= 1
        if c.is_zero():
            level = 0
        self.prime = prime
        self.level = level
        self.c = c

    @classmethod
    def zero(cls, prime):
        return cls(prime, 0, APoly.zero(prime.F))

    def is_zero(self) -> bool:
        return self.c.is_zero()

    def at_level(self, m: int) -> APoly:
        """Residue c' with the value equal to Phi_c'(omega_m), m >= level."""
        if m < self.level:
            raise AdmissibilityError("torsion value does not live at that level")
        return mod_pi_power(self.prime, self.c * self.prime.pi ** (m - self.level), m)

    def __add__(self, other: "TorsionValue") -> "TorsionValue":
        m = max(self.level, other.level)
        return TorsionValue(self.prime, m, self.at_level(m) + other.at_level(m))

    def __neg__(self):
        return TorsionValue(self.prime, self.level, -self.c)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, a) -> "TorsionValue":
        """Phi_a applied to the value."""
        if isinstance(a, int):
            a = APoly.const(self.prime.F, self.prime.F.from_int(a))
        return TorsionValue(self.prime, self.level, self.c * a)

    def __eq__(self, other):
        return isinstance(other, TorsionValue) and (self.level, self.c) == (other.level, other.c)

    def __hash__(self):
        return hash((self.level, self.c))

    def __repr__(self):
        if self.is_zero():
            return "TorsionValue(0)"
        return f"TorsionValue(level={self.level}, c={format_poly(self.c)})"

    def to_json(self) -> dict:
        return {"level": self.level, "c": format_poly(self.c)}


class Tower:
    """Shared context for the tower over a fixed prime."""

    def __init__(self, prime: PrimeSpec, default_prec: int = 16):
        self.prime = prime
        self.cmap = CarlitzMap(prime)
        self.default_prec = default_prec
        self._levels: dict[int, TowerLevel] = {}
        self._omega_pows: dict[tuple, list] = {}
        self._radix_cache: dict[int, RadixBase] = {}
        self._shift_cache: dict[tuple, list] = {}

    def level(self, n: int) -> TowerLevel:
        if n < 0:
            raise AdmissibilityError("tower levels start at 0")
        lev = self._levels.get(n)
        if lev is None:
            lev = self._levels[n] = TowerLevel(self, n)
        return lev

    # --- element constructors ----------------------------------------------

    def zero(self, n: int) -> TowerElem:
        return TowerElem.exact_zero(self.level(n))

    def one(self, n: int, prec: int) -> TowerElem:
        lev = self.level(n)
        return TowerElem(lev, 0, lev.ring(prec).one(), prec)

    def scalar(self, n: int, a, prec: int) -> TowerElem:
        lev = self.level(n)
        prime = self.prime
        if isinstance(a, int):
            a = PadicScalar.from_int(prime, a)
        if isinstance(a, APoly):
            a = PadicScalar.from_apoly(prime, a)
        if a.is_exact_zero():
            return TowerElem.exact_zero(lev)
        if a.prec == 0:
            return TowerElem.inexact_zero(lev, a.val)
        k = max(prec - a.val, 0) if a.prec is None else min(a.prec, max(prec - a.val, 0))
        if k <= 0:
            return TowerElem.inexact_zero(lev, a.val + max(k, 0))
        vec = lev.ring(k).zero()
        vec[0] = prime.ring(k).from_apoly(mod_pi_power(prime, a.unit, k))
        return TowerElem(lev, a.val, vec, k)

    def from_coeffs(self, n: int, coeffs, prec: int) -> TowerElem:
        """sum_i coeffs[i] omega_n^i with coefficients in A (or ints)."""
        lev = self.level(n)
        R = self.prime.ring(prec)
        arr = np.zeros((len(coeffs),) + R.shape, np.int64)
        for i, c in enumerate(coeffs):
            if isinstance(c, int):
                c = APoly.const(self.prime.F, self.prime.F.from_int(c))
            arr[i] = R.from_apoly(c)
        return TowerElem(lev, 0, lev.ring(prec).reduce(arr), prec)

    def omega(self, n: int, prec: int) -> TowerElem:
        lev = self.level(n)
        if n == 0:
            raise AdmissibilityError("omega_0 is not defined")
        if lev.E == 1:
            # q_p = 2, n = 1: omega_1 is the root of x + (constant term)
            return self.from_coeffs(n, [0, 1], prec)
        vec = lev.ring(prec).zero()
        vec[1, 0, 0] = 1
        return TowerElem(lev, 0, vec, prec)

    def omega_power(self, n: int, j: int, prec: int) -> TowerElem:
        """omega_n^j for 0 <= j <= e_n via x^j mod psi_n."""
        lev = self.level(n)
        arr = np.zeros((j + 1,) + self.prime.ring(prec).shape, np.int64)
        arr[j, 0, 0] = 1
        return TowerElem(lev, 0, lev.ring(prec).reduce(arr), prec)

    def random_elem(self, rng, n: int, prec: int, min_val: int = 0) -> TowerElem:
        """Uniform element of pi^min_val O_n modulo pi^(min_val + prec)."""
        lev = self.level(n)
        R = lev.ring(prec)
        vec = rng.integers(0, self.prime.F.p, size=R.shape)
        return TowerElem(lev, min_val, R.reduce(vec), prec)

    def random_unit(self, rng, n: int, prec: int) -> TowerElem:
        while True:
            u = self.random_elem(rng, n, prec)
            if u.prec and u.s == 0 and self.prime.residue_valuation(u.vec[0]) == 0:
                return u

    # --- Carlitz action ----------------------------------------------------------

    def phi_apply(self, b, a: TowerElem) -> TowerElem:
        """Phi_b(a) = sum_i phi_i a^(q^i) for b in A."""
        if isinstance(b, int):
            b = APoly.const(self.prime.F, self.prime.F.from_int(b))
        coeffs = self.cmap.phi_coeffs(b)
        if a.is_exact_zero() or b.is_zero():
            return TowerElem.exact_zero(a.lev)
        cap = a.abs_prec
        acc = a.scale(coeffs[0])
        power = a
        for i in range(1, len(coeffs)):
            power = power.frobenius(cap=cap)
            if not coeffs[i].is_zero():
                acc = acc + power.scale(coeffs[i])
        return acc

    # --- embeddings ----------------------------------------------------------------

    def embed(self, a: TowerElem, m: int) -> TowerElem:
        """Image of a in K_m (m >= level) via omega_n = Phi_{pi^(m-n)}(omega_m)."""
        n = a.lev.n
        if m == n:
            return a
        if m < n:
            raise AdmissibilityError("embed goes up the tower; use descend to go down")
        lev = self.level(m)
        if a.s is None:
            return TowerElem.exact_zero(lev)
        if a.prec == 0:
            return TowerElem.inexact_zero(lev, a.s)
        k = a.prec
        R = self.prime.ring(k)
        if n == 0:
            vec = lev.ring(k).zero()
            vec[0] = a.vec[0]
            return TowerElem(lev, a.s, vec, k, _norm=False)
        if a.lev.E == 1:
            # level 1 with q_p = 2 is K itself
            return self.embed(self.descend(a, 0), m)
        inner = self.cmap.torsion_poly(m - n).mod_pi_power(self.prime, k)
        out = compose(R, a.vec, inner)
        return TowerElem(lev, a.s, lev.ring(k).reduce(out), k, _norm=False)

    def _radix(self, k: int) -> RadixBase:
        rb = self._radix_cache.get(k)
        if rb is None:
            phi = self.cmap.torsion_poly(1).mod_pi_power(self.prime, k)
            rb = self._radix_cache[k] = RadixBase(self.prime.ring(k), phi)
        return rb

    def relative_coords(self, a: TowerElem) -> np.ndarray:
        """vec = sum_k x^k r_k(Phi_pi(x)); returns r of shape (q_p, e_{n-1}, L, e)."""
        n = a.lev.n
        if n < 2:
            raise AdmissibilityError("relative coordinates need level >= 2")
        Jn = self.level(n - 1).E
        J = next_pow2(Jn)
        digits = self._radix(a.prec).expand(a.vec, J)  # (J, D, L, e)
        if np.any(digits[Jn:] % self.prime.F.p):
            raise ConsistencyError("radix expansion overflowed the level degree")
        return np.moveaxis(digits[:Jn], 1, 0)

    def from_relative(self, n: int, r: np.ndarray, k: int) -> np.ndarray:
        """Inverse of :meth:`relative_coords` (absolute vec, no reduction needed)."""
        digits = np.moveaxis(r, 0, 1)
        out = self._radix(k).combine(digits)
        return _pad_axis(out, 0, self.level(n).E)

    def descend(self, a: TowerElem, m: int) -> TowerElem:
        """Re-express an element known to lie in K_m (m <= level) at level m."""
        n = a.lev.n
        if m == n:
            return a
        if m > n:
            return self.embed(a, m)
        if a.s is None:
            return TowerElem.exact_zero(self.level(m))
        if a.prec == 0:
            return TowerElem.inexact_zero(self.level(m), a.s)
        if n == 1:
            lev0 = self.level(0)
            if a.lev.E == 1:
                # q_p = 2: omega_1 is a scalar, reduce x mod psi_1 already done
                return TowerElem(lev0, a.s, a.vec[:1], a.prec)
            if np.any(a.vec[1:] % self.prime.F.p):
                raise ConsistencyError("element does not lie in K")
            return TowerElem(lev0, a.s, a.vec[:1], a.prec)
        r = self.relative_coords(a)
        if np.any(r[1:] % self.prime.F.p):
            raise ConsistencyError(f"element does not lie in K_{n - 1}")
        down = TowerElem(self.level(n - 1), a.s, r[0], a.prec)
        return self.descend(down, m)

    # --- Galois action --------------------------------------------------------------

    def galois_image_of_omega(self, sigma: GaloisElem, n: int, prec: int) -> TowerElem:
        """Phi_c(omega_n)."""
        return self.phi_apply(sigma.c, self.omega(n, prec))

    def galois_apply(self, sigma, a: TowerElem) -> TowerElem:
        """sigma_c(a): substitute omega_n -> Phi_c(omega_n)."""
        n = a.lev.n
        if not isinstance(sigma, GaloisElem):
            sigma = GaloisElem(self.prime, n, sigma)
        if n == 0 or a.s is None or a.prec == 0 or a.lev.E == 1:
            return a
        k = a.prec
        y = self.galois_image_of_omega(sigma, n, k)
        R = a.lev.ring(k)
        out = compose(R, a.vec, y.residue_array(k), reduce=R.reduce)
        return TowerElem(a.lev, a.s, out, k)

    def residues_mod_pi(self) -> list[APoly]:
        """All elements of A/pi as APoly of degree < d."""
        F = self.prime.F
        return [APoly(F, digits) for digits in itertools.product(range(F.q), repeat=self.prime.d)]

    def units_mod(self, n: int) -> list[APoly]:
        """(A/pi^n)^* as canonical residues."""
        F = self.prime.F
        out = []
        for digits in itertools.product(range(F.q), repeat=n * self.prime.d):
            c = APoly(F, digits)
            if not (c % self.prime.pi).is_zero():
                out.append(c)
        return out

    def kernel_reps(self, n: int, m: int) -> list[APoly]:
        """Residues c mod pi^n with c = 1 mod pi^m (m >= 1), or all units if m = 0."""
        if m == 0:
            return self.units_mod(n)
        F = self.prime.F
        pim = self.prime.pi ** m
        out = []
        for digits in itertools.product(range(F.q), repeat=(n - m) * self.prime.d):
            out.append(mod_pi_power(self.prime, APoly.one(F) + pim * APoly(F, digits), n))
        return out

    # --- traces and norms ------------------------------------------------------------

    @cached_property
    def power_sums(self) -> list[APoly]:
        """S_k = sum over u in Phi[pi] of u^k for 0 <= k < q_p (S_0 = q_p = 0)."""
        D = self.prime.q_p
        F = self.prime.F
        phi = self.cmap.torsion_poly(1)
        a = [phi.coeff(i) for i in range(D + 1)]  # monic, a[D] = 1
        S = [APoly.const(F, F.from_int(D))]
        for k in range(1, D):
            acc = a[D - k].scale(F.from_int(k))
            for i in range(1, k):
                acc = acc + a[D - i] * S[k - i]
            S.append(-acc)
        return S

    def _trace_step(self, a: TowerElem) -> TowerElem:
        """Tr_{n-1}^n for a at level n >= 1."""
        n = a.lev.n
        prime = self.prime
        k = a.prec
        S = self.power_sums
        if n == 1:
            lev0 = self.level(0)
            R = prime.ring(k)
            acc = R.zero()
            for i in range(a.lev.E):
                w = S[i] if i else APoly.const(prime.F, prime.F.from_int(prime.q_p - 1))
                if a.lev.E == 1:
                    w = APoly.one(prime.F)
                acc = acc + R.mul(a.vec[i], R.from_apoly(w))
            return TowerElem(lev0, a.s, R.reduce(acc)[None], k)
        r = self.relative_coords(a)
        Rn = self.level(n - 1).ring(k)
        acc = Rn.zero()
        R = prime.ring(k)
        for i in range(1, prime.q_p):
            if S[i].is_zero():
                continue
            acc = acc + Rn.mul(r[i], R.from_apoly(S[i])[None])
        return TowerElem(self.level(n - 1), a.s, Rn.reduce(acc), k)

    def _shifts(self, n: int, k: int) -> list[TowerElem]:
        """The torsion points u in Phi[pi] as elements of level n-1 (n >= 2)."""
        key = (n, k)
        hit = self._shift_cache.get(key)
        if hit is None:
            w1 = self.omega(1, k)
            hit = [self.embed(self.phi_apply(r, w1), n - 1) for r in self.residues_mod_pi()]
            self._shift_cache[key] = hit
        return hit

    def conjugates_relative(self, a: TowerElem) -> list[TowerElem]:
        """All q_p conjugates of a over K_{n-1}, via Taylor shifts omega_n -> omega_n + u."""
        n = a.lev.n
        prime = self.prime
        p = prime.F.p
        k = a.prec
        D = prime.q_p
        r = self.relative_coords(a)
        Rn = self.level(n - 1).ring(k)
        out = []
        for u in self._shifts(n, k):
            if u.is_exact_zero():
                out.append(a)
                continue
            uvec = u.residue_array(k)
            upow = [Rn.one()]
            for _ in range(1, D):
                upow.append(Rn.mul(upow[-1], uvec))
            shifted = np.zeros_like(r)
            for kk in range(D):
                acc = np.zeros_like(r[0])
                for i in range(kk, D):
                    cb = _binom_mod(i, kk, p)
                    if cb == 0 or not np.any(r[i]):
                        continue
                    acc = acc + cb * Rn.mul(r[i], upow[i - kk])
                shifted[kk] = acc % p
            vec = self.from_relative(n, shifted, k)
            out.append(TowerElem(a.lev, a.s, vec, k, _norm=False))
        return out

    def _norm_step(self, a: TowerElem) -> TowerElem:
        """N_{n-1}^n for a at level n >= 1."""
        n = a.lev.n
        if a.lev.E == 1 and n == 1:
            return self.descend(a, 0)
        if n == 1:
            conj = [self.galois_apply(GaloisElem(self.prime, 1, c), a) for c in self.units_mod(1)]
        else:
            conj = self.conjugates_relative(a)
        prod = conj[0]
        for c in conj[1:]:
            prod = prod * c
        return self.descend(prod, n - 1)

    def trace_to(self, a: TowerElem, m: int, method: str = "relative") -> TowerElem:
        """Tr^n_m(a) for 0 <= m < n; ``method`` is "relative" or "orbit"."""
        n = a.lev.n
        if not 0 <= m <= n:
            raise AdmissibilityError("trace target must be a lower level")
        if a.s is None:
            return TowerElem.exact_zero(self.level(m))
        if method == "orbit":
            return self._orbit(a, m, trace=True)
        while a.lev.n > m:
            if a.prec == 0:
                return TowerElem.inexact_zero(self.level(m), a.s)
            a = self._trace_step(a)
        return a

    def norm_to(self, a: TowerElem, m: int, method: str = "relative") -> TowerElem:
        """N^n_m(a) for 0 <= m < n."""
        n = a.lev.n
        if not 0 <= m <= n:
            raise AdmissibilityError("norm target must be a lower level")
        if a.s is None:
            return TowerElem.exact_zero(self.level(m))
        if method == "orbit":
            return self._orbit(a, m, trace=False)
        while a.lev.n > m:
            if a.prec == 0:
                raise PrecisionError("norm of an element indistinguishable from zero")
            a = self._norm_step(a)
        return a

    def _orbit(self, a: TowerElem, m: int, trace: bool) -> TowerElem:
        n = a.lev.n
        acc = None
        for c in self.kernel_reps(n, m):
            img = self.galois_apply(GaloisElem(self.prime, n, c), a)
            acc = img if acc is None else (acc + img if trace else acc * img)
        return self.descend(acc, m)

    # --- metrics -------------------------------------------------------------------

    def valuation_t(self, a: TowerElem) -> Fraction:
        return a.valuation()

    def different_valuation(self, n: int, prec: int | None = None) -> Fraction:
        """v(psi_n'(omega_n)), checked against n - 1/(q_p - 1)."""
        if n < 1:
            raise AdmissibilityError("different needs n >= 1")
        lev = self.level(n)
        k = prec or (n + 2)
        dpsi = lev.psi_poly.derivative().mod_pi_power(self.prime, k)
        elem = TowerElem(lev, 0, lev.ring(k).reduce(dpsi), k)
        v = elem.valuation()
        expected = n - Fraction(1, self.prime.q_p - 1)
        if v != expected:
            raise ConsistencyError(f"different valuation {v} != {expected}")
        return v

    # --- torsion -----------------------------------------------------------------------

    def torsion_elem(self, tv: TorsionValue, prec: int, level: int | None = None) -> TowerElem:
        """Phi_c(omega_level) as a tower element (at ``level`` if given)."""
        n = tv.level if level is None else level
        if tv.is_zero():
            return TowerElem.exact_zero(self.level(max(n, 0)))
        if n == 0:
            raise AdmissibilityError("nonzero torsion needs level >= 1")
        c = tv.at_level(n)
        return self.phi_apply(c, self.omega(n, prec))

    def recognize_torsion(self, a: TowerElem) -> TorsionValue:
        """Find c with a = Phi_c(omega_n), digit by digit in base pi."""
        n = a.lev.n
        prime = self.prime
        if a.is_zero_within_precision():
            if a.is_exact_zero() or a.s >= 1:
                return TorsionValue.zero(prime)
        k = a.abs_prec if a.abs_prec != INF else self.default_prec
        check = self.phi_apply(prime.pi ** n, a)
        if not check.is_zero_within_precision():
            raise ConsistencyError("element is not pi^n-torsion")
        w1 = self.omega(1, k)
        table = [(r, self.embed(self.phi_apply(r, w1), n)) for r in self.residues_mod_pi()]
        wn = self.omega(n, k)
        digits = []
        cur = a
        for j in range(n):
            probe = self.phi_apply(prime.pi ** (n - 1 - j), cur)
            hit = None
            for r, val in table:
                if probe.equals(val):
                    hit = r
                    break
            if hit is None:
                raise ConsistencyError("torsion digit not found")
            digits.append(hit)
            if not hit.is_zero():
                cur = cur - self.phi_apply(hit * prime.pi ** j, wn)
        c = APoly.zero(prime.F)
        for j, r in enumerate(digits):
            c = c + r * prime.pi ** j
        return TorsionValue(prime, n, c)


def _binom_mod(n: int, k: int, p: int) -> int:
    """C(n, k) mod p by Lucas' theorem."""
    out = 1
    while n or k:
        a, b = n % p, k % p
        if b > a:
            return 0
        out = out * comb(a, b) % p
        n //= p
        k //= p
    return out
