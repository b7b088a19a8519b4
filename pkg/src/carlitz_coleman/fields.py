"""Finite fields F_q = F_p[s]/(m(s)).

Elements are plain ints in ``range(q)``; the base-p digits of the int are
the coefficients of the residue polynomial in s, lowest digit first.  All
arithmetic goes through tables built once per field.
"""

from __future__ import annotations

import itertools
from functools import cached_property

import numpy as np

from .errors import CarlitzError


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    i = 2
    while i * i <= n:
        if n % i == 0:
            return False
        i += 1
    return True


# --- tiny dense polynomial helpers over F_p, lists low-to-high -------------

def _trim(c):
    c = list(c)
    while c and c[-1] == 0:
        c.pop()
    return c


def _pmod(a, m, p):
    a = _trim(a)
    inv = pow(m[-1], p - 2, p)
    dm = len(m) - 1
    while len(a) - 1 >= dm:
        f = a[-1] * inv % p
        shift = len(a) - 1 - dm
        for i, mi in enumerate(m):
            a[shift + i] = (a[shift + i] - f * mi) % p
        a = _trim(a)
    return a


def _pmul(a, b, p):
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] = (out[i + j] + x * y) % p
    return out


def _pgcd(a, b, p):
    a, b = _trim(a), _trim(b)
    while b:
        a, b = b, _pmod(a, b, p)
    return a


def _ppowmod(base, exp, m, p):
    result = [1]
    base = _pmod(base, m, p)
    while exp:
        if exp & 1:
            result = _pmod(_pmul(result, base, p), m, p)
        base = _pmod(_pmul(base, base, p), m, p)
        exp >>= 1
    return result


def _prime_factors(n):
    out, f = [], 2
    while f * f <= n:
        if n % f == 0:
            out.append(f)
            while n % f == 0:
                n //= f
        f += 1
    if n > 1:
        out.append(n)
    return out


def fp_is_irreducible(m, p) -> bool:
    """Rabin's test for a monic polynomial over the prime field."""
    m = _trim(m)
    n = len(m) - 1
    if n < 1:
        return False
    if n == 1:
        return True
    x = [0, 1]

    def frob_iter(k):
        # x^(p^k) mod m
        return _ppowmod(x, p ** k, m, p)

    for r in _prime_factors(n):
        h = frob_iter(n // r)
        diff = _trim([(a - b) % p for a, b in itertools.zip_longest(h, x, fillvalue=0)])
        if len(_pgcd(m, diff, p)) != 1:
            return False
    h = frob_iter(n)
    return _trim([(a - b) % p for a, b in itertools.zip_longest(h, x, fillvalue=0)]) == []


def default_modulus(p: int, e: int) -> tuple[int, ...]:
    """Smallest monic irreducible of degree e, low coefficients compared first."""
    if e == 1:
        return (0, 1)
    for n in range(p ** e):
        low = [(n // p ** i) % p for i in range(e)]
        cand = low + [1]
        if cand[0] and fp_is_irreducible(cand, p):
            return tuple(cand)
    raise CarlitzError(f"no irreducible polynomial of degree {e} over F_{p}")


class FieldSpec:
    """The finite field F_q with q = p^e, given by an irreducible modulus."""

    def __init__(self, p: int, e: int = 1, modulus=None):
        if not is_prime(p):
            raise CarlitzError(f"characteristic {p} is not prime")
        if e < 1:
            raise CarlitzError("extension degree must be at least 1")
        if modulus is None:
            modulus = default_modulus(p, e)
        modulus = tuple(int(c) % p for c in modulus)
        modulus = tuple(_trim(modulus))
        if len(modulus) != e + 1 or modulus[-1] != 1:
            raise CarlitzError(f"modulus must be monic of degree {e}")
        if e > 1 and not fp_is_irreducible(list(modulus), p):
            raise CarlitzError(f"modulus {list(modulus)} is reducible over F_{p}")
        self.p = p
        self.e = e
        self.q = p ** e
        self.modulus = modulus

    def __repr__(self):
        return f"FieldSpec(p={self.p}, e={self.e}, modulus={list(self.modulus)})"

    def __eq__(self, other):
        return isinstance(other, FieldSpec) and (self.p, self.e, self.modulus) == (
            other.p, other.e, other.modulus)

    def __hash__(self):
        return hash((self.p, self.e, self.modulus))

    # digits <-> ints
    def digits(self, x: int) -> list[int]:
        return [(x // self.p ** i) % self.p for i in range(self.e)]

    def from_digits(self, ds) -> int:
        return sum(int(d) % self.p * self.p ** i for i, d in enumerate(ds))

    @cached_property
    def digit_table(self) -> np.ndarray:
        """Row x holds the base-p digits of field element x."""
        return np.array([self.digits(x) for x in range(self.q)], dtype=np.int64)

    @cached_property
    def _weights(self) -> np.ndarray:
        return self.p ** np.arange(self.e, dtype=np.int64)

    def to_ints(self, arr: np.ndarray) -> np.ndarray:
        """Collapse a trailing digit axis back to field-element ints."""
        return (np.asarray(arr) % self.p) @ self._weights

    def to_digits(self, ints) -> np.ndarray:
        return self.digit_table[np.asarray(ints, dtype=np.int64)]

    # tables
    @cached_property
    def add_table(self) -> np.ndarray:
        d = self.digit_table
        s = (d[:, None, :] + d[None, :, :]) % self.p
        return s @ self._weights

    @cached_property
    def mul_table(self) -> np.ndarray:
        q = self.q
        tab = np.zeros((q, q), dtype=np.int64)
        for a in range(q):
            da = self.digits(a)
            for b in range(a, q):
                prod = _pmod(_pmul(da, self.digits(b), self.p), list(self.modulus), self.p)
                tab[a, b] = tab[b, a] = self.from_digits(prod)
        return tab

    @cached_property
    def neg_table(self) -> np.ndarray:
        return self.to_ints((-self.digit_table) % self.p)

    @cached_property
    def inv_table(self) -> np.ndarray:
        inv = np.zeros(self.q, dtype=np.int64)
        rows, cols = np.nonzero(self.mul_table == 1)
        inv[rows] = cols
        return inv

    def add(self, a: int, b: int) -> int:
        return int(self.add_table[a, b])

    def sub(self, a: int, b: int) -> int:
        return int(self.add_table[a, self.neg_table[b]])

    def neg(self, a: int) -> int:
        return int(self.neg_table[a])

    def mul(self, a: int, b: int) -> int:
        return int(self.mul_table[a, b])

    def inv(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError("inverse of 0 in F_q")
        return int(self.inv_table[a])

    def from_int(self, n: int) -> int:
        """Image of the integer n under Z -> F_p -> F_q."""
        return n % self.p

    def elements(self):
        return range(self.q)


def make_field(p: int, e: int = 1, modulus=None) -> FieldSpec:
    return FieldSpec(p, e, modulus)
