"""Polynomials in A = F_q[T].

APoly is a small immutable value type used for exact elements of A: the
prime, Carlitz coefficients, Galois residues.  Bulk arithmetic on long
polynomials lives in :mod:`residue`, which works on numpy digit arrays.
"""

from __future__ import annotations

import re

import numpy as np

from .errors import CarlitzError
from .fields import FieldSpec, _prime_factors


class APoly:
    """An element of F_q[T], coefficients low-to-high as F_q ints."""

    __slots__ = ("F", "c")

    def __init__(self, F: FieldSpec, coeffs=()):
        c = [int(x) for x in coeffs]
        while c and c[-1] == 0:
            c.pop()
        self.F = F
        self.c = tuple(c)

    # constructors
    @classmethod
    def zero(cls, F):
        return cls(F, ())

    @classmethod
    def one(cls, F):
        return cls(F, (1,))

    @classmethod
    def T(cls, F):
        return cls(F, (0, 1))

    @classmethod
    def const(cls, F, a: int):
        return cls(F, (a,))

    @classmethod
    def monomial(cls, F, k: int, a: int = 1):
        return cls(F, (0,) * k + (a,))

    # basic queries
    @property
    def deg(self) -> float:
        return len(self.c) - 1 if self.c else float("-inf")

    def is_zero(self) -> bool:
        return not self.c

    def is_monic(self) -> bool:
        return bool(self.c) and self.c[-1] == 1

    def lead(self) -> int:
        return self.c[-1] if self.c else 0

    def __getitem__(self, i) -> int:
        return self.c[i] if 0 <= i < len(self.c) else 0

    def __len__(self):
        return len(self.c)

    def __eq__(self, other):
        if isinstance(other, int):
            other = APoly.const(self.F, self.F.from_int(other))
        return isinstance(other, APoly) and self.F == other.F and self.c == other.c

    def __hash__(self):
        return hash((self.F, self.c))

    def __repr__(self):
        return f"APoly({format_poly(self)})"

    def __str__(self):
        return format_poly(self)

    # ring operations
    def _coerce(self, other) -> "APoly":
        if isinstance(other, APoly):
            return other
        if isinstance(other, int):
            return APoly.const(self.F, self.F.from_int(other))
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        F, a, b = self.F, self.c, other.c
        n = max(len(a), len(b))
        return APoly(F, [F.add(a[i] if i < len(a) else 0, b[i] if i < len(b) else 0)
                         for i in range(n)])

    __radd__ = __add__

    def __neg__(self):
        return APoly(self.F, [self.F.neg(x) for x in self.c])

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def scale(self, a: int) -> "APoly":
        return APoly(self.F, [self.F.mul(a, x) for x in self.c])

    def shift(self, k: int) -> "APoly":
        return APoly(self.F, (0,) * k + self.c)

    def __mul__(self, other):
        other = self._coerce(other)
        if not self.c or not other.c:
            return APoly.zero(self.F)
        F = self.F
        if F.e == 1:
            a = np.array(self.c, dtype=np.int64)
            b = np.array(other.c, dtype=np.int64)
            return APoly(F, (np.convolve(a, b) % F.p).tolist())
        out = [0] * (len(self.c) + len(other.c) - 1)
        mt, at = F.mul_table, F.add_table
        for i, x in enumerate(self.c):
            if x:
                for j, y in enumerate(other.c):
                    out[i + j] = int(at[out[i + j], mt[x, y]])
        return APoly(F, out)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative power in A")
        result, base = APoly.one(self.F), self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def divmod(self, other: "APoly"):
        other = self._coerce(other)
        if other.is_zero():
            raise ZeroDivisionError("division by the zero polynomial")
        F = self.F
        r = list(self.c)
        db = len(other.c) - 1
        inv_lead = F.inv(other.c[-1])
        qc = [0] * max(len(r) - db, 0)
        while len(r) - 1 >= db and r:
            f = F.mul(r[-1], inv_lead)
            s = len(r) - 1 - db
            qc[s] = f
            for i, bi in enumerate(other.c):
                r[s + i] = F.sub(r[s + i], F.mul(f, bi))
            while r and r[-1] == 0:
                r.pop()
        return APoly(F, qc), APoly(F, r)

    def __floordiv__(self, other):
        return self.divmod(other)[0]

    def __mod__(self, other):
        return self.divmod(other)[1]

    def monic(self) -> "APoly":
        if self.is_zero():
            return self
        return self.scale(self.F.inv(self.lead()))

    def gcd(self, other: "APoly") -> "APoly":
        a, b = self, self._coerce(other)
        while not b.is_zero():
            a, b = b, a % b
        return a.monic()

    def powmod(self, k: int, m: "APoly") -> "APoly":
        result, base = APoly.one(self.F) % m, self % m
        while k:
            if k & 1:
                result = (result * base) % m
            base = (base * base) % m
            k >>= 1
        return result

    def frobenius(self, times: int = 1) -> "APoly":
        """a^(q^times), which for a in F_q[T] is a(T^(q^times))."""
        if times == 0 or not self.c:
            return self
        step = self.F.q ** times
        out = [0] * ((len(self.c) - 1) * step + 1)
        out[::step] = self.c
        return APoly(self.F, out)

    def derivative(self) -> "APoly":
        F = self.F
        return APoly(F, [F.mul(F.from_int(i), x) for i, x in enumerate(self.c)][1:])

    def eval_int(self, x: int) -> int:
        """Evaluate at an element of F_q."""
        acc = 0
        for coef in reversed(self.c):
            acc = self.F.add(self.F.mul(acc, x), coef)
        return acc

    def is_irreducible(self) -> bool:
        return is_irreducible(self)

    def to_list(self) -> list[int]:
        return list(self.c)


def is_irreducible(a: APoly) -> bool:
    """Rabin's irreducibility test over F_q."""
    if a.is_zero():
        raise CarlitzError("irreducibility of the zero polynomial")
    n = int(a.deg)
    if n <= 0:
        return False
    if n == 1:
        return True
    m = a.monic()
    q = a.F.q
    T = APoly.T(a.F)

    def frob(k):
        # T^(q^k) mod m by repeated q-th powering
        h = T
        for _ in range(k):
            h = h.powmod(q, m)
        return h

    for r in _prime_factors(n):
        if m.gcd(frob(n // r) - T).deg != 0:
            return False
    return (frob(n) - T).is_zero()


# --- text formats -----------------------------------------------------------

def format_fq(F: FieldSpec, x: int) -> str:
    if F.e == 1:
        return str(x)
    return "[" + ",".join(str(d) for d in F.digits(x)) + "]"


def format_poly(a: APoly, var: str = "T") -> str:
    if a.is_zero():
        return "0"
    terms = []
    for i in range(len(a.c) - 1, -1, -1):
        x = a.c[i]
        if not x:
            continue
        cs = format_fq(a.F, x)
        if i == 0:
            terms.append(cs)
            continue
        mono = var if i == 1 else f"{var}^{i}"
        terms.append(mono if x == 1 else f"{cs}*{mono}")
    return "+".join(terms)


_TERM = re.compile(r"^(?:(?P<c>\d+|\[[\d,\s]*\])\*?)?(?:(?P<v>[A-Za-z])(?:\^(?P<k>\d+))?)?$")


def parse_fq(F: FieldSpec, text: str) -> int:
    text = text.strip()
    if text.startswith("["):
        ds = [int(t) for t in text.strip("[]").split(",") if t.strip()]
        if len(ds) != F.e:
            raise CarlitzError(f"F_q element needs exactly {F.e} digits: {text!r}")
        return F.from_digits(ds)
    return F.from_int(int(text))


def parse_poly(F: FieldSpec, text: str, var: str = "T") -> APoly:
    """Parse "2*T^3+T+1" or a coefficient list "[1,1,0,2]" (low-to-high).

    A list whose entries are themselves lists gives F_q coefficients as
    digit vectors, e.g. "[[0,1],[1,0]]".
    """
    text = text.replace(" ", "")
    if not text:
        raise CarlitzError("empty polynomial text")
    if text.startswith("[") and not text.startswith("[["):
        if re.fullmatch(r"\[[\d,]*\]", text) and not re.search(r"[A-Za-z*^+]", text):
            return APoly(F, [F.from_int(int(t)) for t in text.strip("[]").split(",") if t])
    if text.startswith("[["):
        inner = re.findall(r"\[[\d,]*\]", text[1:-1])
        return APoly(F, [parse_fq(F, t) for t in inner])
    out = APoly.zero(F)
    text = text.replace("-", "+-")
    for raw in text.split("+"):
        if not raw:
            continue
        neg = raw.startswith("-")
        raw = raw.lstrip("-")
        m = _TERM.match(raw)
        if not m or (m.group("v") and m.group("v") != var) or not raw:
            raise CarlitzError(f"cannot parse term {raw!r} in {text!r}")
        c = parse_fq(F, m.group("c")) if m.group("c") else 1
        k = 0
        if m.group("v"):
            k = int(m.group("k")) if m.group("k") else 1
        term = APoly.monomial(F, k, c)
        out = out - term if neg else out + term
    return out
