"""Exact polynomials in A[x], stored as digit arrays of shape (X, Tlen, e)."""

from __future__ import annotations

import numpy as np

from ._kernel import kconv
from .apoly import APoly, format_poly
from .residue import FqRing, _pad_axis, apoly_to_digits, digits_to_apoly


class AXPoly:
    """A polynomial sum_i a_i(T) x^i with exact coefficients in F_q[T]."""

    def __init__(self, F, data: np.ndarray):
        data = np.asarray(data, dtype=np.int64) % F.p
        # trim trailing zero x-terms and T-terms, keep at least one row each
        nz_x = np.nonzero(np.any(data != 0, axis=(1, 2)))[0]
        X = int(nz_x[-1]) + 1 if nz_x.size else 1
        nz_t = np.nonzero(np.any(data != 0, axis=(0, 2)))[0]
        Tl = int(nz_t[-1]) + 1 if nz_t.size else 1
        self.F = F
        self.data = data[:X, :Tl]

    @classmethod
    def from_coeffs(cls, F, coeffs) -> "AXPoly":
        """From a list of APoly (index = x-degree) or a dict {degree: APoly}."""
        if isinstance(coeffs, dict):
            items = coeffs.items()
            X = max(coeffs) + 1 if coeffs else 1
        else:
            items = enumerate(coeffs)
            X = max(len(coeffs), 1)
        items = list(items)
        Tl = max([len(c.c) for _, c in items] + [1])
        data = np.zeros((X, Tl, F.e), np.int64)
        for i, c in items:
            if not c.is_zero():
                data[i, :len(c.c)] = apoly_to_digits(c, F)
        return cls(F, data)

    @property
    def degree(self) -> int:
        if not np.any(self.data):
            return -1
        return self.data.shape[0] - 1

    def coeff(self, i: int) -> APoly:
        if i >= self.data.shape[0]:
            return APoly.zero(self.F)
        return digits_to_apoly(self.data[i], self.F)

    def coeffs(self) -> list[APoly]:
        return [self.coeff(i) for i in range(self.data.shape[0])]

    def nonzero_terms(self) -> dict[int, APoly]:
        idx = np.nonzero(np.any(self.data != 0, axis=(1, 2)))[0]
        return {int(i): self.coeff(int(i)) for i in idx}

    def __eq__(self, other):
        return isinstance(other, AXPoly) and self.F == other.F and np.array_equal(
            self.data, other.data)

    def __add__(self, other: "AXPoly") -> "AXPoly":
        X = max(self.data.shape[0], other.data.shape[0])
        Tl = max(self.data.shape[1], other.data.shape[1])
        a = _pad_axis(_pad_axis(self.data, 0, X), 1, Tl)
        b = _pad_axis(_pad_axis(other.data, 0, X), 1, Tl)
        return AXPoly(self.F, a + b)

    def __neg__(self):
        return AXPoly(self.F, -self.data)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other: "AXPoly") -> "AXPoly":
        return AXPoly(self.F, FqRing(self.F).reduce(kconv(self.data, other.data, self.F.p)))

    def scale(self, c: APoly) -> "AXPoly":
        cd = apoly_to_digits(c, self.F)[None]
        return AXPoly(self.F, FqRing(self.F).reduce(kconv(self.data, cd, self.F.p)))

    def derivative(self) -> "AXPoly":
        n = self.data.shape[0]
        if n == 1:
            return AXPoly(self.F, np.zeros_like(self.data))
        k = (np.arange(1, n) % self.F.p)[:, None, None]
        return AXPoly(self.F, self.data[1:] * k)

    def mod_pi_power(self, prime, k: int) -> np.ndarray:
        """Coefficient array reduced into O/pi^k, shape (X, k*d, e)."""
        return prime.ring(k).reduce(self.data)

    def __repr__(self):
        return f"AXPoly({self.format()})"

    def format(self, var: str = "x") -> str:
        terms = []
        for i in range(self.data.shape[0] - 1, -1, -1):
            c = self.coeff(i)
            if c.is_zero():
                continue
            cs = format_poly(c)
            if len(c.c) > 1 and "+" in cs:
                cs = f"({cs})"
            mono = "" if i == 0 else (var if i == 1 else f"{var}^{i}")
            if not mono:
                terms.append(cs)
            elif c == APoly.one(self.F):
                terms.append(mono)
            else:
                terms.append(f"{cs}*{mono}")
        return "+".join(terms) if terms else "0"

    def to_json(self) -> list[str]:
        return [format_poly(c) for c in self.coeffs()]


def exact_divide_sparse(num: AXPoly, den: AXPoly) -> tuple[AXPoly, AXPoly]:
    """Long division by a monic divisor with few nonzero terms."""
    F = num.F
    fq = FqRing(F)
    terms = {i: apoly_to_digits(c, F) for i, c in den.nonzero_terms().items()}
    m = den.degree
    if not np.array_equal(terms[m][:1], FqRing(F).one()[None]) or len(terms[m]) != 1:
        raise ValueError("divisor must be monic")
    lower = [(j, c) for j, c in terms.items() if j < m]
    Tl = num.data.shape[1] + (max(len(c) for _, c in lower) if lower else 1) + 1
    R = [_pad_axis(row, 0, Tl).copy() for row in num.data]
    n = len(R) - 1
    Q = [np.zeros((Tl, F.e), np.int64) for _ in range(max(n - m + 1, 1))]
    for k in range(n, m - 1, -1):
        c = R[k] % F.p
        if not np.any(c):
            continue
        Q[k - m] = c
        for j, b in lower:
            prod = fq.reduce(kconv(c, b, F.p))
            R[k - m + j] = R[k - m + j] - _pad_axis(prod, 0, Tl)
        R[k] = np.zeros_like(c)
    rem = np.array(R[:max(m, 1)]) % F.p
    return AXPoly(F, np.array(Q)), AXPoly(F, rem)
