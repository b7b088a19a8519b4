"""Vectorised arithmetic on digit arrays.

Layout conventions used throughout the package:

* an F_q element is a vector of e base-p digits (last axis);
* an element of O/pi^k is its canonical T-residue of degree < k*d, so an
  array of shape ``(k*d, e)``;
* polynomials over such a ring put the polynomial axis in front of the
  coefficient axes, and any further leading axes are batch axes.

A ring object knows how many trailing axes its coefficients occupy and how
to reduce an over-long convolution result back to canonical form.  With
that, every product is ``ring.reduce(kconv(a, b, p))``.
"""

from __future__ import annotations

import numpy as np

from ._kernel import kconv
from .errors import ConsistencyError


def _pad_axis(a: np.ndarray, axis: int, length: int) -> np.ndarray:
    n = a.shape[axis]
    if n == length:
        return a
    if n > length:
        idx = [slice(None)] * a.ndim
        idx[axis] = slice(0, length)
        return a[tuple(idx)]
    widths = [(0, 0)] * a.ndim
    widths[axis] = (0, length - n)
    return np.pad(a, widths)


def _take(a, axis, sl):
    idx = [slice(None)] * a.ndim
    idx[axis] = sl
    return a[tuple(idx)]


class FqRing:
    """F_q as a coefficient ring with one trailing axis of e digits."""

    ndim = 1

    def __init__(self, F):
        self.F = F
        self.p = F.p
        self.shape = (F.e,)
        self._mod = np.array(F.modulus, dtype=np.int64)

    def reduce(self, a: np.ndarray) -> np.ndarray:
        e, p = self.F.e, self.p
        n = a.shape[-1]
        if n > e:
            a = a.copy()
            for i in range(n - 1, e - 1, -1):
                top = a[..., i:i + 1]
                a[..., i - e:i] -= top * self._mod[:e]
            a = a[..., :e]
        elif n < e:
            a = _pad_axis(a, -1, e)
        return a % p

    def one(self):
        out = np.zeros(self.shape, dtype=np.int64)
        out[0] = 1
        return out

    def zero(self):
        return np.zeros(self.shape, dtype=np.int64)

    def mul(self, a, b):
        return self.reduce(kconv(a, b, self.p))


def ring_mul(R, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Full product over every non-coefficient axis, coefficients reduced."""
    if a.ndim < b.ndim:
        a = a.reshape((1,) * (b.ndim - a.ndim) + a.shape)
    elif b.ndim < a.ndim:
        b = b.reshape((1,) * (a.ndim - b.ndim) + b.shape)
    return R.reduce(kconv(a, b, R.p))


def trunc_mul(R, a, b, length: int) -> np.ndarray:
    """Product of two polynomials over R, truncated to ``length`` terms."""
    ax = -(R.ndim + 1)
    a = _pad_axis(a, ax, min(a.shape[ax], length))
    b = _pad_axis(b, ax, min(b.shape[ax], length))
    return _pad_axis(ring_mul(R, a, b), ax, length)


def series_inverse(R, f: np.ndarray, length: int, inv0: np.ndarray | None = None) -> np.ndarray:
    """Inverse of a power series over R modulo x^length by Newton iteration.

    ``inv0`` is the inverse of the constant term; it defaults to 1, which is
    the monic reversed-divisor case.
    """
    ax = -(R.ndim + 1)
    p = R.p
    y = (inv0 if inv0 is not None else R.one())[None]
    n = 1
    while n < length:
        n = min(2 * n, length)
        err = trunc_mul(R, f, y, n)
        # y <- y * (2 - f*y)
        corr = (-err) % p
        corr[0] = (corr[0] + 2 * R.one()) % p
        y = trunc_mul(R, y, corr, n)
    return _pad_axis(y, ax, length)


class Modulus:
    """Barrett division by a fixed monic polynomial over a coefficient ring."""

    def __init__(self, R, b: np.ndarray):
        self.R = R
        self.b = np.asarray(b) % R.p
        self.ax = -(R.ndim + 1)
        self.m = self.b.shape[self.ax] - 1
        lead = _take(self.b, self.ax, self.m)
        if not np.array_equal(lead, R.one()):
            raise ConsistencyError("Modulus requires a monic divisor")
        self._rev = np.flip(self.b, axis=self.ax)
        self._inv = None

    def _rev_inverse(self, length: int) -> np.ndarray:
        if self._inv is None or self._inv.shape[self.ax] < length:
            want = max(length, 2 * (self._inv.shape[self.ax] if self._inv is not None else 1))
            self._inv = series_inverse(self.R, self._rev, want)
        return _take(self._inv, self.ax, slice(0, length))

    def divmod(self, a: np.ndarray):
        R, ax, m = self.R, self.ax, self.m
        n = a.shape[ax]
        if n <= m:
            return np.zeros_like(_pad_axis(a, ax, 1)), _pad_axis(a, ax, m)
        k = n - m
        ra = np.flip(a, axis=ax)
        qrev = trunc_mul(R, ra, self._rev_inverse(k), k)
        q = np.flip(qrev, axis=ax)
        prod = ring_mul(R, q, self.b)
        r = (_take(a, ax, slice(0, m)) - _take(prod, ax, slice(0, m))) % R.p
        return q, r

    def rem(self, a: np.ndarray) -> np.ndarray:
        if a.shape[self.ax] <= self.m:
            return _pad_axis(a, self.ax, self.m)
        return self.divmod(a)[1]


class ResidueRing:
    """O/pi^k stored as canonical T-residues, trailing shape ``(k*d, e)``."""

    ndim = 2

    def __init__(self, prime, k: int):
        from .apoly import APoly

        self.prime = prime
        self.F = prime.F
        self.p = prime.F.p
        self.k = k
        self.d = prime.d
        self.L = k * prime.d
        self.shape = (self.L, prime.F.e)
        self.fq = FqRing(prime.F)
        self._pi_is_T = prime.pi == APoly.T(prime.F)
        self._mod = None
        if not self._pi_is_T and self.L > 0:
            self._mod = Modulus(self.fq, apoly_to_digits(prime.pi ** k, self.F))

    def reduce(self, a: np.ndarray) -> np.ndarray:
        a = self.fq.reduce(a)
        if self.L == 0:
            return np.zeros(a.shape[:-2] + (0, self.F.e), np.int64)
        if self._pi_is_T or a.shape[-2] <= self.L:
            return _pad_axis(a, -2, self.L)
        return self._mod.rem(a)

    def one(self):
        out = np.zeros(self.shape, dtype=np.int64)
        if self.L:
            out[0, 0] = 1
        return out

    def zero(self):
        return np.zeros(self.shape, dtype=np.int64)

    def mul(self, a, b):
        return ring_mul(self, a, b)

    def from_apoly(self, a) -> np.ndarray:
        return self.reduce(apoly_to_digits(a, self.F))

    def lift(self, a: np.ndarray) -> np.ndarray:
        """Reinterpret a residue as an element of this ring (pads/reduces)."""
        return self.reduce(a)


def apoly_to_digits(a, F) -> np.ndarray:
    """Digit array of shape (len, e) for an APoly (at least one row)."""
    if a.is_zero():
        return np.zeros((1, F.e), np.int64)
    return F.to_digits(np.array(a.c, dtype=np.int64))


def digits_to_apoly(arr: np.ndarray, F):
    from .apoly import APoly

    return APoly(F, F.to_ints(arr).tolist())
