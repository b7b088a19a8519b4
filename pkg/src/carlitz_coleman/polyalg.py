"""Polynomial algorithms over the array rings: composition and radix expansion."""

from __future__ import annotations

import numpy as np

from .residue import Modulus, _pad_axis, ring_mul


def next_pow2(n: int) -> int:
    return 1 << max(n - 1, 0).bit_length()


def power_table(R, g: np.ndarray, count: int, reduce=None) -> list[np.ndarray]:
    """[g, g^2, g^4, ...] (``count`` entries), optionally reduced after each square."""
    out = [g]
    for _ in range(count - 1):
        sq = ring_mul(R, out[-1], out[-1])
        out.append(reduce(sq) if reduce else sq)
    return out


def compose_chunks(R, chunks: np.ndarray, powers: list[np.ndarray], reduce=None) -> np.ndarray:
    """sum_j chunks[j] * G^j where ``powers[i] = G^(2^i)``.

    ``chunks`` has shape (J, c, *R.shape) with J a power of two; each chunk
    is a polynomial with c terms over R.  Pairs are merged bottom-up, one
    batched product per level.  ``reduce`` (if given) is applied to every
    partial result, e.g. reduction modulo psi_n.
    """
    cur = chunks
    lvl = 0
    while cur.shape[0] > 1:
        lo, hi = cur[0::2], cur[1::2]
        prod = ring_mul(R, hi, powers[lvl][None])
        n = max(lo.shape[1], prod.shape[1])
        merged = (_pad_axis(lo, 1, n) + _pad_axis(prod, 1, n)) % R.p
        if reduce is not None:
            merged = reduce(merged)
        cur = merged
        lvl += 1
    return cur[0]


def compose(R, f: np.ndarray, g: np.ndarray, reduce=None, powers=None) -> np.ndarray:
    """f(g) for f with coefficients over R (shape (nf, *R.shape))."""
    nf = f.shape[0]
    J = next_pow2(nf)
    chunks = _pad_axis(f, 0, J)[:, None]
    if J == 1:
        return reduce(chunks[0]) if reduce else chunks[0]
    if powers is None:
        powers = power_table(R, g, J.bit_length() - 1, reduce)
    return compose_chunks(R, chunks, powers, reduce)


class RadixBase:
    """Expansion of polynomials over R in powers of a fixed monic phi."""

    def __init__(self, R, phi: np.ndarray):
        self.R = R
        self.phi = np.asarray(phi) % R.p
        self.D = self.phi.shape[0] - 1
        self._pows = [self.phi]
        self._mods: dict[int, Modulus] = {}

    def phi_power(self, i: int) -> np.ndarray:
        """phi^(2^i)."""
        while len(self._pows) <= i:
            self._pows.append(ring_mul(self.R, self._pows[-1], self._pows[-1]))
        return self._pows[i]

    def _modulus(self, i: int) -> Modulus:
        m = self._mods.get(i)
        if m is None:
            m = self._mods[i] = Modulus(self.R, self.phi_power(i))
        return m

    def expand(self, a: np.ndarray, J: int) -> np.ndarray:
        """Digits of a in base phi: shape (..., J, D, *R.shape), J a power of 2."""
        ax = -(self.R.ndim + 1)
        D = self.D
        a = _pad_axis(a, ax, J * D)
        if J == 1:
            return np.expand_dims(a, ax - 1)
        i = (J // 2).bit_length() - 1
        qt, r = self._modulus(i).divmod(a)
        h = J // 2
        qt = _pad_axis(qt, ax, h * D)
        both = np.stack([r, qt], axis=ax - 1)
        sub = self.expand(both, h)
        # sub: (..., 2, h, D, ...) -> (..., 2h, D, ...)
        shape = sub.shape
        k = len(shape) + ax - 2
        return sub.reshape(shape[:k] + (2 * h,) + shape[k + 2:])

    def combine(self, digits: np.ndarray) -> np.ndarray:
        """Inverse of :meth:`expand` for an unbatched digit array (J, D, ...)."""
        J = digits.shape[0]
        J2 = next_pow2(J)
        digits = _pad_axis(digits, 0, J2)
        if J2 == 1:
            return digits[0]
        powers = [self.phi_power(i) for i in range(J2.bit_length() - 1)]
        return compose_chunks(self.R, digits, powers)
