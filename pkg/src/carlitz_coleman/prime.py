"""The prime pi of A = F_q[T] and the completion O = A_pi built on it."""

from __future__ import annotations

import numpy as np

from .apoly import APoly, parse_poly
from .errors import CarlitzError
from .fields import FieldSpec
from .residue import FqRing, Modulus, ResidueRing, apoly_to_digits


class PrimeSpec:
    """A monic irreducible pi with residue field of size q_p = q^d.

    Since A = F_q[T] has trivial class group the tower period f is 1 and
    the positive generator eta of pi^f is pi itself.
    """

    def __init__(self, F: FieldSpec, pi):
        if isinstance(pi, str):
            pi = parse_poly(F, pi)
        if pi.F != F:
            raise CarlitzError("pi lives over a different constant field")
        if not pi.is_monic():
            raise CarlitzError(f"pi = {pi} is not monic")
        if not pi.is_irreducible():
            raise CarlitzError(f"pi = {pi} is reducible")
        self.F = F
        self.pi = pi
        self.d = int(pi.deg)
        self.q = F.q
        self.q_p = F.q ** self.d
        self.f = 1
        self.eta = pi
        self._rings: dict[int, ResidueRing] = {}
        self._pi_mod = None

    def __repr__(self):
        return f"PrimeSpec(q={self.q}, pi={self.pi})"

    def __eq__(self, other):
        return isinstance(other, PrimeSpec) and self.F == other.F and self.pi == other.pi

    def __hash__(self):
        return hash((self.F, self.pi))

    @property
    def fq(self) -> FqRing:
        return FqRing(self.F)

    def ring(self, k: int) -> ResidueRing:
        """The residue ring O/pi^k (cached)."""
        if k < 0:
            raise CarlitzError("negative precision")
        r = self._rings.get(k)
        if r is None:
            r = self._rings[k] = ResidueRing(self, k)
        return r

    @property
    def pi_is_T(self) -> bool:
        return self.pi == APoly.T(self.F)

    def _pimod(self) -> Modulus:
        if self._pi_mod is None:
            self._pi_mod = Modulus(FqRing(self.F), apoly_to_digits(self.pi, self.F))
        return self._pi_mod

    # --- helpers on raw residue arrays (trailing axes (L, e)) ---------------

    def div_pi(self, a: np.ndarray, j: int = 1, check: bool = True) -> np.ndarray:
        """Exact division of residues by pi^j; input mod pi^k, output mod pi^(k-j)."""
        if j == 0:
            return a
        k = a.shape[-2] // self.d
        if self.pi_is_T:
            if check and np.any(a[..., :j, :]):
                raise CarlitzError("division by pi^j of a non-multiple")
            return a[..., j:, :]
        out = a
        for _ in range(j):
            qt, r = self._pimod().divmod(out)
            if check and np.any(r):
                raise CarlitzError("division by pi of a non-multiple")
            out = qt
        return self.ring(k - j).reduce(out)

    def mul_pi(self, a: np.ndarray, j: int = 1, k: int | None = None) -> np.ndarray:
        """Multiply residues by pi^j, reducing mod pi^k (default: keep k)."""
        if k is None:
            k = a.shape[-2] // self.d
        R = self.ring(k)
        if j == 0:
            return R.reduce(a)
        if self.pi_is_T:
            pad = np.zeros(a.shape[:-2] + (j, a.shape[-1]), np.int64)
            return R.reduce(np.concatenate([pad, a], axis=-2))
        pij = apoly_to_digits(self.pi ** j, self.F)
        return R.mul(a, pij)

    def residue_valuation(self, a: np.ndarray) -> np.ndarray:
        """Per-element pi-adic valuation of residues; k for zero residues."""
        k = a.shape[-2] // self.d
        batch = a.shape[:-2]
        if self.pi_is_T:
            nz = np.any(a != 0, axis=-1)
            if k == 0:
                return np.zeros(batch, np.int64)
            first = np.argmax(nz, axis=-1)
            return np.where(nz.any(axis=-1), first, k)
        v = np.full(batch, k, dtype=np.int64)
        cur = a
        alive = np.ones(batch, dtype=bool)
        for j in range(k):
            qt, r = self._pimod().divmod(cur)
            nonzero_r = np.any(r != 0, axis=(-1, -2))
            hit = alive & nonzero_r
            v[hit] = j
            alive &= ~nonzero_r
            if not alive.any():
                break
            cur = qt
        return v

    def frobenius_residue(self, a: np.ndarray, times: int = 1, k_out: int | None = None) -> np.ndarray:
        """a -> a^(q^times) on residues: T-exponents scale by q^times."""
        k = a.shape[-2] // self.d
        if k_out is None:
            k_out = k
        step = self.q ** times
        L = a.shape[-2]
        keep = min(L, (k_out * self.d + step - 1) // step) if self.pi_is_T else L
        out = np.zeros(a.shape[:-2] + ((max(keep, 1) - 1) * step + 1, a.shape[-1]), np.int64)
        out[..., ::step, :][..., :keep, :] = a[..., :keep, :]
        return self.ring(k_out).reduce(out)

    def inv_mod_pi(self, a: np.ndarray) -> np.ndarray:
        """Inverse of a single residue modulo pi, as a digit array of length d."""
        from .residue import digits_to_apoly

        a0 = digits_to_apoly(a, self.F) % self.pi
        if a0.is_zero():
            raise ZeroDivisionError("not a unit modulo pi")
        inv = a0.powmod(self.q_p - 2, self.pi) if self.q_p > 2 else a0
        return self.ring(1).from_apoly(inv)

    def unit_inverse(self, a: np.ndarray, k: int) -> np.ndarray:
        """Newton inverse of a unit residue modulo pi^k."""
        R = self.ring(k)
        a = R.reduce(a)
        y = R.reduce(self.inv_mod_pi(a))
        n = 1
        p = self.F.p
        while n < k:
            n = min(2 * n, k)
            err = R.mul(a, y)
            corr = (-err) % p
            corr = (corr + 2 * R.one()) % p
            y = R.mul(y, corr)
        return y
