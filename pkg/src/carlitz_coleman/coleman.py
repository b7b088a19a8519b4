"""Truncated Laurent series over O and Coleman's operators.

A :class:`TruncLaurent` is ``x^xpow * sum_{i<M} s_i x^i`` with every s_i
known modulo pi^N.  ``M = None`` marks an exact polynomial: the listed
coefficients are all there is.

The norm operator N and trace operator T are characterised by

    (N g)(Phi_pi(x)) = prod_{u in Phi[pi]} g(x + u),
    (T g)(Phi_pi(x)) = sum_{u in Phi[pi]}  g(x + u).

Both right-hand sides are computed over O_1 (u = Phi_c(omega_1)), pushed
back to O[[x]], and expanded in powers of Phi_pi(x); the digits of that
expansion must be constants, and they are the coefficients of the answer.

x-truncation and pi-adic precision interact.  The shift x -> x + u turns
an unknown tail x^M t(x) into terms of valuation >= (M - i)/(q_p - 1) at
x^i.  In the Phi_pi-adic expansion, x^(Dm) = (Phi_pi - pi l(x))^m with
deg l < D = q_p, so the tail reaches digit m - t with a factor pi^t.  The
unknown part above x^M dominates, and an input known modulo (pi^N, x^M)
gives an output known modulo (pi^N, x^M') with

    M' = M // q_p - N + 1.

:func:`norm_budget` inverts this for a planned number of iterations.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np

from .apoly import APoly, format_poly
from .errors import AdmissibilityError, BudgetError, ConsistencyError, PrecisionError
from .padic import PadicScalar, mod_pi_power
from .polyalg import compose, next_pow2
from .prime import PrimeSpec
from .residue import Modulus, _pad_axis, apoly_to_digits, digits_to_apoly, ring_mul, series_inverse, trunc_mul
from .tower import GaloisElem, Tower, TowerElem
from .xpoly import AXPoly


def truncation_after(M: int | None, N: int, D: int) -> int | None:
    """x-truncation left after one application of N or T."""
    if M is None:
        return None
    return M // D - N + 1


def norm_budget(M_out: int, N: int, D: int, k: int) -> int:
    """Smallest input truncation that survives k operator steps with M_out terms."""
    M = M_out
    for _ in range(k):
        M = D * (M + N - 1)
    return M


class TruncLaurent:
    """x^xpow * (s_0 + s_1 x + ... ) modulo (pi^N, x^M)."""

    __slots__ = ("prime", "xpow", "coeffs", "M", "N")

    def __init__(self, prime: PrimeSpec, coeffs: np.ndarray, N: int, M: int | None, xpow: int = 0):
        R = prime.ring(N)
        arr = R.reduce(np.asarray(coeffs, dtype=np.int64))
        if M is not None:
            arr = _pad_axis(arr, 0, max(M, 0))
        else:
            nz = np.nonzero(np.any(arr != 0, axis=(1, 2)))[0]
            arr = arr[:int(nz[-1]) + 1] if nz.size else arr[:1]
        self.prime = prime
        self.coeffs = arr
        self.N = N
        self.M = M
        self.xpow = xpow

    # --- construction ------------------------------------------------------------

    @classmethod
    def from_apolys(cls, prime, coeffs, N: int, M: int | None = None, xpow: int = 0):
        R = prime.ring(N)
        rows = [R.from_apoly(c if isinstance(c, APoly) else
                             APoly.const(prime.F, prime.F.from_int(c))) for c in coeffs] or [R.zero()]
        return cls(prime, np.array(rows), N, M, xpow)

    @classmethod
    def from_axpoly(cls, prime, f: AXPoly, N: int, M: int | None = None):
        return cls(prime, f.mod_pi_power(prime, N), N, M)

    @classmethod
    def x(cls, prime, N: int):
        return cls.from_apolys(prime, [1], N, None, xpow=1)

    @classmethod
    def constant(cls, prime, c, N: int):
        return cls.from_apolys(prime, [c], N, None)

    @classmethod
    def additive(cls, tower: Tower, a, N: int):
        """Phi_a(x) as an exact polynomial."""
        return cls.from_axpoly(tower.prime, tower.cmap.additive_poly(a), N)

    @classmethod
    def random_unit(cls, prime, rng, M: int, N: int):
        """A random series in O[[x]]^*."""
        R = prime.ring(N)
        arr = R.reduce(rng.integers(0, prime.F.p, size=(M,) + R.shape))
        while prime.residue_valuation(arr[0]) != 0:
            arr[0] = R.reduce(rng.integers(0, prime.F.p, size=R.shape))
        return cls(prime, arr, N, M)

    # --- queries -------------------------------------------------------------------

    @property
    def is_exact_poly(self) -> bool:
        return self.M is None

    @property
    def length(self) -> int:
        return self.coeffs.shape[0]

    def coeff(self, i: int) -> PadicScalar:
        """Coefficient of x^(xpow + i)."""
        if i >= self.length:
            if self.M is None:
                return PadicScalar.exact_zero(self.prime)
            raise PrecisionError(f"coefficient {i} lies beyond the truncation {self.M}")
        return PadicScalar.from_array(self.prime, self.coeffs[i])

    def coeff_apolys(self) -> list[APoly]:
        return [digits_to_apoly(row, self.prime.F) for row in self.coeffs]

    def is_unit(self) -> bool:
        return self.prime.residue_valuation(self.coeffs[0]) == 0

    def min_valuation(self) -> int:
        """Smallest pi-valuation among the known coefficients (N if all vanish)."""
        return int(self.prime.residue_valuation(self.coeffs).min())

    # --- precision bookkeeping -------------------------------------------------------

    def truncate(self, M: int | None) -> "TruncLaurent":
        if M is None:
            return self
        if self.M is not None and M > self.M:
            raise PrecisionError(f"cannot extend truncation {self.M} to {M}")
        return TruncLaurent(self.prime, _pad_axis(self.coeffs, 0, M), self.N, M, self.xpow)

    def with_prec(self, N: int) -> "TruncLaurent":
        if N > self.N:
            raise PrecisionError(f"cannot raise precision {self.N} to {N}")
        return TruncLaurent(self.prime, self.coeffs, N, self.M, self.xpow)

    def normalized(self) -> "TruncLaurent":
        """Move leading zero coefficients into xpow."""
        nz = np.nonzero(np.any(self.coeffs != 0, axis=(1, 2)))[0]
        if not nz.size or nz[0] == 0:
            return self
        k = int(nz[0])
        M = None if self.M is None else self.M - k
        return TruncLaurent(self.prime, self.coeffs[k:], self.N, M, self.xpow + k)

    # --- ring operations -------------------------------------------------------------

    def _aligned(self, other: "TruncLaurent"):
        N = min(self.N, other.N)
        j = min(self.xpow, other.xpow)
        ends = []
        arrs = []
        for s in (self, other):
            off = s.xpow - j
            arr = np.concatenate([np.zeros((off,) + s.coeffs.shape[1:], np.int64), s.coeffs])
            arrs.append(self.prime.ring(N).reduce(arr))
            ends.append(None if s.M is None else off + s.M)
        known = [e for e in ends if e is not None]
        M = min(known) if known else None
        return arrs, N, M, j

    def __add__(self, other):
        if not isinstance(other, TruncLaurent):
            other = TruncLaurent.constant(self.prime, other, self.N)
        (a, b), N, M, j = self._aligned(other)
        L = max(a.shape[0], b.shape[0]) if M is None else M
        return TruncLaurent(self.prime, _pad_axis(a, 0, L) + _pad_axis(b, 0, L), N, M, j)

    __radd__ = __add__

    def __neg__(self):
        return TruncLaurent(self.prime, -self.coeffs, self.N, self.M, self.xpow)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if not isinstance(other, TruncLaurent):
            return self.scale(other)
        N = min(self.N, other.N)
        R = self.prime.ring(N)
        Ms = [m for m in (self.M, other.M) if m is not None]
        M = min(Ms) if Ms else None
        a, b = R.reduce(self.coeffs), R.reduce(other.coeffs)
        if M is None:
            prod = ring_mul(R, a, b)
        else:
            prod = trunc_mul(R, a, b, M)
        return TruncLaurent(self.prime, prod, N, M, self.xpow + other.xpow)

    def scale(self, c) -> "TruncLaurent":
        """Multiply by an integral scalar."""
        if isinstance(c, int):
            c = APoly.const(self.prime.F, self.prime.F.from_int(c))
        if isinstance(c, PadicScalar):
            if c.is_exact_zero():
                return TruncLaurent(self.prime, self.coeffs * 0, self.N, self.M, self.xpow)
            N = self.N if c.abs_prec is None or c.abs_prec == float("inf") else min(self.N, c.abs_prec)
            c = c.residue(N)
        else:
            N = self.N
        R = self.prime.ring(N)
        return TruncLaurent(self.prime, R.mul(R.reduce(self.coeffs), R.from_apoly(c)[None]), N, self.M, self.xpow)

    def __pow__(self, k: int) -> "TruncLaurent":
        if k < 0:
            return self.inv() ** (-k)
        out = TruncLaurent.constant(self.prime, 1, self.N)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def inv(self) -> "TruncLaurent":
        """1/g for g = x^j * (unit series)."""
        g = self.normalized()
        if not g.is_unit():
            raise AdmissibilityError("series is not x^j times a unit")
        M = g.M
        if M is None:
            raise PrecisionError("inverse of a polynomial needs an x-truncation; call truncate first")
        R = self.prime.ring(g.N)
        inv0 = self.prime.unit_inverse(g.coeffs[0], g.N)
        arr = series_inverse(R, g.coeffs, M, inv0=inv0)
        return TruncLaurent(self.prime, arr, g.N, M, -g.xpow)

    def __truediv__(self, other: "TruncLaurent"):
        return self * other.inv()

    def derivative(self) -> "TruncLaurent":
        """d/dx of x^j S, as x^(j-1) * (j S + x S')."""
        p = self.prime.F.p
        n = self.length
        k = (np.arange(n) + self.xpow) % p
        arr = self.coeffs * k[:, None, None]
        return TruncLaurent(self.prime, arr, self.N, self.M, self.xpow - 1)

    def dlog(self) -> "TruncLaurent":
        """g'/g = j/x + S'/S; the regular part is checked to be integral."""
        g = self.normalized()
        if not g.is_unit():
            raise AdmissibilityError("dlog needs x^j times a unit series")
        if g.M is None:
            if g.length == 1:
                # x^j * c: dlog is exactly j/x
                return TruncLaurent.from_apolys(self.prime, [g.xpow], g.N, None, -1)
            raise PrecisionError("dlog of a polynomial needs an x-truncation")
        S = TruncLaurent(self.prime, g.coeffs, g.N, g.M)
        dS = S.derivative()  # x^-1 * (x S')
        body = (dS * S.inv())
        # body = x^-1 * (x S'/S); its x^-1 coefficient is 0 by construction
        j = TruncLaurent.constant(self.prime, g.xpow, g.N)
        j = TruncLaurent(self.prime, j.coeffs, g.N, g.M, -1)
        return j + body

    def compose_phi(self, tower: Tower) -> "TruncLaurent":
        """g(Phi_pi(x)) for g in O[[x]], truncated consistently."""
        if self.xpow < 0:
            raise AdmissibilityError("composition with Phi_pi needs a series in O[[x]]")
        R = self.prime.ring(self.N)
        phi = tower.cmap.torsion_poly(1).mod_pi_power(self.prime, self.N)
        arr = np.concatenate([np.zeros((self.xpow,) + self.coeffs.shape[1:], np.int64), self.coeffs])
        out = compose(R, arr, phi)
        D = self.prime.q_p
        # y^M o Phi_pi = Phi_pi^M is only negligible below x^(D M - (D-1) N)
        M = None if self.M is None else D * (self.M + self.xpow) - (D - 1) * self.N
        if M is not None:
            out = _pad_axis(out, 0, M)
        return TruncLaurent(self.prime, out, self.N, M)

    # --- comparison & display --------------------------------------------------------

    def equals(self, other: "TruncLaurent", M: int | None = None, N: int | None = None) -> bool:
        """Agreement modulo (pi^N, x^(xpow + M)) over the jointly known range."""
        (a, b), N0, M0, _ = self._aligned(other)
        N = N0 if N is None else min(N, N0)
        if M0 is None:
            M0 = max(a.shape[0], b.shape[0])
        M = M0 if M is None else min(M, M0)
        R = self.prime.ring(N)
        d = R.reduce(_pad_axis(a, 0, M) - _pad_axis(b, 0, M))
        return not np.any(d)

    def __repr__(self):
        terms = []
        for i, c in enumerate(self.coeff_apolys()):
            if c.is_zero():
                continue
            e = i + self.xpow
            cs = format_poly(c)
            terms.append(cs if e == 0 else f"({cs})*x^{e}")
        tail = "" if self.M is None else f" + O(x^{self.M + self.xpow})"
        return f"TruncLaurent({' + '.join(terms) or '0'}{tail}, mod pi^{self.N})"

    def to_json(self) -> dict:
        return {"xpow": self.xpow, "coeffs": [format_poly(c) for c in self.coeff_apolys()],
                "M": self.M, "N": self.N}

    @classmethod
    def from_json(cls, prime, obj: dict):
        from .apoly import parse_poly
        cs = [parse_poly(prime.F, s) for s in obj["coeffs"]]
        return cls.from_apolys(prime, cs, int(obj["N"]), obj.get("M"), int(obj.get("xpow", 0)))


def weierstrass_divide(G: TruncLaurent, P) -> tuple[TruncLaurent, TruncLaurent]:
    """G = Q*P + R with deg R < D = deg P, for P distinguished (unit leading
    coefficient, all lower coefficients divisible by pi).

    Mod-pi lifting: with P = u*(x^D + l(x)), the high part h of the current
    remainder goes into Q, and g <- -h*l gains one digit per step.  For a
    truncated G the unknown tail re-enters at pi^t from position M - (t+1)D
    on, so Q is returned modulo x^(M - N*D) and R needs M >= N*D.
    """
    prime = G.prime
    if isinstance(P, AXPoly):
        P = TruncLaurent.from_axpoly(prime, P, G.N)
    if P.M is not None or P.xpow < 0:
        raise AdmissibilityError("the divisor must be an exact polynomial")
    N = min(G.N, P.N)
    R = prime.ring(N)
    p = R.reduce(np.concatenate([np.zeros((P.xpow,) + P.coeffs.shape[1:], np.int64), P.coeffs]))
    nz = np.nonzero(np.any(p != 0, axis=(1, 2)))[0]
    D = int(nz[-1]) if nz.size else -1
    if D < 0 or prime.residue_valuation(p[D]) != 0:
        raise AdmissibilityError("the divisor needs a unit leading coefficient")
    if D and prime.residue_valuation(p[:D]).min() < 1:
        raise AdmissibilityError("the divisor is not distinguished: a lower coefficient is a unit")
    if G.xpow < 0:
        raise AdmissibilityError("weierstrass_divide needs an integral power series")
    u_inv = prime.unit_inverse(p[D], N)
    low = R.mul(p[:D], u_inv[None])
    g = R.reduce(np.concatenate([np.zeros((G.xpow,) + G.coeffs.shape[1:], np.int64), G.coeffs]))
    M = None if G.M is None else G.M + G.xpow
    if M is not None and M < N * D:
        raise BudgetError(f"weierstrass_divide needs M >= N*D = {N * D}, have {M}")
    Q = np.zeros((max(g.shape[0] - D, 1),) + R.shape, np.int64)
    rem = np.zeros((max(D, 1),) + R.shape, np.int64)
    for _ in range(N):
        if not g.any():
            break
        lo, hi = g[:D], g[D:]
        rem[:lo.shape[0]] = R.reduce(rem[:lo.shape[0]] + lo)
        if not hi.shape[0]:
            break
        Q[:hi.shape[0]] = R.reduce(Q[:hi.shape[0]] + hi)
        g = R.reduce(-ring_mul(R, hi, low)) if D else hi[:0]
    MQ = None if M is None else M - N * D
    Q = TruncLaurent(prime, R.mul(R.reduce(Q), u_inv[None]), N, MQ)
    return Q, TruncLaurent(prime, rem, N, None)


# --- the Coleman operators ------------------------------------------------------------


class ColemanOps:
    """N, T and their companions for one tower."""

    def __init__(self, tower: Tower):
        self.tower = tower
        self.prime = tower.prime
        self.D = tower.prime.q_p
        self._galois_mats: dict[int, list[np.ndarray]] = {}
        self._shift: dict[int, np.ndarray] = {}

    # level-1 helpers

    def _omega1_shift(self, N: int) -> np.ndarray:
        """The polynomial x + omega_1 over O_1."""
        hit = self._shift.get(N)
        if hit is None:
            lev = self.tower.level(1)
            R1 = lev.ring(N)
            w = self.tower.omega(1, N).residue_array(N)
            one = R1.one()
            hit = self._shift[N] = np.stack([w, one])
        return hit

    def _galois_matrices(self, N: int) -> list[np.ndarray]:
        """For each c in (A/pi)^*, the rows sigma_c(omega_1^i)."""
        hit = self._galois_mats.get(N)
        if hit is None:
            tw = self.tower
            lev = tw.level(1)
            hit = []
            for c in tw.units_mod(1):
                rows = []
                for i in range(lev.E):
                    img = tw.galois_apply(GaloisElem(self.prime, 1, c), tw.omega_power(1, i, N))
                    rows.append(img.residue_array(N))
                hit.append(np.stack(rows))
            self._galois_mats[N] = hit
        return hit

    def _apply_galois(self, mat: np.ndarray, arr: np.ndarray, N: int) -> np.ndarray:
        R = self.prime.ring(N)
        out = None
        for i in range(mat.shape[0]):
            term = ring_mul(R, arr[:, i][:, None], mat[i][None])
            out = term if out is None else out + term
        return out % self.prime.F.p

    def shift_series(self, S: TruncLaurent) -> np.ndarray:
        """S(x + omega_1) over O_1, shape (len, e_1, N*d, e)."""
        N = S.N
        lev = self.tower.level(1)
        R1 = lev.ring(N)
        G1 = np.zeros((S.length,) + R1.shape, np.int64)
        G1[:, 0] = S.coeffs
        out = compose(R1, G1, self._omega1_shift(N))
        return _pad_axis(out, 0, S.length)

    def shift_product(self, S: TruncLaurent) -> TruncLaurent:
        """prod_{u in Phi[pi]} S(x + u), projected back to O[[x]]."""
        if S.xpow != 0:
            raise AdmissibilityError("shift_product works on O[[x]]; split off x^j first")
        N = S.N
        lev = self.tower.level(1)
        R1 = lev.ring(N)
        Gs = self.shift_series(S)
        conj = [self._apply_galois(m, Gs, N) for m in self._galois_matrices(N)]
        G1 = np.zeros((S.length,) + R1.shape, np.int64)
        G1[:, 0] = S.coeffs
        factors = [G1] + conj
        while len(factors) > 1:
            nxt = []
            for i in range(0, len(factors) - 1, 2):
                a, b = factors[i], factors[i + 1]
                if S.M is None:
                    nxt.append(ring_mul(R1, a, b))
                else:
                    nxt.append(trunc_mul(R1, a, b, S.M))
            if len(factors) % 2:
                nxt.append(factors[-1])
            factors = nxt
        P = factors[0]
        if np.any(P[:, 1:] % self.prime.F.p):
            raise ConsistencyError("shift product has non-vanishing omega_1 components")
        return TruncLaurent(self.prime, P[:, 0], N, S.M)

    def shift_sum(self, S: TruncLaurent) -> TruncLaurent:
        """sum_{u in Phi[pi]} S(x + u)."""
        if S.xpow != 0:
            raise AdmissibilityError("shift_sum works on O[[x]]; split off x^j first")
        N = S.N
        R = self.prime.ring(N)
        Gs = self.shift_series(S)
        E1 = Gs.shape[1]
        acc = S.coeffs.copy()
        weights = self._trace_weights(E1)
        for i in range(E1):
            if weights[i].is_zero():
                continue
            acc = acc + R.mul(Gs[:, i], R.from_apoly(weights[i])[None])
        return TruncLaurent(self.prime, acc % self.prime.F.p, N, S.M)

    def _trace_weights(self, E1: int) -> list[APoly]:
        F = self.prime.F
        if E1 == 1:
            return [APoly.one(F)]
        S = self.tower.power_sums
        return [APoly.const(F, F.from_int(self.D - 1))] + list(S[1:E1])

    def _extract(self, P: TruncLaurent, M_out: int | None) -> TruncLaurent:
        """h with h(Phi_pi(x)) = P, reading constant radix digits."""
        N = P.N
        D = self.D
        rb = self.tower._radix(N)
        J = next_pow2(max(-(-P.length // D), 1))
        digits = rb.expand(P.coeffs, J)
        if M_out is not None:
            if M_out <= 0:
                raise BudgetError("x-truncation exhausted by the operator step")
            digits = _pad_axis(digits, 0, M_out)
        if np.any(digits[:, 1:] % self.prime.F.p):
            raise ConsistencyError("radix digits are not constant: input outside the operator's domain")
        return TruncLaurent(self.prime, digits[:, 0], N, M_out)

    # the operators

    def norm(self, g: TruncLaurent) -> TruncLaurent:
        """Coleman's norm operator."""
        if g.xpow != 0:
            S = TruncLaurent(self.prime, g.coeffs, g.N, g.M)
            h = self.norm(S)
            return TruncLaurent(self.prime, h.coeffs, h.N, h.M, g.xpow)
        M_out = truncation_after(g.M, g.N, self.D)
        return self._extract(self.shift_product(g), M_out)

    def norm_via_phi(self, g: TruncLaurent, i: int) -> TruncLaurent:
        """x^(-i q_p) * N(Phi_pi(x)^i g): the pole-clearing route for the norm."""
        phi = TruncLaurent.additive(self.tower, self.prime.pi, g.N)
        cleared = (phi ** i).normalized() * g
        if cleared.xpow < 0:
            raise AdmissibilityError("Phi_pi^i does not clear the pole")
        if cleared.xpow > 0:
            cleared = TruncLaurent(self.prime, np.concatenate(
                [np.zeros((cleared.xpow,) + cleared.coeffs.shape[1:], np.int64), cleared.coeffs]),
                cleared.N, None if cleared.M is None else cleared.M + cleared.xpow)
        h = self.norm(cleared)
        return TruncLaurent(self.prime, h.coeffs, h.N, h.M, h.xpow - i * self.D)

    def trace(self, g: TruncLaurent, simple_pole: bool = True) -> TruncLaurent:
        """Coleman's trace operator.

        A simple pole uses T(c/x) = c*pi/x; deeper poles (or
        ``simple_pole=False``) go through T(x^-i S) = x^-i T(psi_1^i S).
        """
        if g.xpow >= 0:
            if g.xpow > 0:
                g = TruncLaurent(self.prime, np.concatenate(
                    [np.zeros((g.xpow,) + g.coeffs.shape[1:], np.int64), g.coeffs]),
                    g.N, None if g.M is None else g.M + g.xpow)
            return self._extract(self.shift_sum(g), truncation_after(g.M, g.N, self.D))
        i = -g.xpow
        if i == 1 and simple_pole:
            c = g.coeffs[0]
            rest = TruncLaurent(self.prime, g.coeffs[1:], g.N, None if g.M is None else g.M - 1)
            Tr = self.trace(rest)
            R = self.prime.ring(g.N)
            pole = R.mul(c, R.from_apoly(self.prime.eta))
            return Tr + TruncLaurent(self.prime, pole[None], g.N, None, -1)
        psi1 = TruncLaurent.from_axpoly(self.prime, self.tower.cmap.psi(1), g.N)
        S = TruncLaurent(self.prime, g.coeffs, g.N, g.M)
        h = self.trace(psi1 ** i * S)
        return TruncLaurent(self.prime, h.coeffs, h.N, h.M, h.xpow - i)

    def norm_iter(self, g: TruncLaurent, k: int) -> TruncLaurent:
        for _ in range(k):
            g = self.norm(g)
        return g

    def trace_iter(self, g: TruncLaurent, k: int) -> TruncLaurent:
        for _ in range(k):
            g = self.trace(g)
        return g

    def ninfty(self, g: TruncLaurent, target: int, max_iter: int | None = None) -> tuple[TruncLaurent, int]:
        """Iterate N until two successive iterates agree modulo pi^target.

        Returns the fixed point and the number of iterations used.
        """
        if not g.normalized().is_unit():
            raise AdmissibilityError("ninfty needs x^j times a unit")
        if target > g.N:
            raise PrecisionError("target exceeds the input precision")
        limit = target if max_iter is None else max_iter
        cur = g
        for k in range(1, limit + 1):
            nxt = self.norm(cur)
            if nxt.equals(cur, N=target):
                return nxt, k
            cur = nxt
        raise PrecisionError(f"N-iteration did not settle modulo pi^{target} in {limit} steps")

    # --- evaluation ----------------------------------------------------------------

    def eval_at_omega(self, g: TruncLaurent, n: int) -> TowerElem:
        """g(omega_n) through the remainder modulo psi_n."""
        tw = self.tower
        lev = tw.level(n)
        N = g.N if g.M is None else min(g.N, (g.M + g.xpow) // lev.E if g.xpow > 0 else g.M // lev.E)
        if N <= 0:
            raise PrecisionError(f"x-truncation {g.M} too short to evaluate at omega_{n}")
        R = self.prime.ring(N)
        arr = R.reduce(g.coeffs)
        if n == 0:
            raise AdmissibilityError("evaluation at omega_0 is not defined")
        if lev.E == 1:
            w = tw.omega(n, N)
            return self.eval_at(g, w)
        vec = Modulus(R, lev.psi_poly.mod_pi_power(self.prime, N)).rem(arr)
        val = TowerElem(lev, 0, _pad_axis(vec, 0, lev.E), N)
        if g.xpow:
            val = val * tw.omega(n, N) ** g.xpow
        return val

    def eval_at(self, g: TruncLaurent, a: TowerElem) -> TowerElem:
        """g(a) for a of positive valuation, with a precision certificate."""
        if a.is_exact_zero():
            if g.xpow < 0:
                raise ZeroDivisionError("pole at zero")
            return a if g.xpow > 0 else self.tower.scalar(a.lev.n, g.coeff(0), g.N)
        va = a.valuation()
        if va <= 0:
            raise AdmissibilityError("evaluation needs v(a) > 0")
        N = g.N
        if g.M is not None:
            N = min(N, int(Fraction(g.M) * va))
        if a.s < 0:
            raise AdmissibilityError("evaluation needs an integral argument")
        N = min(N, a.abs_prec)
        if N <= 0:
            raise PrecisionError("not enough precision to evaluate")
        lev = a.lev
        Rn = lev.ring(N)
        # scalar coefficients broadcast against powers of a (shape (E, L, e))
        f = self.prime.ring(N).reduce(g.coeffs)
        out = Rn.reduce(compose(Rn, f, a.residue_array(N)))
        val = TowerElem(lev, 0, out, N)
        if g.xpow:
            val = val * a ** g.xpow
        return val

    def poly_rep(self, u: TowerElem) -> TruncLaurent:
        """The canonical polynomial representative of an integral element."""
        if u.s is None:
            return TruncLaurent.constant(self.prime, 0, 1)
        k = u.abs_prec
        return TruncLaurent(self.prime, u.residue_array(k), k, None)


# --- norm-compatible systems ---------------------------------------------------------


class NormSystem:
    """Units u_1..u_L with N(u_(n+1)) = u_n, optionally with a known Coleman series."""

    def __init__(self, tower: Tower, units: list[TowerElem], col: TruncLaurent | None = None,
                 verify: bool = True):
        self.tower = tower
        self.units = list(units)
        self.col = col
        if any(u.lev.n != i + 1 for i, u in enumerate(self.units)):
            raise AdmissibilityError("system levels must run 1..L")
        exps = {self.omega_exponent(i + 1) for i in range(len(self.units))}
        if len(exps) > 1:
            raise AdmissibilityError("all u_n must be omega_n^j times a unit with a common j")
        if verify:
            for n in range(1, len(self.units)):
                down = tower.norm_to(self.units[n], n)
                if not down.equals(self.units[n - 1]):
                    raise ConsistencyError(f"N(u_{n + 1}) != u_{n}")

    @property
    def L(self) -> int:
        return len(self.units)

    def __getitem__(self, n: int) -> TowerElem:
        return self.units[n - 1]

    def omega_exponent(self, n: int = 1) -> int:
        u = self[n]
        return int(u.valuation() * u.lev.E)

    @classmethod
    def from_top(cls, tower: Tower, top: TowerElem) -> "NormSystem":
        L = top.lev.n
        units = [top]
        for n in range(L - 1, 0, -1):
            units.append(tower.norm_to(units[-1], n))
        return cls(tower, units[::-1], verify=False)

    @classmethod
    def from_series(cls, tower: Tower, col: TruncLaurent, L: int) -> "NormSystem":
        """u_n = col(omega_n) for an N-fixed series such as x or Phi_c(x)."""
        ops = ColemanOps(tower)
        units = [ops.eval_at_omega(col, n) for n in range(1, L + 1)]
        return cls(tower, units, col=col)

    @classmethod
    def omega(cls, tower: Tower, L: int, N: int) -> "NormSystem":
        return cls.from_series(tower, TruncLaurent.x(tower.prime, N), L)

    @classmethod
    def phi(cls, tower: Tower, c, L: int, N: int) -> "NormSystem":
        if isinstance(c, int):
            c = APoly.const(tower.prime.F, tower.prime.F.from_int(c))
        if (c % tower.prime.pi).is_zero():
            raise AdmissibilityError("Phi_c systems need c prime to pi")
        return cls.from_series(tower, TruncLaurent.additive(tower, c, N), L)

    @classmethod
    def constant(cls, tower: Tower, zeta: int, L: int, N: int) -> "NormSystem":
        """A constant root of unity zeta in F_q^*."""
        col = TruncLaurent.constant(tower.prime, zeta, N)
        units = [tower.scalar(n, zeta, N) for n in range(1, L + 1)]
        return cls(tower, units, col=col)

    def __mul__(self, other: "NormSystem") -> "NormSystem":
        L = min(self.L, other.L)
        col = None
        if self.col is not None and other.col is not None:
            col = self.col * other.col
        return NormSystem(self.tower, [self[n] * other[n] for n in range(1, L + 1)], col=col,
                          verify=False)


def coleman_solve(ops: ColemanOps, system: NormSystem) -> tuple[TruncLaurent, int]:
    """Col_u = x^j * N^k(g) with g the polynomial representative of u_(2k) / omega^j.

    Returns the series and the certificate k: Col(omega_i) = u_i modulo
    pi^k for i <= k.
    """
    L = system.L
    if L % 2 or L == 0:
        raise AdmissibilityError("coleman_solve needs an even number of levels")
    k = L // 2
    tw = ops.tower
    top = system[L]
    j = system.omega_exponent(L)
    unit = top if j == 0 else top * tw.omega(L, top.abs_prec) ** (-j)
    if unit.valuation() != 0:
        raise ConsistencyError("failed to split off the omega power")
    g = ops.poly_rep(unit)
    h = ops.norm_iter(g, k)
    if j:
        h = TruncLaurent(ops.prime, h.coeffs, h.N, h.M, j)
    return h, k
