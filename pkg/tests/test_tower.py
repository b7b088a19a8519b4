from fractions import Fraction
from math import floor

import numpy as np
import pytest
from hypothesis import given, strategies as st

from carlitz_coleman import GaloisElem, TorsionValue, parse_poly

PREC = 10


def P(tw, text):
    return parse_poly(tw.prime.F, text)


def S(tw, n, text, prec=PREC):
    return tw.scalar(n, P(tw, text), prec)


# --- arithmetic ----------------------------------------------------------------------------


def test_omega_squared(t3):
    w = t3.omega(1, PREC)
    assert (w * w).equals(S(t3, 1, "2*T"))


def test_inverse_of_omega(t3):
    w = t3.omega(1, PREC)
    inv = w.inv()
    assert inv.valuation() == Fraction(-1, 2)
    ref = w.scale(P(t3, "2")).div_by_pi_power(1)
    assert inv.equals(ref, upto=PREC - 2)


def test_mul_inverse_is_one(t3, rng):
    for _ in range(5):
        a = t3.random_unit(rng, 2, PREC) * t3.omega(2, PREC)
        assert (a * a.inv()).equals(t3.one(2, PREC), upto=PREC - 3)


# --- embedding and Galois action ----------------------------------------------------------------


def test_embed_omega(t3):
    w1 = t3.embed(t3.omega(1, PREC), 2)
    w2 = t3.omega(2, PREC)
    assert w1.equals(w2.scale(P(t3, "T")) + w2 ** 3)


def test_embed_scalar_and_valuation(t3, rng):
    s = S(t3, 1, "T^2+1")
    assert t3.embed(s, 3).equals(S(t3, 3, "T^2+1"))
    a = t3.random_unit(rng, 1, PREC) * t3.omega(1, PREC)
    assert t3.embed(a, 2).valuation() == a.valuation()


def test_galois_examples(t3, rng):
    w = t3.omega(1, PREC)
    assert t3.galois_apply(GaloisElem(t3.prime, 1, 1), w).equals(w)
    assert t3.galois_apply(GaloisElem(t3.prime, 1, 2), w).equals(w.scale(P(t3, "2")))
    a = t3.random_elem(rng, 2, PREC)
    s, t = GaloisElem(t3.prime, 2, P(t3, "T+1")), GaloisElem(t3.prime, 2, P(t3, "2*T+2"))
    assert t3.galois_apply(s, t3.galois_apply(t, a)).equals(t3.galois_apply(s * t, a))


# --- norms and traces -------------------------------------------------------------------------


def test_norm_trace_examples(t3):
    assert t3.norm_to(t3.omega(2, PREC), 1).equals(t3.omega(1, PREC))
    assert t3.norm_to(t3.omega(1, PREC), 0).equals(S(t3, 0, "T"))
    assert t3.trace_to(t3.omega(1, PREC), 0).is_zero_within_precision()


@pytest.mark.parametrize("fixture,top", [("t3", 2), ("t2", 3), ("t4", 2), ("t3sq", 1)])
def test_relative_and_orbit_methods_agree(request, rng, fixture, top):
    tw = request.getfixturevalue(fixture)
    for _ in range(3):
        a = tw.random_unit(rng, top, PREC)
        for m in range(top):
            assert tw.trace_to(a, m).equals(tw.trace_to(a, m, method="orbit"))
            assert tw.norm_to(a, m).equals(tw.norm_to(a, m, method="orbit"))


def test_transitivity(t3, rng):
    a = t3.random_unit(rng, 3, PREC)
    assert t3.trace_to(a, 0).equals(t3.trace_to(t3.trace_to(a, 2), 0))
    assert t3.norm_to(a, 1).equals(t3.norm_to(t3.norm_to(a, 2), 1))


def test_trace_bounds(t3, rng):
    for _ in range(20):
        n = int(rng.integers(1, 4))
        E = t3.level(n).E
        a = t3.random_unit(rng, n, PREC) * t3.omega(n, PREC) ** int(rng.integers(0, E))
        t = t3.trace_to(a, 0)
        bound = floor(a.valuation() + t3.different_valuation(n))
        assert t.abs_prec >= bound if t.is_zero_within_precision() else t.valuation() >= bound
        if n >= 2:
            m = n - 1
            rel = t3.trace_to(a, m)
            lower = a.valuation() + (n - m) - t3.level(m).v_omega
            assert (rel.abs_prec > lower) if rel.is_zero_within_precision() else rel.valuation() > lower


# --- metrics ----------------------------------------------------------------------------------------


def test_valuations(t3):
    assert t3.valuation_t(t3.omega(1, PREC)) == Fraction(1, 2)
    assert t3.valuation_t(t3.omega(2, PREC)) == Fraction(1, 6)
    assert t3.valuation_t(t3.omega(1, PREC).scale(P(t3, "T"))) == Fraction(3, 2)


def test_different(t3, t2, t3sq):
    assert t3.different_valuation(1) == Fraction(1, 2)
    assert t3.different_valuation(2) == Fraction(3, 2)
    assert t2.different_valuation(2) == 1
    assert t3sq.different_valuation(1) == Fraction(7, 8)


# --- torsion ------------------------------------------------------------------------------------------


def test_recognize_torsion(t3):
    for n in (1, 2):
        assert t3.recognize_torsion(t3.omega(n, PREC)) == TorsionValue(t3.prime, n, 1)
    assert t3.recognize_torsion(t3.zero(1)).is_zero()
    assert t3.recognize_torsion(t3.omega(1, PREC).scale(P(t3, "2"))) == TorsionValue(t3.prime, 1, 2)


def test_torsion_round_trip(t3):
    for c in ("T+2", "2*T^2+1", "T"):
        tv = TorsionValue(t3.prime, 3, P(t3, c))
        assert t3.recognize_torsion(t3.torsion_elem(tv, PREC, level=3)) == tv


def test_torsion_value_canonical_level(t3):
    assert TorsionValue(t3.prime, 3, P(t3, "T")) == TorsionValue(t3.prime, 2, 1)
    assert TorsionValue(t3.prime, 2, P(t3, "T^2")).is_zero()


# --- properties ----------------------------------------------------------------------------------------


seeds = st.integers(0, 2 ** 32 - 1)


@given(seeds, st.integers(1, 2))
def test_ring_axioms_in_tower(seed, n):
    from conftest import _tower
    tw = _tower(3)
    rng = np.random.default_rng(seed)
    a, b, c = (tw.random_elem(rng, n, PREC) for _ in range(3))
    assert (a * (b + c)).equals(a * b + a * c)
    assert ((a * b) * c).equals(a * (b * c))


@given(seeds)
def test_norm_multiplicative_trace_additive(seed):
    from conftest import _tower
    tw = _tower(3)
    rng = np.random.default_rng(seed)
    a, b = tw.random_unit(rng, 2, PREC), tw.random_unit(rng, 2, PREC)
    assert tw.norm_to(a * b, 0).equals(tw.norm_to(a, 0) * tw.norm_to(b, 0))
    assert tw.trace_to(a + b, 1).equals(tw.trace_to(a, 1) + tw.trace_to(b, 1))
