import json
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from carlitz_coleman import (AdmissibilityError, DirectLimitElem, NormSystem, Pairings,
                             TorsionValue, APoly)
from carlitz_coleman.checks import random_unit_poly, random_with_valuation
from carlitz_coleman.pairings import report_json

PREC = 16


@pytest.fixture(scope="module")
def pr3(t3):
    return Pairings(t3)


@pytest.fixture(scope="module")
def pr2(t2):
    return Pairings(t2)


def test_hand_examples(t3, pr3):
    w = t3.omega(1, PREC)
    T = t3.scalar(1, t3.prime.pi, PREC)
    # [T omega_1, omega_1]_1 = Phi_2(omega_1) = 2 omega_1
    for val in (pr3.analytic_pair_level(T * w, w), pr3.kummer_oracle_omega(T * w, 1)):
        assert val.value == TorsionValue(t3.prime, 1, 2)
    # T alone sits above the vanishing threshold
    assert pr3.analytic_pair_level(T, w).is_zero()
    assert pr3.kummer_oracle_omega(T, 1).is_zero()


def test_zero_arguments(t3, pr3):
    w = t3.omega(1, PREC)
    assert pr3.analytic_pair_level(t3.zero(1), w).is_zero()
    # omega_1 is torsion, so its class in the direct limit vanishes
    tors = DirectLimitElem(t3, w)
    assert tors.is_zero()
    u = NormSystem.omega(t3, 4, PREC)
    assert pr3.analytic_pair(tors, u).is_zero()
    assert pr3.kummer_pair(tors, u).is_zero()


def test_analytic_rejects_small_valuation(t3, pr3):
    w = t3.omega(1, PREC)
    with pytest.raises(AdmissibilityError):
        pr3.analytic_pair_level(w, w)  # v = 1/2 < 2/(q-1) = 1


def test_omega_system_reduces_to_identity(t3, pr3, rng):
    u = NormSystem.omega(t3, 5, PREC)
    for _ in range(3):
        a = random_with_valuation(t3, rng, 2, Fraction(1), Fraction(3), PREC)
        a2, n = pr3.kummer_reduce(DirectLimitElem(t3, a), u, 2)
        # omega * dlog(x)(omega) = 1
        assert a2.at(n).equals(a)


def test_phi_system_reduction_formula(t3, pr3, rng):
    c = random_unit_poly(t3, rng, 2)
    u = NormSystem.phi(t3, c, 5, PREC)
    a = random_with_valuation(t3, rng, 2, Fraction(1), Fraction(3), PREC)
    a2, n = pr3.kummer_reduce(DirectLimitElem(t3, a), u, 2)
    w = t3.omega(n, PREC + 2)
    expected = a * w * t3.scalar(n, c, PREC + 2) / t3.phi_apply(c, w)
    assert a2.at(n).equals(expected)


def test_bilinear_in_a(t3, pr3, rng):
    w = t3.omega(2, PREC)
    for _ in range(4):
        a = random_with_valuation(t3, rng, 2, Fraction(1), Fraction(3), PREC)
        b = random_with_valuation(t3, rng, 2, Fraction(1), Fraction(3), PREC)
        lhs = pr3.analytic_pair_level(a + b, w).value
        rhs = pr3.analytic_pair_level(a, w).value + pr3.analytic_pair_level(b, w).value
        assert lhs == rhs


def test_bilinear_in_u(t3, pr3, rng):
    L = 5
    for _ in range(2):
        a = DirectLimitElem(t3, random_with_valuation(t3, rng, 1, Fraction(1), Fraction(3), PREC))
        u = NormSystem.phi(t3, random_unit_poly(t3, rng, 1), L, PREC)
        v = NormSystem.omega(t3, L, PREC)
        lhs = pr3.analytic_pair(a, u * v).value
        assert lhs == pr3.analytic_pair(a, u).value + pr3.analytic_pair(a, v).value
        assert pr3.kummer_pair(a, u * v).value == lhs


def test_scaling_by_F_q_constant(t3, pr3, rng):
    w = t3.omega(1, PREC)
    a = random_with_valuation(t3, rng, 1, Fraction(1), Fraction(2), PREC)
    val = pr3.analytic_pair_level(a, w).value
    assert pr3.analytic_pair_level(a * t3.scalar(1, 2, PREC), w).value == val.scale(2)


@settings(max_examples=15)
@given(seed=st.integers(0, 2**32 - 1), n=st.sampled_from([1, 2]), q=st.sampled_from([2, 3]))
def test_threshold_vanishing(seed, n, q, t2, t3):
    tw = t3 if q == 3 else t2
    pr = Pairings(tw)
    rng = np.random.default_rng(seed)
    thr = n + Fraction(1, tw.prime.q_p - 1)
    a = random_with_valuation(tw, rng, n, thr + Fraction(1, tw.level(n).E), thr + 2, PREC)
    assert pr.analytic_pair_level(a, tw.omega(n, PREC)).is_zero()
    assert pr.kummer_oracle_omega(a, n).is_zero()


@settings(max_examples=20)
@given(seed=st.integers(0, 2**32 - 1), n=st.sampled_from([1, 2]), q=st.sampled_from([2, 3]))
def test_oracle_matches_analytic(seed, n, q, t2, t3):
    tw = t3 if q == 3 else t2
    pr = Pairings(tw)
    rng = np.random.default_rng(seed)
    lo = Fraction(2, tw.prime.q - 1)
    a = random_with_valuation(tw, rng, n, lo, lo + 3, PREC)
    x = pr.analytic_pair_level(a, tw.omega(n, PREC))
    y = pr.kummer_oracle_omega(a, n)
    assert x == y
    assert y.details["step4"] is True or y.is_zero()


def test_oracle_level_conditions(t3, pr3):
    # v(T omega_1) = 3/2 meets all three conditions at level 1
    a = DirectLimitElem(t3, t3.scalar(1, t3.prime.pi, PREC) * t3.omega(1, PREC))
    assert pr3.oracle_level(a, 1) == 1
    small = DirectLimitElem(t3, t3.omega(1, PREC) ** 2)
    # v = 1 < 4/3 at level 1, pushing adds one to the valuation
    assert pr3.oracle_level(small, 1) == 2


def test_kummer_finite_diagonal(t3, pr3, rng):
    um = t3.random_unit(rng, 2, 20) * t3.omega(2, 20) ** 14
    un = t3.norm_to(um, 1)
    assert pr3.kummer_finite(un, un, um).is_zero()


def test_kummer_finite_inadmissible_level(t3, pr3):
    a = t3.omega(1, PREC) ** 2  # v = 1 = 2/(q-1), not strictly above
    one = t3.one(1, PREC)
    with pytest.raises(AdmissibilityError, match="minimal admissible level"):
        pr3.kummer_finite(a, one, one)


def test_verify_reciprocity_report(t2, pr2, rng):
    a = DirectLimitElem(t2, random_with_valuation(t2, rng, 1, Fraction(2), Fraction(4), PREC))
    u = NormSystem.omega(t2, 5, PREC) * NormSystem.phi(t2, APoly(t2.prime.F, [1, 1]), 5, PREC)
    rep = pr2.verify_reciprocity(a, u, {"index": 0})
    assert rep["verdict"] == "PASS"
    assert rep["analytic"] == rep["kummer"]
    assert rep["scope"].startswith("general u")
    assert json.loads(report_json(rep))["verdict"] == "PASS"
