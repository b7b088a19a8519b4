from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from carlitz_coleman import APoly, PadicScalar, SkewPoly, lambda_eval, parse_poly
from carlitz_coleman.carlitz import lambda_residual, tower_degree
from carlitz_coleman.xpoly import AXPoly


def P(tower, text):
    return parse_poly(tower.prime.F, text)


def X(tower, terms: dict):
    """x-polynomial from {degree: text in T}."""
    return AXPoly.from_coeffs(tower.prime.F, {k: P(tower, v) for k, v in terms.items()})


# --- skew polynomials --------------------------------------------------------------------


def test_skew_square(t3):
    f = SkewPoly(t3.prime, [P(t3, "T"), 1])
    assert f * f == SkewPoly(t3.prime, [P(t3, "T^2"), P(t3, "T+T^3"), 1])


def test_skew_identity_and_twist(t3):
    f = SkewPoly(t3.prime, [P(t3, "T+1"), P(t3, "2*T"), 1])
    assert f * SkewPoly(t3.prime, [1]) == f
    c = P(t3, "T^2+1")
    tau = SkewPoly.tau(t3.prime)
    assert tau * SkewPoly(t3.prime, [c]) == SkewPoly(t3.prime, [0, c.frobenius()])


# --- Phi_a ----------------------------------------------------------------------------------


def test_phi_examples(t3):
    cm = t3.cmap
    assert cm.phi(P(t3, "T")) == SkewPoly(t3.prime, [P(t3, "T"), 1])
    assert cm.phi(P(t3, "T^2")) == SkewPoly(t3.prime, [P(t3, "T^2"), P(t3, "T+T^3"), 1])
    assert cm.phi(APoly.one(t3.prime.F)) == SkewPoly(t3.prime, [1])


small = st.lists(st.integers(0, 2), min_size=1, max_size=5)


@given(small, small)
def test_phi_is_ring_homomorphism(ca, cb):
    from conftest import _tower
    tw = _tower(3)
    F = tw.prime.F
    a, b = APoly(F, ca), APoly(F, cb)
    cm = tw.cmap
    assert cm.phi(a * b) == cm.phi(a) * cm.phi(b)
    assert cm.phi(a + b) == cm.phi(a) + cm.phi(b)


def test_phi_pi_has_good_reduction(t3, t3sq, t4):
    for tw in (t3, t3sq, t4):
        cs = tw.cmap.phi_coeffs(tw.prime.pi)
        assert len(cs) == tw.prime.d + 1 and cs[-1] == APoly.one(tw.prime.F)
        assert all((c % tw.prime.pi).is_zero() for c in cs[:-1])


def test_phi_of_padic_argument(t3):
    a = PadicScalar.from_apoly(t3.prime, P(t3, "T+T^5"), abs_prec=12)
    f = t3.cmap.phi_of(a, 2, target=8)
    exact = t3.cmap.phi(P(t3, "T+T^5"))
    for i in range(3):
        assert f[i].residue(8) == exact[i].residue(8)


# --- torsion polynomials -------------------------------------------------------------------


def test_torsion_examples(t3, t2):
    assert t3.cmap.torsion_poly(1) == X(t3, {1: "T", 3: "1"})
    assert t2.cmap.torsion_poly(1) == X(t2, {1: "T", 2: "1"})
    assert t3.cmap.torsion_poly(2) == X(t3, {1: "T^2", 3: "T+T^3", 9: "1"})


def test_psi_examples(t3, t2):
    assert t3.cmap.psi(1) == X(t3, {2: "1", 0: "T"})
    inner = X(t3, {1: "T", 3: "1"})
    assert t3.cmap.psi(2) == inner * inner + X(t3, {0: "T"})
    assert t2.cmap.psi(1) == X(t2, {1: "1", 0: "T"})


@pytest.mark.parametrize("n", [1, 2, 3])
def test_psi_by_composition(t3, t2, t3sq, n):
    for tw in (t3, t2) + ((t3sq,) if n < 3 else ()):
        psi = tw.cmap.psi(n)
        assert psi == tw.cmap.psi_by_composition(n)
        assert psi.degree == tower_degree(tw.prime, n)


def test_torsion_poly_is_additive(t3):
    # Phi(x + y) = Phi(x) + Phi(y): only exponents q^i occur, each with coefficient in A
    f = t3.cmap.torsion_poly(2)
    assert all(k in (1, 3, 9) for k in f.nonzero_terms())


# --- lambda --------------------------------------------------------------------------------------


def test_lambda_leading_coefficients(t3):
    s = t3.cmap.lambda_coeffs(2, 10)
    assert s.coeffs[0] == PadicScalar.from_int(t3.prime, 1)
    expected = PadicScalar.from_apoly(t3.prime, P(t3, "T-T^3"), abs_prec=12).inv(10)
    assert s.coeffs[1].equals_within(expected, 9)
    assert s.valuations()[:3] == [0, -1, -2]


def test_lambda_eval_zero(t3):
    s = t3.cmap.lambda_coeffs(6, 10)
    z = t3.zero(1)
    assert lambda_eval(z, s, 8).is_exact_zero()


def test_lambda_of_T(t3):
    s = t3.cmap.lambda_coeffs(6, 12)
    a = t3.scalar(1, P(t3, "T"), 12)
    lam = lambda_eval(a, s, 7).to_scalar()
    c1 = PadicScalar.from_apoly(t3.prime, P(t3, "T-T^3"), abs_prec=12).inv(10)
    ref = PadicScalar.from_apoly(t3.prime, P(t3, "T")) + c1 * PadicScalar.from_apoly(t3.prime, P(t3, "T^3"))
    assert lam.equals_within(ref, 7)


def test_lambda_preserves_valuation(t3, rng):
    s = t3.cmap.lambda_coeffs(10, 12)
    for _ in range(10):
        a = t3.random_unit(rng, 1, 12).scale(P(t3, "T^2"))
        assert lambda_eval(a, s, 10).valuation() == 2


def test_lambda_functional_equation(t3, t2, t3sq):
    for tw in (t3, t2, t3sq):
        s = tw.cmap.lambda_coeffs(10, 10)
        res = lambda_residual(tw.cmap, s, 8)
        assert all(c.is_zero_within_precision() for c in res.coeffs)
        assert all(v >= -i for i, v in enumerate(s.valuations()))


def test_lambda_rejects_nonpositive_valuation(t3):
    from carlitz_coleman import AdmissibilityError
    s = t3.cmap.lambda_coeffs(4, 8)
    with pytest.raises(AdmissibilityError):
        lambda_eval(t3.one(1, 8), s, 4)


def test_lambda_terms_needed_is_tight():
    from carlitz_coleman.carlitz import lambda_terms_needed
    J = lambda_terms_needed(3, Fraction(1, 2), 10)
    assert 3 ** (J + 1) * Fraction(1, 2) - (J + 1) >= 10
    assert 3 ** J * Fraction(1, 2) - J < 10
