import pytest
from hypothesis import given, strategies as st

from carlitz_coleman import APoly, CarlitzError, PadicScalar, PrimeSpec, make_field, parse_poly
from carlitz_coleman.apoly import is_irreducible
from carlitz_coleman.errors import ValuationAmbiguityError
from carlitz_coleman.padic import valuation

F3 = make_field(3)
F2 = make_field(2)
P3 = PrimeSpec(F3, "T")


def poly(text, F=F3):
    return parse_poly(F, text)


# --- fields ---------------------------------------------------------------------------


def test_prime_field_has_trivial_modulus():
    F = make_field(3, 1)
    assert F.q == 3 and F.e == 1


def test_f4_modulus():
    F = make_field(2, 2, (1, 1, 1))
    assert F.q == 4 and F.modulus == (1, 1, 1)


def test_f8_default_modulus_is_smallest_irreducible_cubic():
    assert make_field(2, 3).modulus == (1, 1, 0, 1)


def test_reducible_modulus_rejected():
    with pytest.raises(CarlitzError):
        make_field(2, 2, (1, 0, 1))


@pytest.mark.parametrize("p,e", [(2, 2), (3, 2), (2, 3), (5, 1)])
def test_field_axioms_exhaustive(p, e):
    F = make_field(p, e)
    els = list(F.elements())
    for a in els:
        if a:
            assert F.mul(a, F.inv(a)) == 1
        for b in els[:5]:
            assert F.add(a, b) == F.add(b, a)
            for c in els[:5]:
                assert F.mul(a, F.add(b, c)) == F.add(F.mul(a, b), F.mul(a, c))
                assert F.mul(F.mul(a, b), c) == F.mul(a, F.mul(b, c))


# --- polynomials ------------------------------------------------------------------------


def test_poly_mul_example():
    assert poly("T+1") * poly("T+2") == poly("T^2+2")


def test_gcd_example():
    assert poly("T^2+T").gcd(poly("T")) == poly("T")


def test_divmod_example():
    assert poly("T^3").divmod(poly("T^2+T")) == (poly("T+2"), poly("T"))


def test_parse_coefficient_list_and_digits():
    assert parse_poly(F3, "[1,1,0,2]") == poly("2*T^3+T+1")
    F4 = make_field(2, 2)
    a = parse_poly(F4, "[[0,1],[1,0]]")
    assert a.deg == 1


@pytest.mark.parametrize("text,F,expected", [("T", F3, True), ("T^2+1", F3, True),
                                             ("T^2+T", F2, False), ("T^2+T+1", F2, True),
                                             ("T^2+2", F3, False)])
def test_irreducibility(text, F, expected):
    assert is_irreducible(parse_poly(F, text)) is expected


def _brute_irreducible(a: APoly) -> bool:
    """Exhaustive search for a monic factor of degree <= deg/2."""
    F = a.F
    d = int(a.deg)
    for k in range(1, d // 2 + 1):
        for n in range(F.q ** k):
            cs = [(n // F.q ** i) % F.q for i in range(k)] + [1]
            f = APoly(F, [F.from_int(c) if F.e == 1 else c for c in cs])
            if a.divmod(f)[1].is_zero():
                return False
    return True


polys3 = st.lists(st.integers(0, 2), min_size=2, max_size=6).map(
    lambda cs: APoly(F3, cs[:-1] + [1]))


@given(polys3)
def test_irreducible_matches_brute_force(a):
    assert is_irreducible(a) == _brute_irreducible(a)


@given(polys3, polys3, polys3)
def test_ring_axioms(a, b, c):
    assert a * (b + c) == a * b + a * c
    assert (a * b) * c == a * (b * c)
    q, r = (a * b + c).divmod(b)
    assert q * b + r == a * b + c and r.deg < b.deg


@given(polys3, st.integers(0, 40))
def test_powmod_agrees_with_repeated_product(a, k):
    m = poly("T^3+2*T+1")
    ref = APoly.one(F3)
    for _ in range(k):
        ref = (ref * a).divmod(m)[1]
    assert a.powmod(k, m) == ref


# --- pi-adic scalars ---------------------------------------------------------------------------


def test_geometric_series_inverse():
    u = PadicScalar.from_apoly(P3, poly("1-T^2"), abs_prec=6)
    assert u.inv().residue(6) == poly("1+T^2+T^4")
    assert (u * u.inv()).residue(6) == APoly.one(F3)


def test_negation_gives_exact_zero():
    a = PadicScalar.from_apoly(P3, poly("T^2+2"))
    assert (a + (-a)).is_exact_zero()


def test_valuation_adds_and_precision_is_min():
    u = PadicScalar(P3, 1, poly("1+T"), 5)
    w = PadicScalar(P3, 2, poly("2"), 3)
    prod = u * w
    assert prod.val == 3 and prod.prec == 3


def test_valuation_examples():
    assert valuation(PadicScalar.from_apoly(P3, poly("2*T^3+T^4"))) == 3
    assert valuation(PadicScalar.exact_zero(P3)) == float("inf")
    with pytest.raises(ValuationAmbiguityError, match="valuation below precision floor"):
        valuation(PadicScalar.inexact_zero(P3, 5))


def test_div_by_pi_power():
    a = PadicScalar.from_apoly(P3, poly("T^3"))
    assert a.div_by_pi_power(4).val == -1


scalars = st.tuples(st.integers(0, 4), st.lists(st.integers(0, 2), min_size=1, max_size=5),
                    st.integers(1, 8)).map(
    lambda t: PadicScalar.from_apoly(P3, APoly(F3, [1 + t[1][0] % 2] + t[1][1:]), abs_prec=t[2] + t[0],
                                     val_shift=0) * PadicScalar.from_apoly(P3, poly("T") ** t[0]))


@given(scalars, scalars)
def test_valuation_is_additive(a, b):
    assert (a * b).val == a.val + b.val


@given(scalars, scalars)
def test_ultrametric(a, b):
    s = a + b
    if s.is_zero_within_precision():
        return
    assert s.val >= min(a.val, b.val)
    if a.val != b.val:
        assert s.val == min(a.val, b.val)


@given(scalars)
def test_reduce_lift_round_trip(a):
    k = a.abs_prec
    r = a.residue(k)
    assert PadicScalar.from_apoly(P3, r, abs_prec=k).residue(k) == r

