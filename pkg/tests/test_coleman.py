import numpy as np
import pytest
from hypothesis import given, strategies as st

from carlitz_coleman import (BudgetError, ColemanOps, NormSystem, TruncLaurent, coleman_solve,
                             norm_budget, parse_poly, weierstrass_divide)
from carlitz_coleman.polyalg import compose
from carlitz_coleman.residue import trunc_mul

N = 8


def P(tw, text):
    return parse_poly(tw.prime.F, text)


def series(tw, coeffs, N=N, M=None, xpow=0):
    return TruncLaurent.from_apolys(tw.prime, [P(tw, c) for c in coeffs], N, M, xpow)


@pytest.fixture(scope="module")
def ops3():
    from conftest import _tower
    return ColemanOps(_tower(3))


# --- evaluation ------------------------------------------------------------------------------------


def test_eval_x_and_phi(ops3):
    tw = ops3.tower
    x = TruncLaurent.x(tw.prime, N)
    for n in (1, 2, 3):
        assert ops3.eval_at_omega(x, n).equals(tw.omega(n, N))
    phi = TruncLaurent.additive(tw, tw.prime.pi, N)
    assert ops3.eval_at_omega(phi, 2).equals(tw.omega(1, N), upto=N) or \
        ops3.eval_at(phi, tw.omega(2, N)).equals(tw.embed(tw.omega(1, N), 2))


def test_eval_inverse(ops3):
    tw = ops3.tower
    g = series(tw, ["1"], xpow=-1)
    val = ops3.eval_at_omega(g, 1)
    ref = tw.omega(1, N).scale(P(tw, "2")).div_by_pi_power(1)
    assert val.equals(ref, upto=N - 2)


def test_eval_paths_agree(ops3, rng):
    tw = ops3.tower
    for _ in range(3):
        g = TruncLaurent.random_unit(tw.prime, rng, 60, N)
        for n in (1, 2):
            assert ops3.eval_at_omega(g, n).equals(ops3.eval_at(g, tw.omega(n, N)))


# --- shift product and Weierstrass division ---------------------------------------------------------


def test_shift_product_examples(ops3):
    tw = ops3.tower
    phi = series(tw, ["0", "T", "0", "1"])
    assert ops3.shift_product(series(tw, ["0", "1"])).equals(phi)
    assert ops3.shift_product(series(tw, ["1", "1"])).equals(phi + series(tw, ["1+T"]))
    c = P(tw, "T+2")
    assert ops3.shift_product(series(tw, ["T+2"])).equals(
        TruncLaurent.from_apolys(tw.prime, [c ** 3], N))


def test_weierstrass_examples(ops3):
    tw = ops3.tower
    phi = TruncLaurent.additive(tw, tw.prime.pi, N)
    Q, R = weierstrass_divide(phi, phi)
    assert Q.equals(series(tw, ["1"])) and R.equals(series(tw, ["0"]))
    Q, R = weierstrass_divide(series(tw, ["0", "0", "0", "1"]), phi)
    assert Q.equals(series(tw, ["1"])) and R.equals(series(tw, ["0", "-T"]))
    Q, R = weierstrass_divide(series(tw, ["1"]), phi)
    assert Q.equals(series(tw, ["0"])) and R.equals(series(tw, ["1"]))


def test_weierstrass_truncated_series(ops3, rng):
    tw = ops3.tower
    phi = TruncLaurent.additive(tw, tw.prime.pi, N)
    g = TruncLaurent.random_unit(tw.prime, rng, 40, N)
    Q, R = weierstrass_divide(g, phi)
    assert Q.M == 40 - N * 3
    assert (Q * phi + R).equals(g, M=Q.M)
    with pytest.raises(BudgetError):
        weierstrass_divide(g.truncate(10), phi)


def test_weierstrass_rejects_non_distinguished(ops3):
    from carlitz_coleman import AdmissibilityError
    tw = ops3.tower
    with pytest.raises(AdmissibilityError):
        weierstrass_divide(series(tw, ["1"]), series(tw, ["1", "0", "1"]))


# --- the operators -----------------------------------------------------------------------------------


def test_operator_examples(ops3):
    tw = ops3.tower
    x = TruncLaurent.x(tw.prime, N)
    assert ops3.norm(x).equals(x)
    assert ops3.norm(series(tw, ["1", "1"])).equals(series(tw, ["1+T", "1"]))
    inv_x = series(tw, ["1"], xpow=-1)
    assert ops3.trace(inv_x).equals(series(tw, ["T"], xpow=-1))
    assert ops3.trace(inv_x, simple_pole=False).equals(series(tw, ["T"], xpow=-1))
    assert ops3.trace(series(tw, ["T^2+1"])).equals(series(tw, ["0"]))


def test_defining_identities(ops3, rng):
    tw = ops3.tower
    M = 200
    for _ in range(3):
        g = TruncLaurent.random_unit(tw.prime, rng, M, N)
        Ng, Tg = ops3.norm(g), ops3.trace(g)
        lhs_n, lhs_t = Ng.compose_phi(tw), Tg.compose_phi(tw)
        assert lhs_n.equals(ops3.shift_product(g), M=lhs_n.M)
        assert lhs_t.equals(ops3.shift_sum(g), M=lhs_t.M)
        assert Ng.equals(g, N=1)


def _level2_product(tw, g, M):
    """prod over u in Phi[pi^2] of g(x + u), computed over O_2."""
    lev = tw.level(2)
    R2 = lev.ring(g.N)
    G = np.zeros((g.length,) + R2.shape, np.int64)
    G[:, 0] = g.coeffs
    acc = None
    for c in _residues_mod(tw, 2):
        u = tw.phi_apply(c, tw.omega(2, g.N)) if not c.is_zero() else tw.zero(2)
        u_arr = u.residue_array(g.N) if not c.is_zero() else R2.zero()
        shifted = compose(R2, G, np.stack([u_arr, R2.one()]))[:M]
        acc = shifted if acc is None else trunc_mul(R2, acc, shifted, M)
    assert not np.any(acc[:, 1:] % tw.prime.F.p)
    return TruncLaurent(tw.prime, acc[:, 0], g.N, M)


def _residues_mod(tw, k):
    F = tw.prime.F
    from carlitz_coleman import APoly
    out = []
    for n in range(F.q ** (k * tw.prime.d)):
        cs = [(n // F.q ** i) % F.q for i in range(k * tw.prime.d)]
        out.append(APoly(F, cs))
    return out


def test_second_iterate_identity(ops3, rng):
    tw = ops3.tower
    M = 300
    g = TruncLaurent.random_unit(tw.prime, rng, M, 6)
    lhs = ops3.norm(ops3.norm(g)).compose_phi(tw).compose_phi(tw)
    rhs = _level2_product(tw, g, M)
    assert lhs.M > 0 and lhs.equals(rhs, M=lhs.M)


def test_negative_powers_by_both_routes(ops3, rng):
    tw = ops3.tower
    g = TruncLaurent.random_unit(tw.prime, rng, 200, N)
    h = g * series(tw, ["1"], xpow=-2)
    assert ops3.norm(h).equals(ops3.norm_via_phi(h, 2), M=20)


def test_ninfty(ops3, rng):
    tw = ops3.tower
    x = TruncLaurent.x(tw.prime, N)
    assert ops3.ninfty(x, 4)[0].equals(x)
    g = TruncLaurent.random_unit(tw.prime, rng, norm_budget(4, 5, 3, 5), 5)
    fixed, _ = ops3.ninfty(g, 3)
    assert ops3.norm(fixed).equals(fixed, N=3)
    two, one = ops3.norm_iter(g, 2), ops3.norm(g)
    assert two.equals(one, N=2)


def test_budget_error_when_truncation_runs_out(ops3, rng):
    g = TruncLaurent.random_unit(ops3.prime, rng, 12, N)
    with pytest.raises(BudgetError):
        ops3.norm_iter(g, 4)


# --- dlog --------------------------------------------------------------------------------------------------


def test_dlog_examples(ops3):
    tw = ops3.tower
    x = TruncLaurent.x(tw.prime, N)
    assert x.dlog().equals(series(tw, ["1"], xpow=-1))
    c = P(tw, "T+1")
    phic = TruncLaurent.additive(tw, c, N).truncate(40)
    ref = phic.inv().scale(c)
    assert phic.dlog().equals(ref, M=30)


# --- the solver ---------------------------------------------------------------------------------------------


def test_solver_recovers_known_series(ops3):
    tw = ops3.tower
    col, k = coleman_solve(ops3, NormSystem.omega(tw, 4, 5))
    assert k == 2 and col.equals(TruncLaurent.x(tw.prime, 5), N=k)
    c = P(tw, "T+1")
    col, k = coleman_solve(ops3, NormSystem.phi(tw, c, 4, 5))
    assert col.equals(TruncLaurent.additive(tw, c, 5), N=k, M=20)


def test_solver_round_trip(ops3, rng):
    tw = ops3.tower
    u = NormSystem.from_top(tw, tw.random_unit(rng, 4, 5))
    col, k = coleman_solve(ops3, u)
    for i in range(1, k + 1):
        d = ops3.eval_at_omega(col, i) - u[i]
        assert d.is_zero_within_precision() and d.abs_prec >= k or d.valuation() >= k


def test_json_round_trip(ops3, rng):
    g = TruncLaurent.random_unit(ops3.prime, rng, 10, 4) * series(ops3.tower, ["1"], N=4, xpow=-1)
    assert TruncLaurent.from_json(ops3.prime, g.to_json()).equals(g)


# --- properties ------------------------------------------------------------------------------------------------

seeds = st.integers(0, 2 ** 32 - 1)


@given(seeds)
def test_operators_are_homomorphisms(seed):
    from conftest import _tower
    tw = _tower(3)
    ops = ColemanOps(tw)
    rng = np.random.default_rng(seed)
    g, h = (TruncLaurent.random_unit(tw.prime, rng, 60, 5) for _ in range(2))
    assert ops.norm(g * h).equals(ops.norm(g) * ops.norm(h))
    assert ops.trace(g + h).equals(ops.trace(g) + ops.trace(h))
    assert (g * h).dlog().equals(g.dlog() + h.dlog())


@given(seeds)
def test_norm_matches_tower_norm(seed):
    from conftest import _tower
    tw = _tower(2)
    ops = ColemanOps(tw)
    rng = np.random.default_rng(seed)
    g = TruncLaurent.random_unit(tw.prime, rng, 200, 8)
    lhs = ops.eval_at_omega(ops.norm(g), 2)
    rhs = tw.norm_to(ops.eval_at_omega(g, 3), 2)
    assert (lhs - rhs).is_zero_within_precision()
