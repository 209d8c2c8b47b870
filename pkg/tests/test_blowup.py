"""Two-center factorization: frames, l_k coefficients, Hirota combinations.

The frozen l_k point values below come from an independent oracle run: a
sequential order-6 elimination of the factorization identity written with
plain 2x2 solves, done before l_k_product existed. l_k_solve re-derives
them inside the package and the product formula has to match both.
"""

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from blowlab._scalar import Q
from blowlab.blowup import (
    BlowupFrame,
    blowup_verify,
    f_hat,
    f_relations_verify,
    hirota_apply,
    l_k_product,
    l_k_solve,
    whittaker_eigen_check,
)
from blowlab.nekrasov import agt_crosscheck
from blowlab.rational import RF
from blowlab.series import GradedSeries, equal_to_order, qpow, theta_derive
from blowlab.verma import block

P = RF.symbol("P")
B = RF.symbol("b")
ONE = RF.constant(1)


# -- frames -------------------------------------------------------------------


def test_frame_derived_squares():
    fr = BlowupFrame()
    bsq = B * B
    assert fr.b1_sq == bsq / (1 - bsq)
    assert fr.b2_sq == bsq - 1
    assert fr.beta1 == 1 / (1 - bsq) ** 2
    assert fr.beta2 == bsq * bsq / (bsq - 1) ** 2
    # the two derived couplings are not independent
    assert fr.b1_sq + 1 / fr.b2_sq == RF.constant(-1)


def test_frame_weight_sum_rule():
    fr = BlowupFrame()
    for k in (-2, -1, 0, 1, 3):
        assert fr.delta1(k) + fr.delta2(k) == fr.delta + k * k - Q(1, 4)


def test_frame_central_deficit():
    # the two derived central charges undershoot the original by exactly 5
    fr = BlowupFrame()
    assert fr.central1 + fr.central2 == fr.central - 5


def test_frame_numeric_point():
    fr = BlowupFrame(b=Q(2, 5))
    assert fr.b1_sq == RF.constant(Q(4, 21))
    assert fr.b2_sq == RF.constant(Q(-21, 25))
    assert fr.beta1 == RF.constant(Q(625, 441))
    assert fr.beta2 == RF.constant(Q(16, 441))


def test_frame_rejects_degenerate_couplings():
    for bad in (0, 1, -1, Q(1)):
        with pytest.raises(ValueError):
            BlowupFrame(b=bad)


# -- l_k ----------------------------------------------------------------------


def test_l_zero_is_one():
    assert l_k_product(0) == ONE
    assert l_k_product(0, BlowupFrame(b=Q(2, 5), P=Q(3, 7))) == ONE


def test_l_one_expanded():
    lhs = l_k_product(1)
    rhs = (-2 * P) * (-2 * P - B) * (-2 * P - 1 / B) * (2 * P + B + 1 / B)
    assert lhs == rhs


def test_l_minus_one_expanded():
    # negative shifts reflect the momentum
    lhs = l_k_product(-1)
    rhs = (2 * P) * (2 * P - B) * (2 * P - 1 / B) * (-2 * P + B + 1 / B)
    assert lhs == rhs


def test_l_k_factor_count():
    for k in (1, 2, 3):
        num = l_k_product(k).num
        i = num.symbols.index("P")
        assert max(e[i] for e in num.terms) == 4 * k * k


def test_l_k_frozen_point_values():
    fr = BlowupFrame(b=Q(2, 5), P=Q(3, 7))
    want = {
        1: Q(-815826, 60025),
        -1: Q(-78936, 60025),
        2: Q(24855059484338754341141348942493, 16227016879687988281250),
        -2: Q(-143237237019914838560274801, 8113508439843994140625),
    }
    for k, val in want.items():
        assert l_k_product(k, fr) == RF.constant(val)


def test_l_k_solve_matches_product_symbolically():
    sol = l_k_solve(2)
    assert sorted(sol) == [-1, 0, 1]
    assert sol[0] == ONE
    assert sol[1] == l_k_product(1)
    assert sol[-1] == l_k_product(-1)


def test_l_k_solve_matches_product_at_points():
    rng = random.Random(7)
    done = 0
    while done < 3:
        pv = Q(rng.randint(1, 9), rng.randint(1, 9)) * rng.choice((1, -1))
        bv = Q(rng.randint(2, 9), rng.randint(2, 9))
        if bv == 1 or pv == 0:
            continue
        fr = BlowupFrame(b=bv, P=pv)
        try:
            sol = l_k_solve(5, fr)
        except (ValueError, ZeroDivisionError):
            continue
        assert sol[0] == ONE
        for k in (-2, -1, 1, 2):
            assert sol[k] == l_k_product(k, fr), (k, pv, bv)
        done += 1


def test_l_k_solve_underdetermined_orders():
    # +-k enter together at q^{k^2} and separate only one order later
    fr = BlowupFrame(b=Q(3, 5), P=Q(2, 7))
    with pytest.raises(ValueError, match="underdetermined"):
        l_k_solve(1, fr)
    with pytest.raises(ValueError, match="underdetermined"):
        l_k_solve(4, fr)


# -- the factorization identity -------------------------------------------------


def test_blowup_verify_block_form():
    v = blowup_verify("block_form", 2, seed=1)
    assert v.ok, v
    assert v.identity == "blowup_block_form"
    assert v.mode == "symbolic"
    assert v.order == 2
    assert "b2" in v.params


def test_blowup_verify_block_form_trivial_order():
    assert blowup_verify("block_form", 0).ok


def test_blowup_verify_z_form():
    v = blowup_verify("Z_form", 2, seed=3)
    assert v.ok, v
    assert v.identity == "blowup_Z_form"
    assert v.mode == "numeric"
    assert {"eps1", "eps2", "a"} <= set(v.params)


def test_blowup_verify_rejects_unknown_form():
    with pytest.raises(ValueError, match="block_form"):
        blowup_verify("z_form", 2)


def test_both_forms_and_dictionary_agree():
    # the conformal and instanton presentations must pass together, and the
    # dictionary tying them is itself checked independently
    assert blowup_verify("block_form", 2, seed=5).ok
    assert blowup_verify("Z_form", 2, seed=5).ok
    assert agt_crosscheck(2).ok


# -- Hirota combinations ----------------------------------------------------------


def test_hirota_order_zero_is_plain_product():
    f = GradedSeries.from_terms(0, [(0, Q(1)), (1, Q(2)), (2, Q(-1))], 3)
    g = GradedSeries.from_terms(0, [(0, Q(3)), (1, Q(1))], 3)
    out = hirota_apply(0, f, g, (Q(1), Q(5)))
    assert equal_to_order(out, f * g, 3).ok


def test_hirota_one_kills_constants():
    one = GradedSeries.one(None)
    out = hirota_apply(1, one, one, (B, 1 / B))
    assert out.is_zero_to_trunc()


def test_hirota_on_weighted_monomials():
    d1, d2 = RF.symbol("Delta"), RF.symbol("delta")
    f = GradedSeries.from_terms(d1, [(0, Q(1))])
    g = GradedSeries.from_terms(d2, [(0, Q(1))])
    out = hirota_apply(1, f, g, (B, 1 / B))
    assert out.prefix == d1 + d2
    assert out.coeff(0) == B * d1 + (1 / B) * d2


_poly = st.builds(
    lambda cs: GradedSeries.from_terms(0, list(enumerate(map(Q, cs))), None),
    st.lists(st.integers(-5, 5), min_size=1, max_size=4),
)


@settings(deadline=None, max_examples=40)
@given(f=_poly, g=_poly, m=st.integers(0, 3), e1=st.integers(-3, 3), e2=st.integers(-3, 3))
def test_hirota_symmetry_and_theta_collapse(f, g, m, e1, e2):
    assert hirota_apply(m, f, g, (Q(e1), Q(e2))) == hirota_apply(
        m, g, f, (Q(e2), Q(e1))
    )
    # equal couplings collapse to the grading derivative of the product
    assert hirota_apply(m, f, g, (Q(1), Q(1))) == theta_derive(f * g, m)


@settings(deadline=None, max_examples=25)
@given(f=_poly, g=_poly, h=_poly, m=st.integers(0, 3))
def test_hirota_bilinear(f, g, h, m):
    eps = (Q(2), Q(-3))
    lhs = hirota_apply(m, f + h, g, eps)
    rhs = hirota_apply(m, f, g, eps) + hirota_apply(m, h, g, eps)
    assert lhs == rhs


# -- f_hat and its closed forms ------------------------------------------------------


def test_f_hat_zero_reassembles_the_series():
    fr = BlowupFrame(b=Q(3, 7))
    got = f_hat(0, 3, fr)
    want = block(3, delta=fr.delta, central=fr.central)
    assert got.prefix.is_zero()
    assert equal_to_order(got, want, 3, mode="symbolic").ok


def test_f_hat_one_numeric_point():
    fr = BlowupFrame(b=Q(3, 7), P=Q(2, 9))
    got = f_hat(1, 2, fr)
    big = fr.b + 1 / fr.b
    want = block(2, delta=fr.delta, central=fr.central).scaled(big / 4)
    assert equal_to_order(got, want, 2, mode="symbolic").ok


def test_f_hat_validation():
    with pytest.raises(ValueError):
        f_hat(7, 2)
    with pytest.raises(ValueError):
        f_hat(-1, 2)


def test_f_relations_low_m_symbolic():
    v = f_relations_verify(3, m_values=(1, 2, 3))
    assert v.ok, v
    assert v.identity == "hirota_closed_forms"
    assert v.mode == "symbolic"


def test_f_relations_high_m_symbolic():
    # m = 4, 5 pick up q-corrections; m = 6 adds the grading-derivative term
    v = f_relations_verify(2, m_values=(4, 5, 6))
    assert v.ok, v


def test_f_relations_rejects_bad_m():
    with pytest.raises(ValueError):
        f_relations_verify(2, m_values=(0,))
    with pytest.raises(ValueError):
        f_relations_verify(2, m_values=(7,))


def test_whittaker_eigen_relations():
    v = whittaker_eigen_check(2)
    assert v.ok, v.first_mismatch
    assert v.params == {"level": 2, "relations": 12}
    assert v.mode == "symbolic"


def test_whittaker_eigen_level_cap():
    with pytest.raises(ValueError, match="0..2"):
        whittaker_eigen_check(3)
