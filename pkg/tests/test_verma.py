"""Verma-module machinery: commutator action, Gram matrices, Whittaker data.

Frozen expectations come from hand commutator algebra (level <= 2 worked
out on paper: L1 L_{-1}^2 v = (4D+2) L_{-1} v, L2 L_{-1}^2 v = 6D v, and
the Cramer solution of the level-2 system) plus a test-local rational
Gaussian solver that re-derives the block coefficients through the Gram
matrix instead of the defining linear system.
"""

from fractions import Fraction

import pytest

from blowlab._scalar import Q
from blowlab.rational import RF
from blowlab.verma import (
    GramMatrix,
    LevelBasis,
    SingularGramError,
    WhittakerComponent,
    block,
    gram,
    kac_vanishing_check,
    lowering_action,
    whittaker_components,
)
from oracles import partition_count

D = RF.symbol("Delta")
C = RF.symbol("c")


def bracket_params(p, bb):
    """(Delta, c) of the weight with momentum p at coupling b^2 = bb."""
    sq = bb + 2 + Q(1) / bb
    return Q(sq, 4) - p * p, 1 + 6 * sq


def solve_q(mat, rhs):
    """Tiny dense rational Gaussian solver (test-local, no pivol tricks)."""
    n = len(mat)
    a = [row[:] + [rhs[i]] for i, row in enumerate(mat)]
    for col in range(n):
        piv = next(r for r in range(col, n) if a[r][col] != 0)
        a[col], a[piv] = a[piv], a[col]
        inv = 1 / Q(a[col][col])
        a[col] = [x * inv for x in a[col]]
        for r in range(n):
            if r != col and a[r][col] != 0:
                f = a[r][col]
                a[r] = [x - f * y for x, y in zip(a[r], a[col])]
    return [a[r][n] for r in range(n)]


# -- bases ---------------------------------------------------------------------


def test_level_basis_order_and_size():
    assert LevelBasis.at_level(0).partitions == ((),)
    assert LevelBasis.at_level(2).partitions == ((1, 1), (2,))
    assert LevelBasis.at_level(4).partitions == (
        (1, 1, 1, 1),
        (2, 1, 1),
        (2, 2),
        (3, 1),
        (4,),
    )
    for n in range(11):
        basis = LevelBasis.at_level(n)
        assert len(basis.partitions) == partition_count(n)
        assert all(tuple(sorted(lam, reverse=True)) == lam for lam in basis.partitions)
        assert basis.partitions == tuple(sorted(basis.partitions))
    with pytest.raises(ValueError):
        LevelBasis.at_level(-1)


# -- mode action ---------------------------------------------------------------


def test_lowering_action_examples():
    assert lowering_action(1, 1) == ((2 * D,),)
    # level 2 -> level 1, columns ordered (1,1), (2)
    assert lowering_action(1, 2) == ((4 * D + 2, RF.constant(3)),)
    # level 2 -> level 0
    assert lowering_action(2, 2) == ((6 * D, 4 * D + C / 2),)
    with pytest.raises(ValueError):
        lowering_action(3, 4)
    with pytest.raises(ValueError):
        lowering_action(2, 1)


# -- Gram matrices -------------------------------------------------------------


def test_gram_small_levels():
    assert gram(0).entries == ((RF.constant(1),),)
    assert gram(1).entries == ((2 * D,),)
    want = ((4 * D * (2 * D + 1), 6 * D), (6 * D, 4 * D + C / 2))
    assert gram(2).entries == want
    assert isinstance(gram(2), GramMatrix)
    assert gram(2).basis == LevelBasis.at_level(2)


def test_gram_symmetric_through_level_eight():
    for n in range(1, 9):
        g = gram(n).entries
        size = len(g)
        assert size == partition_count(n)
        for i in range(size):
            for j in range(i):
                assert g[i][j] == g[j][i], (n, i, j)


def test_gram_entries_polynomial():
    for n in (1, 2, 3, 4):
        for row in gram(n).entries:
            for e in row:
                assert e.den.is_constant(), n


# -- Whittaker components ------------------------------------------------------


def test_whittaker_low_levels():
    comps = whittaker_components(2)
    assert [c.level for c in comps] == [0, 1, 2]
    assert comps[0].coeffs == (RF.constant(1),)
    assert comps[1].coeffs == (1 / (2 * D),)
    # Cramer on the hand-derived level-2 system
    det2 = (4 * D + 2) * (4 * D + C / 2) - 18 * D
    x = (4 * D + C / 2) / (2 * D) / det2
    y = RF.constant(-3) / det2
    assert comps[2].coeffs == (x, y)
    assert isinstance(comps[2], WhittakerComponent)


def test_whittaker_defining_relations():
    comps = whittaker_components(5)
    for n in range(1, 6):
        low1 = lowering_action(1, n)
        cur = comps[n].coeffs
        got = [sum((row[j] * cur[j] for j in range(len(cur))), RF.constant(0)) for row in low1]
        assert tuple(got) == comps[n - 1].coeffs, n
        if n >= 2:
            low2 = lowering_action(2, n)
            got2 = [sum((row[j] * cur[j] for j in range(len(cur))), RF.constant(0)) for row in low2]
            assert all(not v for v in got2), n


def test_whittaker_singular_points_are_reported():
    with pytest.raises(SingularGramError) as err:
        whittaker_components(2, delta=Q(0), central=Q(1, 2))
    assert err.value.level == 1
    # (Delta, c) on the level-2 degenerate locus, away from Delta = 0
    with pytest.raises(SingularGramError) as err:
        whittaker_components(3, delta=Q(-7, 2), central=Q(77, 2))
    assert err.value.level == 2


# -- the block -----------------------------------------------------------------


def test_block_low_coefficients():
    f = block(2)
    assert f.coeff(0) == RF.constant(1)
    assert f.coeff(1) == 1 / (2 * D)
    det = 4 * D * (2 * D + 1) * (4 * D + C / 2) - 36 * D * D
    assert f.coeff(2) == (4 * D + C / 2) / det


def test_block_matches_gram_inversion_route():
    """Three norm routes must agree at generic rational points, N <= 6.

    The block coefficient (read off the components), the explicit quadratic
    form w^T G w, and the leading entry of the Gram inverse are computed
    independently; the inverse route uses a test-local solver that shares no
    code with the module's rectangular elimination.
    """
    points = [(Q(3, 7), Q(22, 7)), (Q(-5, 3), Q(13, 2)), (Q(9, 4), Q(-3, 5))]
    for dv, cv in points:
        f = block(6, delta=dv, central=cv)
        comps = whittaker_components(6, delta=dv, central=cv)
        for n in range(1, 7):
            g = gram(n).entries
            sub = {"Delta": dv, "c": cv}
            mat = [[e.subs(sub).as_constant() for e in row] for row in g]
            rhs = [Q(1)] + [Q(0)] * (len(mat) - 1)
            inv_first = solve_q(mat, rhs)[0]
            assert f.coeff(n) == RF.constant(inv_first), (dv, cv, n)
            w = [x.as_constant() for x in comps[n].coeffs]
            wtgw = sum(
                w[i] * mat[i][j] * w[j]
                for i in range(len(w))
                for j in range(len(w))
            )
            assert f.coeff(n) == RF.constant(wtgw), (dv, cv, n)


def test_block_matches_quadratic_form_symbolically():
    f = block(6)
    comps = whittaker_components(6)
    for n in range(1, 7):
        w = comps[n].coeffs
        g = gram(n).entries
        norm = RF.constant(0)
        for i, wi in enumerate(w):
            for j, wj in enumerate(w):
                norm = norm + wi * g[i][j] * wj
        assert f.coeff(n) == norm, n


def test_block_specialization_commutes():
    f = block(5)
    for p, bb in [(Q(2, 7), Q(3, 5)), (Q(1, 3), Q(5, 2)), (Q(-4, 9), Q(7, 3))]:
        dv, cv = bracket_params(p, bb)
        g = block(5, delta=dv, central=cv)
        sub = {"Delta": dv, "c": cv}
        for n in range(6):
            assert f.coeff(n).subs(sub) == g.coeff(n), (p, bb, n)


def test_block_numeric_reaches_higher_levels():
    f = block(9, delta=Q(3, 7), central=Q(22, 5))
    assert f.coeff(0) == RF.constant(1)
    assert f.coeff(1) == RF.constant(Q(7, 6))
    assert f.coeff(9).as_constant() is not None


# -- degenerate determinants ---------------------------------------------------


def test_kac_vanishing_check():
    verdict = kac_vanishing_check(5, Q(2, 3))
    assert verdict.ok, verdict.first_mismatch
    assert verdict.identity == "kac_vanishing"
    assert verdict.mode == "exact"
    assert "nondegenerate" in verdict.note
    data = verdict.to_json_dict()
    assert data["params"]["b"] == "2/3"
    with pytest.raises(ValueError):
        kac_vanishing_check(3, Q(0))
