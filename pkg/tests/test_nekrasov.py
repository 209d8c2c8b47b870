"""Instanton partition sums: fixed points, tangent weights, AGT gate.

The tangent-weight convention is not trusted on its own anywhere below: the
rank-1 sums must reproduce the exponential closed form, and the rank-2 sums
must match the Whittaker block from the verma module under the parameter
dictionary, which is an entirely independent computation.
"""

import pytest

from blowlab._scalar import Q
from blowlab.nekrasov import (
    FixedPoint,
    YoungDiagram,
    agt_crosscheck,
    enumerate_fixed_points,
    fixed_point_weight,
    nekrasov_Z,
)
from blowlab.rational import RF
from blowlab.series import equal_to_order
from blowlab.verma import block

from oracles import partition_count

E1 = RF.symbol("eps1")
E2 = RF.symbol("eps2")
A1 = RF.symbol("a1")
A2 = RF.symbol("a2")
AA = RF.symbol("a")


def _pair_sum(n, sub=None):
    total = RF.constant(0)
    for fp in enumerate_fixed_points(n):
        w = fixed_point_weight(fp)
        total = total + (w.subs(sub) if sub else w)
    return total


def test_young_diagram_validation():
    assert YoungDiagram(()).size == 0
    assert YoungDiagram((3, 1, 1)).size == 5
    with pytest.raises(ValueError):
        YoungDiagram((1, 2))
    with pytest.raises(ValueError):
        YoungDiagram((2, 0))
    with pytest.raises(ValueError):
        YoungDiagram((2, -1))


def test_enumerate_fixed_points_counts():
    fps = enumerate_fixed_points(0)
    assert fps == (FixedPoint(YoungDiagram(()), YoungDiagram(())),)
    assert len(enumerate_fixed_points(1)) == 2
    assert len(enumerate_fixed_points(2)) == 5
    for n in range(9):
        want = sum(partition_count(j) * partition_count(n - j) for j in range(n + 1))
        fps = enumerate_fixed_points(n)
        assert len(fps) == want
        assert all(fp.total == n for fp in fps)
        keys = [(fp.first.rows, fp.second.rows) for fp in fps]
        assert keys == sorted(keys), "enumeration order must be canonical"
    # memoized: repeated calls hand back the same tuple
    assert enumerate_fixed_points(4) is enumerate_fixed_points(4)


def test_empty_fixed_point_weight_is_one():
    fp = FixedPoint(YoungDiagram(()), YoungDiagram(()))
    assert fixed_point_weight(fp) == RF.constant(1)
    assert fixed_point_weight(fp, rank=1) == RF.constant(1)


def test_rank1_weights_small_diagrams():
    box = FixedPoint(YoungDiagram((1,)), YoungDiagram(()))
    assert fixed_point_weight(box, rank=1) == 1 / (E1 * E2)
    # hand-expanded hook products for the two size-2 diagrams
    row = FixedPoint(YoungDiagram((2,)), YoungDiagram(()))
    col = FixedPoint(YoungDiagram((1, 1)), YoungDiagram(()))
    assert fixed_point_weight(row, rank=1) == 1 / (2 * E1 * E2 * E2 * (E1 - E2))
    assert fixed_point_weight(col, rank=1) == 1 / (2 * E1 * E1 * E2 * (E2 - E1))
    with pytest.raises(ValueError):
        fixed_point_weight(FixedPoint(YoungDiagram(()), YoungDiagram((1,))), rank=1)


def test_rank2_level_one_sum_closed_form():
    """Sum over both single-box pairs, restricted to a1 = a, a2 = -a."""
    sub = {"a1": AA, "a2": RF.constant(0) - AA}
    total = _pair_sum(1, sub)
    want = RF.constant(2) / (E1 * E2 * (E1 + E2 + 2 * AA) * (E1 + E2 - 2 * AA))
    assert total == want


def test_rank2_weight_exchange_symmetry():
    swap = {"a1": A2, "a2": A1}
    for n in (1, 2):
        for fp in enumerate_fixed_points(n):
            flipped = FixedPoint(fp.second, fp.first)
            assert fixed_point_weight(fp).subs(swap) == fixed_point_weight(flipped)


def test_weights_are_homogeneous_reciprocals():
    for rank, expect in ((1, 2), (2, 4)):
        for n in (1, 2, 3):
            for fp in enumerate_fixed_points(n):
                if rank == 1:
                    if fp.second.size:
                        continue
                    fp = FixedPoint(fp.first, YoungDiagram(()))
                    if fp.first.size != n:
                        continue
                w = fixed_point_weight(fp, rank=rank)
                assert w.num.is_constant()
                degs = {sum(e) for e in w.den.terms}
                assert degs == {expect * n}, (rank, n, fp)


def test_rank1_partition_function_is_exponential():
    z = nekrasov_Z(1, 6)
    fact = 1
    for n in range(7):
        if n:
            fact *= n
        assert z.coeff(n) == RF.constant(Q(1, fact)) / (E1 * E2) ** n


def test_rank1_blowup_factorization():
    """Z(e1, e2) = Z(e1, e2 - e1) * Z(e1 - e2, e2), order by order."""
    order = 6
    z = nekrasov_Z(1, order)
    left = z.map_coeffs(lambda c: c.subs({"eps2": E2 - E1}))
    right = z.map_coeffs(lambda c: c.subs({"eps1": E1 - E2}))
    cmp = equal_to_order(left * right, z, order, mode="symbolic")
    assert cmp.ok, cmp


def test_rank2_symmetries():
    z = nekrasov_Z(2, 3)
    eps_swap = {"eps1": E2, "eps2": E1}
    a_swap = {"a1": A2, "a2": A1}
    for n in range(4):
        co = z.coeff(n)
        assert co.subs(eps_swap) == co
        assert co.subs(a_swap) == co


def test_rank2_low_orders_match_block():
    """Both sides of the block/partition-sum dictionary, built separately."""
    delta = ((E1 + E2) ** 2 - 4 * AA * AA) / (4 * E1 * E2)
    central = 1 + RF.constant(6) * (E1 + E2) ** 2 / (E1 * E2)
    f = block(2)
    z = nekrasov_Z(2, 2).map_coeffs(
        lambda co: co.subs({"a1": AA, "a2": RF.constant(0) - AA})
    )
    sub = {"Delta": delta, "c": central}
    for n in range(3):
        lhs = f.coeff(n).subs(sub) / (E1 * E2) ** (2 * n)
        assert lhs == z.coeff(n), n


def test_agt_crosscheck_symbolic():
    v = agt_crosscheck(3)
    assert v.ok
    assert v.mode == "symbolic"
    assert v.identity == "agt_whittaker"
    assert v.order == 3


def test_agt_crosscheck_numeric_points():
    points = [
        (Q(2, 3), Q(5, 7), Q(1, 4)),
        (Q(-3, 5), Q(7, 2), Q(2, 9)),
        (Q(5, 4), Q(-9, 7), Q(3, 8)),
    ]
    for e1, e2, a in points:
        v = agt_crosscheck(5, eps1=e1, eps2=e2, a=a)
        assert v.ok, v
        assert v.mode == "numeric"
        assert v.params["eps1"] == str(e1)


def test_agt_crosscheck_input_validation():
    with pytest.raises(ValueError):
        agt_crosscheck(9)  # symbolic ceiling is 8
    with pytest.raises(ValueError):
        agt_crosscheck(3, eps1=Q(0), eps2=Q(1), a=Q(1, 2))
    with pytest.raises(ValueError):
        agt_crosscheck(3, eps1=Q(1))  # all-or-none numeric parameters
    with pytest.raises(ValueError):
        nekrasov_Z(3, 2)
