"""Equivariant instanton sums over Young-diagram fixed points.

Rank 1 sums over single diagrams, rank 2 over ordered pairs.  The tangent
weight at a fixed point is the usual arm/leg product; since reference
conventions differ by reflections of (eps1, eps2) and the sign of the
framing differences, the convention chosen here is pinned down empirically:
rank 1 has to resum to exp(q/(eps1*eps2)) and rank 2 has to reproduce the
Whittaker block under the parameter dictionary (agt_crosscheck), which is
computed by a different module from different recursions.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

from ._scalar import Q
from .rational import RF, Poly
from .series import GradedSeries
from .verdict import Verdict
from .verma import block

_SYMS = ("a1", "a2", "eps1", "eps2")


@dataclass(frozen=True)
class YoungDiagram:
    """Weakly decreasing positive row lengths, no trailing zeros."""

    rows: tuple

    def __post_init__(self):
        rows = tuple(self.rows)
        object.__setattr__(self, "rows", rows)
        for r in rows:
            if not isinstance(r, int) or r <= 0:
                raise ValueError(f"row lengths must be positive integers: {rows}")
        if any(rows[i] < rows[i + 1] for i in range(len(rows) - 1)):
            raise ValueError(f"rows must be weakly decreasing: {rows}")

    @property
    def size(self) -> int:
        return sum(self.rows)


@dataclass(frozen=True)
class FixedPoint:
    """Ordered pair of diagrams labeling one torus fixed point."""

    first: YoungDiagram
    second: YoungDiagram

    @property
    def total(self) -> int:
        return self.first.size + self.second.size


@lru_cache(maxsize=None)
def _partitions(n: int) -> tuple:
    if n == 0:
        return ((),)
    out = []
    def rec(rem, maxpart, acc):
        if rem == 0:
            out.append(tuple(acc))
            return
        for p in range(min(rem, maxpart), 0, -1):
            acc.append(p)
            rec(rem - p, p, acc)
            acc.pop()
    rec(n, n, [])
    return tuple(out)


@lru_cache(maxsize=None)
def enumerate_fixed_points(n: int) -> tuple:
    """All ordered diagram pairs of total size n, sorted by row tuples."""
    if not (isinstance(n, int) and n >= 0):
        raise ValueError(f"instanton number must be a nonnegative integer, got {n}")
    pairs = []
    for j in range(n + 1):
        for lam in _partitions(j):
            for mu in _partitions(n - j):
                pairs.append((lam, mu))
    pairs.sort()
    return tuple(FixedPoint(YoungDiagram(l), YoungDiagram(m)) for l, m in pairs)


def _conjugate(rows: tuple) -> tuple:
    if not rows:
        return ()
    return tuple(sum(1 for r in rows if r > j) for j in range(rows[0]))


def _lin(da: int, x: int, y: int, syms: tuple) -> Poly:
    """Linear form da*(a1 - a2) + x*eps1 + y*eps2 over the given symbols."""

    def unit(name):
        e = [0] * len(syms)
        e[syms.index(name)] = 1
        return tuple(e)

    terms = {}
    if da:
        terms[unit("a1")] = Q(da)
        terms[unit("a2")] = Q(-da)
    if x:
        terms[unit("eps1")] = Q(x)
    if y:
        terms[unit("eps2")] = Q(y)
    return Poly(syms, terms)


@lru_cache(maxsize=None)
def _pair_denominator(lam: tuple, mu: tuple, da: int, with_a: bool) -> Poly:
    """Product over boxes of lam of both tangent factors against mu.

    Arm lengths are measured in lam, leg lengths in mu (legs can go
    negative when the box lies outside mu); da is the sign of the framing
    difference a_alpha - a_beta attached to this ordered pair.
    """
    syms = _SYMS if with_a else ("eps1", "eps2")
    den = Poly.constant(1, syms)
    mu_conj = _conjugate(mu)
    for i, row in enumerate(lam):
        for j in range(row):
            arm = row - j - 1
            leg = (mu_conj[j] if j < len(mu_conj) else 0) - i - 1
            f1 = _lin(da, -leg, arm + 1, syms)
            f2 = _lin(-da, leg + 1, -arm, syms)
            den = den * f1 * f2
    return den


def fixed_point_weight(fp: FixedPoint, *, rank: int = 2) -> RF:
    """Reciprocal tangent-space Euler factor at the fixed point.

    Homogeneous of total degree -2*rank*N in the equivariant symbols.  At
    rank 1 only the first diagram may be populated and the framing symbols
    drop out entirely.
    """
    if rank == 1:
        if fp.second.size:
            raise ValueError("rank-1 weights take a single diagram (second must be empty)")
        return RF.fraction(1, _pair_denominator(fp.first.rows, fp.first.rows, 0, False))
    if rank != 2:
        raise ValueError(f"rank must be 1 or 2, got {rank}")
    l1, l2 = fp.first.rows, fp.second.rows
    den = (
        _pair_denominator(l1, l1, 0, True)
        * _pair_denominator(l1, l2, 1, True)
        * _pair_denominator(l2, l1, -1, True)
        * _pair_denominator(l2, l2, 0, True)
    )
    return RF.fraction(1, den)


def nekrasov_Z(rank: int, order: int) -> GradedSeries:
    """Generating series of fixed-point weight sums through q^order."""
    if rank not in (1, 2):
        raise ValueError(f"rank must be 1 or 2, got {rank}")
    if not (isinstance(order, int) and order >= 0):
        raise ValueError(f"order must be a nonnegative integer, got {order}")
    terms = []
    for n in range(order + 1):
        total = RF.constant(0)
        if rank == 1:
            empty = YoungDiagram(())
            for lam in _partitions(n):
                total = total + fixed_point_weight(
                    FixedPoint(YoungDiagram(lam), empty), rank=1
                )
        else:
            for fp in enumerate_fixed_points(n):
                total = total + fixed_point_weight(fp)
        terms.append((n, total))
    return GradedSeries.from_terms(0, terms, order)


def _block_side(order: int, numeric) -> list:
    """Whittaker-block coefficients pushed through the parameter dictionary.

    Returns the list of q^n coefficients of F(a/sqrt(e1 e2), sqrt(e1/e2))
    evaluated at q/(e1 e2)^2, i.e. each block coefficient is specialized
    via Delta and c and divided by (e1 e2)^(2n).
    """
    if numeric is None:
        e1, e2, a = RF.symbol("eps1"), RF.symbol("eps2"), RF.symbol("a")
        delta = ((e1 + e2) ** 2 - 4 * a * a) / (4 * e1 * e2)
        central = 1 + RF.constant(6) * (e1 + e2) ** 2 / (e1 * e2)
        f = block(order)
        sub = {"Delta": delta, "c": central}
        scale = e1 * e2
        return [f.coeff(n).subs(sub) / scale ** (2 * n) for n in range(order + 1)]
    e1, e2, a = numeric
    delta = ((e1 + e2) ** 2 - 4 * a * a) / (4 * e1 * e2)
    central = 1 + 6 * (e1 + e2) ** 2 / (e1 * e2)
    f = block(order, delta=delta, central=central)
    return [
        f.coeff(n) / RF.constant((e1 * e2) ** (2 * n)) for n in range(order + 1)
    ]


def z2_coefficient(n: int, e1, e2, av):
    """Rank-2 q^n coefficient at a rational point, summed weight by weight.

    The framing parameters are (av, -av).  Reuses the cached symbolic pair
    denominators (the same objects the symbolic path multiplies out), so
    the two evaluation routes cannot drift apart; summing exact rationals
    sidesteps the very expensive symbolic common-denominator collection.
    Raises ValueError at points where some tangent weight degenerates.
    """
    pt = {"a1": av, "a2": -av, "eps1": e1, "eps2": e2}
    total = Q(0)
    for fp in enumerate_fixed_points(n):
        l1, l2 = fp.first.rows, fp.second.rows
        d = (
            _pair_denominator(l1, l1, 0, True).eval(pt)
            * _pair_denominator(l1, l2, 1, True).eval(pt)
            * _pair_denominator(l2, l1, -1, True).eval(pt)
            * _pair_denominator(l2, l2, 0, True).eval(pt)
        )
        if d == 0:
            raise ValueError(f"tangent weight degenerates at {pt}")
        total += Q(1) / d
    return total


def agt_crosscheck(order: int, *, eps1=None, eps2=None, a=None) -> Verdict:
    """Whittaker block against the rank-2 sum, both sides independent.

    All three numeric parameters must be given together (then the block is
    run at rational (Delta, c), ceiling 12) or all omitted (fully symbolic,
    ceiling 8).  A mismatch is reported in the verdict, never raised.
    """
    given = [x for x in (eps1, eps2, a) if x is not None]
    if given and len(given) != 3:
        raise ValueError("pass all of eps1, eps2, a or none of them")
    numeric = None
    if given:
        e1, e2, av = Q(eps1), Q(eps2), Q(a)
        if e1 * e2 == 0:
            raise ValueError("eps1 and eps2 must be nonzero")
        if (e1 + e2 + 2 * av) * (e1 + e2 - 2 * av) == 0:
            raise ValueError("degenerate point: eps1 + eps2 = +-2a")
        numeric = (e1, e2, av)
    ceiling = 12 if numeric else 8
    if not (isinstance(order, int) and 0 <= order <= ceiling):
        raise ValueError(f"order must lie in 0..{ceiling}, got {order}")

    want = _block_side(order, numeric)
    if numeric is None:
        z = nekrasov_Z(2, order)
        sub = {"a1": RF.symbol("a"), "a2": RF.constant(0) - RF.symbol("a")}
    params = (
        {}
        if numeric is None
        else {"eps1": str(numeric[0]), "eps2": str(numeric[1]), "a": str(numeric[2])}
    )
    for n in range(order + 1):
        if numeric is None:
            got = z.coeff(n).subs(sub)
        else:
            got = RF.constant(z2_coefficient(n, *numeric))
        if got != want[n]:
            return Verdict(
                identity="agt_whittaker",
                params=params,
                order=order,
                ok=False,
                mode="numeric" if numeric else "symbolic",
                first_mismatch={"grade": n, "lhs": str(want[n]), "rhs": str(got)},
                note="block side and fixed-point side disagree",
            )
    return Verdict(
        identity="agt_whittaker",
        params=params,
        order=order,
        ok=True,
        mode="numeric" if numeric else "symbolic",
        note=f"block and fixed-point sums agree through q^{order}",
    )
