"""Highest-weight bookkeeping and the character zoo around central charge -5.

Weights are parametrized by a momentum P and a coupling b through

    Delta = (b + 1/b)^2 / 4 - P^2,        c = 1 + 6 (b + 1/b)^2,

and everything here stays inside exact rational arithmetic: only b^2, P^2
and P*b ever reach a computed weight, so quantities that look like they
need square roots (the two screened couplings with squares b^2/(1-b^2) and
b^2-1) are always handled through their squares.  Character tails are plain
integer q-series; all coupling dependence lives in the grading prefixes.

The module ends in ``verify_char_identity``, which replays the character
identities behind the decomposition theorems of the twisted (Urod) modules
and reports a :class:`~blowlab.verdict.Verdict`.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from math import gcd

from ._scalar import Q
from .rational import RF, RationalFunction, random_point
from .series import (
    GradedSeries,
    PrefixMismatchError,
    equal_to_order,
    pochhammer_inf_inverse,
    qpow,
)
from .verdict import Verdict

_B = RF.symbol("b")
_P = RF.symbol("P")


def _rf(x) -> RationalFunction:
    return x if isinstance(x, RationalFunction) else RF.constant(x)


# -- labels ---------------------------------------------------------------


@dataclass(frozen=True)
class HighestWeight:
    """Generic highest weight: momentum P over the coupling, stored squared."""

    P: RationalFunction
    b_squared: RationalFunction

    def __post_init__(self):
        object.__setattr__(self, "P", _rf(self.P))
        object.__setattr__(self, "b_squared", _rf(self.b_squared))
        if self.b_squared.is_zero():
            raise ValueError("b_squared must be nonzero")

    def _bracket(self) -> RationalFunction:
        # (b + 1/b)^2 without ever leaving the field generated by b^2
        return self.b_squared + 2 + RF.constant(1) / self.b_squared

    def delta(self) -> RationalFunction:
        return self._bracket() * Q(1, 4) - self.P * self.P

    def central_charge(self) -> RationalFunction:
        return self._bracket() * 6 + 1


@dataclass(frozen=True)
class DegenerateLabel:
    """Label (m, n) of the degenerate momentum (m/b + n b)/2.

    Squaring that momentum gives (m^2/b^2 + 2mn + n^2 b^2)/4, so the weight

        Delta = ((1 - n^2) b^2 + (1 - m^2)/b^2 + 2 - 2mn) / 4

    is rational in b^2 even though the momentum itself is not.
    """

    m: int
    n: int
    b_squared: RationalFunction

    def __post_init__(self):
        if self.m < 1 or self.n < 1:
            raise ValueError(f"degenerate labels need m, n >= 1, got ({self.m}, {self.n})")
        object.__setattr__(self, "b_squared", _rf(self.b_squared))
        if self.b_squared.is_zero():
            raise ValueError("b_squared must be nonzero")

    def delta(self) -> RationalFunction:
        b2 = self.b_squared
        m, n = self.m, self.n
        quarter = Q(1, 4)
        return (
            b2 * ((1 - n * n) * quarter)
            + RF.constant(Q(1 - m * m, 4)) / b2
            + Q(2 - 2 * m * n, 4)
        )

    def central_charge(self) -> RationalFunction:
        b2 = self.b_squared
        return (b2 + 2 + RF.constant(1) / b2) * 6 + 1


@dataclass(frozen=True)
class MinimalLabel:
    """Kac-table entry (m, n) of the (p, p') minimal model, b^2 = -p/p'.

    Boundary labels (m = p or n = p') are representable; their characters
    vanish identically.  (m, n) and (p - m, p' - n) name the same module.
    """

    p: int
    p_prime: int
    m: int
    n: int

    def __post_init__(self):
        if self.p < 1 or self.p_prime < 1:
            raise ValueError("p and p' must be positive")
        if gcd(self.p, self.p_prime) != 1:
            raise ValueError(f"({self.p}, {self.p_prime}) are not coprime")
        if not 1 <= self.m <= self.p:
            raise ValueError(f"m = {self.m} outside [1, {self.p}]")
        if not 1 <= self.n <= self.p_prime:
            raise ValueError(f"n = {self.n} outside [1, {self.p_prime}]")

    def b_squared(self):
        return Q(-self.p, self.p_prime)

    def delta(self):
        p, pp, m, n = self.p, self.p_prime, self.m, self.n
        return Q((n * p - m * pp) ** 2 - (p - pp) ** 2, 4 * p * pp)

    def central_charge(self):
        p, pp = self.p, self.p_prime
        return 1 - Q(6 * (p - pp) ** 2, p * pp)


@dataclass(frozen=True)
class UrodSector:
    """One of the two regraded lattice sectors: U0 (offsets in Z) or U1
    (offsets in Z - 1/4)."""

    sector: str

    def __post_init__(self):
        if self.sector not in ("U0", "U1"):
            raise ValueError(f"sector must be U0 or U1, got {self.sector!r}")


def weight_params(label) -> tuple[RationalFunction, RationalFunction]:
    """(Delta, c) for any of the label types above."""
    if isinstance(label, (HighestWeight, DegenerateLabel)):
        return label.delta(), label.central_charge()
    if isinstance(label, MinimalLabel):
        return _rf(label.delta()), _rf(label.central_charge())
    raise TypeError(f"no weight data for {type(label).__name__}")


# -- characters -----------------------------------------------------------


def char_verma(delta, order: int) -> GradedSeries:
    """q^delta times the partition generating series, through q^order."""
    if order < 0:
        raise ValueError("order must be >= 0")
    return pochhammer_inf_inverse(order).with_prefix_added(_rf(delta))


def char_degenerate(m: int, n: int, b_squared, order: int) -> GradedSeries:
    """Character with the level-mn singular vector removed:
    q^Delta (1 - q^{mn}) / (q)_inf."""
    label = DegenerateLabel(m, n, b_squared)
    body = (GradedSeries.one(None) - qpow(m * n)) * pochhammer_inf_inverse(order)
    return body.with_prefix_added(label.delta())


def char_minimal(label: MinimalLabel, order: int) -> GradedSeries:
    """Irreducible minimal-model character by the double alternating sum.

    The numerator runs over an integer j:

        sum_j  q^{p p' j^2 + j (p' m - p n)}  -  q^{p p' j^2 + j (p' m + p n) + mn}

    Both exponent families are nonnegative: the subtracted one factors as
    (p j + m)(p' j + n) and the first differs from it by mn.  The loop can
    therefore stop once p p' j^2 - j (p' m + p n) climbs past the target
    order.
    """
    p, pp, m, n = label.p, label.p_prime, label.m, label.n
    a = p * pp
    b1 = pp * m - p * n
    b2 = pp * m + p * n
    terms: dict[int, int] = {}
    jj = 0
    while a * jj * jj - b2 * jj <= order:
        for j in (jj,) if jj == 0 else (jj, -jj):
            e = a * j * j + b1 * j
            if e <= order:
                terms[e] = terms.get(e, 0) + 1
            e = a * j * j + b2 * j + m * n
            if e <= order:
                terms[e] = terms.get(e, 0) - 1
        jj += 1
    numer = GradedSeries.from_terms(0, terms.items(), order)
    tail = numer * pochhammer_inf_inverse(order)
    return tail.with_prefix_added(_rf(label.delta()))


_LATTICE_SECTORS = ("L01", "L11", "U0", "U1")


def char_lattice_urod(sector, order: int) -> GradedSeries:
    """Rank-one charge-lattice characters and their regraded twins.

    L01 and L11 sum q^{k^2} over integer and half-integer momenta; U0 and
    U1 sum q^{k^2 - k} over the same two momentum sets.  Completing the
    square turns each into a fractional power of q times an integer-graded
    theta tail over the partition series:

        L01: q^0     * sum_k q^{k^2}      U0: q^0      * sum_k q^{k^2 + k}
        L11: q^{1/4} * sum_k q^{k^2 + k}  U1: q^{-1/4} * sum_k q^{k^2}
    """
    name = getattr(sector, "sector", sector)
    if name not in _LATTICE_SECTORS:
        raise ValueError(
            f"sector must be one of {', '.join(_LATTICE_SECTORS)}, got {name!r}"
        )
    if name in ("L01", "U1"):
        theta = _theta_all_squares(order)
    else:
        theta = _theta_shifted_squares(order)
    body = theta * pochhammer_inf_inverse(order)
    shift = {"L01": 0, "L11": Q(1, 4), "U0": 0, "U1": Q(-1, 4)}[name]
    return body.with_prefix_added(shift)


def _theta_all_squares(order: int) -> GradedSeries:
    terms = {0: 1}
    k = 1
    while k * k <= order:
        terms[k * k] = 2
        k += 1
    return GradedSeries.from_terms(0, terms.items(), order)


def _theta_shifted_squares(order: int) -> GradedSeries:
    terms = {}
    k = 0
    while k * (k + 1) <= order:
        terms[k * (k + 1)] = 2
        k += 1
    return GradedSeries.from_terms(0, terms.items(), order)


# -- identity verdicts ------------------------------------------------------
#
# Builders return (parts, note); a part is (tag, lhs, rhs) where the two
# sides are either GradedSeries (compared through equal_to_order) or plain
# rational functions (compared exactly).  bval is None for a symbolic
# coupling, or a rational value substituted for b.


def _screened_squares(bb: RationalFunction):
    one = RF.constant(1)
    b2 = bb * bb
    return b2, b2 / (one - b2), b2 - one


def _build_urod_lattice(params, order, bval):
    parts = [
        (
            "U0 vs shifted L11",
            char_lattice_urod("U0", order),
            char_lattice_urod("L11", order).with_prefix_added(Q(-1, 4)),
        ),
        (
            "U1 vs shifted L01",
            char_lattice_urod("U1", order),
            char_lattice_urod("L01", order).with_prefix_added(Q(-1, 4)),
        ),
    ]
    return parts, "pure regrading; no summand truncation involved"


def _build_vacuum_product_sum(params, order, bval):
    bb = _B if bval is None else RF.constant(bval)
    b2, b1sq, b2sq = _screened_squares(bb)
    acc = None
    n = 1
    while (n - 2) ** 2 - 1 <= 4 * order:
        term = char_degenerate(1, n, b1sq, order) * char_degenerate(n, 1, b2sq, order)
        acc = term if acc is None else acc + term
        n += 2
    rhs = char_lattice_urod("U0", order) * char_degenerate(1, 1, b2, order)
    note = (
        f"odd summands n <= {n - 2} included; an omitted summand opens at "
        f"grade ((n-2)^2 - 1)/4 > {order}"
    )
    return [("vacuum-sector sum", acc, rhs)], note


def _build_deltasum(params, order, bval):
    # here the order is the largest label n checked, not a series order
    bb = _B if bval is None else RF.constant(bval)
    _, b1sq, b2sq = _screened_squares(bb)
    parts = []
    for n in range(1, max(1, order) + 1):
        lhs = DegenerateLabel(1, n, b1sq).delta() + DegenerateLabel(n, 1, b2sq).delta()
        rhs = RF.constant(Q((n - 2) ** 2 - 1, 4))
        parts.append((f"n = {n}", lhs, rhs))
    return parts, "closed-form weight sums; nothing truncated"


def _rep_offsets(sector: str, order: int) -> list:
    """Grading offsets k (ascending |k|) whose summand can reach q^order,
    i.e. k^2 - |k| <= order; integer offsets for U1, half-integer for U0."""
    ks = []
    if sector == "U1":
        ks.append(Q(0))
        i = 1
        while i * (i - 1) <= order:
            ks += [Q(i), Q(-i)]
            i += 1
    else:
        num = 1
        while num * num - 2 * num <= 4 * order:
            ks += [Q(num, 2), Q(-num, 2)]
            num += 2
    return ks


def _build_rep_decomp(params, order, bval):
    sector = params.get("sector", "both")
    if sector not in ("U0", "U1", "both"):
        raise ValueError(f"sector must be U0, U1 or both, got {sector!r}")
    pval = params.get("P")
    pp = _P if pval is None else RF.constant(pval)
    bb = _B if bval is None else RF.constant(bval)
    one = RF.constant(1)
    b2, b1sq, b2sq = _screened_squares(bb)

    def bracket(sq):
        return (sq + 2 + one / sq) * Q(1, 4)

    base = char_verma(bracket(b2) - pp * pp, order)
    parts = []
    kmax = Q(0)
    for sec in ("U0", "U1") if sector == "both" else (sector,):
        lhs = char_lattice_urod(sec, order) * base
        acc = None
        for k in _rep_offsets(sec, order):
            # the screened momenta only enter squared:
            #   (P1 + k b1)^2 = (P + k b)^2 / (1 - b^2)
            #   (P2 + k/b2)^2 = (P b + k)^2 / (b^2 - 1)
            d1 = bracket(b1sq) - (pp + bb * k) ** 2 / (one - b2)
            d2 = bracket(b2sq) - (pp * bb + k) ** 2 / b2sq
            term = char_verma(d1, order) * char_verma(d2, order)
            acc = term if acc is None else acc + term
            kmax = max(kmax, abs(k))
        parts.append((f"{sec} decomposition", lhs, acc))
    note = (
        f"offsets with k^2 - |k| <= {order} included (max |k| = {kmax}); an "
        f"omitted summand opens strictly above q^{order}"
    )
    return parts, note


def _build_minmod(params, order, bval):
    try:
        p = int(params["p"])
        pp = int(params["p_prime"])
        m = int(params["m"])
        mprime = int(params["m_prime"])
    except KeyError as missing:
        raise ValueError(f"minmod needs parameter {missing}") from None
    base = char_minimal(MinimalLabel(p, pp, m, mprime), order)
    parts = []
    for sec, parity in (("U0", (m + mprime + 1) % 2), ("U1", (m + mprime) % 2)):
        lhs = char_lattice_urod(sec, order) * base
        acc = None
        for n in range(1, p + pp):
            if n % 2 != parity:
                continue
            term = char_minimal(MinimalLabel(p, p + pp, m, n), order) * char_minimal(
                MinimalLabel(p + pp, pp, n, mprime), order
            )
            acc = term if acc is None else acc + term
        parts.append((f"{sec} x ({m},{mprime})", lhs, acc))
    return parts, f"finite sum over n in [1, {p + pp - 1}]; nothing omitted"


def _char_pair_25_53(j: int, order: int) -> GradedSeries:
    """Product of the (2,5) label (1,j) with the (5,3) label (j,1)."""
    return char_minimal(MinimalLabel(2, 5, 1, j), order) * char_minimal(
        MinimalLabel(5, 3, j, 1), order
    )


def _build_level_one_factorization(params, order, bval):
    quarter = Q(1, 4)
    parts = [
        (
            "half-integer momentum module",
            char_lattice_urod("L11", order),
            (_char_pair_25_53(1, order) + _char_pair_25_53(3, order)).with_prefix_added(
                quarter
            ),
        ),
        (
            "vacuum module",
            char_lattice_urod("L01", order),
            (_char_pair_25_53(2, order) + _char_pair_25_53(4, order)).with_prefix_added(
                quarter
            ),
        ),
    ]
    return parts, "two-summand finite decompositions; nothing omitted"


def _build_c5(params, order, bval):
    # Diagonal Virasoro at (b + 1/b)^2 = -1, where (b - 1/b)^2 = -5:
    # the irreducible at label (n, n) opens at (n^2 - 1)/4 and loses one
    # Verma at level n^2, while the projective cover at (n, -n) is two
    # Vermas opening at (n^2 - 1)/4 and (5 n^2 - 1)/4.
    inv = pochhammer_inf_inverse(order)

    def diag_irr(n):
        body = (GradedSeries.one(None) - qpow(n * n)) * inv
        return body.with_prefix_added(Q(n * n - 1, 4))

    def diag_proj(n):
        first = char_verma(RF.constant(Q(n * n - 1, 4)), order)
        if n == 0:
            # self-conjugate point: the two Verma constituents coincide,
            # so a single copy enters
            return first
        return first + char_verma(RF.constant(Q(5 * n * n - 1, 4)), order)

    def sum_over(start, base, mk):
        acc, n, last = None, start, start
        while Q(n * n - 1, 4) - base <= order:
            term = mk(n)
            acc = term if acc is None else acc + term
            last = n
            n += 2
        return acc, last

    parts = []
    bounds = []
    s, hi = sum_over(1, Q(0), diag_irr)
    parts.append(("vacuum pair", _char_pair_25_53(1, order), s))
    bounds.append(hi)
    s, hi = sum_over(1, Q(0), diag_proj)
    parts.append(("charge-3 pair", _char_pair_25_53(3, order), s))
    bounds.append(hi)
    s, hi = sum_over(2, Q(-1, 4), diag_proj)
    s = diag_proj(0) if s is None else diag_proj(0) + s
    parts.append(("charge-2 pair", _char_pair_25_53(2, order), s))
    bounds.append(hi)
    s, hi = sum_over(2, Q(3, 4), diag_irr)
    parts.append(("charge-4 pair", _char_pair_25_53(4, order), s))
    bounds.append(hi)
    note = (
        f"diagonal labels n <= {max(bounds)} included per part; an omitted "
        f"label opens at (n^2 - 1)/4 beyond the compared window"
    )
    return parts, note


_IDENTITY_BUILDERS = {
    "urod_lattice": (_build_urod_lattice, False, frozenset()),
    "chAb": (_build_vacuum_product_sum, True, frozenset({"b"})),
    "deltasum": (_build_deltasum, True, frozenset({"b"})),
    "rep_decomp": (_build_rep_decomp, True, frozenset({"b", "P", "sector"})),
    "minmod": (_build_minmod, False, frozenset({"p", "p_prime", "m", "m_prime"})),
    "m2535": (_build_level_one_factorization, False, frozenset()),
    "c5": (_build_c5, False, frozenset()),
}


def _compare_parts(parts, order, seed):
    modes = set()
    for tag, lhs, rhs in parts:
        if isinstance(lhs, GradedSeries):
            res = equal_to_order(lhs, rhs, order, seed=seed)
            modes.add(res.mode)
            if not res.ok:
                return {
                    "part": tag,
                    "grade": res.grade,
                    "lhs": res.lhs,
                    "rhs": res.rhs,
                }, modes
        else:
            modes.add("symbolic")
            if lhs != rhs:
                return {"part": tag, "grade": None, "lhs": lhs, "rhs": rhs}, modes
    return None, modes


def verify_char_identity(identity: str, params=None, order: int = 30, *, seed: int = 0) -> Verdict:
    """Check one registered character identity up to q^order (inclusive).

    Identities with a free coupling are checked symbolically in b and then
    again at three random rational couplings (poles rejected and redrawn);
    all others are exact rational computations.  Raises ValueError for an
    unknown identity or out-of-range labels; a failed identity is reported
    in the verdict, never raised.
    """
    p = dict(params or {})
    try:
        builder, coupling_free, allowed = _IDENTITY_BUILDERS[identity]
    except KeyError:
        known = ", ".join(sorted(_IDENTITY_BUILDERS))
        raise ValueError(f"unknown identity {identity!r} (known: {known})") from None
    stray = set(p) - allowed
    if stray:
        raise ValueError(f"{identity} does not accept parameter(s) {sorted(stray)}")
    b0 = p.get("b")
    try:
        parts, note = builder(p, order, b0)
    except PrefixMismatchError as exc:
        return Verdict(identity, p, order, False, "symbolic", note=f"prefix mismatch: {exc}")
    mismatch, modes = _compare_parts(parts, order, seed)
    mode = "+".join(sorted(modes))
    if mismatch is not None:
        return Verdict(identity, p, order, False, mode, first_mismatch=mismatch, note=note)
    if coupling_free and b0 is None:
        rng = random.Random(seed)
        found = 0
        for _ in range(64):
            bval = random_point(("b",), rng)["b"]
            try:
                parts, _ = builder(p, order, bval)
            except ZeroDivisionError:
                continue  # degenerate coupling, e.g. b in {0, 1, -1}
            except PrefixMismatchError as exc:
                return Verdict(
                    identity, p, order, False, mode,
                    note=f"prefix mismatch at b = {bval}: {exc}",
                )
            mismatch, _ = _compare_parts(parts, order, seed)
            if mismatch is not None:
                mismatch["b"] = bval
                return Verdict(
                    identity, p, order, False, mode, first_mismatch=mismatch, note=note
                )
            found += 1
            if found == 3:
                break
        else:
            raise RuntimeError("no pole-free rational coupling found in 64 draws")
        mode = f"{mode}+resampled({found})"
    return Verdict(identity, p, order, True, mode, note=note)
