"""Independent test oracles.

These deliberately use different algorithms from the package code, so that
agreement is evidence rather than tautology. Nothing in here is imported by
the package itself.
"""

from fractions import Fraction
from functools import lru_cache


@lru_cache(maxsize=None)
def partition_count(n: int, max_part: int | None = None) -> int:
    """Number of partitions of n with parts <= max_part, by direct DP.

    (The package computes p(n) via the pentagonal recurrence; this is the
    independent route.)
    """
    if max_part is None:
        max_part = n
    if n == 0:
        return 1
    if n < 0 or max_part == 0:
        return 0
    return partition_count(n - max_part, max_part) + partition_count(n, max_part - 1)


def poly_times_oracle(c1: dict[int, Fraction], c2: dict[int, Fraction]) -> dict:
    """Schoolbook convolution of two integer-graded coefficient dicts."""
    out: dict[int, Fraction] = {}
    for k1, v1 in c1.items():
        for k2, v2 in c2.items():
            out[k1 + k2] = out.get(k1 + k2, Fraction(0)) + v1 * v2
    return {k: v for k, v in out.items() if v}


def qseries_coeffs(series, upto: int) -> list:
    """Integer-grade coefficients [c_0, ..., c_{upto-1}] of a GradedSeries
    with zero prefix, as plain values."""
    out = []
    for n in range(upto):
        out.append(series.coeff(Fraction(n)))
    return out


def weyl_kac_character(l: int, k: int, order: int):
    """Specialized character tail of the irreducible affine sl2 module L(l,k):

        chi = q^{l(l+2)/(4(k+2))} * [ sum_j (2(k+2)j + l + 1)
               q^{(k+2)j^2 + (l+1)j} ] / (q)_inf^3

    Derived from the theta-quotient form by an l'Hopital limit plus the
    Jacobi cube identity sum_j (4j+1) q^{2j^2+j} = (q)_inf^3. Used only as a
    cross-check oracle; the package never computes characters this way.
    """
    from blowlab.series import GradedSeries, pochhammer_inf_inverse

    pref = Fraction(l * (l + 2), 4 * (k + 2))
    terms = []
    j = 0
    while True:
        gpos = (k + 2) * j * j + (l + 1) * j
        gneg = (k + 2) * j * j - (l + 1) * j
        if gpos > order and gneg > order:
            break
        if gpos <= order:
            terms.append((gpos, Fraction(2 * (k + 2) * j + l + 1)))
        if j and gneg <= order:
            terms.append((gneg, Fraction(-2 * (k + 2) * j + l + 1)))
        j += 1
    theta_like = GradedSeries.from_terms(0, terms, order)
    inv3 = pochhammer_inf_inverse(order) ** 3
    return (theta_like * inv3.truncate(order)).with_prefix_added(pref)


def _alternating_pattern(l: int, k: int, m: int) -> int:
    """Far-left extremal value at position m: l on evens, k-l on odds."""
    return l if m % 2 == 0 else k - l


def _position_cost(l: int, k: int, m: int, v: int) -> int:
    if m >= 0:
        return m * v
    return -m * (_alternating_pattern(l, k, m) - v)


def config_brute_force(l, k, max_weight, extra_window=0):
    """Exhaustive adjacency-valid assignment count on the sweep window.

    No weight pruning whatsoever: every f with f(m)+f(m+1) <= k on the
    window is generated and weighed after the fact. Exponential in the
    window length, so callers must keep max_weight tiny (<= 5 or so).
    extra_window widens the left edge, which lets tests confirm the counts
    are already stable at the default width.
    """
    left = 2 * max_weight + 2 + extra_window
    right = max_weight + 1
    counts: dict = {}

    def rec(m, prev, w):
        if m > right:
            if w <= max_weight:
                counts[w] = counts.get(w, 0) + 1
            return
        for v in range(k - prev + 1):
            rec(m + 1, v, w + _position_cost(l, k, m, v))

    rec(-left, _alternating_pattern(l, k, -left - 1), 0)
    return counts


def config_transfer_counts(l, k, max_weight, extra_window=0):
    """Pruning-free transfer sweep carrying exact weight polynomials.

    States are keyed by the previous value only; each state holds a plain
    exponent->count dict (a Laurent polynomial in the weight variable, since
    partial weights go negative when a value is raised above the far-left
    pattern). Nothing is ever discarded mid-sweep, so this checks the
    production enumerator's pruning logic from the outside.
    """
    left = 2 * max_weight + 2 + extra_window
    right = max_weight + 1
    states = {_alternating_pattern(l, k, -left - 1): {0: 1}}
    for m in range(-left, right + 1):
        new: dict = {}
        for prev, poly in states.items():
            for v in range(k - prev + 1):
                c = _position_cost(l, k, m, v)
                tgt = new.setdefault(v, {})
                for w, cnt in poly.items():
                    tgt[w + c] = tgt.get(w + c, 0) + cnt
        states = new
    counts: dict = {}
    for poly in states.values():
        for w, cnt in poly.items():
            if 0 <= w <= max_weight:
                counts[w] = counts.get(w, 0) + cnt
    return counts
