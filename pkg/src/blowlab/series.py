"""Truncated q-series with fractional grades and a symbolic prefix exponent.

A GradedSeries represents  q^prefix * sum_g c_g q^g  where

  * prefix is a RationalFunction (usually a constant, e.g. a conformal
    weight like -1/4 or Delta(P,b)),
  * the relative grades g run over (1/4)Z, stored internally as integer
    quarter-grades (4g), which keeps all keys exact machine ints,
  * trunc is the first unknown quarter-grade: coefficients are exact for
    every relative grade strictly below trunc/4. trunc=None means the
    series is known exactly (polynomials, monomials).

Coefficients may be rational scalars or RationalFunctions; the arithmetic
here only assumes ring operations, so the OPE engine's sqrt(2) extension
would work too (it is not needed at series level).

Public functions take INCLUSIVE orders: "order n" means coefficients
through q^n are known/compared. Internally that is trunc = 4n + 1.
"""

from __future__ import annotations

import random
from fractions import Fraction
from functools import lru_cache
from typing import Mapping, NamedTuple

from ._scalar import Q, QONE, QZERO, is_rational
from .rational import RationalFunction, random_point

GRADE_DENOM = 4  # grades live in (1/GRADE_DENOM) * Z


def _to_quarter(g) -> int:
    """Grade in Q -> integer quarter-grade; denominator must divide 4."""
    f = g if isinstance(g, Fraction) else Fraction(int(g.numerator), int(g.denominator)) if hasattr(g, "numerator") else Fraction(g)
    scaled = f * GRADE_DENOM
    if scaled.denominator != 1:
        raise ValueError(f"grade {g} not in (1/{GRADE_DENOM})Z")
    return int(scaled)


def _order_to_trunc(order) -> int | None:
    """Inclusive order in Q -> exclusive quarter-grade bound."""
    return None if order is None else _to_quarter(order) + 1


def _prefix_rf(x) -> RationalFunction:
    if isinstance(x, RationalFunction):
        return x
    return RationalFunction.constant(x)


def _min_or_none(a, b):
    if a is None:
        return b
    if b is None:
        return a
    return min(a, b)


class PrefixMismatchError(ValueError):
    pass


class InsufficientOrderError(ValueError):
    pass


class NotInvertibleError(ValueError):
    pass


class GradedSeries:
    __slots__ = ("prefix", "coeffs", "trunc")

    def __init__(self, prefix, coeffs: Mapping[int, object], trunc: int | None):
        """Internal units: coeffs keyed by quarter-grade, trunc exclusive."""
        self.prefix = _prefix_rf(prefix)
        cc = {}
        for k, v in coeffs.items():
            if v:
                if trunc is None or k < trunc:
                    cc[int(k)] = v
        self.coeffs = cc
        self.trunc = None if trunc is None else int(trunc)

    # -- constructors ---------------------------------------------------------

    @staticmethod
    def from_terms(prefix, terms, order=None) -> "GradedSeries":
        """terms: iterable of (grade in Q, coeff); order inclusive in Q."""
        cc: dict[int, object] = {}
        for g, co in terms:
            k = _to_quarter(g)
            if k in cc:
                cc[k] = cc[k] + co
            else:
                cc[k] = co
        return GradedSeries(prefix, cc, _order_to_trunc(order))

    @staticmethod
    def zero(order=None) -> "GradedSeries":
        return GradedSeries.from_terms(0, [], order)

    def map_coeffs(self, fn) -> "GradedSeries":
        """Apply fn to every stored coefficient; grades and bound unchanged.

        The prefix is not touched, so parameter substitutions that should
        also act on a symbolic prefix must handle it separately.
        """
        return GradedSeries(
            self.prefix, {k: fn(v) for k, v in self.coeffs.items()}, self.trunc
        )

    @staticmethod
    def one(order=None) -> "GradedSeries":
        return GradedSeries.from_terms(0, [(0, QONE)], order)

    @staticmethod
    def monomial(coeff, grade, order=None) -> "GradedSeries":
        return GradedSeries.from_terms(0, [(grade, coeff)], order)

    # -- queries ----------------------------------------------------------------

    def valuation(self) -> int | None:
        """Smallest quarter-grade present; trunc if empty; None if exact zero."""
        if self.coeffs:
            return min(self.coeffs)
        return self.trunc

    def known_order(self) -> Fraction | None:
        """Largest relative grade whose coefficient is known; None = exact."""
        return None if self.trunc is None else Fraction(self.trunc - 1, 4)

    def coeff(self, grade):
        """Coefficient at relative grade (in Q). Errors past the truncation."""
        k = _to_quarter(grade)
        if self.trunc is not None and k >= self.trunc:
            raise InsufficientOrderError(
                f"grade {grade} beyond known order {self.known_order()}"
            )
        return self.coeffs.get(k, QZERO)

    def grades(self):
        """Sorted relative grades with nonzero coefficients, as Fractions."""
        return [Fraction(k, 4) for k in sorted(self.coeffs)]

    def is_zero_to_trunc(self) -> bool:
        return not self.coeffs

    # -- prefix handling -----------------------------------------------------------

    def with_prefix_added(self, extra) -> "GradedSeries":
        return GradedSeries(self.prefix + _prefix_rf(extra), self.coeffs, self.trunc)

    def _prefix_gap(self, other: "GradedSeries") -> int:
        """other.prefix - self.prefix as a quarter-grade count, or raise."""
        diff = other.prefix - self.prefix
        if diff.is_zero():
            return 0
        if not diff.is_constant():
            raise PrefixMismatchError(
                f"prefixes differ by non-constant {diff}: {self.prefix} vs {other.prefix}"
            )
        d = diff.as_constant() * GRADE_DENOM
        if d.denominator != 1:
            raise PrefixMismatchError(
                f"prefix offset {diff.as_constant()} not in (1/{GRADE_DENOM})Z"
            )
        return int(d)

    def _align_to(self, other: "GradedSeries") -> tuple[dict, int | None]:
        """Rewrite other relative to self.prefix: (shifted coeffs, shifted trunc)."""
        d = self._prefix_gap(other)
        if d == 0:
            return other.coeffs, other.trunc
        shifted = {k + d: v for k, v in other.coeffs.items()}
        return shifted, None if other.trunc is None else other.trunc + d

    # -- ring operations --------------------------------------------------------------

    def __add__(self, other):
        if not isinstance(other, GradedSeries):
            return NotImplemented
        # align to the smaller prefix so relative grades stay nonnegative
        if self._prefix_gap(other) < 0:
            return other + self
        oc, ot = self._align_to(other)
        t = _min_or_none(self.trunc, ot)
        out = dict(self.coeffs)
        for k, v in oc.items():
            s = out.get(k)
            out[k] = v if s is None else s + v
        return GradedSeries(self.prefix, out, t)

    def __sub__(self, other):
        if not isinstance(other, GradedSeries):
            return NotImplemented
        return self + (-other)

    def __neg__(self):
        return GradedSeries(self.prefix, {k: -v for k, v in self.coeffs.items()}, self.trunc)

    def scaled(self, factor) -> "GradedSeries":
        """Multiply every coefficient by a scalar (Q or RationalFunction)."""
        if not factor:
            return GradedSeries(self.prefix, {}, self.trunc)
        return GradedSeries(
            self.prefix, {k: factor * v for k, v in self.coeffs.items()}, self.trunc
        )

    def __mul__(self, other):
        if not isinstance(other, GradedSeries):
            return NotImplemented
        # unknown-tail bookkeeping: tail(self) * known(other) enters at
        # trunc_self + val(other), and symmetrically; both None -> exact
        v1, v2 = self.valuation(), other.valuation()
        t = None
        if self.trunc is not None:
            t = self.trunc + v2 if v2 is not None else None
        if other.trunc is not None:
            t2 = other.trunc + v1 if v1 is not None else None
            t = _min_or_none(t, t2)
        out: dict[int, object] = {}
        for k1, c1 in self.coeffs.items():
            for k2, c2 in other.coeffs.items():
                k = k1 + k2
                if t is not None and k >= t:
                    continue
                p = c1 * c2
                s = out.get(k)
                out[k] = p if s is None else s + p
        return GradedSeries(self.prefix + other.prefix, out, t)

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("negative series power: use invert_unit")
        result = GradedSeries.one(None)
        base = self
        while n:
            if n & 1:
                result = result * base
            if n > 1:
                base = base * base
            n >>= 1
        return result

    def truncate(self, order) -> "GradedSeries":
        """Forget everything above the (inclusive) order."""
        t = _order_to_trunc(order)
        t = t if self.trunc is None else min(t, self.trunc)
        return GradedSeries(self.prefix, {k: v for k, v in self.coeffs.items() if k < t}, t)

    def __eq__(self, other):
        """Structural equality (same prefix, coeffs, trunc). For mathematical
        comparison to an order use equal_to_order."""
        if not isinstance(other, GradedSeries):
            return NotImplemented
        return (
            self.prefix == other.prefix
            and self.trunc == other.trunc
            and self.coeffs == other.coeffs
        )

    # -- presentation -------------------------------------------------------------------

    def __str__(self):
        bits = []
        for k in sorted(self.coeffs):
            g = Fraction(k, 4)
            co = self.coeffs[k]
            cs = str(co)
            if not is_rational(co) or "/" in cs or (hasattr(co, "numerator") and co < 0):
                cs = f"({cs})"
            if g == 0:
                bits.append(cs)
            else:
                bits.append(f"{cs}*q^{g}" if g != 1 else f"{cs}*q")
        body = " + ".join(bits) if bits else "0"
        tail = "" if self.trunc is None else f" + O(q^{Fraction(self.trunc, 4)})"
        if self.prefix.is_zero():
            return body + tail
        return f"q^({self.prefix}) * ({body}{tail})"

    def __repr__(self):
        return f"GradedSeries({self})"


# ---------------------------------------------------------------------------
# elementary series
# ---------------------------------------------------------------------------


def qpow(grade, coeff=1) -> GradedSeries:
    """The exact monomial coeff * q^grade."""
    return GradedSeries.monomial(coeff if coeff != 1 else QONE, grade, None)


@lru_cache(maxsize=None)
def _partition_numbers(n_max: int) -> tuple:
    """p(0..n_max) by the Euler pentagonal recurrence (exact ints)."""
    p = [0] * (n_max + 1)
    p[0] = 1
    for n in range(1, n_max + 1):
        total = 0
        k = 1
        while True:
            g1 = k * (3 * k - 1) // 2
            g2 = k * (3 * k + 1) // 2
            if g1 > n and g2 > n:
                break
            sign = -1 if k % 2 == 0 else 1
            if g1 <= n:
                total += sign * p[n - g1]
            if g2 <= n:
                total += sign * p[n - g2]
            k += 1
        p[n] = total
    return tuple(p)


def pochhammer_inf_inverse(order: int) -> GradedSeries:
    """1/(q;q)_inf = sum p(n) q^n, with p(n) known through n = order."""
    ps = _partition_numbers(max(order, 0))
    return GradedSeries.from_terms(0, [(n, Q(ps[n])) for n in range(order + 1)], order)


def pochhammer_inf(order: int) -> GradedSeries:
    """(q;q)_inf via the pentagonal number theorem, through q^order."""
    terms = []
    k = 0
    while True:
        g = k * (3 * k - 1) // 2
        g2 = k * (3 * k + 1) // 2
        if g > order and g2 > order:
            break
        sign = Q(-1) if k % 2 else Q(1)
        if k == 0:
            terms.append((0, Q(1)))
        else:
            if g <= order:
                terms.append((g, sign))
            if g2 <= order:
                terms.append((g2, sign))
        k += 1
    return GradedSeries.from_terms(0, terms, order)


@lru_cache(maxsize=None)
def pochhammer_inv(n: int, order: int) -> GradedSeries:
    """1/(q;q)_n for finite n, through q^order."""
    if n == 0:
        return GradedSeries.one(order)
    prev = pochhammer_inv(n - 1, order)
    # multiply by 1/(1-q^n) = sum_j q^{jn}
    geom = GradedSeries.from_terms(
        0, [(j * n, QONE) for j in range(0, order // n + 1)], order
    )
    return prev * geom


def theta_derive(s: GradedSeries, m: int = 1) -> GradedSeries:
    """(q d/dq)^m: multiplies the grade-(prefix+g) term by (prefix+g)^m."""
    if m < 0:
        raise ValueError("derivative count must be nonnegative")
    if m == 0:
        return s
    pref = s.prefix
    out = {}
    for k, v in s.coeffs.items():
        factor = pref + Q(k, 4)
        if isinstance(factor, RationalFunction) and factor.is_constant():
            factor = factor.as_constant()
        if not factor:
            continue
        nv = (factor**m) * v
        if nv:
            out[k] = nv
    return GradedSeries(pref, out, s.trunc)


def _int_power(base, n: int):
    """base^n for integer n of either sign (base a Q scalar or RF)."""
    if n >= 0:
        return base**n
    if isinstance(base, RationalFunction):
        inv = RationalFunction.constant(QONE) / base
    else:
        inv = QONE / base
    return inv ** (-n)


def scale_substitute(s: GradedSeries, beta) -> GradedSeries:
    """Substitute q -> beta*q: the q^{prefix+g} term picks up beta^{prefix+g}.

    The prefix must be an explicit rational and every occupied exponent
    prefix+g an integer; anything else (symbolic prefix, or a fractional
    power like beta^{1/4}) is an error rather than a silent extension.
    """
    if isinstance(beta, RationalFunction):
        if beta.is_constant():
            beta = beta.as_constant()
        elif beta.is_zero():
            raise ValueError("scale factor must be nonzero")
    if is_rational(beta) and beta == 0:
        raise ValueError("scale factor must be nonzero")
    if not s.prefix.is_constant():
        raise ValueError(
            f"q -> beta*q with symbolic prefix exponent {s.prefix}: split the prefix off first"
        )
    p0 = s.prefix.as_constant()
    out = {}
    pows: dict[int, object] = {}
    for k, v in s.coeffs.items():
        e = p0 + Q(k, 4)
        if e.denominator != 1:
            raise ValueError(f"q -> beta*q needs integer exponents, got q^{e}")
        n = int(e)
        if n not in pows:
            pows[n] = _int_power(beta, n)
        nv = pows[n] * v
        if nv:
            out[k] = nv
    return GradedSeries(s.prefix, out, s.trunc)


def dilate(s: GradedSeries, m: int) -> GradedSeries:
    """Substitute q -> q^m (m a positive integer)."""
    if m <= 0:
        raise ValueError("dilation power must be positive")
    return GradedSeries(
        s.prefix * m,
        {k * m: v for k, v in s.coeffs.items()},
        None if s.trunc is None else s.trunc * m,
    )


def invert_unit(s: GradedSeries, order=None) -> GradedSeries:
    """1/s for a series with invertible constant term, through the order.

    The operand must start at grade exactly 0 (no Laurent extension).  An
    exact operand (trunc None) needs an explicit inclusive order; a
    truncated one inherits its own order when none is given.
    """
    t = _min_or_none(s.trunc, _order_to_trunc(order))
    if t is None:
        raise ValueError("invert_unit of an exact series needs an explicit order")
    if s.coeffs and min(s.coeffs) < 0:
        raise NotInvertibleError("series has terms below grade 0; no Laurent extension")
    c0 = s.coeffs.get(0)
    if not c0:
        raise NotInvertibleError("constant term is zero; no Laurent extension")
    if isinstance(c0, RationalFunction):
        inv0 = RationalFunction.constant(QONE) / c0
    else:
        inv0 = QONE / c0
    out = {0: inv0}
    akeys = sorted(k for k in s.coeffs if 0 < k < t)
    for g in range(1, t):
        acc = None
        for h in akeys:
            if h > g:
                break
            r = out.get(g - h)
            if r is None:
                continue
            p = s.coeffs[h] * r
            acc = p if acc is None else acc + p
        if acc is None:
            continue
        val = -(inv0 * acc)
        if val:
            out[g] = val
    return GradedSeries(-s.prefix, out, t)


def series_arith(lhs: GradedSeries, rhs: GradedSeries | None, op: str, order=None) -> GradedSeries:
    """Dispatch entry point: op in {add, mul, invert_unit}."""
    if op == "add":
        result = lhs + rhs
    elif op == "mul":
        result = lhs * rhs
    elif op == "invert_unit":
        return invert_unit(lhs, order)
    else:
        raise ValueError(f"unknown series op {op!r}")
    if order is not None:
        result = result.truncate(order)
    return result


# ---------------------------------------------------------------------------
# comparison
# ---------------------------------------------------------------------------


class SeriesCompare(NamedTuple):
    ok: bool
    order: Fraction  # inclusive relative-grade bound actually compared
    mode: str
    grade: Fraction | None  # first mismatching grade
    lhs: object | None
    rhs: object | None


def equal_to_order(
    a: GradedSeries,
    b: GradedSeries,
    order,
    mode: str = "auto",
    seed: int = 0,
    points: int = 3,
) -> SeriesCompare:
    """Compare two series for all relative grades <= order (grades in Q).

    Raises InsufficientOrderError when either side is not exact that far;
    an identity check must never silently compare less than asked.
    """
    t = _to_quarter(order)
    bc, bt = a._align_to(b)
    for name, tr in (("lhs", a.trunc), ("rhs", bt)):
        if tr is not None and tr <= t:
            raise InsufficientOrderError(
                f"{name} only known through grade {Fraction(tr - 1, 4)}, asked {Fraction(t, 4)}"
            )
    keys = sorted(k for k in set(a.coeffs) | set(bc) if k <= t)
    syms: set[str] = set()
    pairs = []
    for k in keys:
        l = a.coeffs.get(k, QZERO)
        r = bc.get(k, QZERO)
        for x in (l, r):
            if isinstance(x, RationalFunction):
                syms.update(x.active_symbols)
        pairs.append((k, l, r))
    if mode == "auto":
        mode = "symbolic" if len(syms) <= 2 else "sampled"
    if mode == "symbolic":
        for k, l, r in pairs:
            if not _coeff_eq(l, r):
                return SeriesCompare(False, Fraction(t, 4), mode, Fraction(k, 4), l, r)
        return SeriesCompare(True, Fraction(t, 4), mode, None, None, None)
    if mode != "sampled":
        raise ValueError(f"unknown mode {mode!r}")
    if points < 3:
        raise ValueError("sampled comparison needs at least 3 points")
    rng = random.Random(seed)
    ssyms = sorted(syms)
    for _ in range(points):
        for _attempt in range(64):
            pt = random_point(ssyms, rng)
            try:
                for k, l, r in pairs:
                    lv = l.eval(pt) if isinstance(l, RationalFunction) else l
                    rv = r.eval(pt) if isinstance(r, RationalFunction) else r
                    if lv != rv:
                        return SeriesCompare(
                            False, Fraction(t, 4), mode, Fraction(k, 4), l, r
                        )
            except ZeroDivisionError:
                continue
            break
        else:
            raise RuntimeError("could not find a pole-free sample point")
    return SeriesCompare(True, Fraction(t, 4), mode, None, None, None)


def _coeff_eq(l, r) -> bool:
    if isinstance(l, RationalFunction) or isinstance(r, RationalFunction):
        lc = l if isinstance(l, RationalFunction) else RationalFunction.constant(l)
        rc = r if isinstance(r, RationalFunction) else RationalFunction.constant(r)
        return lc == rc
    return l == r
