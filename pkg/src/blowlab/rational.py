"""Sparse multivariate polynomials and canonical rational functions over Q.

This is the coefficient workhorse for the whole lab. Everything is exact:
coefficients are Fraction/mpq, exponents are machine ints, and a
RationalFunction is always stored in canonical form

    * numerator and denominator gcd-reduced,
    * denominator monic in lex order on the sorted symbol tuple,
    * unused symbols pruned, symbols sorted,

so that structural equality (==) coincides with mathematical equality.

Symbols are plain strings drawn from a fixed registry (SYMBOLS below); the
series variable q is deliberately not a symbol, it lives in GradedSeries.
"""

from __future__ import annotations

import random
from math import gcd as _int_gcd, lcm as _int_lcm
from typing import Iterable, Mapping, NamedTuple

from ._scalar import Q, QONE, QZERO, is_rational, q_gcd

#: the symbol registry. b and the momenta never appear under square roots in
#: the rational layer; the sqrt(2) needed by stress tensors lives in ope.py.
SYMBOLS = frozenset(
    {
        "a",
        "a1",
        "a2",
        "alpha",
        "b",
        "c",
        "delta",
        "Delta",
        "eps",
        "eps1",
        "eps2",
        "k",
        "P",
        "u",
    }
)


class UnknownSymbolError(ValueError):
    pass


def _check_symbols(symbols: Iterable[str]) -> tuple[str, ...]:
    syms = tuple(symbols)
    for s in syms:
        if s not in SYMBOLS:
            raise UnknownSymbolError(f"symbol {s!r} not in registry {sorted(SYMBOLS)}")
    if list(syms) != sorted(set(syms)):
        raise ValueError(f"symbols must be sorted and unique, got {syms}")
    return syms


# ---------------------------------------------------------------------------
# term-dict helpers (exponent tuple -> coefficient)
# ---------------------------------------------------------------------------


def _t_add(t1: dict, t2: dict) -> dict:
    out = dict(t1)
    for e, co in t2.items():
        s = out.get(e, QZERO) + co
        if s:
            out[e] = s
        else:
            out.pop(e, None)
    return out


def _t_mul(t1: dict, t2: dict) -> dict:
    if len(t1) > len(t2):
        t1, t2 = t2, t1
    out: dict = {}
    for e1, c1 in t1.items():
        for e2, c2 in t2.items():
            e = tuple(x + y for x, y in zip(e1, e2))
            s = out.get(e, QZERO) + c1 * c2
            if s:
                out[e] = s
            else:
                out.pop(e, None)
    return out


def _t_scale(t: dict, co) -> dict:
    if not co:
        return {}
    return {e: c * co for e, c in t.items()}


class Poly:
    """Sparse multivariate polynomial with rational coefficients.

    terms maps exponent tuples (one slot per symbol) to nonzero coefficients.
    Instances are treated as immutable.
    """

    __slots__ = ("symbols", "terms", "_hash")

    def __init__(self, symbols: Iterable[str], terms: Mapping[tuple, object] | None = None):
        self.symbols = _check_symbols(symbols)
        n = len(self.symbols)
        tt: dict = {}
        if terms:
            for e, co in terms.items():
                e = tuple(int(x) for x in e)
                if len(e) != n:
                    raise ValueError(f"exponent {e} has wrong arity for {self.symbols}")
                if any(x < 0 for x in e):
                    raise ValueError(f"negative exponent in {e}")
                if co:
                    co = co if is_rational(co) and not isinstance(co, int) else Q(co)
                    prev = tt.get(e)
                    tt[e] = co if prev is None else prev + co
                    if not tt[e]:
                        del tt[e]
        self.terms = tt
        self._hash = None

    # -- constructors -------------------------------------------------------

    @staticmethod
    def _mk(symbols: tuple[str, ...], terms: dict) -> "Poly":
        """Internal fast path: trusts symbols sorted/valid and terms clean."""
        p = Poly.__new__(Poly)
        p.symbols = symbols
        p.terms = terms
        p._hash = None
        return p

    @staticmethod
    def constant(value, symbols: Iterable[str] = ()) -> "Poly":
        syms = tuple(symbols)
        if not value:
            return Poly(syms, {})
        return Poly(syms, {(0,) * len(syms): Q(value)})

    @staticmethod
    def variable(name: str) -> "Poly":
        return Poly((name,), {(1,): QONE})

    # -- basic queries -------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return all(all(x == 0 for x in e) for e in self.terms)

    def as_constant(self):
        if self.is_zero():
            return Q(0)
        if not self.is_constant():
            raise ValueError(f"not a constant: {self}")
        return next(iter(self.terms.values()))

    def used_vars(self) -> tuple[int, ...]:
        used = [False] * len(self.symbols)
        for e in self.terms:
            for i, x in enumerate(e):
                if x:
                    used[i] = True
        return tuple(i for i, u in enumerate(used) if u)

    def degree(self, i: int) -> int:
        """Degree in variable slot i (-1 for the zero polynomial)."""
        if not self.terms:
            return -1
        return max(e[i] for e in self.terms)

    def total_degree(self) -> int:
        if not self.terms:
            return -1
        return max(sum(e) for e in self.terms)

    def lex_leading(self) -> tuple[tuple, object]:
        e = max(self.terms)
        return e, self.terms[e]

    # -- ring operations -----------------------------------------------------

    def _aligned(self, other: "Poly") -> tuple["Poly", "Poly"]:
        if self.symbols == other.symbols:
            return self, other
        merged = tuple(sorted(set(self.symbols) | set(other.symbols)))
        return self.embed(merged), other.embed(merged)

    def embed(self, symbols: tuple[str, ...]) -> "Poly":
        """Reindex into a superset symbol tuple."""
        if symbols == self.symbols:
            return self
        pos = [symbols.index(s) for s in self.symbols]
        n = len(symbols)
        tt = {}
        for e, co in self.terms.items():
            ne = [0] * n
            for p, x in zip(pos, e):
                ne[p] = x
            tt[tuple(ne)] = co
        p2 = Poly.__new__(Poly)
        p2.symbols = symbols
        p2.terms = tt
        p2._hash = None
        return p2

    def __add__(self, other):
        if is_rational(other):
            other = Poly.constant(other, self.symbols)
        if not isinstance(other, Poly):
            return NotImplemented
        a, b = self._aligned(other)
        return Poly._mk(a.symbols, _t_add(a.terms, b.terms))

    __radd__ = __add__

    def __neg__(self):
        return Poly._mk(self.symbols, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        if is_rational(other):
            other = Poly.constant(other, self.symbols)
        if not isinstance(other, Poly):
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if is_rational(other):
            return Poly._mk(self.symbols, _t_scale(self.terms, Q(other)))
        if not isinstance(other, Poly):
            return NotImplemented
        a, b = self._aligned(other)
        return Poly._mk(a.symbols, _t_mul(a.terms, b.terms))

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("negative power of a Poly; use RationalFunction")
        result = Poly.constant(1, self.symbols)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base if n > 1 else base
            n >>= 1
        return result

    def __eq__(self, other):
        if is_rational(other):
            return self.is_constant() and self.as_constant() == other
        if not isinstance(other, Poly):
            return NotImplemented
        a, b = self._aligned(other)
        return a.terms == b.terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.symbols, frozenset(self.terms.items())))
        return self._hash

    def __bool__(self):
        return bool(self.terms)

    # -- evaluation / substitution -------------------------------------------

    def eval(self, point: Mapping[str, object]):
        """Evaluate at rational values for every used symbol."""
        total = QZERO
        for e, co in self.terms.items():
            v = co
            for i, x in enumerate(e):
                if x:
                    v = v * Q(point[self.symbols[i]]) ** x
            total = total + v
        return total

    def subs(self, mapping: Mapping[str, object]) -> "RationalFunction":
        """Substitute RationalFunctions (or rationals) for symbols."""
        out = RationalFunction.constant(0)
        # cache powers per symbol to avoid repeated exponentiation
        pows: dict[tuple[int, int], RationalFunction] = {}

        def power(i: int, x: int) -> RationalFunction:
            key = (i, x)
            if key not in pows:
                name = self.symbols[i]
                base = mapping.get(name)
                if base is None:
                    base = RationalFunction.symbol(name)
                elif is_rational(base):
                    base = RationalFunction.constant(base)
                pows[key] = base**x
            return pows[key]

        for e, co in self.terms.items():
            term = RationalFunction.constant(co)
            for i, x in enumerate(e):
                if x:
                    term = term * power(i, x)
            out = out + term
        return out

    # -- presentation ----------------------------------------------------------

    def __str__(self):
        if not self.terms:
            return "0"
        bits = []
        for e in sorted(self.terms, reverse=True):
            co = self.terms[e]
            mono = "*".join(
                f"{s}^{x}" if x > 1 else s
                for s, x in zip(self.symbols, e)
                if x
            )
            if mono:
                if co == 1:
                    bits.append(mono)
                elif co == -1:
                    bits.append(f"-{mono}")
                else:
                    bits.append(f"{co}*{mono}")
            else:
                bits.append(str(co))
        out = " + ".join(bits).replace("+ -", "- ")
        return out

    def __repr__(self):
        return f"Poly({self})"


# ---------------------------------------------------------------------------
# polynomial gcd (primitive PRS) and exact division
# ---------------------------------------------------------------------------


def _content_int(p: Poly):
    """Positive rational c so that p/c has coprime integer coefficients."""
    if p.is_zero():
        return QONE
    den_lcm = 1
    num_gcd = 0
    for co in p.terms.values():
        den_lcm = _int_lcm(den_lcm, int(co.denominator))
        num_gcd = _int_gcd(num_gcd, abs(int(co.numerator)))
    return Q(num_gcd, den_lcm)


def poly_normalize(p: Poly) -> Poly:
    """Integer-primitive with positive lex-leading coefficient."""
    if p.is_zero():
        return p
    c = _content_int(p)
    _, lead = p.lex_leading()
    if lead < 0:
        c = -c
    if c == 1:
        return p
    return Poly._mk(p.symbols, {e: co / c for e, co in p.terms.items()})


def poly_gcd(a: Poly, b: Poly) -> Poly:
    """gcd in Q[symbols], normalized integer-primitive, positive leading."""
    if a.is_zero():
        return poly_normalize(b)
    if b.is_zero():
        return poly_normalize(a)
    a2, b2 = a._aligned(b)
    if a2.is_constant() or b2.is_constant():
        return Poly.constant(1, a2.symbols)

    # split off the common monomial factor first; it is cheap and our
    # denominators are full of pure powers like b^4 (1-b^2)^2
    n = len(a2.symbols)
    amin = [min(e[i] for e in a2.terms) for i in range(n)]
    bmin = [min(e[i] for e in b2.terms) for i in range(n)]
    common = tuple(min(x, y) for x, y in zip(amin, bmin))
    if any(common):
        sa = Poly._mk(a2.symbols, {tuple(e[i] - amin[i] for i in range(n)): c for e, c in a2.terms.items()})
        sb = Poly._mk(a2.symbols, {tuple(e[i] - bmin[i] for i in range(n)): c for e, c in b2.terms.items()})
        mono = Poly._mk(a2.symbols, {common: QONE})
        return poly_normalize(mono * poly_gcd(sa, sb))

    # the residual gcd goes to sympy's sparse rings; a hand-rolled
    # subresultant chain loses badly on bivariate inputs past degree ~8
    from sympy.polys.domains import QQ

    ring = QQ.poly_ring(*a2.symbols).ring

    def enc(p):
        return ring.from_dict(
            {e: QQ(int(c.numerator), int(c.denominator)) for e, c in p.terms.items()}
        )

    g = enc(a2).gcd(enc(b2))
    out = Poly._mk(
        a2.symbols,
        {tuple(e): Q(int(c.numerator), int(c.denominator)) for e, c in g.terms()},
    )
    return poly_normalize(out)


def poly_divexact(a: Poly, b: Poly) -> Poly:
    """Exact division a/b, raising ValueError if b does not divide a."""
    if b.is_zero():
        raise ZeroDivisionError("polynomial division by zero")
    if a.is_zero():
        return Poly(a.symbols, {})
    a2, b2 = a._aligned(b)
    if b2.is_constant():
        inv = QONE / b2.as_constant()
        return Poly._mk(a2.symbols, _t_scale(a2.terms, inv))
    eb, cb = b2.lex_leading()
    rem = dict(a2.terms)
    out: dict = {}
    while rem:
        ea = max(rem)
        ca = rem[ea]
        eq = tuple(x - y for x, y in zip(ea, eb))
        if any(x < 0 for x in eq):
            raise ValueError("not an exact polynomial division")
        cq = ca / cb
        out[eq] = out.get(eq, QZERO) + cq
        # rem -= cq * x^eq * b
        for e2, c2 in b2.terms.items():
            e = tuple(x + y for x, y in zip(eq, e2))
            s = rem.get(e, QZERO) - cq * c2
            if s:
                rem[e] = s
            else:
                rem.pop(e, None)
    return Poly._mk(a2.symbols, out)


# ---------------------------------------------------------------------------
# rational functions
# ---------------------------------------------------------------------------


class RationalFunction:
    """Quotient of Polys in canonical form; == is mathematical equality."""

    __slots__ = ("symbols", "num", "den", "_hash")

    def __init__(self, num: Poly, den: Poly | None = None):
        if den is None:
            den = Poly.constant(1, num.symbols)
        if den.is_zero():
            raise ZeroDivisionError("rational function with zero denominator")
        num, den = num._aligned(den)
        if not num.is_zero():
            g = poly_gcd(num, den)
            if not (g.is_constant() and g.as_constant() == 1):
                num = poly_divexact(num, g)
                den = poly_divexact(den, g)
        self._install(num, den)

    def _install(self, num: Poly, den: Poly) -> None:
        # num and den aligned and already coprime
        if num.is_zero():
            self.symbols = ()
            self.num = Poly((), {})
            self.den = Poly.constant(1)
            self._hash = None
            return
        # monic denominator fixes the remaining unit
        _, lead = den.lex_leading()
        if lead != 1:
            inv = QONE / lead
            num = num * inv
            den = den * inv
        # prune unused symbols for a construction-independent form
        used = sorted(set(num.used_vars()) | set(den.used_vars()))
        if len(used) != len(num.symbols):
            keep = tuple(num.symbols[i] for i in used)
            num = _project(num, keep)
            den = _project(den, keep)
        self.symbols = num.symbols
        self.num = num
        self.den = den
        self._hash = None

    @classmethod
    def _coprime(cls, num: Poly, den: Poly) -> "RationalFunction":
        """Build from a fraction known to be in lowest terms; skips the gcd.

        Callers take responsibility for coprimality; a violated precondition
        silently breaks canonical equality, so keep use sites few.
        """
        if den.is_zero():
            raise ZeroDivisionError("rational function with zero denominator")
        self = object.__new__(cls)
        self._install(*num._aligned(den))
        return self

    # -- constructors --------------------------------------------------------

    @staticmethod
    def constant(value) -> "RationalFunction":
        return RationalFunction(Poly.constant(value))

    @staticmethod
    def symbol(name: str) -> "RationalFunction":
        return RationalFunction(Poly.variable(name))

    @staticmethod
    def fraction(num, den) -> "RationalFunction":
        def lift(x):
            if isinstance(x, RationalFunction):
                return x
            if isinstance(x, Poly):
                return RationalFunction(x)
            return RationalFunction.constant(x)

        return lift(num) / lift(den)

    # -- queries ---------------------------------------------------------------

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def is_constant(self) -> bool:
        return not self.symbols

    def as_constant(self):
        if not self.is_constant():
            raise ValueError(f"not a constant: {self}")
        if self.num.is_zero():
            return Q(0)
        return self.num.as_constant() / self.den.as_constant()

    @property
    def active_symbols(self) -> tuple[str, ...]:
        return self.symbols

    # -- arithmetic --------------------------------------------------------------

    def _coerce(self, other):
        if isinstance(other, RationalFunction):
            return other
        if is_rational(other):
            return RationalFunction.constant(other)
        if isinstance(other, Poly):
            return RationalFunction(other)
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        # a/b + c/d = (a d' + c b') / (g b' d') with g = gcd(b, d)
        g = poly_gcd(self.den, o.den)
        if g.is_constant():
            num = self.num * o.den + o.num * self.den
            den = self.den * o.den
        else:
            bp = poly_divexact(self.den, g)
            dp = poly_divexact(o.den, g)
            num = self.num * dp + o.num * bp
            den = g * bp * dp
        return RationalFunction(num, den)

    __radd__ = __add__

    def __neg__(self):
        out = RationalFunction.__new__(RationalFunction)
        out.symbols = self.symbols
        out.num = -self.num
        out.den = self.den
        out._hash = None
        return out

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        if self.is_zero() or o.is_zero():
            return RationalFunction.constant(0)
        # cross-reduce before multiplying to keep things small
        g1 = poly_gcd(self.num, o.den)
        g2 = poly_gcd(o.num, self.den)
        n1 = self.num if g1.is_constant() else poly_divexact(self.num, g1)
        d2 = o.den if g1.is_constant() else poly_divexact(o.den, g1)
        n2 = o.num if g2.is_constant() else poly_divexact(o.num, g2)
        d1 = self.den if g2.is_constant() else poly_divexact(self.den, g2)
        return RationalFunction(n1 * n2, d1 * d2)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        if o.is_zero():
            raise ZeroDivisionError("division by zero rational function")
        return self * RationalFunction(o.den, o.num)

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o / self

    def __pow__(self, n: int):
        if n == 0:
            return RationalFunction.constant(1)
        if n < 0:
            return (RationalFunction.constant(1) / self) ** (-n)
        # reduced fractions stay reduced under powers, skip the gcd
        out = RationalFunction.__new__(RationalFunction)
        out.symbols = self.symbols
        out.num = self.num**n
        out.den = self.den**n
        out._hash = None
        return out

    def __eq__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return (
            self.symbols == o.symbols
            and self.num.terms == o.num.terms
            and self.den.terms == o.den.terms
        )

    def __bool__(self):
        return not self.is_zero()

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(
                (
                    self.symbols,
                    frozenset(self.num.terms.items()),
                    frozenset(self.den.terms.items()),
                )
            )
        return self._hash

    # -- evaluation / substitution ------------------------------------------------

    def eval(self, point: Mapping[str, object]):
        den = self.den.eval(point)
        if not den:
            raise ZeroDivisionError(f"denominator vanishes at {point}")
        return self.num.eval(point) / den

    def subs(self, mapping: Mapping[str, object]) -> "RationalFunction":
        num = self.num.subs(mapping)
        den = self.den.subs(mapping)
        return num / den

    def subs_square(self, name: str, value) -> "RationalFunction":
        """Substitute name^2 -> value; requires all exponents of name even.

        Used for specializations like b^2 = -2/3 where b itself would be
        irrational but every coefficient is even in b.
        """
        if name not in self.symbols:
            return self
        i = self.symbols.index(name)
        for p in (self.num, self.den):
            for e in p.terms:
                if e[i] % 2:
                    raise ValueError(f"odd power of {name} in {self}")
        val = value if isinstance(value, RationalFunction) else RationalFunction.constant(value)

        def half(p: Poly) -> RationalFunction:
            out = RationalFunction.constant(0)
            for e, co in p.terms.items():
                rest = Poly(p.symbols, {e[:i] + (0,) + e[i + 1 :]: co})
                out = out + RationalFunction(rest) * val ** (e[i] // 2)
            return out

        return half(self.num) / half(self.den)

    # -- presentation -----------------------------------------------------------

    def __str__(self):
        if self.den == 1:
            return str(self.num)
        ns = str(self.num)
        if len(self.num.terms) > 1:
            ns = f"({ns})"
        return f"{ns}/({self.den})"

    def __repr__(self):
        return f"RF({self})"


def _project(p: Poly, keep: tuple[str, ...]) -> Poly:
    """Drop symbols not in keep (they must be unused)."""
    idx = [p.symbols.index(s) for s in keep]
    out = Poly.__new__(Poly)
    out.symbols = keep
    out.terms = {tuple(e[i] for i in idx): co for e, co in p.terms.items()}
    out._hash = None
    return out


RF = RationalFunction


# ---------------------------------------------------------------------------
# identity checking policy
# ---------------------------------------------------------------------------


class IdentityReport(NamedTuple):
    ok: bool
    mode: str
    points: int
    witness: dict | None


def random_point(symbols: Iterable[str], rng: random.Random) -> dict:
    """Random rational point of small height, for Schwartz-Zippel checks."""
    return {s: Q(rng.randint(-99, 99), rng.randint(1, 13)) for s in symbols}


def rf_identity_check(
    lhs: RationalFunction,
    rhs: RationalFunction,
    mode: str = "auto",
    seed: int = 0,
    points: int = 3,
) -> IdentityReport:
    """Decide lhs == rhs, symbolically or by sampling.

    Canonical forms make the symbolic branch a structural comparison. The
    sampled branch evaluates both sides at `points` random rational points
    (resampling when a denominator vanishes) and is what the verification
    policy prescribes once three or more symbols are active.
    """
    syms = sorted(set(lhs.active_symbols) | set(rhs.active_symbols))
    if mode == "auto":
        mode = "symbolic" if len(syms) <= 2 else "sampled"
    if mode == "symbolic":
        return IdentityReport(lhs == rhs, "symbolic", 0, None)
    if mode != "sampled":
        raise ValueError(f"unknown mode {mode!r}")
    if points < 3:
        raise ValueError("sampled identity checks need at least 3 points")
    rng = random.Random(seed)
    for _ in range(points):
        for _attempt in range(64):
            pt = random_point(syms, rng)
            try:
                lv = lhs.eval(pt)
                rv = rhs.eval(pt)
            except ZeroDivisionError:
                continue
            break
        else:
            raise RuntimeError("could not find a pole-free sample point")
        if lv != rv:
            return IdentityReport(False, "sampled", points, pt)
    return IdentityReport(True, "sampled", points, None)

# ---------------------------------------------------------------------------
# exact rectangular linear solves
# ---------------------------------------------------------------------------


class LinearSolveError(ValueError):
    """rows * x = rhs has no unique solution; kind says which way it failed."""

    def __init__(self, kind: str, message: str):
        super().__init__(message)
        self.kind = kind  # "underdetermined" | "inconsistent"


def _field_for(entries):
    """Exact solve domain covering the symbols active in the entries."""
    from sympy.polys.domains import QQ

    names = sorted({s for e in entries for s in e.active_symbols})
    if not names:
        return QQ, ()
    return QQ.frac_field(*names), tuple(names)


def _poly_to_ring(poly, ring, names):
    from sympy.polys.domains import QQ

    if not poly.terms:
        return ring.zero
    pos = [names.index(s) for s in poly.symbols]
    data = {}
    for e, co in poly.terms.items():
        key = [0] * len(names)
        for i, x in enumerate(e):
            key[pos[i]] = x
        data[tuple(key)] = QQ(int(co.numerator), int(co.denominator))
    return ring.from_dict(data)


def _rf_to_domain(rf, dom, names):
    from sympy.polys.domains import QQ

    if not names:
        v = rf.as_constant()
        return QQ(int(v.numerator), int(v.denominator))
    field = dom.field
    num = _poly_to_ring(rf.num, field.ring, names)
    den = _poly_to_ring(rf.den, field.ring, names)
    return field.new(num, den)


def _domain_to_rf(el, names):
    if not names:
        return RF.constant(Q(int(el.numerator), int(el.denominator)))

    def conv(polyelem):
        terms = {
            tuple(e): Q(int(co.numerator), int(co.denominator))
            for e, co in polyelem.terms()
        }
        return Poly(names, terms)

    # sympy fraction-field elements are kept in lowest terms, so the gcd
    # in the ordinary constructor would only re-verify coprimality
    return RF._coprime(conv(el.numer), conv(el.denom))


def solve_unique(rows, rhs, ncols: int) -> list:
    """Unique exact solution of rows * x = rhs, else LinearSolveError.

    Entries are RationalFunctions (constants included); the elimination is
    delegated to sympy's DomainMatrix over the fraction field of whatever
    symbols appear, since naive elimination over the package's own rational
    functions churns on gcd growth once systems get moderately large.
    """
    from sympy.polys.matrices import DomainMatrix

    flat = [e for row in rows for e in row] + list(rhs)
    dom, names = _field_for(flat)
    aug = [
        [_rf_to_domain(e, dom, names) for e in row] + [_rf_to_domain(b, dom, names)]
        for row, b in zip(rows, rhs)
    ]
    dm = DomainMatrix(aug, (len(aug), ncols + 1), dom)
    rref, den, pivots = dm.rref_den(method="auto")
    if ncols in pivots:
        raise LinearSolveError("inconsistent", "linear system is inconsistent")
    if len(pivots) < ncols:
        raise LinearSolveError(
            "underdetermined",
            f"only {len(pivots)} of {ncols} unknowns are pinned",
        )
    data = rref.to_list()
    sol = [None] * ncols
    for i, p in enumerate(pivots):
        sol[p] = _domain_to_rf(data[i][ncols] / den, names)
    return sol
