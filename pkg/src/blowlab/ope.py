"""Normal-ordering calculator for the half-lattice boson, with an optional
abstract Virasoro current riding along as a second tensor factor.

States double as operators through the state-field correspondence.  A field
is a finite combination of monomials

    a_{-n_1} ... a_{-n_r} . L_{-m_1} ... L_{-m_s} . v_lambda

with oscillator parts n_i >= 1, abstract parts m_j >= 2, and the charge
lambda = s/sqrt(2) stored as the plain integer s.  Coefficients are exact
elements of Q(symbols)[sqrt(2)], kept as (rational, sqrt(2)) part pairs, so
constants like 1/sqrt(2) or sqrt(2)*eps never touch floating point.

Products come from the usual n-th-product machinery: oscillator and
abstract heads peel off through the iterate formula, and the base case is a
charged exponential acting through its annihilation tail, the z^{s*t/2}
locality power, the charge shift, and the creation tail.  Fractional
locality (odd s*t) is rejected up front.  The abstract current commutes
with the boson and pairs with itself at central charge 1 + 6(b + 1/b)^2.

Everything is immutable and the computations are pure; catalogs are built
once per parameter choice and shared read-only.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product as _iproduct
from math import comb

from ._scalar import Q, is_rational
from .rational import RF
from .verdict import Verdict

__all__ = [
    "FieldExpr",
    "ModuleVector",
    "OPEResult",
    "Root2",
    "StressTensorCatalog",
    "VirasoroResult",
    "ansatz_verify",
    "commute_test",
    "fock_mode_action",
    "identity_tests",
    "l0_spectrum",
    "ope_singular",
    "primary_test",
    "virasoro_test",
]


_RF_ZERO = RF.constant(0)
_RF_ONE = RF.constant(1)


class Root2:
    """Exact scalar x + y*sqrt(2) with RationalFunction parts x and y."""

    __slots__ = ("rat", "irr")

    def __init__(self, rat=0, irr=0):
        self.rat = rat if isinstance(rat, RF) else RF.constant(rat)
        self.irr = irr if isinstance(irr, RF) else RF.constant(irr)

    def is_zero(self) -> bool:
        return self.rat == _RF_ZERO and self.irr == _RF_ZERO

    def __bool__(self) -> bool:
        return not self.is_zero()

    def __eq__(self, other) -> bool:
        other = _scalar(other)
        if other is NotImplemented:
            return NotImplemented
        return self.rat == other.rat and self.irr == other.irr

    def __hash__(self):
        return hash((self.rat, self.irr))

    def __neg__(self) -> "Root2":
        return Root2(-self.rat, -self.irr)

    def __add__(self, other) -> "Root2":
        other = _scalar(other)
        if other is NotImplemented:
            return NotImplemented
        return Root2(self.rat + other.rat, self.irr + other.irr)

    __radd__ = __add__

    def __sub__(self, other) -> "Root2":
        other = _scalar(other)
        if other is NotImplemented:
            return NotImplemented
        return Root2(self.rat - other.rat, self.irr - other.irr)

    def __rsub__(self, other) -> "Root2":
        other = _scalar(other)
        if other is NotImplemented:
            return NotImplemented
        return other - self

    def __mul__(self, other) -> "Root2":
        other = _scalar(other)
        if other is NotImplemented:
            return NotImplemented
        return Root2(
            self.rat * other.rat + 2 * self.irr * other.irr,
            self.rat * other.irr + self.irr * other.rat,
        )

    __rmul__ = __mul__

    def inverse(self) -> "Root2":
        norm = self.rat * self.rat - 2 * self.irr * self.irr
        if norm == _RF_ZERO:
            raise ZeroDivisionError("division by zero in Q(...)[sqrt(2)]")
        return Root2(self.rat / norm, -self.irr / norm)

    def __truediv__(self, other) -> "Root2":
        other = _scalar(other)
        if other is NotImplemented:
            return NotImplemented
        return self * other.inverse()

    def __rtruediv__(self, other) -> "Root2":
        other = _scalar(other)
        if other is NotImplemented:
            return NotImplemented
        return other * self.inverse()

    def __pow__(self, n: int) -> "Root2":
        if not (isinstance(n, int) and n >= 0):
            raise ValueError(f"exponent must be a nonnegative integer, got {n}")
        out = Root2(1)
        for _ in range(n):
            out = out * self
        return out

    def map(self, fn) -> "Root2":
        """Apply an RF -> RF function to both parts."""
        return Root2(fn(self.rat), fn(self.irr))

    def __repr__(self) -> str:
        return f"Root2({self.rat!r}, {self.irr!r})"


def _scalar(x):
    if isinstance(x, Root2):
        return x
    if isinstance(x, (RF, int)) or is_rational(x):
        return Root2(x)
    if isinstance(x, Fraction):
        return Root2(Q(x.numerator, x.denominator))
    return NotImplemented


_ZERO = Root2(0)
_ONE = Root2(1)
SQRT2 = Root2(0, 1)


# --- monomials -------------------------------------------------------------
#
# A monomial is the hashable triple (osc, vir, s): descending tuples of
# oscillator and abstract parts, plus the integer charge.

_VACUUM_MONO = ((), (), 0)


def _canon_mono(mono, *, min_vir: int):
    osc, vir, s = mono
    osc = tuple(sorted((int(n) for n in osc), reverse=True))
    vir = tuple(sorted((int(m) for m in vir), reverse=True))
    if osc and osc[-1] < 1:
        raise ValueError(f"oscillator parts must be >= 1, got {osc}")
    if vir and vir[-1] < min_vir:
        raise ValueError(f"abstract parts must be >= {min_vir}, got {vir}")
    return (osc, vir, int(s))


def _free_weight(mono):
    osc, vir, s = mono
    return sum(osc) + sum(vir) + Q(s * s, 4)


def _regraded_weight(mono):
    """Weight after the lattice regrading that shifts by half the charge."""
    osc, vir, s = mono
    return sum(osc) + sum(vir) + Q(s * s - 2 * s, 4)


def _mono_key(mono):
    return (mono[2], mono[0], mono[1])


def _merge(acc: dict, mono, coeff) -> None:
    cur = acc.get(mono)
    cur = coeff if cur is None else cur + coeff
    if cur.is_zero():
        acc.pop(mono, None)
    else:
        acc[mono] = cur


class _Terms:
    """Shared immutable-dict plumbing for fields and module vectors."""

    __slots__ = ("_terms",)
    _MIN_VIR = 2

    def __init__(self, terms=None):
        merged: dict = {}
        items = terms.items() if isinstance(terms, dict) else (terms or ())
        for mono, coeff in items:
            coeff = _scalar(coeff)
            if coeff is NotImplemented:
                raise TypeError(f"bad coefficient {mono!r}")
            _merge(merged, _canon_mono(mono, min_vir=self._MIN_VIR), coeff)
        self._terms = merged

    def terms(self) -> tuple:
        return tuple(sorted(self._terms.items(), key=lambda kv: _mono_key(kv[0])))

    def coefficient(self, mono) -> Root2:
        return self._terms.get(_canon_mono(mono, min_vir=self._MIN_VIR), _ZERO)

    def is_zero(self) -> bool:
        return not self._terms

    def charges(self) -> set:
        return {s for (_, _, s) in self._terms}

    def _same_terms(self, other) -> bool:
        if set(self._terms) != set(other._terms):
            return False
        return all(c == other._terms[m] for m, c in self._terms.items())


class FieldExpr(_Terms):
    """Immutable field of the half-lattice algebra, as a state.

    Abstract parts require m_j >= 2 here: the current itself is the m = 2
    head and derivatives push the head deeper, while an m = 1 head would
    be the translate of the abstract vacuum, which vanishes.
    """

    __slots__ = ()

    @classmethod
    def term(cls, coeff=1, *, osc=(), vir=(), s=0) -> "FieldExpr":
        return cls((((tuple(osc), tuple(vir), s), coeff),))

    @classmethod
    def zero(cls) -> "FieldExpr":
        return cls()

    def __add__(self, other) -> "FieldExpr":
        if not isinstance(other, FieldExpr):
            return NotImplemented
        merged = dict(self._terms)
        for mono, coeff in other._terms.items():
            _merge(merged, mono, coeff)
        out = FieldExpr()
        out._terms = merged
        return out

    def __sub__(self, other) -> "FieldExpr":
        if not isinstance(other, FieldExpr):
            return NotImplemented
        return self + other.scaled(-1)

    def __neg__(self) -> "FieldExpr":
        return self.scaled(-1)

    def scaled(self, coeff) -> "FieldExpr":
        coeff = _scalar(coeff)
        if coeff is NotImplemented:
            raise TypeError("scale factor must be scalar")
        if coeff.is_zero():
            return FieldExpr()
        out = FieldExpr()
        out._terms = {m: c * coeff for m, c in self._terms.items()}
        return out

    def __eq__(self, other) -> bool:
        if not isinstance(other, FieldExpr):
            return NotImplemented
        return self._same_terms(other)

    def __hash__(self):
        return hash(self.terms())

    def map_scalars(self, fn) -> "FieldExpr":
        """New field with fn applied to every coefficient (zeros pruned)."""
        out: dict = {}
        for mono, coeff in self._terms.items():
            _merge(out, mono, fn(coeff))
        fe = FieldExpr()
        fe._terms = out
        return fe

    def subs(self, assignment: dict) -> "FieldExpr":
        return self.map_scalars(lambda c: c.map(lambda rf: rf.subs(assignment)))

    def subs_square(self, name: str, value) -> "FieldExpr":
        return self.map_scalars(lambda c: c.map(lambda rf: rf.subs_square(name, value)))

    def translated(self) -> "FieldExpr":
        """The derivative field: translation applied to the state."""
        out: dict = {}
        for mono, coeff in self._terms.items():
            for m2, c2 in _translate_mono(mono):
                _merge(out, m2, coeff * c2)
        fe = FieldExpr()
        fe._terms = out
        return fe

    def pretty(self) -> str:
        return _pretty_terms(self.terms())

    def __repr__(self) -> str:
        return f"<FieldExpr {self.pretty()}>" if self._terms else "<FieldExpr 0>"


def _translate_mono(mono):
    osc, vir, s = mono
    out = []
    for i, n in enumerate(osc):
        bumped = tuple(sorted(osc[:i] + (n + 1,) + osc[i + 1 :], reverse=True))
        out.append(((bumped, vir, s), Root2(n)))
    # bumping an inner abstract part must commute back into canonical order,
    # which spawns lower words; _translate_vir carries those corrections
    for v2, c2 in _translate_vir(vir):
        out.append(((osc, v2, s), Root2(c2)))
    if s:
        grown = tuple(sorted(osc + (1,), reverse=True))
        out.append(((grown, vir, s), Root2(0, Q(s, 2))))
    return out


def _translate_vir(vir: tuple) -> tuple:
    """Translation of an abstract word: (m-1) L_{-m-1} on the head plus the
    translate of the tail re-prepended through the commutation rules."""
    if not vir:
        return ()
    m, rest = vir[0], vir[1:]
    out: dict = {}
    _rf_merge(out, (m + 1,) + rest, RF.constant(m - 1))
    for word, cw in _translate_vir(rest):
        for v3, c3 in _VACUUM_ENGINE._abstract_create(m, word):
            _rf_merge(out, v3, cw * c3)
    return tuple(out.items())


class ModuleVector(_Terms):
    """Element of (charged Fock sum) x (highest-weight abstract module).

    The abstract factor is a Verma-type module when (delta, central) are
    set, so parts m_j >= 1 are allowed; with delta None it is the vacuum
    module and the same m_j >= 2 rule as FieldExpr applies.
    """

    __slots__ = ("delta", "central", "_check_min")
    _MIN_VIR = 1

    def __init__(self, terms=None, *, delta=None, central=None):
        self.delta = None if delta is None else _as_rf(delta)
        self.central = _CENTRAL_B if central is None else _as_rf(central)
        # vacuum-module states obey the same m >= 2 rule as fields
        self._check_min = 2 if self.delta is None else 1
        merged: dict = {}
        items = terms.items() if isinstance(terms, dict) else (terms or ())
        for mono, coeff in items:
            coeff = _scalar(coeff)
            if coeff is NotImplemented:
                raise TypeError(f"bad coefficient {mono!r}")
            _merge(merged, _canon_mono(mono, min_vir=self._check_min), coeff)
        self._terms = merged

    @classmethod
    def term(cls, coeff=1, *, osc=(), vir=(), s=0, delta=None, central=None):
        return cls(
            (((tuple(osc), tuple(vir), s), coeff),), delta=delta, central=central
        )

    def _compatible(self, other) -> bool:
        return (
            isinstance(other, ModuleVector)
            and ((self.delta is None) == (other.delta is None))
            and (self.delta is None or self.delta == other.delta)
            and self.central == other.central
        )

    def __add__(self, other) -> "ModuleVector":
        if not self._compatible(other):
            return NotImplemented
        merged = dict(self._terms)
        for mono, coeff in other._terms.items():
            _merge(merged, mono, coeff)
        return self._clone(merged)

    def __sub__(self, other) -> "ModuleVector":
        if not self._compatible(other):
            return NotImplemented
        return self + other.scaled(-1)

    def scaled(self, coeff) -> "ModuleVector":
        coeff = _scalar(coeff)
        return self._clone(
            {} if coeff.is_zero() else {m: c * coeff for m, c in self._terms.items()}
        )

    def _clone(self, terms: dict) -> "ModuleVector":
        out = ModuleVector(delta=self.delta, central=self.central)
        out._terms = terms
        return out

    def __eq__(self, other) -> bool:
        if not isinstance(other, ModuleVector):
            return NotImplemented
        return self._compatible(other) and self._same_terms(other)

    def __hash__(self):
        return hash((self.delta, self.central, self.terms()))

    def __repr__(self) -> str:
        body = _pretty_terms(self.terms()) if self._terms else "0"
        return f"<ModuleVector {body}>"


def _as_rf(x) -> RF:
    return x if isinstance(x, RF) else RF.constant(x)


_B = RF.symbol("b")
_CENTRAL_B = 1 + 6 * (_B + 1 / _B) ** 2


# --- mode actions on states ------------------------------------------------


def _heis_annihilations(mono):
    """All (i, mono', coeff) with i >= 0 and a_i mono = coeff * mono' != 0."""
    osc, vir, s = mono
    out = []
    if s:
        out.append((0, mono, Root2(0, Q(s, 2))))
    for p in sorted(set(osc)):
        mult = osc.count(p)
        removed = list(osc)
        removed.remove(p)
        out.append((p, (tuple(removed), vir, s), Root2(mult * p)))
    return out


def _osc_created(mono, part: int):
    osc, vir, s = mono
    return (tuple(sorted(osc + (part,), reverse=True)), vir, s)


class _Engine:
    """Product recursion bound to one abstract-sector context.

    The vacuum context (delta None) is what operator products use; module
    contexts carry the highest weight of the abstract tensor factor.  Both
    share the central charge of the abstract current.  Caches are local to
    the context, so symbolic and numeric runs never mix entries.
    """

    def __init__(self, delta=None, central=None):
        self.delta = None if delta is None else _as_rf(delta)
        self.central = _CENTRAL_B if central is None else _as_rf(central)
        self._abstract: dict = {}
        self._nth: dict = {}

    # L_j on the abstract factor of one monomial's vir tuple.
    def abstract_apply(self, j: int, vir: tuple) -> tuple:
        key = (j, vir)
        hit = self._abstract.get(key)
        if hit is not None:
            return hit
        out: dict = {}
        if not vir:
            if self.delta is None:
                if j <= -2:
                    out[(-j,)] = _RF_ONE
            elif j == 0:
                out[()] = self.delta
            elif j <= -1:
                out[(-j,)] = _RF_ONE
        else:
            head, rest = vir[0], vir[1:]
            if j <= -head:
                out[(-j,) + vir] = _RF_ONE
            else:
                for v2, c2 in self.abstract_apply(j, rest):
                    for v3, c3 in self._abstract_create(head, v2):
                        _rf_merge(out, v3, c2 * c3)
                for v2, c2 in self.abstract_apply(j - head, rest):
                    _rf_merge(out, v2, (j + head) * c2)
                if j == head:
                    _rf_merge(out, rest, self.central * Q(j**3 - j, 12))
        result = tuple(out.items())
        self._abstract[key] = result
        return result

    def _abstract_create(self, m: int, vir: tuple) -> tuple:
        if not vir or m >= vir[0]:
            return (((m,) + vir, _RF_ONE),)
        return self.abstract_apply(-m, vir)

    def _lower_abstract(self, mono):
        """All (i, mono', coeff) with i >= 0 and L_{i-1} mono != 0 pieces."""
        osc, vir, s = mono
        out = []
        top = sum(vir) + (0 if self.delta is None else 1)
        for i in range(0, top + 2):
            for v2, c2 in self.abstract_apply(i - 1, vir):
                out.append((i, (osc, v2, s), Root2(c2)))
        return out

    def nth(self, amono, n: int, bmono) -> dict:
        key = (amono, n, bmono)
        hit = self._nth.get(key)
        if hit is not None:
            return hit
        osc, vir, s = amono
        acc: dict = {}
        if osc:
            m, cmono = osc[0], (osc[1:], vir, s)
            top = _top_index(cmono, bmono)
            for i in range(0, top - n + 1):
                sub = self.nth(cmono, n + i, bmono)
                if not sub:
                    continue
                w = comb(m + i - 1, i)
                for mono2, c2 in sub.items():
                    _merge(acc, _osc_created(mono2, m + i), c2 * w)
            sign = 1 if m % 2 else -1
            for i, bmono2, cb in _heis_annihilations(bmono):
                sub = self.nth(cmono, n - m - i, bmono2)
                w = sign * comb(m + i - 1, i)
                for mono2, c2 in sub.items():
                    _merge(acc, mono2, c2 * cb * w)
        elif vir:
            m, cmono = vir[0], (osc, vir[1:], s)
            top = _top_index(cmono, bmono)
            for i in range(0, top - n + 1):
                sub = self.nth(cmono, n + i, bmono)
                if not sub:
                    continue
                w = comb(m - 2 + i, i)
                for mono2, c2 in sub.items():
                    for v3, c3 in self._abstract_create(m + i, mono2[1]):
                        _merge(acc, (mono2[0], v3, mono2[2]), c2 * c3 * w)
            sign = 1 if m % 2 == 0 else -1
            for i, bmono2, cb in self._lower_abstract(bmono):
                sub = self.nth(cmono, n - m + 1 - i, bmono2)
                w = sign * comb(m - 2 + i, i)
                for mono2, c2 in sub.items():
                    _merge(acc, mono2, c2 * cb * w)
        elif s == 0:
            if n == -1:
                acc[bmono] = _ONE
        else:
            acc = _vertex_products(s, n, bmono)
        self._nth[key] = acc
        return acc


def _rf_merge(acc: dict, key, val) -> None:
    cur = acc.get(key, _RF_ZERO) + val
    if cur == _RF_ZERO:
        acc.pop(key, None)
    else:
        acc[key] = cur


def _floor_q(x) -> int:
    num, den = x.numerator, x.denominator
    return int(num // den)


def _top_index(amono, bmono) -> int:
    """Largest n with a possibly nonzero n-th product, from weight counting."""
    s = amono[2] + bmono[2]
    bound = _free_weight(amono) + _free_weight(bmono) - 1 - Q(s * s, 4)
    return _floor_q(bound)


def _vertex_products(s: int, n: int, bmono) -> dict:
    """n-th product of the pure charge-s exponential against one monomial."""
    osc, vir, t = bmono
    if (s * t) % 2:
        raise ValueError(
            f"charges {s}/sqrt(2) and {t}/sqrt(2) are mutually nonlocal: "
            "the pair would need half-integer powers of (z - w)"
        )
    lam = Root2(0, Q(s, 2))
    target = -n - 1 - s * t // 2
    acc: dict = {}
    distinct = sorted(set(osc))
    counts = [osc.count(p) for p in distinct]
    for picks in _iproduct(*(range(c + 1) for c in counts)):
        removed = sum(p * k for p, k in zip(distinct, picks))
        deficit = target + removed
        if deficit < 0:
            continue
        factor = _ONE
        for p, k, mult in zip(distinct, picks, counts):
            if k:
                factor = factor * (comb(mult, k) * ((-lam) ** k))
        survivors = []
        for p, k, mult in zip(distinct, picks, counts):
            survivors.extend([p] * (mult - k))
        for padd, cadd in _creation_tail(s, deficit):
            mono = (
                tuple(sorted(survivors + list(padd), reverse=True)),
                vir,
                t + s,
            )
            _merge(acc, mono, factor * cadd)
    return acc


def _creation_tail(s: int, d: int) -> tuple:
    """Degree-d creation terms of the charged exponential: partitions of d
    weighted by lambda^(length) / (prod parts * prod multiplicities!)."""
    lam = Root2(0, Q(s, 2))
    out = []
    for part in _partitions_of(d):
        denom = 1
        for p in set(part):
            k = part.count(p)
            denom *= p**k
            for j in range(2, k + 1):
                denom *= j
        out.append((part, (lam ** len(part)) * Q(1, denom)))
    return tuple(out)


def _partitions_of(d: int, cap: int | None = None) -> list:
    if d == 0:
        return [()]
    cap = d if cap is None else min(cap, d)
    out = []
    for first in range(cap, 0, -1):
        for rest in _partitions_of(d - first, first):
            out.append((first,) + rest)
    return out


_VACUUM_ENGINE = _Engine()
_MODULE_ENGINES: dict = {}


def _engine_for(delta, central) -> _Engine:
    if delta is None and central == _CENTRAL_B:
        return _VACUUM_ENGINE
    key = (delta, central)
    eng = _MODULE_ENGINES.get(key)
    if eng is None:
        eng = _MODULE_ENGINES[key] = _Engine(delta, central)
    return eng


# --- operator products -----------------------------------------------------


class OPEResult:
    """Singular part of one radially ordered product.

    poles maps each pole order p >= 1 to the field multiplying (z-w)^{-p};
    locality_exponents records the charge-pair powers s*t/2 that entered.
    """

    __slots__ = ("poles", "locality_exponents")

    def __init__(self, poles: dict, locality_exponents=frozenset()):
        self.poles = {p: f for p, f in poles.items() if not f.is_zero()}
        self.locality_exponents = frozenset(locality_exponents)

    def field_at(self, pole: int) -> FieldExpr:
        return self.poles.get(pole, FieldExpr.zero())

    def max_pole(self) -> int:
        return max(self.poles, default=0)

    def is_empty(self) -> bool:
        return not self.poles

    def __eq__(self, other) -> bool:
        if not isinstance(other, OPEResult):
            return NotImplemented
        if set(self.poles) != set(other.poles):
            return False
        return all(f == other.poles[p] for p, f in self.poles.items())

    def __repr__(self) -> str:
        if not self.poles:
            return "<OPEResult regular>"
        inner = ", ".join(f"{p}: {f.pretty()}" for p, f in sorted(self.poles.items()))
        return f"<OPEResult {{{inner}}}>"


def ope_singular(left: FieldExpr, right: FieldExpr, max_pole: int | None = None) -> OPEResult:
    """Complete singular part of left(z) right(w), exactly.

    Raises ValueError when some charge pair has odd product s*t, since the
    expansion would then carry half-integer powers of (z - w).
    """
    if not isinstance(left, FieldExpr) or not isinstance(right, FieldExpr):
        raise TypeError("ope_singular expects two FieldExpr operands")
    exps = set()
    for sa in left.charges():
        for sb in right.charges():
            if (sa * sb) % 2:
                raise ValueError(
                    f"charges {sa}/sqrt(2) and {sb}/sqrt(2) are mutually "
                    "nonlocal: the pair would need half-integer powers of (z - w)"
                )
            exps.add(sa * sb // 2)
    cap = 0
    for amono, _ in left.terms():
        for bmono, _ in right.terms():
            cap = max(cap, _top_index(amono, bmono) + 1)
    if max_pole is not None:
        cap = min(cap, max_pole)
    eng = _VACUUM_ENGINE
    poles: dict = {}
    for p in range(1, cap + 1):
        acc: dict = {}
        for amono, ca in left.terms():
            for bmono, cb in right.terms():
                for mono, c in eng.nth(amono, p - 1, bmono).items():
                    _merge(acc, mono, c * ca * cb)
        if acc:
            fe = FieldExpr()
            fe._terms = acc
            poles[p] = fe
    return OPEResult(poles, exps)


def fock_mode_action(field: FieldExpr, mode, state: ModuleVector) -> ModuleVector:
    """One mode of the field applied to a module element, exactly.

    Modes are graded so that index m lowers the regraded weight by m: for a
    field of regraded weight w, index m picks the z^{-m-w} coefficient.
    The field must be homogeneous in that grading and m + w - 1 integral;
    charged sectors make half-integral indices legitimate.
    """
    if not isinstance(field, FieldExpr) or field.is_zero():
        raise ValueError("mode action needs a nonzero FieldExpr")
    if not isinstance(state, ModuleVector):
        raise TypeError("state must be a ModuleVector")
    weights = {_regraded_weight(m) for m, _ in field.terms()}
    if len(weights) != 1:
        raise ValueError(
            f"field mixes regraded weights {sorted(weights)}; modes are undefined"
        )
    (w,) = weights
    if isinstance(mode, Fraction):
        mode = Q(mode.numerator, mode.denominator)
    n_exact = mode + w - 1
    if n_exact.denominator != 1:
        raise ValueError(f"mode index {mode} is not graded integrally for weight {w}")
    n = int(n_exact)
    eng = _engine_for(state.delta, state.central)
    acc: dict = {}
    for amono, ca in field.terms():
        for bmono, cb in state._terms.items():
            for mono, c in eng.nth(amono, n, bmono).items():
                _merge(acc, mono, c * ca * cb)
    return state._clone(acc)


# --- Virasoro structure tests ----------------------------------------------


@dataclass(frozen=True)
class VirasoroResult:
    """Outcome of a self-OPE test: the central charge, or a witness."""

    ok: bool
    central_charge: RF | None = None
    witness: dict | None = None

    def to_json_dict(self) -> dict:
        return {
            "ok": self.ok,
            "central_charge": None
            if self.central_charge is None
            else str(self.central_charge),
            "witness": None if self.witness is None else dict(self.witness),
        }


def virasoro_test(field: FieldExpr) -> VirasoroResult:
    """Check the stress-tensor self-product pattern.

    Passing means poles {4: (c/2) 1, 2: 2 T, 1: dT} and nothing else; the
    reported central charge is twice the order-4 coefficient.  The zero
    field is rejected as degenerate.
    """
    if not isinstance(field, FieldExpr):
        raise TypeError("virasoro_test expects a FieldExpr")
    if field.is_zero():
        return VirasoroResult(False, witness={"pole": None, "reason": "zero field"})
    res = ope_singular(field, field)
    top = res.field_at(4)
    c_half = top.coefficient(_VACUUM_MONO)
    if top != FieldExpr.term(c_half):
        return VirasoroResult(
            False, witness={"pole": 4, "reason": "non-scalar order-4 field"}
        )
    if c_half.irr != _RF_ZERO:
        return VirasoroResult(
            False, witness={"pole": 4, "reason": "irrational central term"}
        )
    checks = (
        (3, FieldExpr.zero()),
        (2, field.scaled(2)),
        (1, field.translated()),
    )
    for pole, want in checks:
        if res.field_at(pole) != want:
            return VirasoroResult(
                False,
                witness={
                    "pole": pole,
                    "got": res.field_at(pole).pretty(),
                    "want": want.pretty(),
                },
            )
    if res.max_pole() > 4:
        return VirasoroResult(
            False, witness={"pole": res.max_pole(), "reason": "pole above order 4"}
        )
    return VirasoroResult(True, central_charge=2 * c_half.rat)


def commute_test(left: FieldExpr, right: FieldExpr) -> Verdict:
    """Pass iff the two fields have a completely regular product."""
    res = ope_singular(left, right)
    mismatch = None
    if not res.is_empty():
        p = res.max_pole()
        mismatch = {"pole": p, "field": res.field_at(p).pretty()}
    return Verdict(
        identity="stress_tensor_commutation",
        params={},
        order=0,
        ok=res.is_empty(),
        mode="symbolic",
        first_mismatch=mismatch,
        note="singular part must vanish identically",
    )


def primary_test(phi: FieldExpr, field: FieldExpr, delta_expected, *, full_translation: bool = False) -> Verdict:
    """Check that phi is primary of the given dimension under the field.

    Poles above 2 must vanish and the order-2 field must be delta * phi.
    Only when full_translation is set is the order-1 field required to be
    the honest derivative of phi: for one member of a commuting pair the
    order-1 term is that member's own translation share, and only the sum
    over the pair reproduces d(phi).
    """
    res = ope_singular(field, phi)
    want2 = phi.scaled(delta_expected)
    mismatch = None
    if res.max_pole() > 2:
        p = res.max_pole()
        mismatch = {"pole": p, "field": res.field_at(p).pretty()}
    elif res.field_at(2) != want2:
        mismatch = {"pole": 2, "got": res.field_at(2).pretty(), "want": want2.pretty()}
    elif full_translation and res.field_at(1) != phi.translated():
        mismatch = {
            "pole": 1,
            "got": res.field_at(1).pretty(),
            "want": phi.translated().pretty(),
        }
    return Verdict(
        identity="primary_field_dimension",
        params={"delta": str(delta_expected), "full_translation": full_translation},
        order=0,
        ok=mismatch is None,
        mode="symbolic",
        first_mismatch=mismatch,
    )


# --- the stress-tensor catalog ----------------------------------------------


def _rf_symbol_or_value(x, name: str) -> RF:
    if x is None:
        return RF.symbol(name)
    return _as_rf(x)


class StressTensorCatalog:
    """The named stress tensors and primaries, built over exact scalars.

    eps is the screening strength (symbolic by default); b is the coupling
    of the abstract current sector.  Entries are plain FieldExprs and the
    catalog is immutable after construction.
    """

    __slots__ = (
        "eps",
        "b",
        "t_urod",
        "t_25",
        "t_53",
        "t_b1",
        "t_b2",
        "h_density",
        "t_abstract",
    )

    def __init__(self, eps=None, b=None):
        eps = _rf_symbol_or_value(eps, "eps")
        b = _rf_symbol_or_value(b, "b")
        object.__setattr__(self, "eps", eps)
        object.__setattr__(self, "b", b)
        half = Q(1, 2)
        inv_root2 = Root2(0, half)

        def build(alpha, beta1, beta2, gamma1, gamma2, deform, tb=None, tb_e=None):
            terms = [
                (((), (), -2), alpha),
                (((1, 1), (), 0), beta1),
                (((2,), (), 0), beta2),
                (((1, 1), (), 2), gamma1),
                (((2,), (), 2), gamma2),
                (((), (), 4), deform),
            ]
            if tb is not None:
                terms.append((((), (2,), 0), tb))
            if tb_e is not None:
                terms.append((((), (2,), 2), tb_e))
            return FieldExpr(terms)

        object.__setattr__(
            self,
            "t_urod",
            build(0, half, inv_root2, 2 * eps, Root2(0, eps), 0),
        )
        object.__setattr__(
            self,
            "t_25",
            build(
                Q(-1, 10) / eps,
                Q(1, 5),
                Root2(0, Q(3, 10)),
                Q(12, 5) * eps,
                Root2(0, Q(3, 5) * eps),
                Q(-12, 5) * eps * eps,
            ),
        )
        object.__setattr__(
            self,
            "t_53",
            build(
                Q(1, 10) / eps,
                Q(3, 10),
                Root2(0, Q(1, 5)),
                Q(-2, 5) * eps,
                Root2(0, Q(2, 5) * eps),
                Q(12, 5) * eps * eps,
            ),
        )
        bb = b * b
        object.__setattr__(
            self,
            "t_b1",
            build(
                (bb + 1) / (2 * (bb - 1)) / eps,
                bb / (2 * (bb - 1)),
                Root2(0, -1 / (2 * (bb - 1))),
                -(bb + 2) * eps / (bb * bb - 1),
                Root2(0, -eps / (bb - 1)),
                -2 * bb * eps * eps / (bb * bb - 1),
                tb=-1 / (bb - 1),
                tb_e=-2 * bb * eps / (bb * bb - 1),
            ),
        )
        object.__setattr__(
            self,
            "t_b2",
            build(
                -(bb + 1) / (2 * (bb - 1)) / eps,
                -1 / (2 * (bb - 1)),
                Root2(0, bb / (2 * (bb - 1))),
                bb * (2 * bb + 1) * eps / (bb * bb - 1),
                Root2(0, bb * eps / (bb - 1)),
                2 * bb * eps * eps / (bb * bb - 1),
                tb=bb / (bb - 1),
                tb_e=2 * bb * eps / (bb * bb - 1),
            ),
        )
        big = b + 1 / b
        object.__setattr__(
            self,
            "h_density",
            build(
                big / (2 * eps),
                big / 2,
                0,
                eps / big,
                0,
                -2 * eps * eps / big,
                tb_e=-2 * eps / big,
            ),
        )
        object.__setattr__(self, "t_abstract", FieldExpr.term(1, vir=(2,)))

    def __setattr__(self, name, value):
        raise AttributeError("StressTensorCatalog is immutable")

    def t_std(self, u) -> FieldExpr:
        """Half (dphi)^2 plus u d^2phi; u may be any exact scalar."""
        return FieldExpr(
            ((((1, 1), (), 0), Root2(Q(1, 2))), (((2,), (), 0), _scalar(u)))
        )

    def primary_pair(self, n: int) -> FieldExpr:
        """Ground field of the n-th sector of the paired minimal actions."""
        eps = self.eps
        if n == 1:
            return FieldExpr.term(1)
        if n == 2:
            return FieldExpr.term(1, s=1)
        if n == 3:
            return FieldExpr.term(1) + FieldExpr.term(2 * eps, s=2)
        if n == 4:
            return (
                FieldExpr.term(1, s=-1)
                + FieldExpr.term(Root2(0, 2 * eps), osc=(1,), s=1)
                + FieldExpr.term(2 * eps * eps, s=3)
            )
        raise ValueError(f"sector index must lie in 1..4, got {n}")

    def central_charges(self) -> dict:
        """Exact central charges of the named pair, the sum, and the frame."""
        b = self.b
        bb = b * b
        pair1 = bb / (1 - bb) + 2 + (1 - bb) / bb
        pair2 = (bb - 1) + 2 + 1 / (bb - 1)
        return {
            "t_25": RF.constant(Q(-22, 5)),
            "t_53": RF.constant(Q(-3, 5)),
            "t_urod": RF.constant(-5),
            "t_b1": 1 + 6 * pair1,
            "t_b2": 1 + 6 * pair2,
            "frame": 1 + 6 * (b + 1 / b) ** 2,
        }


# --- identity suite ---------------------------------------------------------


def identity_tests(eps=None) -> Verdict:
    """The sum rules tying the catalog together, all as exact equalities.

    Checked: the two commuting minimal tensors add up to the modified
    lattice tensor; the coupled pair adds up to abstract-plus-modified;
    the b-weighted combination collapses to the screening density; the
    central charges of the pair overshoot the frame charge by exactly -5;
    and the coupled pair degenerates onto the minimal pair at b^2 = -2/3
    once the abstract current is dropped (its frame charge vanishes there).
    """
    cat = StressTensorCatalog(eps=eps)
    b = cat.b
    checked = []
    mismatch = None

    def record(name: str, ok_flag: bool, detail: str = ""):
        nonlocal mismatch
        checked.append(name)
        if not ok_flag and mismatch is None:
            mismatch = {"identity": name, "detail": detail}

    record("minimal_pair_sum", cat.t_25 + cat.t_53 == cat.t_urod)
    record(
        "coupled_pair_sum",
        cat.t_b1 + cat.t_b2 == cat.t_abstract + cat.t_urod,
    )
    weighted = cat.t_b1.scaled(b) + cat.t_b2.scaled(1 / b)
    record("weighted_pair_is_screening_density", weighted == cat.h_density)
    charges = cat.central_charges()
    gap = charges["t_b1"] + charges["t_b2"] + 5 - charges["frame"]
    record("central_charge_deficit", gap == _RF_ZERO, detail=str(gap))

    def reduce_drop_abstract(field: FieldExpr) -> FieldExpr:
        kept = [
            (mono, coeff)
            for mono, coeff in field.terms()
            if not mono[1]
        ]
        return FieldExpr(kept).subs_square("b", Q(-2, 3))

    record(
        "degeneration_first",
        reduce_drop_abstract(cat.t_b1) == cat.t_25,
    )
    record(
        "degeneration_second",
        reduce_drop_abstract(cat.t_b2) == cat.t_53,
    )
    return Verdict(
        identity="stress_tensor_identities",
        params={"checked": checked, "eps": "symbolic" if eps is None else str(eps)},
        order=0,
        ok=mismatch is None,
        mode="symbolic",
        first_mismatch=mismatch,
    )


_ANSATZ_NAMES = ("alpha", "a1", "a2", "eps1", "eps2", "delta")


def ansatz_verify() -> Verdict:
    """Quadratic constraint system of the six-parameter tensor ansatz.

    The general candidate combines the charged exponential at -sqrt(2), the
    two quadratic boson terms, their screened partners, and the exponential
    at +2 sqrt(2); the second and fifth coefficients are rationalized by
    折 sqrt(2) into the monomials so every root below is rational.  The
    self-product pattern is turned into polynomial constraints, each listed
    solution is substituted in, and its central charge is read off the
    order-4 coefficient.  Families stay symbolic in their free parameter.
    """
    syms = {name: RF.symbol(name) for name in _ANSATZ_NAMES}
    generic = FieldExpr(
        (
            (((), (), -2), Root2(syms["alpha"])),
            (((1, 1), (), 0), Root2(syms["a1"])),
            (((2,), (), 0), Root2(0, syms["a2"] / 2)),
            (((1, 1), (), 2), Root2(syms["eps1"])),
            (((2,), (), 2), Root2(0, syms["eps2"])),
            (((), (), 4), Root2(syms["delta"])),
        )
    )
    res = ope_singular(generic, generic)
    constraints: list = []

    def add_constraints(diff: FieldExpr):
        for _, coeff in diff.terms():
            for part in (coeff.rat, coeff.irr):
                if part != _RF_ZERO:
                    constraints.append(part)

    top = res.field_at(4)
    add_constraints(top - FieldExpr.term(top.coefficient(_VACUUM_MONO)))
    add_constraints(res.field_at(3))
    add_constraints(res.field_at(2) - generic.scaled(2))
    add_constraints(res.field_at(1) - generic.translated())
    c_generic = 2 * top.coefficient(_VACUUM_MONO).rat
    if res.max_pole() > 4:
        return Verdict(
            identity="stress_tensor_ansatz",
            ok=False,
            mode="symbolic",
            first_mismatch={"identity": "pole_bound", "detail": str(res.max_pole())},
        )

    eps = RF.symbol("eps")
    u_hat = RF.symbol("u")
    alpha_free = RF.symbol("alpha")
    delta_free = RF.symbol("delta")
    zero = RF.constant(0)
    half = RF.constant(Q(1, 2))
    solutions = (
        ("modified_lattice", (zero, half, _RF_ONE, 2 * eps, eps, zero), RF.constant(-5)),
        (
            "minimal_22_over_5",
            (
                Q(-1, 10) / eps,
                RF.constant(Q(1, 5)),
                RF.constant(Q(3, 5)),
                Q(12, 5) * eps,
                Q(3, 5) * eps,
                Q(-12, 5) * eps * eps,
            ),
            RF.constant(Q(-22, 5)),
        ),
        (
            "minimal_3_over_5",
            (
                Q(1, 10) / eps,
                RF.constant(Q(3, 10)),
                RF.constant(Q(2, 5)),
                Q(-2, 5) * eps,
                Q(2, 5) * eps,
                Q(12, 5) * eps * eps,
            ),
            RF.constant(Q(-3, 5)),
        ),
        (
            "standard_family",
            (zero, half, u_hat, zero, zero, zero),
            1 - 6 * u_hat * u_hat,
        ),
        (
            "screened_charge_family",
            (alpha_free, half, zero, zero, zero, zero),
            _RF_ONE,
        ),
        (
            "double_charge_family",
            (zero, half, RF.constant(Q(3, 2)), zero, zero, delta_free),
            RF.constant(Q(-25, 2)),
        ),
    )
    mismatch = None
    names = []
    for name, values, expected_c in solutions:
        names.append(name)
        assignment = dict(zip(_ANSATZ_NAMES, values))
        bad = [str(c) for c in (g.subs(assignment) for g in constraints) if c != _RF_ZERO]
        if bad and mismatch is None:
            mismatch = {"identity": name, "detail": f"unsatisfied constraint {bad[0]}"}
            continue
        got_c = c_generic.subs(assignment)
        if got_c != expected_c and mismatch is None:
            mismatch = {
                "identity": name,
                "detail": f"central charge {got_c}, expected {expected_c}",
            }
    degenerate = virasoro_test(FieldExpr.zero())
    if degenerate.ok and mismatch is None:
        mismatch = {"identity": "zero_ansatz", "detail": "degenerate tensor accepted"}
    return Verdict(
        identity="stress_tensor_ansatz",
        params={"solutions": names, "constraint_count": len(constraints)},
        order=0,
        ok=mismatch is None,
        mode="symbolic",
        first_mismatch=mismatch,
        note="roots checked against the extracted constraint system",
    )


# --- spectra ----------------------------------------------------------------

_SECTOR_PARITY = {"U0": 0, "U1": 1}


def _sector_basis(sector: str, bound) -> list:
    """All (graded eigenvalue, monomial) of the sector up to the bound.

    Charges s sit at regraded base (s^2 - 2s)/4, so writing s = 1 + d the
    base is (d^2 - 1)/4 and the sector parity fixes the parity of d.
    """
    parity = _SECTOR_PARITY[sector]
    bq = bound if is_rational(bound) else Q(bound)
    out = []
    d = 1 - parity
    while True:
        base = Q(d * d - 1, 4)
        if base > bq:
            break
        for s in sorted({1 - d, 1 + d}):
            level = 0
            while base + level <= bq:
                for part in _partitions_of(level):
                    out.append((base + level, (part, (), s)))
                level += 1
        d += 2
    out.sort(key=lambda pair: (pair[0], _mono_key(pair[1])))
    return out


def l0_spectrum(sector, bound) -> tuple:
    """Eigenvalue-graded dimensions of the modified zero mode on a sector.

    The zero mode of the modified lattice tensor is applied to every basis
    monomial up to the bound; each must come back as an exact multiple of
    itself (the screening term contributes nothing at this mode index), and
    the multiples are tallied into (eigenvalue, dimension) pairs.
    """
    name = getattr(sector, "sector", sector)
    if name not in _SECTOR_PARITY:
        raise ValueError(f"sector must be U0 or U1, got {name!r}")
    field = StressTensorCatalog().t_urod
    tally: dict = {}
    for expected, mono in _sector_basis(name, bound):
        state = ModuleVector(((mono, 1),))
        out = fock_mode_action(field, 0, state)
        if set(out._terms) - {mono}:
            raise RuntimeError(f"zero mode is not diagonal on {mono}")
        got = out._terms.get(mono, _ZERO)
        if got.irr != _RF_ZERO or not got.rat.is_constant():
            raise RuntimeError(f"zero mode eigenvalue on {mono} is not rational")
        eig = got.rat.as_constant()
        if eig != expected:
            raise RuntimeError(
                f"zero mode eigenvalue {eig} on {mono}, grading says {expected}"
            )
        tally[eig] = tally.get(eig, 0) + 1
    return tuple(sorted(tally.items()))


# --- pretty printing ---------------------------------------------------------

_SUPERSCRIPTS = str.maketrans("0123456789", "⁰¹²³⁴⁵⁶⁷⁸⁹")


def _sup(n: int) -> str:
    return str(n).translate(_SUPERSCRIPTS)


def _fmt_charge(s: int) -> str:
    if s % 2 == 0:
        k = s // 2
        mag = {1: "√2", -1: "-√2"}.get(k, f"{k}√2")
        return f"e^{{{mag}φ}}"
    mag = {1: "", -1: "-"}.get(s, f"{s}")
    return f"e^{{{mag}φ/√2}}"


def _fmt_osc(osc: tuple) -> tuple:
    """Render oscillators as derivative powers; returns (text, rescale).

    States use modes, the printed form uses derivatives of the field, and
    the two differ by (p-1)! per part; the rescale multiplies the stored
    coefficient to recover the printed one.
    """
    pieces = []
    for p in sorted(set(osc), reverse=True):
        k = osc.count(p)
        base = "∂φ" if p == 1 else f"∂{_sup(p)}φ"
        pieces.append(f"({base}){_sup(k)}" if k > 1 else base)
    rescale = Q(1)
    for p in osc:
        for j in range(2, p):
            rescale /= j
    return "".join(pieces), rescale


def _fmt_vir(vir: tuple) -> tuple:
    pieces = []
    for m in sorted(set(vir), reverse=True):
        k = vir.count(m)
        if m == 2:
            base = "T_b"
        elif m == 3:
            base = "∂T_b"
        else:
            base = f"∂{_sup(m - 2)}T_b"
        pieces.append(base + (_sup(k) if k > 1 else ""))
    rescale = Q(1)
    for m in vir:
        for j in range(1, m - 1):
            rescale /= j
    return "".join(pieces), rescale


def _fmt_q(x) -> str:
    return str(x)


def _fmt_rf(rf: RF) -> str:
    if rf.is_constant():
        return _fmt_q(rf.as_constant())
    return f"({rf})"


def _fmt_scalar(coeff: Root2) -> str:
    if coeff.irr == _RF_ZERO:
        return _fmt_rf(coeff.rat)
    if coeff.rat == _RF_ZERO:
        inner = _fmt_rf(coeff.irr)
        if inner == "1":
            return "√2"
        if inner == "-1":
            return "-√2"
        if "/" in inner and not inner.startswith("("):
            inner = f"({inner})"
        return f"{inner}√2"
    return f"({_fmt_rf(coeff.rat)} + {_fmt_rf(coeff.irr)}√2)"


def _pretty_terms(terms: tuple) -> str:
    if not terms:
        return "0"
    ordered = sorted(terms, key=lambda kv: (bool(kv[0][1]), _mono_key(kv[0])))
    chunks = []
    for mono, coeff in ordered:
        osc, vir, s = mono
        osc_txt, rescale = _fmt_osc(osc)
        vir_txt, vres = _fmt_vir(vir)
        rescale *= vres
        body = osc_txt + vir_txt + (_fmt_charge(s) if s else "")
        if not body:
            body = "1"
        factors = bool(osc) + bool(vir) + bool(s)
        if osc and factors > 1:
            body = f":{body}:"
        shown = coeff * rescale if rescale != 1 else coeff
        txt = _fmt_scalar(shown)
        if txt == "1" and body != "1":
            chunks.append(body)
        elif txt == "-1" and body != "1":
            chunks.append(f"-{body}")
        elif body == "1":
            chunks.append(txt)
        else:
            chunks.append(f"{txt} {body}")
    out = chunks[0]
    for nxt in chunks[1:]:
        if nxt.startswith("-"):
            out += " - " + nxt[1:]
        else:
            out += " + " + nxt
    return out
