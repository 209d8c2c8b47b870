"""Two-center factorization of the Whittaker norm series.

The norm series at coupling b and momentum P splits into a sum, over an
integer shift k, of products of the same series at two derived centers:
couplings with squares b^2/(1-b^2) and b^2-1, momenta shifted by k steps,
expansion variable rescaled by beta1 and beta2, and one rational
coefficient l_k per shift.  Every derived quantity is arranged as a
rational function of (P, b) -- only squares of the derived couplings and
momenta ever appear -- so the whole check runs in exact arithmetic.

The l_k are pinned two independent ways.  l_k_product multiplies a lattice
of 4k^2 linear factors; l_k_solve ignores that formula and extracts the
coefficients from the factorization identity itself by exact linear
algebra.  The solve is the arbiter, and it fixes two conventions that are
easy to get wrong: the second lattice block runs over i, j >= 1 with
i + j <= 2k, one step beyond the first block's strict bound (making the
factor count even), and negative shifts obey l_{-k}(P, b) = l_k(-P, b).

hirota_apply and f_hat build the bilinear grading-derivative combinations
of the two factors; f_relations_verify checks them against closed forms,
scalar multiples of the undecomposed series for low derivative count with
explicit q-corrections from the fourth onward.
"""

from __future__ import annotations

import random
from functools import lru_cache
from math import comb, isqrt

from ._scalar import Q
from .nekrasov import z2_coefficient
from .rational import RF, LinearSolveError, solve_unique
from .series import GradedSeries, equal_to_order, qpow, scale_substitute, theta_derive
from .verdict import Verdict
from .verma import LevelBasis, block, whittaker_components

__all__ = [
    "BlowupFrame",
    "blowup_verify",
    "f_hat",
    "f_relations_verify",
    "hirota_apply",
    "l_k_product",
    "l_k_solve",
    "whittaker_eigen_check",
]


def _as_rf(value, default_symbol: str) -> RF:
    if value is None:
        return RF.symbol(default_symbol)
    if isinstance(value, RF):
        return value
    return RF.constant(value)


class BlowupFrame:
    """Derived couplings and shifted weights for the two-center split.

    b and P may be symbols (the default) or rationals.  Only the squares
    of the derived couplings are stored; the shifted momenta enter through

        (P1 + k b1)^2 = (P + k b)^2 / (1 - b^2),
        (P2 + k/b2)^2 = (P b + k)^2 / (b^2 - 1),

    so everything stays inside Q(P, b).  Numeric b must avoid 0 and +-1,
    where the derived squares degenerate.
    """

    __slots__ = ("b", "P", "b_sq", "b1_sq", "b2_sq", "beta1", "beta2", "_lk")

    def __init__(self, b=None, P=None):
        self.b = _as_rf(b, "b")
        self.P = _as_rf(P, "P")
        bsq = self.b * self.b
        if bsq.is_constant() and bsq.as_constant() in (0, 1):
            raise ValueError("coupling b must avoid 0 and +-1")
        self.b_sq = bsq
        self.b1_sq = bsq / (1 - bsq)
        self.b2_sq = bsq - 1
        self.beta1 = 1 / (1 - bsq) ** 2
        self.beta2 = bsq * bsq / (bsq - 1) ** 2
        self._lk: dict = {}

    @staticmethod
    def _pair_square(sq: RF) -> RF:
        """(x + 1/x)^2 expressed through x^2."""
        return sq + 2 + 1 / sq

    @property
    def delta(self) -> RF:
        return self._pair_square(self.b_sq) / 4 - self.P * self.P

    @property
    def central(self) -> RF:
        return 1 + 6 * self._pair_square(self.b_sq)

    @property
    def central1(self) -> RF:
        return 1 + 6 * self._pair_square(self.b1_sq)

    @property
    def central2(self) -> RF:
        return 1 + 6 * self._pair_square(self.b2_sq)

    def delta1(self, k: int) -> RF:
        """Weight at the first center, momentum shifted k steps."""
        shifted = (self.P + k * self.b) ** 2 / (1 - self.b_sq)
        return self._pair_square(self.b1_sq) / 4 - shifted

    def delta2(self, k: int) -> RF:
        """Weight at the second center; the shift there is by inverse steps."""
        shifted = (self.P * self.b + k) ** 2 / (self.b_sq - 1)
        return self._pair_square(self.b2_sq) / 4 - shifted


_DEFAULT_FRAME = BlowupFrame()


def l_k_product(k: int, frame: BlowupFrame | None = None) -> RF:
    """Shift coefficient l_k as a product of 4k^2 linear factors.

    The first block multiplies -2P - i b - j/b over i, j >= 0 with
    i + j < 2|k|; the second multiplies 2P + i b + j/b over i, j >= 1 with
    i + j <= 2|k|.  The second bound reaching one step further is not a
    guess: l_k_solve extracts the same coefficients from the factorization
    identity with no product formula in sight, and this lattice is what it
    produces (the resulting even factor count is also what makes the
    instanton-variable translation of q^{k^2}/l_k land on an integer power
    of eps1*eps2; see blowup_verify).  Negative shifts reflect the
    momentum, l_{-k}(P, b) = l_k(-P, b), again the solver's verdict.
    l_0 = 1 as the empty product.
    """
    if not isinstance(k, int):
        raise ValueError(f"shift must be an integer, got {k!r}")
    fr = _DEFAULT_FRAME if frame is None else frame
    hit = fr._lk.get(k)
    if hit is not None:
        return hit
    p = fr.P if k >= 0 else -fr.P
    b, binv = fr.b, 1 / fr.b
    n = abs(k)
    out = RF.constant(1)
    for i in range(2 * n):
        for j in range(2 * n - i):
            out = out * (-2 * p - i * b - j * binv)
    for i in range(1, 2 * n):
        for j in range(1, 2 * n - i + 1):
            out = out * (2 * p + i * b + j * binv)
    fr._lk[k] = out
    return out


@lru_cache(maxsize=None)
def _sym_block(order: int) -> GradedSeries:
    return block(order)


def _block_at(order: int, delta: RF, central: RF) -> GradedSeries:
    """Norm series at the given weight and coupling, symbols allowed."""
    if delta.is_constant() and central.is_constant():
        return block(order, delta=delta.as_constant(), central=central.as_constant())
    sub = {"Delta": delta, "c": central}
    return _sym_block(order).map_coeffs(lambda v: v.subs(sub))


def _pair_series(frame: BlowupFrame, k: int, order: int) -> GradedSeries:
    """Product of the two center factors at shift k, through q^order."""
    f1 = _block_at(order, frame.delta1(k), frame.central1)
    f2 = _block_at(order, frame.delta2(k), frame.central2)
    return scale_substitute(f1, frame.beta1) * scale_substitute(f2, frame.beta2)


def _rf(x) -> RF:
    return x if isinstance(x, RF) else RF.constant(x)


def l_k_solve(order: int, frame: BlowupFrame | None = None) -> dict:
    """l_k for every k^2 <= order, read off the factorization identity.

    Matching the q^0..q^order coefficients of the identity gives a linear
    system in the reciprocals 1/l_k, solved exactly over whatever field
    the frame parameters live in; no product formula enters anywhere,
    which is what qualifies this as the oracle for l_k_product.  The shift
    k first contributes at q^{k^2} but is separated from -k only one order
    later, so orders 1 and 4 leave the system underdetermined (ValueError
    mentioning it); k^2 + 1 is the cheapest order that pins +-k.
    """
    if not (isinstance(order, int) and order >= 0):
        raise ValueError(f"order must be a nonnegative integer, got {order}")
    fr = _DEFAULT_FRAME if frame is None else frame
    kmax = isqrt(order)
    ks = list(range(-kmax, kmax + 1))
    lhs = _block_at(order, fr.delta, fr.central)
    gs = {k: _pair_series(fr, k, order - k * k) for k in ks}
    zero = RF.constant(0)
    rows, rhs = [], []
    for n in range(order + 1):
        row = []
        for k in ks:
            m = n - k * k
            row.append(_rf(gs[k].coeff(m)) if m >= 0 else zero)
        rows.append(row)
        rhs.append(_rf(lhs.coeff(n)))
    try:
        x = solve_unique(rows, rhs, len(ks))
    except LinearSolveError as exc:
        if exc.kind == "underdetermined":
            raise ValueError(
                f"order {order} leaves the system underdetermined for shifts up "
                f"to +-{kmax}; use at least order {kmax * kmax + 1}"
            ) from exc
        raise ValueError(
            "factorization identity inconsistent: no shift coefficients exist"
        ) from exc
    out = {}
    for k, xk in zip(ks, x):
        if xk.is_zero():
            raise ZeroDivisionError(f"reciprocal of l_{k} solved to zero")
        out[k] = 1 / xk
    return out


def _sum_side(frame: BlowupFrame, order: int) -> GradedSeries:
    """The decomposed side: sum over shifts of q^{k^2}/l_k times the pair."""
    total = GradedSeries.zero(order)
    for k in range(-isqrt(order), isqrt(order) + 1):
        pair = _pair_series(frame, k, order - k * k)
        total = total + (qpow(k * k) * pair).scaled(1 / l_k_product(k, frame))
    return total


def _z_translated_lk(k: int, a, e1, e2):
    """The combination (eps1 eps2)^{2k^2} l_k in instanton variables.

    Under P = a/sqrt(e1 e2), b = e1/sqrt(e1 e2) every linear factor of
    l_k carries one 1/sqrt(e1 e2); multiplying each of the 4k^2 factors by
    sqrt(e1 e2) instead gives the plain lattice product below, and the
    collected power (eps1 eps2)^{2k^2} is exactly what the rescaling
    q -> q/(e1 e2)^2 strips off q^{k^2}.  Nothing irrational survives --
    that bookkeeping only closes because the factor count is even.
    """
    aa = a if k >= 0 else -a
    n = abs(k)
    out = Q(1)
    for i in range(2 * n):
        for j in range(2 * n - i):
            out *= -(2 * aa + i * e1 + j * e2)
    for i in range(1, 2 * n):
        for j in range(1, 2 * n - i + 1):
            out *= 2 * aa + i * e1 + j * e2
    return out


def _z_sum_coefficient(n: int, e1, e2, a):
    """q^n coefficient of the decomposed side in instanton variables."""
    total = Q(0)
    for k in range(-isqrt(n), isqrt(n) + 1):
        rest = n - k * k
        if rest < 0:
            continue
        lk = _z_translated_lk(k, a, e1, e2)
        if lk == 0:
            raise ValueError(f"translated l_{k} vanishes at this point")
        s = Q(0)
        for m in range(rest + 1):
            s += z2_coefficient(m, e1, e2 - e1, a + k * e1) * z2_coefficient(
                rest - m, e1 - e2, e2, a + k * e2
            )
        total += s / lk
    return total


def _draw_block_point(rng: random.Random):
    bv = Q(rng.randint(1, 60), rng.randint(1, 60)) * rng.choice((1, -1))
    return bv if bv * bv != 1 else None


def blowup_verify(form: str, order: int, *, seed: int = 0) -> Verdict:
    """Check the factorization identity in one of its two presentations.

    "block_form" works in conformal variables: a random rational coupling
    b (all derived squares then rational) with the momentum kept symbolic,
    so each order is an identity of rational functions of P.  "Z_form"
    works in instanton variables at a random rational (eps1, eps2, a): the
    rank-2 sum at (eps1, eps2, a) against the sums at (eps1, eps2-eps1,
    a+k*eps1) and (eps1-eps2, eps2, a+k*eps2), weighted by q^{k^2} over
    the translated l_k (see _z_translated_lk for why that translation is
    rational).  Degenerate draws are resampled; the drawn point lands in
    the verdict's params.
    """
    if not (isinstance(order, int) and order >= 0):
        raise ValueError(f"order must be a nonnegative integer, got {order}")
    rng = random.Random(seed)
    kmax = isqrt(order)
    if form == "block_form":
        for _ in range(64):
            bv = _draw_block_point(rng)
            if bv is None:
                continue
            frame = BlowupFrame(b=bv)
            try:
                lhs = _block_at(order, frame.delta, frame.central)
                rhs = _sum_side(frame, order)
            except ZeroDivisionError:
                continue
            break
        else:
            raise RuntimeError("no usable coupling draw in 64 attempts")
        cmp = equal_to_order(lhs, rhs, order, mode="symbolic")
        mismatch = None
        if not cmp.ok:
            mismatch = {
                "grade": str(cmp.grade),
                "lhs": str(cmp.lhs),
                "rhs": str(cmp.rhs),
            }
        return Verdict(
            identity="blowup_block_form",
            params={"b": str(bv), "b2": str(bv * bv), "seed": seed},
            order=order,
            ok=cmp.ok,
            mode="symbolic",
            first_mismatch=mismatch,
            note=f"shifts |k| <= {kmax}; momentum symbolic, coupling rational",
        )
    if form == "Z_form":
        for _ in range(64):
            e1 = Q(rng.randint(1, 12), rng.randint(1, 12)) * rng.choice((1, -1))
            e2 = Q(rng.randint(1, 12), rng.randint(1, 12)) * rng.choice((1, -1))
            av = Q(rng.randint(1, 40), rng.randint(1, 12)) * rng.choice((1, -1))
            if e1 * e2 == 0 or e1 == e2:
                continue
            try:
                pairs = [
                    (z2_coefficient(n, e1, e2, av), _z_sum_coefficient(n, e1, e2, av))
                    for n in range(order + 1)
                ]
            except (ValueError, ZeroDivisionError):
                continue
            break
        else:
            raise RuntimeError("no usable instanton draw in 64 attempts")
        mismatch = None
        for n, (lv, rv) in enumerate(pairs):
            if lv != rv:
                mismatch = {"grade": str(n), "lhs": str(lv), "rhs": str(rv)}
                break
        return Verdict(
            identity="blowup_Z_form",
            params={
                "eps1": str(e1),
                "eps2": str(e2),
                "a": str(av),
                "seed": seed,
            },
            order=order,
            ok=mismatch is None,
            mode="numeric",
            first_mismatch=mismatch,
            note=f"shifts |k| <= {kmax}; exact rational point",
        )
    raise ValueError(f"form must be 'block_form' or 'Z_form', got {form!r}")


def hirota_apply(m: int, f: GradedSeries, g: GradedSeries, eps_pair) -> GradedSeries:
    """m-th bilinear grading derivative: the d^m/dy^m of f(e^{e1 y} q)
    g(e^{e2 y} q) at y = 0, i.e. sum_j C(m,j) e1^j e2^{m-j} theta^j(f)
    theta^{m-j}(g) with theta = q d/dq acting on prefix and grades alike.
    """
    if not (isinstance(m, int) and m >= 0):
        raise ValueError(f"derivative count must be a nonnegative integer, got {m}")
    e1, e2 = eps_pair
    fs, gs = [f], [g]
    for _ in range(m):
        fs.append(theta_derive(fs[-1]))
        gs.append(theta_derive(gs[-1]))
    total = None
    for j in range(m + 1):
        coef = Q(comb(m, j)) * _power(e1, j) * _power(e2, m - j)
        term = (fs[j] * gs[m - j]).scaled(coef)
        total = term if total is None else total + term
    return total


def _power(x, n: int):
    if n == 0:
        return Q(1)
    return x**n


def f_hat(m: int, order: int, frame: BlowupFrame | None = None) -> GradedSeries:
    """m-th Hirota combination of the two center factors, through q^order.

    Each shift k contributes q^{1/4 - Delta}/l_k times the m-th bilinear
    derivative (coupling pair (b, 1/b)) of the weighted factors
    q^{Delta1_k} F(beta1 q) and q^{Delta2_k} F(beta2 q).  The two weights
    sum to Delta - 1/4 + k^2, so after the prefactor every shift lands
    back on integer grades; m = 0 reassembles the undecomposed series.
    """
    if not (isinstance(m, int) and 0 <= m <= 6):
        raise ValueError(f"derivative count must lie in 0..6, got {m}")
    if not (isinstance(order, int) and order >= 0):
        raise ValueError(f"order must be a nonnegative integer, got {order}")
    fr = _DEFAULT_FRAME if frame is None else frame
    eps = (fr.b, 1 / fr.b)
    pref = Q(1, 4) - fr.delta
    total = None
    for k in range(-isqrt(order), isqrt(order) + 1):
        d1, d2 = fr.delta1(k), fr.delta2(k)
        f = scale_substitute(_block_at(order, d1, fr.central1), fr.beta1)
        g = scale_substitute(_block_at(order, d2, fr.central2), fr.beta2)
        term = hirota_apply(m, f.with_prefix_added(d1), g.with_prefix_added(d2), eps)
        term = term.with_prefix_added(pref).scaled(1 / l_k_product(k, fr))
        total = term if total is None else total + term
    return total.truncate(order)


def f_relations_verify(
    order: int,
    frame: BlowupFrame | None = None,
    m_values: tuple = (1, 2, 3, 4, 5, 6),
) -> Verdict:
    """f_hat(m) against its closed forms, through q^order.

    With F the undecomposed series and B = b + 1/b: for m <= 3 the
    combination is (B/4)^m F; m = 4 subtracts 2q F, m = 5 subtracts
    (17/2) B q F, and m = 6 subtracts ((199/8) B^2 - 2) q F while
    adding 8 q (Delta + theta) F -- the grading-derivative way of
    writing 8 q^{2-Delta} d/dq (q^Delta F).
    """
    fr = _DEFAULT_FRAME if frame is None else frame
    for m in m_values:
        if not (isinstance(m, int) and 1 <= m <= 6):
            raise ValueError(f"closed forms cover m in 1..6, got {m}")
    base = _block_at(order, fr.delta, fr.central)
    big = fr.b + 1 / fr.b
    quarter = big / 4
    mismatch = None
    for m in m_values:
        want = base.scaled(quarter**m)
        if m == 4:
            want = want - (qpow(1) * base).scaled(Q(2))
        elif m == 5:
            want = want - (qpow(1) * base).scaled(Q(17, 2) * big)
        elif m == 6:
            want = want - (qpow(1) * base).scaled(Q(199, 8) * big * big - 2)
            swirl = theta_derive(base) + base.scaled(fr.delta)
            want = want + (qpow(1) * swirl).scaled(Q(8))
        cmp = equal_to_order(f_hat(m, order, fr), want, order, mode="symbolic")
        if not cmp.ok:
            mismatch = {
                "part": f"m={m}",
                "grade": str(cmp.grade),
                "lhs": str(cmp.lhs),
                "rhs": str(cmp.rhs),
            }
            break
    return Verdict(
        identity="hirota_closed_forms",
        params={
            "m_values": list(m_values),
            "b": str(fr.b),
            "P": str(fr.P),
        },
        order=order,
        ok=mismatch is None,
        mode="symbolic",
        first_mismatch=mismatch,
        note="closed forms for the bilinear combinations of the two factors",
    )


def whittaker_eigen_check(level: int = 2) -> Verdict:
    """Eigen-relations of the two derived tensors on the dressed vector.

    The charge-1/sqrt(2) ground state tensored with the Whittaker vector is
    a simultaneous eigenvector of the first modes of the two commuting
    tensors, with eigenvalues 1/(1 - b^2) and b^2/(b^2 - 1) per unit level
    drop, and both second modes annihilate it.  The charge-shifted pieces
    each tensor produces must cancel internally, which is what ties the
    boson coefficients to the abstract-current ones; the check runs the
    modes exactly, symbolically in (P, b, eps), component by component
    through the requested level.

    Levels above 2 are out of scope: the closed eigen-relations are only
    claimed for the modes that lower by one or two, and level 2 already
    exercises every monomial of both tensors.
    """
    from .ope import ModuleVector, StressTensorCatalog, fock_mode_action

    if not (isinstance(level, int) and 0 <= level <= 2):
        raise ValueError(f"level must lie in 0..2, got {level}")
    b = RF.symbol("b")
    big = b + 1 / b
    delta = big * big * Q(1, 4) - RF.symbol("P") ** 2
    central = 1 + 6 * big * big
    comps = whittaker_components(level, delta=delta, central=central)

    def dressed(n: int) -> ModuleVector:
        parts = LevelBasis.at_level(n).partitions
        terms = [(((), lam, 1), co) for lam, co in zip(parts, comps[n].coeffs)]
        return ModuleVector(terms, delta=delta, central=central)

    states = [dressed(n) for n in range(level + 1)]
    cat = StressTensorCatalog()
    fractions = {"t_b1": 1 / (1 - b * b), "t_b2": b * b / (b * b - 1)}
    mismatch = None
    checked = 0
    for name, frac in fractions.items():
        field = getattr(cat, name)
        for n in range(level + 1):
            drop1 = fock_mode_action(field, 1, states[n])
            want1 = states[n - 1].scaled(frac) if n >= 1 else None
            ok1 = drop1.is_zero() if n == 0 else drop1 == want1
            drop2 = fock_mode_action(field, 2, states[n])
            ok2 = drop2.is_zero()
            checked += 2
            if not (ok1 and ok2) and mismatch is None:
                errs = drop1 - want1 if (not ok1 and n >= 1) else drop2
                mismatch = {
                    "tensor": name,
                    "level": n,
                    "mode": 1 if not ok1 else 2,
                    "error": repr(errs),
                }
    if fractions["t_b1"] + fractions["t_b2"] != RF.constant(1):
        mismatch = mismatch or {"tensor": "both", "error": "fractions do not sum to 1"}
    return Verdict(
        identity="whittaker_eigen_relations",
        params={"level": level, "relations": checked},
        order=level,
        ok=mismatch is None,
        mode="symbolic",
        first_mismatch=mismatch,
        note="first and second modes of both derived tensors on the dressed vector",
    )
