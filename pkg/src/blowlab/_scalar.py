"""Exact rational scalars.

Everything in this package computes over Q (or small extensions built on
top of it); there is no floating point anywhere. We use gmpy2's mpq when
available because it is several times faster on large numerators, and fall
back to fractions.Fraction otherwise. The two types expose the same
numerator/denominator/arithmetic surface, so the rest of the code never
needs to know which one it got.
"""

from __future__ import annotations

from fractions import Fraction

try:
    from gmpy2 import mpq as _mpq_impl

    _HAVE_GMPY2 = True
except ImportError:  # pragma: no cover - exercised only without gmpy2
    _mpq_impl = None
    _HAVE_GMPY2 = False


if _HAVE_GMPY2:

    def Q(num=0, den=1):
        return _mpq_impl(num, den)

else:

    def Q(num=0, den=1):
        return Fraction(num, den)


#: the zero and one of the scalar ring, for generic code
QZERO = Q(0)
QONE = Q(1)


def is_rational(x) -> bool:
    """True for plain rational scalars (int, Fraction, mpq)."""
    if isinstance(x, (int, Fraction)):
        return True
    if _HAVE_GMPY2 and isinstance(x, type(_mpq_impl(0))):
        return True
    return False


def q_from_str(s: str):
    """Parse 'n' or 'n/d' back into a scalar. Inverse of str()."""
    s = s.strip()
    if "/" in s:
        n, d = s.split("/")
        return Q(int(n), int(d))
    return Q(int(s))


def q_gcd(a, b):
    """gcd for rationals: gcd(n1/d1, n2/d2) = gcd(n1,n2)/lcm(d1,d2).

    Normalized positive. gcd(0, x) = |x|. Used for polynomial content.
    """
    if not a:
        return abs(b)
    if not b:
        return abs(a)
    from math import gcd, lcm

    an, ad = int(a.numerator), int(a.denominator)
    bn, bd = int(b.numerator), int(b.denominator)
    return Q(gcd(an, bn), lcm(ad, bd))
