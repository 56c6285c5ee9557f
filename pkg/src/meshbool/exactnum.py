"""Arbitrary-precision rational arithmetic backend.

gmpy2 is used when available (much faster); the stdlib Fraction type is a
drop-in fallback.  Both convert binary floats exactly, which is all the
exact stage ever needs: every rational in the pipeline is derived from
double inputs by ring operations.
"""

from __future__ import annotations

try:
    from gmpy2 import mpq as _mpq

    HAVE_GMPY = True
except ImportError:  # pragma: no cover - exercised only without gmpy2
    from fractions import Fraction as _mpq

    HAVE_GMPY = False


def rational(num, den=None):
    if den is None:
        return _mpq(num)
    return _mpq(num, den)


def rat_to_float(q) -> float:
    """Round a rational to the nearest double (ties to even).

    CPython's int/int true division is correctly rounded, which keeps this
    independent of the rational backend's own float conversion.
    """
    num = int(q.numerator)
    den = int(q.denominator)
    if num == 0:
        return 0.0
    try:
        return num / den
    except OverflowError:
        # |num/den| is enormous; the sign is all that survives.
        return float("inf") if (num > 0) == (den > 0) else float("-inf")


def sign_of(q) -> int:
    if q > 0:
        return 1
    if q < 0:
        return -1
    return 0
