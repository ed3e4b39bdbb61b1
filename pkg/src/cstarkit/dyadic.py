"""Exact arithmetic helpers on dyadic rationals.

Floats are dyadic, so ``Fraction(x)`` is lossless for any finite float and
everything here stays exact.
"""
from __future__ import annotations

from fractions import Fraction


def largest_pow2_leq(x: Fraction) -> Fraction:
    """Largest power of two p with p <= x, as an exact Fraction.

    x must be positive.
    """
    if x <= 0:
        raise ValueError(f"expected a positive value, got {x}")
    # 2**(k-1) <= n/d < 2**(k+1) for k = bitlen(n) - bitlen(d); settle by comparison.
    k = x.numerator.bit_length() - x.denominator.bit_length()
    p = Fraction(2) ** k
    if p > x:
        p /= 2
    elif 2 * p <= x:
        p *= 2
    return p


def ceil_log2(x: Fraction) -> int:
    """Smallest integer k with 2**k >= x, for positive x."""
    if x <= 0:
        raise ValueError(f"expected a positive value, got {x}")
    k = x.numerator.bit_length() - x.denominator.bit_length()
    # candidate window is {k-1, k, k+1}; pick the smallest that covers x
    for c in (k - 1, k, k + 1):
        if Fraction(2) ** c >= x:
            return c
    raise AssertionError("unreachable")


def is_dyadic(x: Fraction) -> bool:
    """True when x has a power-of-two denominator."""
    d = x.denominator
    return d & (d - 1) == 0
