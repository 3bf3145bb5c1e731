"""Exact integer sizes derived from fractional powers of ``n``."""

from __future__ import annotations

from fractions import Fraction


def ceil_scaled_power(n: int, coef: Fraction | int, exponent: int) -> int:
    """Smallest integer ``k >= 0`` with ``k >= coef * n**(exponent/3)``.

    Works in exact arithmetic: ``k**3 >= coef**3 * n**exponent``.
    """
    coef = Fraction(coef)
    if coef <= 0:
        return 0
    target = coef ** 3 * n ** exponent
    k = max(0, int(float(coef) * n ** (exponent / 3)) - 2)
    while k ** 3 < target:
        k += 1
    return k


def tile_size(n: int) -> int:
    """``ceil(n^(2/3))``."""
    return ceil_scaled_power(n, 1, 2)


def cube_root_ceil(n: int) -> int:
    """``ceil(n^(1/3))``."""
    return ceil_scaled_power(n, 1, 1)


def cover_set_size(n: int, kappa: Fraction) -> int:
    """``ceil(kappa * n^(2/3))``."""
    return ceil_scaled_power(n, kappa, 2)
