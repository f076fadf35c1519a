"""Helpers for moving exact rationals in and out of text."""

from __future__ import annotations

from decimal import Decimal
from fractions import Fraction
from numbers import Rational
from typing import Union

RationalLike = Union[int, Fraction, str, float, Decimal]


def to_rational(value: RationalLike) -> Fraction:
    """Coerce ``value`` to a :class:`Fraction`.

    Strings may be ``p/q`` or a decimal literal. Floats go through their
    shortest ``repr`` so that ``0.1`` becomes ``1/10`` rather than the
    binary expansion.
    """
    if isinstance(value, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, Rational):
        return Fraction(value)
    if isinstance(value, float):
        return Fraction(repr(value))
    if isinstance(value, Decimal):
        return Fraction(value)
    if isinstance(value, str):
        text = value.strip()
        if "/" in text:
            num, _, den = text.partition("/")
            if int(den) <= 0:
                raise ValueError(f"denominator must be positive in {value!r}")
            return Fraction(int(num), int(den))
        return Fraction(text)
    raise TypeError(f"cannot interpret {value!r} as a rational")


def fmt(value: Fraction) -> str:
    """``p/q`` text for a rational; integers print without a denominator."""
    return str(value)
