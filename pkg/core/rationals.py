"""Exact rational scalars.

Every coordinate, length, measure and density in the project is a
``fractions.Fraction``. Fractions are always in lowest terms with a positive
denominator, so equality and hashing are exact. Floats are rejected at every
entry point; decimal renderings are advisory output only.
"""

import re
from decimal import Decimal, localcontext
from fractions import Fraction
from numbers import Rational as _RationalABC
from typing import Union

from core.exceptions import RationalParseError

Rational = Fraction
RationalLike = Union[Fraction, int, str]

_RATIONAL_RE = re.compile(r"^\s*([+-]?\d+)\s*(?:/\s*(\d+)\s*)?$")


def parse_rational(text: str) -> Fraction:
    """Parse a "p/q" or integer string into an exact rational."""
    if not isinstance(text, str):
        raise RationalParseError(f"Expected a string, got {type(text).__name__}")
    match = _RATIONAL_RE.match(text)
    if match is None:
        raise RationalParseError(f"Not a rational literal: {text!r}")
    numerator = int(match.group(1))
    denominator = int(match.group(2)) if match.group(2) is not None else 1
    if denominator == 0:
        raise RationalParseError(f"Zero denominator in {text!r}")
    return Fraction(numerator, denominator)


def to_rational(value: RationalLike) -> Fraction:
    """Coerce an int, Fraction or rational string; floats are refused."""
    if isinstance(value, bool):
        raise RationalParseError("Booleans are not rationals")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return parse_rational(value)
    if isinstance(value, _RationalABC):
        return Fraction(value.numerator, value.denominator)
    raise RationalParseError(f"Cannot convert {type(value).__name__} to an exact rational")


def format_rational(value: RationalLike) -> str:
    """Render as "p/q", or "p" when the denominator is 1; the sign sits on p."""
    q = to_rational(value)
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


def to_decimal_string(value: RationalLike, digits: int = 12) -> str:
    """Advisory decimal rendering to ``digits`` significant digits."""
    q = to_rational(value)
    with localcontext() as ctx:
        ctx.prec = digits
        return str(Decimal(q.numerator) / Decimal(q.denominator))


def power_of_two(exponent: int) -> Fraction:
    """Exact 2**exponent for any integer exponent."""
    if exponent >= 0:
        return Fraction(2**exponent)
    return Fraction(1, 2 ** (-exponent))


def power_of_ten(exponent: int) -> Fraction:
    """Exact 10**exponent for any integer exponent."""
    if exponent >= 0:
        return Fraction(10**exponent)
    return Fraction(1, 10 ** (-exponent))
