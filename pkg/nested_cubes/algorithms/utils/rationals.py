import logging
import math
from fractions import Fraction
from numbers import Rational, Real
from typing import Union

logger = logging.getLogger(__name__)

_MAX_DECIMAL_DENOMINATOR = 10**9

Number = Union[int, float, Fraction]


def as_fraction(value: Number) -> Fraction:
    """Convert an exact or floating value into a Fraction without rounding"""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, Rational):
        return Fraction(int(value.numerator), int(value.denominator))
    if isinstance(value, Real):
        return Fraction(float(value))
    raise TypeError(f"not a real number: {value!r}")


def parse_rational(text: str) -> tuple[Fraction, bool]:
    """Parse a command-line rational.

    `num/den` and plain integers are exact. Decimals are converted with a
    denominator of at most 10^9; the second element is True when that
    conversion changed the value.
    """
    text = text.strip()
    if "/" in text:
        num, den = text.split("/", 1)
        return Fraction(int(num), int(den)), False

    value = Fraction(text)
    if value.denominator <= _MAX_DECIMAL_DENOMINATOR:
        return value, False
    approx = value.limit_denominator(_MAX_DECIMAL_DENOMINATOR)
    logger.warning("decimal %s converted inexactly to %s", text, approx)
    return approx, True


def log_fraction(value: Fraction) -> float:
    """Natural logarithm of a positive rational, safe for huge numerators"""
    if value <= 0:
        raise ValueError("logarithm of a non-positive rational")
    return math.log(value.numerator) - math.log(value.denominator)


def fraction_to_json(value: Fraction) -> dict[str, int]:
    return {"num": value.numerator, "den": value.denominator}


def fraction_from_json(obj) -> Fraction:
    if isinstance(obj, dict):
        return Fraction(int(obj["num"]), int(obj["den"]))
    if isinstance(obj, str):
        return parse_rational(obj)[0]
    return as_fraction(obj)
