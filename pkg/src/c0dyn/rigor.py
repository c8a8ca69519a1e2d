"""Exact scalars and rigorous rational enclosures.

All scalars are :class:`fractions.Fraction` (always reduced, positive
denominator).  Quantities that involve ``exp(-x)`` are carried as
:class:`Enclosure` pairs with rational endpoints; nothing here ever touches
floating point.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Union

Rational = Fraction


class EnclosureError(ValueError):
    """Raised for arguments outside the supported enclosure domain."""


def as_rational(value) -> Fraction:
    """Coerce ints, Fractions and ``"p/q"`` strings to a Fraction.

    Floats are refused: they would silently smuggle rounding into exact code.
    """
    if isinstance(value, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return parse_rational(value)
    raise TypeError(f"cannot convert {type(value).__name__} to an exact rational")


def parse_rational(text: str) -> Fraction:
    text = text.strip()
    if not text:
        raise ValueError("empty rational literal")
    if "/" in text:
        p, _, q = text.partition("/")
        num, den = int(p), int(q)
        if den == 0:
            raise ValueError(f"zero denominator in {text!r}")
        return Fraction(num, den)
    if any(c in text for c in ".eE"):
        raise ValueError(f"decimal literal {text!r} not allowed; write p/q")
    return Fraction(int(text))


def format_rational(value: Fraction) -> str:
    """Serialize as ``p/q`` (always with an explicit denominator)."""
    value = as_rational(value)
    return f"{value.numerator}/{value.denominator}"


@dataclass(frozen=True)
class Enclosure:
    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        object.__setattr__(self, "lo", as_rational(self.lo))
        object.__setattr__(self, "hi", as_rational(self.hi))
        if self.lo > self.hi:
            raise EnclosureError(f"empty enclosure [{self.lo}, {self.hi}]")

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    def contains(self, value) -> bool:
        return self.lo <= as_rational(value) <= self.hi


@dataclass(frozen=True)
class Exact:
    """A measure value known exactly."""

    value: Fraction

    def __post_init__(self):
        object.__setattr__(self, "value", as_rational(self.value))
        if self.value < 0:
            raise ValueError(f"negative measure value {self.value}")

    @property
    def lo(self) -> Fraction:
        return self.value

    @property
    def hi(self) -> Fraction:
        return self.value

    def to_json(self) -> dict:
        return {"exact": format_rational(self.value)}


@dataclass(frozen=True)
class Interval:
    """A measure value known only up to a certified rational enclosure."""

    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        object.__setattr__(self, "lo", as_rational(self.lo))
        object.__setattr__(self, "hi", as_rational(self.hi))
        if self.lo < 0:
            raise ValueError(f"negative lower bound {self.lo}")
        if self.lo > self.hi:
            raise EnclosureError(f"empty interval [{self.lo}, {self.hi}]")

    @classmethod
    def from_enclosure(cls, enc: Enclosure) -> "Interval":
        return cls(enc.lo, enc.hi)

    def to_json(self) -> dict:
        return {"lo": format_rational(self.lo), "hi": format_rational(self.hi)}


MeasureValue = Union[Exact, Interval]


def measure_value_from_json(obj: dict) -> MeasureValue:
    if "exact" in obj:
        return Exact(parse_rational(obj["exact"]))
    return Interval(parse_rational(obj["lo"]), parse_rational(obj["hi"]))


def exp_neg_partial_sum(x: Fraction, order: int) -> Fraction:
    """Taylor partial sum ``sum_{j=0}^{order} (-x)^j / j!``, exactly."""
    x = as_rational(x)
    total = Fraction(0)
    term = Fraction(1)
    for j in range(order + 1):
        if j:
            term = term * (-x) / j
        total += term
    return total


def exp_neg_enclosure(x, width_bound) -> Enclosure:
    """Enclose ``exp(-x)`` for ``0 < x <= 1`` to within ``width_bound``.

    For such x the Taylor terms alternate and shrink in magnitude, so odd
    partial sums lie below the limit and even ones above it.  The pair
    ``(S_{2j+1}, S_{2j})`` is deepened until it is narrow enough.
    """
    x = as_rational(x)
    width_bound = as_rational(width_bound)
    if not (0 < x <= 1):
        raise EnclosureError(f"x must lie in (0, 1], got {x}")
    if width_bound <= 0:
        raise EnclosureError(f"width bound must be positive, got {width_bound}")

    # running partial sum and the next term, advanced two orders at a time
    even = Fraction(1)          # S_0
    term = -x                   # term of order 1
    order = 1
    while True:
        odd = even + term       # S_{order}, order odd
        if even - odd <= width_bound:
            return Enclosure(odd, even)
        term = term * (-x) / (order + 1)
        even = odd + term       # S_{order+1}
        term = term * (-x) / (order + 2)
        order += 2


def interval_product(values: Iterable[MeasureValue]) -> MeasureValue:
    """Multiply nonnegative measure values; exact only if every factor is."""
    lo = Fraction(1)
    hi = Fraction(1)
    exact = True
    for v in values:
        if isinstance(v, Exact):
            lo *= v.value
            hi *= v.value
        elif isinstance(v, Interval):
            exact = False
            lo *= v.lo
            hi *= v.hi
        else:
            raise TypeError(f"not a measure value: {v!r}")
    if exact:
        return Exact(lo)
    return Interval(lo, hi)
