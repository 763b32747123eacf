"""Two's-complement fixed-point arithmetic with two integer bits.

Values are plain integers with a virtual LSB weight of ``2**-(n-2)`` for an
``n``-bit word, covering [-2, 2).  Multiplication produces an exact wide
product whose low ``n-2`` bits are discarded under one of three rounding
strategies; additions are performed at ``n`` bits.  Out-of-range results
saturate and set a sticky overflow flag instead of wrapping, so range
violations stay observable without exceptions.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction


class Rounding(str, Enum):
    TRUNCATION = "truncation"
    NEAREST = "nearest"
    NEAREST_EVEN = "nearest_even"


@dataclass(frozen=True)
class FixedPointFormat:
    """Word width and rounding strategy; fractional width is ``total_bits - 2``."""

    total_bits: int
    rounding: Rounding = Rounding.NEAREST

    def __post_init__(self) -> None:
        if self.total_bits < 3:
            raise ValueError("need at least 3 bits (2 integer + 1 fractional)")
        if not isinstance(self.rounding, Rounding):
            object.__setattr__(self, "rounding", Rounding(self.rounding))

    @property
    def fractional_bits(self) -> int:
        return self.total_bits - 2

    @property
    def lsb(self) -> float:
        return 2.0 ** -self.fractional_bits

    @property
    def min_raw(self) -> int:
        return -(1 << (self.total_bits - 1))

    @property
    def max_raw(self) -> int:
        return (1 << (self.total_bits - 1)) - 1

    @property
    def min_value(self) -> float:
        return self.min_raw * self.lsb

    @property
    def max_value(self) -> float:
        return self.max_raw * self.lsb


@dataclass(frozen=True)
class FixedPointValue:
    """Immutable fixed-point number: ``value = raw * 2**-(n-2)``.

    ``overflow`` is the sticky saturation flag; it propagates through every
    arithmetic operation that consumes the value.
    """

    raw: int
    fmt: FixedPointFormat
    overflow: bool = False

    @property
    def value(self) -> float:
        return self.raw / (1 << self.fmt.fractional_bits)

    def __add__(self, other: "FixedPointValue") -> "FixedPointValue":
        return add(self, other)

    def __sub__(self, other: "FixedPointValue") -> "FixedPointValue":
        return sub(self, other)

    def __mul__(self, other: "FixedPointValue") -> "FixedPointValue":
        return mul(self, other)

    def __neg__(self) -> "FixedPointValue":
        return negate(self)


def _saturate(raw: int, fmt: FixedPointFormat) -> tuple[int, bool]:
    if raw > fmt.max_raw:
        return fmt.max_raw, True
    if raw < fmt.min_raw:
        return fmt.min_raw, True
    return raw, False


def round_reduce(wide: int, shift: int, mode: Rounding) -> int:
    """Drop the low ``shift`` bits of an exact product.

    truncation: arithmetic right shift (towards -inf).
    nearest: ties away from zero.
    nearest_even: ties to the even LSB.
    """
    if shift == 0:
        return wide
    if mode is Rounding.TRUNCATION:
        return wide >> shift
    half = 1 << (shift - 1)
    if mode is Rounding.NEAREST:
        if wide >= 0:
            return (wide + half) >> shift
        return -((-wide + half) >> shift)
    q = wide >> shift
    rem = wide - (q << shift)
    if rem > half or (rem == half and (q & 1)):
        return q + 1
    return q


def _round_fraction(x: Fraction, mode: Rounding) -> int:
    floor = x.numerator // x.denominator
    if mode is Rounding.TRUNCATION:
        return floor
    rem = x - floor
    half = Fraction(1, 2)
    if mode is Rounding.NEAREST:
        if x >= 0:
            return floor + (1 if rem >= half else 0)
        return -_round_fraction(-x, mode)
    if rem > half or (rem == half and (floor & 1)):
        return floor + 1
    return floor


def from_real(x: float, fmt: FixedPointFormat) -> FixedPointValue:
    """Quantize a real number under the format's rounding mode.

    Inputs beyond [-2, 2) saturate and set the overflow flag.
    """
    scaled = Fraction(x) * (1 << fmt.fractional_bits)
    raw = _round_fraction(scaled, fmt.rounding)
    raw, ovf = _saturate(raw, fmt)
    return FixedPointValue(raw, fmt, ovf)


def _check_formats(a: FixedPointValue, b: FixedPointValue) -> None:
    if a.fmt != b.fmt:
        raise ValueError(f"format mismatch: {a.fmt} vs {b.fmt}")


def add(a: FixedPointValue, b: FixedPointValue) -> FixedPointValue:
    _check_formats(a, b)
    raw, ovf = _saturate(a.raw + b.raw, a.fmt)
    return FixedPointValue(raw, a.fmt, ovf or a.overflow or b.overflow)


def sub(a: FixedPointValue, b: FixedPointValue) -> FixedPointValue:
    _check_formats(a, b)
    raw, ovf = _saturate(a.raw - b.raw, a.fmt)
    return FixedPointValue(raw, a.fmt, ovf or a.overflow or b.overflow)


def negate(a: FixedPointValue) -> FixedPointValue:
    raw, ovf = _saturate(-a.raw, a.fmt)
    return FixedPointValue(raw, a.fmt, ovf or a.overflow)


def mul(a: FixedPointValue, b: FixedPointValue) -> FixedPointValue:
    """Exact wide product reduced back to ``n`` bits by the format's rounding."""
    _check_formats(a, b)
    wide = a.raw * b.raw
    raw = round_reduce(wide, a.fmt.fractional_bits, a.fmt.rounding)
    raw, ovf = _saturate(raw, a.fmt)
    return FixedPointValue(raw, a.fmt, ovf or a.overflow or b.overflow)


def raw_to_bytes(raw: int, total_bits: int) -> bytes:
    """Two's-complement little-endian encoding at the word's byte width."""
    width = (total_bits + 7) // 8
    return (raw & ((1 << (8 * width)) - 1)).to_bytes(width, "little")


def raw_from_bytes(data: bytes, total_bits: int) -> int:
    width = (total_bits + 7) // 8
    if len(data) != width:
        raise ValueError(f"expected {width} bytes, got {len(data)}")
    raw = int.from_bytes(data, "little")
    if raw & (1 << (8 * width - 1)):
        raw -= 1 << (8 * width)
    if not -(1 << (total_bits - 1)) <= raw < (1 << (total_bits - 1)):
        raise ValueError(f"value {raw} outside {total_bits}-bit two's-complement range")
    return raw
