"""Exact dyadic rationals: integers scaled by a power of two.

Every quantity in the forward-error calculus is of the form n * 2**e with
integer n, so this representation is closed under +, -, * and under the two
auxiliary operations the calculus needs (power-of-two ceiling, rounding to b
significant bits).  Using exact arithmetic here means the derived thresholds
are reproducible bit for bit and never depend on float behaviour.
"""

from __future__ import annotations

from fractions import Fraction

__all__ = ["Dyadic", "pow2_ceil", "round_to_bits"]


def _strip_twos(n: int) -> tuple[int, int]:
    """Return (odd_part, twos) with n == odd_part * 2**twos (n != 0)."""
    twos = (n & -n).bit_length() - 1
    return n >> twos, twos


class Dyadic:
    """An exact number n * 2**e, stored normalised (n odd, or n == e == 0)."""

    __slots__ = ("n", "e")

    def __init__(self, n: int = 0, e: int = 0):
        if not isinstance(n, int) or not isinstance(e, int):
            raise TypeError("Dyadic components must be int")
        if n == 0:
            self.n, self.e = 0, 0
        else:
            odd, twos = _strip_twos(n)
            self.n, self.e = odd, e + twos

    # -- constructors -------------------------------------------------

    @classmethod
    def from_float(cls, x: float) -> "Dyadic":
        if x != x or x in (float("inf"), float("-inf")):
            raise ValueError(f"cannot represent {x!r} as a dyadic rational")
        num, den = float(x).as_integer_ratio()
        return cls(num, -(den.bit_length() - 1))

    @classmethod
    def coerce(cls, x) -> "Dyadic":
        if isinstance(x, Dyadic):
            return x
        if isinstance(x, int):
            return cls(x)
        if isinstance(x, float):
            return cls.from_float(x)
        raise TypeError(f"cannot coerce {type(x).__name__} to Dyadic")

    # -- views --------------------------------------------------------

    def as_fraction(self) -> Fraction:
        if self.e >= 0:
            return Fraction(self.n << self.e)
        return Fraction(self.n, 1 << -self.e)

    def __float__(self) -> float:
        # Exact when representable; otherwise correctly rounded by Fraction.
        f = self.as_fraction()
        return f.numerator / f.denominator if abs(self.e) < 500 else float(f)

    def is_integer(self) -> bool:
        return self.e >= 0 or self.n == 0

    def as_int(self) -> int:
        if not self.is_integer():
            raise ValueError(f"{self!r} is not an integer")
        return self.n << self.e if self.n else 0

    @property
    def is_power_of_two(self) -> bool:
        return self.n == 1

    def msb_exponent(self) -> int:
        """Largest k with 2**k <= |self| (self must be nonzero)."""
        if self.n == 0:
            raise ValueError("msb_exponent of zero")
        return abs(self.n).bit_length() - 1 + self.e

    # -- arithmetic ---------------------------------------------------

    def __add__(self, other) -> "Dyadic":
        o = Dyadic.coerce(other)
        if self.n == 0:
            return o
        if o.n == 0:
            return self
        e = min(self.e, o.e)
        return Dyadic((self.n << (self.e - e)) + (o.n << (o.e - e)), e)

    __radd__ = __add__

    def __neg__(self) -> "Dyadic":
        return Dyadic(-self.n, self.e)

    def __sub__(self, other) -> "Dyadic":
        return self + (-Dyadic.coerce(other))

    def __rsub__(self, other) -> "Dyadic":
        return (-self) + other

    def __mul__(self, other) -> "Dyadic":
        o = Dyadic.coerce(other)
        return Dyadic(self.n * o.n, self.e + o.e)

    __rmul__ = __mul__

    def __abs__(self) -> "Dyadic":
        return Dyadic(abs(self.n), self.e)

    def __pow__(self, k: int) -> "Dyadic":
        if not isinstance(k, int) or k < 0:
            raise ValueError("only non-negative integer powers")
        return Dyadic(self.n ** k, self.e * k) if k else Dyadic(1)

    # -- comparisons --------------------------------------------------

    def _cmp(self, other) -> int:
        d = self - Dyadic.coerce(other)
        return (d.n > 0) - (d.n < 0)

    def __eq__(self, other) -> bool:
        if not isinstance(other, (Dyadic, int, float)):
            return NotImplemented
        return self._cmp(other) == 0

    def __lt__(self, other):
        return self._cmp(other) < 0

    def __le__(self, other):
        return self._cmp(other) <= 0

    def __gt__(self, other):
        return self._cmp(other) > 0

    def __ge__(self, other):
        return self._cmp(other) >= 0

    def __hash__(self):
        return hash(self.as_fraction())

    def __bool__(self):
        return self.n != 0

    def __repr__(self):
        return f"Dyadic({self.n}, {self.e})"

    def __str__(self):
        if self.e >= 0:
            return str(self.n << self.e) if self.n else "0"
        return f"{self.n}*2^{self.e}"


def pow2_ceil(x: Dyadic | int | float) -> Dyadic:
    """Smallest power of two >= x, for x > 0; exact powers map to themselves."""
    d = Dyadic.coerce(x)
    if d.n <= 0:
        raise ValueError(f"pow2_ceil requires a positive argument, got {d!r}")
    if d.is_power_of_two:
        return d
    return Dyadic(1, d.msb_exponent() + 1)


def round_to_bits(x: Dyadic, bits: int) -> Dyadic:
    """Round x to `bits` significant bits, ties to even (IEEE-style).

    The result's mantissa fits in `bits` bits; rounding acts on the magnitude
    and is symmetric in sign.  bits >= 1.
    """
    if bits < 1:
        raise ValueError("bits must be >= 1")
    if x.n == 0:
        return x
    # Target exponent: keep bits `bits` of the magnitude.
    width = abs(x.n).bit_length()
    drop = width - bits
    if drop <= 0:
        return x
    neg = x.n < 0
    mag = -x.n if neg else x.n
    kept = mag >> drop
    rem = mag - (kept << drop)
    half = 1 << (drop - 1)
    if rem > half or (rem == half and (kept & 1)):
        kept += 1
    return Dyadic(-kept if neg else kept, x.e + drop)
