"""
ScaledValue: a real number stored as mantissa * e**log_shift.

Exponential divided differences over nodes of magnitude 700 and more leave
the double range long before their logarithm does. A ScaledValue keeps the
magnitude in `log_shift` (an integer-valued float) and a normalized
mantissa with |mantissa| in [1, e). The sign lives in the mantissa, and
zero is represented exactly as (0.0, 0.0).

Products, quotients and comparisons work on the logarithms and are exact up
to one rounding step. Sums rebase both operands onto the larger shift before
adding, so cancellation is never hidden by an overflowing intermediate.

Classes:
    ScaledValue: immutable scaled real.

Functions:
    common_frame(values): rebase several ScaledValues to one shared shift.
"""

import math
from dataclasses import dataclass

from exp_divdiff.errors import DomainError, RangeError

E = math.e
# Largest/smallest arguments accepted by math.exp without overflow/underflow to zero.
MAX_LOG = 709.782712893384
MIN_LOG = -745.1332191019412


@dataclass(frozen=True)
class ScaledValue:
    """
    Immutable real number mantissa * e**log_shift.

    Attributes:
        mantissa (float): signed, |mantissa| in [1, e) unless the value is zero.
        log_shift (float): integer-valued exponent of e.
    """
    mantissa: float
    log_shift: float

    @classmethod
    def zero(cls):
        return cls(0.0, 0.0)

    @classmethod
    def one(cls):
        return cls(1.0, 0.0)

    @classmethod
    def from_float(cls, value):
        """
        Build a ScaledValue from a finite float.

        Raises:
            DomainError: if the value is NaN or infinite.
        """
        value = float(value)
        if not math.isfinite(value):
            raise DomainError(f"cannot scale non-finite value {value!r}")
        if value == 0.0:
            return cls.zero()
        return cls._normalized(value, 0.0)

    @classmethod
    def from_log(cls, log_abs, sign=1):
        """
        Build a ScaledValue from log|x| and the sign of x.

        Args:
            log_abs (float): natural logarithm of the magnitude; -inf gives zero.
            sign (int): +1 or -1 (0 gives zero).

        Raises:
            RangeError: if log_abs is +inf or NaN.
        """
        if sign == 0 or log_abs == -math.inf:
            return cls.zero()
        if not math.isfinite(log_abs):
            raise RangeError(f"log magnitude {log_abs!r} is not representable")
        shift = math.floor(log_abs)
        mantissa = math.exp(log_abs - shift)
        if sign < 0:
            mantissa = -mantissa
        return cls._normalized(mantissa, float(shift))

    @classmethod
    def _normalized(cls, mantissa, log_shift):
        if mantissa == 0.0:
            return cls.zero()
        if not math.isfinite(mantissa) or not math.isfinite(log_shift):
            raise RangeError(f"scaled value ({mantissa!r}, {log_shift!r}) is not representable")
        magnitude = abs(mantissa)
        if magnitude < 1.0 or magnitude >= E:
            step = math.floor(math.log(magnitude))
            mantissa = mantissa * math.exp(-step)
            log_shift = log_shift + step
            magnitude = abs(mantissa)
        # one rounding step may leave the mantissa just outside [1, e)
        if magnitude >= E:
            mantissa, log_shift = mantissa / E, log_shift + 1.0
        elif magnitude < 1.0:
            mantissa, log_shift = mantissa * E, log_shift - 1.0
        if not math.isfinite(log_shift):
            raise RangeError("log shift overflow")
        return cls(mantissa, float(log_shift))

    @property
    def sign(self):
        if self.mantissa > 0:
            return 1
        if self.mantissa < 0:
            return -1
        return 0

    @property
    def is_zero(self):
        return self.mantissa == 0.0

    def log(self):
        """Natural logarithm of |value|; -inf for zero."""
        if self.is_zero:
            return -math.inf
        return math.log(abs(self.mantissa)) + self.log_shift

    @property
    def is_representable(self):
        """True when the value fits in a float without overflow."""
        return self.is_zero or self.log() < MAX_LOG

    def to_float(self):
        """
        Convert to a plain float; values below the underflow threshold become a signed zero.

        Raises:
            RangeError: if the magnitude exceeds the largest double.
        """
        if self.is_zero:
            return 0.0
        if self.log_shift > MAX_LOG:
            raise RangeError(f"value e**{self.log():.6g} overflows a double")
        if self.log_shift < MIN_LOG - 2:
            return math.copysign(0.0, self.mantissa)
        value = self.mantissa * math.exp(self.log_shift)
        if math.isinf(value):
            raise RangeError(f"value e**{self.log():.6g} overflows a double")
        return value

    def __float__(self):
        return self.to_float()

    def __neg__(self):
        return ScaledValue(-self.mantissa, self.log_shift)

    def __abs__(self):
        return ScaledValue(abs(self.mantissa), self.log_shift)

    def __mul__(self, other):
        other = _coerce(other)
        if self.is_zero or other.is_zero:
            return ScaledValue.zero()
        return ScaledValue._normalized(self.mantissa * other.mantissa, self.log_shift + other.log_shift)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = _coerce(other)
        if other.is_zero:
            raise ZeroDivisionError("division by a zero ScaledValue")
        if self.is_zero:
            return ScaledValue.zero()
        return ScaledValue._normalized(self.mantissa / other.mantissa, self.log_shift - other.log_shift)

    def __add__(self, other):
        other = _coerce(other)
        if self.is_zero:
            return other
        if other.is_zero:
            return self
        shift = max(self.log_shift, other.log_shift)
        mantissa = (self.mantissa * math.exp(self.log_shift - shift)
                    + other.mantissa * math.exp(other.log_shift - shift))
        return ScaledValue._normalized(mantissa, shift)

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-_coerce(other))

    def __rsub__(self, other):
        return _coerce(other) - self

    def _key(self):
        # total order on signed scaled values
        if self.is_zero:
            return (0, 0.0)
        return (self.sign, self.sign * self.log())

    def __lt__(self, other):
        return self._key() < _coerce(other)._key()

    def __le__(self, other):
        return self._key() <= _coerce(other)._key()

    def __gt__(self, other):
        return self._key() > _coerce(other)._key()

    def __ge__(self, other):
        return self._key() >= _coerce(other)._key()

    def rel_diff(self, other):
        """
        Relative difference |self - other| / max(|self|, |other|), computed in a common frame.
        """
        other = _coerce(other)
        if self.is_zero and other.is_zero:
            return 0.0
        shift, (a, b) = common_frame([self, other])
        return abs(a - b) / max(abs(a), abs(b))

    def __repr__(self):
        return f"ScaledValue(mantissa={self.mantissa!r}, log_shift={self.log_shift!r})"


def _coerce(value):
    if isinstance(value, ScaledValue):
        return value
    return ScaledValue.from_float(value)


def common_frame(values):
    """
    Rebase ScaledValues onto the largest log_shift among them.

    Args:
        values (Iterable[ScaledValue | float]): values to rebase.

    Returns:
        tuple[float, list[float]]: the shared shift and the mantissas in that frame,
        so that value_i = mantissa_i * e**shift.
    """
    values = [_coerce(v) for v in values]
    shifts = [v.log_shift for v in values if not v.is_zero]
    if not shifts:
        return 0.0, [0.0 for _ in values]
    shift = max(shifts)
    return shift, [v.mantissa * math.exp(v.log_shift - shift) if not v.is_zero else 0.0 for v in values]
