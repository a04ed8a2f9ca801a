"""Sign + natural-log-magnitude scalars for values far outside float range."""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import total_ordering

_LN10 = math.log(10.0)


@total_ordering
@dataclass(frozen=True)
class LogMagnitude:
    """Real number ``sign * exp(log)``; zero is ``sign=0, log=-inf``."""

    sign: int
    log: float

    def __post_init__(self):
        if self.sign not in (-1, 0, 1):
            raise ValueError(f"sign must be -1, 0 or 1, got {self.sign}")
        if self.sign == 0 and self.log != -math.inf:
            object.__setattr__(self, "log", -math.inf)
        if self.sign != 0 and (math.isnan(self.log) or self.log == math.inf):
            raise ValueError(f"invalid log-magnitude {self.log}")
        if self.sign != 0 and self.log == -math.inf:
            object.__setattr__(self, "sign", 0)

    @classmethod
    def zero(cls) -> "LogMagnitude":
        return cls(0, -math.inf)

    @classmethod
    def from_float(cls, x: float) -> "LogMagnitude":
        if x == 0:
            return cls.zero()
        if not math.isfinite(x):
            raise ValueError(f"cannot represent {x}")
        return cls(1 if x > 0 else -1, math.log(abs(x)))

    @classmethod
    def from_log(cls, log: float, sign: int = 1) -> "LogMagnitude":
        return cls(sign, log)

    @classmethod
    def from_log10(cls, log10: float, sign: int = 1) -> "LogMagnitude":
        return cls(sign, log10 * _LN10)

    @property
    def log10(self) -> float:
        return self.log / _LN10

    def __float__(self) -> float:
        if self.sign == 0:
            return 0.0
        if self.log > 709.78:
            return self.sign * math.inf
        return self.sign * math.exp(self.log)

    def to_float(self) -> float:
        return float(self)

    def __abs__(self):
        return LogMagnitude(abs(self.sign), self.log)

    def __neg__(self):
        return LogMagnitude(-self.sign, self.log)

    def __mul__(self, other):
        other = _coerce(other)
        return LogMagnitude(self.sign * other.sign, self.log + other.log)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = _coerce(other)
        if other.sign == 0:
            raise ZeroDivisionError("division by LogMagnitude zero")
        return LogMagnitude(self.sign * other.sign, self.log - other.log)

    def __rtruediv__(self, other):
        return _coerce(other) / self

    def __pow__(self, k: float):
        if self.sign == 0:
            return LogMagnitude.zero() if k > 0 else LogMagnitude(1, 0.0)
        if self.sign < 0 and float(k) != int(k):
            raise ValueError("non-integer power of a negative value")
        sign = -1 if (self.sign < 0 and int(k) % 2) else 1
        return LogMagnitude(sign, self.log * k)

    def __add__(self, other):
        other = _coerce(other)
        if self.sign == 0:
            return other
        if other.sign == 0:
            return self
        hi, lo = (self, other) if self.log >= other.log else (other, self)
        r = math.exp(lo.log - hi.log)
        s = 1.0 + r if hi.sign == lo.sign else 1.0 - r
        if s == 0.0:
            return LogMagnitude.zero()
        return LogMagnitude(hi.sign, hi.log + math.log(s))

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-_coerce(other))

    def __rsub__(self, other):
        return _coerce(other) - self

    def _key(self):
        return self.sign, self.log

    def __eq__(self, other):
        try:
            other = _coerce(other)
        except TypeError:
            return NotImplemented
        return self.sign == other.sign and (self.sign == 0 or self.log == other.log)

    def __lt__(self, other):
        other = _coerce(other)
        if self.sign != other.sign:
            return self.sign < other.sign
        if self.sign == 0:
            return False
        return self.log < other.log if self.sign > 0 else self.log > other.log

    def __hash__(self):
        return hash((self.sign, self.log if self.sign else None))

    def __repr__(self):
        if self.sign == 0:
            return "LogMagnitude(0)"
        return f"LogMagnitude({'-' if self.sign < 0 else ''}1e{self.log10:.6f})"


def _coerce(x) -> LogMagnitude:
    if isinstance(x, LogMagnitude):
        return x
    if isinstance(x, (int, float)):
        return LogMagnitude.from_float(float(x))
    raise TypeError(f"cannot combine LogMagnitude with {type(x).__name__}")


def log_double_factorial(n: int) -> float:
    """``log(n!!)`` for odd or even ``n >= -1``; ``(-1)!! = 0!! = 1``."""
    if n < -1:
        raise ValueError(f"double factorial undefined for {n}")
    if n <= 0:
        return 0.0
    if n % 2:
        k = (n + 1) // 2  # n = 2k - 1
        return math.lgamma(2 * k + 1) - k * math.log(2.0) - math.lgamma(k + 1)
    k = n // 2
    return k * math.log(2.0) + math.lgamma(k + 1)


def log_factorial(n: int) -> float:
    return math.lgamma(n + 1)
