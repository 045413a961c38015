"""Non-negative magnitudes stored by their natural logarithm.

The certification constants involve sinh of numbers around 1e23, far past
the range of a double.  A :class:`Magnitude` keeps ``log`` as the source of
truth and only exponentiates on request.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

Number = Union[int, float]


def log_sinh(x: float) -> float:
    """log(sinh x) for x > 0, accurate for tiny and huge x."""
    if not x > 0:
        raise ValueError(f"log_sinh needs x > 0, got {x}")
    return x + math.log(-math.expm1(-2.0 * x)) - math.log(2.0)


def log_cosh(x: float) -> float:
    x = abs(x)
    return x + math.log1p(math.exp(-2.0 * x)) - math.log(2.0)


def _log(x: Number) -> float:
    if x < 0 or math.isnan(x):
        raise ValueError(f"magnitudes are non-negative, got {x}")
    if x == 0:
        return -math.inf
    return math.log(x)


@dataclass(frozen=True, order=True)
class Magnitude:
    log: float

    @classmethod
    def of(cls, x: Number | "Magnitude") -> "Magnitude":
        if isinstance(x, Magnitude):
            return x
        return cls(_log(x))

    @classmethod
    def sinh(cls, x: float) -> "Magnitude":
        return cls(log_sinh(x))

    @property
    def value(self) -> float:
        """The magnitude as a float; ``inf`` when it overflows."""
        if self.log > 709.78:
            return math.inf
        return math.exp(self.log)

    def __float__(self) -> float:
        return self.value

    def __add__(self, other) -> "Magnitude":
        other = Magnitude.of(other)
        a, b = max(self.log, other.log), min(self.log, other.log)
        if a == -math.inf:
            return self
        if a == math.inf:
            return Magnitude(math.inf)
        return Magnitude(a + math.log1p(math.exp(b - a)))

    __radd__ = __add__

    def __mul__(self, other) -> "Magnitude":
        other = Magnitude.of(other)
        if -math.inf in (self.log, other.log):
            return Magnitude(-math.inf)
        return Magnitude(self.log + other.log)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "Magnitude":
        other = Magnitude.of(other)
        return Magnitude(self.log - other.log)

    def sqrt(self) -> "Magnitude":
        return Magnitude(0.5 * self.log)

    def minus(self, other) -> "Magnitude":
        """Difference self - other, which must be non-negative."""
        other = Magnitude.of(other)
        if other.log > self.log:
            raise ValueError("difference of magnitudes would be negative")
        if other.log == -math.inf:
            return self
        return Magnitude(self.log + math.log(-math.expm1(other.log - self.log)))

    def to_json(self) -> dict:
        v = self.value
        return {"value": v if math.isfinite(v) else None, "log": _json_float(self.log)}

    @classmethod
    def from_json(cls, obj) -> "Magnitude":
        if isinstance(obj, (int, float)):
            return cls.of(obj)
        log = obj.get("log")
        if log is None:
            return cls.of(float(obj["value"]))
        return cls(float(log))


def _json_float(x: float):
    if math.isfinite(x):
        return x
    return "inf" if x > 0 else "-inf"

