"""Tagged time quantities.

All public latency functions take and return :class:`Duration` so that a
value in seconds can never be silently added to one in microseconds.
"""
from __future__ import annotations

import math
from functools import total_ordering
from numbers import Real


@total_ordering
class Duration:
    """An immutable span of time stored in seconds.

    Build one with :func:`seconds`, :func:`us` or :func:`ns` and read it back
    with the matching property. Arithmetic is closed over durations; the
    ratio of two durations is a plain float.
    """

    __slots__ = ("_s",)

    def __init__(self, seconds: float):
        if isinstance(seconds, Duration):
            raise TypeError("use the Duration directly instead of wrapping it")
        object.__setattr__(self, "_s", float(seconds))

    def __setattr__(self, name, value):
        raise AttributeError("Duration is immutable")

    def __reduce__(self):
        return (Duration, (self._s,))

    @property
    def s(self) -> float:
        return self._s

    @property
    def us(self) -> float:
        return self._s * 1e6

    @property
    def ns(self) -> float:
        return self._s * 1e9

    def to_ns_int(self) -> int:
        """Round to the nearest integer nanosecond (simulator clock)."""
        return int(round(self._s * 1e9))

    def __add__(self, other):
        if not isinstance(other, Duration):
            return NotImplemented
        return Duration(self._s + other._s)

    def __sub__(self, other):
        if not isinstance(other, Duration):
            return NotImplemented
        return Duration(self._s - other._s)

    def __mul__(self, factor):
        if isinstance(factor, Duration) or not isinstance(factor, Real):
            return NotImplemented
        return Duration(self._s * float(factor))

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Duration):
            return self._s / other._s
        if isinstance(other, Real):
            return Duration(self._s / float(other))
        return NotImplemented

    def __neg__(self):
        return Duration(-self._s)

    def __eq__(self, other):
        if not isinstance(other, Duration):
            return NotImplemented
        return self._s == other._s

    def __lt__(self, other):
        if not isinstance(other, Duration):
            return NotImplemented
        return self._s < other._s

    def __hash__(self):
        return hash(("Duration", self._s))

    def __bool__(self):
        return self._s != 0.0

    def __repr__(self):
        return f"Duration({self.us:g} us)"

    def isclose(self, other: Duration, rel_tol=1e-9, abs_tol_s=0.0) -> bool:
        return math.isclose(self._s, other._s, rel_tol=rel_tol, abs_tol=abs_tol_s)


ZERO = Duration(0.0)


def seconds(x: float) -> Duration:
    return Duration(x)


def us(x: float) -> Duration:
    return Duration(x * 1e-6)


def ns(x: float) -> Duration:
    return Duration(x * 1e-9)
