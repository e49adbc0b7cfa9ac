"""Exact scalars: rationals and the quadratic field Q(sqrt 3).

Rationals are plain :class:`fractions.Fraction` values.  :class:`Q3` holds
``a + b*sqrt(3)`` with rational ``a`` and ``b`` and interoperates with ``int``
and ``Fraction`` operands, so code written against Fractions keeps working
when a parameter such as ``w = sqrt(3) - 1`` enters the computation.
"""

from __future__ import annotations

import math
import re
from fractions import Fraction
from functools import total_ordering
from typing import Union

Scalar = Union[int, Fraction, "Q3"]

__all__ = [
    "Fraction",
    "Q3",
    "Scalar",
    "SQRT3",
    "canonical_params",
    "format_scalar",
    "parse_scalar",
    "q3_sign",
    "sign",
    "to_float",
    "tau",
]


@total_ordering
class Q3:
    """The number ``a + b*sqrt(3)``; immutable, hashable, exactly ordered."""

    __slots__ = ("_a", "_b")

    def __init__(self, a=0, b=0):
        self._a = Fraction(a)
        self._b = Fraction(b)

    @property
    def a(self) -> Fraction:
        return self._a

    @property
    def b(self) -> Fraction:
        return self._b

    @classmethod
    def coerce(cls, x) -> Q3:
        if isinstance(x, Q3):
            return x
        if isinstance(x, (int, Fraction)):
            return cls(x, 0)
        return NotImplemented

    def is_rational(self) -> bool:
        return self._b == 0

    def conjugate(self) -> Q3:
        return Q3(self._a, -self._b)

    def norm(self) -> Fraction:
        """Field norm ``a^2 - 3 b^2``; zero only for zero."""
        return self._a * self._a - 3 * self._b * self._b

    def sign(self) -> int:
        sa = (self._a > 0) - (self._a < 0)
        sb = (self._b > 0) - (self._b < 0)
        if sb == 0:
            return sa
        if sa == 0 or sa == sb:
            return sb
        # opposite signs: whichever of a^2 and 3b^2 is larger wins
        diff = self._a * self._a - 3 * self._b * self._b
        return sa if diff > 0 else sb

    def __float__(self) -> float:
        return float(self._a) + float(self._b) * math.sqrt(3.0)

    def __bool__(self) -> bool:
        return bool(self._a) or bool(self._b)

    def __hash__(self) -> int:
        if self._b == 0:
            return hash(self._a)
        return hash((self._a, self._b))

    def __eq__(self, other) -> bool:
        o = Q3.coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return self._a == o._a and self._b == o._b

    def __lt__(self, other) -> bool:
        o = Q3.coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return (self - o).sign() < 0

    def __neg__(self) -> Q3:
        return Q3(-self._a, -self._b)

    def __pos__(self) -> Q3:
        return self

    def __abs__(self) -> Q3:
        return -self if self.sign() < 0 else self

    def __add__(self, other) -> Q3:
        o = Q3.coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return Q3(self._a + o._a, self._b + o._b)

    __radd__ = __add__

    def __sub__(self, other) -> Q3:
        o = Q3.coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return Q3(self._a - o._a, self._b - o._b)

    def __rsub__(self, other) -> Q3:
        o = Q3.coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return o - self

    def __mul__(self, other) -> Q3:
        o = Q3.coerce(other)
        if o is NotImplemented:
            return NotImplemented
        a, b, c, d = self._a, self._b, o._a, o._b
        return Q3(a * c + 3 * b * d, a * d + b * c)

    __rmul__ = __mul__

    def inverse(self) -> Q3:
        n = self.norm()
        if n == 0:
            raise ZeroDivisionError("division by zero in Q(sqrt 3)")
        return Q3(self._a / n, -self._b / n)

    def __truediv__(self, other) -> Q3:
        o = Q3.coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return self * o.inverse()

    def __rtruediv__(self, other) -> Q3:
        o = Q3.coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return o * self.inverse()

    def __repr__(self) -> str:
        return f"Q3({self._a!s}, {self._b!s})"

    def __str__(self) -> str:
        return format_scalar(self)


SQRT3 = Q3(0, 1)


def sign(x: Scalar) -> int:
    if isinstance(x, Q3):
        return x.sign()
    return (x > 0) - (x < 0)


def q3_sign(x: Scalar) -> int:
    """Exact sign of ``x``; never touches floating point."""
    return sign(x)


def to_float(x: Scalar) -> float:
    return float(x)


def canonical_params() -> tuple[Q3, Q3]:
    """Return ``(lambda*, w*) = ((3 - sqrt3)/2, sqrt3 - 1)``."""
    return Q3(Fraction(3, 2), Fraction(-1, 2)), Q3(-1, 1)


def tau(lam: Scalar) -> Scalar:
    """Branch threshold ``(2 lam - 1)/(1 - lam)`` of the permissible ranges."""
    return (2 * lam - 1) / (1 - lam)


def simplify(x: Scalar) -> Scalar:
    """Demote a rational-valued Q3 to Fraction."""
    if isinstance(x, Q3) and x.is_rational():
        return x.a
    if isinstance(x, int):
        return Fraction(x)
    return x


def format_scalar(x: Scalar) -> str:
    """Text encoding: ``p/q`` for rationals, ``p/q+r/s√3`` otherwise."""
    x = simplify(x)
    if not isinstance(x, Q3):
        return str(Fraction(x))
    a, b = x.a, x.b
    bs = f"{b}√3"
    if a == 0:
        return bs
    return f"{a}{'+' if b > 0 else ''}{bs}"


_RAT = r"[+-]?\d+(?:\.\d+)?(?:/\d+)?"
_Q3_RE = re.compile(
    rf"^\s*(?:(?P<a>{_RAT})(?=[+-]|\s*$))?\s*"
    rf"(?:(?P<b>[+-]?(?:\d+(?:\.\d+)?(?:/\d+)?)?)\s*(?:√3|sqrt3|r3))?\s*$"
)

_ALIASES = {
    "lambda*": canonical_params()[0],
    "λ*": canonical_params()[0],
    "w*": canonical_params()[1],
}


def parse_scalar(text: str) -> Scalar:
    """Parse the text encoding produced by :func:`format_scalar`.

    Accepts ``3/2``, ``0.25``, ``-1+1√3``, ``3/2-1/2√3``, ``√3`` (``sqrt3``
    works as an ASCII spelling) and the aliases ``lambda*`` and ``w*``.
    """
    s = text.strip().replace(" ", "")
    if s in _ALIASES:
        return _ALIASES[s]
    if not s:
        raise ValueError("empty scalar")
    if not any(tag in s for tag in ("√3", "sqrt3", "r3")):
        return Fraction(s)
    m = _Q3_RE.match(s)
    if m is None:
        raise ValueError(f"cannot parse scalar {text!r}")
    a = Fraction(m.group("a")) if m.group("a") else Fraction(0)
    bt = m.group("b")
    if bt in (None, "", "+"):
        b = Fraction(1)
    elif bt == "-":
        b = Fraction(-1)
    else:
        b = Fraction(bt)
    return simplify(Q3(a, b))
