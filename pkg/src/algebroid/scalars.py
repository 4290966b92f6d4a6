"""Exact scalar arithmetic: rationals and quadratic extensions Q(sqrt(d)).

Plain rationals are `fractions.Fraction`; adjoining a square root gives `Quad`,
a pair p + q*sqrt(d) with p, q rational and d a fixed square-free integer > 1.
Operations never evaluate sqrt(d) numerically.  Results with q == 0 demote to
`Fraction`, so purely rational computations stay rational end to end.
"""

from __future__ import annotations

import re
from fractions import Fraction
from typing import Union


class DivisionByZero(ZeroDivisionError):
    pass


class MixedFieldContext(TypeError):
    """Two quadratic scalars with different discriminants in one operation."""


Rational = Union[int, Fraction]
Scalar = Union[int, Fraction, "Quad"]


def _sqfree(d: int) -> bool:
    if d < 2:
        return False
    k = 2
    while k * k <= d:
        if d % (k * k) == 0:
            return False
        k += 1
    return True


class Quad:
    """p + q*sqrt(d) with exact rational p, q."""

    __slots__ = ("p", "q", "d")

    def __init__(self, p: Rational, q: Rational, d: int):
        if not _sqfree(d):
            raise ValueError(f"discriminant must be square-free and > 1, got {d}")
        self.p = Fraction(p)
        self.q = Fraction(q)
        self.d = d

    # -- helpers -----------------------------------------------------------

    def _coerce(self, other) -> "Quad":
        if isinstance(other, Quad):
            if other.d != self.d:
                raise MixedFieldContext(
                    f"cannot mix sqrt({self.d}) with sqrt({other.d})"
                )
            return other
        if isinstance(other, (int, Fraction)):
            return Quad(other, 0, self.d)
        return NotImplemented  # type: ignore[return-value]

    @staticmethod
    def _demote(p: Fraction, q: Fraction, d: int) -> Scalar:
        return Quad(p, q, d) if q else p

    # -- arithmetic --------------------------------------------------------

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return self._demote(self.p + o.p, self.q + o.q, self.d)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return self._demote(self.p - o.p, self.q - o.q, self.d)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return self._demote(o.p - self.p, o.q - self.q, self.d)

    def __mul__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return self._demote(
            self.p * o.p + self.d * self.q * o.q,
            self.p * o.q + self.q * o.p,
            self.d,
        )

    __rmul__ = __mul__

    def inverse(self) -> Scalar:
        # (p + q*sqrt(d))^-1 = (p - q*sqrt(d)) / (p^2 - d q^2); the norm is
        # nonzero for nonzero values because d is not a rational square.
        n = self.p * self.p - self.d * self.q * self.q
        if n == 0:
            raise DivisionByZero("inverse of zero")
        return self._demote(self.p / n, -self.q / n, self.d)

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return self * o.inverse()

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return o * self.inverse()

    def __neg__(self):
        return Quad(-self.p, -self.q, self.d)

    def __pos__(self):
        return self

    # -- comparison / hashing ----------------------------------------------

    def __eq__(self, other):
        if isinstance(other, Quad):
            return self.d == other.d and self.p == other.p and self.q == other.q
        if isinstance(other, (int, Fraction)):
            return self.q == 0 and self.p == other
        return NotImplemented

    def __hash__(self):
        if self.q == 0:
            return hash(self.p)
        return hash((self.p, self.q, self.d))

    def __bool__(self):
        return bool(self.p) or bool(self.q)

    def __repr__(self):
        return format_scalar(self)


def is_zero(x: Scalar) -> bool:
    return not x


def recip(x: Scalar) -> Scalar:
    if isinstance(x, Quad):
        return x.inverse()
    if x == 0:
        raise DivisionByZero("inverse of zero")
    return Fraction(1) / x


def field_arithmetic(x: Scalar, y: Scalar, op: str) -> Scalar:
    """Exact add/sub/mul/div; raises DivisionByZero and MixedFieldContext."""
    if op == "add":
        return x + y
    if op == "sub":
        return x - y
    if op == "mul":
        return x * y
    if op == "div":
        return x * recip(y)
    raise ValueError(f"unknown op {op!r}")


# -- parsing / formatting ---------------------------------------------------

_RAT = r"-?\d+(?:/\d+)?"
_TERM = re.compile(
    rf"^\s*(?P<rat>{_RAT})?\s*"
    rf"(?:(?P<sign>[+-])?\s*(?:(?P<coef>{_RAT})\s*\*\s*)?sqrt\((?P<d>\d+)\))?\s*$"
)


def parse_scalar(text: Union[str, int]) -> Scalar:
    """Parse "3", "-1/2", "sqrt(3)", "1/2+1/2*sqrt(3)", "1-sqrt(2)"."""
    if isinstance(text, int):
        return Fraction(text)
    m = _TERM.match(text)
    if not m or (m.group("rat") is None and m.group("d") is None):
        raise ValueError(f"cannot parse scalar {text!r}")
    p = Fraction(m.group("rat")) if m.group("rat") else Fraction(0)
    if m.group("d") is None:
        return p
    q = Fraction(m.group("coef")) if m.group("coef") else Fraction(1)
    if m.group("sign") == "-":
        q = -q
    return Quad._demote(p, q, int(m.group("d")))


def format_scalar(x: Scalar) -> str:
    if isinstance(x, Quad):
        parts = []
        if x.p:
            parts.append(str(x.p))
        if x.q == 1:
            root = f"sqrt({x.d})"
        elif x.q == -1:
            root = f"-sqrt({x.d})"
        else:
            root = f"{x.q}*sqrt({x.d})"
        if parts and x.q > 0:
            parts.append("+" + root)
        else:
            parts.append(root)
        return "".join(parts)
    return str(Fraction(x))
