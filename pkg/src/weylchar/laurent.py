"""Truncated Laurent series in one variable t.

Coefficients are any field-like scalars (Fraction, CRat, complex); exact and
floating instances never need to mix inside one series.  A series knows the
honest truncation ``order``: coefficients are stored for t^lead .. t^order
and every operation propagates the truncation consistently.
"""

from __future__ import annotations

from fractions import Fraction
from math import factorial
from typing import Callable, List

#: default truncation margin beyond the constant term
DEFAULT_ORDER = 4


class LaurentT:
    __slots__ = ("lead", "coeffs", "order")

    def __init__(self, lead: int, coeffs: List, order: int | None = None):
        if order is None:
            order = lead + len(coeffs) - 1
        if order - lead + 1 != len(coeffs):
            raise ValueError("coeffs length must equal order - lead + 1")
        self.lead = lead
        self.coeffs = list(coeffs)
        self.order = order
        self._normalize()

    def _normalize(self):
        while self.coeffs and _is_zero(self.coeffs[0]) and self.lead < self.order:
            self.coeffs.pop(0)
            self.lead += 1

    # -- constructors ---------------------------------------------------

    @staticmethod
    def zero(order: int = DEFAULT_ORDER) -> "LaurentT":
        return LaurentT(order, [0 * Fraction(1)], order)

    @staticmethod
    def const(c, order: int = DEFAULT_ORDER) -> "LaurentT":
        return LaurentT(0, [c] + [c * 0] * order, order)

    @staticmethod
    def t_power(k: int, order: int = DEFAULT_ORDER, one=Fraction(1)) -> "LaurentT":
        return LaurentT(k, [one] + [one * 0] * (order - k), order)

    @staticmethod
    def from_fn(fn: Callable[[int], object], lead: int, order: int) -> "LaurentT":
        return LaurentT(lead, [fn(k) for k in range(lead, order + 1)], order)

    # -- access ---------------------------------------------------------

    def coeff(self, k: int):
        if k > self.order:
            raise ValueError(f"t^{k} beyond truncation order {self.order}")
        if k < self.lead:
            return 0 * self.coeffs[0] if self.coeffs else 0
        return self.coeffs[k - self.lead]

    def truncate(self, order: int) -> "LaurentT":
        if order >= self.order:
            return self
        keep = order - self.lead + 1
        if keep <= 0:
            return LaurentT(order, [0 * self.coeffs[0]], order)
        return LaurentT(self.lead, self.coeffs[:keep], order)

    def map(self, fn) -> "LaurentT":
        return LaurentT(self.lead, [fn(c) for c in self.coeffs], self.order)

    def is_zero(self) -> bool:
        return all(_is_zero(c) for c in self.coeffs)

    # -- arithmetic ------------------------------------------------------

    def __add__(self, other):
        if not isinstance(other, LaurentT):
            other = LaurentT.const(other, self.order)
        order = min(self.order, other.order)
        lead = min(self.lead, other.lead)
        coeffs = []
        for k in range(lead, order + 1):
            a = self.coeff(k) if k >= self.lead else 0
            b = other.coeff(k) if k >= other.lead else 0
            coeffs.append(a + b)
        return LaurentT(lead, coeffs, order)

    __radd__ = __add__

    def __neg__(self):
        return LaurentT(self.lead, [-c for c in self.coeffs], self.order)

    def __sub__(self, other):
        if not isinstance(other, LaurentT):
            other = LaurentT.const(other, self.order)
        return self + (-other)

    def __rsub__(self, other):
        return LaurentT.const(other, self.order) + (-self)

    def __mul__(self, other):
        if not isinstance(other, LaurentT):
            return LaurentT(self.lead, [c * other for c in self.coeffs], self.order)
        if self.is_zero() or other.is_zero():
            return LaurentT.zero(min(self.order + other.lead, other.order + self.lead))
        order = min(self.order + other.lead, other.order + self.lead)
        lead = self.lead + other.lead
        coeffs = [0 * (self.coeffs[0] * other.coeffs[0])] * (order - lead + 1)
        for i, a in enumerate(self.coeffs):
            if _is_zero(a):
                continue
            for j, b in enumerate(other.coeffs):
                k = lead + i + j
                if k > order:
                    break
                coeffs[k - lead] = coeffs[k - lead] + a * b
        return LaurentT(lead, coeffs, order)

    __rmul__ = __mul__

    def inverse(self) -> "LaurentT":
        """Inverse of a series with invertible leading coefficient."""
        if self.is_zero():
            raise ZeroDivisionError("inverse of zero series")
        c0 = self.coeffs[0]
        if _is_zero(c0):
            raise ZeroDivisionError("leading coefficient vanished before order cutoff")
        m = len(self.coeffs)
        one = c0 / c0
        inv0 = one / c0
        # u = self / t^lead is a unit power series; invert mod t^m
        u = self.coeffs
        out = [inv0] + [0 * inv0] * (m - 1)
        for k in range(1, m):
            acc = 0 * inv0
            for j in range(1, k + 1):
                acc = acc + u[j] * out[k - j]
            out[k] = -inv0 * acc
        return LaurentT(-self.lead, out, -self.lead + m - 1)

    def __truediv__(self, other):
        if isinstance(other, LaurentT):
            return self * other.inverse()
        return LaurentT(self.lead, [c / other for c in self.coeffs], self.order)

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        one = _one_like(self.coeffs[0]) if self.coeffs else Fraction(1)
        result = LaurentT.const(one, self.order - self.lead)
        for _ in range(k):
            result = result * self
        return result

    # -- analytic helpers ---------------------------------------------------

    def log1(self) -> "LaurentT":
        """log of a power series with constant term 1 (lead 0)."""
        if self.lead != 0:
            raise ValueError("log1 needs lead 0")
        one = _one_like(self.coeffs[0])
        if not _is_zero(self.coeffs[0] - one):
            raise ValueError("log1 needs constant term 1")
        h = self - LaurentT.const(one, self.order)
        out = LaurentT.zero(self.order)
        hp = LaurentT.const(one, self.order)
        sign = 1
        for k in range(1, self.order + 1):
            hp = hp * h
            if hp.is_zero():
                break
            out = out + hp * Fraction(sign, k)
            sign = -sign
        return out

    def exp0(self) -> "LaurentT":
        """exp of a power series with zero constant term (lead >= 1)."""
        if self.lead < 1 and not self.is_zero():
            raise ValueError("exp0 needs vanishing constant term")
        one = Fraction(1)
        out = LaurentT.const(one, self.order)
        hp = LaurentT.const(one, self.order)
        for k in range(1, self.order + 1):
            hp = hp * self
            if hp.is_zero():
                break
            out = out + hp * Fraction(1, factorial(k))
        return out

    def eval(self, t: float):
        return sum(complex(c) * t ** (self.lead + k) for k, c in enumerate(self.coeffs))

    def __repr__(self):
        parts = [f"({c})*t^{self.lead + k}" for k, c in enumerate(self.coeffs)
                 if not _is_zero(c)]
        body = " + ".join(parts) if parts else "0"
        return f"LaurentT[{body} + O(t^{self.order + 1})]"


def _is_zero(c) -> bool:
    try:
        return c == 0
    except TypeError:
        return False


def _one_like(c):
    if isinstance(c, complex):
        return 1.0 + 0j
    if isinstance(c, float):
        return 1.0
    return Fraction(1)


# -- standard exact series -------------------------------------------------

def sinh_series(order: int) -> LaurentT:
    return LaurentT.from_fn(
        lambda k: Fraction(1, factorial(k)) if k % 2 == 1 else Fraction(0), 0, order)


def cosh_series(order: int) -> LaurentT:
    return LaurentT.from_fn(
        lambda k: Fraction(1, factorial(k)) if k % 2 == 0 else Fraction(0), 0, order)


def exp_series(order: int) -> LaurentT:
    return LaurentT.from_fn(lambda k: Fraction(1, factorial(k)), 0, order)


def tanh_series(order: int) -> LaurentT:
    # both factors known through t^(order+1) to keep the quotient honest
    return (sinh_series(order + 2) / cosh_series(order + 2)).truncate(order)


def artanh_over_u_series(order: int) -> LaurentT:
    """arctanh(u)/u = sum u^(2k) / (2k+1)."""
    return LaurentT.from_fn(
        lambda k: Fraction(1, k + 1) if k % 2 == 0 else Fraction(0), 0, order)
