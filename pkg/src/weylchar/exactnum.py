"""Exact scalar arithmetic: complex rationals and the special numbers.

Everything downstream that claims an *exact* result (trace table, vacuum
identities, star products of polynomials) runs on these types.  Floating
point enters only through explicit ``complex()`` conversions.
"""

from __future__ import annotations

from fractions import Fraction
from math import comb, factorial, pi
from typing import Union

Rational = Union[int, Fraction]


class CRat:
    """Complex number with rational real and imaginary parts."""

    __slots__ = ("re", "im")

    def __init__(self, re: Rational = 0, im: Rational = 0):
        self.re = Fraction(re)
        self.im = Fraction(im)

    # -- constructors -------------------------------------------------

    @staticmethod
    def of(value) -> "CRat":
        if isinstance(value, CRat):
            return value
        if isinstance(value, (int, Fraction)):
            return CRat(value)
        raise TypeError(f"cannot build CRat from {type(value).__name__}")

    @staticmethod
    def i() -> "CRat":
        return CRat(0, 1)

    # -- ring operations ----------------------------------------------

    def __add__(self, other):
        if not isinstance(other, (int, Fraction, CRat)):
            return NotImplemented
        other = CRat.of(other)
        return CRat(self.re + other.re, self.im + other.im)

    __radd__ = __add__

    def __neg__(self):
        return CRat(-self.re, -self.im)

    def __sub__(self, other):
        if not isinstance(other, (int, Fraction, CRat)):
            return NotImplemented
        return self + (-CRat.of(other))

    def __rsub__(self, other):
        return CRat.of(other) + (-self)

    def __mul__(self, other):
        if not isinstance(other, (int, Fraction, CRat)):
            return NotImplemented
        other = CRat.of(other)
        return CRat(
            self.re * other.re - self.im * other.im,
            self.re * other.im + self.im * other.re,
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = CRat.of(other)
        d = other.re * other.re + other.im * other.im
        if d == 0:
            raise ZeroDivisionError("division by zero CRat")
        return CRat(
            (self.re * other.re + self.im * other.im) / d,
            (self.im * other.re - self.re * other.im) / d,
        )

    def __rtruediv__(self, other):
        return CRat.of(other) / self

    def __pow__(self, k: int):
        if k < 0:
            return CRat(1) / self ** (-k)
        out = CRat(1)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    # -- predicates / conversions --------------------------------------

    def __eq__(self, other):
        if isinstance(other, (int, Fraction, CRat)):
            other = CRat.of(other)
            return self.re == other.re and self.im == other.im
        return NotImplemented

    def __hash__(self):
        return hash((self.re, self.im))

    def __bool__(self):
        return self.re != 0 or self.im != 0

    def conjugate(self) -> "CRat":
        return CRat(self.re, -self.im)

    def __complex__(self):
        return complex(self.re) + 1j * complex(self.im)

    def __repr__(self):
        if self.im == 0:
            return f"CRat({self.re})"
        return f"CRat({self.re}, {self.im})"


ONE = CRat(1)
ZERO = CRat(0)
I = CRat(0, 1)
HALF_I = CRat(0, Fraction(1, 2))


class QiR2:
    """Element of Q(i, sqrt(2)): (a + b*sqrt2) with a, b in Q(i).

    Used only by the exact Weyl-quantization check, where matrix entries
    of position/momentum operators live in this field.
    """

    __slots__ = ("a", "b")

    def __init__(self, a=0, b=0):
        self.a = a if isinstance(a, CRat) else CRat.of(a)
        self.b = b if isinstance(b, CRat) else CRat.of(b)

    @staticmethod
    def of(value) -> "QiR2":
        if isinstance(value, QiR2):
            return value
        return QiR2(CRat.of(value))

    @staticmethod
    def sqrt2() -> "QiR2":
        return QiR2(0, 1)

    def __add__(self, other):
        other = QiR2.of(other)
        return QiR2(self.a + other.a, self.b + other.b)

    __radd__ = __add__

    def __neg__(self):
        return QiR2(-self.a, -self.b)

    def __sub__(self, other):
        return self + (-QiR2.of(other))

    def __mul__(self, other):
        other = QiR2.of(other)
        return QiR2(self.a * other.a + 2 * (self.b * other.b),
                    self.a * other.b + self.b * other.a)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = QiR2.of(other)
        # (a + b r)^-1 = (a - b r) / (a^2 - 2 b^2)
        d = other.a * other.a - 2 * (other.b * other.b)
        inv = QiR2(other.a / d, -other.b / d)
        return self * inv

    def __eq__(self, other):
        if isinstance(other, (int, Fraction, CRat, QiR2)):
            other = QiR2.of(other)
            return self.a == other.a and self.b == other.b
        return NotImplemented

    def __hash__(self):
        return hash((self.a, self.b))

    def __bool__(self):
        return bool(self.a) or bool(self.b)

    def __complex__(self):
        return complex(self.a) + complex(self.b) * 2 ** 0.5

    def __repr__(self):
        return f"QiR2({self.a!r}, {self.b!r})"


def bernoulli(k: int) -> Fraction:
    """B_k (convention B_1 = -1/2) via sum_{j<=m} C(m+1, j) B_j = 0."""
    if k < 0:
        raise ValueError("k must be >= 0")
    row = [Fraction(1)]
    for m in range(1, k + 1):
        acc = Fraction(0)
        for j in range(m):
            acc += comb(m + 1, j) * row[j]
        row.append(-acc / (m + 1))
    return row[k]


def zeta_neg(k: int) -> Fraction:
    """Riemann zeta at -k for integer k >= 0, exact."""
    if k < 0:
        raise ValueError("k must be >= 0")
    if k == 0:
        return Fraction(-1, 2)
    return -bernoulli(k + 1) / (k + 1)


def gamma_half(twice: int) -> Fraction:
    """Gamma(twice/2) / pi^(1/2 if twice odd else 0), exact rational.

    For even ``twice`` this is the ordinary factorial Gamma(m); for odd
    ``twice`` the sqrt(pi) factor is stripped so the result is rational.
    """
    if twice <= 0:
        raise ValueError("argument must be positive")
    if twice % 2 == 0:
        return Fraction(factorial(twice // 2 - 1))
    # Gamma(1/2) = sqrt(pi); Gamma(z+1) = z Gamma(z)
    out = Fraction(1)
    z = Fraction(1, 2)
    while 2 * z < twice:
        out *= z
        z += 1
    return out


def sphere_monomial_moment(alpha: tuple) -> Fraction:
    """Integral of prod v_i^alpha_i over the unit sphere S^(d-1), divided by pi^(d/2).

    Classical moment formula: 2 * prod Gamma((a_i+1)/2) / Gamma((|a|+d)/2).
    Zero for any odd exponent.  d = len(alpha).  The returned rational is
    the coefficient of pi^(d/2); d is even in all uses here so pi^(d/2) is
    an integer power of pi.
    """
    d = len(alpha)
    if any(a % 2 for a in alpha):
        return Fraction(0)
    if d % 2:
        raise ValueError("odd ambient dimension not supported")
    num = Fraction(2)
    for a in alpha:
        num *= gamma_half(a + 1)          # each contributes sqrt(pi)
    den = gamma_half(sum(alpha) + d)      # integer argument, no pi
    return num / den


def sphere_surface(d: int) -> float:
    """Surface measure of the unit sphere S^(d-1)."""
    return float(sphere_monomial_moment((0,) * d)) * pi ** (d // 2)
