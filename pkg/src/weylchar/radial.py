"""Radial-rational coefficient class: finite sums  sum_i P_i * Q^(-k_i).

Q = |x|^2 + |xi|^2.  The class is closed under +, *, all partial derivatives
and under the Moyal bidifferential operators, and contains every expansion
term produced by the symbol calculus here (resolvents of Q, polynomials,
curvature Hamiltonians).

Canonical form: each k appears at most once and, for k > 0, the numerator
is reduced mod Q (no summand of P divisible by Q), so equality is structural.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Dict

import numpy as np

from .exactnum import CRat, sphere_monomial_moment
from .poly import PolyC


class RadialRat:
    __slots__ = ("n", "parts")

    def __init__(self, n: int, parts: Dict[int, PolyC] | None = None):
        self.n = n
        self.parts: Dict[int, PolyC] = {}
        if parts:
            for k, p in parts.items():
                self._accumulate(int(k), p)
            self._reduce()

    def _accumulate(self, k: int, p: PolyC):
        if k < 0:
            raise ValueError("negative Q-power index")
        if not p:
            return
        if k in self.parts:
            s = self.parts[k] + p
            if s:
                self.parts[k] = s
            else:
                del self.parts[k]
        else:
            self.parts[k] = p

    def _reduce(self):
        """Cancel common Q factors: for k > 0 write P = q*Q + r, fixpoint."""
        changed = True
        while changed:
            changed = False
            for k in sorted(self.parts.keys(), reverse=True):
                if k == 0:
                    continue
                p = self.parts.get(k)
                if p is None or not p:
                    self.parts.pop(k, None)
                    continue
                q, r = p.divmod_harmonic()
                if not q:
                    continue
                changed = True
                if r:
                    self.parts[k] = r
                else:
                    del self.parts[k]
                self._accumulate(k - 1, q)

    # -- constructors ---------------------------------------------------

    @staticmethod
    def from_poly(p: PolyC) -> "RadialRat":
        return RadialRat(p.n, {0: p})

    @staticmethod
    def q_power(n: int, k: int, coef=1) -> "RadialRat":
        """coef * Q^(-k) for k >= 0 (or coef * Q^k stored as polynomial for k < 0)."""
        if k >= 0:
            return RadialRat(n, {k: PolyC.constant(n, coef)})
        return RadialRat.from_poly(PolyC.harmonic(n) ** (-k) * CRat.of(coef))

    @staticmethod
    def zero(n: int) -> "RadialRat":
        return RadialRat(n)

    # -- ring ops ----------------------------------------------------------

    def _coerce(self, other) -> "RadialRat":
        if isinstance(other, RadialRat):
            if other.n != self.n:
                raise ValueError("mixed half-dimensions")
            return other
        if isinstance(other, PolyC):
            return RadialRat.from_poly(other)
        return RadialRat.from_poly(PolyC.constant(self.n, other))

    def __add__(self, other):
        other = self._coerce(other)
        out = RadialRat(self.n)
        for k, p in self.parts.items():
            out._accumulate(k, p)
        for k, p in other.parts.items():
            out._accumulate(k, p)
        out._reduce()
        return out

    __radd__ = __add__

    def __neg__(self):
        return RadialRat(self.n, {k: -p for k, p in self.parts.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __mul__(self, other):
        if isinstance(other, (int, Fraction, CRat)):
            return RadialRat(self.n, {k: p * CRat.of(other) for k, p in self.parts.items()})
        other = self._coerce(other)
        out = RadialRat(self.n)
        for k1, p1 in self.parts.items():
            for k2, p2 in other.parts.items():
                out._accumulate(k1 + k2, p1 * p2)
        out._reduce()
        return out

    __rmul__ = __mul__

    def __eq__(self, other):
        if isinstance(other, (int, Fraction, CRat, PolyC, RadialRat)):
            other = self._coerce(other)
            return self.parts == other.parts
        return NotImplemented

    def __bool__(self):
        return bool(self.parts)

    def __hash__(self):
        return hash((self.n, frozenset((k, hash(p)) for k, p in self.parts.items())))

    # -- calculus ------------------------------------------------------------

    def derivative(self, index: int) -> "RadialRat":
        n = self.n
        dq = PolyC.harmonic(n).derivative(index)   # 2 v_index
        out = RadialRat(n)
        for k, p in self.parts.items():
            out._accumulate(k, p.derivative(index))
            if k > 0:
                out._accumulate(k + 1, p * dq * CRat(-k))
        out._reduce()
        return out

    def multi_derivative(self, alpha) -> "RadialRat":
        r = self
        for idx, cnt in enumerate(alpha):
            for _ in range(cnt):
                r = r.derivative(idx)
                if not r:
                    return r
        return r

    # -- structure -------------------------------------------------------

    def is_polynomial(self) -> bool:
        return all(k == 0 for k in self.parts)

    def as_poly(self) -> PolyC:
        if not self.is_polynomial():
            raise ValueError("not a polynomial")
        return self.parts.get(0, PolyC.zero(self.n))

    def homogeneity(self):
        """The single homogeneity degree if homogeneous, else None."""
        degs = set()
        for k, p in self.parts.items():
            for d in p.degrees_present():
                degs.add(d - 2 * k)
        if not degs:
            return None
        return degs.pop() if len(degs) == 1 else None

    def homogeneous_component(self, hdeg: int) -> "RadialRat":
        out = RadialRat(self.n)
        for k, p in self.parts.items():
            part = p.homogeneous_part(hdeg + 2 * k)
            if part:
                out._accumulate(k, part)
        return out

    def sphere_restriction(self) -> PolyC:
        """Restriction to Q = 1 as a polynomial on the ambient sphere."""
        out = PolyC.zero(self.n)
        for p in self.parts.values():
            out = out + p
        return out

    def eval(self, pts: np.ndarray) -> np.ndarray:
        pts = np.asarray(pts, dtype=float)
        q = np.sum(pts * pts, axis=-1)
        out = np.zeros(pts.shape[:-1], dtype=complex)
        for k, p in self.parts.items():
            val = p.eval(pts)
            if k:
                val = val / q ** k
            out = out + val
        return out

    def __repr__(self):
        if not self.parts:
            return "RadialRat(0)"
        return " + ".join(
            f"[{p!r}]" + (f"*Q^-{k}" if k else "") for k, p in sorted(self.parts.items())
        )


class HomTerm:
    """A RadialRat of a single homogeneity degree under (x, xi) -> (s x, s xi)."""

    __slots__ = ("value", "hdeg")

    def __init__(self, value: RadialRat, hdeg: int):
        if isinstance(value, PolyC):
            value = RadialRat.from_poly(value)
        got = value.homogeneity()
        if value and got != hdeg:
            raise ValueError(f"value has homogeneity {got}, expected {hdeg}")
        self.value = value
        self.hdeg = hdeg

    @property
    def n(self) -> int:
        return self.value.n

    def derivative(self, index: int) -> "HomTerm":
        return HomTerm(self.value.derivative(index), self.hdeg - 1)

    def scaled(self, c) -> "HomTerm":
        return HomTerm(self.value * CRat.of(c), self.hdeg)

    def __add__(self, other: "HomTerm") -> "HomTerm":
        if other.hdeg != self.hdeg and other.value and self.value:
            raise ValueError("adding HomTerms of different degree")
        return HomTerm(self.value + other.value, self.hdeg)

    def __eq__(self, other):
        return (isinstance(other, HomTerm)
                and self.hdeg == other.hdeg and self.value == other.value)

    def __bool__(self):
        return bool(self.value)

    def eval(self, pts):
        return self.value.eval(pts)

    def sphere_average(self) -> CRat:
        """Exact integral over the unit sphere S^(2n-1), as coefficient of pi^n."""
        restr = self.value.sphere_restriction()
        re = Fraction(0)
        im = Fraction(0)
        for e, c in restr.terms.items():
            mom = sphere_monomial_moment(e)
            re += c.re * mom
            im += c.im * mom
        return CRat(re, im)

    def __repr__(self):
        return f"HomTerm({self.value!r}, hdeg={self.hdeg})"
