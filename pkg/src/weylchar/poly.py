"""Sparse polynomials on phase space R^(2n) with exact complex-rational coefficients.

Variables are ordered (x_1..x_n, xi_1..xi_n); a term is keyed by its exponent
tuple.  Zero coefficients are never stored, so equality is structural.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Dict, Iterable, Tuple

import numpy as np

from .exactnum import CRat

Exponent = Tuple[int, ...]

#: degree of the zero polynomial
MINUS_INF = float("-inf")


class PolyC:
    __slots__ = ("n", "terms")

    def __init__(self, n: int, terms: Dict[Exponent, CRat] | None = None):
        if n < 1:
            raise ValueError("half-dimension n must be >= 1")
        self.n = n
        self.terms: Dict[Exponent, CRat] = {}
        if terms:
            for e, c in terms.items():
                c = CRat.of(c)
                if not c:
                    continue
                if len(e) != 2 * n:
                    raise ValueError("exponent length must be 2n")
                self.terms[tuple(e)] = c

    # -- constructors --------------------------------------------------

    @staticmethod
    def constant(n: int, c) -> "PolyC":
        return PolyC(n, {(0,) * (2 * n): CRat.of(c)})

    @staticmethod
    def zero(n: int) -> "PolyC":
        return PolyC(n)

    @staticmethod
    def variable(n: int, index: int) -> "PolyC":
        """index 0..n-1 -> x_{index+1}; index n..2n-1 -> xi_{index-n+1}."""
        e = [0] * (2 * n)
        e[index] = 1
        return PolyC(n, {tuple(e): CRat(1)})

    @staticmethod
    def x(n: int, j: int) -> "PolyC":
        return PolyC.variable(n, j - 1)

    @staticmethod
    def xi(n: int, j: int) -> "PolyC":
        return PolyC.variable(n, n + j - 1)

    @staticmethod
    def harmonic(n: int) -> "PolyC":
        """Q = sum x_j^2 + xi_j^2."""
        terms = {}
        for k in range(2 * n):
            e = [0] * (2 * n)
            e[k] = 2
            terms[tuple(e)] = CRat(1)
        return PolyC(n, terms)

    # -- ring structure --------------------------------------------------

    def _coerce(self, other) -> "PolyC":
        if isinstance(other, PolyC):
            if other.n != self.n:
                raise ValueError("mixed half-dimensions")
            return other
        return PolyC.constant(self.n, other)

    def __add__(self, other):
        other = self._coerce(other)
        out = dict(self.terms)
        for e, c in other.terms.items():
            s = out.get(e, CRat(0)) + c
            if s:
                out[e] = s
            else:
                out.pop(e, None)
        return PolyC(self.n, out)

    __radd__ = __add__

    def __neg__(self):
        return PolyC(self.n, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) + (-self)

    def __mul__(self, other):
        if not isinstance(other, PolyC):
            c = CRat.of(other)
            return PolyC(self.n, {e: v * c for e, v in self.terms.items()})
        other = self._coerce(other)
        out: Dict[Exponent, CRat] = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                s = out.get(e, CRat(0)) + c1 * c2
                if s:
                    out[e] = s
                else:
                    out.pop(e, None)
        return PolyC(self.n, out)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative power of a polynomial")
        out = PolyC.constant(self.n, 1)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def __eq__(self, other):
        if isinstance(other, (int, Fraction, CRat)):
            other = PolyC.constant(self.n, other)
        if not isinstance(other, PolyC):
            return NotImplemented
        return self.n == other.n and self.terms == other.terms

    def __hash__(self):
        return hash((self.n, frozenset(self.terms.items())))

    def __bool__(self):
        return bool(self.terms)

    # -- calculus ----------------------------------------------------------

    def derivative(self, index: int) -> "PolyC":
        out = {}
        for e, c in self.terms.items():
            if e[index] == 0:
                continue
            e2 = list(e)
            e2[index] -= 1
            out[tuple(e2)] = c * e[index]
        return PolyC(self.n, out)

    def multi_derivative(self, alpha: Exponent) -> "PolyC":
        p = self
        for idx, k in enumerate(alpha):
            for _ in range(k):
                p = p.derivative(idx)
                if not p:
                    return p
        return p

    def degree(self):
        if not self.terms:
            return MINUS_INF
        return max(sum(e) for e in self.terms)

    def is_homogeneous(self, deg: int) -> bool:
        return all(sum(e) == deg for e in self.terms)

    def homogeneous_part(self, deg: int) -> "PolyC":
        return PolyC(self.n, {e: c for e, c in self.terms.items() if sum(e) == deg})

    def degrees_present(self) -> Iterable[int]:
        return sorted({sum(e) for e in self.terms})

    def conjugate(self) -> "PolyC":
        return PolyC(self.n, {e: c.conjugate() for e, c in self.terms.items()})

    # -- substitution and evaluation ----------------------------------------

    def substitute_linear(self, mat) -> "PolyC":
        """Exact precomposition with a linear map: returns p(A v).

        ``mat`` is a 2n x 2n array-like of rationals; variable v_k is
        replaced by (A v)_k = sum_l A[k][l] v_l.
        """
        m = 2 * self.n
        rows = []
        for k in range(m):
            rowpoly = PolyC.zero(self.n)
            for l in range(m):
                a = mat[k][l] if not hasattr(mat, "shape") else mat[k, l]
                a = Fraction(a)
                if a:
                    rowpoly = rowpoly + PolyC.variable(self.n, l) * CRat.of(a)
            rows.append(rowpoly)
        out = PolyC.zero(self.n)
        for e, c in self.terms.items():
            term = PolyC.constant(self.n, c)
            for k, p in enumerate(e):
                if p:
                    term = term * rows[k] ** p
            out = out + term
        return out

    def eval(self, pts: np.ndarray) -> np.ndarray:
        """Evaluate at float points, shape (..., 2n) -> complex array (...)."""
        pts = np.asarray(pts, dtype=float)
        out = np.zeros(pts.shape[:-1], dtype=complex)
        for e, c in self.terms.items():
            mono = np.ones(pts.shape[:-1])
            for k, p in enumerate(e):
                if p:
                    mono = mono * pts[..., k] ** p
            out = out + complex(c) * mono
        return out

    # -- radial structure ---------------------------------------------------

    def divmod_harmonic(self) -> Tuple["PolyC", "PolyC"]:
        """Division by Q with leading term x_1^2: self = q * Q + r.

        Single-divisor division, so the remainder (no term with x_1-exponent
        >= 2) is unique and the reduced form is canonical.
        """
        q = PolyC.zero(self.n)
        r = PolyC.zero(self.n)
        work = dict(self.terms)
        m = 2 * self.n
        while work:
            e, c = work.popitem()
            if not c:
                continue
            if e[0] < 2:
                cur = r.terms.get(e, CRat(0)) + c
                if cur:
                    r.terms[e] = cur
                else:
                    r.terms.pop(e, None)
                continue
            # x_1^2 * e' -> use x_1^2 = Q - sum_{k>0} v_k^2
            e_red = list(e)
            e_red[0] -= 2
            e_red = tuple(e_red)
            cur = q.terms.get(e_red, CRat(0)) + c
            if cur:
                q.terms[e_red] = cur
            else:
                q.terms.pop(e_red, None)
            for k in range(1, m):
                e2 = list(e_red)
                e2[k] += 2
                e2 = tuple(e2)
                cur = work.get(e2, CRat(0)) - c
                if cur:
                    work[e2] = cur
                else:
                    work.pop(e2, None)
        return q, r

    def as_radial_polynomial(self):
        """If self is a polynomial in Q, return its coefficient list [c_0, c_1, ...]
        with self = sum c_k Q^k; otherwise None."""
        coeffs = []
        p = self
        guard = 0
        while p:
            q, r = p.divmod_harmonic()
            const = r.terms.get((0,) * (2 * self.n))
            if r.terms and (len(r.terms) > 1 or const is None):
                return None
            coeffs.append(const if const is not None else CRat(0))
            p = q
            guard += 1
            if guard > 200:
                return None
        return coeffs if coeffs else [CRat(0)]

    def __repr__(self):
        if not self.terms:
            return "PolyC(0)"
        names = [f"x{j+1}" for j in range(self.n)] + [f"xi{j+1}" for j in range(self.n)]
        parts = []
        for e, c in sorted(self.terms.items()):
            mono = "*".join(
                f"{names[k]}^{p}" if p > 1 else names[k]
                for k, p in enumerate(e) if p
            )
            cs = repr(c)[5:-1]
            parts.append(f"({cs})" + (f"*{mono}" if mono else ""))
        return " + ".join(parts)


def poly_mul(a: PolyC, b: PolyC) -> PolyC:
    """Exact product in canonical form."""
    return a * b


def sp_check(mat, n: int, tol: float | None = None) -> bool:
    """phi^T Omega + Omega phi = 0 for the standard Omega on (x, xi) coordinates."""
    m = np.asarray(mat, dtype=float)
    omega = standard_omega(n)
    resid = m.T @ omega + omega @ m
    if tol is None:
        return np.allclose(resid, 0.0, atol=1e-12)
    return bool(np.max(np.abs(resid)) <= tol)


def standard_omega(n: int) -> np.ndarray:
    omega = np.zeros((2 * n, 2 * n))
    for j in range(n):
        omega[j, n + j] = 1.0
        omega[n + j, j] = -1.0
    return omega
