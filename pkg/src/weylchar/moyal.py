"""Weyl-Moyal star product, graded symbol expansions, and the paired algebra.

The bidifferential operators are

    B_k(a, b) = (i/2)^k sum_{|alpha|+|beta|=k} (-1)^|beta| / (alpha! beta!)
                (d_x^alpha d_xi^beta a)(d_x^beta d_xi^alpha b)

with alpha, beta multi-indices over the n x-slots / n xi-slots.  B_0 is the
pointwise product and B_1 is i/2 times the Poisson bracket.  For polynomial
inputs the star product sum is finite and exact.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from itertools import product as iproduct
from math import factorial
from typing import Dict, List, Optional

from .errors import DepthTooShallow, NotInAlgebraA
from .exactnum import CRat, HALF_I
from .poly import MINUS_INF, PolyC
from .radial import HomTerm, RadialRat

DEFAULT_DEPTH_MARGIN = 3


@lru_cache(maxsize=None)
def _compositions(total: int, slots: int):
    """All tuples of `slots` non-negative ints summing to `total`."""
    if slots == 1:
        return ((total,),)
    out = []
    for first in range(total + 1):
        for rest in _compositions(total - first, slots - 1):
            out.append((first,) + rest)
    return tuple(out)


def _alpha_beta_pairs(k: int, n: int):
    for ka in range(k + 1):
        for alpha in _compositions(ka, n):
            for beta in _compositions(k - ka, n):
                yield alpha, beta


def moyal_term(a, b, k: int):
    """B_k(a, b) for PolyC / RadialRat / HomTerm inputs (i/2 factors included)."""
    if isinstance(a, HomTerm) and isinstance(b, HomTerm):
        return HomTerm(moyal_term(a.value, b.value, k), a.hdeg + b.hdeg - 2 * k)
    poly_in = isinstance(a, PolyC) and isinstance(b, PolyC)
    n = a.n
    zero = PolyC.zero(n) if poly_in else RadialRat.zero(n)
    if isinstance(a, PolyC) and a.degree() is not MINUS_INF and k > a.degree():
        return zero
    if isinstance(b, PolyC) and b.degree() is not MINUS_INF and k > b.degree():
        return zero
    acc = zero
    for alpha, beta in _alpha_beta_pairs(k, n):
        da = _deriv(a, alpha, beta)
        if not da:
            continue
        db = _deriv(b, beta, alpha)
        if not db:
            continue
        coef = Fraction((-1) ** sum(beta), _mfact(alpha) * _mfact(beta))
        acc = acc + da * db * CRat(coef)
    return acc * (HALF_I ** k)


def _deriv(p, alpha, beta):
    n = p.n
    full = tuple(alpha) + tuple(beta)
    return p.multi_derivative(full)


def _mfact(alpha) -> int:
    out = 1
    for a in alpha:
        out *= factorial(a)
    return out


def star_poly(a: PolyC, b: PolyC) -> PolyC:
    """Exact Moyal product of polynomials (finite sum)."""
    if a.n != b.n:
        raise ValueError("mixed half-dimensions")
    da, db = a.degree(), b.degree()
    if da is MINUS_INF or db is MINUS_INF:
        return PolyC.zero(a.n)
    out = PolyC.zero(a.n)
    for k in range(min(da, db) + 1):
        out = out + moyal_term(a, b, k)
    return out


def star_poly_power(a: PolyC, m: int) -> PolyC:
    out = PolyC.constant(a.n, 1)
    for _ in range(m):
        out = star_poly(out, a)
    return out


# ---------------------------------------------------------------------------
# step-2 polyhomogeneous expansions
# ---------------------------------------------------------------------------

class PhgExpansion:
    """Truncated step-2 polyhomogeneous expansion.

    Term j (j = 0..depth) is homogeneous of degree order_m - 2j.  ``closure``
    optionally carries an exact pointwise evaluator (see closures module).
    """

    __slots__ = ("n", "order_m", "depth", "terms", "closure")

    def __init__(self, n: int, order_m: int, depth: int,
                 terms: Dict[int, HomTerm] | None = None, closure=None):
        self.n = n
        self.order_m = order_m
        self.depth = depth
        self.terms: Dict[int, HomTerm] = {}
        if terms:
            for j, term in terms.items():
                if not term:
                    continue
                if j < 0 or j > depth:
                    raise ValueError(f"term index {j} outside 0..{depth}")
                if term.hdeg != order_m - 2 * j:
                    raise ValueError(
                        f"term {j} has hdeg {term.hdeg}, expected {order_m - 2 * j}")
                self.terms[j] = term
        self.closure = closure

    # -- constructors ------------------------------------------------------

    @staticmethod
    def from_poly(p: PolyC, order_m: int | None = None,
                  depth: int | None = None, closure="auto") -> "PhgExpansion":
        """Expansion of a polynomial; order defaults to its degree."""
        degs = list(p.degrees_present())
        if order_m is None:
            order_m = max(degs) if degs else 0
        if depth is None:
            depth = p.n + DEFAULT_DEPTH_MARGIN + max(0, order_m) // 2
        terms = {}
        for d in degs:
            j2 = order_m - d
            if j2 < 0 or j2 % 2:
                raise ValueError(f"degree {d} incompatible with order {order_m}")
            terms[j2 // 2] = HomTerm(RadialRat.from_poly(p.homogeneous_part(d)), d)
        exp = PhgExpansion(p.n, order_m, depth, terms)
        if closure == "auto":
            from .closures import Closure
            exp.closure = Closure.rational(RadialRat.from_poly(p))
        else:
            exp.closure = None if closure is None else closure
        return exp

    @staticmethod
    def zero(n: int, order_m: int = 0, depth: int | None = None) -> "PhgExpansion":
        if depth is None:
            depth = n + DEFAULT_DEPTH_MARGIN
        return PhgExpansion(n, order_m, depth, {})

    def term(self, j: int) -> HomTerm:
        if j in self.terms:
            return self.terms[j]
        return HomTerm(RadialRat.zero(self.n), self.order_m - 2 * j)

    def is_zero_expansion(self) -> bool:
        return not self.terms

    def is_polynomial(self) -> bool:
        return all(t.value.is_polynomial() for t in self.terms.values())

    def as_poly(self) -> PolyC:
        out = PolyC.zero(self.n)
        for t in self.terms.values():
            out = out + t.value.as_poly()
        return out

    def as_radial(self) -> RadialRat:
        out = RadialRat.zero(self.n)
        for t in self.terms.values():
            out = out + t.value
        return out

    def term_at_hdeg(self, hdeg: int) -> HomTerm:
        j2 = self.order_m - hdeg
        if j2 % 2 or j2 < 0:
            return HomTerm(RadialRat.zero(self.n), hdeg)
        return self.term(j2 // 2)

    def require_depth_for_hdeg(self, hdeg: int):
        j2 = self.order_m - hdeg
        if j2 >= 0 and j2 % 2 == 0 and j2 // 2 > self.depth:
            raise DepthTooShallow(
                f"need term at hdeg {hdeg} (j={j2 // 2}) but depth is {self.depth}")

    # -- linear structure ---------------------------------------------------

    def embed(self, order_m: int) -> "PhgExpansion":
        """Re-grade into a higher order with the same homogeneous content."""
        shift2 = order_m - self.order_m
        if shift2 < 0 or shift2 % 2:
            raise ValueError("can only embed into higher order of equal parity")
        shift = shift2 // 2
        terms = {j + shift: t for j, t in self.terms.items()}
        return PhgExpansion(self.n, order_m, self.depth + shift, terms, self.closure)

    def __add__(self, other: "PhgExpansion") -> "PhgExpansion":
        if self.order_m != other.order_m:
            target = max(self.order_m, other.order_m)
            return self.embed(target) + other.embed(target)
        depth = min(self.depth, other.depth)
        terms = {}
        for j in range(depth + 1):
            t = self.term(j) + other.term(j)
            if t:
                terms[j] = t
        from .closures import add_closures
        closure = add_closures(self.closure, other.closure)
        return PhgExpansion(self.n, self.order_m, depth, terms, closure)

    def __neg__(self):
        return self * CRat(-1)

    def __sub__(self, other):
        return self + (other * CRat(-1))

    def __mul__(self, c) -> "PhgExpansion":
        c = CRat.of(c)
        terms = {j: t.scaled(c) for j, t in self.terms.items()}
        closure = self.closure.scaled(c) if self.closure is not None else None
        return PhgExpansion(self.n, self.order_m, self.depth, terms, closure)

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, PhgExpansion):
            return NotImplemented
        if (self.n, self.order_m) != (other.n, other.order_m):
            return False
        depth = min(self.depth, other.depth)
        return all(self.term(j) == other.term(j) for j in range(depth + 1))

    def __repr__(self):
        body = ", ".join(f"j={j}: {t.value!r}" for j, t in sorted(self.terms.items()))
        return (f"PhgExpansion(n={self.n}, order={self.order_m}, "
                f"depth={self.depth}, {{{body}}})")


def iota(a: PhgExpansion) -> PhgExpansion:
    """Involution: term j picks up (-1)^j; order and depth preserved.

    The closure is mapped only when it is expansion-exact (rational class);
    otherwise the result carries no closure.
    """
    terms = {j: t.scaled(CRat((-1) ** j)) for j, t in a.terms.items()}
    closure = None
    if a.closure is not None and a.closure.is_rational():
        rr = RadialRat.zero(a.n)
        for j, t in terms.items():
            rr = rr + t.value
        from .closures import Closure
        closure = Closure.rational(rr)
    return PhgExpansion(a.n, a.order_m, a.depth, terms, closure)


def star_product(a: PhgExpansion, b: PhgExpansion) -> PhgExpansion:
    """Moyal product of expansions, truncated at the common depth."""
    if a.n != b.n:
        raise ValueError("mixed half-dimensions")
    depth = min(a.depth, b.depth)
    order = a.order_m + b.order_m
    terms: Dict[int, HomTerm] = {}
    for jc in range(depth + 1):
        acc = HomTerm(RadialRat.zero(a.n), order - 2 * jc)
        for ja, ta in a.terms.items():
            if ja > jc:
                continue
            for jb, tb in b.terms.items():
                k = jc - ja - jb
                if k < 0:
                    continue
                acc = acc + moyal_term(ta, tb, k)
        if acc:
            terms[jc] = acc
    from .closures import star_closures
    closure = star_closures(a.closure, b.closure, a.n)
    return PhgExpansion(a.n, order, depth, terms, closure)


# ---------------------------------------------------------------------------
# paired symbols
# ---------------------------------------------------------------------------

class PairedSymbol:
    """Pair (plus, minus) with minus.term(j) = (-1)^j plus.term(j).

    Schwartz-class deviations are allowed: the two closures may differ from
    the shared expansion by rapidly decaying parts.
    """

    __slots__ = ("plus", "minus")

    def __init__(self, plus: PhgExpansion, minus: PhgExpansion, validate: bool = True):
        if plus.n != minus.n or plus.order_m != minus.order_m:
            raise NotInAlgebraA("pair components must share n and order")
        if validate:
            depth = min(plus.depth, minus.depth)
            for j in range(depth + 1):
                want = plus.term(j).scaled(CRat((-1) ** j))
                if want != minus.term(j):
                    raise NotInAlgebraA(
                        f"term {j}: minus != (-1)^j * plus")
        self.plus = plus
        self.minus = minus

    @property
    def n(self) -> int:
        return self.plus.n

    @property
    def order_m(self) -> int:
        return self.plus.order_m

    @property
    def depth(self) -> int:
        return min(self.plus.depth, self.minus.depth)

    def __add__(self, other: "PairedSymbol") -> "PairedSymbol":
        return PairedSymbol(self.plus + other.plus, self.minus + other.minus,
                            validate=False)

    def __sub__(self, other: "PairedSymbol") -> "PairedSymbol":
        return self + other.scaled(CRat(-1))

    def scaled(self, c) -> "PairedSymbol":
        return PairedSymbol(self.plus * c, self.minus * c, validate=False)

    def combined(self) -> PhgExpansion:
        """w_plus - (-1)^n w_minus, the symbol the regularized trace eats."""
        sign = CRat((-1) ** self.n)
        return self.plus - self.minus * sign

    def __eq__(self, other):
        if not isinstance(other, PairedSymbol):
            return NotImplemented
        return self.plus == other.plus and self.minus == other.minus

    def __repr__(self):
        return f"PairedSymbol(plus={self.plus!r}, minus={self.minus!r})"


def make_paired(plus: PhgExpansion, minus: Optional[PhgExpansion] = None) -> PairedSymbol:
    """Build a pair; minus defaults to the involution image of plus.

    A closure-bearing plus whose closure is not expansion-exact needs an
    explicit minus (the Schwartz part of the partner is independent data).
    """
    if minus is None:
        if plus.closure is not None and not plus.closure.is_rational():
            raise NotInAlgebraA(
                "minus component must be given explicitly for non-rational closures")
        minus = iota(plus)
    return PairedSymbol(plus, minus, validate=True)


def pair_mul(u: PairedSymbol, w: PairedSymbol) -> PairedSymbol:
    """(u+, u-)(w+, w-) = (u+ # w+, w- # u-); compatibility is re-checked."""
    plus = star_product(u.plus, w.plus)
    minus = star_product(w.minus, u.minus)
    return PairedSymbol(plus, minus, validate=True)


def pair_power(u: PairedSymbol, k: int) -> PairedSymbol:
    out = pair_identity(u.n, depth=u.depth)
    for _ in range(k):
        out = pair_mul(out, u)
    return out


def pair_identity(n: int, depth: int | None = None) -> PairedSymbol:
    one = PhgExpansion.from_poly(PolyC.constant(n, 1), order_m=0, depth=depth)
    return make_paired(one)


def pair_commutator(u: PairedSymbol, w: PairedSymbol) -> PairedSymbol:
    return pair_mul(u, w) - pair_mul(w, u)


# ---------------------------------------------------------------------------
# resolvents of the harmonic oscillator symbol
# ---------------------------------------------------------------------------

def harmonic_resolvent_coeffs(n: int, gamma, depth: int) -> list:
    """Expansion of (Q - gamma)^(-1):  sum_m c_m Q^(-1-m), exact.

    From (Q - gamma) # r = 1 with Q # f = Q f - Lap(f)/4 on radial f:
    c_m = gamma c_(m-1) + (m-1)(m-n) c_(m-2).
    """
    g = CRat.of(gamma)
    c: list = [CRat(1)]
    for m in range(1, depth + 1):
        val = g * c[m - 1]
        if m >= 2:
            val = val + CRat((m - 1) * (m - n)) * c[m - 2]
        c.append(val)
    return c


def resolvent_expansion(n: int, gamma, depth: int | None = None,
                        order_m: int = -2) -> PhgExpansion:
    """Expansion of (Q - gamma)^(-1) with its resolvent-integral closure.

    ``order_m`` may be -2 (natural grading) or 0 (embedded, leading slot
    empty); the embedded form is the one whose involution partner matches
    -(Q + gamma)^(-1), i.e. the pair lies in the trace domain.
    """
    from .closures import Closure
    if order_m not in (-2, 0):
        raise ValueError("resolvent grading must be -2 or 0")
    if depth is None:
        depth = n + DEFAULT_DEPTH_MARGIN
    shift = 0 if order_m == -2 else 1
    coeffs = harmonic_resolvent_coeffs(n, gamma, depth)
    terms = {}
    for m, c in enumerate(coeffs):
        j = m + shift
        if j > depth:
            break
        if c:
            terms[j] = HomTerm(RadialRat.q_power(n, m + 1, c), -2 - 2 * m)
    closure = Closure.resolvent_of(n, complex(CRat.of(gamma)))
    return PhgExpansion(n, order_m, depth, terms, closure)


def resolvent_pair(n: int, gamma, depth: int | None = None) -> PairedSymbol:
    """The trace-domain pair ((Q-g)^(-1), -(Q+g)^(-1)), order-0 graded."""
    plus = resolvent_expansion(n, gamma, depth, order_m=0)
    minus_exp = iota(plus)
    minus = PhgExpansion(n, 0, minus_exp.depth, dict(minus_exp.terms))
    from .closures import Closure
    minus.closure = Closure.resolvent_of(
        n, complex(-CRat.of(gamma))).scaled(CRat(-1))
    return PairedSymbol(plus, minus, validate=True)


# ---------------------------------------------------------------------------
# matrices of paired symbols
# ---------------------------------------------------------------------------

class MatrixSymbol:
    """r x r matrix of paired symbols with uniform order and depth."""

    __slots__ = ("r", "entries")

    def __init__(self, entries: List[List[PairedSymbol]]):
        self.r = len(entries)
        orders = {e.order_m for row in entries for e in row}
        if len(orders) > 1:
            raise ValueError("entries must share one order")
        self.entries = entries

    @property
    def n(self):
        return self.entries[0][0].n

    @property
    def order_m(self):
        return self.entries[0][0].order_m

    @staticmethod
    def scalar(sym: PairedSymbol, r: int = 1) -> "MatrixSymbol":
        n, depth = sym.n, sym.depth
        zero_p = PhgExpansion.zero(n, sym.order_m, depth)
        zero = PairedSymbol(zero_p, zero_p, validate=False)
        return MatrixSymbol([[sym if i == j else zero for j in range(r)]
                             for i in range(r)])

    def __mul__(self, other: "MatrixSymbol") -> "MatrixSymbol":
        assert self.r == other.r
        out = []
        for i in range(self.r):
            row = []
            for j in range(self.r):
                acc = None
                for k in range(self.r):
                    term = pair_mul(self.entries[i][k], other.entries[k][j])
                    acc = term if acc is None else acc + term
                row.append(acc)
            out.append(row)
        return MatrixSymbol(out)

    def __add__(self, other: "MatrixSymbol") -> "MatrixSymbol":
        return MatrixSymbol([[a + b for a, b in zip(r1, r2)]
                             for r1, r2 in zip(self.entries, other.entries)])

    def __getitem__(self, ij):
        return self.entries[ij[0]][ij[1]]
