"""Pointwise closures for symbol expansions and their exact compositions.

A closure is the actual function on phase space behind a truncated
expansion.  Three ingredient buckets cover every model class used here:

* ``base``      -- a RadialRat, exactly equal to the expansion sum
                   ("rational" class),
* ``gauss``     -- radial Gaussians  sum_k c_k Q^k exp(-lam Q), lam > 0
                   ("gaussian" class; Schwartz, invisible to the expansion),
* ``resolvent`` -- terms  c * int_0^inf e^(g u) cosh(u)^-n tanh(u)^j Q^k
                   e^(-Q tanh u) du  ("resolvent-integral" class; the Weyl
                   inverse of Q - g lives here, for Re g < n).

Star products are composed exactly where the classes close (rational x
rational with a polynomial factor, gaussian x gaussian, resolvent x radial
polynomial); any other combination yields no closure.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from math import comb, factorial
from typing import Dict, List, Optional, Tuple

import numpy as np

from .exactnum import CRat
from .poly import PolyC
from .radial import RadialRat
from .quad import de_nodes_01

_EXACT = (int, Fraction, CRat)


def _nmul(a, b):
    if isinstance(a, _EXACT) and isinstance(b, _EXACT):
        return CRat.of(a) * CRat.of(b)
    return _tocplx(a) * _tocplx(b)


def _nadd(a, b):
    if isinstance(a, _EXACT) and isinstance(b, _EXACT):
        return CRat.of(a) + CRat.of(b)
    return _tocplx(a) + _tocplx(b)


def _ndiv(a, b):
    if isinstance(a, _EXACT) and isinstance(b, _EXACT):
        return CRat.of(a) / CRat.of(b)
    return _tocplx(a) / _tocplx(b)


def _tocplx(a):
    if isinstance(a, CRat):
        return complex(a)
    return complex(a)


class Closure:
    __slots__ = ("n", "base", "gauss", "resolvent")

    def __init__(self, n: int, base: RadialRat | None = None,
                 gauss: Dict | None = None, resolvent: List | None = None):
        self.n = n
        self.base = base if base is not None else RadialRat.zero(n)
        # gauss: {lam: [c_0, c_1, ...]} meaning sum_k c_k Q^k exp(-lam Q)
        self.gauss: Dict = {}
        if gauss:
            for lam, coeffs in gauss.items():
                self._gauss_accum(lam, coeffs)
        # resolvent: [(coef, gamma, j, k)]
        self.resolvent: List = list(resolvent) if resolvent else []

    # -- constructors --------------------------------------------------

    @staticmethod
    def rational(rr: RadialRat) -> "Closure":
        return Closure(rr.n, base=rr)

    @staticmethod
    def gaussian(n: int, lam, coeffs, base: RadialRat | None = None) -> "Closure":
        return Closure(n, base=base, gauss={lam: list(coeffs)})

    @staticmethod
    def resolvent_of(n: int, gamma, coef=1) -> "Closure":
        """Closure of coef * (Q - gamma)^(-1), valid for Re gamma < n."""
        if complex(gamma).real >= n:
            raise ValueError("resolvent closure needs Re gamma < n")
        return Closure(n, resolvent=[(CRat.of(coef) if isinstance(coef, _EXACT)
                                      else complex(coef), gamma, 0, 0)])

    # -- bucket upkeep ----------------------------------------------------

    def _gauss_accum(self, lam, coeffs):
        cur = self.gauss.get(lam)
        if cur is None:
            cur = []
            self.gauss[lam] = cur
        for k, c in enumerate(coeffs):
            while len(cur) <= k:
                cur.append(CRat(0))
            cur[k] = _nadd(cur[k], c)
        while cur and _iszero(cur[-1]):
            cur.pop()
        if not cur:
            del self.gauss[lam]

    def is_rational(self) -> bool:
        return not self.gauss and not self.resolvent

    def is_gaussian(self) -> bool:
        return not self.resolvent

    def tag(self) -> str:
        if self.resolvent:
            return "resolvent-integral"
        if self.gauss:
            return "gaussian"
        return "rational"

    def is_schwartz_only(self) -> bool:
        return not self.base

    # -- linear structure ---------------------------------------------------

    def scaled(self, c) -> "Closure":
        out = Closure(self.n, base=self.base * CRat.of(c) if isinstance(c, _EXACT)
                      else _scale_radial_float(self.base, c))
        for lam, coeffs in self.gauss.items():
            out._gauss_accum(lam, [_nmul(v, c) for v in coeffs])
        out.resolvent = [(_nmul(v, c), g, j, k) for v, g, j, k in self.resolvent]
        return out

    def __add__(self, other: "Closure") -> "Closure":
        out = Closure(self.n, base=self.base + other.base)
        for src in (self, other):
            for lam, coeffs in src.gauss.items():
                out._gauss_accum(lam, coeffs)
            out.resolvent.extend(src.resolvent)
        return out

    # -- evaluation -----------------------------------------------------------

    def eval(self, pts: np.ndarray) -> np.ndarray:
        pts = np.asarray(pts, dtype=float)
        q = np.sum(pts * pts, axis=-1)
        out = np.zeros(pts.shape[:-1], dtype=complex)
        if self.base:
            out += self.base.eval(pts)
        for lam, coeffs in self.gauss.items():
            pf = np.zeros_like(out)
            for k, c in enumerate(coeffs):
                pf += _tocplx(c) * q ** k
            out += pf * np.exp(-float(lam) * q)
        if self.resolvent:
            out += _resolvent_eval(self.n, self.resolvent, q)
        return out

    def __repr__(self):
        return (f"Closure({self.tag()}, base={self.base!r}, "
                f"gauss={{{len(self.gauss)} lams}}, res={len(self.resolvent)})")


def _iszero(c) -> bool:
    if isinstance(c, _EXACT):
        return CRat.of(c) == 0
    return c == 0


def _scale_radial_float(rr: RadialRat, c) -> RadialRat:
    if not rr:
        return rr
    raise TypeError("cannot scale an exact radial part by a float")


def add_closures(a: Optional[Closure], b: Optional[Closure]) -> Optional[Closure]:
    if a is None or b is None:
        return None
    return a + b


# ---------------------------------------------------------------------------
# exact star product of radial Gaussians
# ---------------------------------------------------------------------------
#
#   exp(-a Q) # exp(-b Q) = (1 + a b)^(-n) exp(-Q (a+b)/(1+ab))
#
# Polynomial prefactors are produced by differentiating in the parameters:
#   Q^p e^(-a Q) # Q^q e^(-b Q) = (-d/da)^p (-d/db)^q [ ... ].
# The derivative is extracted from a truncated bivariate Taylor expansion
# around (lam1, lam2), carried exactly over polynomials in Q.


def _qp_add(p1: list, p2: list) -> list:
    out = list(p1) + [CRat(0)] * max(0, len(p2) - len(p1))
    for k, c in enumerate(p2):
        out[k] = _nadd(out[k], c)
    return out


def _qp_mul(p1: list, p2: list) -> list:
    out = [CRat(0)] * (len(p1) + len(p2) - 1) if p1 and p2 else []
    for i, a in enumerate(p1):
        for j, b in enumerate(p2):
            out[i + j] = _nadd(out[i + j], _nmul(a, b))
    return out


def _qp_scale(p: list, c) -> list:
    return [_nmul(v, c) for v in p]


class _BiTaylor:
    """Truncated Taylor series in (da, db) with Q-polynomial coefficients."""

    def __init__(self, p: int, q: int, data: Dict[Tuple[int, int], list] | None = None):
        self.p = p
        self.q = q
        self.data = data or {}

    def get(self, i, j):
        return self.data.get((i, j), [])

    def set(self, i, j, poly):
        poly = [c for c in poly]
        while poly and _iszero(poly[-1]):
            poly.pop()
        if poly:
            self.data[(i, j)] = poly
        else:
            self.data.pop((i, j), None)

    def add(self, other):
        out = _BiTaylor(self.p, self.q, dict(self.data))
        for key, poly in other.data.items():
            out.set(*key, _qp_add(out.get(*key), poly))
        return out

    def mul(self, other):
        out = _BiTaylor(self.p, self.q)
        for (i1, j1), p1 in self.data.items():
            for (i2, j2), p2 in other.data.items():
                i, j = i1 + i2, j1 + j2
                if i > self.p or j > self.q:
                    continue
                out.set(i, j, _qp_add(out.get(i, j), _qp_mul(p1, p2)))
        return out

    def scale(self, c):
        out = _BiTaylor(self.p, self.q)
        for key, poly in self.data.items():
            out.set(*key, _qp_scale(poly, c))
        return out

    @staticmethod
    def const(p, q, c):
        return _BiTaylor(p, q, {(0, 0): [c]})


def _binom_series_pow(w: _BiTaylor, exponent: int, p: int, q: int) -> _BiTaylor:
    """(1 + w)^exponent for negative integer exponent, w without constant term."""
    out = _BiTaylor.const(p, q, CRat(1))
    wk = _BiTaylor.const(p, q, CRat(1))
    for k in range(1, p + q + 1):
        wk = wk.mul(w)
        if not wk.data:
            break
        coef = Fraction(1)
        for t in range(k):
            coef *= Fraction(exponent - t, t + 1)
        out = out.add(wk.scale(CRat(coef)))
    return out


@lru_cache(maxsize=None)
def radial_gauss_star_table(k1: int, lam1: Fraction, k2: int, lam2: Fraction,
                            n: int) -> Tuple[Fraction, tuple]:
    """Exact expansion Q^k1 e^(-lam1 Q) # Q^k2 e^(-lam2 Q) = sum_m c_m Q^m e^(-s0 Q).

    Returns (s0, coefficients) with s0 = (lam1+lam2)/(1+lam1*lam2).
    """
    lam1 = Fraction(lam1)
    lam2 = Fraction(lam2)
    p, q = k1, k2
    u0 = 1 + lam1 * lam2
    s0 = (lam1 + lam2) / u0
    # u = u0 + lam2 da + lam1 db + da db
    w = _BiTaylor(p, q)
    if lam2:
        w.set(1, 0, [CRat(lam2 / u0)])
    if lam1:
        w.set(0, 1, [CRat(lam1 / u0)])
    if p >= 1 and q >= 1:
        w.set(1, 1, [CRat(1 / u0)])
    u_pow = _binom_series_pow(w, -n, p, q).scale(CRat(Fraction(1) / u0 ** n))
    # s - s0 = (a + b)/u - s0 ; numerator N = (lam1+lam2) + da + db
    npoly = _BiTaylor(p, q)
    if lam1 + lam2:
        npoly.set(0, 0, [CRat(lam1 + lam2)])
    npoly.set(1, 0, [CRat(1)])
    npoly.set(0, 1, [CRat(1)])
    u_inv = _binom_series_pow(w, -1, p, q).scale(CRat(Fraction(1) / u0))
    s_full = npoly.mul(u_inv)
    ds = _BiTaylor(p, q, dict(s_full.data))
    ds.set(0, 0, _qp_add(ds.get(0, 0), [CRat(-s0)]))
    # exp(-ds * Q): ds has no constant term
    expo = _BiTaylor.const(p, q, CRat(1))
    dsq = _BiTaylor(p, q)
    for key, poly in ds.data.items():
        dsq.set(*key, [CRat(0)] + list(poly))   # multiply by Q
    power = _BiTaylor.const(p, q, CRat(1))
    for m in range(1, p + q + 1):
        power = power.mul(dsq)
        if not power.data:
            break
        expo = expo.add(power.scale(CRat(Fraction((-1) ** m, factorial(m)))))
    total = u_pow.mul(expo)
    target = total.get(p, q)
    sign = CRat((-1) ** (p + q) * factorial(p) * factorial(q))
    coeffs = tuple(CRat.of(c) * sign for c in target)
    return s0, coeffs


def _gauss_star_gauss(g1: Dict, g2: Dict, n: int) -> Dict:
    out: Dict = {}
    for lam1, c1 in g1.items():
        for lam2, c2 in g2.items():
            exact = isinstance(lam1, Fraction) and isinstance(lam2, Fraction)
            for k1, a in enumerate(c1):
                if _iszero(a):
                    continue
                for k2, b in enumerate(c2):
                    if _iszero(b):
                        continue
                    if exact:
                        s0, coeffs = radial_gauss_star_table(k1, lam1, k2, lam2, n)
                    else:
                        s0, coeffs = _float_star(k1, lam1, k2, lam2, n)
                    scale = _nmul(a, b)
                    cur = out.setdefault(s0, [])
                    for m, c in enumerate(coeffs):
                        while len(cur) <= m:
                            cur.append(CRat(0))
                        cur[m] = _nadd(cur[m], _nmul(c, scale))
    return {lam: coeffs for lam, coeffs in out.items()
            if any(not _iszero(c) for c in coeffs)}


def _float_star(k1, lam1, k2, lam2, n):
    """Float fallback of the star table via rational approximation."""
    f1 = Fraction(float(lam1)).limit_denominator(10 ** 12)
    f2 = Fraction(float(lam2)).limit_denominator(10 ** 12)
    s0, coeffs = radial_gauss_star_table(k1, f1, k2, f2, n)
    return float(s0), tuple(complex(c) for c in coeffs)


# ---------------------------------------------------------------------------
# star with Q-power ladders (resolvent class)
# ---------------------------------------------------------------------------

def star_weights_for_radial_poly(coeffs_len: int, n: int) -> List[list]:
    """Conversion table from Q^m to iterated star powers Q^(#m).

    Returns T with T[m] = coefficient list of Q^(#m) as a polynomial in Q.
    """
    table = [[Fraction(1)]]
    for _ in range(coeffs_len - 1):
        cur = table[-1]
        nxt = [Fraction(0)] * (len(cur) + 1)
        for k, c in enumerate(cur):
            nxt[k + 1] += c
            if k >= 1:
                nxt[k - 1] -= k * (k + n - 1) * c
        table.append(nxt)
    return table


def radial_poly_to_star_basis(coeffs: list, n: int) -> list:
    """Write sum c_m Q^m as sum r_m Q^(#m); returns [r_m]."""
    table = star_weights_for_radial_poly(len(coeffs), n)
    rem = list(coeffs)
    out = [CRat(0)] * len(coeffs)
    for m in range(len(coeffs) - 1, -1, -1):
        c = rem[m]
        out[m] = c
        if _iszero(c):
            continue
        tm = table[m]
        for k, t in enumerate(tm):
            rem[k] = _nadd(rem[k], _nmul(CRat(-1) * CRat(t), c))
    return out


def _resolvent_star_q(terms: List) -> List:
    """Right star with Q on resolvent terms: f # Q = Q f - (1/4) Lap f."""
    out = []
    for c, g, j, k in terms:
        n = _RES_N[0]
        out.append((c, g, j, k + 1))
        if k >= 1:
            out.append((_nmul(c, CRat(-k * (k - 1 + n))), g, j, k - 1))
        out.append((_nmul(c, CRat(2 * k + n)), g, j + 1, k))
        out.append((_nmul(c, CRat(-1)), g, j + 2, k + 1))
    return _res_merge(out)


_RES_N = [1]   # half-dimension context for the ladder (set by caller)


def _res_merge(terms: List) -> List:
    acc: Dict = {}
    for c, g, j, k in terms:
        key = (complex(g), j, k)
        acc[key] = _nadd(acc.get(key, CRat(0)), c)
    return [(c, g, j, k) for (g, j, k), c in acc.items() if not _iszero(c)]


def _resolvent_star_radial_poly(res_terms: List, coeffs: list, n: int) -> List:
    """res # R(Q) for a radial polynomial R; exact via the Q-ladder."""
    _RES_N[0] = n
    rcoef = radial_poly_to_star_basis(coeffs, n)
    out: List = []
    cur = list(res_terms)
    for m, r in enumerate(rcoef):
        if m > 0:
            cur = _resolvent_star_q(cur)
        if _iszero(r):
            continue
        out.extend((_nmul(c, r), g, j, k) for c, g, j, k in cur)
    return _res_merge(out)


# ---------------------------------------------------------------------------
# composition dispatch
# ---------------------------------------------------------------------------

def star_closures(a: Optional[Closure], b: Optional[Closure], n: int) -> Optional[Closure]:
    """Exact closure of a # b, or None when the classes do not compose."""
    if a is None or b is None:
        return None
    # rational x rational with at least one polynomial factor
    out = Closure(n)
    ok = _star_into(out, a, b, n)
    return out if ok else None


def _radial_poly_coeffs(rr: RadialRat):
    if not rr:
        return []
    if not rr.is_polynomial():
        return None
    return rr.as_poly().as_radial_polynomial()


def _star_into(out: Closure, a: Closure, b: Closure, n: int) -> bool:
    from .moyal import moyal_term

    # unsupported cross terms first
    if a.resolvent and (b.gauss or b.resolvent):
        return False
    if b.resolvent and a.gauss:
        return False

    ca = _radial_poly_coeffs(a.base)
    cb = _radial_poly_coeffs(b.base)

    # base # base: finite Moyal sum when one factor is polynomial
    if a.base and b.base:
        pa = a.base.is_polynomial()
        pb = b.base.is_polynomial()
        if not pa and not pb:
            return False
        kmax = int(a.base.as_poly().degree()) if pa else int(b.base.as_poly().degree())
        acc = RadialRat.zero(n)
        for k in range(kmax + 1):
            acc = acc + moyal_term(a.base, b.base, k)
        out.base = out.base + acc

    # base # gauss and gauss # base: base must be a radial polynomial
    if b.gauss and a.base:
        if ca is None:
            return False
        for lam, coeffs in _gauss_star_gauss({Fraction(0): ca}, b.gauss, n).items():
            out._gauss_accum(lam, coeffs)
    if a.gauss and b.base:
        if cb is None:
            return False
        for lam, coeffs in _gauss_star_gauss(a.gauss, {Fraction(0): cb}, n).items():
            out._gauss_accum(lam, coeffs)

    # gauss # gauss
    if a.gauss and b.gauss:
        for lam, coeffs in _gauss_star_gauss(a.gauss, b.gauss, n).items():
            out._gauss_accum(lam, coeffs)

    # resolvent # base and base # resolvent: radial polynomials commute
    # through the star with radial symbols, so one ladder serves both sides
    if a.resolvent:
        if b.base:
            if cb is None:
                return False
            out.resolvent.extend(_resolvent_star_radial_poly(a.resolvent, cb, n))
        # a.resolvent with b having no base part contributes nothing extra
    if b.resolvent:
        if a.base:
            if ca is None:
                return False
            out.resolvent.extend(_resolvent_star_radial_poly(b.resolvent, ca, n))
    out.resolvent = _res_merge(out.resolvent)
    return True


def _radial_from_coeffs(coeffs, n: int) -> RadialRat:
    q = PolyC.harmonic(n)
    out = PolyC.zero(n)
    for k, c in enumerate(coeffs):
        if isinstance(c, _EXACT):
            out = out + q ** k * CRat.of(c)
        else:
            raise TypeError("float coefficients cannot enter the exact radial part")
    return RadialRat.from_poly(out)


# ---------------------------------------------------------------------------
# numeric evaluation of resolvent terms
# ---------------------------------------------------------------------------

def _res_prefactor(g: complex, j: int, n: int, w, wc):
    """e^(g u) cosh(u)^-n tanh(u)^j du pulled back to w = tanh u, stably.

    ``wc`` is the floating-point complement 1 - w from the quadrature rule;
    forming it from w loses the endpoint behaviour.
    """
    return ((1 + w) / wc) ** (g / 2) * (wc * (1 + w)) ** (n / 2 - 1) * w ** j


def _resolvent_eval(n: int, terms: List, q: np.ndarray) -> np.ndarray:
    """Pointwise values of the resolvent bucket at Q-values q (vectorized)."""
    w, wc, dw = de_nodes_01(160)
    out = np.zeros(q.shape, dtype=complex)
    qq = q[..., None]
    for c, g, j, k in terms:
        pref = _res_prefactor(complex(g), j, n, w, wc)
        vals = (qq ** k) * np.exp(-qq * w) * pref * dw
        out += complex(c) * vals.sum(axis=-1)
    return out


def resolvent_heat_moment(n: int, terms: List, t: float) -> complex:
    """(2 pi)^-n integral of the resolvent bucket against the heat symbol."""
    w, wc, dw = de_nodes_01(260)
    th = float(np.tanh(t))
    ch = float(np.cosh(t))
    total = 0j
    for c, g, j, k in terms:
        pref = _res_prefactor(complex(g), j, n, w, wc)
        moment = _gauss_heat_const(k, n) / (w + th) ** (k + n)
        total += complex(c) * np.sum(pref * moment * dw)
    return total / ch ** n


def _gauss_heat_const(k: int, n: int) -> float:
    return factorial(k + n - 1) / (factorial(n - 1) * 2 ** n)


def gauss_trace_exact(coeffs, lam, n: int):
    """(2 pi)^-n integral of sum_k c_k Q^k e^(-lam Q): the operator trace."""
    acc = None
    for k, c in enumerate(coeffs):
        w = Fraction(factorial(k + n - 1), factorial(n - 1) * 2 ** n)
        if isinstance(lam, Fraction) and isinstance(c, _EXACT):
            term = CRat.of(c) * CRat(w / lam ** (k + n))
        else:
            term = _tocplx(c) * float(w) / float(lam) ** (k + n)
        acc = term if acc is None else _nadd(acc, term)
    return acc if acc is not None else CRat(0)
