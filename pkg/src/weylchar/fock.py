"""Concrete operator realization on the truncated Fock (Hermite) basis.

A basis state is an occupation multi-index k = (k_1..k_n) with |k| <= cutoff.
Weyl quantization is built from the ladder recursion

    Op(x_j m) = (X_j Op(m) + Op(m) X_j) / 2,

exact for any symmetric-ordering-compatible truncation.  An exact-arithmetic
variant over Q(i, sqrt 2) runs in the Bargmann polynomial model (monomial
basis, non-orthonormal) where the homomorphism check can be asserted exactly.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from math import comb, isqrt
from typing import Dict, List, Tuple

import numpy as np

from .closures import Closure
from .exactnum import CRat, QiR2
from .laurent import LaurentT, artanh_over_u_series
from .poly import PolyC


class FockBasis:
    """Occupation states ordered graded-lexicographically."""

    __slots__ = ("n", "cutoff", "states", "index")

    def __init__(self, n: int, cutoff: int):
        self.n = n
        self.cutoff = cutoff
        states: List[Tuple[int, ...]] = []
        for total in range(cutoff + 1):
            states.extend(_occupations(total, n))
        self.states = states
        self.index = {s: i for i, s in enumerate(states)}

    @property
    def dim(self) -> int:
        return len(self.states)

    def occupations(self) -> np.ndarray:
        return np.array([sum(s) for s in self.states])


def _occupations(total: int, slots: int):
    if slots == 1:
        return [(total,)]
    out = []
    for first in range(total, -1, -1):
        for rest in _occupations(total - first, slots - 1):
            out.append((first,) + rest)
    return out


def default_cutoff(n: int) -> int:
    return 24 if n == 1 else 12


class FockOp:
    __slots__ = ("basis", "mat")

    def __init__(self, basis: FockBasis, mat: np.ndarray):
        mat = np.asarray(mat, dtype=complex)
        if mat.shape != (basis.dim, basis.dim):
            raise ValueError("matrix shape does not match basis")
        self.basis = basis
        self.mat = mat

    def __matmul__(self, other: "FockOp") -> "FockOp":
        return FockOp(self.basis, self.mat @ other.mat)

    def __add__(self, other: "FockOp") -> "FockOp":
        return FockOp(self.basis, self.mat + other.mat)

    def __mul__(self, c) -> "FockOp":
        return FockOp(self.basis, self.mat * complex(c))

    __rmul__ = __mul__

    def trace(self) -> complex:
        return complex(np.trace(self.mat))

    def dagger(self) -> "FockOp":
        return FockOp(self.basis, self.mat.conj().T)


@lru_cache(maxsize=None)
def _ladders(n: int, cutoff: int):
    basis = FockBasis(n, cutoff)
    dim = basis.dim
    create = []
    for j in range(n):
        c = np.zeros((dim, dim))
        for idx, s in enumerate(basis.states):
            s2 = list(s)
            s2[j] += 1
            s2 = tuple(s2)
            if sum(s2) <= cutoff:
                c[basis.index[s2], idx] = np.sqrt(s[j] + 1)
        create.append(c)
    return basis, create


def position_ops(basis: FockBasis):
    _, create = _ladders(basis.n, basis.cutoff)
    xs, ds = [], []
    for j in range(basis.n):
        c = create[j]
        a = c.T
        xs.append((a + c) / np.sqrt(2.0))
        ds.append(1j * (c - a) / np.sqrt(2.0))
    return xs, ds


def quantize_poly(p: PolyC, basis: FockBasis) -> FockOp:
    """Weyl (symmetric ordering) quantization of a polynomial symbol."""
    xs, ds = position_ops(basis)
    ops = xs + ds
    dim = basis.dim

    @lru_cache(maxsize=None)
    def mono(exp: Tuple[int, ...]) -> np.ndarray:
        total = sum(exp)
        if total == 0:
            return np.eye(dim, dtype=complex)
        k = next(i for i, e in enumerate(exp) if e)
        sub = list(exp)
        sub[k] -= 1
        m = mono(tuple(sub))
        v = ops[k]
        return 0.5 * (v @ m + m @ v)

    out = np.zeros((dim, dim), dtype=complex)
    for e, c in p.terms.items():
        out = out + complex(c) * mono(e)
    mono.cache_clear()
    return FockOp(basis, out)


# -- exact quantization in the Bargmann monomial model -----------------------

def quantize_poly_exact(p: PolyC, n: int, cutoff: int) -> List[List[QiR2]]:
    """Matrix of Op(p) on the monomial basis w^k (non-orthonormal), exact.

    Creation acts as multiplication by w_j (entries 1), annihilation as
    d/dw_j (entries k_j); X_j and D_j then have entries in Q(i, sqrt 2).
    """
    basis = FockBasis(n, cutoff)
    dim = basis.dim
    half = QiR2(CRat(Fraction(1, 2)))
    r2half = QiR2(0, CRat(Fraction(1, 2)))           # sqrt(2)/2 = 1/sqrt(2)
    ir2half = QiR2(0, CRat(0, Fraction(1, 2)))       # i/sqrt(2)

    def zeros():
        return [[QiR2() for _ in range(dim)] for _ in range(dim)]

    def mat_add(a, b, coef=None):
        for i in range(dim):
            ra, rb = a[i], b[i]
            for j in range(dim):
                ra[j] = ra[j] + (rb[j] if coef is None else coef * rb[j])
        return a

    def mat_mul(a, b):
        out = zeros()
        for i in range(dim):
            ra = a[i]
            for k in range(dim):
                c = ra[k]
                if not c:
                    continue
                rb = b[k]
                ro = out[i]
                for j in range(dim):
                    if rb[j]:
                        ro[j] = ro[j] + c * rb[j]
        return out

    create = []
    annih = []
    for j in range(n):
        cm = zeros()
        am = zeros()
        for idx, s in enumerate(basis.states):
            up = list(s)
            up[j] += 1
            up = tuple(up)
            if sum(up) <= cutoff:
                cm[basis.index[up]][idx] = QiR2(1)
            if s[j] > 0:
                dn = list(s)
                dn[j] -= 1
                am[basis.index[tuple(dn)]][idx] = QiR2(s[j])
        create.append(cm)
        annih.append(am)

    ops = []
    for j in range(n):
        x = mat_add([[r2half * v for v in row] for row in annih[j]], create[j], r2half)
        ops.append(x)
    for j in range(n):
        d = mat_add([[(-ir2half) * v for v in row] for row in annih[j]], create[j], ir2half)
        ops.append(d)

    cache: Dict[Tuple[int, ...], list] = {}

    def mono(exp: Tuple[int, ...]):
        if exp in cache:
            return cache[exp]
        if sum(exp) == 0:
            m = zeros()
            for i in range(dim):
                m[i][i] = QiR2(1)
        else:
            k = next(i for i, e in enumerate(exp) if e)
            sub = list(exp)
            sub[k] -= 1
            mm = mono(tuple(sub))
            v = ops[k]
            left = mat_mul(v, mm)
            right = mat_mul(mm, v)
            m = [[half * (left[i][j] + right[i][j]) for j in range(dim)]
                 for i in range(dim)]
        cache[exp] = m
        return m

    out = zeros()
    for e, c in p.terms.items():
        m = mono(e)
        coef = QiR2(c)
        for i in range(dim):
            ro, rm = out[i], m[i]
            for j in range(dim):
                if rm[j]:
                    ro[j] = ro[j] + coef * rm[j]
    return out


def exact_homomorphism_defect(a: PolyC, b: PolyC, n: int, cutoff: int) -> bool:
    """True iff Op(a)Op(b) = Op(a # b) on the safe interior columns, exactly."""
    from .moyal import star_poly
    basis = FockBasis(n, cutoff)
    deg = int(max(a.degree(), 0)) + int(max(b.degree(), 0))
    ma = quantize_poly_exact(a, n, cutoff)
    mb = quantize_poly_exact(b, n, cutoff)
    mab = quantize_poly_exact(star_poly(a, b), n, cutoff)
    dim = basis.dim
    occ = [sum(s) for s in basis.states]
    for col in range(dim):
        if occ[col] > cutoff - deg:
            continue
        for i in range(dim):
            acc = QiR2()
            for k in range(dim):
                if ma[i][k] and mb[k][col]:
                    acc = acc + ma[i][k] * mb[k][col]
            if acc != mab[i][col]:
                return False
    return True


# -- model symbols ------------------------------------------------------------

def vacuum_projection(basis: FockBasis) -> FockOp:
    m = np.zeros((basis.dim, basis.dim), dtype=complex)
    m[0, 0] = 1.0
    return FockOp(basis, m)


def vacuum_symbol(n: int) -> Closure:
    """s = 2^n exp(-Q), the symbol of the vacuum projection."""
    return Closure.gaussian(n, Fraction(1), [CRat(2 ** n)])


def mehler_symbol(t: float, n: int) -> Closure:
    """Heat symbol (cosh t)^-n exp(-Q tanh t), t > 0."""
    if t <= 0:
        raise ValueError("t must be positive")
    return Closure.gaussian(n, float(np.tanh(t)), [np.cosh(t) ** (-n) + 0j])


def mehler_symbol_exact(w: Fraction, n: int) -> Dict:
    """Exact lambda-parameter form of the heat symbol with tanh t = w.

    Returns {"lam": w, "amp2": (1-w^2)^n}; the squared amplitude keeps the
    data rational for exact semigroup checks.
    """
    w = Fraction(w)
    return {"lam": w, "amp2": (1 - w * w) ** n}


def radial_gauss_diag(k: int, lam, M: np.ndarray, n: int) -> np.ndarray:
    """Diagonal of Op(Q^k e^(-lam Q)) over occupation totals M.

    Entry formula for k = 0: (1 - lam)^M (1 + lam)^(-M - n); Q^k prefactors
    are (-d/dlam)^k of it.
    """
    lam = float(lam)
    M = np.asarray(M)
    # terms: dict (dp, dq) -> polynomial coefficient in M, built symbolically
    # via per-M recursion (k is small)
    out = np.zeros(M.shape, dtype=float)
    for idx, m in np.ndenumerate(M):
        terms = {(int(m), int(m) + n): 1.0}
        for _ in range(k):
            nxt: Dict[Tuple[int, int], float] = {}
            for (p, q), c in terms.items():
                if p:
                    nxt[(p - 1, q)] = nxt.get((p - 1, q), 0.0) + p * c
                nxt[(p, q + 1)] = nxt.get((p, q + 1), 0.0) + q * c
            terms = nxt
        val = 0.0
        for (p, q), c in terms.items():
            val += c * (1 - lam) ** p * (1 + lam) ** (-q)
        out[idx] = val
    return out


def gauss_closure_op(c: Closure, basis: FockBasis) -> FockOp:
    """Fock matrix of a gaussian-or-rational-radial closure (diagonal)."""
    n = basis.n
    occ = basis.occupations()
    diag = np.zeros(basis.dim, dtype=complex)
    if c.base:
        coeffs = c.base.as_poly().as_radial_polynomial() if c.base.is_polynomial() else None
        if coeffs is None:
            raise ValueError("non-(radial polynomial) base has no diagonal model")
        for k, co in enumerate(coeffs):
            diag += complex(co) * _qk_diag(k, occ, n)
    for lam, coeffs in c.gauss.items():
        for k, co in enumerate(coeffs):
            diag += complex(co) * radial_gauss_diag(k, lam, occ, n)
    for co, g, j, kk in c.resolvent:
        diag += complex(co) * _resolvent_diag(g, j, kk, occ, n)
    return FockOp(basis, np.diag(diag))


def fock_op_of_closure(c: Closure, basis: FockBasis) -> FockOp:
    """Fock matrix of a general closure.

    Radial content is diagonal; a non-radial polynomial base goes through
    Weyl quantization (exact on the interior of the truncation).
    """
    if c.base and not (c.base.is_polynomial()
                       and c.base.as_poly().as_radial_polynomial() is not None):
        if not c.base.is_polynomial():
            raise ValueError("only polynomial non-radial bases are quantizable")
        radial_free = Closure(basis.n, gauss=c.gauss, resolvent=c.resolvent)
        mat = quantize_poly(c.base.as_poly(), basis).mat
        return FockOp(basis, mat + gauss_closure_op(radial_free, basis).mat)
    return gauss_closure_op(c, basis)


def _qk_diag(k: int, occ: np.ndarray, n: int) -> np.ndarray:
    """Diagonal of Op(Q^k) restricted to the radial (diagonal) part.

    Op(Q)^# powers are polynomials in the oscillator H, diagonal with
    eigenvalue 2M + n; Q^k itself is converted through the star basis.
    """
    from .closures import radial_poly_to_star_basis
    coeffs = [Fraction(0)] * k + [Fraction(1)]
    starbasis = radial_poly_to_star_basis(coeffs, n)
    lam = (2 * occ + n).astype(float)
    out = np.zeros(occ.shape)
    for m, c in enumerate(starbasis):
        if c:
            out += float(c) * lam ** m
    return out


def _resolvent_diag(g, j, k, occ: np.ndarray, n: int) -> np.ndarray:
    """Diagonal of a resolvent bucket term via its u-integral."""
    from .quad import de_nodes_01
    from .closures import _res_prefactor
    w, wc, dw = de_nodes_01(200)
    pref = _res_prefactor(complex(g), j, n, w, wc)
    out = np.zeros(occ.shape, dtype=complex)
    for idx, m in np.ndenumerate(occ):
        vals = _diag_qk_gauss(k, w, wc, int(m), n)
        out[idx] = np.sum(pref * vals * dw)
    return out


def _diag_qk_gauss(k: int, lam: np.ndarray, lamc: np.ndarray, m: int,
                   n: int) -> np.ndarray:
    """Diagonal entry of Op(Q^k e^(-lam Q)) at occupation m, vectorized in lam.

    ``lamc`` is the stable complement 1 - lam.
    """
    terms = {(m, m + n): 1.0}
    for _ in range(k):
        nxt: Dict[Tuple[int, int], float] = {}
        for (p, q), c in terms.items():
            if p:
                nxt[(p - 1, q)] = nxt.get((p - 1, q), 0.0) + p * c
            nxt[(p, q + 1)] = nxt.get((p, q + 1), 0.0) + q * c
        terms = nxt
    out = np.zeros(lam.shape, dtype=float)
    for (p, q), c in terms.items():
        out += c * lamc ** p * (1 + lam) ** (-q)
    return out


def heat_semigroup_diag(basis: FockBasis, t: float) -> np.ndarray:
    return np.exp(-t * (2 * basis.occupations() + basis.n))


# -- coefficient functions of the complex powers -----------------------------

def hz_phi_series(z: complex, n: int, order: int) -> LaurentT:
    """Power series of ((arctanh u)/u)^(z-1) (1-u^2)^((n-2)/2) in u."""
    base = artanh_over_u_series(order).map(lambda c: complex(c))
    log_base = base.log1()
    first = (log_base * (z - 1.0)).exp0()
    # (1 - u^2)^((n-2)/2)
    u2 = LaurentT(2, [1.0 + 0j] + [0j] * (order - 2), order)
    log_second = (LaurentT.const(1.0 + 0j, order) - u2).log1()
    second = (log_second * ((n - 2) / 2.0)).exp0()
    return (first * second).truncate(order)


def hz_coefficients(z: complex, K: int, n: int = 1) -> List[complex]:
    """a_k(z), k = 0..K: coefficients of u^(2k) in the phi series."""
    series = hz_phi_series(z, n, 2 * K + 1)
    return [series.coeff(2 * k) for k in range(K + 1)]


def hz_term(j: int, z: complex, n: int = 1) -> complex:
    """Coefficient of the degree -j homogeneous term of the complex power
    symbol, relative to rho^(2z): nonzero only when 4 divides j."""
    if j % 4:
        return 0j
    a = hz_coefficients(z, j // 4, n)[j // 4]
    prod = 1.0 + 0j
    for k in range(j):
        prod *= (z + k)
    return prod * a
