"""Regularized traces: residue trace, heat-route TR-hat, and the pair trace.

Route map
---------
* exact closed forms: a homogeneous radial term of degree -2m (m < n)
  integrates against the heat symbol to  c_m Gamma(n-m) / (2 sinh^(n-m) t
  cosh^m t); radial Gaussians integrate to explicit rational expressions in
  tanh t.  Polynomial and gaussian-class symbols therefore have exact
  Laurent data and an exact constant term.
* resolvent-class symbols add a numeric remainder: their heat moments are
  sampled at several t and the constant term is extracted by a least-squares
  fit.  The basis includes t^k log t columns: remainders of this class have
  genuine t log t terms (Mellin double poles at negative integers), which a
  plain polynomial basis would alias into the constant.
* a spectral route (operator eigenvalue sums) serves radial products as an
  independent cross-check, and a Fock matrix route covers Schwartz products.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial, log
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from .closures import Closure, gauss_trace_exact, resolvent_heat_moment, _EXACT
from .errors import (DepthTooShallow, MissingClosure, NonConvergentRemainder,
                     NonzeroResidue, QuadratureNotConverged)
from .exactnum import CRat, zeta_neg
from .laurent import LaurentT, cosh_series, sinh_series, tanh_series
from .moyal import PairedSymbol, PhgExpansion
from .quad import radial_panels, sphere_nodes

FIT_TS = tuple(float(t) for t in np.geomspace(0.02, 0.35, 16))


@dataclass
class TraceReport:
    value: complex
    route: str
    residual_log_coeff: complex = 0j
    error_estimate: float = 0.0
    exact: object = None          # CRat when the route was exact
    details: dict = field(default_factory=dict)

    def as_json(self) -> dict:
        return {
            "value": [float(np.real(self.value)), float(np.imag(self.value))],
            "route": self.route,
            "residual_log_coeff": [float(np.real(self.residual_log_coeff)),
                                   float(np.imag(self.residual_log_coeff))],
            "error_estimate": float(self.error_estimate),
            "exact": _exact_str(self.exact),
        }


def _exact_str(x):
    if x is None:
        return None
    if isinstance(x, CRat):
        return f"{x.re}{'+' if x.im >= 0 else ''}{x.im}i"
    return str(x)


# ---------------------------------------------------------------------------
# residue trace
# ---------------------------------------------------------------------------

def res(a: PhgExpansion) -> CRat:
    """Residue trace: -(1/(2 (2 pi)^n)) * sphere integral of the -2n term.

    Exact.  Requires the expansion depth to reach homogeneity degree -2n.
    """
    n = a.n
    a.require_depth_for_hdeg(-2 * n)
    term = a.term_at_hdeg(-2 * n)
    avg = term.sphere_average()          # coefficient of pi^n
    return avg * CRat(Fraction(-1, 2 ** (n + 1)))


# ---------------------------------------------------------------------------
# exact heat atoms
# ---------------------------------------------------------------------------

def _radial_atom_laurent(coef, m: int, n: int, order: int) -> LaurentT:
    """Laurent of coef * Gamma(n-m) / (2 sinh^(n-m) t cosh^m t), m < n."""
    margin = order + (n - m) + 2
    out = sinh_series(margin).inverse() ** (n - m)
    if m > 0:
        out = out * cosh_series(margin).inverse() ** m
    elif m < 0:
        out = out * cosh_series(margin) ** (-m)
    out = out * Fraction(factorial(n - m - 1), 2)
    if isinstance(coef, _EXACT):
        out = out * CRat.of(coef)
    else:
        out = out.map(complex) * complex(coef)
    return out.truncate(order)


def _radial_atom_eval(coef, m: int, n: int, t: float) -> complex:
    g = factorial(n - m - 1)
    return complex(coef) * g / (2 * np.sinh(t) ** (n - m) * np.cosh(t) ** m)


def _gauss_atom_laurent(coef, k: int, lam, n: int, order: int) -> LaurentT:
    """Laurent of coef * Gamma(k+n)/(Gamma(n) 2^n) sech^n t (lam + tanh t)^-(k+n)."""
    margin = order + 2 * (k + n) + 2
    w = Fraction(factorial(k + n - 1), factorial(n - 1) * 2 ** n)
    exact = isinstance(lam, Fraction) and isinstance(coef, _EXACT)
    th = tanh_series(margin)
    ch = cosh_series(margin)
    if exact:
        shifted = th + LaurentT.const(Fraction(lam), margin)
        out = shifted.inverse() ** (k + n) * ch.inverse() ** n
        out = out * CRat.of(coef) * CRat(w)
    else:
        shifted = th.map(complex) + LaurentT.const(complex(lam), margin)
        out = shifted.inverse() ** (k + n) * ch.map(complex).inverse() ** n
        out = out * (complex(coef) * float(w))
    return out.truncate(order)


def _gauss_atom_eval(coef, k: int, lam, n: int, t: float) -> complex:
    w = factorial(k + n - 1) / (factorial(n - 1) * 2 ** n)
    return (complex(coef) * w / np.cosh(t) ** n
            / (complex(lam) + np.tanh(t)) ** (k + n))


def _base_atoms(closure: Closure, n: int):
    """Homogeneous (coef, m) atoms of the rational part; m must stay < n."""
    atoms = []
    base = closure.base
    if not base:
        return atoms
    hdegs = set()
    for k, p in base.parts.items():
        for d in p.degrees_present():
            hdegs.add(d - 2 * k)
    for hdeg in sorted(hdegs, reverse=True):
        comp = base.homogeneous_component(hdeg)
        if not comp:
            continue
        if hdeg % 2:
            raise MissingClosure("odd-degree radial part has no heat route")
        m = -hdeg // 2
        if m >= n:
            raise MissingClosure(
                f"rational closure part of degree {hdeg} is not integrable "
                "against the heat symbol (resolvent class required)")
        from .radial import HomTerm
        avg = HomTerm(comp, hdeg).sphere_average()
        coef = avg * CRat(Fraction(1, 2 ** n))
        atoms.append((coef, m))
    return atoms


@dataclass
class HeatTrace:
    """Heat-trace data: exact Laurent part plus an optional numeric remainder."""
    laurent: LaurentT
    exact_eval: Callable[[float], complex]
    remainder_eval: Optional[Callable[[float], complex]]
    exact: bool

    def eval(self, t: float) -> complex:
        out = self.exact_eval(t)
        if self.remainder_eval is not None:
            out += self.remainder_eval(t)
        return out


def heat_trace(a: PhgExpansion, order: int = 4) -> HeatTrace:
    """Laurent expansion in t of (2 pi)^-n  integral  a(v) h_t(v) dv.

    The closure must be present; its rational and gaussian buckets give the
    exact part, a resolvent bucket becomes the sampled remainder.
    """
    n = a.n
    if a.order_m % 2:
        raise MissingClosure("odd-order symbols have no heat trace here")
    closure = a.closure
    if closure is None:
        raise MissingClosure("heat_trace needs a closure")
    atoms = _base_atoms(closure, n)
    gauss_atoms = []
    for lam, coeffs in closure.gauss.items():
        for k, c in enumerate(coeffs):
            gauss_atoms.append((c, k, lam))

    exact = True
    lau = LaurentT.zero(order)
    for coef, m in atoms:
        lau = _lau_add(lau, _radial_atom_laurent(coef, m, n, order))
    for c, k, lam in gauss_atoms:
        part = _gauss_atom_laurent(c, k, lam, n, order)
        if not (isinstance(lam, Fraction) and isinstance(c, _EXACT)):
            exact = False
        lau = _lau_add(lau, part)

    def exact_eval(t: float) -> complex:
        out = 0j
        for coef, m in atoms:
            out += _radial_atom_eval(coef, m, n, t)
        for c, k, lam in gauss_atoms:
            out += _gauss_atom_eval(c, k, lam, n, t)
        return out

    remainder = None
    if closure.resolvent:
        terms = list(closure.resolvent)

        def remainder_eval(t: float) -> complex:
            return resolvent_heat_moment(n, terms, t)

        remainder = remainder_eval
        exact = False

    return HeatTrace(lau, exact_eval, remainder, exact)


def _lau_add(a: LaurentT, b: LaurentT) -> LaurentT:
    try:
        return a + b
    except TypeError:
        return a.map(complex) + b.map(complex)


# ---------------------------------------------------------------------------
# constant-term extraction
# ---------------------------------------------------------------------------

def fit_constant(ts: Sequence[float], vals: Sequence[complex],
                 with_log: bool = True) -> Tuple[complex, float, float, complex]:
    """Least-squares constant term of heat-remainder samples.

    Basis {1} + {t^k, t^k log t : k = 1..5}; the log columns are required
    because resolvent-class remainders carry genuine t^k log t terms (Mellin
    double poles at negative integers) that a plain polynomial basis aliases
    into the constant at the 1e-4 level.  Returns (constant, residual_norm,
    condition_number, t-log-t coefficient).
    """
    ts = np.asarray(ts, dtype=float)
    vals = np.asarray(vals, dtype=complex)
    cols = [np.ones_like(ts)]
    logt = np.log(ts)
    log_cols = []
    for k in range(1, 6):
        cols.append(ts ** k)
        if with_log and k <= 4:
            log_cols.append(len(cols))
            cols.append(ts ** k * logt)
    A = np.stack(cols, axis=-1)
    sol, _, _, sv = np.linalg.lstsq(A, vals, rcond=None)
    resid = float(np.linalg.norm(A @ sol - vals))
    cond = float(sv[0] / sv[-1]) if sv[-1] > 0 else np.inf
    logc = complex(sol[log_cols[0]]) if log_cols else 0j
    return complex(sol[0]), resid, cond, logc


def trh(a: PhgExpansion, strict: bool = True, order: int = 4,
        fit_ts: Sequence[float] = FIT_TS) -> TraceReport:
    """Constant heat coefficient (the zeta constant term at z = 0).

    In strict mode a nonvanishing residue trace is an error; the would-be
    log t coefficient is recorded on the report either way.
    """
    residue = res(a)
    if strict and residue != 0:
        raise NonzeroResidue(f"Res = {residue!r}; combined-pair route required")
    ht = heat_trace(a, order=order)
    value_exact = None
    if ht.remainder_eval is None:
        c0 = ht.laurent.coeff(0)
        if ht.exact and isinstance(c0, (CRat, Fraction, int)):
            value_exact = CRat.of(c0) if not isinstance(c0, CRat) else c0
        value = complex(c0)
        err = 0.0
        route_details = {}
    else:
        c0 = complex(ht.laurent.coeff(0))
        samples = [ht.remainder_eval(t) for t in fit_ts]
        const, resid, cond, _ = fit_constant(fit_ts, samples, with_log=True)
        if resid > 1e-6 * max(1.0, max(abs(s) for s in samples)):
            raise NonConvergentRemainder(f"heat remainder fit residual {resid:g}")
        value = c0 + const
        err = resid
        route_details = {"fit_residual": resid, "fit_condition": cond}
    return TraceReport(value=value, route="heat-closed-form",
                       residual_log_coeff=complex(residue),
                       error_estimate=err, exact=value_exact,
                       details=route_details)


# ---------------------------------------------------------------------------
# the pair trace tau
# ---------------------------------------------------------------------------

def tau(sigma: PairedSymbol, strict: bool = True, order: int = 4) -> TraceReport:
    """tau = TRhat(w+) - (-1)^n TRhat(w-), via the combined symbol."""
    a = sigma.combined()
    if a.order_m % 2:
        raise MissingClosure("pair trace needs even order")
    rep = trh(a, strict=strict, order=order)
    return rep


def tau_fock_schwartz(sigma: PairedSymbol, cutoff: int | None = None) -> TraceReport:
    """tau for a Schwartz pair via Fock matrix traces, with cutoff doubling."""
    from .fock import FockBasis, fock_op_of_closure, default_cutoff
    n = sigma.n
    if not sigma.plus.is_zero_expansion() or not sigma.minus.is_zero_expansion():
        raise MissingClosure("fock trace route needs a Schwartz pair")
    cutoff = cutoff or default_cutoff(n)
    prev = None
    for c in (cutoff, 2 * cutoff):
        basis = FockBasis(n, c)
        tp = fock_op_of_closure(sigma.plus.closure, basis).trace() \
            if sigma.plus.closure is not None else 0.0
        tm = fock_op_of_closure(sigma.minus.closure, basis).trace() \
            if sigma.minus.closure is not None else 0.0
        val = tp + (-1) ** (n + 1) * tm
        if prev is not None:
            return TraceReport(value=val, route="fock-trace",
                               error_estimate=abs(val - prev))
        prev = val
    raise QuadratureNotConverged("unreachable")


# ---------------------------------------------------------------------------
# numeric R-integral route
# ---------------------------------------------------------------------------

def tau_numeric(sigma: PairedSymbol, transform: Optional[np.ndarray] = None,
                tol: float = 1e-9, r_max: float = 40.0,
                m_sphere: int = 64, m_radial: int = 28) -> TraceReport:
    """tau via (2 pi)^-n  integral of  R(sigma)  over phase space.

    R(sigma) subtracts from the combined symbol all expansion terms of
    homogeneity above -2n (the -2n term cancels in the pair).  ``transform``
    optionally precomposes every evaluation with a linear symplectic map,
    exercising the invariance of the integral.
    """
    n = sigma.n
    a = sigma.combined()
    if a.closure is None:
        raise MissingClosure("numeric route needs closures on both components")
    a.require_depth_for_hdeg(-2 * n)
    border = a.term_at_hdeg(-2 * n)
    if border:
        avg = border.sphere_average()
        if complex(avg) != 0:
            raise NonzeroResidue("combined symbol keeps a -2n term")
    subtract = [t for j, t in a.terms.items() if t.hdeg > -2 * n]
    # the integrand decays like the first surviving homogeneity below -2n
    leading = max((t.hdeg for j, t in a.terms.items() if t.hdeg < -2 * n),
                  default=-2 * n - 2)

    phi_inv = None
    if transform is not None:
        phi_inv = np.linalg.inv(np.asarray(transform, dtype=float))

    def integrand(pts: np.ndarray) -> np.ndarray:
        q = pts if phi_inv is None else pts @ phi_inv.T
        out = a.closure.eval(q)
        for t in subtract:
            out = out - t.eval(q)
        return out

    value, err = _radial_integral_with_tail(integrand, n, decay=-leading,
                                            r_max=r_max, m_sphere=m_sphere,
                                            m_radial=m_radial, tol=tol)
    value = value / (2 * np.pi) ** n
    err = err / (2 * np.pi) ** n
    return TraceReport(value=value, route="numeric-R-integral",
                       error_estimate=err)


def _radial_integral_with_tail(fn, n: int, decay: int, r_max: float,
                               m_sphere: int, m_radial: int, tol: float):
    """Polar integral over R^(2n) with a power-law tail fit beyond r_max."""
    prev = None
    for ms, mr in ((m_sphere, m_radial), (m_sphere * 2, int(m_radial * 1.5))):
        sph, wsph = sphere_nodes(n, ms)
        r, wr = radial_panels(r_max, mr)
        pts = (r[:, None, None] * sph[None, :, :]).reshape(-1, 2 * n)
        vals = fn(pts).reshape(len(r), len(sph))
        shell = vals @ wsph                       # sphere integral per radius
        core = np.sum(wr * r ** (2 * n - 1) * shell)
        # tail: fit shell(r) ~ c0 r^-d + c1 r^-(d+2) on the outer decade
        sel = r > 0.6 * r_max
        rs, ss = r[sel], shell[sel]
        d = decay
        A = np.stack([rs ** (-d), rs ** (-d - 2)], axis=-1)
        sol, *_ = np.linalg.lstsq(A, ss, rcond=None)
        c0, c1 = sol
        tail = (c0 * r_max ** (2 * n - d) / (d - 2 * n)
                + c1 * r_max ** (2 * n - d - 2) / (d + 2 - 2 * n))
        fit_err = float(np.linalg.norm(A @ sol - ss)) * r_max ** (2 * n) / max(d - 2 * n, 1)
        total = complex(core + tail)
        if prev is not None:
            err = abs(total - prev) + abs(fit_err)
            if err > max(tol, 1e-12) * 50:
                raise QuadratureNotConverged(
                    f"R-integral unstable: {err:g} at tol {tol:g}")
            return total, err
        prev = total
    raise QuadratureNotConverged("unreachable")


# ---------------------------------------------------------------------------
# spectral route for radial products
# ---------------------------------------------------------------------------

class RatLam:
    """Rational function of the oscillator eigenvalue, exact coefficients."""

    def __init__(self, num: List[CRat], den: List[CRat] | None = None):
        self.num = [CRat.of(c) for c in num]
        self.den = [CRat.of(c) for c in (den or [1])]
        self._trim()

    def _trim(self):
        while len(self.num) > 1 and not self.num[-1]:
            self.num.pop()
        while len(self.den) > 1 and not self.den[-1]:
            self.den.pop()

    @staticmethod
    def poly(coeffs) -> "RatLam":
        return RatLam([CRat.of(c) for c in coeffs])

    @staticmethod
    def resolvent(gamma) -> "RatLam":
        if not isinstance(gamma, _EXACT):
            gamma = Fraction(float(np.real(gamma))).limit_denominator(10 ** 9)
        return RatLam([CRat(1)], [CRat.of(-1) * CRat.of(gamma), CRat(1)])

    def __mul__(self, other: "RatLam") -> "RatLam":
        return RatLam(_pmul(self.num, other.num), _pmul(self.den, other.den))

    def __add__(self, other: "RatLam") -> "RatLam":
        num = _padd(_pmul(self.num, other.den), _pmul(other.num, self.den))
        return RatLam(num, _pmul(self.den, other.den))

    def scale(self, c) -> "RatLam":
        return RatLam([v * CRat.of(c) for v in self.num], self.den)

    def poly_and_proper(self) -> Tuple[List[CRat], "RatLam"]:
        """Exact division: self = poly + proper with deg num < deg den."""
        num = list(self.num)
        den = self.den
        dd = len(den) - 1
        quot = [CRat(0)] * max(0, len(num) - dd)
        while len(num) - 1 >= dd and any(bool(c) for c in num):
            k = len(num) - 1 - dd
            c = num[-1] / den[-1]
            quot[k] = c
            for i, dcoef in enumerate(den):
                num[k + i] = num[k + i] - c * dcoef
            num.pop()
            while len(num) > 1 and not num[-1]:
                num.pop()
        return quot, RatLam(num, den)

    def eval(self, lam: np.ndarray) -> np.ndarray:
        num = sum(complex(c) * lam ** k for k, c in enumerate(self.num))
        den = sum(complex(c) * lam ** k for k, c in enumerate(self.den))
        return num / den


def _pmul(a: List[CRat], b: List[CRat]) -> List[CRat]:
    out = [CRat(0)] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] = out[i + j] + x * y
    return out


def _padd(a: List[CRat], b: List[CRat]) -> List[CRat]:
    out = [CRat(0)] * max(len(a), len(b))
    for i, x in enumerate(a):
        out[i] = out[i] + x
    for i, x in enumerate(b):
        out[i] = out[i] + x
    return out


def zeta_poly_constant(k: int, n: int) -> CRat:
    """Regularized  sum over states of (2M+n)^k  (zeta value at z = 0)."""
    if n == 1:
        return CRat((1 - 2 ** k) * zeta_neg(k))
    if n == 2:
        return CRat(2 ** k * zeta_neg(k + 1))
    raise ValueError("spectral constants implemented for n <= 2")


def closure_rat_lam(c: Closure, n: int) -> RatLam:
    """Diagonal of the quantized radial closure as a rational function of
    lambda = 2M + n.  Gaussian buckets are not rational and are rejected."""
    from .closures import radial_poly_to_star_basis
    if c.gauss:
        raise ValueError("gaussian parts have no rational spectral profile")
    out = RatLam.poly([0])
    if c.base:
        coeffs = c.base.as_poly().as_radial_polynomial() if c.base.is_polynomial() \
            else None
        if coeffs is None:
            raise ValueError("non-radial base in spectral route")
        star = radial_poly_to_star_basis(coeffs, n)
        out = out + RatLam.poly(star)
    for coef, g, j, k in c.resolvent:
        if j or k:
            raise ValueError("laddered resolvent terms need the factored route")
        if not isinstance(coef, _EXACT):
            coef = Fraction(float(np.real(coef))).limit_denominator(10 ** 9)
        out = out + RatLam.resolvent(g).scale(coef)
    return out


def tau_spectral_product(plus_factors: Sequence[Closure],
                         minus_factors: Sequence[Closure], n: int,
                         m_sum: int = 40000) -> TraceReport:
    """tau of a product of radial pairs via eigenvalue sums (exact + tail).

    Takes the closures of the plus factors (in product order) and of the
    minus factors (already in the reversed opposite-algebra order); all
    must be radial with rational spectral profiles.
    """
    fp = RatLam.poly([1])
    for c in plus_factors:
        fp = fp * closure_rat_lam(c, n)
    fm = RatLam.poly([1])
    for c in minus_factors:
        fm = fm * closure_rat_lam(c, n)
    combined = fp + fm.scale(CRat((-1) ** (n + 1)))
    poly_part, proper = combined.poly_and_proper()
    value = CRat(0)
    for k, c in enumerate(poly_part):
        value = value + c * zeta_poly_constant(k, n)
    # proper part: absolutely convergent eigenvalue sum with Richardson tail
    total = complex(value)
    sums = []
    for mmax in (m_sum, 2 * m_sum):
        M = np.arange(mmax, dtype=float)
        lam = 2 * M + n
        mult = np.ones_like(M) if n == 1 else (M + 1)
        sums.append(complex(np.sum(mult * proper.eval(lam))))
    s1, s2 = sums
    extrap = 2 * s2 - s1      # kills the 1/M tail term
    err = abs(s2 - s1)
    return TraceReport(value=total + extrap, route="fock-trace",
                       error_estimate=err,
                       details={"poly_constant": _exact_str(value)})
