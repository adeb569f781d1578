"""Periods, special values of the L-series at s = 1, and analytic Sha."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import mpmath
from mpmath import mpf

from .arith import factorization, kronecker
from .curve import CurveModel
from .errors import ConsistencyError, PrecisionExhausted, ReconstructionFailed
from .local import ap_series, conductor

__all__ = [
    "Periods",
    "LValueReport",
    "ShaAnalytic",
    "periods",
    "l_value",
    "coefficient_count",
    "sha_analytic",
    "rational_reconstruction",
    "twisted_coefficients",
    "dirichlet_coefficients",
    "l_series_values",
]

GUARD_BITS = 32


@dataclass(frozen=True)
class Periods:
    omega_real: mpf  # least positive real period times the number of real components
    lattice_area2: mpf  # ||omega||^2
    real_components: int
    w1: mpf  # least positive real period
    w2: mpmath.mpc  # second lattice generator, Im(w2) > 0
    precision: int


def _cubic_roots(E: CurveModel):
    """Roots of 4x^3 + b2 x^2 + 2 b4 x + b6, real ones first in decreasing order."""
    coeffs = [4, mpf(E.b2.numerator) / E.b2.denominator, 2 * mpf(E.b4.numerator) / E.b4.denominator,
              mpf(E.b6.numerator) / E.b6.denominator]
    roots = mpmath.polyroots(coeffs, maxsteps=200, extraprec=2 * mpmath.mp.prec)
    return roots


def periods(E: CurveModel, precision: int = 128) -> Periods:
    """Period lattice of the invariant differential dx/(2y + a1 x + a3) by the AGM."""
    if precision < 64:
        raise ValueError("precision_bits must be at least 64")
    with mpmath.workprec(precision + GUARD_BITS):
        roots = _cubic_roots(E)
        if E.disc > 0:
            e1, e2, e3 = sorted((mpmath.re(r) for r in roots), reverse=True)
            w1 = mpmath.pi / mpmath.agm(mpmath.sqrt(e1 - e3), mpmath.sqrt(e1 - e2))
            w2 = mpmath.mpc(0, mpmath.pi / mpmath.agm(mpmath.sqrt(e1 - e3), mpmath.sqrt(e2 - e3)))
            comps = 2
        else:
            e1 = max((r for r in roots), key=lambda r: -abs(mpmath.im(r)))
            e1 = mpmath.re(e1)
            b2 = mpf(E.b2.numerator) / E.b2.denominator
            b4 = mpf(E.b4.numerator) / E.b4.denominator
            a = 3 * e1 + b2 / 4
            b = mpmath.sqrt(3 * e1 * e1 + b2 * e1 / 2 + b4 / 2)
            w1 = 2 * mpmath.pi / mpmath.agm(2 * mpmath.sqrt(b), mpmath.sqrt(2 * b + a))
            w2 = -w1 / 2 + mpmath.mpc(0, mpmath.pi / mpmath.agm(2 * mpmath.sqrt(b), mpmath.sqrt(2 * b - a)))
            comps = 1
        area2 = 2 * w1 * mpmath.im(w2)
        omega = comps * w1
        if not (omega > 0 and area2 > 0):
            raise PrecisionExhausted("period computation lost all precision")
    return Periods(omega, area2, comps, w1, w2, precision)


# -- L-series -----------------------------------------------------------------


def coefficient_count(N: int, bits: int, t: float = 1.0) -> int:
    """Terms needed so that exp(-2 pi n min(t, 1/t) / sqrt(N)) is below 2^-bits."""
    c = 2 * float(mpmath.pi) * min(t, 1 / t) / float(mpmath.sqrt(N))
    return int((bits + 8) * 0.6931471805599453 / c) + 2


@lru_cache(maxsize=32)
def _series_cached(ainvs: tuple, n_max: int) -> tuple:
    return tuple(ap_series(CurveModel(*ainvs), n_max))


def dirichlet_coefficients(E: CurveModel, n_max: int) -> tuple:
    return _series_cached(tuple(E.ainvs), int(n_max))


def twisted_coefficients(an, D: int) -> list:
    """a_n(E^D) = chi_D(n) a_n(E), for a fundamental discriminant D coprime to N."""
    return [a * kronecker(D, n) if a else 0 for n, a in enumerate(an)]


@dataclass(frozen=True)
class LValueReport:
    rank_assumed: int
    L1: mpf
    L1_error: mpf
    Lprime1: mpf | None
    Lprime1_error: mpf | None
    epsilon: int
    conductor: int
    terms: int

    @property
    def leading_coeff(self) -> mpf:
        return self.L1 if self.rank_assumed == 0 else self.Lprime1

    @property
    def leading_error(self) -> mpf:
        return self.L1_error if self.rank_assumed == 0 else self.Lprime1_error


def _tail(c, M):
    """Bound for sum_{n > M} 2 exp(-c n) using |a_n / n| <= d(n)/sqrt(n) <= 2."""
    return 2 * mpmath.exp(-c * (M + 1)) / (1 - mpmath.exp(-c))


def _exp_sum(an, c, M):
    """sum_{n<=M} a_n/n exp(-c n), by running powers of exp(-c)."""
    q = mpmath.exp(-c)
    qn = mpf(1)
    s = mpf(0)
    for n in range(1, M + 1):
        qn *= q
        a = an[n]
        if a:
            s += qn * a / n
    return s


def _e1_sum(an, c, M):
    s = mpf(0)
    for n in range(1, M + 1):
        a = an[n]
        if a:
            s += mpmath.e1(c * n) * a / n
    return s


def l_series_values(an, N: int, epsilon: int, precision: int, t=mpf(6) / 5, want_derivative=True):
    """(L(1), err, L'(1) or None, err, terms) for coefficients ``an`` of level N.

    L(1) uses the two-sided theta splitting at t (t != 1 makes the vanishing of
    L(1) for epsilon = -1 a genuine numerical fact); L'(1) uses the E1 kernel
    and only applies for epsilon = -1."""
    with mpmath.workprec(precision + GUARD_BITS):
        sN = mpmath.sqrt(N)
        t = mpf(t)
        c1 = 2 * mpmath.pi * t / sN
        c2 = 2 * mpmath.pi / (t * sN)
        M = min(len(an) - 1, coefficient_count(N, precision, float(t)))
        L1 = _exp_sum(an, c1, M) + epsilon * _exp_sum(an, c2, M)
        err1 = _tail(c1, M) + _tail(c2, M)
        d = d_err = None
        if want_derivative and epsilon == -1:
            c = 2 * mpmath.pi / sN
            M1 = min(len(an) - 1, coefficient_count(N, precision))
            d = 2 * _e1_sum(an, c, M1)
            # E1(x) <= exp(-x) / x
            d_err = 2 * _tail(c, M1) / (c * (M1 + 1))
    return L1, err1, d, d_err, M


def l_value(E: CurveModel, rank_assumed: int, precision: int = 128, N: int | None = None,
            an=None, verify_sign: bool = True) -> LValueReport:
    """L(E,1) and L'(E,1) with rigorous truncation bounds.

    The root number is taken from the assumed rank's parity; ``verify_sign``
    checks that the theta splitting is independent of the split point, which
    fails if that sign is wrong."""
    if rank_assumed not in (0, 1):
        raise ConsistencyError("only analytic rank 0 or 1 is supported")
    N = conductor(E) if N is None else N
    eps = 1 if rank_assumed == 0 else -1
    if an is None:
        an = dirichlet_coefficients(E, coefficient_count(N, precision, 1.4 if verify_sign else 1.2))
    L1, e1, d, de, M = l_series_values(an, N, eps, precision)
    tol = 10 * (e1 + mpf(2) ** (-precision))
    if verify_sign:
        L1b, e1b, _, _, _ = l_series_values(an, N, eps, precision, t=mpf(7) / 5, want_derivative=False)
        if abs(L1 - L1b) > 10 * (e1 + e1b) + mpf(2) ** (-precision + 8):
            raise ConsistencyError("functional equation check failed: wrong root number")
    if rank_assumed == 1:
        if abs(L1) > tol + mpf(2) ** (-precision + 16):
            raise ConsistencyError(f"L(E,1) = {mpmath.nstr(L1, 8)} does not vanish for assumed rank 1")
    else:
        if L1 <= tol:
            raise ConsistencyError(f"L(E,1) = {mpmath.nstr(L1, 8)} vanishes numerically for assumed rank 0")
    return LValueReport(rank_assumed, L1, e1, d, de, eps, N, M)


# -- analytic Sha ---------------------------------------------------------------


@dataclass(frozen=True)
class ShaAnalytic:
    value: mpf
    nearest_rational: Fraction
    ordp: dict = field(hash=False)


def rational_reconstruction(x, max_den: int = 10 ** 6, rel_tol=mpf(10) ** -6) -> Fraction:
    """Best rational approximation with bounded denominator, accepted only if
    within ``rel_tol * |x|``."""
    with mpmath.workprec(max(mpmath.mp.prec, 128)):
        xf = mpmath.mpf(x)
        # continued fraction convergents
        p0, q0, p1, q1 = 0, 1, 1, 0
        y = xf
        best = None
        for _ in range(200):
            a = int(mpmath.floor(y))
            p0, q0, p1, q1 = p1, q1, a * p1 + p0, a * q1 + q0
            if q1 > max_den:
                break
            best = Fraction(p1, q1)
            frac = y - a
            if abs(xf - mpf(p1) / q1) <= rel_tol * abs(xf) or frac == 0:
                break
            y = 1 / frac
        if best is None or abs(xf - mpf(best.numerator) / best.denominator) > rel_tol * abs(xf):
            raise ReconstructionFailed(f"no rational with denominator <= {max_den} near {mpmath.nstr(xf, 15)}")
        return best


def sha_analytic(periods_: Periods, lvals: LValueReport, tamagawa_product: int, torsion_order: int,
                 regulator, max_den: int = 10 ** 6, rel_tol=mpf(10) ** -6) -> ShaAnalytic:
    with mpmath.workprec(periods_.precision + GUARD_BITS):
        value = lvals.leading_coeff * torsion_order ** 2 / (periods_.omega_real * tamagawa_product * regulator)
        q = rational_reconstruction(value, max_den, rel_tol)
    ordp = {}
    for n in (q.numerator, q.denominator):
        for p in factorization(n):
            ordp[p] = _vq(q, p)
    return ShaAnalytic(value, q, ordp)


def _vq(q: Fraction, p: int) -> int:
    from .arith import valuation

    return int(valuation(q, p))
