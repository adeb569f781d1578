"""Naive and canonical heights, regulators, point search and divisibility tests.

Heights use the normalization in which the canonical height of a point is
asymptotic to the logarithmic height of its x-coordinate; with it the BSD
regulator of a rank-one curve is the canonical height of a generator, and
heights of points over imaginary quadratic fields are the absolute ones.
The naive height of x = a/c^2 is h(x) = log max(|a|, c^2).
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from fractions import Fraction
from math import exp, log

import mpmath
from mpmath import mpf

from .arith import prime_factors, valuation
from .curve import (
    CurveModel,
    QuadFieldPoint,
    QuadraticNumber,
    RationalPoint,
    _pmul,
    _psub,
    _pscale,
    add_points,
    division_polynomials,
    enumerate_points,
    multiply,
    phi,
    point_order,
    psi_squared,
    silverman_bound,
    torsion_subgroup,
)
from .errors import BudgetExceeded, Inconclusive, PrecisionExhausted, RankOutOfScope
from .local import local_data

__all__ = [
    "HeightReport",
    "SearchBudget",
    "naive_height",
    "canonical_height",
    "archimedean_height",
    "nonarchimedean_correction",
    "height_difference_bound",
    "point_search",
    "regulator",
    "divisibility_check",
    "find_generator",
    "certify_generator",
    "is_torsion",
    "TORSION_THRESHOLD",
]

TORSION_THRESHOLD = mpf(10) ** -10
GUARD_BITS = 24


def _mpq(q: Fraction) -> mpf:
    return mpf(q.numerator) / q.denominator


def naive_height(P: RationalPoint) -> float:
    if P.is_zero:
        return 0.0
    a, c2 = P.x.numerator, P.x.denominator
    return log(max(abs(a), c2, 1))


@dataclass(frozen=True)
class HeightReport:
    point: RationalPoint
    naive: float
    canonical: mpf
    precision_bits: int


def archimedean_height(E: CurveModel, x: Fraction, precision: int) -> mpf:
    """Archimedean local height mu(x) (without the discriminant term): Tate's series, switching to the x+1 shift
    whenever |x| gets small so that every term stays bounded."""
    with mpmath.workprec(precision + GUARD_BITS):
        b2, b4, b6, b8 = (_mpq(v) for v in (E.b2, E.b4, E.b6, E.b8))
        b2s = b2 - 12
        b4s = b4 - b2 + 6
        b6s = b6 - 2 * b4 + b2 - 4
        b8s = b8 - 3 * b6 + 3 * b4 - b2 + 3
        xv = _mpq(x)
        if abs(xv) < mpf(1) / 2:
            t, beta = 1 / (xv + 1), 0
        else:
            t, beta = 1 / xv, 1
        mu = -mpmath.log(abs(t))
        f = mpf(1)
        n_iter = (precision + GUARD_BITS) // 2 + 8
        for _ in range(n_iter):
            f /= 4
            if beta == 1:
                w = (((b6 * t + 2 * b4) * t + b2) * t + 4) * t
                z = 1 - t * t * (b4 + t * (2 * b6 + t * b8))
                zw = z + w
            else:
                w = (((b6s * t + 2 * b4s) * t + b2s) * t + 4) * t
                z = 1 - t * t * (b4s + t * (2 * b6s + t * b8s))
                zw = z - w
            if abs(w) <= 2 * abs(z):
                mu += f * mpmath.log(abs(z))
                t = w / z
            else:
                mu += f * mpmath.log(abs(zw))
                t = w / zw
                beta = 1 - beta
        return +mu


def nonarchimedean_correction(E: CurveModel, P: RationalPoint, p: int) -> Fraction:
    """Amount (in units of log p, half-normalized) by which the local height at
    p falls below max(0, -ord_p(x)/2) because P reduces to a singular point."""
    x, y = P.x, P.y
    if valuation(x, p) < 0:
        return Fraction(0)
    a1, a2, a3, a4, a6 = E.ainvs
    A = valuation(3 * x * x + 2 * a2 * x + a4 - a1 * y, p)
    B = valuation(2 * y + a1 * x + a3, p)
    if A <= 0 or B <= 0:
        return Fraction(0)
    N = int(valuation(E.disc, p))
    C = valuation(3 * x ** 4 + E.b2 * x ** 3 + 3 * E.b4 * x * x + 3 * E.b6 * x + E.b8, p)
    if valuation(E.c4, p) == 0:
        M = min(Fraction(B), Fraction(N, 2))
        return M * (N - M) / (2 * N)
    if C >= 3 * B:
        return Fraction(B, 3)
    return Fraction(int(C), 8)


def canonical_height(E: CurveModel, P: RationalPoint, precision: int = 128) -> HeightReport:
    """Canonical height of P on a minimal integral model E."""
    if P.is_zero:
        return HeightReport(P, 0.0, mpf(0), precision)
    if not E.contains(P):
        raise ValueError("point not on curve")
    with mpmath.workprec(precision + GUARD_BITS):
        mu = archimedean_height(E, P.x, precision)
        h = mu + mpmath.log(P.x.denominator)
        for p in prime_factors(int(E.disc)):
            corr = nonarchimedean_correction(E, P, p)
            if corr:
                h -= 2 * _mpq(corr) * mpmath.log(p)
        if h < -mpf(2) ** (-precision + 8):
            raise PrecisionExhausted("negative canonical height")
        h = max(h, mpf(0))
    return HeightReport(P, naive_height(P), h, precision)


def is_torsion(E: CurveModel, P: RationalPoint, precision: int = 128) -> bool:
    """Threshold test on the canonical height, confirmed by an exact order check."""
    if P.is_zero:
        return True
    small = canonical_height(E, P, precision).canonical < TORSION_THRESHOLD
    exact = point_order(E, P, 12) is not None
    if small != exact:
        raise PrecisionExhausted("height threshold and exact order disagree")
    return exact


def height_difference_bound(E: CurveModel) -> float:
    """C with |h(P) - h_can(P)| <= C for all rational points (E minimal)."""
    return 2 * silverman_bound(E)


# -- search ---------------------------------------------------------------------


@dataclass
class SearchBudget:
    naive_height_bound: float
    time_cap: float | None
    found: list = field(default_factory=list)
    exhaustive: bool = True


def point_search(E: CurveModel, naive_bound: float, torsion_filter: bool = True,
                 time_cap: float | None = None, first_only: bool = False) -> SearchBudget:
    """All points with naive height <= naive_bound (x = a/c^2, |a| <= e^B, c <= e^(B/2)).

    With ``first_only`` the search stops at the first point that survives the
    filter, so ``found`` is nonempty exactly when such a point exists."""
    budget = SearchBudget(naive_bound, time_cap)
    if naive_bound <= 0:
        return budget
    a_max = int(exp(naive_bound))
    c_max = int(exp(naive_bound / 2))
    if a_max >= 1 << 62:
        raise BudgetExceeded(f"naive height bound {naive_bound:.1f} is beyond 64-bit sieving")
    deadline = None if time_cap is None else time.monotonic() + time_cap
    found = []
    for c in range(1, c_max + 1):
        try:
            pts = enumerate_points(E, a_max, c_max, c_values=(c,), deadline=deadline)
        except BudgetExceeded as exc:
            budget.exhaustive = False
            budget.found = found
            raise BudgetExceeded(f"point search stopped at c={c} of {c_max}") from exc
        for P in pts:
            if naive_height(P) > naive_bound:
                continue
            if torsion_filter and point_order(E, P, 12) is not None:
                continue
            found.append(P)
            if first_only:
                budget.found = found
                return budget
    budget.found = sorted(found, key=lambda P: (naive_height(P), P.x, P.y))
    return budget


def find_generator(E: CurveModel, max_bound: float = 12.0, time_cap: float | None = None) -> RationalPoint | None:
    """Non-torsion point of least canonical height among those found by widening searches."""
    B = 4.0
    while B <= max_bound + 1e-9:
        pts = point_search(E, B, True, time_cap).found
        if pts:
            return min(pts, key=lambda P: (canonical_height(E, P, 64).canonical, P.x, P.y))
        B += 2.0
    return None


def certify_generator(E: CurveModel, P: RationalPoint, precision: int = 128,
                      time_cap: float | None = None) -> tuple[RationalPoint, bool]:
    """Replace P by a generator of E(Q)/tors when E has rank one.

    If P = kG + T with k >= 2 then h(G) <= h(P)/4, so G has naive height at
    most h(P)/4 + C and an exhaustive search to that bound finds it.  Returns
    (generator, True) or (P, False) when the search hits ``time_cap``."""
    best = P
    hbest = canonical_height(E, P, precision).canonical
    while True:
        bound = float(hbest) / 4 + height_difference_bound(E)
        try:
            found = point_search(E, bound, True, time_cap).found
        except BudgetExceeded:
            return P, False
        smaller = [(canonical_height(E, Q, precision).canonical, Q) for Q in found]
        smaller = [(h, Q) for h, Q in smaller if h < hbest * (1 - mpf(10) ** -12)]
        if not smaller:
            return best, True
        hbest, best = min(smaller, key=lambda t: (t[0], t[1].x, t[1].y))


def regulator(E: CurveModel, generators, precision: int = 128) -> mpf:
    gens = list(generators)
    if len(gens) >= 2:
        raise RankOutOfScope("regulators are only supported for rank 0 or 1")
    if not gens:
        return mpf(1)
    return canonical_height(E, gens[0], precision).canonical


# -- divisibility -----------------------------------------------------------------


def _recognize(z, max_den: int, tol) -> Fraction | None:
    """Rational p/q with q <= max_den within tol of the real number z."""
    from .analytic import rational_reconstruction
    from .errors import ReconstructionFailed

    if abs(z) < tol:
        return Fraction(0)
    try:
        q = rational_reconstruction(z, max_den, tol / abs(z))
    except ReconstructionFailed:
        return None
    return q


def _division_equation(E: CurveModel, xP, m: int):
    """Coefficients (lowest first) of phi_m(x) - x_P * psi_m(x)^2."""
    f, F = division_polynomials(E, max(m + 1, 4))
    ph = phi(E, f, F, m)
    ps = psi_squared(E, f, F, m)
    n = max(len(ph), len(ps))
    ph = ph + [Fraction(0)] * (n - len(ph))
    ps = ps + [Fraction(0)] * (n - len(ps))
    return [a - xP * b for a, b in zip(ph, ps)]


def _eval(poly, x):
    acc = 0
    for c in reversed(poly):
        acc = acc * x + c
    return acc


def _lift_quadratic(E: CurveModel, x: QuadraticNumber) -> list[QuadFieldPoint]:
    disc = 4 * x ** 3 + E.b2 * x * x + 2 * E.b4 * x + E.b6
    s = disc.sqrt()
    if s is None:
        return []
    base = -(E.a1 * x + E.a3)
    return [QuadFieldPoint(x, (base + s) / 2, x.D), QuadFieldPoint(x, (base - s) / 2, x.D)]


def divisibility_check(E: CurveModel, P: RationalPoint, m: int, D: int | None = None,
                       precision: int | None = None) -> bool:
    """Is P in m E(F) for F = Q (D None) or F = Q(sqrt(D)), D < 0?

    Roots of phi_m - x_P psi_m^2 are isolated numerically, each is recognized
    as u + v sqrt(D) with rational u, v, and every candidate is verified
    exactly by multiplying back.  Working precision is chosen well above the
    size of the possible coordinates so that genuine roots are always
    recognized."""
    if m not in (2, 3):
        raise ValueError("m must be 2 or 3")
    if D is not None and D >= 0:
        raise ValueError("only imaginary quadratic fields are supported")
    if P.is_zero or point_order(E, P, 12) is not None:
        raise ValueError("divisibility_check expects a non-torsion point")
    if D is None:
        return _divisible_Q(E, P, m, precision)
    return _divisible_K_point(E, QuadFieldPoint.from_rational(P, D), m, D, precision)


def _digits_for(sizes, precision) -> int:
    h = max(log(max(abs(int(v)), 2)) for v in sizes)
    digits = precision // 3 if precision else 0
    return max(digits, int(3 * h / log(10)) + 80)


def _divisible_Q(E: CurveModel, P: RationalPoint, m: int, precision) -> bool:
    poly = _division_equation(E, P.x, m)
    digits = _digits_for([P.x.numerator, P.x.denominator], precision)
    with mpmath.workdps(digits):
        roots = _roots([_mpq(c) for c in poly])
        max_den = 10 ** (digits // 3)
        tol = mpf(10) ** (-(digits // 2))
        for r in roots:
            if abs(mpmath.im(r)) > tol:
                continue
            u = _recognize(mpmath.re(r), max_den, tol)
            if u is None or _eval(poly, u) != 0:
                continue
            for Q in E.lift_x(u):
                if multiply(E, m, Q) == P:
                    return True
    return False


def _roots(coeffs_low_first):
    coeffs = list(reversed(coeffs_low_first))
    while coeffs and coeffs[0] == 0:
        coeffs.pop(0)
    try:
        return mpmath.polyroots(coeffs, maxsteps=400, extraprec=4 * mpmath.mp.prec)
    except mpmath.libmp.NoConvergence as exc:
        raise Inconclusive(f"root isolation failed: {exc}") from exc


def _divisible_K_point(E: CurveModel, P: QuadFieldPoint, m: int, D: int, precision) -> bool:
    """Is the K-rational point P in m E(K)?"""
    if P.is_zero:
        return True
    poly = _division_equation(E, P.x, m)
    sizes = [P.x.a.numerator, P.x.a.denominator, P.x.b.numerator, P.x.b.denominator]
    digits = _digits_for(sizes, precision)
    with mpmath.workdps(digits):
        sq = mpmath.sqrt(abs(D))

        def to_c(q):
            if isinstance(q, QuadraticNumber):
                return mpmath.mpc(_mpq(q.a), _mpq(q.b) * sq)
            return mpmath.mpc(_mpq(Fraction(q)))

        roots = _roots([to_c(c) for c in poly])
        max_den = 10 ** (digits // 3)
        tol = mpf(10) ** (-(digits // 2))
        for r in roots:
            u = _recognize(mpmath.re(r), max_den, tol)
            v = _recognize(mpmath.im(r) / sq, max_den, tol)
            if u is None or v is None:
                continue
            x = QuadraticNumber(u, v, D)
            if _eval(poly, x) != 0:
                continue
            for Q in _lift_quadratic(E, x):
                R = multiply(E, m, Q)
                if not R.is_zero and R.x == P.x and R.y == P.y:
                    return True
    return False
