"""Heegner discriminants, the Gross-Zagier-Zhang height of y_K, and the Heegner index."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import ceil, exp

import mpmath
from mpmath import mpf

from .analytic import (
    Periods,
    coefficient_count,
    dirichlet_coefficients,
    l_series_values,
    periods,
    twisted_coefficients,
)
from .arith import is_squarefree, kronecker, prime_factors, squarefree_part
from .curve import (
    CurveModel,
    QuadFieldPoint,
    QuadraticNumber,
    RationalPoint,
    minimize,
    torsion_subgroup,
)
from .errors import BudgetExceeded, ConsistencyError, Inconclusive
from .heights import canonical_height, divisibility_check, height_difference_bound, point_search
from .local import conductor
from .twist import minimal_twist

__all__ = [
    "HeegnerDiscriminant",
    "HeegnerRecord",
    "is_fundamental_discriminant",
    "find_heegner_discriminants",
    "gzz_height",
    "heegner_index_rank1",
    "heegner_index_rank0_bound",
    "INTEGRALITY_WINDOW",
    "MAX_SEARCH_WORK",
    "search_work",
]

INTEGRALITY_WINDOW = mpf(10) ** -4
MAX_SEARCH_WORK = 1e9


def is_fundamental_discriminant(D: int) -> bool:
    if D in (0, 1):
        return False
    if D % 4 == 1:
        return is_squarefree(D)
    if D % 4 == 0:
        m = D // 4
        return m % 4 in (2, 3) and is_squarefree(m)
    return False


def units_half(D: int) -> int:
    """u_K: half the number of roots of unity in Q(sqrt(D))."""
    return {-3: 3, -4: 2}.get(D, 1)


@dataclass(frozen=True)
class HeegnerDiscriminant:
    D: int
    u_K: int
    splits_all: bool


def satisfies_heegner_hypothesis(N: int, D: int) -> bool:
    return all(kronecker(D, p) == 1 for p in prime_factors(N))


def find_heegner_discriminants(N: int, count: int, include_small: bool = False) -> list[HeegnerDiscriminant]:
    """The ``count`` fundamental D < 0 closest to zero in which every p | N splits."""
    out = []
    D = -3
    while len(out) < count:
        if (include_small or D not in (-3, -4)) and is_fundamental_discriminant(D) \
                and satisfies_heegner_hypothesis(N, D):
            out.append(HeegnerDiscriminant(D, units_half(D), True))
        D -= 1
    return out


@dataclass
class HeegnerRecord:
    D: int
    h_yK: mpf
    h_yK_error: mpf
    mode: str  # exact or upper
    index: int | None = None
    upper: int | None = None
    manin_c: int = 1
    trail: list = field(default_factory=list)
    value: mpf | None = None
    doubled: bool = False

    @property
    def bound(self) -> int:
        return self.index if self.mode == "exact" else self.upper

    def index_text(self) -> str:
        return str(self.index) if self.mode == "exact" else f"<={self.upper}"


@dataclass(frozen=True)
class GZHeight:
    value: mpf
    error: mpf
    LE: mpf  # the factor of E at s = 1 (value or derivative)
    LD: mpf  # the factor of E^D at s = 1


def gzz_height(E: CurveModel, D: int, rank: int, precision: int = 200, manin_c: int = 1,
               periods_: Periods | None = None, N: int | None = None) -> GZHeight:
    """h(y_K) = L'(E/K,1) c^2 u_K^2 sqrt|D| / (2 ||omega||^2) with
    L'(E/K,1) = L'(E,1) L(E^D,1) for rank 1 and L(E,1) L'(E^D,1) for rank 0."""
    F = minimize(E)[0]
    if F.ainvs != E.ainvs:
        E, periods_, N = F, None, None
    N = conductor(E) if N is None else N
    if not is_fundamental_discriminant(D) or D > 0 or not satisfies_heegner_hypothesis(N, D):
        raise ValueError(f"D = {D} is not a Heegner discriminant for conductor {N}")
    ND = N * D * D
    pe = periods(E, precision) if periods_ is None else periods_
    with mpmath.workprec(precision + 32):
        an = dirichlet_coefficients(E, coefficient_count(ND, precision, 1.2))
        eps = 1 if rank == 0 else -1
        L1, e1, d1, de1, _ = l_series_values(an, N, eps, precision)
        at = twisted_coefficients(an, D)
        L2, e2, d2, de2, _ = l_series_values(at, ND, -eps, precision)
        if rank == 1:
            A, eA, B, eB = d1, de1, L2, e2
            vanish, evanish = L1, e1
        else:
            A, eA, B, eB = L1, e1, d2, de2
            vanish, evanish = L2, e2
        if abs(vanish) > 10 * evanish + mpf(2) ** (-precision + 16):
            raise ConsistencyError("the odd-sign factor does not vanish at s = 1")
        tol = 10 * (eA + eB) + mpf(2) ** (-precision + 16)
        if abs(A) < tol or abs(B) < tol:
            raise ConsistencyError("both factors vanish: analytic rank over K exceeds one")
        uK = units_half(D)
        scale = manin_c ** 2 * uK ** 2 * mpmath.sqrt(abs(D)) / (2 * pe.lattice_area2)
        value = A * B * scale
        err = (abs(A) * eB + abs(B) * eA + eA * eB) * scale + abs(value) * mpf(2) ** (-precision)
    return GZHeight(value, err, A, B)


def _two_power_torsion_over_K(E: CurveModel, D: int) -> list[QuadFieldPoint]:
    """Points of E(K)[2] together with E(Q) torsion of 2-power order."""
    pts = []
    tors = torsion_subgroup(E)
    for T in tors.points:
        if T.is_zero:
            continue
        from .curve import point_order

        n = point_order(E, T, 12)
        if n and n & (n - 1) == 0:
            pts.append(QuadFieldPoint.from_rational(T, D))
    # roots of the 2-division cubic lying in K but not in Q
    import sympy

    x = sympy.Symbol("x")
    cubic = sympy.Poly(4 * x ** 3 + sympy.Rational(E.b2) * x ** 2 + 2 * sympy.Rational(E.b4) * x
                       + sympy.Rational(E.b6), x)
    for fac, _ in cubic.factor_list()[1]:
        if fac.degree() != 2:
            continue
        a, b, c = (Fraction(int(sympy.numer(v)), int(sympy.denom(v))) for v in fac.all_coeffs())
        disc = b * b - 4 * a * c
        q = disc / D
        from .arith import rational_is_square
        from math import isqrt

        if rational_is_square(q):
            r = Fraction(isqrt(q.numerator), isqrt(q.denominator))
            for sgn in (1, -1):
                xr = QuadraticNumber(-b / (2 * a), sgn * r / (2 * a), D)
                yr = -(E.a1 * xr + E.a3) / 2
                pts.append(QuadFieldPoint(xr, yr, D))
    return pts


def _divisible_by_two_over_K(E: CurveModel, P: RationalPoint, D: int, precision: int) -> bool:
    """Is P in 2 E(K) + E(K)_tors?"""
    from .curve import add_points
    from .heights import _divisible_K_point

    PK = QuadFieldPoint.from_rational(P, D)
    if divisibility_check(E, P, 2, D, precision):
        return True
    for T in _two_power_torsion_over_K(E, D):
        R = add_points(E, PK, T)
        if _divisible_K_point(E, R, 2, D, precision):
            return True
    return False


def heegner_index_rank1(E: CurveModel, D: int, generator: RationalPoint, precision: int = 200,
                        manin_c: int = 1, gz: GZHeight | None = None) -> HeegnerRecord:
    """Heegner index from sqrt(h(y_K)/h(x)), doubled when x is divisible by 2 in E(K)
    modulo torsion."""
    if gz is None:
        gz = gzz_height(E, D, 1, precision, manin_c)
    hx = canonical_height(E, generator, precision).canonical
    trail = [f"gzz h(y_K)={mpmath.nstr(gz.value, 20)}", f"h(x)={mpmath.nstr(hx, 20)}"]
    with mpmath.workprec(precision + 32):
        ratio = mpmath.sqrt(gz.value / hx)
        # d sqrt(v) = dv / (2 sqrt(v)); the height of x is accurate to working precision
        err = gz.error / (2 * mpmath.sqrt(gz.value * hx)) + ratio * mpf(2) ** (-precision + 8)
        doubled = _divisible_by_two_over_K(E, generator, D, precision)
        if doubled:
            ratio *= 2
            err *= 2
            trail.append("x in 2E(K): doubled")
        rec = HeegnerRecord(D, gz.value, gz.error, "upper", manin_c=manin_c, trail=trail, value=+ratio,
                            doubled=doubled)
        nearest = int(mpmath.nint(ratio))
        if nearest >= 1 and abs(ratio - nearest) < INTEGRALITY_WINDOW and err < mpf(1) / 2 - INTEGRALITY_WINDOW:
            rec.mode = "exact"
            rec.index = nearest
        else:
            rec.upper = int(mpmath.ceil(ratio + err))
            trail.append(f"integrality gate failed: value {mpmath.nstr(ratio, 15)}")
    return rec


def search_work(bound: float) -> float:
    """Numerators sieved by an exhaustive search to naive height ``bound``."""
    return 2 * exp(1.5 * bound)


def heegner_index_rank0_bound(E: CurveModel, D: int, M_target: int, precision: int = 200,
                              manin_c: int = 1, time_cap: float | None = 600.0,
                              gz: GZHeight | None = None, max_work: float = MAX_SEARCH_WORK) -> HeegnerRecord:
    """Certify I_K < M_target for a rank-0 curve by an exhaustive point search on
    E^D below A h(y_K)/M^2 + C (A = 1 if E(Q)[2] = 0 else 4)."""
    if gz is None:
        gz = gzz_height(E, D, 0, precision, manin_c)
    A = 1 if torsion_subgroup(E).two_torsion_rank == 0 else 4
    ED = minimal_twist(E, squarefree_part(D))
    C = height_difference_bound(ED)
    bound = float(A * (gz.value + gz.error) / M_target ** 2) + C
    trail = [f"gzz h(y_K)={mpmath.nstr(gz.value, 20)}", f"A={A}", f"C={C:.6f} bound: silverman",
             f"search height {bound:.6f}"]
    rec = HeegnerRecord(D, gz.value, gz.error, "upper", upper=M_target, manin_c=manin_c, trail=trail)
    if bound <= 0:
        raise Inconclusive("search height is not positive")
    if search_work(bound) > max_work:
        raise Inconclusive(f"search height {bound:.2f} needs about {search_work(bound):.1e} sieve steps")
    # a point below a small height already rules the method out, so look there first
    try:
        for B in [b for b in (6.0, 9.0) if b < bound] + [bound]:
            res = point_search(ED, B, True, time_cap, first_only=True)
            if res.found:
                break
    except BudgetExceeded as exc:
        raise Inconclusive(f"point search on the twist hit its budget: {exc}") from exc
    if res.found:
        raise Inconclusive(f"non-torsion point {res.found[0]} found on the twist below the search height")
    # I_K < M_target, so I_K <= M_target - 1
    rec.upper = M_target - 1
    trail.append(f"no points: I_K < {M_target}")
    return rec
