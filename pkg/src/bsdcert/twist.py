"""Quadratic twists: the explicit twist model, the discriminant scaling
delta(E, d) with Delta' = Delta * delta^6, and the period-lattice relation."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .arith import is_squarefree, prime_factors, rational_is_square, valuation
from .curve import CurveModel, minimize
from .errors import BadTwist, ConsistencyError, PrecisionExhausted

__all__ = [
    "TwistRecord",
    "twist_model",
    "delta",
    "minimal_twist",
    "audit_delta",
    "lattice_relation",
    "signature",
]


def _check_d(d: int) -> int:
    d = int(d)
    if d in (0, 1) or not is_squarefree(d):
        raise BadTwist(f"twist parameter {d} must be squarefree and not 0 or 1")
    return d


def _require_standard(E: CurveModel):
    if not (E.is_integral and E.is_standardized):
        raise BadTwist("twist formulas need a standardized integral model")


def twist_model(E: CurveModel, d: int) -> CurveModel:
    """The (generally non-minimal) model of E^d obtained by the substitution
    that keeps a1, a3 and scales by d; its discriminant is d^6 * Delta(E)."""
    d = _check_d(d)
    _require_standard(E)
    a1, a2, a3, a4, a6 = E.ainvs
    A2 = a2 * d + a1 * a1 * Fraction(d - 1, 4)
    A4 = a4 * d * d + a1 * a3 * Fraction(d * d - 1, 2)
    A6 = a6 * d ** 3 + a3 * a3 * Fraction(d ** 3 - 1, 4)
    F = CurveModel(a1, A2, a3, A4, A6)
    assert F.disc == E.disc * d ** 6 and F.j == E.j
    return F


def signature(E: CurveModel) -> tuple:
    return (valuation(E.c4, 2), valuation(E.c6, 2), valuation(E.disc, 2))


def _lambda(E: CurveModel, p: int):
    return min(3 * valuation(E.c4, p), 2 * valuation(E.c6, p), valuation(E.disc, p))


def _scaled(n: int, k: int) -> int:
    if n % 2 ** k:
        raise AssertionError("2-adic scaling is not integral")
    return n // 2 ** k


def _delta_2(E: CurveModel, d: int) -> int:
    s4, s6, sD = signature(E)
    c6 = int(E.c6)
    if d % 4 == 1:
        return 0
    if d % 4 == 3:
        if (s4 == 0 and s6 == 0) or (s6 == 3 and sD == 0):
            return 2
        if s4 == 4 and s6 == 6 and sD >= 12 and _scaled(c6 * d, 6) % 4 == 3:
            return -2
        if s4 >= 8 and s6 == 9 and sD == 12 and _scaled(c6 * d, 9) % 4 == 1:
            return -2
        return 0
    # d even
    if s4 == 0 and s6 == 0:
        return 3
    if s4 == 6 and s6 == 9 and sD >= 18 and _scaled(c6 * d, 10) % 4 == 3:
        return -3
    if s4 in (4, 5) or s6 in (3, 5, 7):
        return 1
    if s4 >= 6 and s6 == 6 and sD == 6 and _scaled(c6 * d, 7) % 4 == 3:
        return 1
    return -1


@dataclass(frozen=True)
class TwistRecord:
    d: int
    model: CurveModel
    delta: Fraction
    delta_exponents: dict = field(hash=False)
    sig: tuple
    lambdas: dict = field(hash=False)


def delta(E: CurveModel, d: int) -> TwistRecord:
    """delta(E, d) from the per-prime case table; p ranges over primes dividing 2d."""
    d = _check_d(d)
    _require_standard(E)
    exps, lams = {}, {}
    for p in sorted(set(prime_factors(2 * d))):
        if p == 2:
            exps[2] = _delta_2(E, d)
        else:
            lam = _lambda(E, p)
            lams[p] = lam
            exps[p] = 1 if (lam < 6 or (p == 3 and valuation(E.c6, 3) == 5)) else -1
    val = Fraction(1)
    for p, e in exps.items():
        val *= Fraction(p) ** e
    if not rational_is_square(abs(val / d)):
        raise ConsistencyError(f"|delta/d| = {abs(val / d)} is not a square for d={d}")
    return TwistRecord(d, twist_model(E, d), val, exps, signature(E), lams)


def minimal_twist(E: CurveModel, d: int) -> CurveModel:
    return minimize(twist_model(E, d))[0]


def audit_delta(E: CurveModel, d: int) -> tuple[bool, TwistRecord, CurveModel]:
    """Compare the case table against direct minimization of the twist model."""
    rec = delta(E, d)
    F = minimal_twist(E, d)
    return F.disc == E.disc * rec.delta ** 6, rec, F


@dataclass(frozen=True)
class LatticeRelation:
    scale: object  # |delta/d|^(-1/2) as an mpmath number
    lhs: object  # Omega(E) * Omega(E^d) * sqrt(delta)
    rhs: object  # [E(R):E0(R)] * ||omega||^2
    error: object


def lattice_relation(E: CurveModel, d: int, precision: int = 128, tol=None) -> LatticeRelation:
    """Scaling |delta/d|^(-1/2) between the period lattices of E^d and E.

    For d < 0 the product identity Omega(E) Omega(E^d) sqrt(delta) =
    [E(R):E0(R)] ||omega||^2 is evaluated and must hold to ``tol``."""
    import mpmath

    from .analytic import periods

    rec = delta(E, d)
    with mpmath.workprec(precision + 32):
        scale = 1 / mpmath.sqrt(mpmath.mpf(abs(rec.delta / d).numerator) / abs(rec.delta / d).denominator)
        if d > 0:
            return LatticeRelation(+scale, None, None, None)
        PE = periods(E, precision)
        PD = periods(minimal_twist(E, d), precision)
        dl = mpmath.mpf(rec.delta.numerator) / rec.delta.denominator
        lhs = PE.omega_real * PD.omega_real * mpmath.sqrt(dl)
        rhs = PE.real_components * PE.lattice_area2
        err = abs(lhs - rhs) / abs(rhs)
    tol = mpmath.mpf(2) ** (-precision + 40) if tol is None else tol
    if err > tol:
        raise PrecisionExhausted(f"lattice identity fails: relative error {mpmath.nstr(err, 5)}")
    return LatticeRelation(scale, lhs, rhs, err)
