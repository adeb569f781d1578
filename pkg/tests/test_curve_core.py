from fractions import Fraction

import mpmath
import pytest
from conftest import C11A1, C37A1, FIXTURES
from hypothesis import given, settings
from hypothesis import strategies as st

from bsdcert.curve import (
    CM_J_TABLE,
    INFINITY,
    CurveModel,
    QuadFieldPoint,
    QuadraticNumber,
    RationalPoint,
    add_points,
    cm_test,
    division_polynomials,
    is_minimal_standardized,
    minimize,
    multiply,
    negate,
    point_order,
    torsion_subgroup,
)
from bsdcert.errors import SingularCurve
from bsdcert.local import ap, bad_primes
from bsdcert.twist import minimal_twist


# -- invariants ----------------------------------------------------------------


def test_invariants_675a1():
    E = CurveModel(0, 0, 1, 0, 31)
    assert (E.b2, E.b4, E.b6) == (0, 0, 125)
    assert (E.c4, E.c6, E.disc) == (0, -27000, -421875)
    assert E.j == 0


def test_invariants_1568g1():
    E = CurveModel(0, 0, 0, -49, 0)
    assert (E.c4, E.c6, E.disc) == (2352, 0, 7529536)
    assert E.j == 1728


def test_singular_model_rejected():
    with pytest.raises(SingularCurve):
        CurveModel(0, 0, 0, 0, 0)
    with pytest.raises(SingularCurve):
        CurveModel(0, 0, 0, -3, 2)  # node at (1, 0)


@given(st.lists(st.integers(-30, 30), min_size=5, max_size=5))
def test_invariant_identities(a):
    try:
        E = CurveModel(*a)
    except SingularCurve:
        return
    assert 4 * E.b8 == E.b2 * E.b6 - E.b4 ** 2
    assert 1728 * E.disc == E.c4 ** 3 - E.c6 ** 2


# -- minimal models --------------------------------------------------------------


def test_fixtures_are_minimal_standardized(fixture_record):
    assert is_minimal_standardized(fixture_record.model)


def test_non_standardized_is_not_minimal_standardized():
    assert not is_minimal_standardized(CurveModel(0, 0, 1, 0, 31).change_coordinates(1, 1, 0, 0))
    assert not is_minimal_standardized(CurveModel(0, 0, 1, 0, 31).change_coordinates(Fraction(1, 2), 0, 0, 0))


@pytest.mark.parametrize("u", [Fraction(1, 2), Fraction(1, 3), Fraction(1, 6)])
@pytest.mark.parametrize("label", ["675a1", "1568g1", "3267d1"])
def test_minimize_undoes_blowup(label, u):
    E = FIXTURES[label].model
    F = E.change_coordinates(u, 3, 1, -2)
    assert F.is_integral
    assert F.disc == E.disc / u ** 12
    G, (v, r, s, t) = minimize(F)
    assert G.ainvs == E.ainvs
    assert F.change_coordinates(v, r, s, t).ainvs == E.ainvs


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(sorted(FIXTURES) + ["11a1", "37a1"]), st.sampled_from([1, 2, 3, 5, 6]),
       st.integers(-5, 5), st.integers(-3, 3), st.integers(-7, 7))
def test_minimize_is_model_independent(label, k, r, s, t):
    E = {"11a1": C11A1, "37a1": C37A1}.get(label) or FIXTURES[label].model
    F = E.change_coordinates(Fraction(1, k), r, s, t)
    assert minimize(F)[0].ainvs == E.ainvs


def test_minimize_rational_model():
    E = CurveModel(0, 0, 1, 0, 31)
    F = E.change_coordinates(2, 0, 0, 0)  # non-integral coefficients
    assert not F.is_integral
    assert minimize(F)[0].ainvs == E.ainvs


# -- group law ---------------------------------------------------------------------

# Multiples of (0, 0) on y^2 + y = x^3 - x
MULTIPLES_37A1 = {
    2: (1, 0), 3: (-1, -1), 4: (2, -3), 5: (Fraction(1, 4), Fraction(-5, 8)), 6: (6, 14),
    7: (Fraction(-5, 9), Fraction(8, 27)), 8: (Fraction(21, 25), Fraction(-69, 125)),
}


def collinear(P, Q, R):
    """Oracle: P + Q + R = 0 iff the three (affine, distinct) points are collinear."""
    return (Q.x - P.x) * (R.y - P.y) == (R.x - P.x) * (Q.y - P.y)


def test_multiples_on_37a1():
    E = C37A1
    P = RationalPoint(Fraction(0), Fraction(0))
    for n, (x, y) in MULTIPLES_37A1.items():
        Q = multiply(E, n, P)
        assert (Q.x, Q.y) == (x, y)
        assert E.contains(Q)


def test_addition_against_collinearity():
    E = C37A1
    P = RationalPoint(Fraction(0), Fraction(0))
    pts = [multiply(E, n, P) for n in range(1, 9)]
    for i, A in enumerate(pts):
        for B in pts[i + 1:]:
            C = add_points(E, A, B)
            assert E.contains(C)
            assert collinear(A, B, negate(E, C))


@settings(max_examples=30, deadline=None)
@given(st.sampled_from(sorted(FIXTURES)), st.integers(-6, 6), st.integers(-6, 6), st.integers(-6, 6))
def test_group_law_axioms(label, a, b, c):
    rec = FIXTURES[label]
    E, G = rec.model, rec.generator
    A, B, C = (multiply(E, n, G) for n in (a, b, c))
    assert add_points(E, add_points(E, A, B), C) == add_points(E, A, add_points(E, B, C))
    assert add_points(E, A, B) == add_points(E, B, A)
    assert add_points(E, A, B) == multiply(E, a + b, G)
    assert add_points(E, A, negate(E, A)).is_zero
    assert add_points(E, A, INFINITY) == A


def test_group_law_over_quadratic_field():
    E = FIXTURES["675a1"].model
    D = -11
    P = QuadFieldPoint.from_rational(FIXTURES["675a1"].generator, D)
    Q = multiply(E, 3, P)
    R = multiply(E, 3, FIXTURES["675a1"].generator)
    assert Q == QuadFieldPoint.from_rational(R, D)


def test_quadratic_number_arithmetic():
    a = QuadraticNumber(1, 2, -11)
    b = QuadraticNumber(Fraction(1, 3), -1, -11)
    assert a * a.inverse() == 1
    assert (a * b).norm() == a.norm() * b.norm()
    assert (a + b) - b == a
    s = (a * a).sqrt()
    assert s is not None and s * s == a * a


def test_division_polynomial_roots_are_torsion_x():
    E = CurveModel(0, 0, 0, 0, 1)  # y^2 = x^3 + 1, torsion Z/6
    psi, _ = division_polynomials(E, 3)
    psi3 = psi[3]

    def ev(f, x):
        return sum(c * x ** i for i, c in enumerate(f))

    # (0, +-1) have order 3
    assert ev(psi3, Fraction(0)) == 0
    assert point_order(E, RationalPoint(Fraction(0), Fraction(1))) == 3


# -- torsion -----------------------------------------------------------------------


def test_torsion_y2_x3_plus_1():
    T = torsion_subgroup(CurveModel(0, 0, 0, 0, 1))
    assert T.invariants == (6,)
    assert T.generators[0] in (RationalPoint(Fraction(2), Fraction(3)), RationalPoint(Fraction(2), Fraction(-3)))


def test_torsion_1568g1_full_two_torsion():
    T = torsion_subgroup(CurveModel(0, 0, 0, -49, 0))
    assert T.invariants == (2, 2)
    assert {(P.x, P.y) for P in T.points if not P.is_zero} == {(0, 0), (7, 0), (-7, 0)}
    assert T.two_torsion_rank == 2


def test_torsion_11a1():
    assert torsion_subgroup(C11A1).invariants == (5,)
    assert torsion_subgroup(C37A1).order == 1


@pytest.mark.parametrize("ainvs, invariants", [
    ((1, 0, 1, 4, -6), (6,)),
    ((1, 0, 1, -19, 26), (2, 6)),
    ((1, 1, 1, -10, -10), (2, 4)),
    ((0, 1, 1, -1, 0), (3,)),
    ((1, -1, 1, -3, 3), (7,)),
    ((1, -1, 1, -14, 29), (9,)),
    ((1, 0, 0, -45, 81), (10,)),
    ((1, -1, 1, -122, 1721), (12,)),
    ((1, 0, 0, -1070, 7812), (2, 8)),
    ((1, 0, 1, -1070, 7812), ()),
])
def test_torsion_structure_against_point_counts(ainvs, invariants):
    F, _ = minimize(CurveModel(*ainvs))
    T = torsion_subgroup(F)
    assert T.invariants == invariants
    for P in T.points:
        assert F.contains(P)
        n = point_order(F, P, 12)
        assert n is not None and T.order % n == 0
    # the torsion order divides #E(F_p) at good p > 2
    for p in (3, 5, 7, 11, 13, 17, 19, 23):
        if p not in bad_primes(F):
            assert (p + 1 - ap(F, p)) % T.order == 0


def test_torsion_of_fixtures_divides_point_counts(fixture_record):
    E = fixture_record.model
    T = torsion_subgroup(E)
    counts = [p + 1 - ap(E, p) for p in (5, 7, 11, 13, 17, 19, 23, 29, 31, 37) if p not in bad_primes(E)]
    from math import gcd
    from functools import reduce
    assert reduce(gcd, counts) % T.order == 0
    assert T.order in (1, 2, 3, 4, 6)


# -- complex multiplication -------------------------------------------------------


@pytest.mark.parametrize("j, D", sorted(CM_J_TABLE.items(), key=lambda kv: -kv[1]))
def test_cm_table_against_modular_j(j, D):
    """j((D + sqrt(D))/2) = 1728 * kleinj, evaluated to 60 digits."""
    with mpmath.workdps(80):
        tau = (D + mpmath.sqrt(mpmath.mpf(D))) / 2
        val = 1728 * mpmath.kleinj(tau)
        assert abs(mpmath.im(val)) < mpmath.mpf(10) ** -40
        assert abs(mpmath.re(val) - j) < mpmath.mpf(10) ** -60 * max(1, abs(j))


def test_cm_detection(fixture_record):
    E = fixture_record.model
    cm = cm_test(E)
    assert cm.is_cm
    assert cm.field_disc in (-3, -4)
    assert not cm_test(C37A1).is_cm and not cm_test(C11A1).is_cm


@pytest.mark.parametrize("d", [-7, -11, 5, 13])
def test_cm_field_is_twist_invariant(fixture_record, d):
    from math import gcd
    E = fixture_record.model
    F = minimal_twist(E, d)
    assert cm_test(F).field_disc == cm_test(E).field_disc


def test_non_maximal_order_detected():
    # j = 54000 has CM by the order of discriminant -12
    E = CurveModel(0, 0, 0, -15, 22)
    assert E.j == 54000
    cm = cm_test(E)
    assert cm.is_cm and cm.cm_disc == -12 and cm.field_disc == -3 and not cm.maximal_order
