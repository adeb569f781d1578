from fractions import Fraction

import mpmath
import pytest
from conftest import C11A1, C37A1, FIXTURES
from oracles import doubling_height

from bsdcert.curve import RationalPoint, add_points, multiply, torsion_subgroup
from bsdcert.errors import RankOutOfScope
from bsdcert.heights import (
    canonical_height,
    certify_generator,
    divisibility_check,
    find_generator,
    height_difference_bound,
    is_torsion,
    naive_height,
    point_search,
    regulator,
)

E675 = FIXTURES["675a1"].model
ORIGIN_37A1 = RationalPoint(Fraction(0), Fraction(0))


def h(E, P, prec=128):
    return canonical_height(E, P, prec).canonical


def test_naive_height():
    assert naive_height(RationalPoint(Fraction(5), Fraction(12))) == pytest.approx(mpmath.log(5))
    assert naive_height(RationalPoint(Fraction(16, 9), Fraction(-260, 27))) == pytest.approx(mpmath.log(16))
    assert naive_height(RationalPoint(Fraction(1, 4), Fraction(-5, 8))) == pytest.approx(mpmath.log(4))


def test_37a1_generator_height():
    # tabulated regulator of 37a1
    assert abs(h(C37A1, ORIGIN_37A1) - mpmath.mpf("0.0511114082399688")) < 1e-15


def test_height_against_doubling_limit(fixture_record):
    E, P = fixture_record.model, fixture_record.generator
    ref = doubling_height(E, P)
    assert abs(h(E, P, 128) - ref) < mpmath.mpf(10) ** -8


def test_37a1_doubling_limit():
    assert abs(h(C37A1, ORIGIN_37A1) - doubling_height(C37A1, ORIGIN_37A1)) < mpmath.mpf(10) ** -8


@pytest.mark.parametrize("n", [2, 3, 5])
def test_quadratic_scaling(fixture_record, n):
    E, P = fixture_record.model, fixture_record.generator
    with mpmath.workprec(160):
        assert abs(h(E, multiply(E, n, P)) - n * n * h(E, P)) < mpmath.mpf(10) ** -25


def test_parallelogram_law():
    E = FIXTURES["1568g1"].model
    P = FIXTURES["1568g1"].generator
    T = RationalPoint(Fraction(0), Fraction(0))
    Q = add_points(E, P, T)
    with mpmath.workprec(160):
        # h(P + T) = h(P) for torsion T
        assert abs(h(E, Q) - h(E, P)) < mpmath.mpf(10) ** -25


def test_torsion_points_have_zero_height():
    E = FIXTURES["1568g1"].model
    for P in torsion_subgroup(E).points:
        if not P.is_zero:
            assert h(E, P) < mpmath.mpf(10) ** -30
            assert is_torsion(E, P)
    for P in torsion_subgroup(C11A1).points:
        assert is_torsion(C11A1, P)
    assert not is_torsion(C37A1, ORIGIN_37A1)


def test_height_difference_bound_holds():
    for E, P in ((E675, FIXTURES["675a1"].generator), (C37A1, ORIGIN_37A1)):
        C = height_difference_bound(E)
        for n in range(1, 7):
            Q = multiply(E, n, P)
            assert abs(naive_height(Q) - h(E, Q)) <= C


def test_height_difference_bound_over_search():
    E = FIXTURES["3136v1"].model
    C = height_difference_bound(E)
    for P in point_search(E, 8.0, True).found:
        assert abs(naive_height(P) - h(E, P)) <= C


def test_point_search_675a1():
    found = point_search(E675, 4.0).found
    assert RationalPoint(Fraction(5), Fraction(12)) in found
    assert all(naive_height(P) <= 4.0 for P in found)
    assert point_search(E675, 0).found == []


def test_point_search_monotone():
    E = FIXTURES["2700l1"].model
    small = set(point_search(E, 4.0).found)
    large = set(point_search(E, 7.0).found)
    assert small <= large
    assert all(E.contains(P) for P in large)


def test_point_search_torsion_filter():
    E = FIXTURES["1568g1"].model
    with_t = set(point_search(E, 3.0, torsion_filter=False).found)
    without = set(point_search(E, 3.0, torsion_filter=True).found)
    assert RationalPoint(Fraction(0), Fraction(0)) in with_t
    assert without <= with_t and all(not is_torsion(E, P) for P in without)


def test_point_search_first_only():
    res = point_search(C37A1, 5.0, True, first_only=True)
    assert len(res.found) == 1 and not is_torsion(C37A1, res.found[0])


def test_regulator():
    assert regulator(C37A1, []) == 1
    assert regulator(C37A1, [ORIGIN_37A1]) == h(C37A1, ORIGIN_37A1)
    with pytest.raises(RankOutOfScope):
        regulator(C37A1, [ORIGIN_37A1, ORIGIN_37A1])


def test_divisibility_over_Q():
    P = ORIGIN_37A1
    assert not divisibility_check(C37A1, P, 2)
    assert not divisibility_check(C37A1, P, 3)
    assert divisibility_check(C37A1, multiply(C37A1, 2, P), 2)
    assert divisibility_check(C37A1, multiply(C37A1, 3, P), 3)
    assert not divisibility_check(C37A1, multiply(C37A1, 3, P), 2)


def test_divisibility_modulo_torsion_point():
    E, P = FIXTURES["1568g1"].model, FIXTURES["1568g1"].generator
    T = RationalPoint(Fraction(0), Fraction(0))
    Q = add_points(E, multiply(E, 2, P), T)
    # 2P + T is not twice a rational point: T itself is not in 2E(Q)
    assert divisibility_check(E, multiply(E, 2, P), 2)
    assert not divisibility_check(E, Q, 2)


def test_divisibility_over_K():
    P = FIXTURES["675a1"].generator
    assert divisibility_check(E675, multiply(E675, 2, P), 2, D=-11)
    with pytest.raises(ValueError):
        divisibility_check(E675, P, 5)
    with pytest.raises(ValueError):
        divisibility_check(E675, P, 2, D=5)


def test_certify_generator_recovers_generator():
    gen = FIXTURES["675a1"].generator
    P = multiply(E675, 2, gen)
    G, ok = certify_generator(E675, P)
    assert ok
    assert abs(h(E675, G) - h(E675, gen)) < mpmath.mpf(10) ** -25


def test_certify_generator_keeps_fixture_generators(fixture_record):
    E, P = fixture_record.model, fixture_record.generator
    G, ok = certify_generator(E, P, time_cap=60)
    assert ok
    assert abs(h(E, G) - h(E, P)) < mpmath.mpf(10) ** -25


def test_find_generator():
    P = find_generator(C37A1, 6.0)
    assert abs(h(C37A1, P) - h(C37A1, ORIGIN_37A1)) < mpmath.mpf(10) ** -25
    assert find_generator(C11A1, 6.0) is None
