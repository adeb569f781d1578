from fractions import Fraction

import mpmath
import pytest
from conftest import C11A1, C37A1, FIXTURES
from hypothesis import given
from hypothesis import strategies as st
from oracles import integrated_lattice_area, integrated_real_period

from bsdcert.analytic import l_value, periods, rational_reconstruction, sha_analytic
from bsdcert.curve import torsion_subgroup
from bsdcert.errors import ConsistencyError, ReconstructionFailed
from bsdcert.heights import regulator
from bsdcert.local import tamagawa_product

TOL15 = mpmath.mpf(10) ** -15


def test_periods_against_quadrature(fixture_record):
    E = fixture_record.model
    pe = periods(E, 128)
    with mpmath.workdps(40):
        w1 = integrated_real_period(E, 40)
        area = integrated_lattice_area(E, 40)
        assert abs(pe.w1 - w1) / w1 < TOL15
        assert abs(pe.lattice_area2 - area) / area < TOL15
    assert pe.real_components == (2 if E.disc > 0 else 1)


@pytest.mark.parametrize("E, comps", [(C11A1, 1), (C37A1, 2)], ids=["11a1", "37a1"])
def test_periods_prime_conductor(E, comps):
    pe = periods(E, 128)
    assert pe.real_components == comps
    with mpmath.workdps(40):
        assert abs(pe.w1 - integrated_real_period(E, 40)) < TOL15
        assert abs(pe.lattice_area2 - integrated_lattice_area(E, 40)) < TOL15


def test_precision_floor():
    with pytest.raises(ValueError):
        periods(C37A1, 32)


def test_37a1_reference_values():
    # tabulated: Omega = 5.98691729246392, L'(E,1) = 0.305999773834052
    pe = periods(C37A1, 128)
    lv = l_value(C37A1, 1, 128)
    assert abs(pe.omega_real - mpmath.mpf("5.98691729246392")) < 1e-13
    assert abs(lv.Lprime1 - mpmath.mpf("0.305999773834052")) < 1e-14
    assert abs(lv.L1) < mpmath.mpf(10) ** -30


def test_11a1_l_over_omega_is_one_fifth():
    pe = periods(C11A1, 128)
    lv = l_value(C11A1, 0, 128)
    assert abs(lv.L1 - mpmath.mpf("0.253841860855911")) < 1e-14
    with mpmath.workprec(128):
        assert rational_reconstruction(lv.L1 / pe.omega_real) == Fraction(1, 5)


def test_wrong_rank_assumption_rejected():
    with pytest.raises(ConsistencyError):
        l_value(C37A1, 0, 128)
    with pytest.raises(ConsistencyError):
        l_value(C11A1, 1, 128)
    with pytest.raises(ConsistencyError):
        l_value(FIXTURES["675a1"].model, 0, 128)
    with pytest.raises(ConsistencyError):
        l_value(C37A1, 2, 128)


def test_root_number_check():
    l_value(C37A1, 1, 128, verify_sign=True)
    l_value(C11A1, 0, 128, verify_sign=True)


def test_rank_one_values_two_precisions(fixture_record):
    E = fixture_record.model
    lo = l_value(E, 1, 128)
    hi = l_value(E, 1, 256)
    with mpmath.workprec(300):
        assert abs(hi.L1) < mpmath.mpf(10) ** -20
        assert hi.Lprime1 > 0
        assert abs(lo.Lprime1 - hi.Lprime1) < mpmath.mpf(2) ** -100
        assert hi.Lprime1_error < mpmath.mpf(2) ** -200


def test_sha_analytic_is_a_square(fixture_record):
    E = fixture_record.model
    pe = periods(E, 128)
    lv = l_value(E, 1, 128)
    reg = regulator(E, [fixture_record.generator], 128)
    sha = sha_analytic(pe, lv, tamagawa_product(E), torsion_subgroup(E).order, reg)
    q = sha.nearest_rational
    assert q.denominator == 1 and q.numerator >= 1
    assert mpmath.sqrt(q.numerator) == int(mpmath.sqrt(q.numerator))
    assert abs(sha.value - q.numerator) < mpmath.mpf(10) ** -25


@given(st.integers(-10 ** 5, 10 ** 5), st.integers(1, 10 ** 5))
def test_rational_reconstruction_recovers_fractions(a, b):
    q = Fraction(a, b)
    if q == 0:
        return
    with mpmath.workprec(128):
        x = mpmath.mpf(q.numerator) / q.denominator + mpmath.mpf(10) ** -20
        assert rational_reconstruction(x, rel_tol=mpmath.mpf(10) ** -15) == q
        # the default window accepts the first convergent within 1e-6
        assert abs(rational_reconstruction(x) - q) <= Fraction(1, 10 ** 6) * abs(q)


def test_rational_reconstruction_rejects_irrationals():
    with pytest.raises(ReconstructionFailed):
        rational_reconstruction(mpmath.pi, max_den=1000, rel_tol=mpmath.mpf(10) ** -12)
