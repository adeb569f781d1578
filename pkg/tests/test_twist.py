from fractions import Fraction

import mpmath
import pytest
from conftest import C11A1, C37A1, FIXTURES
from hypothesis import given, settings
from hypothesis import strategies as st
from oracles import exhaustive_local_scale

from bsdcert.arith import is_squarefree, prime_factors, rational_is_square
from bsdcert.curve import CurveModel, cm_test, minimize
from bsdcert.errors import BadTwist
from bsdcert.twist import audit_delta, delta, lattice_relation, minimal_twist, twist_model

E675 = CurveModel(0, 0, 1, 0, 31)
SQUAREFREE = [d for d in range(-50, 51) if d not in (0, 1) and is_squarefree(d)]


def test_twist_model_675a1():
    F = twist_model(E675, -11)
    d = -11
    assert F.ainvs == (0, 0, 1, 0, 31 * d ** 3 + Fraction(d ** 3 - 1, 4))
    assert F.disc == d ** 6 * E675.disc
    assert F.j == E675.j


def test_twist_model_congruent_number_curve():
    E = CurveModel(0, 0, 0, -49, 0)
    F = twist_model(E, -1)
    assert F.ainvs == (0, 0, 0, -49, 0)
    assert F.j == 1728


@pytest.mark.parametrize("d", [12, 0, 1, -4, 18])
def test_bad_twist_parameters(d):
    with pytest.raises(BadTwist):
        twist_model(E675, d)


def test_twist_needs_standard_model():
    with pytest.raises(BadTwist):
        delta(E675.change_coordinates(1, 1, 0, 0), -11)


def test_delta_675a1():
    rec = delta(E675, -11)
    assert rec.delta == 11
    assert rec.delta_exponents == {2: 0, 11: 1}
    assert minimal_twist(E675, -11).disc == E675.disc * 11 ** 6


@pytest.mark.parametrize("d", [5, -3, 13, -7, 21])
def test_delta_2_vanishes_for_d_1_mod_4(fixture_record, d):
    if d % 4 == 1:
        assert delta(fixture_record.model, d).delta_exponents[2] == 0


def test_delta_2_for_signature_00():
    E = CurveModel(1, 0, 0, -1, 0)  # c4 = 49 and c6 = -73 are odd
    assert (E.c4, E.c6) == (49, -73)
    for d in (-1, 3, -5, 7, 11):
        assert delta(E, d).delta_exponents[2] == 2


@pytest.mark.parametrize("label, d", [
    ("675a1", -11), ("675a1", -15), ("675a1", 5), ("675a1", -1), ("675a1", 6),
    ("1568g1", -7), ("1568g1", 14), ("1568g1", -1), ("1568g1", 2),
    ("3267d1", -3), ("3267d1", 33), ("900c1", -10), ("2700l1", 30),
    ("4356a1", -2), ("3136v1", -14),
])
def test_delta_against_exhaustive_minimization(label, d):
    """Per-prime scaling of the twist model found by trying every (u, r, s, t)."""
    E = FIXTURES[label].model
    F = twist_model(E, d)
    # the twist substitution can leave denominators 2 and 4; clear them first
    j = 0
    G = F
    while not G.is_integral:
        j += 1
        G = F.change_coordinates(Fraction(1, 2 ** j), 0, 0, 0)
    u = Fraction(1, 2 ** j)
    for p in sorted(set(prime_factors(2 * d)) | {3}):
        k_max = 3 if p <= 3 else 2
        k = exhaustive_local_scale(G, p, k_max + j)
        assert k < k_max + j
        u *= p ** k
    rec = delta(E, d)
    assert F.disc / u ** 12 == E.disc * rec.delta ** 6
    assert minimal_twist(E, d).disc == F.disc / u ** 12


@settings(max_examples=200, deadline=None)
@given(st.sampled_from(sorted(FIXTURES) + ["11a1", "37a1"]), st.sampled_from(SQUAREFREE))
def test_delta_audit_property(label, d):
    E = {"11a1": C11A1, "37a1": C37A1}.get(label) or FIXTURES[label].model
    ok, rec, F = audit_delta(E, d)
    assert ok
    assert rational_is_square(abs(rec.delta / d))
    assert F.j == E.j


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(sorted(FIXTURES)), st.sampled_from(SQUAREFREE))
def test_double_twist_returns_curve(label, d):
    E = FIXTURES[label].model
    assert minimal_twist(minimal_twist(E, d), d).ainvs == E.ainvs


def test_minimal_twist_is_minimal(fixture_record):
    F = minimal_twist(fixture_record.model, -7)
    assert minimize(F)[0].ainvs == F.ainvs
    assert cm_test(F).field_disc == cm_test(fixture_record.model).field_disc


def test_lattice_scaling_675a1():
    rel = lattice_relation(E675, -11)
    assert rel.scale == 1
    assert rel.error < mpmath.mpf(10) ** -20


def test_lattice_scaling_positive_d():
    rel = lattice_relation(E675, 5)
    assert rel.lhs is None
    d = 5
    expected = 1 / mpmath.sqrt(abs(delta(E675, d).delta / d))
    assert abs(rel.scale - expected) < mpmath.mpf(10) ** -30


@pytest.mark.parametrize("d", [-7, -11, -19, -23])
def test_lattice_identity_for_fixtures(fixture_record, d):
    rel = lattice_relation(fixture_record.model, d, precision=128)
    with mpmath.workprec(160):
        assert abs(rel.lhs - rel.rhs) / rel.rhs < mpmath.mpf(10) ** -20
