from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from sympy import factorint, jacobi_symbol
from sympy.ntheory import sqrt_mod

from bsdcert.arith import (
    divisor_count,
    is_square,
    is_squarefree,
    kronecker,
    primes_up_to,
    rational_is_square,
    roots_mod_p,
    sqrt_mod_prime,
    squarefree_part,
    valuation,
)


def kronecker_oracle(a, n):
    """Kronecker symbol by multiplicativity in n, using sympy's Jacobi symbol
    for the odd part and the defining tables for 2 and -1."""
    if n == 0:
        return 1 if abs(a) == 1 else 0
    out = 1
    if n < 0:
        n = -n
        if a < 0:
            out = -out
    while n % 2 == 0:
        n //= 2
        if a % 2 == 0:
            return 0
        out *= 1 if a % 8 in (1, 7) else -1
    if n > 1:
        out *= jacobi_symbol(a % n, n)
    return out


@given(st.integers(-500, 500), st.integers(-300, 300))
def test_kronecker_matches_oracle(a, n):
    assert kronecker(a, n) == kronecker_oracle(a, n)


def test_kronecker_known_splitting():
    # -11 is a square mod 3 and mod 5, so both split in Q(sqrt(-11))
    assert kronecker(-11, 3) == 1
    assert kronecker(-11, 5) == 1
    assert kronecker(-3, 3) == 0
    assert kronecker(-3, 5) == -1


@given(st.integers(1, 10 ** 6), st.sampled_from([2, 3, 5, 7, 11]))
def test_valuation(n, p):
    assert valuation(n, p) == factorint(n).get(p, 0)
    assert valuation(Fraction(1, n), p) == -factorint(n).get(p, 0)


def test_valuation_of_zero_is_infinite():
    assert valuation(0, 5) == float("inf")


@given(st.integers(-10 ** 5, 10 ** 5).filter(lambda n: n != 0))
def test_squarefree_part(n):
    s = squarefree_part(n)
    assert is_squarefree(s)
    q = Fraction(n, s)
    assert q.denominator == 1 and is_square(int(q))


@given(st.integers(1, 5000))
def test_divisor_count(n):
    assert divisor_count(n) == sum(1 for k in range(1, n + 1) if n % k == 0)


@given(st.integers(0, 10 ** 8))
def test_is_square(n):
    r = int(n ** 0.5)
    assert is_square(n) == any((r + k) ** 2 == n for k in (-1, 0, 1))


def test_rational_is_square():
    assert rational_is_square(Fraction(9, 4))
    assert not rational_is_square(Fraction(-9, 4))
    assert not rational_is_square(Fraction(2, 9))


@pytest.mark.parametrize("p", [3, 5, 7, 13, 17, 101, 1009])
def test_sqrt_mod_prime(p):
    for a in range(p):
        r = sqrt_mod_prime(a, p)
        if sqrt_mod(a, p) is None:
            assert r is None
        else:
            assert r * r % p == a


@pytest.mark.parametrize("p", [2, 3, 7, 61, 67, 10007])
def test_roots_mod_p_against_enumeration(p):
    coeffs = [1, 0, -7, 6, 3]
    roots = roots_mod_p(coeffs, p)
    brute = [x for x in range(min(p, 20000))
             if sum(c * pow(x, 4 - i, p) for i, c in enumerate(coeffs)) % p == 0]
    assert sorted(set(roots)) == brute


def test_roots_with_multiplicity():
    # (x - 1)^2 (x + 2) = x^3 - 3x + 2
    assert roots_mod_p([1, 0, -3, 2], 7) == [1, 1, 5]


def test_primes_up_to():
    assert primes_up_to(30) == (2, 3, 5, 7, 11, 13, 17, 19, 23, 29)
    assert len(primes_up_to(10 ** 4)) == 1229
