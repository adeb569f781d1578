"""Small integer and modular helpers shared across the package."""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from math import gcd, isqrt

from sympy import factorint, isprime, primerange
from sympy.polys.domains import ZZ
from sympy.polys.galoistools import gf_factor

__all__ = [
    "valuation",
    "prime_factors",
    "is_squarefree",
    "kronecker",
    "roots_mod_p",
    "is_square",
    "rational_is_square",
    "sqrt_mod_prime",
    "primes_up_to",
    "isprime",
    "fundamental_discriminant",
    "squarefree_part",
    "divisor_count",
]


def valuation(n, p: int) -> float | int:
    """p-adic valuation of an integer or Fraction; ``inf`` for zero."""
    if n == 0:
        return float("inf")
    if isinstance(n, Fraction):
        return valuation(n.numerator, p) - valuation(n.denominator, p)
    n = abs(int(n))
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


@lru_cache(maxsize=4096)
def _factor(n: int) -> tuple:
    return tuple(sorted(factorint(n).items()))


def prime_factors(n: int) -> list[int]:
    n = abs(int(n))
    if n <= 1:
        return []
    return [p for p, _ in _factor(n)]


def factorization(n: int) -> dict[int, int]:
    n = abs(int(n))
    if n <= 1:
        return {}
    return dict(_factor(n))


def is_squarefree(n: int) -> bool:
    if n == 0:
        return False
    return all(e == 1 for e in factorization(n).values())


def squarefree_part(n: int) -> int:
    sign = -1 if n < 0 else 1
    out = 1
    for p, e in factorization(n).items():
        if e % 2:
            out *= p
    return sign * out


def fundamental_discriminant(d: int) -> int:
    """Discriminant of Q(sqrt(d)) for a nonsquare integer d."""
    d = squarefree_part(d)
    return d if d % 4 == 1 else 4 * d


def divisor_count(n: int) -> int:
    out = 1
    for e in factorization(n).values():
        out *= e + 1
    return out


def kronecker(a: int, n: int) -> int:
    """Kronecker symbol (a/n)."""
    if n == 0:
        return 1 if abs(a) == 1 else 0
    result = 1
    if n < 0:
        n = -n
        if a < 0:
            result = -result
    v = 0
    while n % 2 == 0:
        n //= 2
        v += 1
    if v:
        if a % 2 == 0:
            return 0
        if v % 2 and a % 8 in (3, 5):
            result = -result
    # Jacobi symbol (a/n), n odd positive
    a %= n
    while a:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                result = -result
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            result = -result
        a %= n
    return result if n == 1 else 0


def is_square(n: int) -> bool:
    if n < 0:
        return False
    r = isqrt(n)
    return r * r == n


def rational_is_square(q: Fraction) -> bool:
    q = Fraction(q)
    return q >= 0 and is_square(q.numerator) and is_square(q.denominator)


def sqrt_mod_prime(a: int, p: int) -> int | None:
    """A square root of a modulo the odd prime p, or None (Tonelli-Shanks)."""
    a %= p
    if a == 0:
        return 0
    if p == 2:
        return a
    if pow(a, (p - 1) // 2, p) != 1:
        return None
    if p % 4 == 3:
        return pow(a, (p + 1) // 4, p)
    q, s = p - 1, 0
    while q % 2 == 0:
        q //= 2
        s += 1
    z = 2
    while pow(z, (p - 1) // 2, p) != p - 1:
        z += 1
    m, c, t, r = s, pow(z, q, p), pow(a, q, p), pow(a, (q + 1) // 2, p)
    while t != 1:
        i, t2 = 0, t
        while t2 != 1:
            t2 = t2 * t2 % p
            i += 1
        b = pow(c, 1 << (m - i - 1), p)
        m, c, t, r = i, b * b % p, t * b * b % p, r * b % p
    return r


def roots_mod_p(coeffs: list[int], p: int) -> list[int]:
    """Roots in F_p of the polynomial with coefficients ``coeffs`` (highest first),
    listed with multiplicity."""
    f = [c % p for c in coeffs]
    while f and f[0] == 0:
        f = f[1:]
    if len(f) <= 1:
        return []
    if p < 64:
        out = []
        for x in range(p):
            # multiplicity by repeated synthetic division
            g = f
            while len(g) > 1:
                acc, q = 0, []
                for c in g:
                    acc = (acc * x + c) % p
                    q.append(acc)
                if q[-1] != 0:
                    break
                out.append(x)
                g = q[:-1]
        return sorted(out)
    _, factors = gf_factor(f, p, ZZ)
    out = []
    for fac, e in factors:
        if len(fac) == 2:
            out.extend([int(-fac[1] * pow(int(fac[0]), -1, p)) % p] * e)
    return sorted(out)


@lru_cache(maxsize=64)
def _primes_tuple(n: int) -> tuple:
    return tuple(int(p) for p in primerange(2, n + 1))


def primes_up_to(n: int) -> tuple:
    return _primes_tuple(int(n))


def lcm(a: int, b: int) -> int:
    return a * b // gcd(a, b)
