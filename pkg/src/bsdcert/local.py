"""Local reduction data: Tate's algorithm, a_p, conductor, Dirichlet coefficients."""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import isqrt

import numpy as np

from .arith import prime_factors, primes_up_to, roots_mod_p, valuation
from .curve import CurveModel
from .errors import NotMinimalAtP

__all__ = [
    "LocalData",
    "tate_algorithm",
    "local_data",
    "conductor",
    "tamagawa_product",
    "ap",
    "ap_naive",
    "ap_bsgs",
    "ap_series",
    "NAIVE_COUNT_LIMIT",
]

NAIVE_COUNT_LIMIT = 1 << 16
RANDOM_POINT_TRIES = 200


@dataclass(frozen=True)
class LocalData:
    p: int
    kodaira: str
    c_p: int
    f_p: int
    reduction: str  # good, split-mult, nonsplit-mult, additive
    ord_disc: int

    @property
    def a_p_bad(self) -> int:
        return {"split-mult": 1, "nonsplit-mult": -1}.get(self.reduction, 0)


def _v(x, p) -> int | float:
    return valuation(x, p)


def _nroots(coeffs, p) -> int:
    """Number of distinct roots mod p of an integer polynomial (highest first)."""
    return len(set(roots_mod_p([int(c) for c in coeffs], p)))


def _root(coeffs, p) -> int:
    rs = roots_mod_p([int(c) for c in coeffs], p)
    if not rs:
        raise AssertionError("expected a root modulo p")
    # for repeated roots, prefer the one with highest multiplicity
    return max(set(rs), key=rs.count)


def _singular_point(E: CurveModel, p: int) -> tuple[int, int]:
    a1, a2, a3, a4, a6 = (int(a) for a in E.ainvs)
    if p <= 3:
        for x in range(p):
            for y in range(p):
                f = y * y + a1 * x * y + a3 * y - x ** 3 - a2 * x * x - a4 * x - a6
                fx = a1 * y - 3 * x * x - 2 * a2 * x - a4
                fy = 2 * y + a1 * x + a3
                if f % p == 0 and fx % p == 0 and fy % p == 0:
                    return x, y
        raise AssertionError("no singular point found mod p")
    b2, c4, c6 = int(E.b2), int(E.c4), int(E.c6)
    if c4 % p == 0:
        r = -b2 * pow(12, -1, p)
    else:
        r = -(c6 + b2 * c4) * pow(12 * c4, -1, p)
    r %= p
    t = (-(a1 * r + a3) * pow(2, -1, p)) % p
    return r, t


def tate_algorithm(E: CurveModel, p: int) -> LocalData:
    """Kodaira symbol, Tamagawa number and conductor exponent at p.

    E must be integral and minimal at p; a non-minimal model surfaces as
    NotMinimalAtP.
    """
    if not E.is_integral:
        raise ValueError("integral model required")
    n = int(_v(E.disc, p))
    if n == 0:
        return LocalData(p, "I0", 1, 0, "good", 0)

    x0, y0 = _singular_point(E, p)
    C = E.change_coordinates(1, x0, 0, y0)

    def ai(C):
        return tuple(int(a) for a in C.ainvs)

    a1, a2, a3, a4, a6 = ai(C)
    if _v(C.c4, p) == 0:
        split = _nroots([1, a1, -a2], p) > 0
        if split:
            return LocalData(p, f"I{n}", n, 1, "split-mult", n)
        return LocalData(p, f"I{n}", 1 if n % 2 else 2, 1, "nonsplit-mult", n)
    if _v(a6, p) < 2:
        return LocalData(p, "II", 1, n, "additive", n)
    if _v(C.b8, p) < 3:
        return LocalData(p, "III", 2, n - 1, "additive", n)
    if _v(C.b6, p) < 3:
        cp = 3 if _nroots([1, a3 // p, -(a6 // p ** 2)], p) else 1
        return LocalData(p, "IV", cp, n - 2, "additive", n)

    if p == 2:
        s = a2 % 2
        t = 2 * ((a6 // 4) % 2)
    else:
        half = pow(2, -1, p)
        s = (-a1 * half) % p
        t = (-a3 * half) % (p * p)
    C = C.change_coordinates(1, 0, s, t)
    a1, a2, a3, a4, a6 = ai(C)
    b, c, d = a2 // p, a4 // p ** 2, a6 // p ** 3
    w = 27 * d * d - b * b * c * c + 4 * b ** 3 * d - 18 * b * c * d + 4 * c ** 3
    x = 3 * c - b * b
    if w % p:
        cp = 1 + _nroots([1, b, c, d], p)
        return LocalData(p, "I0*", cp, n - 4, "additive", n)
    if x % p:
        r = p * _root_of_multiplicity([1, b, c, d], p, 2)
        C = C.change_coordinates(1, r, 0, 0)
        ix = iy = 3
        mx = my = p * p
        while True:
            a1, a2, a3, a4, a6 = ai(C)
            xa2, xa3, xa4, xa6 = a2 // p, a3 // my, a4 // (p * mx), a6 // (mx * my)
            if (xa3 * xa3 + 4 * xa6) % p:
                cp = 4 if _nroots([1, xa3, -xa6], p) else 2
                break
            C = C.change_coordinates(1, 0, 0, my * _root([1, xa3, -xa6], p))
            my *= p
            iy += 1
            a1, a2, a3, a4, a6 = ai(C)
            xa2, xa3, xa4, xa6 = a2 // p, a3 // my, a4 // (p * mx), a6 // (mx * my)
            if (xa4 * xa4 - 4 * xa2 * xa6) % p:
                cp = 4 if _nroots([xa2, xa4, xa6], p) else 2
                break
            C = C.change_coordinates(1, mx * _root([xa2, xa4, xa6], p), 0, 0)
            mx *= p
            ix += 1
        m = ix + iy - 5
        return LocalData(p, f"I{m}*", cp, n - m - 4, "additive", n)

    r = p * _root([1, b, c, d], p)
    C = C.change_coordinates(1, r, 0, 0)
    a1, a2, a3, a4, a6 = ai(C)
    x3, x6 = a3 // p ** 2, a6 // p ** 4
    if (x3 * x3 + 4 * x6) % p:
        cp = 3 if _nroots([1, x3, -x6], p) else 1
        return LocalData(p, "IV*", cp, n - 6, "additive", n)
    C = C.change_coordinates(1, 0, 0, p * p * _root([1, x3, -x6], p))
    a1, a2, a3, a4, a6 = ai(C)
    if _v(a4, p) < 4:
        return LocalData(p, "III*", 2, n - 7, "additive", n)
    if _v(a6, p) < 6:
        return LocalData(p, "II*", 1, n - 8, "additive", n)
    raise NotMinimalAtP(f"model {E} is not minimal at {p}")


def _root_of_multiplicity(coeffs, p, mult) -> int:
    rs = roots_mod_p([int(c) for c in coeffs], p)
    for r in set(rs):
        if rs.count(r) >= mult:
            return r
    raise AssertionError("no repeated root modulo p")


@lru_cache(maxsize=2048)
def _local_cached(ainvs: tuple, p: int) -> LocalData:
    return tate_algorithm(CurveModel(*ainvs), p)


def local_data(E: CurveModel, p: int) -> LocalData:
    return _local_cached(tuple(E.ainvs), p)


def bad_primes(E: CurveModel) -> list[int]:
    return prime_factors(int(E.disc))


def conductor(E: CurveModel) -> int:
    N = 1
    for p in bad_primes(E):
        N *= p ** local_data(E, p).f_p
    return N


def tamagawa_product(E: CurveModel) -> int:
    out = 1
    for p in bad_primes(E):
        out *= local_data(E, p).c_p
    return out


# -- point counting -------------------------------------------------------------


def ap_naive(E: CurveModel, p: int) -> int:
    """a_p = p + 1 - #E(F_p) by direct enumeration (p must be of good reduction)."""
    a1, a2, a3, a4, a6 = (int(a) for a in E.ainvs)
    if p == 2:
        count = 1
        for x in range(2):
            for y in range(2):
                if (y * y + a1 * x * y + a3 * y - x ** 3 - a2 * x * x - a4 * x - a6) % 2 == 0:
                    count += 1
        return p + 1 - count
    b2, b4, b6 = int(E.b2) % p, int(E.b4) % p, int(E.b6) % p
    xs = np.arange(p, dtype=np.int64)
    x2 = xs * xs % p
    f = (4 * x2 % p * xs + b2 * x2 + 2 * b4 % p * xs + b6) % p
    sq = np.zeros(p, dtype=np.int64)
    sq[x2] = 1
    chi = 2 * sq[f] - 1
    chi[f == 0] = 0
    return -int(chi.sum())


def _ec_add(P, Q, A, p):
    if P is None:
        return Q
    if Q is None:
        return P
    x1, y1 = P
    x2, y2 = Q
    if x1 == x2:
        if (y1 + y2) % p == 0:
            return None
        lam = (3 * x1 * x1 + A) * pow(2 * y1, -1, p) % p
    else:
        lam = (y2 - y1) * pow(x2 - x1, -1, p) % p
    x3 = (lam * lam - x1 - x2) % p
    return (x3, (lam * (x1 - x3) - y1) % p)


def _ec_mul(n, P, A, p):
    R = None
    if n < 0:
        n = -n
        P = (P[0], (-P[1]) % p)
    while n:
        if n & 1:
            R = _ec_add(R, P, A, p)
        P = _ec_add(P, P, A, p)
        n >>= 1
    return R


def _random_point(A, B, p, rng, nonresidue=None):
    """Random affine point with y != 0 on y^2 = x^3 + Ax + B, or on its quadratic
    twist y^2 = x^3 + A g^2 x + B g^3 when a nonresidue g is given.

    None after a bounded number of tries: over tiny fields such a point need
    not exist at all."""
    if nonresidue is not None:
        g = nonresidue
        A, B = A * g * g % p, B * g ** 3 % p
    from .arith import sqrt_mod_prime

    for _ in range(RANDOM_POINT_TRIES):
        x = rng.randrange(p)
        rhs = (x ** 3 + A * x + B) % p
        y = sqrt_mod_prime(rhs, p)
        if y is not None and y != 0:
            return (x, y), A
    return None, A


def _orders_in_interval(P, A, p, lo, hi) -> list[int]:
    """All m in [lo, hi] with mP = O, by baby-step giant-step."""
    width = hi - lo
    steps = isqrt(width) + 1
    baby = {}
    Q = None
    for j in range(steps):
        key = Q
        baby.setdefault(key, []).append(j)
        Q = _ec_add(Q, P, A, p)
    giant = _ec_mul(steps, P, A, p)
    # want lo + i*steps + j with (lo + i*steps)P + jP = O  =>  jP = -(lo + i*steps)P
    R = _ec_mul(lo, P, A, p)
    out = set()
    i = 0
    while i * steps <= width:
        target = None if R is None else (R[0], (-R[1]) % p)
        for j in baby.get(target, ()):
            m = lo + i * steps + j
            if lo <= m <= hi:
                out.add(m)
        R = _ec_add(R, giant, A, p)
        i += 1
    return sorted(out)


def ap_bsgs(E: CurveModel, p: int, seed: int = 0) -> int:
    """a_p via baby-step giant-step on the short model (p >= 5, good reduction).

    Candidate group orders in the Hasse interval are intersected over random
    points on E and on its quadratic twist until a single value survives."""
    if p < 5:
        return ap_naive(E, p)
    A = (-27 * int(E.c4)) % p
    B = (-54 * int(E.c6)) % p
    rng = random.Random(seed * 1000003 + p)
    lo = p + 1 - 2 * isqrt(p) - 2
    hi = p + 1 + 2 * isqrt(p) + 2
    g = next(x for x in range(2, p) if pow(x, (p - 1) // 2, p) == p - 1)
    cands = set(range(lo, hi + 1))
    twist_cands = set(range(lo, hi + 1))  # orders of the twist are 2p + 2 - #E
    for _ in range(40):
        P, A1 = _random_point(A, B, p, rng)
        Q, A2 = _random_point(A, B, p, rng, nonresidue=g)
        if P is None or Q is None:
            break
        cands &= set(_orders_in_interval(P, A1, p, lo, hi))
        twist_cands &= set(_orders_in_interval(Q, A2, p, lo, hi))
        cands &= {2 * p + 2 - m for m in twist_cands}
        if len(cands) == 1:
            return p + 1 - cands.pop()
    # pathological small-p structure: fall back to direct enumeration
    return ap_naive(E, p)


def ap(E: CurveModel, p: int) -> int:
    """a_p with the +1/-1/0 convention at multiplicative/additive primes."""
    if int(E.disc) % p == 0:
        return local_data(E, p).a_p_bad
    if p < NAIVE_COUNT_LIMIT:
        return ap_naive(E, p)
    return ap_bsgs(E, p)


def ap_table(E: CurveModel, bound: int) -> dict[int, int]:
    return {p: ap(E, p) for p in primes_up_to(bound)}


def ap_series(E: CurveModel, n_max: int, aps: dict[int, int] | None = None) -> list[int]:
    """[a_0, a_1, ..., a_{n_max}] (a_0 = 0) from a_p by the Hecke recursions."""
    n_max = int(n_max)
    if aps is None:
        aps = ap_table(E, n_max)
    disc = int(E.disc)
    # smallest prime factor sieve
    spf = np.zeros(n_max + 1, dtype=np.int64)
    for p in primes_up_to(n_max):
        blk = spf[p::p]
        blk[blk == 0] = p
    out = [0] * (n_max + 1)
    if n_max >= 1:
        out[1] = 1
    for n in range(2, n_max + 1):
        p = int(spf[n])
        m, k = n, 0
        while m % p == 0:
            m //= p
            k += 1
        if m > 1:
            out[n] = out[m] * out[p ** k]
            continue
        # n = p^k
        if k == 1:
            out[n] = aps[p]
        elif disc % p == 0:
            out[n] = aps[p] * out[n // p]
        else:
            out[n] = aps[p] * out[n // p] - p * out[n // (p * p)]
    return out
