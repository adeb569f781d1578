"""Exact arithmetic on Weierstrass models over Q.

Invariants, global minimal models (Laska-Kraus-Connell), the group law over Q
and over imaginary quadratic fields, division polynomials, torsion and CM
detection.  Everything here is exact; no floating point enters the group law.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import exp, gcd, isqrt, log
from typing import Union

from .arith import factorization, is_square, prime_factors, primes_up_to, valuation
from .errors import BudgetExceeded, SingularCurve

__all__ = [
    "CurveModel",
    "RationalPoint",
    "QuadraticNumber",
    "QuadFieldPoint",
    "CMData",
    "TorsionGroup",
    "INFINITY",
    "derive_invariants",
    "is_minimal_standardized",
    "minimize",
    "add_points",
    "negate",
    "multiply",
    "point_order",
    "torsion_subgroup",
    "cm_test",
    "CM_J_TABLE",
    "division_polynomials",
    "enumerate_points",
]


def _q(v) -> Fraction:
    return v if isinstance(v, Fraction) else Fraction(v)


@dataclass(frozen=True)
class CurveModel:
    """y^2 + a1 xy + a3 y = x^3 + a2 x^2 + a4 x + a6 with rational coefficients."""

    a1: Fraction
    a2: Fraction
    a3: Fraction
    a4: Fraction
    a6: Fraction
    b2: Fraction = field(init=False, repr=False)
    b4: Fraction = field(init=False, repr=False)
    b6: Fraction = field(init=False, repr=False)
    b8: Fraction = field(init=False, repr=False)
    c4: Fraction = field(init=False, repr=False)
    c6: Fraction = field(init=False, repr=False)
    disc: Fraction = field(init=False, repr=False)

    def __post_init__(self):
        a1, a2, a3, a4, a6 = (_q(v) for v in (self.a1, self.a2, self.a3, self.a4, self.a6))
        for name, v in zip(("a1", "a2", "a3", "a4", "a6"), (a1, a2, a3, a4, a6)):
            object.__setattr__(self, name, v)
        b2 = a1 * a1 + 4 * a2
        b4 = 2 * a4 + a1 * a3
        b6 = a3 * a3 + 4 * a6
        b8 = a1 * a1 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4
        c4 = b2 * b2 - 24 * b4
        c6 = -b2 ** 3 + 36 * b2 * b4 - 216 * b6
        disc = -b2 * b2 * b8 - 8 * b4 ** 3 - 27 * b6 * b6 + 9 * b2 * b4 * b6
        if disc == 0:
            raise SingularCurve(f"discriminant vanishes for {self.ainvs}")
        for name, v in (("b2", b2), ("b4", b4), ("b6", b6), ("b8", b8), ("c4", c4), ("c6", c6), ("disc", disc)):
            object.__setattr__(self, name, v)

    @classmethod
    def from_ainvs(cls, ainvs) -> "CurveModel":
        return cls(*ainvs)

    @property
    def ainvs(self) -> tuple:
        return (self.a1, self.a2, self.a3, self.a4, self.a6)

    @property
    def int_ainvs(self) -> tuple:
        if not self.is_integral:
            raise ValueError("model is not integral")
        return tuple(int(a) for a in self.ainvs)

    @property
    def is_integral(self) -> bool:
        return all(a.denominator == 1 for a in self.ainvs)

    @property
    def j(self) -> Fraction:
        return self.c4 ** 3 / self.disc

    @property
    def is_standardized(self) -> bool:
        return self.a1 in (0, 1) and self.a3 in (0, 1) and self.a2 in (-1, 0, 1)

    def __str__(self) -> str:
        return "[" + ",".join(str(a) for a in self.ainvs) + "]"

    # -- points -----------------------------------------------------------------

    def contains(self, P) -> bool:
        if P.is_zero:
            return True
        x, y = P.x, P.y
        lhs = y * y + self.a1 * x * y + self.a3 * y
        rhs = x * x * x + self.a2 * x * x + self.a4 * x + self.a6
        return lhs == rhs

    def point(self, x, y) -> "RationalPoint":
        P = RationalPoint(_q(x), _q(y))
        if not self.contains(P):
            raise ValueError(f"({x}, {y}) is not on {self}")
        return P

    def lift_x(self, x) -> list["RationalPoint"]:
        """All rational points with the given x-coordinate."""
        x = _q(x)
        disc = 4 * x ** 3 + self.b2 * x * x + 2 * self.b4 * x + self.b6
        if disc < 0:
            return []
        num, den = disc.numerator, disc.denominator
        if not (is_square(num) and is_square(den)):
            return []
        s = Fraction(isqrt(num), isqrt(den))
        base = -(self.a1 * x + self.a3)
        ys = {(base + s) / 2, (base - s) / 2}
        return sorted((RationalPoint(x, y) for y in ys), key=lambda P: P.y)

    def change_coordinates(self, u, r, s, t) -> "CurveModel":
        """Model obtained by x = u^2 x' + r, y = u^3 y' + s u^2 x' + t."""
        u, r, s, t = (_q(v) for v in (u, r, s, t))
        a1, a2, a3, a4, a6 = self.ainvs
        a1n = (a1 + 2 * s) / u
        a2n = (a2 - s * a1 + 3 * r - s * s) / u ** 2
        a3n = (a3 + r * a1 + 2 * t) / u ** 3
        a4n = (a4 - s * a3 + 2 * r * a2 - (t + r * s) * a1 + 3 * r * r - 2 * s * t) / u ** 4
        a6n = (a6 + r * a4 + r * r * a2 + r ** 3 - t * a3 - t * t - r * t * a1) / u ** 6
        return CurveModel(a1n, a2n, a3n, a4n, a6n)


def derive_invariants(a) -> CurveModel:
    """Build a :class:`CurveModel` from five coefficients; raises SingularCurve."""
    return CurveModel(*a)


# -- quadratic fields ---------------------------------------------------------


class QuadraticNumber:
    """a + b*sqrt(D) with a, b rational and D a squarefree integer."""

    __slots__ = ("a", "b", "D")

    def __init__(self, a, b, D: int):
        self.a = _q(a)
        self.b = _q(b)
        self.D = int(D)

    def _coerce(self, other) -> "QuadraticNumber":
        if isinstance(other, QuadraticNumber):
            if other.D != self.D:
                raise ValueError("mixing different quadratic fields")
            return other
        return QuadraticNumber(other, 0, self.D)

    def __add__(self, other):
        o = self._coerce(other)
        return QuadraticNumber(self.a + o.a, self.b + o.b, self.D)

    __radd__ = __add__

    def __neg__(self):
        return QuadraticNumber(-self.a, -self.b, self.D)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        o = self._coerce(other)
        return QuadraticNumber(self.a * o.a + self.D * self.b * o.b, self.a * o.b + self.b * o.a, self.D)

    __rmul__ = __mul__

    def norm(self) -> Fraction:
        return self.a * self.a - self.D * self.b * self.b

    def conjugate(self) -> "QuadraticNumber":
        return QuadraticNumber(self.a, -self.b, self.D)

    def inverse(self) -> "QuadraticNumber":
        n = self.norm()
        if n == 0:
            raise ZeroDivisionError("inverse of zero in quadratic field")
        return QuadraticNumber(self.a / n, -self.b / n, self.D)

    def __truediv__(self, other):
        return self * self._coerce(other).inverse()

    def __rtruediv__(self, other):
        return self._coerce(other) * self.inverse()

    def __pow__(self, n: int):
        out = QuadraticNumber(1, 0, self.D)
        for _ in range(n):
            out = out * self
        return out

    def __eq__(self, other):
        try:
            o = self._coerce(other)
        except (ValueError, TypeError):
            return NotImplemented
        return self.a == o.a and self.b == o.b

    def __hash__(self):
        return hash((self.a, self.b, self.D))

    def __repr__(self):
        return f"({self.a} + {self.b}*sqrt({self.D}))"

    def is_rational(self) -> bool:
        return self.b == 0

    def sqrt(self) -> "QuadraticNumber | None":
        """A square root inside Q(sqrt(D)), or None."""
        if self.b == 0:
            a = self.a
            if a >= 0 and is_square(a.numerator) and is_square(a.denominator):
                return QuadraticNumber(Fraction(isqrt(a.numerator), isqrt(a.denominator)), 0, self.D)
            q = a / self.D
            if q >= 0 and is_square(q.numerator) and is_square(q.denominator):
                return QuadraticNumber(0, Fraction(isqrt(q.numerator), isqrt(q.denominator)), self.D)
            return None
        n = self.norm()
        if n < 0 or not (is_square(n.numerator) and is_square(n.denominator)):
            return None
        rn = Fraction(isqrt(n.numerator), isqrt(n.denominator))
        for s2 in ((self.a + rn) / 2, (self.a - rn) / 2):
            if s2 > 0 and is_square(s2.numerator) and is_square(s2.denominator):
                s = Fraction(isqrt(s2.numerator), isqrt(s2.denominator))
                cand = QuadraticNumber(s, self.b / (2 * s), self.D)
                if cand * cand == self:
                    return cand
        return None


# -- points -------------------------------------------------------------------


@dataclass(frozen=True)
class RationalPoint:
    x: Fraction | None = None
    y: Fraction | None = None

    @property
    def is_zero(self) -> bool:
        return self.x is None

    def __str__(self):
        return "O" if self.is_zero else f"({self.x}, {self.y})"


@dataclass(frozen=True)
class QuadFieldPoint:
    x: QuadraticNumber | None = None
    y: QuadraticNumber | None = None
    D: int = 0

    @property
    def is_zero(self) -> bool:
        return self.x is None

    @classmethod
    def from_rational(cls, P: RationalPoint, D: int) -> "QuadFieldPoint":
        if P.is_zero:
            return cls(None, None, D)
        return cls(QuadraticNumber(P.x, 0, D), QuadraticNumber(P.y, 0, D), D)


INFINITY = RationalPoint()

Point = Union[RationalPoint, QuadFieldPoint]


def _make(P: Point, x, y) -> Point:
    if isinstance(P, QuadFieldPoint):
        return QuadFieldPoint(x, y, P.D)
    return RationalPoint(x, y)


def _zero_like(P: Point) -> Point:
    return QuadFieldPoint(None, None, P.D) if isinstance(P, QuadFieldPoint) else INFINITY


def negate(E: CurveModel, P: Point) -> Point:
    if P.is_zero:
        return P
    return _make(P, P.x, -P.y - E.a1 * P.x - E.a3)


def add_points(E: CurveModel, P: Point, Q: Point) -> Point:
    """Exact group law on E over Q or over Q(sqrt(D))."""
    if P.is_zero:
        return Q
    if Q.is_zero:
        return P
    a1, a2, a3, a4, a6 = E.ainvs
    x1, y1, x2, y2 = P.x, P.y, Q.x, Q.y
    if x1 == x2:
        if y1 + y2 + a1 * x2 + a3 == 0:
            return _zero_like(P)
        den = 2 * y1 + a1 * x1 + a3
        lam = (3 * x1 * x1 + 2 * a2 * x1 + a4 - a1 * y1) / den
        nu = (-x1 * x1 * x1 + a4 * x1 + 2 * a6 - a3 * y1) / den
    else:
        lam = (y2 - y1) / (x2 - x1)
        nu = (y1 * x2 - y2 * x1) / (x2 - x1)
    x3 = lam * lam + a1 * lam - a2 - x1 - x2
    y3 = -(lam + a1) * x3 - nu - a3
    return _make(P, x3, y3)


def multiply(E: CurveModel, n: int, P: Point) -> Point:
    if n < 0:
        return multiply(E, -n, negate(E, P))
    result = _zero_like(P)
    addend = P
    while n:
        if n & 1:
            result = add_points(E, result, addend)
        n >>= 1
        if n:
            addend = add_points(E, addend, addend)
    return result


def point_order(E: CurveModel, P: Point, max_order: int = 12) -> int | None:
    """Exact order of P if it is at most ``max_order``, else None."""
    Q = P
    for n in range(1, max_order + 1):
        if Q.is_zero:
            return n
        Q = add_points(E, Q, P)
    return None


# -- minimal models -----------------------------------------------------------


def _mod_local(q: Fraction, p: int, m: int) -> int:
    """q mod m for q p-integral, m a power of p."""
    return q.numerator * pow(q.denominator, -1, m) % m


def _kraus_ok(c4: Fraction, c6: Fraction, p: int) -> bool:
    """Kraus' condition at p for (c4, c6) to come from a model integral at p."""
    if valuation(c4, p) < 0 or valuation(c6, p) < 0:
        return False
    if p == 3:
        return valuation(c4 ** 3 - c6 ** 2, 3) >= 3 and valuation(c6, 3) != 2
    if p == 2:
        if valuation(c4 ** 3 - c6 ** 2, 2) < 6:
            return False
        return _mod_local(c6, 2, 4) == 3 or (valuation(c4, 2) >= 4 and _mod_local(c6, 2, 32) in (0, 8))
    return True


def _kraus_model(c4: int, c6: int) -> CurveModel:
    b2 = (-c6) % 12
    if b2 > 6:
        b2 -= 12
    b4 = Fraction(b2 * b2 - c4, 24)
    b6 = Fraction(-b2 ** 3 + 36 * b2 * b4 - c6, 216)
    if b4.denominator != 1 or b6.denominator != 1:
        raise ValueError("c4, c6 do not satisfy Kraus' conditions")
    a1 = b2 % 2
    a3 = int(b6) % 2
    F = CurveModel(a1, Fraction(b2 - a1, 4), a3, (b4 - a1 * a3) / 2, (b6 - a3) / 4)
    if not F.is_integral:
        raise ValueError("c4, c6 do not satisfy Kraus' conditions")
    return F


def _transformation(E: CurveModel, F: CurveModel, u: Fraction):
    """(u, r, s, t) carrying E to F, given the scaling u."""
    s = (u * F.a1 - E.a1) / 2
    r = (u * u * F.a2 - E.a2 + s * E.a1 + s * s) / 3
    t = (u ** 3 * F.a3 - E.a3 - r * E.a1) / 2
    return (u, r, s, t)


def _primes_of(*qs) -> set[int]:
    out = {2, 3}
    for q in qs:
        q = Fraction(q)
        out.update(prime_factors(q.numerator))
        out.update(prime_factors(q.denominator))
    return out


def minimize(E: CurveModel) -> tuple[CurveModel, tuple]:
    """Global minimal standardized model of E and the transformation (u, r, s, t)
    with ``E.change_coordinates(u, r, s, t) == minimal``.

    Works from (c4, c6): the scaling exponent at each prime is the largest d
    leaving c4/p^4d, c6/p^6d, Delta/p^12d integral, lowered at 2 and 3 until
    Kraus' conditions hold (so d may be negative for non-integral input)."""
    c4, c6, disc = E.c4, E.c6, E.disc
    u = Fraction(1)
    for p in sorted(_primes_of(c4, c6, disc)):
        vals = [valuation(c4, p) / 4, valuation(c6, p) / 6, valuation(disc, p) / 12]
        d = int(min(v for v in vals) // 1)
        while not _kraus_ok(c4 / Fraction(p) ** (4 * d), c6 / Fraction(p) ** (6 * d), p):
            d -= 1
        u *= Fraction(p) ** d
    F = _kraus_model(int(c4 / u ** 4), int(c6 / u ** 6))
    transform = _transformation(E, F, u)
    if E.change_coordinates(*transform).ainvs != F.ainvs:
        raise AssertionError(f"minimization transform failed for {E}")
    return F, transform


def is_minimal_standardized(E: CurveModel) -> bool:
    if not E.is_integral or not E.is_standardized:
        return False
    F, _ = minimize(E)
    return F.ainvs == E.ainvs


# -- division polynomials -----------------------------------------------------
# Polynomials in x are lists of Fractions, lowest degree first.


def _padd(f, g):
    n = max(len(f), len(g))
    return [(f[i] if i < len(f) else 0) + (g[i] if i < len(g) else 0) for i in range(n)]


def _pscale(f, c):
    return [c * a for a in f]


def _pmul(f, g):
    if not f or not g:
        return []
    out = [Fraction(0)] * (len(f) + len(g) - 1)
    for i, a in enumerate(f):
        if a:
            for j, b in enumerate(g):
                out[i + j] += a * b
    return out


def _psub(f, g):
    return _padd(f, _pscale(g, -1))


def _ptrim(f):
    f = list(f)
    while f and f[-1] == 0:
        f.pop()
    return f


def division_polynomials(E: CurveModel, n: int) -> tuple[list, list]:
    """Return (f, F) where f[k] is psi_k for odd k and psi_k/psi_2 for even k
    (as polynomials in x), and F = psi_2^2 = 4x^3 + b2 x^2 + 2 b4 x + b6."""
    b2, b4, b6, b8 = E.b2, E.b4, E.b6, E.b8
    F = [b6, 2 * b4, b2, Fraction(4)]
    f = [[], [Fraction(1)], [Fraction(1)],
         [b8, 3 * b6, 3 * b4, b2, Fraction(3)],
         [b4 * b8 - b6 * b6, b2 * b8 - b4 * b6, 10 * b8, 10 * b6, 5 * b4, b2, Fraction(2)]]
    F2 = _pmul(F, F)
    for k in range(5, n + 1):
        m = k // 2
        if k % 2:
            t1 = _pmul(f[m + 2], _pmul(f[m], _pmul(f[m], f[m])))
            t2 = _pmul(f[m - 1], _pmul(f[m + 1], _pmul(f[m + 1], f[m + 1])))
            if m % 2 == 0:
                t1 = _pmul(F2, t1)
            else:
                t2 = _pmul(F2, t2)
            f.append(_ptrim(_psub(t1, t2)))
        else:
            t1 = _pmul(f[m + 2], _pmul(f[m - 1], f[m - 1]))
            t2 = _pmul(f[m - 2], _pmul(f[m + 1], f[m + 1]))
            f.append(_ptrim(_pmul(f[m], _psub(t1, t2))))
    return f[: n + 1], F


def psi_squared(E: CurveModel, f, F, k: int) -> list:
    return _pmul(f[k], f[k]) if k % 2 else _pmul(F, _pmul(f[k], f[k]))


def phi(E: CurveModel, f, F, k: int) -> list:
    """x-numerator: x(kP) = phi_k / psi_k^2."""
    x = [Fraction(0), Fraction(1)]
    if k == 1:
        return x
    prod = _pmul(f[k - 1], f[k + 1])
    if k % 2:  # k-1, k+1 even
        prod = _pmul(F, prod)
    return _ptrim(_psub(_pmul(x, psi_squared(E, f, F, k)), prod))


# -- point enumeration --------------------------------------------------------

_BLOCK = 1 << 20
_SIEVE_MODULI = (64, 63, 65, 11, 17, 19, 23, 29, 31, 37, 41, 43, 47)


def _square_table(m: int):
    import numpy as np

    t = np.zeros(m, dtype=bool)
    t[(np.arange(m, dtype=np.int64) ** 2) % m] = True
    return t


def enumerate_points(E: CurveModel, a_max: int, c_max: int, c_values=None,
                     deadline: float | None = None) -> list[RationalPoint]:
    """All affine points with x = a/c^2, gcd(a, c) = 1, |a| <= a_max, 1 <= c <= c_max.

    Uses quadratic-residue sieving of 4a^3 + b2 a^2 c^2 + 2 b4 a c^4 + b6 c^6
    (which must be a square); the sieve only discards non-squares, every
    survivor is checked exactly.  Numerators are processed in fixed-size
    blocks; past ``deadline`` (a time.monotonic() value) BudgetExceeded is raised.
    """
    import time

    import numpy as np

    if not E.is_integral:
        raise ValueError("integral model required")
    b2, b4, b6 = int(E.b2), int(E.b4), int(E.b6)
    tables = {m: _square_table(m) for m in _SIEVE_MODULI}
    found: list[RationalPoint] = []
    cs = range(1, c_max + 1) if c_values is None else c_values
    for c in cs:
        if c > c_max:
            continue
        c2 = c * c
        # ok_tables[i][a mod m] says whether the quartic can be a square mod m
        ok_tables = []
        for m, tab in tables.items():
            r = np.arange(m, dtype=np.int64)
            cm = c2 % m
            val = (4 * r * r % m * r + b2 % m * cm % m * r % m * r + 2 * b4 % m * cm % m * cm % m * r
                   + b6 % m * cm % m * cm % m * cm) % m
            ok_tables.append(tab[val])
        for lo in range(-a_max, a_max + 1, _BLOCK):
            if deadline is not None and time.monotonic() > deadline:
                raise BudgetExceeded(f"point enumeration stopped at c={c}, a={lo}")
            a_all = np.arange(lo, min(lo + _BLOCK, a_max + 1), dtype=np.int64)
            mask = ok_tables[0][a_all % _SIEVE_MODULI[0]]
            for m, ok in zip(_SIEVE_MODULI[1:], ok_tables[1:]):
                mask &= ok[a_all % m]
            if c > 1:
                idx = np.flatnonzero(mask)
                mask[idx[np.gcd(a_all[idx], c) != 1]] = False
            for a in a_all[mask].tolist():
                val = 4 * a ** 3 + b2 * a * a * c2 + 2 * b4 * a * c2 * c2 + b6 * c2 ** 3
                if val < 0 or not is_square(val):
                    continue
                found.extend(E.lift_x(Fraction(a, c2)))
    return found


# -- torsion ------------------------------------------------------------------

MAZUR_CYCLIC = frozenset(range(1, 11)) | {12}


@dataclass(frozen=True)
class TorsionGroup:
    invariants: tuple[int, ...]
    generators: tuple[RationalPoint, ...]
    points: tuple[RationalPoint, ...]

    @property
    def order(self) -> int:
        out = 1
        for n in self.invariants:
            out *= n
        return out

    @property
    def two_torsion_rank(self) -> int:
        return sum(1 for n in self.invariants if n % 2 == 0)


def _count_points_small(E: CurveModel, p: int) -> int:
    a1, a2, a3, a4, a6 = (int(a) % p for a in E.int_ainvs)
    n = 1
    for x in range(p):
        r = (x * x * x + a2 * x * x + a4 * x + a6) % p
        for y in range(p):
            if (y * y + a1 * x * y + a3 * y - r) % p == 0:
                n += 1
    return n


def _torsion_order_bound(E: CurveModel) -> int:
    disc = int(E.disc)
    T = 0
    used = 0
    for p in primes_up_to(200):
        if p == 2 or disc % p == 0:
            continue
        T = gcd(T, _count_points_small(E, p))
        used += 1
        if T == 1 or used >= 8:
            break
    return T


def silverman_bound(E: CurveModel) -> float:
    """Uniform bound C with |h(P)/2 - h_can(P)/2| <= C, where h(P) = log max(|a|, c^2)
    for x(P) = a/c^2 and E is minimal (Silverman's difference bound)."""
    j = E.j
    hj = log(max(abs(j.numerator), abs(j.denominator)))
    hdisc = log(abs(int(E.disc)))
    hb2 = log(max(1.0, abs(float(E.b2)) / 12.0))
    two_star = 2 if E.b2 != 0 else 1
    mu = hdisc / 12 + hj / 12 + hb2 / 2 + log(two_star) / 2
    return hj / 8 + mu + 1.07


def _integer_roots_cubic(A: int, B: int) -> list[int]:
    """Integer roots of X^3 + A X + B by exact bisection on monotone pieces."""

    def f(X):
        return X * X * X + A * X + B

    R = 1 + max(abs(A), abs(B))
    # f' = 3X^2 + A >= 0 for |X| >= c
    c = 0 if A >= 0 else isqrt(-A // 3) + 1
    pieces = [(-R, -c, 1), (c, R, 1)] if c else [(-R, R, 1)]
    if c:
        pieces.append((-c + 1, c - 1, -1))
    out = set()
    for lo, hi, sign in pieces:
        while lo < hi:
            mid = (lo + hi) // 2
            if sign * f(mid) < 0:
                lo = mid + 1
            else:
                hi = mid
        if f(lo) == 0:
            out.add(lo)
    return sorted(out)


def _torsion_candidates(E: CurveModel) -> list[RationalPoint]:
    """Nagell-Lutz on Y^2 = X^3 - 27 c4 X - 54 c6: torsion points are integral
    with Y = 0 or Y^2 dividing 4A^3 + 27B^2.  Mapped back to E exactly."""
    A, B = -27 * int(E.c4), -54 * int(E.c6)
    disc = 4 * A ** 3 + 27 * B ** 2
    fac = factorization(abs(disc))
    ys = [1]
    for p, e in fac.items():
        ys = [y * p ** k for y in ys for k in range(e // 2 + 1)]
    out = []
    for Y in [0] + ys:
        for X in _integer_roots_cubic(A, B - Y * Y):
            for Ys in {Y, -Y}:
                x = Fraction(X - 3 * E.b2, 36)
                y = (Fraction(Ys, 108) - E.a1 * x - E.a3) / 2
                P = RationalPoint(x, y)
                if E.contains(P):
                    out.append(P)
    return out


def torsion_subgroup(E: CurveModel) -> TorsionGroup:
    """E(Q)_tors for an integral model, by Nagell-Lutz on the short model; every
    candidate's order is verified exactly."""
    T = _torsion_order_bound(E)
    points = [INFINITY]
    if T > 1:
        for P in _torsion_candidates(E):
            n = point_order(E, P, 12)
            if n is not None and T % n == 0 and P not in points:
                points.append(P)
    if len(points) > T:
        raise AssertionError("torsion search found more points than the reduction bound")
    order = len(points)
    orders = {P: point_order(E, P, 12) or 0 for P in points}
    two_tors = [P for P in points if orders[P] == 2]
    best = max(points, key=lambda P: orders[P] if not P.is_zero else 1)
    max_ord = 1 if best.is_zero else orders[best]
    if order == max_ord:
        inv = (order,) if order > 1 else ()
        gens = (best,) if order > 1 else ()
    else:
        # Z/2 x Z/2m
        cyc = set()
        Q = best
        for _ in range(max_ord):
            cyc.add(Q)
            Q = add_points(E, Q, best)
        other = next(P for P in two_tors if P not in cyc)
        inv = (2, max_ord)
        gens = (other, best)
        if 2 * max_ord != order:
            raise AssertionError("inconsistent torsion structure")
    for n in inv:
        if n not in MAZUR_CYCLIC:
            raise AssertionError(f"non-Mazur torsion factor {n}")
    pts = tuple(sorted(points, key=lambda P: (not P.is_zero, P.x or 0, P.y or 0)))
    return TorsionGroup(inv, gens, pts)


# -- complex multiplication ---------------------------------------------------

# j-invariant -> discriminant of the CM order
CM_J_TABLE: dict[int, int] = {
    0: -3,
    54000: -12,
    -12288000: -27,
    1728: -4,
    287496: -16,
    -3375: -7,
    16581375: -28,
    8000: -8,
    -32768: -11,
    -884736: -19,
    -884736000: -43,
    -147197952000: -67,
    -262537412640768000: -163,
}

_CM_FIELD = {-3: -3, -12: -3, -27: -3, -4: -4, -16: -4, -7: -7, -28: -7,
             -8: -8, -11: -11, -19: -19, -43: -43, -67: -67, -163: -163}


@dataclass(frozen=True)
class CMData:
    is_cm: bool
    cm_disc: int | None = None
    field_disc: int | None = None
    maximal_order: bool | None = None

    @property
    def unit_count(self) -> int | None:
        """#O_K^x for the CM field."""
        if not self.is_cm:
            return None
        return {-3: 6, -4: 4}.get(self.field_disc, 2)


def cm_test(E: CurveModel) -> CMData:
    j = E.j
    if j.denominator != 1 or int(j) not in CM_J_TABLE:
        return CMData(False)
    D = CM_J_TABLE[int(j)]
    K = _CM_FIELD[D]
    return CMData(True, D, K, D == K)
