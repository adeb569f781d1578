"""One-sided tests for irreducibility and surjectivity of the mod-p representation.

"proven" is a certificate, "unknown" only means no witness was found; neither
test ever claims reducibility or a small image.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .arith import kronecker, primes_up_to
from .curve import CMData, CurveModel
from .local import ap, bad_primes

__all__ = [
    "RepStatus",
    "PROVEN",
    "UNKNOWN",
    "FIXTURE_SURJECTIVE",
    "irreducibility_test",
    "surjectivity_test",
    "frobenius_pairs",
]

PROVEN = "proven"
UNKNOWN = "unknown"
DEFAULT_ELL_BOUND = 1000

# Surjectivity onto Aut_R(E[p]) for fifteen CM curves at a prime of bad
# reduction, established by division-polynomial factorization over number
# fields (outside what this package computes).  Keyed by a-invariants.
FIXTURE_SURJECTIVE = {
    (0, 0, 1, 0, 31): ("675a1", 5),
    (0, 0, 0, 0, 100): ("900c1", 5),
    (0, 0, 0, 0, 625): ("2700h1", 5),
    (0, 0, 0, 0, 5): ("2700l1", 5),
    (0, 0, 0, 0, 500): ("2700p1", 5),
    (0, 0, 0, 0, -100): ("3600bd1", 5),
    (0, 0, 0, -49, 0): ("1568g1", 7),
    (0, 0, 0, 49, 0): ("3136t1", 7),
    (0, 0, 0, -343, 0): ("3136u1", 7),
    (0, 0, 0, -7, 0): ("3136v1", 7),
    (0, 0, 1, 0, -333): ("3267d1", 11),
    (0, 0, 0, 1331, 0): ("3872a1", 11),
    (0, 0, 0, 0, -44): ("4356a1", 11),
    (0, 0, 0, 0, 58564): ("4356b1", 11),
    (0, 0, 0, 0, -1331): ("4356c1", 11),
}


@dataclass(frozen=True)
class RepStatus:
    p: int
    irreducible: str
    surjective: str
    method: str
    witnesses: tuple = field(default=())

    def __post_init__(self):
        if self.surjective == PROVEN and self.irreducible != PROVEN:
            raise ValueError("a surjective representation is irreducible")

    @property
    def is_irreducible(self) -> bool:
        return self.irreducible == PROVEN

    @property
    def is_surjective(self) -> bool:
        return self.surjective == PROVEN


def frobenius_pairs(E: CurveModel, p: int, ell_bound: int, aps: dict | None = None):
    """(ell, a_ell) for good primes ell <= ell_bound not dividing pN, in order."""
    bad = set(bad_primes(E))
    for ell in primes_up_to(ell_bound):
        if ell == p or ell in bad:
            continue
        a = aps[ell] if aps is not None and ell in aps else ap(E, ell)
        yield ell, a


def _check_odd(p: int):
    if p < 3 or p % 2 == 0:
        raise ValueError("p must be an odd prime")


def irreducibility_test(E: CurveModel, p: int, aps: dict | None = None,
                        ell_bound: int = DEFAULT_ELL_BOUND) -> RepStatus:
    """Proven as soon as some Frobenius has characteristic polynomial
    x^2 - a x + ell irreducible mod p: a reducible E[p] would give every
    Frobenius an eigenvalue in F_p."""
    _check_odd(p)
    for ell, a in frobenius_pairs(E, p, ell_bound, aps):
        if kronecker((a * a - 4 * ell) % p, p) == -1:
            return RepStatus(p, PROVEN, UNKNOWN, "frobenius-sampling", ((ell, a),))
    return RepStatus(p, UNKNOWN, UNKNOWN, "frobenius-sampling", ())


def _serre_classes(a: int, ell: int, p: int) -> set[str]:
    """Which of the three element classes of the GL2 generation criterion
    (p >= 5) a Frobenius with trace a and determinant ell represents."""
    out = set()
    t, d = a % p, ell % p
    disc = (t * t - 4 * d) % p
    if t:
        chi = kronecker(disc, p)
        if chi == 1:
            out.add("split")
        elif chi == -1:
            out.add("nonsplit")
    u = t * t * pow(d, -1, p) % p
    if u not in (0, 1, 2, 4) and (u * u - 3 * u + 1) % p:
        out.add("exceptional")
    return out


def _cm_status(E: CurveModel, p: int, cm: CMData, aps, ell_bound) -> RepStatus:
    K = cm.field_disc
    chi = kronecker(K, p)
    irr = irreducibility_test(E, p, aps, ell_bound)
    if chi == 1:
        return RepStatus(p, irr.irreducible, UNKNOWN, "cm-split-nonsurjective", irr.witnesses)
    good = p not in bad_primes(E)
    if chi == -1 and good and cm.maximal_order and cm.unit_count % p:
        return RepStatus(p, PROVEN, PROVEN, "cm-inert-rule", ())
    return RepStatus(p, irr.irreducible, UNKNOWN, "cm-inert-rule", irr.witnesses)


def surjectivity_test(E: CurveModel, p: int, aps: dict | None = None, cm: CMData | None = None,
                      ell_bound: int = DEFAULT_ELL_BOUND) -> RepStatus:
    """Surjectivity onto Aut_R(E[p]).

    CM curves use the inert-prime rule (good reduction, p inert in K, p not
    dividing #O_K^x).  Non-CM curves at p >= 5 need Frobenius elements of the
    three classes in the generation criterion for SL2(F_p); the determinant is
    the cyclotomic character and is always onto.  p = 3 for non-CM curves is
    left unknown."""
    _check_odd(p)
    key = E.int_ainvs if E.is_integral else None
    if key is not None and FIXTURE_SURJECTIVE.get(tuple(key), (None, None))[1] == p:
        return RepStatus(p, PROVEN, PROVEN, "fixture", ())
    if cm is not None and cm.is_cm:
        return _cm_status(E, p, cm, aps, ell_bound)
    if p < 5:
        return irreducibility_test(E, p, aps, ell_bound)
    need = {"split", "nonsplit", "exceptional"}
    witnesses = []
    irreducible_witness = None
    for ell, a in frobenius_pairs(E, p, ell_bound, aps):
        got = _serre_classes(a, ell, p) & need
        if irreducible_witness is None and kronecker((a * a - 4 * ell) % p, p) == -1:
            irreducible_witness = (ell, a)
        if got:
            need -= got
            witnesses.append((ell, a))
        if not need:
            return RepStatus(p, PROVEN, PROVEN, "frobenius-sampling", tuple(witnesses))
    if irreducible_witness is not None:
        return RepStatus(p, PROVEN, UNKNOWN, "frobenius-sampling", (irreducible_witness,))
    return RepStatus(p, UNKNOWN, UNKNOWN, "frobenius-sampling", ())
