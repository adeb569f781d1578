"""Per-(curve, prime) certificates: upper bounds on ord_p(#Sha) from the
Heegner-point, Euler-system and CM theorems, compared with ord_p(Sha_an)."""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from math import prod

import mpmath

from .analytic import l_value, periods, rational_reconstruction, sha_analytic
from .arith import kronecker, prime_factors, valuation
from .curve import CMData, cm_test, torsion_subgroup
from .errors import (
    BSDCertError,
    ConsistencyError,
    Inconclusive,
    ReconstructionFailed,
    SoundnessViolation,
)
from .galois import PROVEN, RepStatus, irreducibility_test, surjectivity_test
from .heegner import (
    HeegnerRecord,
    find_heegner_discriminants,
    gzz_height,
    heegner_index_rank0_bound,
    heegner_index_rank1,
)
from .heights import certify_generator, find_generator, regulator
from .io import CurveRecord, RunConfig, prime_policy_auto
from .local import ap_table, bad_primes, conductor, local_data

__all__ = [
    "RuleOutcome",
    "Certificate",
    "CurveAnalysis",
    "rule_cm",
    "rule_kato",
    "rule_cha",
    "rule_stein",
    "rule_kolyvagin",
    "rule_jetchev",
    "certify",
    "certify_curve",
    "certify_batch",
    "index_valuation_bound",
]

VERIFIED, FAILED, ASSUMED = "verified", "failed", "assumed"
PROVEN_S, BOUNDED_S, UNRESOLVED_S = "PROVEN", "BOUNDED", "UNRESOLVED"
GLOBAL_ASSUMPTIONS = ("analytic rank from dataset", "optimality and isogeny data from dataset")


@dataclass(frozen=True)
class RuleOutcome:
    rule: str
    applicable: bool
    bound: int | None = None
    hypotheses: tuple = ()  # (name, verified | failed | assumed)
    inputs: tuple = ()  # (name, value) pairs in a fixed order
    note: str = ""

    def to_dict(self) -> dict:
        return {
            "rule": self.rule,
            "applicable": self.applicable,
            "bound": self.bound,
            "hypotheses": [list(h) for h in self.hypotheses],
            "inputs": [[k, str(v)] for k, v in self.inputs],
            "note": self.note,
        }


def _outcome(rule, hyps, bound=None, inputs=(), note="") -> RuleOutcome:
    ok = all(state != FAILED for _, state in hyps)
    return RuleOutcome(rule, ok, bound if ok else None, tuple(hyps), tuple(inputs), note)


def _flag(name, cond) -> tuple:
    return (name, VERIFIED if cond else FAILED)


def index_valuation_bound(rec: HeegnerRecord, p: int) -> int:
    """ord_p(I) for an exact index, else the largest ord_p(i) with i <= the upper bound."""
    if rec.mode == "exact":
        return int(valuation(rec.index, p))
    k, q = 0, p
    while q <= rec.upper:
        k, q = k + 1, q * p
    return k


def _heegner_inputs(rec: HeegnerRecord, p: int) -> tuple:
    return (("D", rec.D), ("I", rec.index_text()), ("ord_p(I)", index_valuation_bound(rec, p)))


# -- rules --------------------------------------------------------------------------


def rule_kolyvagin(p: int, heeg: HeegnerRecord | None, rep: RepStatus, cm: CMData) -> RuleOutcome:
    """ord_p(Sha) <= 2 ord_p(I_K) for odd p unramified in the CM field with
    surjective mod-p representation."""
    hyps = [
        _flag("p odd", p % 2 == 1),
        _flag("mod-p representation surjective", rep.is_surjective),
        _flag("p unramified in CM field", not cm.is_cm or cm.field_disc % p != 0),
        _flag("Heegner index available", heeg is not None),
    ]
    if heeg is None:
        return _outcome("kolyvagin36", hyps)
    return _outcome("kolyvagin36", hyps, 2 * index_valuation_bound(heeg, p), _heegner_inputs(heeg, p))


def rule_cha(p: int, heeg: HeegnerRecord | None, rep: RepStatus, N: int) -> RuleOutcome:
    """Same bound as Kolyvagin's assuming only irreducibility, for p not
    dividing 2 disc(K) with p^2 not dividing N."""
    hyps = [
        _flag("Heegner index available", heeg is not None),
        _flag("p does not divide 2*disc(K)", heeg is not None and (2 * heeg.D) % p != 0),
        _flag("p^2 does not divide N", N % (p * p) != 0),
        _flag("mod-p representation irreducible", rep.is_irreducible),
    ]
    if heeg is None:
        return _outcome("cha52", hyps)
    return _outcome("cha52", hyps, 2 * index_valuation_bound(heeg, p), _heegner_inputs(heeg, p))


def rule_stein(p: int, heeg: HeegnerRecord | None, cm: CMData, class_torsion) -> RuleOutcome:
    """Kolyvagin's bound for non-CM E when p is odd and prime to the torsion of
    every curve in the isogeny class; needs the class torsion from the dataset."""
    hyps = [
        _flag("Heegner index available", heeg is not None),
        _flag("non-CM", not cm.is_cm),
        _flag("p odd", p % 2 == 1),
        _flag("isogeny-class torsion supplied", class_torsion is not None),
    ]
    if class_torsion is not None:
        hyps.append(_flag("p prime to isogeny-class torsion", all(t % p for t in class_torsion)))
    if heeg is not None:
        one_prime = len(prime_factors(abs(heeg.D))) == 1
        hyps.append(_flag("p does not divide disc(K) when disc(K) is a prime power",
                          not one_prime or heeg.D % p != 0))
        return _outcome("steinetal53", hyps, 2 * index_valuation_bound(heeg, p), _heegner_inputs(heeg, p))
    return _outcome("steinetal53", hyps)


def rule_jetchev(p: int, heeg: HeegnerRecord | None, tamagawa: list, base_applicable: bool) -> RuleOutcome:
    """2 (ord_p(I_K) - max_q ord_p(c_q)), clamped at zero, whenever one of the
    Heegner-index rules applies."""
    hyps = [_flag("a Heegner-index rule applies", base_applicable),
            _flag("Heegner index available", heeg is not None)]
    if heeg is None:
        return _outcome("jetchev54", hyps)
    m = max((int(valuation(L.c_p, p)) for L in tamagawa), default=0)
    raw = 2 * (index_valuation_bound(heeg, p) - m)
    note = "clamped at 0" if raw < 0 else ""
    return _outcome("jetchev54", hyps, max(raw, 0), _heegner_inputs(heeg, p) + (("max ord_p(c_q)", m),), note)


def rule_kato(p: int, rank: int, optimal: bool, N: int, rep: RepStatus, cm: CMData,
              l_over_omega: Fraction | None) -> RuleOutcome:
    """ord_p(Sha) <= ord_p(L(E,1)/Omega) for optimal non-CM rank-0 curves, p not
    dividing 6N, surjective at p."""
    hyps = [
        _flag("analytic rank 0", rank == 0),
        _flag("optimal", optimal),
        _flag("non-CM", not cm.is_cm),
        _flag("p does not divide 6N", (6 * N) % p != 0),
        _flag("mod-p representation surjective", rep.is_surjective),
        _flag("L(E,1)/Omega reconstructed", l_over_omega is not None),
    ]
    if l_over_omega is None or l_over_omega == 0:
        return _outcome("kato51", hyps)
    v = int(valuation(l_over_omega, p))
    # v < 0 needs p | #E(Q)_tors, which a surjective representation rules out
    hyps.append(_flag("ord_p(L/Omega) >= 0", v >= 0))
    return _outcome("kato51", hyps, v, (("L/Omega", l_over_omega),))


def rule_cm(p: int, cm: CMData, rank: int, heeg: HeegnerRecord | None, ord_an: int,
            tamagawa_product: int, good_at_p: bool) -> RuleOutcome:
    """CM theorems: rank 0 gives BSD(E,p) for p >= 5 (and p = 3 when K is not
    Q(sqrt(-3)) and 3 does not divide the Tamagawa product); rank 1 gives it
    for split p >= 3, and 2 ord_p(I) for inert good p >= 5."""
    if not cm.is_cm:
        return _outcome("cm-zero33" if rank == 0 else "cm-big39", [_flag("CM", False)])
    order = ("CM by the maximal order", VERIFIED if cm.maximal_order else ASSUMED)
    inputs = (("K", cm.field_disc),)
    if rank == 0:
        if p >= 5:
            return _outcome("cm-zero33", [_flag("CM", True), order, _flag("p >= 5", True)], ord_an, inputs)
        hyps = [_flag("CM", True), order, _flag("p = 3", p == 3), _flag("K != Q(sqrt(-3))", cm.field_disc != -3),
                _flag("3 does not divide the Tamagawa product", tamagawa_product % 3 != 0)]
        return _outcome("cm-zero33", hyps, ord_an, inputs + (("prod c_q", tamagawa_product),))
    split = kronecker(cm.field_disc, p) == 1
    if split:
        return _outcome("cm-big39", [_flag("CM", True), order, _flag("p >= 3", p >= 3), _flag("p split in K", True)],
                        ord_an, inputs + (("case", "split"),))
    hyps = [_flag("CM", True), order, _flag("p >= 5", p >= 5),
            _flag("p inert in K", kronecker(cm.field_disc, p) == -1),
            _flag("good reduction at p", good_at_p),
            _flag("Heegner index with D < -4", heeg is not None and heeg.D < -4)]
    if heeg is None:
        return _outcome("cm-big39", hyps, None, inputs + (("case", "inert"),))
    return _outcome("cm-big39", hyps, 2 * index_valuation_bound(heeg, p),
                    inputs + (("case", "inert"),) + _heegner_inputs(heeg, p))


# -- certificates ------------------------------------------------------------------


@dataclass(frozen=True)
class Certificate:
    label: str
    p: int
    status: str
    sha_ordp_an: int | None
    sha_ordp_upper: int | None  # None is infinity
    theorem_chain: tuple = ()
    assumptions: tuple = ()
    D: int | None = None
    index_text: str | None = None
    chain_ids: tuple = ()
    reason: str = ""

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "p": self.p,
            "status": self.status,
            "sha_ordp_an": self.sha_ordp_an,
            "sha_ordp_upper": "inf" if self.sha_ordp_upper is None else self.sha_ordp_upper,
            "chain": list(self.chain_ids),
            "D": self.D,
            "I": self.index_text,
            "theorem_chain": [o.to_dict() for o in self.theorem_chain],
            "assumptions": list(self.assumptions),
            "reason": self.reason,
        }


class CurveAnalysis:
    """Everything certify needs about one curve, computed once."""

    def __init__(self, rec: CurveRecord, config: RunConfig = RunConfig()):
        self.rec, self.config = rec, config
        E = self.E = rec.model
        prec = config.precision_bits
        self.N = conductor(E)
        self.tamagawa = [local_data(E, q) for q in bad_primes(E)]
        self.tamagawa_product = prod(L.c_p for L in self.tamagawa)
        self.torsion = torsion_subgroup(E)
        self.cm = cm_test(E)
        self.assumptions = list(GLOBAL_ASSUMPTIONS)
        self.manin_c = 1
        self.assumptions.append("manin_c=1" if rec.optimal else "manin_c=1 for a non-optimal curve")
        if self.cm.is_cm and not self.cm.maximal_order:
            self.assumptions.append("CM rules transferred from the isogenous maximal-order curve")
        self.periods = periods(E, prec)
        self.lvals = l_value(E, rec.rank, prec, self.N, )
        self.generator = None
        self.error = ""
        if rec.rank == 1:
            gen = rec.generator or find_generator(E, 16.0, config.search_time_cap)
            if gen is None:
                self.error = "no generator found"
            else:
                gen, saturated = certify_generator(E, gen, prec, config.search_time_cap)
                if not saturated:
                    self.assumptions.append("generator saturated")
                self.generator = gen
        self.sha = None
        self.l_over_omega = None
        if not self.error:
            reg = regulator(E, [self.generator] if self.generator else [], prec)
            try:
                self.sha = sha_analytic(self.periods, self.lvals, self.tamagawa_product,
                                        self.torsion.order, reg)
            except ReconstructionFailed as exc:
                self.error = f"analytic Sha not rational: {exc}"
            if rec.rank == 0:
                try:
                    with mpmath.workprec(prec):
                        self.l_over_omega = rational_reconstruction(self.lvals.L1 / self.periods.omega_real)
                except ReconstructionFailed:
                    self.l_over_omega = None
        self._aps = None
        self._discs = None
        self._heegner: dict = {}
        self._gz: dict = {}
        self._reps: dict = {}

    @property
    def aps(self) -> dict:
        if self._aps is None:
            self._aps = ap_table(self.E, self.config.ell_bound)
        return self._aps

    def rep(self, p: int) -> RepStatus:
        if p not in self._reps:
            rep = surjectivity_test(self.E, p, self.aps, self.cm, self.config.ell_bound)
            if not rep.is_irreducible:
                irr = irreducibility_test(self.E, p, self.aps, self.config.ell_bound)
                if irr.is_irreducible:
                    rep = RepStatus(p, PROVEN, rep.surjective, rep.method, irr.witnesses)
            if rep.is_irreducible and p in self.rec.isogeny_degrees:
                raise ConsistencyError(f"{self.rec.label}: E[{p}] is irreducible but the dataset lists a {p}-isogeny")
            self._reps[p] = rep
        return self._reps[p]

    @property
    def discriminants(self) -> list[int]:
        if self._discs is None:
            self._discs = [h.D for h in find_heegner_discriminants(self.N, self.config.heegner_disc_count)]
        return self._discs

    def heegner(self, D: int, p: int) -> HeegnerRecord | None:
        """Index (rank 1) or an index bound aimed at ord_p(I) <= 1 (rank 0); None on failure."""
        key = (D, None if self.rec.rank == 1 else p)
        if key in self._heegner:
            return self._heegner[key]
        rec = None
        prec = self.config.precision_bits
        try:
            if self.rec.rank == 1:
                gz = gzz_height(self.E, D, 1, prec, self.manin_c, self.periods, self.N)
                rec = heegner_index_rank1(self.E, D, self.generator, prec, self.manin_c, gz)
            else:
                gz = self._gz.get(D)
                if gz is None:
                    gz = self._gz[D] = gzz_height(self.E, D, 0, prec, self.manin_c, self.periods, self.N)
                for M in (p, p * p - 1):
                    try:
                        rec = heegner_index_rank0_bound(self.E, D, M, prec, self.manin_c,
                                                        self.config.search_time_cap, gz)
                        break
                    except Inconclusive:
                        continue
        except (ConsistencyError, Inconclusive):
            rec = None
        self._heegner[key] = rec
        return rec


def _chain_ids(outcomes, rep: RepStatus) -> tuple:
    ids = [o.rule for o in outcomes if o.applicable and o.bound is not None]
    uses_surjectivity = any(i in ("kolyvagin36", "kato51") for i in ids)
    if rep is not None and rep.method == "fixture" and uses_surjectivity:
        ids.insert(0, "cm-fixture")
    return tuple(ids)


def _best(outcomes):
    bounds = [o.bound for o in outcomes if o.applicable and o.bound is not None]
    return min(bounds) if bounds else None


def _heegner_rules(A: CurveAnalysis, p: int, heeg, rep) -> list[RuleOutcome]:
    cls = A.rec.isogeny_class_torsion
    base = [rule_cha(p, heeg, rep, A.N), rule_stein(p, heeg, A.cm, cls), rule_kolyvagin(p, heeg, rep, A.cm)]
    applicable = any(o.applicable for o in base)
    jet = rule_jetchev(p, heeg, A.tamagawa, applicable)
    best_base = _best(base)
    if jet.applicable and best_base is not None and jet.bound < best_base:
        base.append(jet)
    else:
        base.append(RuleOutcome(jet.rule, False, None, jet.hypotheses, jet.inputs,
                                "no improvement" if jet.applicable else jet.note))
    return base


def certify(A: CurveAnalysis, p: int) -> Certificate:
    rec = A.rec
    assumptions = tuple(A.assumptions)
    ord_an = None if A.sha is None else int(A.sha.ordp.get(p, 0))
    if p in (2, 3):
        out = RuleOutcome("small-prime-descent-needed", False, None, (), (), "p = 2, 3 need descent")
        return Certificate(rec.label, p, UNRESOLVED_S, ord_an, None, (out,), assumptions,
                           chain_ids=(out.rule,), reason="descent required")
    if A.sha is None:
        return Certificate(rec.label, p, UNRESOLVED_S, None, None, (), assumptions, reason=A.error)

    rep = A.rep(p)
    good = p not in bad_primes(A.E)
    outcomes: list[RuleOutcome] = []
    heeg_cm = None
    if A.cm.is_cm and rec.rank == 1 and kronecker(A.cm.field_disc, p) == -1 and good:
        heeg_cm = next((h for h in (A.heegner(D, p) for D in A.discriminants) if h is not None), None)
    outcomes.append(rule_cm(p, A.cm, rec.rank, heeg_cm, ord_an, A.tamagawa_product, good))
    outcomes.append(rule_kato(p, rec.rank, rec.optimal, A.N, rep, A.cm, A.l_over_omega))
    best = _best(outcomes)
    used = heeg_cm if outcomes[0].applicable and heeg_cm is not None else None
    chain = list(outcomes)
    if best is None or best > ord_an:
        best_heeg_rules = None
        for D in A.discriminants:
            heeg = A.heegner(D, p)
            if heeg is None:
                continue
            rules = _heegner_rules(A, p, heeg, rep)
            b = _best(rules)
            if best_heeg_rules is None or (b is not None and (_best(best_heeg_rules) is None or b < _best(best_heeg_rules))):
                best_heeg_rules, best_heeg = rules, heeg
            if b is not None and b <= ord_an:
                break
        if best_heeg_rules is not None:
            chain += best_heeg_rules
            b = _best(best_heeg_rules)
            if b is not None and (best is None or b < best):
                best, used = b, best_heeg
            elif used is None:
                used = best_heeg

    ids = _chain_ids(chain, rep)
    D = used.D if used is not None else None
    itext = used.index_text() if used is not None else None
    if best is None:
        if p in rec.isogeny_degrees and not rep.is_irreducible:
            triage = RuleOutcome("reducible-triage", False, None, (("rational p-isogeny in dataset", VERIFIED),))
            return Certificate(rec.label, p, UNRESOLVED_S, ord_an, None, tuple(chain) + (triage,), assumptions,
                               D, itext, ("reducible-triage",), "reducible")
        return Certificate(rec.label, p, UNRESOLVED_S, ord_an, None, tuple(chain), assumptions, D, itext,
                           ids, "no applicable rule")
    if best < ord_an:
        raise SoundnessViolation(f"{rec.label} p={p}: proven bound {best} is below ord_p(Sha_an) = {ord_an}")
    status = PROVEN_S if best == ord_an else BOUNDED_S
    return Certificate(rec.label, p, status, ord_an, best, tuple(chain), assumptions, D, itext, ids)


def _primes_for(A: CurveAnalysis, primes) -> list[int]:
    if primes is not None and primes != "auto":
        return sorted(set(primes))
    tam = {L.p: L.c_p for L in A.tamagawa}
    return prime_policy_auto(A.rec, A.sha, A.N, tam)


def certify_curve(rec: CurveRecord, config: RunConfig = RunConfig(), primes=None) -> list[Certificate]:
    """Certificates for one curve; errors in the shared analysis become UNRESOLVED."""
    primes = config.prime_policy if primes is None else primes
    try:
        A = CurveAnalysis(rec, config)
    except BSDCertError as exc:
        ps = sorted(set(primes)) if primes != "auto" else prime_policy_auto(rec)
        return [Certificate(rec.label, p, UNRESOLVED_S, None, None, (), GLOBAL_ASSUMPTIONS, reason=str(exc))
                for p in ps]
    out = []
    for p in _primes_for(A, primes):
        try:
            out.append(certify(A, p))
        except SoundnessViolation:
            raise
        except BSDCertError as exc:
            ord_an = None if A.sha is None else int(A.sha.ordp.get(p, 0))
            out.append(Certificate(rec.label, p, UNRESOLVED_S, ord_an, None, (), tuple(A.assumptions),
                                   reason=str(exc)))
    return out


def _run_one(args):
    rec, config = args
    return certify_curve(rec, config)


def certify_batch(records, config: RunConfig = RunConfig()) -> list[Certificate]:
    """All certificates, ordered by (label, p) whatever the completion order."""
    jobs = [(r, config) for r in records]
    if config.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            results = list(pool.map(_run_one, jobs))
    else:
        results = [_run_one(j) for j in jobs]
    certs = [c for group in results for c in group]
    return sorted(certs, key=lambda c: (c.label, c.p))
