"""Curve files, run configuration and certificate output."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from pathlib import Path

from .arith import isprime, prime_factors, primes_up_to
from .curve import CurveModel, RationalPoint, is_minimal_standardized
from .errors import BSDCertError, ParseError, ValidationError

__all__ = [
    "CurveRecord",
    "RunConfig",
    "parse_curve_file",
    "parse_curve_line",
    "format_record",
    "prime_policy_auto",
    "emit_certificates",
    "format_certificate",
    "fixture_path",
    "IoError",
]

HEADER = "# bsdcert certificates: label p status ord_an ord_upper chain D I"


class IoError(BSDCertError):
    pass


@dataclass(frozen=True)
class CurveRecord:
    label: str
    ainvs: tuple
    rank: int
    optimal: bool
    generator: RationalPoint | None = None
    isogeny_degrees: tuple = ()
    isogeny_class_torsion: tuple | None = None

    @property
    def model(self) -> CurveModel:
        return CurveModel(*self.ainvs)


@dataclass(frozen=True)
class RunConfig:
    precision_bits: int = 200
    ell_bound: int = 1000
    search_time_cap: float | None = 600.0
    heegner_disc_count: int = 5
    prime_policy: str | tuple = "auto"
    output: str | None = None
    workers: int = 1

    def __post_init__(self):
        if self.precision_bits < 64:
            raise ValueError("precision_bits must be at least 64")
        if self.heegner_disc_count < 1:
            raise ValueError("heegner_disc_count must be positive")
        if self.prime_policy != "auto":
            if not all(isprime(p) for p in self.prime_policy):
                raise ValueError("explicit prime lists may only contain primes")


def fixture_path() -> Path:
    """The bundled file of fifteen rank-one CM curves."""
    return Path(str(resources.files("bsdcert") / "data" / "fixtures.txt"))


def _rational(tok: str, lineno: int) -> Fraction:
    try:
        return Fraction(tok)
    except (ValueError, ZeroDivisionError) as exc:
        raise ParseError(f"bad rational {tok!r}", lineno) from exc


def _int(tok: str, lineno: int) -> int:
    try:
        return int(tok)
    except ValueError as exc:
        raise ParseError(f"bad integer {tok!r}", lineno) from exc


def _int_list(body: str, lineno: int) -> tuple:
    return tuple(_int(t, lineno) for t in body.split(",") if t)


def parse_curve_line(line: str, lineno: int = 0) -> CurveRecord | None:
    """One record, or None for blank and comment lines."""
    text = line.split("#", 1)[0].strip()
    if not text:
        return None
    toks = text.split()
    if len(toks) < 8:
        raise ParseError("expected: label a1 a2 a3 a4 a6 rank optimal [x y] [isog:..] [classtors:..]", lineno)
    label = toks[0]
    ainvs = tuple(_int(t, lineno) for t in toks[1:6])
    rank = _int(toks[6], lineno)
    opt = _int(toks[7], lineno)
    rest = toks[8:]
    isog, ctors, coords = (), None, []
    for tok in rest:
        if tok.startswith("isog:"):
            isog = _int_list(tok[5:], lineno)
        elif tok.startswith("classtors:"):
            ctors = _int_list(tok[10:], lineno)
        else:
            coords.append(_rational(tok, lineno))
    if len(coords) not in (0, 2):
        raise ParseError("a generator needs exactly two coordinates", lineno)
    gen = RationalPoint(coords[0], coords[1]) if coords else None
    rec = CurveRecord(label, ainvs, rank, bool(opt), gen, isog, ctors)
    _validate(rec, opt, lineno)
    return rec


def _validate(rec: CurveRecord, opt: int, lineno: int):
    where = f"line {lineno}: {rec.label}"
    if rec.rank not in (0, 1):
        raise ValidationError(f"{where}: rank must be 0 or 1")
    if opt not in (0, 1):
        raise ValidationError(f"{where}: optimal flag must be 0 or 1")
    try:
        E = rec.model
    except BSDCertError as exc:
        raise ValidationError(f"{where}: {exc}") from exc
    if not is_minimal_standardized(E):
        raise ValidationError(f"{where}: model is not minimal and standardized")
    if rec.generator is not None:
        if rec.rank != 1:
            raise ValidationError(f"{where}: generator given for a rank-0 curve")
        if not E.contains(rec.generator):
            raise ValidationError(f"{where}: generator is not on the curve")
    if any(not isprime(p) for p in rec.isogeny_degrees):
        raise ValidationError(f"{where}: isogeny degrees must be primes")
    if rec.isogeny_class_torsion is not None and any(t < 1 for t in rec.isogeny_class_torsion):
        raise ValidationError(f"{where}: torsion orders must be positive")


def parse_curve_file(path) -> list[CurveRecord]:
    path = Path(path)
    if not path.exists():
        raise IoError(f"no such file: {path}")
    out, seen = [], set()
    with path.open() as fh:
        for lineno, line in enumerate(fh, 1):
            rec = parse_curve_line(line, lineno)
            if rec is None:
                continue
            if rec.label in seen:
                raise ValidationError(f"line {lineno}: duplicate label {rec.label}")
            seen.add(rec.label)
            out.append(rec)
    return out


def format_record(rec: CurveRecord) -> str:
    toks = [rec.label, *map(str, rec.ainvs), str(rec.rank), str(int(rec.optimal))]
    if rec.generator is not None:
        toks += [str(rec.generator.x), str(rec.generator.y)]
    if rec.isogeny_degrees:
        toks.append("isog:" + ",".join(map(str, rec.isogeny_degrees)))
    if rec.isogeny_class_torsion is not None:
        toks.append("classtors:" + ",".join(map(str, rec.isogeny_class_torsion)))
    return " ".join(toks)


def prime_policy_auto(rec: CurveRecord, sha=None, conductor: int | None = None,
                      tamagawa: dict | None = None) -> list[int]:
    """Primes <= 11, primes of bad reduction, primes dividing a Tamagawa
    number, primes dividing the analytic order of Sha, and isogeny degrees."""
    from .local import bad_primes, local_data

    E = rec.model
    ps = set(primes_up_to(11))
    bad = prime_factors(conductor) if conductor is not None else bad_primes(E)
    ps.update(bad)
    if tamagawa is None:
        tamagawa = {q: local_data(E, q).c_p for q in bad}
    for c in tamagawa.values():
        ps.update(prime_factors(c))
    if sha is not None:
        ps.update(p for p, e in sha.ordp.items() if e > 0)
    ps.update(rec.isogeny_degrees)
    return sorted(ps)


def format_certificate(cert) -> str:
    upper = "inf" if cert.sha_ordp_upper is None else str(cert.sha_ordp_upper)
    D = "-" if cert.D is None else str(cert.D)
    index = cert.index_text or "-"
    return (f"{cert.label} {cert.p} {cert.status} ord_an={cert.sha_ordp_an} ord_upper={upper} "
            f"chain={','.join(cert.chain_ids) or 'none'} D={D} I={index}")


def emit_certificates(certs, path=None, fmt: str = "text") -> str:
    """Write certificates sorted by (label, p); returns the written text."""
    if fmt not in ("text", "json-lines"):
        raise ValueError("format must be text or json-lines")
    certs = sorted(certs, key=lambda c: (c.label, c.p))
    if fmt == "text":
        lines = [HEADER] + [format_certificate(c) for c in certs]
    else:
        lines = [json.dumps(c.to_dict(), sort_keys=False) for c in certs]
    text = "\n".join(lines) + ("\n" if lines else "")
    if path is not None:
        try:
            Path(path).write_text(text)
        except OSError as exc:
            raise IoError(f"cannot write {path}: {exc}") from exc
    return text
