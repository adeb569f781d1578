"""Command line: certify, invariants, heegner, twist."""

from __future__ import annotations

import argparse
import json
import sys

import mpmath

from .errors import BSDCertError
from .io import RunConfig, emit_certificates, fixture_path, parse_curve_file


def _primes(text: str):
    if text == "auto":
        return "auto"
    try:
        return tuple(sorted({int(t) for t in text.split(",") if t}))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected 'auto' or a comma-separated prime list, got {text!r}")


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="bsdcert", description="BSD invariants and p-part certificates "
                                 "for elliptic curves over Q of analytic rank 0 or 1.")
    sub = ap.add_subparsers(dest="verb", required=True)

    def common(p):
        p.add_argument("--curves", default=None, help="curve file (default: bundled fixtures)")
        p.add_argument("--precision", type=int, default=200, help="working precision in bits")
        p.add_argument("--out", default=None, help="output file (default: stdout)")
        p.add_argument("--format", choices=("text", "json-lines"), default="text")

    c = sub.add_parser("certify", help="certificates for each curve and prime")
    common(c)
    c.add_argument("--primes", type=_primes, default="auto")
    c.add_argument("--ell-bound", type=int, default=1000)
    c.add_argument("--disc-count", type=int, default=5)
    c.add_argument("--time-cap", type=float, default=600.0, help="seconds per point search")
    c.add_argument("--workers", type=int, default=1)

    i = sub.add_parser("invariants", help="dump curve data")
    common(i)

    h = sub.add_parser("heegner", help="Heegner indexes")
    common(h)
    h.add_argument("--disc", type=int, action="append", default=None, help="discriminant (repeatable)")
    h.add_argument("--disc-count", type=int, default=1)

    t = sub.add_parser("twist", help="delta(E, d) and the minimal twist")
    common(t)
    t.add_argument("--d", type=int, required=True)
    return ap


def _records(args):
    return parse_curve_file(args.curves or fixture_path())


def _emit_rows(rows, args):
    if args.format == "json-lines":
        text = "".join(json.dumps(r) + "\n" for r in rows)
    else:
        text = "".join(" ".join(f"{k}={v}" if k != "label" else str(v) for k, v in r.items()) + "\n"
                       for r in rows)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _num(x, digits=20) -> str:
    return mpmath.nstr(x, digits)


def cmd_certify(args) -> int:
    from .verdict import certify_batch

    config = RunConfig(precision_bits=args.precision, ell_bound=args.ell_bound, search_time_cap=args.time_cap,
                       heegner_disc_count=args.disc_count, prime_policy=args.primes, output=args.out,
                       workers=args.workers)
    certs = certify_batch(_records(args), config)
    text = emit_certificates(certs, args.out, args.format)
    if not args.out:
        sys.stdout.write(text)
    return 0


def cmd_invariants(args) -> int:
    from .analytic import l_value, periods
    from .curve import cm_test, torsion_subgroup
    from .local import bad_primes, conductor, local_data

    rows = []
    for rec in _records(args):
        E = rec.model
        N = conductor(E)
        pe = periods(E, args.precision)
        lv = l_value(E, rec.rank, args.precision, N)
        tors = torsion_subgroup(E)
        cm = cm_test(E)
        local = ";".join(f"{L.p}:{L.kodaira}:{L.c_p}" for L in (local_data(E, q) for q in bad_primes(E)))
        rows.append({
            "label": rec.label,
            "ainvs": ",".join(map(str, rec.ainvs)),
            "disc": int(E.disc),
            "j": str(E.j),
            "conductor": N,
            "local": local,
            "torsion": "x".join(map(str, tors.invariants)) or "1",
            "cm": cm.field_disc if cm.is_cm else "none",
            "omega": _num(pe.omega_real),
            "lattice_area2": _num(pe.lattice_area2),
            "leading_L": _num(lv.leading_coeff),
        })
    _emit_rows(rows, args)
    return 0


def cmd_heegner(args) -> int:
    from .heegner import find_heegner_discriminants, heegner_index_rank1
    from .heights import certify_generator, find_generator
    from .local import conductor

    rows = []
    for rec in _records(args):
        if rec.rank != 1:
            continue
        E = rec.model
        gen = rec.generator or find_generator(E, 16.0)
        if gen is None:
            raise BSDCertError(f"{rec.label}: no generator found")
        gen, _ = certify_generator(E, gen, args.precision)
        discs = args.disc or [h.D for h in find_heegner_discriminants(conductor(E), args.disc_count)]
        for D in discs:
            r = heegner_index_rank1(E, D, gen, args.precision)
            rows.append({"label": rec.label, "D": D, "I": r.index_text(), "value": _num(r.value, 15),
                         "mode": r.mode})
    _emit_rows(rows, args)
    return 0


def cmd_twist(args) -> int:
    from .twist import delta, minimal_twist

    rows = []
    for rec in _records(args):
        E = rec.model
        tr = delta(E, args.d)
        F = minimal_twist(E, args.d)
        rows.append({"label": rec.label, "d": args.d, "delta": str(tr.delta),
                     "twist": ",".join(str(a) for a in F.int_ainvs), "disc": int(F.disc)})
    _emit_rows(rows, args)
    return 0


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    handler = {"certify": cmd_certify, "invariants": cmd_invariants, "heegner": cmd_heegner,
               "twist": cmd_twist}[args.verb]
    try:
        return handler(args)
    except (BSDCertError, OSError, ValueError) as exc:
        print(f"bsdcert: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
