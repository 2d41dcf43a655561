"""Command-line driver.

Exit codes: 0 everything verified, 1 a mathematical finding (failed axiom,
characterization mismatch, missing zero), 2 unreadable or malformed input, 3 a
resource cap refused the request.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .algebra import AbstractAlgebra, check_axioms
from .enumeration import DEFAULT_MAX_MEMBERS, ConcreteAlgebra, abstractify, enumerate_closed
from .errors import CapExceeded, ContractError, IntegrityError, StructuralError
from .pipeline import SweepConfig, analyze_corpus, report_header, summarize
from .stationary import (
    DEFAULT_EXHAUSTIVE_CAP,
    DEFAULT_SAMPLES,
    RepresentationCache,
    check_zero_forces_whole,
    check_stationary_consequences,
    stationary_mask,
    verify_characterization,
)

EXIT_OK, EXIT_FINDING, EXIT_INPUT, EXIT_CAP = 0, 1, 2, 3


class InputError(Exception):
    pass


def _dump(obj) -> str:
    return json.dumps(obj, sort_keys=False, separators=(",", ":"))


def _emit(text: str, output: str | None):
    if output:
        Path(output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def load_algebra(path: str):
    """Read an abstract or concrete algebra; returns ``(AbstractAlgebra, ConcreteAlgebra | None)``."""
    try:
        obj = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{path} is not valid JSON: {exc}") from exc
    if not isinstance(obj, dict):
        raise InputError("expected a JSON object")
    try:
        if "members" in obj:
            phi = ConcreteAlgebra.from_json(obj)
            alg, _ = abstractify(phi)
            return alg, phi
        if "sup" in obj:
            return AbstractAlgebra.from_json(obj), None
    except (StructuralError, IntegrityError, ValueError, TypeError) as exc:
        raise InputError(str(exc)) from exc
    raise InputError("object is neither an abstract algebra (sup/meet/r) nor a concrete one (members)")


def cmd_check_axioms(args) -> int:
    alg, _ = load_algebra(args.input)
    report = check_axioms(alg)
    out = {"header": report_header("check-axioms", {"input": args.input}, args.seed),
           "report": report.to_json()}
    _emit(json.dumps(out, indent=2) + "\n", args.output)
    return EXIT_OK if report.passed else EXIT_FINDING


def cmd_verify(args) -> int:
    alg, phi = load_algebra(args.input)
    config = {"input": args.input, "exhaustive_cap": args.exhaustive_cap, "samples": args.samples}
    lines = [_dump({"header": report_header("verify", config, args.seed)})]
    report = check_axioms(alg)
    if not report.passed:
        lines.append(_dump({"summary": {"status": "axioms_failed", "failures": report.failures()}}))
        _emit("\n".join(lines) + "\n", args.output)
        return EXIT_FINDING
    if alg.zero is None:
        if phi is not None:
            st = stationary_mask(phi)
            ok = bool(st.all())
            lines.append(_dump({"summary": {"status": "zero_free", "all_stationary": ok}}))
            _emit("\n".join(lines) + "\n", args.output)
            return EXIT_OK if ok else EXIT_FINDING
        lines.append(_dump({"summary": {"status": "no_zero",
                                        "diagnosis": "the characterization needs a zero"}}))
        _emit("\n".join(lines) + "\n", args.output)
        return EXIT_FINDING

    cache = RepresentationCache(alg)
    st = stationary_mask(phi) if phi is not None else None
    sweep = verify_characterization(alg, args.exhaustive_cap, args.samples, args.seed,
                               concrete_st=st, cache=cache)
    for v in sweep.verdicts():
        lines.append(_dump(v.to_json()))
    consequences = {}
    for k in sweep.stationary_indices:
        h = sweep.masks[k]
        checks = {"zero_in_subset_means_all": check_zero_forces_whole(alg, h),
                  **check_stationary_consequences(alg, h)}
        for name, c in checks.items():
            if c.failed:
                consequences.setdefault(name, sorted(int(x) for x in h.nonzero()[0]))
    findings = sweep.findings + len(consequences)
    lines.append(_dump({"summary": {
        "status": "verified" if findings == 0 else "findings",
        **sweep.counts(),
        "necessity": sweep.necessity.status,
        "representations": sweep.representation_ok,
        "consequence_failures": consequences,
    }}))
    _emit("\n".join(lines) + "\n", args.output)
    return EXIT_OK if findings == 0 else EXIT_FINDING


def cmd_corpus(args) -> int:
    config = SweepConfig(args.exhaustive_cap, args.samples, args.seed)
    stats = {}
    algebras = enumerate_closed(args.m, args.n, args.max_members, stats=stats)
    if args.corpus_file:
        Path(args.corpus_file).write_text(
            json.dumps([phi.to_json() for phi in algebras]) + "\n", encoding="utf-8")
    records = analyze_corpus(algebras, config, args.jobs)
    header = report_header("corpus", {
        "m": args.m, "n": args.n, "max_members": args.max_members,
        "exhaustive_cap": args.exhaustive_cap, "samples": args.samples,
    }, args.seed)
    summary = summarize(records)
    out = {"header": header, "enumeration": stats, "summary": summary, "instances": records}
    _emit(json.dumps(out, indent=1) + "\n", args.output)
    return EXIT_OK if summary["instances_with_findings"] == 0 else EXIT_FINDING


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def _nonnegative(text: str) -> int:
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError("must be non-negative")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="menger", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--output", help="report path (default: stdout)")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--jobs", type=_positive, default=1)

    def sweep_flags(sp):
        sp.add_argument("--exhaustive-cap", type=_nonnegative, default=DEFAULT_EXHAUSTIVE_CAP,
                        help="largest carrier swept over all subsets")
        sp.add_argument("--samples", type=_positive, default=DEFAULT_SAMPLES,
                        help="random subsets drawn above the exhaustive cap")

    sp = sub.add_parser("check-axioms", help="check the semilattice laws and the ten axioms")
    sp.add_argument("--input", required=True)
    common(sp)
    sp.set_defaults(func=cmd_check_axioms)

    sp = sub.add_parser("verify", help="compare syntactic and representation-based stationarity")
    sp.add_argument("--input", required=True)
    common(sp)
    sweep_flags(sp)
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("corpus", help="enumerate closed algebras and run every check")
    sp.add_argument("--m", type=_positive, required=True, help="base set size")
    sp.add_argument("--n", type=_positive, required=True, help="arity")
    sp.add_argument("--max-members", type=_positive, default=DEFAULT_MAX_MEMBERS)
    sp.add_argument("--corpus-file", help="also write the enumerated algebras here")
    common(sp)
    sweep_flags(sp)
    sp.set_defaults(func=cmd_corpus)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        return args.func(args)
    except InputError as exc:
        print(f"menger: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except CapExceeded as exc:
        print(f"menger: refused: {exc}", file=sys.stderr)
        return EXIT_CAP
    except (ContractError, IntegrityError) as exc:
        print(f"menger: finding: {exc}", file=sys.stderr)
        return EXIT_FINDING


if __name__ == "__main__":
    sys.exit(main())
