"""Command-line entrypoint: analyze, verify, spectrum, corpus-list.

Exit codes: 0 success or all applicable equations pass, 1 degenerate verdict or a
failed equation, 2 input errors (schema, parse, type, arguments), 3 internal errors.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from typing import Optional, Sequence

from app import config
from app.algebra import load_algebra_file
from app.diagram import (
    EXTENDED_CORPUS_TEXT,
    EquationCorpusEntry,
    builtin_corpus,
    check_corpus,
    extended_corpus,
    extras_for,
    load_corpus_file,
    parse_corpus_text,
)
from app.models import AppError, VerifyPayload
from app.separability import SeparabilityReport, decide_strong_separability
from app.spectrum import composition_report, fiber_table, spectrum_payload
from app.utils import format_matrix, format_table, format_vector, format_witness


logger = logging.getLogger(__name__)


class _ArgumentParser(argparse.ArgumentParser):
    """Raise instead of exiting so bad arguments share the error envelope."""

    def error(self, message: str):  # type: ignore[override]
        raise AppError(code="INVALID_ARGUMENT", message=message, details={"usage": self.format_usage().strip()})


def build_parser() -> argparse.ArgumentParser:
    parser = _ArgumentParser(prog="python -m app", description="Strong separability workbench.")
    parser.add_argument("--verbose", action="store_true", help="log debug output to stderr")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_ArgumentParser)

    analyze = sub.add_parser("analyze", help="decide strong separability of an algebra file")
    analyze.add_argument("path")
    analyze.add_argument("--json", action="store_true")

    verify = sub.add_parser("verify", help="check the equation corpus on an algebra file")
    verify.add_argument("path")
    verify.add_argument("--corpus", help="corpus file in 'name : lhs == rhs  # anchor' format")
    verify.add_argument("--extended", action="store_true", help="also run the intermediate identities")
    verify.add_argument("--json", action="store_true")

    spectrum = sub.add_parser("spectrum", help="fiber table of the degree-n circle map")
    spectrum.add_argument("--degree", type=int, required=True)
    spectrum.add_argument("--max", type=int, required=True, dest="max_index")
    spectrum.add_argument("--compose", type=int, help="also compare degree-n then degree-k with degree n*k")
    spectrum.add_argument("--json", action="store_true")

    corpus = sub.add_parser("corpus-list", help="list the equation corpus")
    corpus.add_argument("--corpus", help="list a corpus file instead of the builtin corpus")
    corpus.add_argument("--extended", action="store_true")
    corpus.add_argument("--json", action="store_true")
    return parser


def _select_corpus(args: argparse.Namespace) -> list[EquationCorpusEntry]:
    if args.corpus:
        entries = load_corpus_file(args.corpus)
        if args.extended:
            entries += parse_corpus_text(EXTENDED_CORPUS_TEXT)
        return entries
    return extended_corpus() if args.extended else builtin_corpus()


def _print_report(report: SeparabilityReport) -> None:
    payload = report.to_payload()
    shape = "commutative" if payload.is_commutative else "noncommutative"
    scalars = report.algebra.spec.label
    print(f"algebra: {payload.algebra} (dim {payload.dim} over {scalars}, {shape})")
    print(f"trace map: {format_vector(payload.trace_map)}")
    print("trace form:")
    print(format_matrix(payload.trace_form))
    print(f"det: {payload.det}")
    print(f"verdict: {payload.verdict}")
    if payload.degeneracy is not None:
        print(f"degeneracy: {payload.degeneracy.kind}")
        if payload.degeneracy.kernel_vector is not None:
            print(f"kernel vector: {format_vector(payload.degeneracy.kernel_vector)}")
    if payload.kappa is not None:
        print("kappa:")
        print(format_matrix(payload.kappa))
    if payload.axiom_results:
        rows = [[r.name, "pass" if r.passed else "FAIL", format_witness(r.witness)] for r in payload.axiom_results]
        print(format_table(["axiom", "result", "witness"], rows))


def _analyze(args: argparse.Namespace) -> int:
    report = decide_strong_separability(load_algebra_file(args.path))
    if args.json:
        print(report.to_payload().model_dump_json(indent=2))
    else:
        _print_report(report)
    return 0 if report.is_strongly_separable else 1


def _verify(args: argparse.Namespace) -> int:
    algebra = load_algebra_file(args.path)
    entries = _select_corpus(args)
    report = decide_strong_separability(algebra)
    results = check_corpus(entries, algebra, extras_for(report))
    all_passed = all(result.status != "fail" for result in results)

    if args.json:
        payload = VerifyPayload(
            algebra=algebra.name,
            verdict=report.verdict,
            results=[result.to_payload() for result in results],
            all_passed=all_passed,
        )
        print(payload.model_dump_json(indent=2))
    else:
        print(f"algebra: {algebra.name} ({report.verdict})")
        rows = [[r.name, r.status, format_witness(r.witness), r.anchor] for r in results]
        print(format_table(["equation", "status", "witness", "anchor"], rows))
        counts = {status: sum(r.status == status for r in results) for status in ("pass", "fail", "skipped")}
        print(f"{counts['pass']} pass, {counts['fail']} fail, {counts['skipped']} skipped")
    return 0 if all_passed else 1


def _spectrum(args: argparse.Namespace) -> int:
    if args.json:
        print(spectrum_payload(args.degree, args.max_index, args.compose).model_dump_json(indent=2))
        return 0
    rows = fiber_table(args.degree, args.max_index)
    print(
        format_table(
            ["N", "fiber", "cardinality"],
            [[row.index, " ".join(str(m) for m in row.fiber), row.cardinality] for row in rows],
        )
    )
    if args.compose is not None:
        composition = composition_report(args.degree, args.compose, args.max_index)
        print()
        print(
            format_table(
                ["m", f"phi_{args.compose}(phi_{args.degree}(m))", f"phi_{args.degree * args.compose}(m)", "agrees"],
                [[row.m, row.iterated, row.direct, "yes" if row.agrees else "no"] for row in composition],
            )
        )
    return 0


def _corpus_list(args: argparse.Namespace) -> int:
    entries = _select_corpus(args)
    if args.json:
        print(json.dumps([entry.to_payload().model_dump() for entry in entries], indent=2))
        return 0
    rows = []
    for entry in entries:
        payload = entry.to_payload()
        signature = f"{','.join(payload.domain) or '1'} -> {','.join(payload.codomain) or '1'}"
        rows.append([payload.name, f"{payload.lhs} == {payload.rhs}", signature, "yes" if payload.requires_separable else ""])
    print(format_table(["name", "equation", "type", "separable"], rows))
    return 0


COMMANDS = {
    "analyze": _analyze,
    "verify": _verify,
    "spectrum": _spectrum,
    "corpus-list": _corpus_list,
}


def _wants_json(argv: Sequence[str]) -> bool:
    return "--json" in argv


def _emit_error(err: AppError, as_json: bool) -> int:
    if as_json:
        print(err.to_payload().model_dump_json(indent=2))
    else:
        print(f"error: {err}", file=sys.stderr)
        if err.details:
            print(json.dumps(err.details, default=str), file=sys.stderr)
    return err.exit_code


def run(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    config.configure_logging()
    try:
        args = build_parser().parse_args(argv)
        if args.verbose:
            config.configure_logging("DEBUG")
        return COMMANDS[args.command](args)
    except AppError as err:
        return _emit_error(err, _wants_json(argv))
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    except Exception as exc:  # Safety net preserving the error contract.
        logger.exception("Unhandled error")
        return _emit_error(
            AppError(code="INTERNAL_ERROR", message="Unhandled error.", exit_code=3, details={"error": repr(exc)}),
            _wants_json(argv),
        )


def main() -> int:
    return run(sys.argv[1:])


if __name__ == "__main__":
    raise SystemExit(main())
