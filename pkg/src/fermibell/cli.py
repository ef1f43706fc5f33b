"""``fermibell`` command-line analyzer.

Exit codes: 0 analysis completed (whatever the verdict), 1 a certificate
failed verification, 2 input error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Sequence

from ._config import DEFAULT_TOL
from .bell import SupportError
from .exterior import NotDecomposableError
from .individuation import ZeroProbabilityError
from .qcore import DimensionError, LinAlgFailure
from .report import SECTIONS, AnalysisOptions, build_report, render_human, render_machine, verify_report
from .scenarios import SCENARIOS, random_state, scenario
from .slater import SlaterDecompositionError
from .statefile import ParsedState, StateFileError, emit_state, parse_state

EXIT_OK, EXIT_UNVERIFIED, EXIT_INPUT, EXIT_NUMERIC = 0, 1, 2, 3
OPTIMIZER_ALIASES = {"paper": "eta4"}


class InputError(Exception):
    pass


def _indices(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated 1-based indices, got {text!r}") from None


def _add_common(p: argparse.ArgumentParser, state_input: bool = True) -> None:
    if state_input:
        src = p.add_mutually_exclusive_group()
        src.add_argument("state", nargs="?", help="state file (JSON), or - for stdin")
        src.add_argument("--scenario", choices=sorted(SCENARIOS), help="use a canned state instead of a file")
    p.add_argument(
        "--optimizer",
        choices=("grid", "eta4", "stationary", "paper"),
        default="grid",
        help="grid search (default), or one closed-form configuration; 'paper' is an alias of eta4",
    )
    p.add_argument("--tolerance", type=float, default=DEFAULT_TOL, help="rank cutoff and normalization tolerance (default 1e-9)")
    p.add_argument("--seed", type=int, default=0, help="accepted for scripting symmetry with 'random'; analysis is deterministic")
    p.add_argument("--format", choices=("human", "machine"), default="human")
    p.add_argument("-o", "--output", help="write to this file instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fermibell", description="Entanglement and Bell-violation analysis of two-fermion pure states.")
    sub = parser.add_subparsers(dest="command", required=True)

    for name, help_ in (
        ("analyze", "full report: Slater form, individuation, Bell certificate"),
        ("slater", "Slater decomposition only"),
        ("individuate", "individuating projector pair only"),
        ("bell", "permutation-invariant Bell certificate"),
    ):
        _add_common(sub.add_parser(name, help=help_))

    p = sub.add_parser("map-distinguishable", help="relabel by location and certify the image as a distinguishable pair")
    _add_common(p)
    p.add_argument("--left", type=_indices, help="1-based basis indices spanning the left location (e.g. 1,2)")
    p.add_argument("--right", type=_indices, help="1-based basis indices spanning the right location")

    p = sub.add_parser("random", help="emit a seeded random state file of given Slater rank")
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("--rank", type=int, required=True)
    p.add_argument("--encoding", choices=("wedge_terms", "dense_matrix"), default="wedge_terms")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output")

    p = sub.add_parser("verify", help="recompute every certificate in a machine-readable report")
    p.add_argument("report", help="report file, or - for stdin")
    p.add_argument("--format", choices=("human", "machine"), default="human")
    return parser


def _load(args: argparse.Namespace) -> tuple[ParsedState, str, tuple[int, ...], tuple[int, ...]]:
    if args.scenario:
        sc = scenario(args.scenario)
        parsed = ParsedState(sc.state.normalized(), "wedge_terms", sc.state.norm(), dict(sc.labels))
        return parsed, f"scenario:{sc.name}", sc.left, sc.right
    if not args.state:
        raise InputError("give a state file or --scenario")
    parsed = parse_state(args.state, tol=args.tolerance)
    return parsed, Path(args.state).name if args.state != "-" else "<stdin>", (), ()


def _write(text: str, output: str | None) -> None:
    if output:
        Path(output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _run_analysis(args: argparse.Namespace) -> int:
    parsed, source, left, right = _load(args)
    sections = {
        "analyze": SECTIONS,
        "slater": ("slater",),
        "individuate": ("individuation",),
        "bell": ("slater", "bell"),
        "map-distinguishable": ("distinguishable_map",),
    }[args.command]
    if args.command == "map-distinguishable":
        left = args.left or left
        right = args.right or right
        if not (left and right):
            raise InputError("map-distinguishable needs --left and --right (or a scenario with a location structure)")
    optimizer = OPTIMIZER_ALIASES.get(args.optimizer, args.optimizer)
    opts = AnalysisOptions(optimizer, args.tolerance, tuple(left), tuple(right), sections, source)
    report = build_report(parsed, opts)
    for w in parsed.warnings:
        print(f"warning: {w}", file=sys.stderr)
    _write(render_machine(report) if args.format == "machine" else render_human(report), args.output)
    return EXIT_OK


def _run_random(args: argparse.Namespace) -> int:
    try:
        psi = random_state(args.dim, args.rank, args.seed)
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    _write(emit_state(psi, args.encoding), args.output)
    return EXIT_OK


def _run_verify(args: argparse.Namespace) -> int:
    try:
        text = sys.stdin.read() if args.report == "-" else Path(args.report).read_text(encoding="utf-8")
        report = json.loads(text)
    except OSError as exc:
        raise InputError(f"cannot read report: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{args.report}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    if not isinstance(report, dict):
        raise InputError("report must be a JSON object")
    result = verify_report(report)
    if args.format == "machine":
        sys.stdout.write(json.dumps({"verified": result.ok, "problems": result.problems, "checked": result.checked}, indent=2, sort_keys=True) + "\n")
    else:
        for line in result.checked:
            print(f"checked {line}")
        for line in result.problems:
            print(f"FAILED {line}")
        print("verified" if result.ok else "NOT verified")
    return EXIT_OK if result.ok else EXIT_UNVERIFIED


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "random":
            return _run_random(args)
        if args.command == "verify":
            return _run_verify(args)
        return _run_analysis(args)
    except (InputError, StateFileError, SupportError, KeyError, DimensionError, NotDecomposableError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"fermibell: input error: {msg}", file=sys.stderr)
        return EXIT_INPUT
    except (SlaterDecompositionError, LinAlgFailure, ZeroProbabilityError, RuntimeError, ValueError) as exc:
        print(f"fermibell: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
