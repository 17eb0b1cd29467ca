"""Command line front end.

Exit codes: 0 success/accept, 1 reject or failed check, 2 structural error
(bad input file, skeleton mismatch, invalid honest solution), 3 no solution
within the move bound.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import analysis
from .cards import Transcript
from .protocol import CHEAT_CLASSES, plan_cheat, run_adversarial_session, run_session
from .puzzle import (InvalidMove, PuzzleError, SearchBudgetExceeded, format_solution, load_puzzle,
                     load_solution, replay, solve)
from .replay import SkeletonMismatch, verify_transcript

EXIT_OK, EXIT_REJECT, EXIT_STRUCTURAL, EXIT_UNSOLVED = 0, 1, 2, 3


def _err(msg: str) -> None:
    print(f"error: {msg}", file=sys.stderr)


def cmd_solve(args) -> int:
    puzzle = load_puzzle(args.puzzle)
    try:
        moves = solve(puzzle, args.max_moves, args.node_budget)
    except SearchBudgetExceeded as exc:
        _err(str(exc))
        return EXIT_STRUCTURAL
    if moves is None:
        print(f"unsolvable within {args.max_moves} moves")
        return EXIT_UNSOLVED
    text = format_solution(moves)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    print(f"t={len(moves)}", file=sys.stderr if not args.out else sys.stdout)
    return EXIT_OK


def _write_transcript(transcript: Transcript, path) -> None:
    if path:
        Path(path).write_text(transcript.dumps())


def cmd_prove(args) -> int:
    puzzle = load_puzzle(args.puzzle)
    solution = load_solution(args.solution)
    if args.cheat:
        script = plan_cheat(puzzle, solution, args.cheat)
        result = run_adversarial_session(puzzle, script, seed=args.seed)
    else:
        try:
            replay(puzzle, solution)
        except InvalidMove as exc:
            _err(f"solution move {_invalid_index(puzzle, solution)}: {exc.rule}")
            return EXIT_STRUCTURAL
        result = run_session(puzzle, solution, seed=args.seed)
    _write_transcript(result.transcript, args.transcript)
    print(f"{result.verdict} after {result.moves_executed} move(s)")
    return EXIT_OK if result.accepted else EXIT_REJECT


def _invalid_index(puzzle, solution) -> int:
    for k in range(len(solution)):
        try:
            replay(puzzle, solution[:k + 1])
        except InvalidMove:
            return k + 1
    return len(solution)


def cmd_verify(args) -> int:
    puzzle = load_puzzle(args.puzzle)
    try:
        transcript = Transcript.loads(Path(args.transcript).read_text())
        verdict = verify_transcript(transcript, puzzle)
    except SkeletonMismatch as exc:
        _err(f"skeleton mismatch: {exc}")
        return EXIT_STRUCTURAL
    except (ValueError, KeyError) as exc:
        _err(f"unreadable transcript: {exc}")
        return EXIT_STRUCTURAL
    print(verdict)
    return EXIT_OK if verdict else EXIT_REJECT


def cmd_simulate(args) -> int:
    puzzle = load_puzzle(args.puzzle)
    transcript = analysis.simulate_session(puzzle, args.moves, seed=args.seed)
    if args.transcript:
        _write_transcript(transcript, args.transcript)
    else:
        sys.stdout.write(transcript.dumps())
    return EXIT_OK


def cmd_analyze(args) -> int:
    puzzle = load_puzzle(args.puzzle)
    solution = load_solution(args.solution)
    replay(puzzle, solution)
    t = len(solution)
    if args.exact:
        real = analysis.exact_real(puzzle, solution)
        sim = analysis.exact_simulated(puzzle, t)
    else:
        if args.samples < 100:
            _err("need at least 100 samples")
            return EXIT_STRUCTURAL
        real = analysis.sample_real(puzzle, solution, args.samples, args.seed, leaky=args.leaky)
        sim = analysis.sample_simulated(puzzle, t, args.samples, args.seed)
    try:
        report = analysis.compare_distributions(real, sim)
    except SkeletonMismatch as exc:
        _err(f"skeleton mismatch: {exc}")
        return EXIT_STRUCTURAL
    text = report.to_json()
    if args.report:
        Path(args.report).write_text(text)
    print(f"{'PASS' if report.passed else 'FAIL'} mode={report.mode} sites={len(report.sites)} "
          f"failed_sites={len(report.failed_sites)} max_tv={report.max_tv:.4f}")
    return EXIT_OK if report.passed else EXIT_REJECT


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ballsort-zk", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="find a shortest solution by BFS")
    p.add_argument("puzzle")
    p.add_argument("--max-moves", type=int, default=40)
    p.add_argument("--node-budget", type=int, default=10**7)
    p.add_argument("-o", "--out", help="solution file to write (default: stdout)")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("prove", help="run a proof session")
    p.add_argument("puzzle")
    p.add_argument("solution")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--transcript", help="where to write the transcript")
    p.add_argument("--cheat", choices=CHEAT_CLASSES, help="play a dishonest prover of this class")
    p.set_defaults(func=cmd_prove)

    p = sub.add_parser("verify", help="replay the verifier's checks on a transcript")
    p.add_argument("transcript")
    p.add_argument("puzzle")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("simulate", help="write a simulated transcript (no solution needed)")
    p.add_argument("puzzle")
    p.add_argument("--moves", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--transcript")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("analyze", help="compare real and simulated transcript distributions")
    p.add_argument("puzzle")
    p.add_argument("solution")
    p.add_argument("--samples", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--report")
    p.add_argument("--leaky", action="store_true", help="break one shuffle (power check)")
    p.add_argument("--exact", action="store_true", help="enumerate every shuffle outcome")
    p.set_defaults(func=cmd_analyze)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except PuzzleError as exc:
        _err(str(exc))
        return EXIT_STRUCTURAL
    except OSError as exc:
        _err(str(exc))
        return EXIT_STRUCTURAL


if __name__ == "__main__":
    sys.exit(main())
