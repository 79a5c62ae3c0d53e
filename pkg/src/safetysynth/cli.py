"""Command line: solve, synthesize, verify, generate counters, benchmark."""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .aiger import AigerError, parse_aag, read_spec, split_inputs, write_aag, write_controlled_aag
from .bdd import NodeLimitExceeded, Timeout
from .bench import ALGOS, canonical_algo, run_batch, run_one, run_solver, status_conflicts, write_csv
from .game import Status

log = logging.getLogger("safetysynth")

EXIT_REALIZABLE = 10
EXIT_UNREALIZABLE = 20
EXIT_RESOURCE = 2
EXIT_USAGE = 1
EXIT_VERIFY_FAILED = 3

DEFAULT_TIMEOUT = 500.0


def _algo(text: str) -> str:
    try:
        return canonical_algo(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _exit_for(status: Status) -> int:
    return {Status.REALIZABLE: EXIT_REALIZABLE, Status.UNREALIZABLE: EXIT_UNREALIZABLE}.get(
        status, EXIT_RESOURCE)


def _load(path: str):
    try:
        return read_spec(path)
    except (OSError, AigerError) as exc:
        print(f"error: {path}: {exc}", file=sys.stderr)
        return None


def cmd_solve(args) -> int:
    spec = _load(args.file)
    if spec is None:
        return EXIT_USAGE
    rec = run_one(spec, Path(args.file).stem, args.algo, timeout=args.timeout, node_limit=args.node_limit)
    print(rec.status)
    log.info("%s", rec)
    return _exit_for(Status(rec.status))


def cmd_synth(args) -> int:
    from .strategy import synthesize, verify_controller

    spec = _load(args.file)
    if spec is None:
        return EXIT_USAGE
    g, res = run_solver(spec, args.algo, timeout=args.timeout, node_limit=args.node_limit)
    print(res.status.value)
    if res.status is not Status.REALIZABLE:
        return _exit_for(res.status)
    try:
        ctrl = synthesize(g, res.losing, rerun=args.rerun_reach)
        verdict = verify_controller(spec, ctrl)
    except (Timeout, NodeLimitExceeded) as exc:
        print(f"error: controller construction ran out of resources: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    if not verdict.safe:
        print("error: synthesized controller failed verification", file=sys.stderr)
        for step in verdict.trace:
            print(f"  {step}", file=sys.stderr)
        return EXIT_VERIFY_FAILED
    text = write_controlled_aag(spec.aig, ctrl.as_aiger())
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    log.info("controller: %d gates", ctrl.gate_count)
    return EXIT_REALIZABLE


def cmd_verify(args) -> int:
    """Check a closed circuit (no controllable inputs) for reachability of its bad output."""
    from .strategy import verify_controller

    spec = _load(args.file)
    if spec is None:
        return EXIT_USAGE
    if spec.controllable:
        print("error: circuit still has controllable inputs", file=sys.stderr)
        return EXIT_USAGE
    verdict = verify_controller(spec, {})
    if verdict.safe:
        print("SAFE")
        return 0
    print(f"UNSAFE after {len(verdict)} steps")
    for step in verdict.trace:
        print(f"  {step}")
    return EXIT_VERIFY_FAILED


def cmd_gen_cnt(args) -> int:
    from .families import gen_cnt

    if not 1 <= args.n <= 30:
        print("error: n must be in 1..30", file=sys.stderr)
        return EXIT_USAGE
    text = write_aag(gen_cnt(args.n))
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_bench(args) -> int:
    root = Path(args.dir)
    if not root.is_dir():
        print(f"error: {root} is not a directory", file=sys.stderr)
        return EXIT_USAGE
    paths = sorted(root.glob("*.aag"))
    records = run_batch(paths, args.algos, timeout=args.timeout, node_limit=args.node_limit,
                        jobs=args.jobs, synth=args.synth)
    if args.csv:
        with open(args.csv, "w", encoding="utf-8", newline="") as fh:
            write_csv(records, fh)
    else:
        write_csv(records, sys.stdout)
    conflicts = status_conflicts(records)
    for name, statuses in sorted(conflicts.items()):
        print(f"warning: algorithms disagree on {name}: {sorted(statuses)}", file=sys.stderr)
    return 0


def cmd_oracle(args) -> int:
    from .oracle import TooLarge, explicit_game, explicit_solve

    spec = _load(args.file)
    if spec is None:
        return EXIT_USAGE
    try:
        res = explicit_solve(explicit_game(spec))
    except TooLarge as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    print("REALIZABLE" if res.winner == "eve" else "UNREALIZABLE")
    return EXIT_REALIZABLE if res.winner == "eve" else EXIT_UNREALIZABLE


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="safetysynth", description=__doc__)
    p.add_argument("-v", "--verbose", action="count", default=0)
    sub = p.add_subparsers(dest="command", required=True, metavar="{solve,synth,verify,gen-cnt,bench}")

    def solver_opts(sp):
        sp.add_argument("file")
        sp.add_argument("--algo", type=_algo, default="C-TL", help="C, C-TL, A or A-TL (or c/ctl/a/atl)")
        sp.add_argument("--timeout", type=float, default=DEFAULT_TIMEOUT, help="seconds")
        sp.add_argument("--node-limit", type=int, default=None)

    sp = sub.add_parser("solve", help="decide realizability")
    solver_opts(sp)
    sp.set_defaults(func=cmd_solve)

    sp = sub.add_parser("synth", help="synthesize and verify a controller")
    solver_opts(sp)
    sp.add_argument("--rerun-reach", action="store_true",
                    help="determinize a second time using the states the first controller reaches")
    sp.add_argument("--out", help="output aag path (default: stdout)")
    sp.set_defaults(func=cmd_synth)

    sp = sub.add_parser("verify", help="model check a closed circuit")
    sp.add_argument("file")
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("gen-cnt", help="write the n-bit resettable counter")
    sp.add_argument("n", type=int)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_gen_cnt)

    sp = sub.add_parser("bench", help="run several algorithms on every .aag in a directory")
    sp.add_argument("dir")
    sp.add_argument("--algos", type=lambda s: [_algo(a) for a in s.split(",")], default=list(ALGOS))
    sp.add_argument("--timeout", type=float, default=DEFAULT_TIMEOUT)
    sp.add_argument("--node-limit", type=int, default=None)
    sp.add_argument("--jobs", type=int, default=1)
    sp.add_argument("--synth", action="store_true", help="also build controllers and count gates")
    sp.add_argument("--csv", help="output path (default: stdout)")
    sp.set_defaults(func=cmd_bench)

    sp = sub.add_parser("oracle")
    sp.add_argument("file")
    sp.set_defaults(func=cmd_oracle)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else 0
    level = [logging.WARNING, logging.INFO, logging.DEBUG][min(args.verbose, 2)]
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
