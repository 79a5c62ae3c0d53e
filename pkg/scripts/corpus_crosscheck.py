"""Solve a seeded random corpus with every algorithm and compare against the explicit oracle."""
import argparse
import collections
import logging
import sys
import time

from safetysynth.aiger import split_inputs
from safetysynth.bench import ALGOS, run_solver
from safetysynth.families import random_corpus
from safetysynth.oracle import explicit_game, explicit_solve

log = logging.getLogger("corpus_crosscheck")


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, default=20240611)
    ap.add_argument("--count", type=int, default=500)
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.WARNING, format="%(message)s")
    log.setLevel(logging.INFO)

    mismatches = 0
    rounds = collections.Counter()
    verdicts = collections.Counter()
    spent = collections.Counter()
    for name, aig in random_corpus(args.seed, args.count):
        spec = split_inputs(aig)
        want = "REALIZABLE" if explicit_solve(explicit_game(spec)).winner == "eve" else "UNREALIZABLE"
        verdicts[want] += 1
        for algo in ALGOS:
            t0 = time.perf_counter()
            _, res = run_solver(spec, algo)
            spent[algo] += time.perf_counter() - t0
            if algo.startswith("A"):
                rounds[res.rounds] += 1
            if res.status.value != want:
                mismatches += 1
                log.error("%s %s: got %s, oracle says %s", name, algo, res.status.value, want)
    log.info("games: %d (%s)", args.count, dict(verdicts))
    log.info("time per algorithm (s): %s", {a: round(t, 2) for a, t in spent.items()})
    log.info("refinement rounds histogram: %s", dict(sorted(rounds.items())))
    log.info("mismatches: %d", mismatches)
    return 1 if mismatches else 0


if __name__ == "__main__":
    sys.exit(main())
