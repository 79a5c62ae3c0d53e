"""Time every solver on the counter family and write a CSV."""
import argparse
import csv
import logging
import sys
import time

from safetysynth.aiger import split_inputs
from safetysynth.bench import ALGOS, run_solver
from safetysynth.families import gen_cnt

log = logging.getLogger("cnt_scaling")


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--max-n", type=int, default=14)
    ap.add_argument("--timeout", type=float, default=120.0)
    ap.add_argument("--out", default="results/cnt_timings.csv")
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.WARNING, format="%(message)s")
    log.setLevel(logging.INFO)

    rows = []
    for n in range(1, args.max_n + 1):
        spec = split_inputs(gen_cnt(n))
        for algo in ALGOS:
            t0 = time.perf_counter()
            _, res = run_solver(spec, algo, timeout=args.timeout)
            ms = (time.perf_counter() - t0) * 1000
            rows.append({"n": n, "algo": algo, "status": res.status.value, "time_ms": round(ms, 3)})
            log.info("cnt(%d) %-5s %-13s %9.2f ms", n, algo, res.status.value, ms)
    with open(args.out, "w", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, fieldnames=["n", "algo", "status", "time_ms"], lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
    return 0


if __name__ == "__main__":
    sys.exit(main())
