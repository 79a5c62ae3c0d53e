"""Running the four solver variants on instances and collecting CSV rows."""
from __future__ import annotations

import csv
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, fields
from pathlib import Path

from .aiger import AigerError, CircuitSpec, read_spec
from .bdd import NodeLimitExceeded, Timeout
from .cegar import abs_synth
from .game import SolveResult, Status, encode, solve_classic

log = logging.getLogger(__name__)

ALGOS = ("C", "C-TL", "A", "A-TL")
ALGO_ALIASES = {"c": "C", "ctl": "C-TL", "a": "A", "atl": "A-TL"}
ERROR = "ERROR"  # row status for instances that could not be run at all


def canonical_algo(name: str) -> str:
    algo = ALGO_ALIASES.get(name.lower(), name.upper())
    if algo not in ALGOS:
        raise ValueError(f"unknown algorithm {name!r}; expected one of {', '.join(ALGOS)}")
    return algo


@dataclass
class RunRecord:
    instance: str
    algo: str
    status: str
    time_ms: float
    iterations: int = 0
    rounds: int = 0
    peak_nodes: int = 0
    gates: int | None = None


CSV_FIELDS = [f.name for f in fields(RunRecord)]


def run_solver(spec: CircuitSpec, algo: str, *, timeout: float | None = None,
               node_limit: int | None = None):
    """Encode and solve; returns (game, SolveResult).  The deadline covers encoding too."""
    algo = canonical_algo(algo)
    start = time.monotonic()
    try:
        g = encode(spec, node_limit=node_limit)
    except NodeLimitExceeded:
        return None, SolveResult(Status.NODE_LIMIT)
    remaining = None if timeout is None else max(timeout - (time.monotonic() - start), 0.0)
    if algo in ("C", "C-TL"):
        res = solve_classic(g, algo, timeout=remaining)
    else:
        res = abs_synth(g, algo, timeout=remaining)
    return g, res


def run_one(spec: CircuitSpec, name: str, algo: str, *, timeout: float | None = None,
            node_limit: int | None = None, synth: bool = False) -> RunRecord:
    from .strategy import synthesize

    algo = canonical_algo(algo)
    t0 = time.perf_counter()
    g, res = run_solver(spec, algo, timeout=timeout, node_limit=node_limit)
    gates = None
    if synth and res.status is Status.REALIZABLE:
        try:
            gates = synthesize(g, res.losing).gate_count
        except (Timeout, NodeLimitExceeded):
            pass
    elapsed = (time.perf_counter() - t0) * 1000.0
    return RunRecord(instance=name, algo=algo, status=res.status.value, time_ms=round(elapsed, 3),
                     iterations=res.iterations, rounds=res.rounds,
                     peak_nodes=g.manager.num_nodes if g else 0, gates=gates)


def _run_file(path: str, algos: list[str], timeout: float | None, node_limit: int | None,
              synth: bool) -> list[RunRecord]:
    name = Path(path).stem
    try:
        spec = read_spec(path)
    except (AigerError, OSError) as exc:
        log.warning("%s: %s", path, exc)
        return [RunRecord(name, a, ERROR, 0.0) for a in algos]
    rows = []
    for a in algos:
        try:
            rows.append(run_one(spec, name, a, timeout=timeout, node_limit=node_limit, synth=synth))
        except Exception as exc:  # one broken run must not sink the batch
            log.exception("%s with %s failed: %s", name, a, exc)
            rows.append(RunRecord(name, a, ERROR, 0.0))
    return rows


def run_batch(paths: list[str], algos: list[str], *, timeout: float | None = None,
              node_limit: int | None = None, jobs: int = 1, synth: bool = False) -> list[RunRecord]:
    algos = [canonical_algo(a) for a in algos]
    paths = sorted(str(p) for p in paths)
    if jobs <= 1:
        batches = [_run_file(p, algos, timeout, node_limit, synth) for p in paths]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futs = [pool.submit(_run_file, p, algos, timeout, node_limit, synth) for p in paths]
            batches = [f.result() for f in futs]
    return [r for batch in batches for r in batch]


def write_csv(records: list[RunRecord], fh) -> None:
    w = csv.DictWriter(fh, fieldnames=CSV_FIELDS, lineterminator="\n")
    w.writeheader()
    for r in records:
        row = asdict(r)
        if row["gates"] is None:
            row["gates"] = ""
        w.writerow(row)


def status_conflicts(records: list[RunRecord]) -> dict[str, set[str]]:
    """Instances on which two completed runs disagree."""
    seen: dict[str, set[str]] = {}
    for r in records:
        if r.status in (Status.REALIZABLE.value, Status.UNREALIZABLE.value):
            seen.setdefault(r.instance, set()).add(r.status)
    return {k: v for k, v in seen.items() if len(v) > 1}
