"""Symbolic and abstraction-based synthesis of safety controllers for AIGER circuits."""

from .aiger import CircuitSpec, parse_aag, read_spec, split_inputs, write_aag
from .game import SolveResult, Status, encode, solve_classic

__all__ = ["CircuitSpec", "SolveResult", "Status", "encode", "parse_aag", "read_spec",
           "solve", "solve_classic", "split_inputs", "write_aag"]


def solve(spec: CircuitSpec, algo: str = "C-TL", *, timeout: float | None = None,
          node_limit: int | None = None) -> SolveResult:
    """Solve with one of the variants C, C-TL, A, A-TL (c/ctl/a/atl also accepted)."""
    from .bench import run_solver

    return run_solver(spec, algo, timeout=timeout, node_limit=node_limit)[1]
