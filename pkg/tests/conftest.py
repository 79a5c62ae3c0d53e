import random
from dataclasses import dataclass
from functools import lru_cache

import pytest

from safetysynth.aiger import AigFile, CircuitSpec, parse_aag, split_inputs
from safetysynth.bdd import BDD, Manager
from safetysynth.families import random_corpus
from safetysynth.oracle import ExplicitGame, OracleResult, explicit_game, explicit_solve

# e' = e | (u & !c), bad = e: Eve keeps c high whenever u is high
E1_AAG = """aag 5 2 1 1 2
2
4
6 11
6
8 2 5
10 7 9
i0 u
i1 controllable_c
l0 e
o0 e
"""

# e' = e | u: Adam wins in one step whatever Eve does
E2_AAG = """aag 4 2 1 1 1
2
4
6 9
6
8 7 3
i0 u
i1 controllable_c
l0 e
o0 e
"""

CORPUS_SEED = 20240611
CORPUS_SIZE = 500


@dataclass
class Instance:
    name: str
    aig: AigFile
    spec: CircuitSpec
    eg: ExplicitGame
    oracle: OracleResult

    @property
    def realizable(self) -> bool:
        return self.oracle.winner == "eve"


@lru_cache(maxsize=None)
def corpus(seed: int = CORPUS_SEED, size: int = CORPUS_SIZE) -> tuple[Instance, ...]:
    out = []
    for name, aig in random_corpus(seed, size):
        spec = split_inputs(aig)
        eg = explicit_game(spec)
        out.append(Instance(name, aig, spec, eg, explicit_solve(eg)))
    return tuple(out)


@pytest.fixture
def e1() -> CircuitSpec:
    return split_inputs(parse_aag(E1_AAG))


@pytest.fixture
def e2() -> CircuitSpec:
    return split_inputs(parse_aag(E2_AAG))


@pytest.fixture(scope="session")
def small_corpus() -> tuple[Instance, ...]:
    """First 150 games of the acceptance corpus, for the quicker property tests."""
    return corpus()[:150]


@pytest.fixture(scope="session")
def full_corpus() -> tuple[Instance, ...]:
    return corpus()


def bdd_from_table(m: Manager, levels: list[int], table: int) -> BDD:
    """BDD whose value on assignment a (bit k = levels[k]) is bit a of ``table``."""
    n = len(levels)

    def build_idx(i: int, idx: int) -> BDD:
        if i == n:
            return m.true if table >> idx & 1 else m.false
        return m.ite(m.var(levels[i]), build_idx(i + 1, idx | (1 << i)), build_idx(i + 1, idx))

    return build_idx(0, 0)


def random_bdd(m: Manager, levels: list[int], rng: random.Random, density: float = 0.5) -> BDD:
    n = len(levels)
    table = 0
    for a in range(1 << n):
        if rng.random() < density:
            table |= 1 << a
    return bdd_from_table(m, levels, table)


# -- acceptance reporting ------------------------------------------------------

ACCEPTANCE_LINES: dict[int, str] = {}


@pytest.fixture
def report(request):
    """Call ``report(n, title, ok, detail)``; the line shows up in the terminal summary."""

    def record(n: int, title: str, ok: bool, detail: str = "") -> None:
        line = f"[{n}] {'PASS' if ok else 'FAIL'} {title}" + (f": {detail}" if detail else "")
        ACCEPTANCE_LINES[n] = line
        print(line)

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[n])
