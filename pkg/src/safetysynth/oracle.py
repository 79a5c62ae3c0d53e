"""Explicit-state reference solver for small circuits.

Everything here works on integers: a state is a bit vector over the latches
(bit ``k`` is latch ``k`` in file order, with a synthesized error latch as the
last bit), and actions are bit vectors over the uncontrollable and
controllable inputs.  The circuit is simulated gate by gate, never through
BDDs, so this module is an independent check on the symbolic code.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product

from .aiger import CircuitSpec

MAX_LATCHES = 16


class TooLarge(ValueError):
    pass


@dataclass
class ExplicitGame:
    n_latches: int
    n_u: int
    n_c: int
    succ: list[int]
    unsafe: frozenset[int]
    err_synthesized: bool
    # (state, su, sc) pairs on which the circuit's bad output is true
    bad_on: frozenset[tuple[int, int, int]] = field(default_factory=frozenset)
    init: int = 0

    @property
    def n_states(self) -> int:
        return 1 << self.n_latches

    def delta(self, q: int, su: int, sc: int) -> int:
        return self.succ[(q << (self.n_u + self.n_c)) | (su << self.n_c) | sc]


@dataclass
class OracleResult:
    winner: str  # "eve" or "adam"
    losing: frozenset[int]
    rank: dict[int, int]
    # state -> every su from which all Eve answers stay in the losing set
    forcing_moves: dict[int, list[int]]


def _simulate(spec: CircuitSpec, latch_vals: list[bool], u_vals: list[bool], c_vals: list[bool]):
    val = {0: False}
    for lit, v in zip(spec.uncontrollable, u_vals):
        val[lit >> 1] = v
    for lit, v in zip(spec.controllable, c_vals):
        val[lit >> 1] = v
    for (lit, _), v in zip(spec.latches, latch_vals):
        val[lit >> 1] = v

    def lit_val(x):
        return val[x >> 1] ^ bool(x & 1)

    for lhs, r0, r1 in sorted(spec.aig.ands):
        val[lhs >> 1] = lit_val(r0) and lit_val(r1)
    return [lit_val(nxt) for _, nxt in spec.latches], lit_val(spec.bad)


def _bits(x: int, n: int) -> list[bool]:
    return [bool(x >> i & 1) for i in range(n)]


def explicit_game(spec: CircuitSpec) -> ExplicitGame:
    n_file = len(spec.latches)
    if n_file + 1 > MAX_LATCHES:
        raise TooLarge(f"{n_file} latches exceed the explicit-state limit of {MAX_LATCHES}")
    nu, nc = len(spec.uncontrollable), len(spec.controllable)
    table: dict[tuple[int, int, int], tuple[int, bool]] = {}
    for q, su, sc in product(range(1 << n_file), range(1 << nu), range(1 << nc)):
        nxt, bad = _simulate(spec, _bits(q, n_file), _bits(su, nu), _bits(sc, nc))
        table[q, su, sc] = (sum(b << i for i, b in enumerate(nxt)), bad)

    # reuse the bad latch as error state when it is a plain latch that never resets
    err_bit = None
    latch_pos = {lit >> 1: k for k, (lit, _) in enumerate(spec.latches)}
    if not spec.bad & 1 and spec.bad >> 1 in latch_pos:
        k = latch_pos[spec.bad >> 1]
        if all(nq >> k & 1 for (q, _, _), (nq, _) in table.items() if q >> k & 1):
            err_bit = k
    bad_on = frozenset(key for key, (_, bad) in table.items() if bad)
    if err_bit is not None:
        n = n_file
        succ = [table[q, su, sc][0] for q, su, sc in product(range(1 << n), range(1 << nu), range(1 << nc))]
        unsafe = frozenset(q for q in range(1 << n) if q >> err_bit & 1)
    else:
        n = n_file + 1
        succ = []
        for q, su, sc in product(range(1 << n), range(1 << nu), range(1 << nc)):
            low = q & ((1 << n_file) - 1)
            err = q >> n_file & 1
            nq, bad = table[low, su, sc]
            succ.append(nq | ((err or bad) << n_file))
        unsafe = frozenset(q for q in range(1 << n) if q >> n_file & 1)
    return ExplicitGame(n_latches=n, n_u=nu, n_c=nc, succ=succ, unsafe=unsafe,
                        err_synthesized=err_bit is None, bad_on=bad_on)


def explicit_solve(eg: ExplicitGame) -> OracleResult:
    """Backward induction: rank r states are forced into the unsafe set in r steps."""
    if eg.n_latches > MAX_LATCHES:
        raise TooLarge(f"{eg.n_latches} latches")
    rank = {q: 0 for q in eg.unsafe}
    r = 0
    while True:
        r += 1
        fresh = []
        for q in range(eg.n_states):
            if q in rank:
                continue
            for su in range(1 << eg.n_u):
                if all(eg.delta(q, su, sc) in rank for sc in range(1 << eg.n_c)):
                    fresh.append(q)
                    break
        if not fresh:
            break
        for q in fresh:
            rank[q] = r
    losing = frozenset(rank)
    moves = {
        q: [su for su in range(1 << eg.n_u)
            if all(eg.delta(q, su, sc) in losing for sc in range(1 << eg.n_c))]
        for q in losing
    }
    winner = "adam" if eg.init in losing else "eve"
    return OracleResult(winner=winner, losing=losing, rank=rank, forcing_moves=moves)


def explicit_reach_winning(eg: ExplicitGame, res: OracleResult | None = None) -> frozenset[int]:
    """States on plays where Adam follows a rank-decreasing (hence winning) strategy.

    Before the unsafe set is hit Adam only takes moves that lower the rank
    whatever Eve does; after that every move is allowed.  Empty when Eve wins.
    """
    res = res or explicit_solve(eg)
    if res.winner == "eve":
        return frozenset()
    seen = {eg.init}
    stack = [eg.init]
    while stack:
        q = stack.pop()
        if q in eg.unsafe:
            choices = range(1 << eg.n_u)
        else:
            choices = [su for su in res.forcing_moves[q]
                       if all(res.rank.get(eg.delta(q, su, sc), 1 << 30) < res.rank[q]
                              for sc in range(1 << eg.n_c))]
        for su in choices:
            for sc in range(1 << eg.n_c):
                s = eg.delta(q, su, sc)
                if s not in seen:
                    seen.add(s)
                    stack.append(s)
    return frozenset(seen)


def reachable(eg: ExplicitGame) -> frozenset[int]:
    seen = {eg.init}
    stack = [eg.init]
    while stack:
        q = stack.pop()
        for su in range(1 << eg.n_u):
            for sc in range(1 << eg.n_c):
                s = eg.delta(q, su, sc)
                if s not in seen:
                    seen.add(s)
                    stack.append(s)
    return frozenset(seen)


def closed_circuit_safe(spec: CircuitSpec) -> bool:
    """For a circuit without controllable inputs: is the bad output never raised?"""
    if spec.controllable:
        raise ValueError("circuit still has controllable inputs")
    eg = explicit_game(spec)
    reach = reachable(eg)
    if eg.err_synthesized:
        n_file = eg.n_latches - 1
        return not any((q & ((1 << n_file) - 1), su, 0) in eg.bad_on
                       for q in reach for su in range(1 << eg.n_u))
    return not reach & eg.unsafe


# -- bridging helpers for cross-checks against the symbolic engine -----------

def bdd_states(game, f) -> frozenset[int]:
    """Explicit states (bit k = game latch k) of a BDD over the game's latches."""
    levels = game.blocks.latch
    out = []
    for q in range(1 << len(levels)):
        if f.evaluate({lv: bool(q >> k & 1) for k, lv in enumerate(levels)}):
            out.append(q)
    return frozenset(out)


def states_bdd(game, states) -> object:
    m = game.manager
    levels = game.blocks.latch
    return m.disj(m.cube({lv: bool(q >> k & 1) for k, lv in enumerate(levels)}) for q in states)
