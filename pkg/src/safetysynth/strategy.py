"""Controller extraction: winning region, determinization, lowering to gates, checking.

The controller is a function g_x(L, X_u) per controllable input.  It is
extracted one input at a time from Eve's most permissive strategy, using
restrict to pick a small BDD that agrees with the strategy on the states
where the choice matters.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

from .absgame import QuasiStrategy
from .aiger import CircuitSpec, GateNetwork
from .bdd import BDD
from .game import SymbolicGame, cpre_fix, encode, substitute_next

log = logging.getLogger(__name__)


class InitNotWinning(RuntimeError):
    """The initial state fell outside the computed winning region."""


class EmptyChoice(RuntimeError):
    """Some state and uncontrollable input were left without any allowed controllable input."""


class StrategyInvariantError(AssertionError):
    pass


@dataclass
class Controller:
    game: SymbolicGame
    # controllable level -> g_x over (L, X_u), in extraction order
    functions: dict[int, BDD]
    care: BDD
    networks: dict[int, GateNetwork] = field(default_factory=dict)  # keyed by AIGER literal

    @property
    def order(self) -> list[int]:
        return list(self.functions)

    def lower(self) -> dict[int, GateNetwork]:
        if not self.networks:
            g = self.game
            self.networks = {g.input_lits[x]: bdd_to_gates(g, f) for x, f in self.functions.items()}
        return self.networks

    @property
    def gate_count(self) -> int:
        return sum(net.gate_count for net in self.lower().values())

    def as_aiger(self) -> list[tuple[int, GateNetwork]]:
        return sorted(self.lower().items())

    def substitution(self) -> dict[int, BDD]:
        return dict(self.functions)


def winning_region(g: SymbolicGame, losing: BDD) -> BDD:
    """Greatest cpre-closed subset of the states outside ``losing`` and the unsafe set.

    ``losing`` may under-approximate Adam's attractor; the unsafe set is
    removed explicitly because an abstract under-approximation need not cover
    unreachable unsafe states.
    """
    region = cpre_fix(g, ~(losing | g.error))
    if not g.init <= region:
        raise InitNotWinning("initial state is not in the winning region")
    return region


def eve_quasi_strategy(g: SymbolicGame, region: BDD) -> QuasiStrategy:
    """Moves that keep a region state inside the region; anything goes outside it."""
    return QuasiStrategy(~region | substitute_next(g, region), player="eve")


def _check_invariants(g: SymbolicGame, lam0: BDD, lam: BDD, R: BDD, done: list[int]) -> None:
    m = g.manager
    if not (R & lam) <= lam0:
        raise StrategyInvariantError("determinized choices left the original quasi-strategy")
    if not lam.exists(g.xc).is_true:
        raise EmptyChoice("some (state, uncontrollable input) pair has no controllable choice")
    for x in done:
        xv = m.var(x)
        both = (lam & xv).exists(g.xc) & (lam & ~xv).exists(g.xc)
        if not both.is_false:
            raise StrategyInvariantError(f"strategy is not functional in {m.var_names[x]}")


def det_strat(g: SymbolicGame, quasi: QuasiStrategy, R: BDD, *, use_negative: bool = False,
              check_invariants: bool = True) -> Controller:
    """Fix one controllable input at a time, in declaration order."""
    if quasi.player != "eve" or quasi.abstract:
        raise ValueError("expected Eve's concrete quasi-strategy")
    if g.err_synthesized and not (R & g.error).is_false:
        raise ValueError("care set meets the unsafe states")
    m = g.manager
    lam0 = lam = quasi.relation
    err_level = g.blocks.latch[g.err_index]
    functions: dict[int, BDD] = {}
    done: list[int] = []
    for x in g.blocks.controllable:
        f = lam.exists(g.xc - {x})
        f_pos = f.cofactor({x: True})
        f_neg = f.cofactor({x: False})
        care = R & (~f_pos | ~f_neg)
        gx = (~f_neg).restrict(care) if use_negative else f_pos.restrict(care)
        if g.err_synthesized:
            # the synthesized error latch has no circuit literal; care lies where it is 0
            gx = gx.cofactor({err_level: False})
        functions[x] = gx
        lam = lam & m.var(x).iff(gx)
        done.append(x)
        if check_invariants:
            _check_invariants(g, lam0, lam, R, done)
    return Controller(game=g, functions=functions, care=R)


def closed_loop_functions(g: SymbolicGame, functions: dict[int, BDD]) -> list[BDD]:
    return [f.compose(functions) for f in g.latch_fn]


def forward_reachable(g: SymbolicGame, next_fns: list[BDD], *, layers: bool = False):
    """States reachable from init when latch k moves to next_fns[k] (no controllable inputs left)."""
    m = g.manager
    rel = m.conj(m.var(lp).iff(f) for lp, f in zip(g.blocks.latch_next, next_fns))
    reached = g.init
    frontier = g.init
    onion = [g.init]
    while not frontier.is_false:
        m.check_deadline()
        img = frontier.and_exists(rel, g.L | g.xu).compose(g.unprime)
        frontier = img & ~reached
        reached = reached | frontier
        if not frontier.is_false:
            onion.append(frontier)
    return onion if layers else reached


def rerun_with_reachable(g: SymbolicGame, ctrl: Controller, region: BDD, **kw) -> Controller:
    """Determinize again with only the states the first controller actually reaches as care set.

    The new strategy must keep play inside that reachable set, not just
    inside the region: otherwise it may wander into region states where its
    values were left as don't-cares.  The first controller keeps the set
    closed, so every state in it still has an allowed choice.
    """
    reach = forward_reachable(g, closed_loop_functions(g, ctrl.functions))
    if not reach <= region:
        raise StrategyInvariantError("first-pass controller leaves the winning region")
    return det_strat(g, eve_quasi_strategy(g, reach), reach, **kw)


def synthesize(g: SymbolicGame, losing: BDD, *, rerun: bool = False, **kw) -> Controller:
    region = winning_region(g, losing)
    ctrl = det_strat(g, eve_quasi_strategy(g, region), region, **kw)
    if rerun:
        first = ctrl.gate_count
        ctrl = rerun_with_reachable(g, ctrl, region, **kw)
        log.info("re-run with reachable states: %d -> %d gates", first, ctrl.gate_count)
    return ctrl


def bdd_to_gates(g: SymbolicGame, f: BDD) -> GateNetwork:
    """Shannon expansion along the variable order, one multiplexer per node, hashed."""
    m = g.manager
    lit_of_level = {lv: lit for lv, lit in g.input_lits.items() if lv in g.xu}
    for lv, lit in zip(g.blocks.latch, g.latch_lits):
        if lit is not None:
            lit_of_level[lv] = lit
    support = sorted(f.support())
    missing = [m.var_names[lv] for lv in support if lv not in lit_of_level]
    if missing:
        raise ValueError(f"function reads variables without a circuit signal: {missing}")
    leaves = [lit_of_level[lv] for lv in support]
    leaf_lit = {lv: 2 * (k + 1) for k, lv in enumerate(support)}
    ands: list[tuple[int, int]] = []
    strash: dict[tuple[int, int], int] = {}
    base = len(leaves) + 1

    def AND(a: int, b: int) -> int:
        if a == 0 or b == 0 or a == b ^ 1:
            return 0
        if a == 1 or a == b:
            return b
        if b == 1:
            return a
        if a < b:
            a, b = b, a
        key = (a, b)
        if key not in strash:
            strash[key] = 2 * (base + len(ands))
            ands.append(key)
        return strash[key]

    memo: dict[BDD, int] = {m.false: 0, m.true: 1}

    def lower(h: BDD) -> int:
        if h in memo:
            return memo[h]
        lv, lo, hi = m.node_info(h)
        v, L, H = leaf_lit[lv], lower(lo), lower(hi)
        out = AND(AND(v, H) ^ 1, AND(v ^ 1, L) ^ 1) ^ 1
        memo[h] = out
        return out

    return GateNetwork(leaves=leaves, ands=ands, output=lower(f))


@dataclass
class Verdict:
    safe: bool
    # on failure: one dict per step with the state and the uncontrollable inputs applied
    trace: list[dict] | None = None

    def __len__(self) -> int:
        return len(self.trace or [])


def _network_bdd(g: SymbolicGame, net: GateNetwork) -> BDD:
    m = g.manager
    level_of_lit = {lit: lv for lv, lit in g.input_lits.items()}
    for lv, lit in zip(g.blocks.latch, g.latch_lits):
        if lit is not None:
            level_of_lit[lit] = lv
    vals = [m.false] + [m.var(level_of_lit[x]) for x in net.leaves]

    def lit(x: int) -> BDD:
        return ~vals[x >> 1] if x & 1 else vals[x >> 1]

    for r0, r1 in net.ands:
        vals.append(lit(r0) & lit(r1))
    return lit(net.output)


def verify_controller(spec: CircuitSpec, networks: dict[int, GateNetwork] | Controller) -> Verdict:
    """Close the circuit with the given networks and search for a reachable error state."""
    if isinstance(networks, Controller):
        networks = networks.lower()
    g = encode(spec)
    m = g.manager
    by_level = {lv: lit for lv, lit in g.input_lits.items()}
    missing = [lit for lv, lit in by_level.items() if lv in g.xc and lit not in networks]
    if missing:
        raise ValueError(f"no network for controllable inputs {missing}")
    sub = {lv: _network_bdd(g, networks[lit]) for lv, lit in by_level.items() if lv in g.xc}
    fns = closed_loop_functions(g, sub)
    onion = forward_reachable(g, fns, layers=True)
    hit = next((k for k, layer in enumerate(onion) if not (layer & g.error).is_false), None)
    if hit is None:
        return Verdict(safe=True)
    # walk back through the layers to recover one concrete path
    names = dict(zip(g.blocks.latch, g.latch_names))
    in_names = {lv: spec.name(lit) for lv, lit in g.input_lits.items() if lv in g.xu}
    cur = m.cube((onion[hit] & g.error).pick(g.blocks.latch))
    steps = []
    for k in range(hit - 1, -1, -1):
        pred = onion[k] & _maps_into(g, fns, cur)
        choice = pred.pick(sorted(g.L | g.xu))
        state = {names[lv]: choice[lv] for lv in g.blocks.latch}
        steps.append({"state": state, "inputs": {in_names[lv]: choice[lv] for lv in g.blocks.uncontrollable}})
        cur = m.cube({lv: choice[lv] for lv in g.blocks.latch})
    steps.reverse()
    return Verdict(safe=False, trace=steps)


def _maps_into(g: SymbolicGame, fns: list[BDD], cube: BDD) -> BDD:
    """(L, X_u) pairs whose successor is the single state ``cube``."""
    m = g.manager
    model = cube.pick(g.blocks.latch)
    return m.conj(f if model[lv] else ~f for f, lv in zip(fns, g.blocks.latch))
