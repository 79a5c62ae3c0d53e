"""Abstraction-refinement solver for safety games.

Each round solves the abstract game twice: an under-approximation of Adam's
attractor (enough to prove the game lost) and an over-approximation (enough
to prove it won).  When neither decides, Adam's most permissive abstract
strategy restricts the abstract reachable states, one concrete guided
predecessor step is taken, and the abstraction is refined by making one more
latch visible and re-pointing the unsafe and reach predicates.
"""
from __future__ import annotations

import logging
import time
from collections.abc import Callable
from dataclasses import dataclass, field

from .absgame import (AbstractGame, PredicateSet, QuasiStrategy, restricted_lfp,
                      upre_concrete_guided)
from .bdd import BDD, NodeLimitExceeded, Timeout
from .game import SolveResult, Status, SymbolicGame, build_transition_relation

log = logging.getLogger(__name__)

VARIANTS = ("A", "A-TL")


class NoLatchAvailable(RuntimeError):
    """Refinement was asked for a new latch but every latch is already visible."""


@dataclass
class CegarState:
    abstraction: AbstractGame
    W_u: BDD | None = None
    W_o: BDD | None = None
    quasi: QuasiStrategy | None = None
    round: int = 0
    stats: list[dict] = field(default_factory=list)

    @property
    def R_abs(self) -> BDD:
        return self.abstraction.R_abs


# called as check(stage, state); stage is "round", "W_u", "W_o" or "R"
CheckHook = Callable[[str, CegarState], None]


def _latch_order(g: SymbolicGame, k: int) -> tuple[bool, int]:
    lit = g.latch_lits[k]
    return (lit is None, lit if lit is not None else k)


def refine(g: SymbolicGame, preds: PredicateSet, U_new: BDD, R_new: BDD) -> PredicateSet:
    """Make one more latch visible and reset the unsafe and reach predicates."""
    visible = set(preds.visible)
    hidden = sorted((k for k in range(g.num_latches) if k not in visible),
                    key=lambda k: _latch_order(g, k))
    if not hidden:
        raise NoLatchAvailable("every latch is already visible")
    interesting = []
    for k in hidden:
        lv = g.latch_var(k)
        if not lv <= U_new and not ~lv <= U_new:
            interesting.append(k)
    visible_levels = {g.blocks.latch[k] for k in visible}
    useful = [k for k in interesting if g.latch_fn[k].support() & visible_levels]
    if useful:
        chosen = useful[0]
    elif interesting:
        chosen = interesting[0]
    else:
        chosen = hidden[0]
    log.debug("refine: making latch %s visible", g.latch_names[chosen])
    defs: dict[str | int, BDD] = {k: g.latch_var(k) for k in sorted(visible | {chosen})}
    defs.update({"I": g.init, "U": U_new, "R": R_new})
    return PredicateSet.build(g, defs)


def abs_synth(g: SymbolicGame, variant: str = "A-TL", *, timeout: float | None = None,
              check: CheckHook | None = None) -> SolveResult:
    """Decide realizability by abstraction refinement.

    On REALIZABLE the result's ``losing`` is the concretized under-approximate
    attractor of the last round, a set of states Eve must avoid.
    """
    if variant not in VARIANTS:
        raise ValueError(f"unknown abstract variant {variant!r}")
    partitioned = variant == "A-TL"
    m = g.manager
    if timeout is not None:
        m.deadline = time.monotonic() + timeout
    trace: list[dict] = []
    state = None
    try:
        if not partitioned:
            build_transition_relation(g)
        state = CegarState(AbstractGame(g, PredicateSet.initial(g)), stats=trace)
        iterations = 0
        while True:
            a = state.abstraction
            if partitioned:
                upre_under, upre_over, post = a.upre_under_part, a.upre_over_part, a.post_over_part
            else:
                a.build_abstract_T()
                upre_under, upre_over, post = a.upre_under, a.upre_over, a.post_abs
            if check:
                check("round", state)
            entry = {"round": state.round, "preds": len(a.preds)}
            trace.append(entry)

            W_u = restricted_lfp(a.U_abs, upre_under, a.R_abs)
            state.W_u = W_u
            entry["W_u_nodes"] = W_u.dag_size()
            if check:
                check("W_u", state)
            if a.init_abs <= W_u:
                entry["decision"] = "unsafe-under"
                _log_round(entry)
                return SolveResult(Status.UNREALIZABLE, losing=a.gamma(W_u), iterations=iterations,
                                   rounds=state.round, trace=trace)

            prev = None
            while prev is None or a.R_abs != prev:
                prev = a.R_abs
                iterations += 1
                W_o = restricted_lfp(W_u, upre_over, a.R_abs)
                state.W_o = W_o
                entry["W_o_nodes"] = W_o.dag_size()
                if check:
                    check("W_o", state)
                if not a.init_abs <= W_o:
                    entry["decision"] = "safe-over"
                    _log_round(entry)
                    return SolveResult(Status.REALIZABLE, losing=a.gamma(W_u), iterations=iterations,
                                       rounds=state.round, trace=trace)
                lam = a.adam_quasi_strategy(W_o)
                state.quasi = lam
                a.R_abs = restricted_lfp(a.init_abs, lambda X, lam=lam: post(X, lam), a.R_abs)
                if check:
                    check("R", state)

            gW_u = a.gamma(W_u)
            R_conc = a.gamma(a.R_abs)
            W_next = upre_concrete_guided(g, a.concretize(state.quasi), gW_u, R_conc)
            if W_next <= gW_u:
                entry["decision"] = "safe-guided"
                _log_round(entry)
                return SolveResult(Status.REALIZABLE, losing=gW_u, iterations=iterations,
                                   rounds=state.round, trace=trace)

            entry["decision"] = "refine"
            _log_round(entry)
            U_new = W_next | gW_u
            preds = refine(g, a.preds, U_new, R_conc)
            a2 = AbstractGame(g, preds)
            a2.U_abs = a2.alpha_under(U_new)
            a2.R_abs = a2.alpha_over(R_conc)
            state = CegarState(a2, round=state.round + 1, stats=trace)
    except Timeout:
        return SolveResult(Status.TIMEOUT, rounds=state.round if state else 0, trace=trace)
    except NodeLimitExceeded:
        return SolveResult(Status.NODE_LIMIT, rounds=state.round if state else 0, trace=trace)
    finally:
        m.deadline = None


def _log_round(entry: dict) -> None:
    log.info("round %(round)d: |P|=%(preds)d W_u=%(W_u_nodes)d nodes W_o=%(W_o_nodes)s nodes -> %(decision)s",
             {"W_o_nodes": "-", **entry})
