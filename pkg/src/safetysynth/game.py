"""Symbolic safety games built from circuit specifications.

States are latch valuations, Adam picks the uncontrollable inputs, Eve
answers with the controllable ones.  The unsafe set is always a single
latching error latch: either the circuit already provides one (its bad
output is a latch that stays true once set) or one is synthesized with next
state ``err | bad``.
"""
from __future__ import annotations

import enum
import logging
import time
from dataclasses import dataclass, field

from .aiger import CircuitSpec
from .bdd import BDD, Manager, NodeLimitExceeded, ResourceExhausted, Timeout

log = logging.getLogger(__name__)

ERR_LATCH_NAME = "__err__"


class MissingTransitionRelation(RuntimeError):
    pass


class Status(enum.Enum):
    REALIZABLE = "REALIZABLE"
    UNREALIZABLE = "UNREALIZABLE"
    TIMEOUT = "TIMEOUT"
    NODE_LIMIT = "NODE_LIMIT"

    @property
    def decided(self) -> bool:
        return self in (Status.REALIZABLE, Status.UNREALIZABLE)


@dataclass
class SolveResult:
    status: Status
    # classic: the losing-set iterate; abstract: concretized W_u (under-approx of losing)
    losing: BDD | None = None
    iterations: int = 0
    rounds: int = 0
    partial: bool = False
    trace: list[dict] = field(default_factory=list)


@dataclass
class VarBlock:
    """Variable levels grouped by role.

    ``pred`` maps a predicate slot to its (now, next) pair: slots ``"I"``,
    ``"U"``, ``"R"`` for the initial/unsafe/reach predicates and the latch
    index for localization predicates.
    """

    uncontrollable: list[int]
    controllable: list[int]
    latch: list[int]
    latch_next: list[int]
    pred: dict[str | int, tuple[int, int]]


@dataclass
class SymbolicGame:
    manager: Manager
    spec: CircuitSpec
    blocks: VarBlock
    latch_names: list[str]
    latch_fn: list[BDD]
    error: BDD
    init: BDD
    err_index: int
    err_synthesized: bool
    # game latch index -> AIGER literal (None for a synthesized error latch)
    latch_lits: list[int | None]
    input_lits: dict[int, int]
    T: BDD | None = None

    def __post_init__(self):
        b = self.blocks
        self.xu = frozenset(b.uncontrollable)
        self.xc = frozenset(b.controllable)
        self.L = frozenset(b.latch)
        self.Lp = frozenset(b.latch_next)
        self.next_subst = {l: f for l, f in zip(b.latch, self.latch_fn)}
        m = self.manager
        self.prime = {l: m.var(lp) for l, lp in zip(b.latch, b.latch_next)}
        self.unprime = {lp: m.var(l) for l, lp in zip(b.latch, b.latch_next)}

    @property
    def num_latches(self) -> int:
        return len(self.blocks.latch)

    def latch_var(self, i: int) -> BDD:
        return self.manager.var(self.blocks.latch[i])

    @property
    def true(self) -> BDD:
        return self.manager.true

    @property
    def false(self) -> BDD:
        return self.manager.false


def _is_latching(var: BDD, fn: BDD) -> bool:
    return var <= fn


def encode(spec: CircuitSpec, *, monolithic: bool = False, node_limit: int | None = None) -> SymbolicGame:
    m = Manager(node_limit=node_limit)
    aig = spec.aig
    names = spec.name_table
    input_lits: dict[int, int] = {}
    var_of: dict[int, BDD] = {}  # AIG variable -> BDD
    xu, xc = [], []
    for block, tag, lits in ((xu, "u", spec.uncontrollable), (xc, "c", spec.controllable)):
        for lit in lits:
            name = f"{tag}:{names[lit]}#{lit}"
            (var_of[lit >> 1],) = m.declare(name)
            block.append(m.level(name))
            input_lits[block[-1]] = lit
    pred: dict[str | int, tuple[int, int]] = {}
    for slot in ("I", "U", "R"):
        m.declare(f"p{slot}", f"p{slot}'")
        pred[slot] = (m.level(f"p{slot}"), m.level(f"p{slot}'"))

    # decide up front whether the bad output is already a latching latch
    latch_index = {lit >> 1: k for k, (lit, _) in enumerate(spec.latches)}
    n_file = len(spec.latches)
    latch_names = [names[lit] for lit, _ in spec.latches]
    latch_lits: list[int | None] = [lit for lit, _ in spec.latches]
    latches, latches_next = [], []
    for k in range(n_file + 1):
        name = latch_names[k] if k < n_file else ERR_LATCH_NAME
        m.declare(f"p{k}:{name}", f"p{k}:{name}'", f"l:{name}#{k}", f"l:{name}#{k}'")
        pred[k] = (m.level(f"p{k}:{name}"), m.level(f"p{k}:{name}'"))
        latches.append(m.level(f"l:{name}#{k}"))
        latches_next.append(m.level(f"l:{name}#{k}'"))
        if k < n_file:
            var_of[spec.latches[k][0] >> 1] = m.var(latches[-1])

    memo: dict[int, BDD] = {0: m.false}
    gates = {lhs >> 1: (r0, r1) for lhs, r0, r1 in aig.ands}

    def lit_bdd(lit: int) -> BDD:
        v = lit >> 1
        f = memo.get(v)
        if f is None:
            if v in var_of:
                f = var_of[v]
            else:
                r0, r1 = gates[v]
                f = lit_bdd(r0) & lit_bdd(r1)
            memo[v] = f
        return ~f if lit & 1 else f

    # gates are topologically numbered, so building in file order keeps recursion shallow
    for lhs, _, _ in sorted(aig.ands):
        lit_bdd(lhs)
    fns = [lit_bdd(nxt) for _, nxt in spec.latches]
    bad = lit_bdd(spec.bad)

    err_synth = True
    err_index = n_file
    if not spec.bad & 1 and (spec.bad >> 1) in latch_index:
        k = latch_index[spec.bad >> 1]
        if _is_latching(m.var(latches[k]), fns[k]):
            err_synth = False
            err_index = k
    if err_synth:
        log.info("bad output is not a latching latch; adding error latch %s", ERR_LATCH_NAME)
        err = m.var(latches[n_file])
        fns.append(err | bad)
        latch_names.append(ERR_LATCH_NAME)
        latch_lits.append(None)
    else:
        # the spare slot is unused: drop it from the blocks
        del pred[n_file]
        latches.pop()
        latches_next.pop()

    blocks = VarBlock(uncontrollable=xu, controllable=xc, latch=latches,
                      latch_next=latches_next, pred=pred)
    init = m.conj(~m.var(l) for l in latches)
    game = SymbolicGame(manager=m, spec=spec, blocks=blocks, latch_names=latch_names,
                        latch_fn=fns, error=m.var(latches[err_index]), init=init,
                        err_index=err_index, err_synthesized=err_synth,
                        latch_lits=latch_lits, input_lits=input_lits)
    if monolithic:
        build_transition_relation(game)
    return game


def build_transition_relation(g: SymbolicGame) -> BDD:
    """Monolithic T(L, X_u, X_c, L') = AND over latches of l' <-> f_l."""
    if g.T is None:
        m = g.manager
        g.T = m.conj(m.var(lp).iff(f) for lp, f in zip(g.blocks.latch_next, g.latch_fn))
    return g.T


def to_next(g: SymbolicGame, S: BDD) -> BDD:
    return S.compose(g.prime)


def from_next(g: SymbolicGame, S: BDD) -> BDD:
    return S.compose(g.unprime)


def upre_mono(g: SymbolicGame, S: BDD) -> BDD:
    if g.T is None:
        raise MissingTransitionRelation("variant C needs the monolithic transition relation")
    step = g.T.and_exists(to_next(g, S), g.Lp)
    return step.forall(g.xc).exists(g.xu)


def substitute_next(g: SymbolicGame, S: BDD) -> BDD:
    """S(L') with every l' replaced by f_l, i.e. S evaluated at the successor state."""
    return S.compose(g.next_subst)


def upre_subst(g: SymbolicGame, S: BDD) -> BDD:
    return substitute_next(g, S).forall(g.xc).exists(g.xu)


def cpre(g: SymbolicGame, S: BDD) -> BDD:
    return substitute_next(g, S).exists(g.xc).forall(g.xu)


def cpre_fix(g: SymbolicGame, S: BDD) -> BDD:
    """Greatest fixpoint of Y -> S & cpre(Y)."""
    Y = S
    while True:
        g.manager.check_deadline()
        nxt = S & cpre(g, Y)
        if nxt == Y:
            return Y
        Y = nxt


def upre_operator(g: SymbolicGame, variant: str):
    if variant == "C":
        build_transition_relation(g)
        return lambda S: upre_mono(g, S)
    if variant == "C-TL":
        return lambda S: upre_subst(g, S)
    raise ValueError(f"unknown classic variant {variant!r}")


def solve_classic(g: SymbolicGame, variant: str = "C-TL", *, early_stop: bool = True,
                  timeout: float | None = None) -> SolveResult:
    """Least fixpoint of X -> U | upre(X), starting from the empty set."""
    m = g.manager
    if timeout is not None:
        m.deadline = time.monotonic() + timeout
    iterations = 0
    try:
        upre = upre_operator(g, variant)
        X = g.false
        while True:
            m.check_deadline()
            nxt = g.error | upre(X)
            iterations += 1
            if nxt == X:
                status = Status.UNREALIZABLE if g.init <= X else Status.REALIZABLE
                return SolveResult(status, losing=X, iterations=iterations)
            X = nxt
            if early_stop and g.init <= X:
                return SolveResult(Status.UNREALIZABLE, losing=X, iterations=iterations, partial=True)
    except Timeout:
        return SolveResult(Status.TIMEOUT, iterations=iterations)
    except NodeLimitExceeded:
        return SolveResult(Status.NODE_LIMIT, iterations=iterations)
    finally:
        m.deadline = None


def losing_set(g: SymbolicGame) -> BDD:
    """The full attractor of the unsafe set, without early termination."""
    result = solve_classic(g, "C-TL", early_stop=False)
    return result.losing


__all__ = [
    "MissingTransitionRelation", "ResourceExhausted", "SolveResult", "Status", "SymbolicGame",
    "VarBlock", "build_transition_relation", "cpre", "cpre_fix", "encode", "losing_set",
    "solve_classic", "substitute_next", "upre_mono", "upre_subst",
]
