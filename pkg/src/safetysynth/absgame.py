"""Predicate abstractions of a symbolic safety game.

An abstract state is a valuation of the predicate variables ``P``; its
concretization is the set of latch valuations on which every predicate
definition takes the corresponding value.  Localization predicates are
single latches.  All predicate variables live in the game's own manager
(each latch has a reserved predicate pair next to it), so abstraction and
concretization are plain conjunctions and substitutions.
"""
from __future__ import annotations

from collections.abc import Callable
from dataclasses import dataclass

from .bdd import BDD
from .game import MissingTransitionRelation, SymbolicGame, substitute_next, to_next


@dataclass(frozen=True)
class Predicate:
    slot: str | int  # "I", "U", "R", or a latch index
    definition: BDD  # over L
    var: int
    var_next: int

    @property
    def is_latch(self) -> bool:
        return isinstance(self.slot, int)


class PredicateSet:
    def __init__(self, preds: list[Predicate]):
        slots = [p.slot for p in preds]
        if len(set(slots)) != len(slots):
            raise ValueError(f"duplicate predicate slots: {slots}")
        self.preds = list(preds)

    @classmethod
    def build(cls, game: SymbolicGame, definitions: dict[str | int, BDD]) -> PredicateSet:
        preds = []
        for slot, f in definitions.items():
            now, nxt = game.blocks.pred[slot]
            preds.append(Predicate(slot, f, now, nxt))
        return cls(preds)

    @classmethod
    def initial(cls, game: SymbolicGame) -> PredicateSet:
        """The three starting predicates: initial state, unsafe set, everything."""
        return cls.build(game, {"I": game.init, "U": game.error, "R": game.true})

    def __len__(self) -> int:
        return len(self.preds)

    def __iter__(self):
        return iter(self.preds)

    def slot(self, key: str | int) -> Predicate:
        for p in self.preds:
            if p.slot == key:
                return p
        raise KeyError(key)

    @property
    def visible(self) -> list[int]:
        return sorted(p.slot for p in self.preds if p.is_latch)


@dataclass
class QuasiStrategy:
    """Non-deterministic strategy as a relation BDD.

    Adam's form ranges over states and uncontrollable inputs (abstract
    states when ``abstract``); Eve's over latches and both input blocks.
    """

    relation: BDD
    player: str
    abstract: bool = False


def restricted_lfp(base: BDD, op: Callable[[BDD], BDD], within: BDD) -> BDD:
    """Least fixpoint of X -> (base | op(X)) & within, iterated from the empty set."""
    m = base.manager
    X = m.false
    while True:
        m.check_deadline()
        nxt = (base | op(X)) & within
        if nxt == X:
            return X
        X = nxt


class AbstractGame:
    def __init__(self, game: SymbolicGame, preds: PredicateSet):
        self.game = game
        self.preds = preds
        m = game.manager
        self.manager = m
        self.P = frozenset(p.var for p in preds)
        self.Pp = frozenset(p.var_next for p in preds)
        # H(P, L): each predicate variable equals its definition
        self.H = m.conj(m.var(p.var).iff(p.definition) for p in preds)
        self.gamma_subst = {p.var: p.definition for p in preds}
        self.prime = {p.var: m.var(p.var_next) for p in preds}
        self.unprime = {p.var_next: m.var(p.var) for p in preds}
        self._psi: dict[int, BDD] | None = None
        self.T_abs: BDD | None = None
        self.init_abs = self.alpha_over(game.init)
        self.U_abs = self.alpha_under(game.error)
        self.R_abs = m.true

    # -- abstraction and concretization --------------------------------------

    def gamma(self, S_abs: BDD) -> BDD:
        return S_abs.compose(self.gamma_subst)

    def alpha_over(self, S: BDD) -> BDD:
        """Abstract states whose concretization meets S (L is quantified out)."""
        return S.and_exists(self.H, self.game.L)

    def alpha_under(self, S: BDD) -> BDD:
        return ~self.alpha_over(~S)

    @property
    def psi(self) -> dict[int, BDD]:
        """Each predicate evaluated on the successor state: f_p(L')[l' <- f_l]."""
        if self._psi is None:
            self._psi = {p.var: substitute_next(self.game, p.definition) for p in self.preds}
        return self._psi

    # -- monolithic abstract operators --------------------------------------

    def build_abstract_T(self) -> BDD:
        if self.T_abs is None:
            g = self.game
            if g.T is None:
                raise MissingTransitionRelation("abstract T needs the concrete transition relation")
            m = self.manager
            H_next = m.conj(m.var(p.var_next).iff(to_next(g, p.definition)) for p in self.preds)
            self.T_abs = g.T.and_exists(H_next, g.Lp).and_exists(self.H, g.L)
        return self.T_abs

    def _require_T(self) -> BDD:
        if self.T_abs is None:
            raise MissingTransitionRelation("call build_abstract_T first")
        return self.T_abs

    def upre_over(self, S_abs: BDD) -> BDD:
        g = self.game
        step = self._require_T().and_exists(S_abs.compose(self.prime), self.Pp)
        return step.forall(g.xc).exists(g.xu)

    def upre_under(self, S_abs: BDD) -> BDD:
        g = self.game
        escape = self._require_T().and_exists((~S_abs).compose(self.prime), self.Pp)
        return (~escape).forall(g.xc).exists(g.xu)

    # -- partitioned abstract operators (no abstract transition relation) -----

    def _over_successor(self, S_abs: BDD) -> BDD:
        """(P, X_u, X_c): some state of the cell moves into S_abs under the inputs."""
        return self.alpha_over(S_abs.compose(self.psi))

    def upre_over_part(self, S_abs: BDD) -> BDD:
        g = self.game
        return self._over_successor(S_abs).forall(g.xc).exists(g.xu)

    def upre_under_part(self, S_abs: BDD) -> BDD:
        g = self.game
        return ~self._over_successor(~S_abs).exists(g.xc).forall(g.xu)

    # -- quasi-strategies and successors -------------------------------------

    def adam_quasi_strategy(self, W: BDD) -> QuasiStrategy:
        """Pairs (cell, uncontrollable input) from which every Eve answer may stay in W."""
        g = self.game
        if self.T_abs is not None:
            stay = self.T_abs.and_exists(W.compose(self.prime), self.Pp)
        else:
            stay = self._over_successor(W)
        return QuasiStrategy(stay.forall(g.xc), player="adam", abstract=True)

    def concretize(self, quasi: QuasiStrategy) -> QuasiStrategy:
        if not quasi.abstract:
            return quasi
        return QuasiStrategy(self.gamma(quasi.relation), player=quasi.player, abstract=False)

    def post_abs(self, S_abs: BDD, quasi: QuasiStrategy) -> BDD:
        g = self.game
        src = S_abs & quasi.relation
        img = src.and_exists(self._require_T(), self.P | g.xu | g.xc)
        return img.compose(self.unprime)

    def post_over_part(self, S_abs: BDD, quasi: QuasiStrategy) -> BDD:
        """Over-approximate successors with the X_c quantifier pushed into each predicate."""
        g = self.game
        m = self.manager
        acc = self.gamma(S_abs & quasi.relation)
        factors = [m.var(p.var_next).iff(self.psi[p.var]).exists(g.xc) for p in self.preds]
        for f in factors[:-1]:
            acc = acc & f
        img = acc.and_exists(factors[-1], g.L | g.xu) if factors else acc.exists(g.L | g.xu)
        return img.compose(self.unprime)


def upre_concrete_guided(g: SymbolicGame, quasi: QuasiStrategy, S: BDD, R_conc: BDD) -> BDD:
    """Concrete upre where Adam may only use moves allowed by a concretized quasi-strategy."""
    if quasi.abstract or quasi.player != "adam":
        raise ValueError("expected a concrete Adam quasi-strategy")
    forced = substitute_next(g, S).forall(g.xc)
    return quasi.relation.and_exists(forced, g.xu) & R_conc
