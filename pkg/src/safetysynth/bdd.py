"""Reduced ordered binary decision diagrams over a fixed variable order.

Nodes are plain integers indexing into per-manager arrays; ``0`` and ``1`` are
the terminals.  Variables are identified by their level (position in the
order), so level comparisons are integer comparisons.  There are no
complement edges and no garbage collection: a node, once created, lives as
long as its manager, which keeps handles stable and caches valid.

Users normally work with :class:`BDD` handles, which wrap a node id together
with its manager and overload ``&``, ``|``, ``^`` and ``~``.
"""
from __future__ import annotations

import os
import sys
import time
from collections.abc import Iterable, Iterator, Mapping

FALSE_ID = 0
TRUE_ID = 1
_TERMINAL_LEVEL = 1 << 30
DEFAULT_NODE_LIMIT = 50_000_000
NODE_LIMIT_ENV = "SAFETYSYNTH_NODE_LIMIT"
# caches are dropped wholesale once they hold this many entries in total
_CACHE_BUDGET = 4_000_000

if sys.getrecursionlimit() < 20_000:
    sys.setrecursionlimit(20_000)


class BDDError(Exception):
    pass


class ManagerMismatch(BDDError):
    pass


class ResourceExhausted(BDDError):
    """Base for limits that abort an algorithm run with a status, not a bug."""


class NodeLimitExceeded(ResourceExhausted):
    pass


class Timeout(ResourceExhausted):
    pass


def default_node_limit() -> int:
    value = os.environ.get(NODE_LIMIT_ENV)
    return int(value) if value else DEFAULT_NODE_LIMIT


class Manager:
    """Unique table, operation caches and node storage for one variable order."""

    def __init__(self, node_limit: int | None = None):
        self._lev = [_TERMINAL_LEVEL, _TERMINAL_LEVEL]
        self._lo = [0, 1]
        self._hi = [0, 1]
        self._unique: dict[tuple[int, int, int], int] = {}
        self._var_nodes: list[int] = []
        self.var_names: list[str] = []
        self._levels: dict[str, int] = {}
        self.node_limit = default_node_limit() if node_limit is None else node_limit
        self.deadline: float | None = None
        self._not_cache: dict[int, int] = {}
        self._and_cache: dict[tuple[int, int], int] = {}
        self._or_cache: dict[tuple[int, int], int] = {}
        self._xor_cache: dict[tuple[int, int], int] = {}
        self._ite_cache: dict[tuple[int, int, int], int] = {}
        self._restrict_cache: dict[tuple[int, int], int] = {}
        self._quant_caches: dict[tuple, dict] = {}
        self._compose_caches: dict[frozenset, dict[int, int]] = {}
        self.false = BDD(self, FALSE_ID)
        self.true = BDD(self, TRUE_ID)

    # -- variables ---------------------------------------------------------

    def declare(self, *names: str) -> list[BDD]:
        """Append fresh variables at the bottom of the order."""
        out = []
        for name in names:
            if name in self._levels:
                raise BDDError(f"variable {name!r} already declared")
            level = len(self.var_names)
            self.var_names.append(name)
            self._levels[name] = level
            self._var_nodes.append(self._mk(level, FALSE_ID, TRUE_ID))
            out.append(BDD(self, self._var_nodes[level]))
        return out

    def level(self, var: str | int) -> int:
        if isinstance(var, str):
            return self._levels[var]
        if not 0 <= var < len(self.var_names):
            raise BDDError(f"unknown variable level {var}")
        return var

    def var(self, var: str | int) -> BDD:
        return BDD(self, self._var_nodes[self.level(var)])

    @property
    def num_vars(self) -> int:
        return len(self.var_names)

    @property
    def num_nodes(self) -> int:
        """Total nodes ever allocated, terminals included (no GC, so also the peak)."""
        return len(self._lev)

    def _levelset(self, vars: Iterable[str | int]) -> frozenset[int]:
        return frozenset(self.level(v) for v in vars)

    # -- node construction -------------------------------------------------

    def _mk(self, lev: int, lo: int, hi: int) -> int:
        if lo == hi:
            return lo
        key = (lev, lo, hi)
        node = self._unique.get(key)
        if node is None:
            node = len(self._lev)
            if node >= self.node_limit:
                raise NodeLimitExceeded(f"more than {self.node_limit} BDD nodes")
            if not node & 0x3FF and self.deadline is not None and time.monotonic() > self.deadline:
                raise Timeout("deadline reached during BDD construction")
            self._lev.append(lev)
            self._lo.append(lo)
            self._hi.append(hi)
            self._unique[key] = node
        return node

    def node_info(self, f: BDD) -> tuple[int, BDD, BDD]:
        """(level, low child, high child) of a non-terminal node."""
        node = self._own(f)
        if node < 2:
            raise BDDError("terminal nodes have no children")
        return self._lev[node], BDD(self, self._lo[node]), BDD(self, self._hi[node])

    def check_deadline(self) -> None:
        if self.deadline is not None and time.monotonic() > self.deadline:
            raise Timeout("deadline reached")

    def clear_caches(self) -> None:
        self._not_cache.clear()
        self._and_cache.clear()
        self._or_cache.clear()
        self._xor_cache.clear()
        self._ite_cache.clear()
        self._restrict_cache.clear()
        self._quant_caches.clear()
        self._compose_caches.clear()

    def _maybe_flush(self) -> None:
        size = (len(self._and_cache) + len(self._or_cache) + len(self._xor_cache)
                + len(self._ite_cache) + len(self._not_cache) + len(self._restrict_cache))
        if size > _CACHE_BUDGET:
            self.clear_caches()

    # -- boolean connectives -----------------------------------------------

    def _not(self, f: int) -> int:
        if f < 2:
            return 1 - f
        r = self._not_cache.get(f)
        if r is None:
            r = self._mk(self._lev[f], self._not(self._lo[f]), self._not(self._hi[f]))
            self._not_cache[f] = r
        return r

    def _and(self, f: int, g: int) -> int:
        if f == 0 or g == 0:
            return 0
        if f == 1:
            return g
        if g == 1 or f == g:
            return f
        if f > g:
            f, g = g, f
        key = (f, g)
        r = self._and_cache.get(key)
        if r is not None:
            return r
        lf = self._lev[f]
        lg = self._lev[g]
        if lf == lg:
            r = self._mk(lf, self._and(self._lo[f], self._lo[g]), self._and(self._hi[f], self._hi[g]))
        elif lf < lg:
            r = self._mk(lf, self._and(self._lo[f], g), self._and(self._hi[f], g))
        else:
            r = self._mk(lg, self._and(f, self._lo[g]), self._and(f, self._hi[g]))
        self._and_cache[key] = r
        return r

    def _or(self, f: int, g: int) -> int:
        if f == 1 or g == 1:
            return 1
        if f == 0:
            return g
        if g == 0 or f == g:
            return f
        if f > g:
            f, g = g, f
        key = (f, g)
        r = self._or_cache.get(key)
        if r is not None:
            return r
        lf = self._lev[f]
        lg = self._lev[g]
        if lf == lg:
            r = self._mk(lf, self._or(self._lo[f], self._lo[g]), self._or(self._hi[f], self._hi[g]))
        elif lf < lg:
            r = self._mk(lf, self._or(self._lo[f], g), self._or(self._hi[f], g))
        else:
            r = self._mk(lg, self._or(f, self._lo[g]), self._or(f, self._hi[g]))
        self._or_cache[key] = r
        return r

    def _xor(self, f: int, g: int) -> int:
        if f == g:
            return 0
        if f == 0:
            return g
        if g == 0:
            return f
        if f == 1:
            return self._not(g)
        if g == 1:
            return self._not(f)
        if f > g:
            f, g = g, f
        key = (f, g)
        r = self._xor_cache.get(key)
        if r is not None:
            return r
        lf = self._lev[f]
        lg = self._lev[g]
        if lf == lg:
            r = self._mk(lf, self._xor(self._lo[f], self._lo[g]), self._xor(self._hi[f], self._hi[g]))
        elif lf < lg:
            r = self._mk(lf, self._xor(self._lo[f], g), self._xor(self._hi[f], g))
        else:
            r = self._mk(lg, self._xor(f, self._lo[g]), self._xor(f, self._hi[g]))
        self._xor_cache[key] = r
        return r

    def _ite(self, f: int, g: int, h: int) -> int:
        if f == 1:
            return g
        if f == 0:
            return h
        if g == h:
            return g
        if g == 1:
            return self._or(f, h)
        if h == 0:
            return self._and(f, g)
        if g == 0:
            return self._and(self._not(f), h)
        if h == 1:
            return self._or(self._not(f), g)
        key = (f, g, h)
        r = self._ite_cache.get(key)
        if r is not None:
            return r
        lev, lo, hi = self._lev, self._lo, self._hi
        top = min(lev[f], lev[g], lev[h])
        f0, f1 = (lo[f], hi[f]) if lev[f] == top else (f, f)
        g0, g1 = (lo[g], hi[g]) if lev[g] == top else (g, g)
        h0, h1 = (lo[h], hi[h]) if lev[h] == top else (h, h)
        r = self._mk(top, self._ite(f0, g0, h0), self._ite(f1, g1, h1))
        self._ite_cache[key] = r
        return r

    # -- quantification ----------------------------------------------------

    def _exists(self, f: int, vs: frozenset[int], vmax: int, cache: dict) -> int:
        if f < 2 or self._lev[f] > vmax:
            return f
        r = cache.get(f)
        if r is not None:
            return r
        lev = self._lev[f]
        lo = self._exists(self._lo[f], vs, vmax, cache)
        if lev in vs:
            r = 1 if lo == 1 else self._or(lo, self._exists(self._hi[f], vs, vmax, cache))
        else:
            r = self._mk(lev, lo, self._exists(self._hi[f], vs, vmax, cache))
        cache[f] = r
        return r

    def _forall(self, f: int, vs: frozenset[int], vmax: int, cache: dict) -> int:
        if f < 2 or self._lev[f] > vmax:
            return f
        r = cache.get(f)
        if r is not None:
            return r
        lev = self._lev[f]
        lo = self._forall(self._lo[f], vs, vmax, cache)
        if lev in vs:
            r = 0 if lo == 0 else self._and(lo, self._forall(self._hi[f], vs, vmax, cache))
        else:
            r = self._mk(lev, lo, self._forall(self._hi[f], vs, vmax, cache))
        cache[f] = r
        return r

    def _relprod(self, f: int, g: int, vs: frozenset[int], vmax: int, cache: dict, ecache: dict) -> int:
        """exists vs. f & g without building the conjunction first."""
        if f == 0 or g == 0:
            return 0
        if f == 1 and g == 1:
            return 1
        if f == 1 or f == g:
            return self._exists(g, vs, vmax, ecache)
        if g == 1:
            return self._exists(f, vs, vmax, ecache)
        if f > g:
            f, g = g, f
        lev = self._lev
        top = min(lev[f], lev[g])
        if top > vmax:
            return self._and(f, g)
        key = (f, g)
        r = cache.get(key)
        if r is not None:
            return r
        lo, hi = self._lo, self._hi
        f0, f1 = (lo[f], hi[f]) if lev[f] == top else (f, f)
        g0, g1 = (lo[g], hi[g]) if lev[g] == top else (g, g)
        r0 = self._relprod(f0, g0, vs, vmax, cache, ecache)
        if top in vs:
            r = 1 if r0 == 1 else self._or(r0, self._relprod(f1, g1, vs, vmax, cache, ecache))
        else:
            r = self._mk(top, r0, self._relprod(f1, g1, vs, vmax, cache, ecache))
        cache[key] = r
        return r

    def _quant_cache(self, tag: str, vs: frozenset[int]) -> dict:
        key = (tag, vs)
        cache = self._quant_caches.get(key)
        if cache is None:
            if len(self._quant_caches) > 256:
                self._quant_caches.clear()
            cache = self._quant_caches[key] = {}
        return cache

    def exists_node(self, vs: frozenset[int], f: int) -> int:
        if not vs:
            return f
        return self._exists(f, vs, max(vs), self._quant_cache("E", vs))

    def forall_node(self, vs: frozenset[int], f: int) -> int:
        if not vs:
            return f
        return self._forall(f, vs, max(vs), self._quant_cache("A", vs))

    def and_exists_node(self, vs: frozenset[int], f: int, g: int) -> int:
        if not vs:
            return self._and(f, g)
        return self._relprod(f, g, vs, max(vs), self._quant_cache("R", vs), self._quant_cache("E", vs))

    # -- substitution and generalized cofactor -----------------------------

    def _compose(self, f: int, sub: dict[int, int], smax: int, cache: dict) -> int:
        if f < 2 or self._lev[f] > smax:
            return f
        r = cache.get(f)
        if r is not None:
            return r
        lev = self._lev[f]
        lo = self._compose(self._lo[f], sub, smax, cache)
        hi = self._compose(self._hi[f], sub, smax, cache)
        g = sub.get(lev)
        if g is None:
            if lev < self._lev[lo] and lev < self._lev[hi]:
                r = self._mk(lev, lo, hi)
            else:
                r = self._ite(self._var_nodes[lev], hi, lo)
        else:
            r = self._ite(g, hi, lo)
        cache[f] = r
        return r

    def compose_node(self, f: int, sub: Mapping[int, int]) -> int:
        sub = {v: g for v, g in sub.items() if g != self._var_nodes[v]}
        if not sub:
            return f
        key = frozenset(sub.items())
        cache = self._compose_caches.get(key)
        if cache is None:
            if len(self._compose_caches) > 256:
                self._compose_caches.clear()
            cache = self._compose_caches[key] = {}
        return self._compose(f, sub, max(sub), cache)

    def _restrict(self, f: int, c: int) -> int:
        if c == 1 or f < 2:
            return f
        if c == 0:
            return 0
        if f == c:
            return 1
        key = (f, c)
        r = self._restrict_cache.get(key)
        if r is not None:
            return r
        lev, lo, hi = self._lev, self._lo, self._hi
        lf, lc = lev[f], lev[c]
        if lc < lf:
            r = self._restrict(f, self._or(lo[c], hi[c]))
        elif lc == lf:
            if lo[c] == 0:
                r = self._restrict(hi[f], hi[c])
            elif hi[c] == 0:
                r = self._restrict(lo[f], lo[c])
            else:
                r = self._mk(lf, self._restrict(lo[f], lo[c]), self._restrict(hi[f], hi[c]))
        else:
            r = self._mk(lf, self._restrict(lo[f], c), self._restrict(hi[f], c))
        self._restrict_cache[key] = r
        return r

    # -- inspection --------------------------------------------------------

    def support_node(self, f: int) -> set[int]:
        seen: set[int] = set()
        out: set[int] = set()
        stack = [f]
        while stack:
            n = stack.pop()
            if n < 2 or n in seen:
                continue
            seen.add(n)
            out.add(self._lev[n])
            stack.append(self._lo[n])
            stack.append(self._hi[n])
        return out

    def dag_size(self, f: int) -> int:
        seen: set[int] = set()
        stack = [f]
        while stack:
            n = stack.pop()
            if n < 2 or n in seen:
                continue
            seen.add(n)
            stack.append(self._lo[n])
            stack.append(self._hi[n])
        return len(seen)

    def evaluate_node(self, f: int, assignment: Mapping[int, bool]) -> bool:
        while f >= 2:
            f = self._hi[f] if assignment[self._lev[f]] else self._lo[f]
        return f == 1

    def sat_count_node(self, f: int, levels: Iterable[int]) -> int:
        order = sorted(set(levels))
        pos = {lv: i for i, lv in enumerate(order)}
        n = len(order)
        memo: dict[int, int] = {}

        def index(node):
            return n if node < 2 else pos[self._lev[node]]

        def count(node):
            # models over the variables strictly below index(node)'s position
            if node < 2:
                return node
            r = memo.get(node)
            if r is None:
                i = index(node)
                lo, hi = self._lo[node], self._hi[node]
                r = (count(lo) << (index(lo) - i - 1)) + (count(hi) << (index(hi) - i - 1))
                memo[node] = r
            return r

        missing = self.support_node(f) - set(order)
        if missing:
            raise BDDError(f"support exceeds counted variables: {sorted(missing)}")
        return count(f) << index(f)

    def pick_node(self, f: int, levels: Iterable[int] = ()) -> dict[int, bool] | None:
        if f == 0:
            return None
        out = {lv: False for lv in levels}
        while f >= 2:
            if self._lo[f] != 0:
                out[self._lev[f]] = False
                f = self._lo[f]
            else:
                out[self._lev[f]] = True
                f = self._hi[f]
        return out

    def to_dot(self, f: BDD, name: str = "bdd") -> str:
        """DOT text: one box per variable test, solid high edge, dashed low edge."""
        lines = [f"digraph {name} {{", '  n0 [label="0", shape=box];', '  n1 [label="1", shape=box];']
        seen: set[int] = set()
        stack = [f.node]
        while stack:
            n = stack.pop()
            if n < 2 or n in seen:
                continue
            seen.add(n)
            lines.append(f'  n{n} [label="{self.var_names[self._lev[n]]}", shape=ellipse];')
            lines.append(f"  n{n} -> n{self._hi[n]};")
            lines.append(f"  n{n} -> n{self._lo[n]} [style=dashed];")
            stack.extend((self._lo[n], self._hi[n]))
        lines.append("}")
        return "\n".join(lines) + "\n"

    # -- handle-level helpers ----------------------------------------------

    def _wrap(self, node: int) -> BDD:
        return BDD(self, node)

    def cube(self, assignment: Mapping[str | int, bool]) -> BDD:
        node = TRUE_ID
        for lv, val in sorted(((self.level(v), bool(x)) for v, x in assignment.items()), reverse=True):
            node = self._mk(lv, FALSE_ID, node) if val else self._mk(lv, node, FALSE_ID)
        return BDD(self, node)

    def conj(self, fs: Iterable[BDD]) -> BDD:
        node = TRUE_ID
        for f in fs:
            node = self._and(node, self._own(f))
        return BDD(self, node)

    def disj(self, fs: Iterable[BDD]) -> BDD:
        node = FALSE_ID
        for f in fs:
            node = self._or(node, self._own(f))
        return BDD(self, node)

    def ite(self, f: BDD, g: BDD, h: BDD) -> BDD:
        self._maybe_flush()
        return BDD(self, self._ite(self._own(f), self._own(g), self._own(h)))

    def _own(self, f: BDD) -> int:
        if f.manager is not self:
            raise ManagerMismatch("BDD belongs to a different manager")
        return f.node


class BDD:
    """Handle to a node in one manager; equal handles mean equal functions."""

    __slots__ = ("manager", "node")

    def __init__(self, manager: Manager, node: int):
        self.manager = manager
        self.node = node

    def _other(self, other: BDD) -> int:
        if not isinstance(other, BDD):
            raise TypeError(f"expected BDD, got {type(other).__name__}")
        if other.manager is not self.manager:
            raise ManagerMismatch("operands belong to different managers")
        return other.node

    def __and__(self, other: BDD) -> BDD:
        m = self.manager
        m._maybe_flush()
        return BDD(m, m._and(self.node, self._other(other)))

    def __or__(self, other: BDD) -> BDD:
        m = self.manager
        m._maybe_flush()
        return BDD(m, m._or(self.node, self._other(other)))

    def __xor__(self, other: BDD) -> BDD:
        m = self.manager
        m._maybe_flush()
        return BDD(m, m._xor(self.node, self._other(other)))

    def __invert__(self) -> BDD:
        return BDD(self.manager, self.manager._not(self.node))

    def __sub__(self, other: BDD) -> BDD:
        return self & ~other

    def implies(self, other: BDD) -> BDD:
        return ~self | other

    def iff(self, other: BDD) -> BDD:
        return ~(self ^ other)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, BDD) and other.manager is self.manager and other.node == self.node

    def __ne__(self, other: object) -> bool:
        return not self == other

    def __hash__(self) -> int:
        return hash((id(self.manager), self.node))

    def __le__(self, other: BDD) -> bool:
        """Set inclusion: every model of self is a model of other."""
        m = self.manager
        return m._and(self.node, m._not(self._other(other))) == FALSE_ID

    def __ge__(self, other: BDD) -> bool:
        return other <= self

    def __bool__(self) -> bool:
        raise TypeError("truth value of a BDD is ambiguous; use is_true/is_false or <=")

    def __repr__(self) -> str:
        if self.node < 2:
            return f"BDD({bool(self.node)})"
        return f"BDD(node={self.node}, var={self.manager.var_names[self.manager._lev[self.node]]!r})"

    @property
    def is_true(self) -> bool:
        return self.node == TRUE_ID

    @property
    def is_false(self) -> bool:
        return self.node == FALSE_ID

    def exists(self, vars: Iterable[str | int]) -> BDD:
        m = self.manager
        return BDD(m, m.exists_node(m._levelset(vars), self.node))

    def forall(self, vars: Iterable[str | int]) -> BDD:
        m = self.manager
        return BDD(m, m.forall_node(m._levelset(vars), self.node))

    def and_exists(self, other: BDD, vars: Iterable[str | int]) -> BDD:
        """exists vars. self & other, computed as one relational product."""
        m = self.manager
        m._maybe_flush()
        return BDD(m, m.and_exists_node(m._levelset(vars), self.node, self._other(other)))

    def compose(self, subst: Mapping[str | int, BDD]) -> BDD:
        """Simultaneous substitution of each key variable by its function."""
        m = self.manager
        m._maybe_flush()
        sub = {m.level(v): self._other(g) for v, g in subst.items()}
        return BDD(m, m.compose_node(self.node, sub))

    def restrict(self, care: BDD) -> BDD:
        """Coudert-Madre generalized cofactor: agrees with self wherever care holds."""
        m = self.manager
        m._maybe_flush()
        return BDD(m, m._restrict(self.node, self._other(care)))

    def cofactor(self, assignment: Mapping[str | int, bool]) -> BDD:
        m = self.manager
        return self.compose({v: (m.true if val else m.false) for v, val in assignment.items()})

    def support(self) -> set[int]:
        return self.manager.support_node(self.node)

    def support_names(self) -> set[str]:
        return {self.manager.var_names[lv] for lv in self.support()}

    def evaluate(self, assignment: Mapping[int, bool]) -> bool:
        return self.manager.evaluate_node(self.node, assignment)

    def sat_count(self, levels: Iterable[int]) -> int:
        return self.manager.sat_count_node(self.node, levels)

    def pick(self, levels: Iterable[int] = ()) -> dict[int, bool] | None:
        return self.manager.pick_node(self.node, levels)

    def iter_models(self, levels: Iterable[int]) -> Iterator[dict[int, bool]]:
        """All total assignments over levels (which must cover the support)."""
        order = sorted(set(levels))
        m = self.manager
        if not m.support_node(self.node) <= set(order):
            raise BDDError("levels must cover the support")

        def walk(node, i, acc):
            if node == FALSE_ID:
                return
            if i == len(order):
                yield dict(acc)
                return
            lv = order[i]
            if node >= 2 and m._lev[node] == lv:
                lo, hi = m._lo[node], m._hi[node]
            else:
                lo = hi = node
            acc[lv] = False
            yield from walk(lo, i + 1, acc)
            acc[lv] = True
            yield from walk(hi, i + 1, acc)
            del acc[lv]

        yield from walk(self.node, 0, {})

    def dag_size(self) -> int:
        return self.manager.dag_size(self.node)

    def to_dot(self, name: str = "bdd") -> str:
        return self.manager.to_dot(self, name)
