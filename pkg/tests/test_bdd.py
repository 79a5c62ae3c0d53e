import itertools
import random
import time

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import bdd_from_table, random_bdd
from safetysynth.bdd import (BDDError, Manager, ManagerMismatch, NodeLimitExceeded,
                             NODE_LIMIT_ENV, Timeout)


def manager(n):
    m = Manager()
    m.declare(*(f"x{i}" for i in range(n)))
    return m


def table_of(f, levels):
    out = 0
    for a in range(1 << len(levels)):
        if f.evaluate({lv: bool(a >> k & 1) for k, lv in enumerate(levels)}):
            out |= 1 << a
    return out


def check_canonical(m):
    seen = set()
    for node in range(2, m.num_nodes):
        lev, lo, hi = m._lev[node], m._lo[node], m._hi[node]
        assert lo != hi
        assert (lev, lo, hi) not in seen
        seen.add((lev, lo, hi))
        for child in (lo, hi):
            assert child < 2 or m._lev[child] > lev


# -- exhaustive checks over three variables -----------------------------------

M3 = manager(3)
L3 = [0, 1, 2]
FUNS3 = [bdd_from_table(M3, L3, t) for t in range(256)]
MASK3 = 0xFF


def test_canonicity_exhaustive():
    # a second construction route (sum of minterms) lands on the same handle
    for t, f in enumerate(FUNS3):
        minterms = [M3.cube({k: bool(a >> k & 1) for k in L3}) for a in range(8) if t >> a & 1]
        assert M3.disj(minterms) == f
        assert table_of(f, L3) == t
    assert len(set(FUNS3)) == 256
    check_canonical(M3)


def test_apply_exhaustive():
    for (ta, fa), (tb, fb) in itertools.product(enumerate(FUNS3), repeat=2):
        assert (fa & fb) == FUNS3[ta & tb]
        assert (fa | fb) == FUNS3[ta | tb]
        assert (fa ^ fb) == FUNS3[ta ^ tb]
        assert fa.implies(fb) == FUNS3[(~ta | tb) & MASK3]
        assert fa.iff(fb) == FUNS3[~(ta ^ tb) & MASK3]
        assert (fa <= fb) == (ta & ~tb == 0)
    for t, f in enumerate(FUNS3):
        assert ~f == FUNS3[~t & MASK3]
    check_canonical(M3)


def test_ite_exhaustive_two_vars():
    m = manager(2)
    funs = [bdd_from_table(m, [0, 1], t) for t in range(16)]
    for (a, f), (b, g), (c, h) in itertools.product(enumerate(funs), repeat=3):
        assert m.ite(f, g, h) == funs[(a & b) | (~a & c) & 0xF]


def test_quantify_exhaustive():
    for t, f in enumerate(FUNS3):
        for r in range(4):
            for block in itertools.combinations(L3, r):
                ex = fa = None
                for a in range(8):
                    # all assignments that agree with a outside the block
                    group = [b for b in range(8) if all((a ^ b) >> k & 1 == 0 for k in L3 if k not in block)]
                    e = any(t >> b & 1 for b in group)
                    u = all(t >> b & 1 for b in group)
                    ex = (ex or 0) | (e << a)
                    fa = (fa or 0) | (u << a)
                assert f.exists(block) == FUNS3[ex]
                assert f.forall(block) == FUNS3[fa]


def test_compose_exhaustive_single_var():
    for tf, f in enumerate(FUNS3):
        for tg, g in enumerate(FUNS3):
            want = 0
            for a in range(8):
                y = tg >> a & 1
                b = (a & ~2) | (y << 1)
                want |= (tf >> b & 1) << a
            assert f.compose({1: g}) == FUNS3[want]


def test_restrict_exhaustive():
    for tf, f in enumerate(FUNS3):
        for tc, care in enumerate(FUNS3):
            r = f.restrict(care)
            assert (table_of(r, L3) ^ tf) & tc == 0


# -- randomized checks over up to eight variables -------------------------------

def test_random_eight_var_operations():
    rng = random.Random(8)
    m = manager(8)
    levels = list(range(8))
    for _ in range(1000):
        n = rng.randint(1, 8)
        lv = levels[:n]
        f, g, h = (random_bdd(m, lv, rng) for _ in range(3))
        tf, tg, th = (table_of(x, lv) for x in (f, g, h))
        mask = (1 << (1 << n)) - 1
        assert table_of(f & g, lv) == tf & tg
        assert table_of(f | g, lv) == tf | tg
        assert table_of(f ^ g, lv) == tf ^ tg
        assert table_of(m.ite(f, g, h), lv) == (tf & tg) | (~tf & th & mask)
        block = [v for v in lv if rng.random() < 0.4]
        assert f.forall(block) == ~(~f).exists(block)
        ex = f.exists(block)
        assert f <= ex and ex.support().isdisjoint(block)
        # exists as an explicit disjunction of cofactors
        expanded = f
        for v in block:
            expanded = expanded.cofactor({v: False}) | expanded.cofactor({v: True})
        assert ex == expanded
        assert f.and_exists(g, block) == (f & g).exists(block)
        y = rng.choice(lv)
        gy = random_bdd(m, lv, rng)
        tgy = table_of(gy, lv)
        want = 0
        for a in range(1 << n):
            b = (a & ~(1 << y)) | ((tgy >> a & 1) << y)
            want |= (tf >> b & 1) << a
        assert table_of(f.compose({y: gy}), lv) == want
        care = random_bdd(m, lv, rng)
        r = f.restrict(care)
        assert (care & (r ^ f)).is_false
    check_canonical(m)


def test_simultaneous_compose_swaps():
    m = manager(3)
    x, y, z = (m.var(i) for i in range(3))
    f = x & ~y | z
    assert f.compose({0: y, 1: x}) == (y & ~x | z)


# -- small named cases --------------------------------------------------------

def test_named_examples():
    m = manager(4)
    x, y, z, w = (m.var(i) for i in range(4))
    assert (x & ~x).is_false
    f = x ^ (y & z)
    assert m.ite(f, m.true, m.false) == f
    assert (x & y).exists([0]) == y
    assert (x | y).forall([0]) == y
    assert f.compose({1: y}) == f
    assert (y & z).compose({1: x | w}) == (x | w) & z
    assert f.restrict(m.true) == f
    assert f.restrict(f).is_true
    assert f.restrict(m.false).is_false


def test_sat_count_and_models():
    m = manager(4)
    x, y = m.var(0), m.var(1)
    f = x | y
    assert f.sat_count([0, 1]) == 3
    assert f.sat_count([0, 1, 2, 3]) == 12
    models = list(f.iter_models([0, 1]))
    assert len(models) == 3 and all(f.evaluate(a) for a in models)
    assert m.false.pick() is None
    a = f.pick([0, 1, 2])
    assert f.evaluate(a) and set(a) == {0, 1, 2}
    with pytest.raises(BDDError):
        f.sat_count([0])


def test_bool_is_ambiguous():
    m = manager(1)
    with pytest.raises(TypeError):
        bool(m.var(0))


def test_manager_mismatch():
    a, b = manager(1), manager(1)
    with pytest.raises(ManagerMismatch):
        a.var(0) & b.var(0)


def test_redeclare_rejected():
    m = manager(1)
    with pytest.raises(BDDError):
        m.declare("x0")


def test_node_limit():
    m = Manager(node_limit=40)
    m.declare(*(f"v{i}" for i in range(12)))
    with pytest.raises(NodeLimitExceeded):
        m.conj(m.var(i) ^ m.var(i + 6) for i in range(6))


def test_node_limit_env(monkeypatch):
    monkeypatch.setenv(NODE_LIMIT_ENV, "123")
    assert Manager().node_limit == 123


def test_deadline():
    m = Manager()
    m.deadline = time.monotonic() - 1
    with pytest.raises(Timeout):
        m.check_deadline()


def test_dot_output():
    m = manager(2)
    dot = (m.var(0) & m.var(1)).to_dot()
    assert dot.startswith("digraph") and "x0" in dot


# -- algebraic laws as property tests ------------------------------------------

N_PROP = 6
M_PROP = manager(N_PROP)
L_PROP = list(range(N_PROP))
tables = st.integers(min_value=0, max_value=(1 << (1 << N_PROP)) - 1)
blocks = st.sets(st.sampled_from(L_PROP))


def fn(t):
    return bdd_from_table(M_PROP, L_PROP, t)


@settings(max_examples=60, deadline=None)
@given(tables, tables, blocks)
def test_quantifier_distribution(a, b, block):
    f, g = fn(a), fn(b)
    assert (f | g).exists(block) == f.exists(block) | g.exists(block)
    assert (f & g).forall(block) == f.forall(block) & g.forall(block)
    assert (f & g).exists(block) <= f.exists(block) & g.exists(block)


@settings(max_examples=60, deadline=None)
@given(tables, tables, tables)
def test_compose_commutes_with_apply(a, b, c):
    f, g, h = fn(a).exists([5]), fn(b).exists([5]), fn(c).exists([0, 5])
    sub = {0: h}
    assert (f & g).compose(sub) == f.compose(sub) & g.compose(sub)
    assert (~f).compose(sub) == ~f.compose(sub)


@settings(max_examples=60, deadline=None)
@given(tables, tables)
def test_restrict_agrees_on_care(a, c):
    f, care = fn(a), fn(c)
    assert (care & (f.restrict(care) ^ f)).is_false
