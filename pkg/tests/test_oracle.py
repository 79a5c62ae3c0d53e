import pytest

from safetysynth.families import gen_cnt, random_corpus
from safetysynth.aiger import split_inputs
from safetysynth.game import encode, solve_classic
from safetysynth.oracle import (MAX_LATCHES, TooLarge, explicit_game, explicit_reach_winning,
                                explicit_solve, reachable)


def test_e1(e1):
    eg = explicit_game(e1)
    res = explicit_solve(eg)
    assert res.winner == "eve" and res.losing == {1}
    assert explicit_reach_winning(eg, res) == frozenset()


def test_e2(e2):
    eg = explicit_game(e2)
    res = explicit_solve(eg)
    assert res.winner == "adam" and res.losing == {0, 1}
    assert explicit_reach_winning(eg, res) == {0, 1}


def test_counter_three_bits():
    spec = split_inputs(gen_cnt(3))
    eg = explicit_game(spec)
    res = explicit_solve(eg)
    assert res.winner == "eve"
    # losing: the error latch set, or the counter full (error rises next step)
    assert res.losing == {q for q in range(16) if q >> 3 & 1 or q == 0b0111}


def test_verdicts_agree_with_symbolic(full_corpus):
    for inst in full_corpus:
        status = solve_classic(encode(inst.spec)).status.value
        assert status == ("REALIZABLE" if inst.realizable else "UNREALIZABLE"), inst.name


def test_attractor_is_fixpoint(small_corpus):
    for inst in small_corpus:
        eg, res = inst.eg, inst.oracle
        step = {q for q in range(eg.n_states)
                if any(all(eg.delta(q, su, sc) in res.losing for sc in range(1 << eg.n_c))
                       for su in range(1 << eg.n_u))}
        assert step | eg.unsafe == res.losing


def test_reach_winning_inside_attractor(small_corpus):
    for inst in small_corpus:
        rg = explicit_reach_winning(inst.eg, inst.oracle)
        assert rg <= inst.oracle.losing
        assert rg <= reachable(inst.eg)
        if inst.realizable:
            assert rg == frozenset()
        else:
            assert inst.eg.init in rg and rg & inst.eg.unsafe


def test_forcing_moves_are_winning(small_corpus):
    for inst in small_corpus:
        eg, res = inst.eg, inst.oracle
        for q, moves in res.forcing_moves.items():
            if q not in eg.unsafe:
                assert moves
            for su in moves:
                assert all(eg.delta(q, su, sc) in res.losing for sc in range(1 << eg.n_c))


def test_corpus_is_seeded():
    a = [name for name, _ in random_corpus(5, 10)]
    b = [(name, aig.ands) for name, aig in random_corpus(5, 10)]
    c = [(name, aig.ands) for name, aig in random_corpus(5, 10)]
    assert b == c and a == [n for n, _ in b]


def test_too_large():
    with pytest.raises(TooLarge):
        explicit_game(split_inputs(gen_cnt(MAX_LATCHES)))
