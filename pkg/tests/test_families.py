import pytest

from safetysynth.aiger import parse_aag, split_inputs, write_aag
from safetysynth.families import gen_cnt, random_corpus
from safetysynth.game import encode
from safetysynth.oracle import bdd_states


@pytest.mark.parametrize("n", [1, 3, 7])
def test_counter_shape(n):
    spec = split_inputs(gen_cnt(n))
    assert len(spec.uncontrollable) == 1 and len(spec.controllable) == 1
    g = encode(spec)
    # the bad output is the err latch itself, so no extra latch is added
    assert g.num_latches == n + 1 and not g.err_synthesized
    assert g.latch_names[-1] == "err"


def test_counter_round_trips():
    aig = gen_cnt(5)
    assert parse_aag(write_aag(aig)) == aig


def test_counter_rejects_bad_width():
    for n in (0, 31):
        with pytest.raises(ValueError):
            gen_cnt(n)


def test_counter_next_state():
    g = encode(split_inputs(gen_cnt(2)))
    # bits (cnt<0>, cnt<1>, err); from 0b001 with inc=1 and no reset go to 0b010
    state = {lv: bool(0b001 >> k & 1) for k, lv in enumerate(g.blocks.latch)}
    state[g.blocks.uncontrollable[0]] = True
    state[g.blocks.controllable[0]] = False
    assert [f.evaluate(state) for f in g.latch_fn] == [False, True, False]
    assert bdd_states(g, g.error) == {q for q in range(8) if q >> 2 & 1}


def test_corpus_is_seeded_and_small():
    a = list(random_corpus(7, 40))
    b = list(random_corpus(7, 40))
    assert a == b
    assert a != list(random_corpus(8, 40))
    for _, aig in a:
        spec = split_inputs(aig)
        assert 1 <= len(spec.uncontrollable) <= 2 and 1 <= len(spec.controllable) <= 2
        assert encode(spec).num_latches <= 6
