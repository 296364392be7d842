import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bicmb.errors import CatastrophicCode, InvalidGenerator, PunctureValidationFailed
from bicmb.trellis import (DEFAULT_PUNCTURES, CodeSpec, PunctureMatrix, build_encoder,
                           check_reference_free_distance, depuncture, encode, error_events,
                           free_distance, puncture_mask)

from conftest import code


def test_four_state_trellis_shape(code57):
    assert code57.num_states == 4
    assert code57.next_state.shape == (4, 2)
    # two branches leave the zero state: the self loop and the split
    assert sorted(code57.next_state[0]) == [0, 2]


def test_sixty_four_state_free_distance():
    tr = build_encoder(CodeSpec.from_octal("133,171"))
    assert tr.num_states == 64
    assert free_distance(tr) == 10


@pytest.mark.parametrize("gens,pu,expected", [
    ("5,7", None, 5), ("133,171", "2/3", 6), ("133,171", "3/4", 5), ("133,145,175", None, 15),
])
def test_free_distances(gens, pu, expected):
    tr, p = code(gens, pu)
    assert free_distance(tr, p) == expected


def test_free_distance_matches_event_search():
    tr = build_encoder(CodeSpec.from_octal("3,1"))
    brute = min(ev.weight for ev in error_events(tr, 20))
    assert free_distance(tr) == brute == 3


def test_zero_generator_rejected():
    with pytest.raises(InvalidGenerator):
        build_encoder(CodeSpec((0o7, 0), 3))


def test_oversized_generator_rejected():
    with pytest.raises(InvalidGenerator):
        build_encoder(CodeSpec((0o17, 0o5), 3))


def test_catastrophic_detected():
    with pytest.raises(CatastrophicCode):
        build_encoder(CodeSpec.from_octal("6,5"))


def test_hand_trace_of_unit_input():
    tr = build_encoder(CodeSpec.from_octal("5,7"))
    # first generator's output comes first in every section
    assert encode(tr, [1, 0, 0]).tolist() == [1, 1, 0, 1, 1, 1]
    swapped = build_encoder(CodeSpec.from_octal("7,5"))
    assert encode(swapped, [1, 0, 0]).tolist() == [1, 1, 1, 0, 1, 1]
    assert encode(tr, [1, 0, 0]).sum() == free_distance(tr)


def test_all_zero_input():
    tr = code("133,171")[0]
    assert not encode(tr, np.zeros(40, dtype=int), terminate=True).any()


def test_rate_three_quarter_length():
    tr, pu = code("133,171", "3/4")
    assert encode(tr, [1, 0, 1], pu).size == 4
    assert pu.effective_rate == pytest.approx(0.75)


def test_terminated_length(code57):
    assert encode(code57, [1, 1, 0, 1], terminate=True).size == 2 * (4 + 2)


@given(st.integers(1, 10).flatmap(lambda n: st.tuples(
    st.lists(st.integers(0, 1), min_size=n, max_size=n),
    st.lists(st.integers(0, 1), min_size=n, max_size=n))))
@settings(max_examples=60, deadline=None)
def test_linearity(pair):
    tr, pu = code("133,171", "2/3")
    a, b = (np.array(x) for x in pair)
    assert np.array_equal(encode(tr, a ^ b, pu), encode(tr, a, pu) ^ encode(tr, b, pu))


def test_linearity_exhaustive_short(code57):
    for n in range(1, 7):
        words = list(itertools.product([0, 1], repeat=n))
        for a in words[::3]:
            for b in words[::5]:
                a_, b_ = np.array(a), np.array(b)
                assert np.array_equal(encode(code57, a_ ^ b_), encode(code57, a_) ^ encode(code57, b_))


def test_depuncture_round_trip():
    tr, pu = code("133,171", "3/4")
    sections = 12
    idx = np.arange(sections * 2)
    mask = puncture_mask(pu, sections, 2).ravel()
    sent = idx[mask]
    back = depuncture(sent, pu, sections, 2, fill=-1)
    assert np.array_equal(back[mask], sent)
    assert np.all(back[~mask] == -1)


def test_puncture_parse_forms():
    assert PunctureMatrix.parse("3/4") is DEFAULT_PUNCTURES["3/4"]
    assert PunctureMatrix.parse("[[1,1],[1,0]]") == DEFAULT_PUNCTURES["2/3"]
    with pytest.raises(ValueError):
        PunctureMatrix(((1, 0), (0, 0)))


def test_reference_free_distance_guard():
    tr = code("133,171")[0]
    assert check_reference_free_distance(tr, DEFAULT_PUNCTURES["2/3"]) == 6
    with pytest.raises(PunctureValidationFailed):
        check_reference_free_distance(tr, PunctureMatrix(((1, 0, 1), (1, 1, 0))))


def test_event_positions_are_offsets(code57):
    events = list(error_events(code57, 6))
    assert sorted(ev.weight for ev in events) == [5, 6, 6]
    first = min(events, key=lambda e: e.weight)
    assert first.positions == (0, 1, 3, 4, 5)
