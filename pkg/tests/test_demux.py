import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bicmb.demux import (DemuxPattern, block_demux, build_location_table, design_demux,
                         rotating_demux, validate_distinct_symbols)
from bicmb.errors import BudgetExhausted, PeriodMismatch
from bicmb.spectrum import exact_q_max
from bicmb.trellis import free_distance

from conftest import code


def test_rotating_two_streams():
    p = rotating_demux(2, 2)
    assert p.assignment == (1, 2) and p.period_bits == 2


def test_rotating_three_streams():
    assert rotating_demux(3, 2).assignment == (1, 2, 3, 1, 2, 3)


def test_rotating_single_stream():
    assert set(rotating_demux(1, 2).assignment) == {1}


def test_block_pattern_period_18():
    p = block_demux(3, 6, 2)
    assert p.period_bits == 18
    assert p.assignment == (1,) * 6 + (2,) * 6 + (3,) * 6


def test_block_equivalences():
    assert block_demux(2, 1).assignment == rotating_demux(2, 2).assignment
    assert block_demux(3, 1).assignment == rotating_demux(3, 3).assignment


def test_block_period_mismatch():
    with pytest.raises(PeriodMismatch):
        block_demux(2, 3, n_c=4)


def test_unbalanced_pattern_rejected():
    with pytest.raises(PeriodMismatch):
        DemuxPattern(2, (1, 1, 2))
    with pytest.raises(ValueError):
        DemuxPattern(2, (1, 1, 1, 2))


@pytest.mark.parametrize("gens,S,expected", [("5,7", 4, 2), ("5,7", 2, 1), ("133,171", 3, 2)])
def test_design_reaches_floor(gens, S, expected):
    tr = code(gens)[0]
    pat = design_demux(tr, S, seed=0)
    assert exact_q_max(tr, pat) == expected
    counts = np.bincount(pat.assignment)[1:]
    assert len(set(counts)) == 1


def test_design_deterministic():
    tr = code("133,171")[0]
    assert design_demux(tr, 3, seed=4).assignment == design_demux(tr, 3, seed=4).assignment


def test_design_budget_exhausted():
    tr = code("5,7")[0]
    # two bits cannot be split evenly over three streams
    with pytest.raises(BudgetExhausted):
        design_demux(tr, 3, period_bits=2)


def test_identity_table_unrolls_rotating_pattern():
    t = build_location_table(rotating_demux(2, 2), None, m=2, L=4)
    assert [t.lookup(l) for l in range(4)] == [(0, 1, 0), (0, 2, 0), (0, 1, 1), (0, 2, 1)]


@given(st.integers(0, 2**32 - 1), st.sampled_from([(2, 2), (3, 2), (2, 4)]))
@settings(max_examples=25, deadline=None)
def test_table_is_bijection(seed, sm):
    S, m = sm
    t = build_location_table(rotating_demux(S, 2), seed, m=m, L=12)
    e = t.entries
    assert len({tuple(r) for r in e}) == S * 12 * m
    assert e[:, 0].max() == 11 and set(e[:, 1]) == set(range(1, S + 1)) and e[:, 2].max() == m - 1


def test_table_deterministic():
    tr, pu = code("133,171", "3/4")
    a = build_location_table(rotating_demux(3, 4), 9, 4, 60, tr, pu)
    b = build_location_table(rotating_demux(3, 4), 9, 4, 60, tr, pu)
    assert np.array_equal(a.entries, b.entries)


def test_identity_interleaver_violates_condition():
    tr = code("5,7")[0]
    t = build_location_table(rotating_demux(2, 2), None, m=2, L=64)
    assert not validate_distinct_symbols(t, tr, free_distance(tr))


def test_seeded_table_satisfies_condition():
    tr = code("133,171")[0]
    t = build_location_table(rotating_demux(3, 2), 42, m=4, L=1024, trellis=tr)
    assert validate_distinct_symbols(t, tr, free_distance(tr) + 4)


def test_depth_zero_is_vacuous():
    tr = code("5,7")[0]
    t = build_location_table(rotating_demux(2, 2), None, m=2, L=8)
    assert validate_distinct_symbols(t, tr, 0)
