from __future__ import annotations

import itertools
import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kingquery.core import (
    ArcOracle,
    InvalidParameterError,
    InvalidQueryError,
    RevealedDigraph,
    Tournament,
    adversary_answer,
    control_count,
    control_counts,
    control_fraction,
    format_tournament,
    generate_tournament,
    is_king,
    mod_vertex,
    pair_count,
    parse_tournament,
    query,
    revealed_control_lower_bound,
    second_out_neighborhood,
)


def all_tournaments(n):
    for bits in itertools.product((False, True), repeat=pair_count(n)):
        yield Tournament(n, np.array(bits, dtype=bool))


def naive_second_out(t, v):
    # plain BFS to depth two using only beats()
    level1 = {u for u in range(t.n) if u != v and t.beats(v, u)}
    level2 = {w for u in level1 for w in range(t.n) if w != u and t.beats(u, w)}
    return {v} | level1 | level2


# -- generators ---------------------------------------------------------------


def test_transitive_three():
    t = generate_tournament("transitive", 3)
    assert sorted(t.arcs()) == [(0, 1), (0, 2), (1, 2)]


def test_rotational_three_is_cycle():
    t = generate_tournament("rotational", 3)
    assert set(t.arcs()) == {(0, 1), (1, 2), (2, 0)}


def test_rotational_even_rejected():
    with pytest.raises(InvalidParameterError):
        generate_tournament("rotational", 4)


def test_rotational_is_regular():
    t = generate_tournament("rotational", 9)
    assert t.out_degrees().tolist() == [4] * 9


def test_random_is_deterministic():
    a = generate_tournament("uniform_random", 5, seed=7)
    b = generate_tournament("random", 5, seed=7)
    assert a == b
    assert a.bits.tobytes() == b.bits.tobytes()
    assert generate_tournament("random", 30, seed=8) != generate_tournament("random", 30, seed=9)


@given(st.integers(1, 25), st.integers(0, 2**32 - 1))
@settings(max_examples=50, deadline=None)
def test_tournament_invariants(n, seed):
    t = generate_tournament("random", n, seed)
    adj = t.adjacency
    assert not adj.diagonal().any()
    assert np.array_equal(adj | adj.T, ~np.eye(n, dtype=bool))
    assert not (adj & adj.T).any()
    assert int(t.out_degrees().sum()) == n * (n - 1) // 2


def test_text_format_roundtrip():
    t = generate_tournament("random", 6, seed=3)
    text = format_tournament(t)
    lines = text.splitlines()
    assert lines[0] == "n=6"
    pairs = [tuple(sorted(map(int, ln.split()))) for ln in lines[1:]]
    assert pairs == sorted(itertools.combinations(range(6), 2))
    assert parse_tournament(text) == t


def test_from_arcs_rejects_incomplete():
    with pytest.raises(InvalidParameterError):
        Tournament.from_arcs(3, [(0, 1), (1, 2)])


# -- queries ------------------------------------------------------------------


def test_query_memoised():
    oracle = ArcOracle.fixed(generate_tournament("random", 6, seed=1))
    first = query(oracle, 2, 4)
    assert query(oracle, 4, 2) == first
    assert oracle.count == 1


def test_query_transitive():
    oracle = ArcOracle.fixed(generate_tournament("transitive", 4))
    assert query(oracle, 0, 1) == (0, 1)
    assert query(oracle, 3, 1) == (1, 3)


def test_query_all_pairs():
    oracle = ArcOracle.fixed(generate_tournament("random", 4, seed=0))
    for u, v in itertools.combinations(range(4), 2):
        query(oracle, u, v)
    assert oracle.count == 6
    assert oracle.ledger.queried == set(itertools.combinations(range(4), 2))


def test_self_query_rejected():
    oracle = ArcOracle.fixed(generate_tournament("random", 4, seed=0))
    with pytest.raises(InvalidQueryError):
        query(oracle, 2, 2)


@given(st.lists(st.tuples(st.integers(0, 9), st.integers(0, 9)).filter(lambda p: p[0] != p[1]),
                max_size=80))
@settings(max_examples=60, deadline=None)
def test_ledger_counts_distinct_pairs(pairs):
    t = generate_tournament("random", 10, seed=11)
    oracle = ArcOracle.fixed(t)
    for u, v in pairs:
        arc = oracle.query(u, v)
        assert t.beats(*arc)
    distinct = {tuple(sorted(p)) for p in pairs}
    assert oracle.count == len(distinct) == oracle.revealed.arc_count
    assert oracle.count <= pair_count(10)
    for a, b in oracle.revealed.arcs():
        assert t.beats(a, b)


# -- ground truth -------------------------------------------------------------


def test_second_out_cycle():
    t = generate_tournament("rotational", 3)
    assert second_out_neighborhood(t, 0) == {0, 1, 2}


def test_second_out_transitive():
    t = generate_tournament("transitive", 4)
    assert second_out_neighborhood(t, 2) == {2, 3}


def test_second_out_matches_bfs():
    t = generate_tournament("random", 6, seed=7)
    for v in range(6):
        assert second_out_neighborhood(t, v) == naive_second_out(t, v)


def test_control_counts_vectorised_matches_bfs():
    t = generate_tournament("random", 40, seed=2)
    expected = [len(naive_second_out(t, v)) for v in range(40)]
    assert control_counts(t).tolist() == expected


def test_control_fraction_examples():
    t = generate_tournament("transitive", 4)
    assert control_fraction(t, 0) == 1
    assert control_fraction(t, 3) == Fraction(1, 4)
    c = generate_tournament("rotational", 3)
    assert all(control_fraction(c, v) == 1 for v in range(3))


def test_is_king_examples():
    assert is_king(generate_tournament("transitive", 1), 0)
    t = generate_tournament("transitive", 4)
    assert [is_king(t, v) for v in range(4)] == [True, False, False, False]
    c = generate_tournament("rotational", 3)
    assert all(is_king(c, v) for v in range(3))


def test_mod_vertex_examples():
    assert mod_vertex(generate_tournament("transitive", 5)) == 0
    assert mod_vertex(generate_tournament("rotational", 3)) == 0


@pytest.mark.parametrize("n", range(1, 7))
def test_mod_is_king_exhaustive(n):
    for t in all_tournaments(n):
        counts = control_counts(t)
        assert counts[mod_vertex(t)] == n
        assert (counts == n).any()


def test_mod_is_king_random():
    rng = random.Random(5)
    for i in range(200):
        n = rng.randint(1, 120)
        t = generate_tournament("random", n, seed=i)
        assert is_king(t, mod_vertex(t))


# -- revealed bounds ----------------------------------------------------------


def test_revealed_bound_empty():
    assert revealed_control_lower_bound(RevealedDigraph(5), 3) == 1


def test_revealed_bound_full_reveal():
    t = generate_tournament("random", 9, seed=4)
    oracle = ArcOracle.fixed(t)
    oracle.query_within(range(9))
    for v in range(9):
        assert revealed_control_lower_bound(oracle.revealed, v) == control_count(t, v)


def test_revealed_bound_half_reveal():
    t = generate_tournament("random", 10, seed=7)
    oracle = ArcOracle.fixed(t)
    pairs = list(itertools.combinations(range(10), 2))
    random.Random(7).shuffle(pairs)
    oracle.query_pairs(pairs[: len(pairs) // 2])
    for v in range(10):
        assert revealed_control_lower_bound(oracle.revealed, v) <= len(naive_second_out(t, v))


# -- adversary ----------------------------------------------------------------


def test_adversary_first_query():
    oracle = ArcOracle.greedy_adversary(6)
    assert oracle.query(0, 1) == (0, 1)


def test_adversary_stronger_vertex_receives():
    state = RevealedDigraph(6)
    for w in (1, 2, 3):
        state._add(0, w)
    assert adversary_answer(state, 0, 5) == (5, 0)
    assert adversary_answer(state, 5, 0) == (5, 0)


@pytest.mark.parametrize("n", [2, 5, 12])
def test_adversary_full_transcript_is_tournament(n):
    oracle = ArcOracle.greedy_adversary(n)
    pairs = list(itertools.combinations(range(n), 2))
    random.Random(n).shuffle(pairs)
    oracle.query_pairs(pairs)
    t = Tournament.from_arcs(n, oracle.ledger.transcript)
    assert int(t.out_degrees().sum()) == pair_count(n)


def test_adversary_replay_is_identical():
    pairs = list(itertools.combinations(range(9), 2))
    random.Random(1).shuffle(pairs)
    a, b = ArcOracle.greedy_adversary(9), ArcOracle.greedy_adversary(9)
    a.query_pairs(pairs)
    b.query_pairs(pairs)
    assert a.ledger.transcript == b.ledger.transcript
