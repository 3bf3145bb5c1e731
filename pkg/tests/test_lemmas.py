from __future__ import annotations

import itertools
from fractions import Fraction

import numpy as np
import pytest

from kingquery.core import InvalidParameterError, Tournament, generate_tournament, pair_count
from kingquery.lemmas import (
    BipartiteOrientation,
    bipartite_extract,
    extract_high_outdegree,
    find_bipartition_pivot,
)


def check_extract(t, alpha, result):
    m = t.n
    deg = [sum(t.beats(v, u) for u in range(m) if u != v) for v in range(m)]
    assert len(set(result)) == len(result)
    assert len(result) >= (1 - alpha) * m
    assert all(deg[v] >= alpha * m / 2 for v in result)


def test_extract_transitive():
    t = generate_tournament("transitive", 4)
    result = extract_high_outdegree(t, Fraction(1, 2))
    assert {0, 1} <= set(result)
    check_extract(t, Fraction(1, 2), result)


def test_extract_alpha_zero_returns_everything():
    t = generate_tournament("random", 7, seed=3)
    assert sorted(extract_high_outdegree(t, 0)) == list(range(7))


@pytest.mark.parametrize("alpha", [Fraction(1, 3), Fraction(2, 3)])
def test_extract_exhaustive_m6(alpha):
    for bits in itertools.product((False, True), repeat=pair_count(6)):
        t = Tournament(6, np.array(bits))
        check_extract(t, alpha, extract_high_outdegree(t, alpha))


@pytest.mark.parametrize("alpha", [Fraction(1, 3), Fraction(1, 2), 2])
def test_extract_rejects_bad_alpha(alpha):
    t = generate_tournament("random", 5, seed=0)
    with pytest.raises(InvalidParameterError):
        extract_high_outdegree(t, alpha)


def check_bipartite(b, side, result):
    m = b.m
    own = b.side0 if side == 0 else b.side1
    assert set(result) <= set(own)
    assert len(result) >= m // 2 + 1
    index = {lab: i for i, lab in enumerate(own)}
    for v in result:
        i = index[v]
        cross = sum(b.forward[i, j] for j in range(m)) if side == 0 else \
            sum(not b.forward[j, i] for j in range(m))
        assert cross >= m / 4


def test_bipartite_one_way():
    b = BipartiteOrientation((0, 1, 2, 3), (4, 5, 6, 7), np.ones((4, 4), dtype=bool))
    assert bipartite_extract(b) == (0, [0, 1, 2, 3])
    b = BipartiteOrientation((0, 1, 2, 3), (4, 5, 6, 7), np.zeros((4, 4), dtype=bool))
    side, result = bipartite_extract(b)
    assert side == 1 and sorted(result) == [4, 5, 6, 7]


def test_bipartite_rejects_m_not_multiple_of_four():
    with pytest.raises(InvalidParameterError):
        bipartite_extract(BipartiteOrientation((0, 1), (2, 3), np.ones((2, 2), dtype=bool)))


def test_bipartite_random():
    rng = np.random.default_rng(2)
    for trial in range(500):
        m = int(rng.choice([4, 8, 12]))
        b = BipartiteOrientation.random(m, rng)
        side, result = bipartite_extract(b)
        check_bipartite(b, side, result)


def test_pivot_dominating_vertex():
    adj = generate_tournament("random", 8, seed=5).adjacency.copy()
    adj[0, 1:] = True
    adj[1:, 0] = False
    t = Tournament.from_adjacency(adj)
    assert t.out_degrees()[0] == 7
    assert find_bipartition_pivot(t, [0, 2, 4, 6], [1, 3, 5, 7]) == 0


def test_pivot_transitive():
    t = generate_tournament("transitive", 8)
    assert find_bipartition_pivot(t, range(4), range(4, 8)) == 0


def test_pivot_rejects_unbalanced():
    t = generate_tournament("transitive", 8)
    with pytest.raises(InvalidParameterError):
        find_bipartition_pivot(t, range(3), range(3, 8))


def test_pivot_random():
    rng = np.random.default_rng(9)
    for trial in range(500):
        m = int(rng.choice([4, 8, 12]))
        t = generate_tournament("random", 2 * m, seed=trial)
        perm = rng.permutation(2 * m)
        s0, s1 = sorted(perm[:m].tolist()), sorted(perm[m:].tolist())
        v = find_bipartition_pivot(t, s0, s1)
        assert sum(t.beats(v, u) for u in s0 if u != v) >= m / 4
        assert sum(t.beats(v, u) for u in s1 if u != v) >= m / 4
