"""Constructive versions of the basic out-degree facts about tournaments."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .core import InternalContradictionError, InvalidParameterError, Tournament


def extract_high_outdegree(t: Tournament, alpha: Fraction) -> list[int]:
    """Run the removal process with threshold ``alpha * m / 2``.

    Vertices are removed smallest index first while some survivor has
    out-degree at least the threshold in ``t``. The removed vertices number at
    least ``(1 - alpha) * m``.
    """
    alpha = Fraction(alpha)
    m = t.n
    if not 0 <= alpha <= 1:
        raise InvalidParameterError(f"alpha must lie in [0, 1], got {alpha}")
    am = alpha * m
    if am.denominator != 1 or am.numerator % 2:
        raise InvalidParameterError(f"alpha*m must be an even integer, got {am}")
    threshold = am.numerator // 2

    degrees = t.out_degrees()
    survivors = list(range(m))
    removed: list[int] = []
    while True:
        # full-tournament degrees never change, so the first qualifying survivor
        # is the smallest-index one
        pick = next((v for v in survivors if degrees[v] >= threshold), None)
        if pick is None:
            break
        survivors.remove(pick)
        removed.append(pick)
    return removed


@dataclass(frozen=True)
class BipartiteOrientation:
    """Orientation of the complete bipartite graph between ``side0`` and ``side1``.

    ``forward[a, b]`` is true iff ``side0[a] -> side1[b]``.
    """

    side0: tuple[int, ...]
    side1: tuple[int, ...]
    forward: np.ndarray

    def __post_init__(self):
        if len(self.side0) != len(self.side1):
            raise InvalidParameterError("sides must have equal size")
        if set(self.side0) & set(self.side1):
            raise InvalidParameterError("sides must be disjoint")
        if self.forward.shape != (len(self.side0), len(self.side1)):
            raise InvalidParameterError("forward matrix shape does not match the sides")

    @property
    def m(self) -> int:
        return len(self.side0)

    @classmethod
    def from_tournament(cls, t: Tournament, side0: Sequence[int],
                        side1: Sequence[int]) -> BipartiteOrientation:
        s0, s1 = tuple(side0), tuple(side1)
        fwd = t.adjacency[np.ix_(s0, s1)].copy()
        return cls(s0, s1, fwd)

    @classmethod
    def random(cls, m: int, rng: np.random.Generator) -> BipartiteOrientation:
        return cls(tuple(range(m)), tuple(range(m, 2 * m)),
                   rng.integers(0, 2, size=(m, m)).astype(bool))

    def cross_out_degree(self, side: int, index: int) -> int:
        if side == 0:
            return int(self.forward[index].sum())
        return int((~self.forward[:, index]).sum())


def bipartite_extract(b: BipartiteOrientation) -> tuple[int, list[int]]:
    """Return ``(i, vertices)``: at least ``m/2 + 1`` vertices of side ``i``, each
    beating at least ``m/4`` vertices of the other side.

    Vertices are removed (smallest label first) while some survivor beats at
    least ``m/4`` surviving vertices across; the side that lost more than half
    its vertices is reported, side 0 preferred.
    """
    m = b.m
    if m == 0 or m % 4:
        raise InvalidParameterError(f"m must be a positive multiple of 4, got {m}")
    quarter = m // 4
    fwd = b.forward
    alive0 = np.ones(m, dtype=bool)
    alive1 = np.ones(m, dtype=bool)
    # position of each label: (side, index)
    order = sorted([(lab, 0, i) for i, lab in enumerate(b.side0)]
                   + [(lab, 1, i) for i, lab in enumerate(b.side1)])
    removed: tuple[list[int], list[int]] = ([], [])

    while True:
        deg0 = (fwd & alive1[None, :]).sum(axis=1)
        deg1 = (~fwd & alive0[:, None]).sum(axis=0)
        pick = None
        for lab, side, i in order:
            if side == 0 and alive0[i] and deg0[i] >= quarter:
                pick = (lab, side, i)
                break
            if side == 1 and alive1[i] and deg1[i] >= quarter:
                pick = (lab, side, i)
                break
        if pick is None:
            break
        lab, side, i = pick
        (alive0 if side == 0 else alive1)[i] = False
        removed[side].append(lab)

    for side in (0, 1):
        if len(removed[side]) >= m // 2 + 1:
            return side, removed[side]
    raise InternalContradictionError(
        f"removal process left both sides with at least m/2 survivors (m={m})"
    )


def pivot_scan(adj: np.ndarray, s0: Sequence[int], s1: Sequence[int],
               threshold: int) -> int | None:
    """Smallest vertex of ``s0 + s1`` beating ``threshold`` vertices on each side."""
    s0, s1 = list(s0), list(s1)
    for v in sorted(s0 + s1):
        if adj[v, s0].sum() >= threshold and adj[v, s1].sum() >= threshold:
            return v
    return None


def find_bipartition_pivot(t: Tournament, s0: Sequence[int], s1: Sequence[int],
                           *, require_divisible: bool = True) -> int:
    """Smallest vertex ``v`` with ``d+(v, s0) >= m/4`` and ``d+(v, s1) >= m/4``.

    With ``require_divisible=False`` the threshold becomes ``ceil(m/4)`` for any
    ``m``; existence is then no longer guaranteed.
    """
    s0, s1 = list(s0), list(s1)
    m = len(s0)
    if len(s1) != m or set(s0) & set(s1) or set(s0) | set(s1) != set(range(t.n)):
        raise InvalidParameterError("s0, s1 must split the vertex set into equal halves")
    if require_divisible and (m == 0 or m % 4):
        raise InvalidParameterError(f"m must be a positive multiple of 4, got {m}")
    v = pivot_scan(t.adjacency, s0, s1, math.ceil(m / 4))
    if v is None:
        raise InternalContradictionError(f"no bipartition pivot found (m={m})")
    return v
