"""Tournaments, query oracles with exact accounting, and ground-truth verifiers.

Orientation storage is one bit per unordered pair in row-major upper-triangular
order: bit ``k`` for the pair ``(u, v)`` with ``u < v`` is set iff the arc runs
``u -> v``.

The ground-truth helpers (:func:`second_out_neighborhood`, :func:`is_king`, ...)
read the tournament directly and never touch a :class:`QueryLedger`; strategies
learn orientations only through :func:`query`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Iterator

import numpy as np

Arc = tuple[int, int]

KINDS = ("random", "transitive", "rotational")


class InvalidParameterError(ValueError):
    pass


class InvalidQueryError(ValueError):
    pass


class InternalContradictionError(RuntimeError):
    """A lemma guarantee failed to materialise; only reachable through a bug
    or a violated precondition."""


def pair_count(n: int) -> int:
    return n * (n - 1) // 2


def pair_index(n: int, u: int, v: int) -> int:
    if u > v:
        u, v = v, u
    return u * n - u * (u + 1) // 2 + (v - u - 1)


class Tournament:
    """Immutable orientation of the complete graph on ``range(n)``."""

    def __init__(self, n: int, bits: np.ndarray):
        if n < 1:
            raise InvalidParameterError(f"n must be >= 1, got {n}")
        bits = np.asarray(bits, dtype=bool).copy()
        if bits.shape != (pair_count(n),):
            raise InvalidParameterError(
                f"expected {pair_count(n)} orientation bits for n={n}, got {bits.shape}"
            )
        bits.setflags(write=False)
        self.n = n
        self.bits = bits
        self._adj: np.ndarray | None = None

    def beats(self, u: int, v: int) -> bool:
        """True iff the arc ``u -> v`` is present."""
        if u == v:
            raise InvalidQueryError(f"no arc between {u} and itself")
        b = bool(self.bits[pair_index(self.n, u, v)])
        return b if u < v else not b

    def arc(self, u: int, v: int) -> Arc:
        return (u, v) if self.beats(u, v) else (v, u)

    @property
    def adjacency(self) -> np.ndarray:
        """Read-only boolean matrix ``A`` with ``A[u, v]`` iff ``u -> v``."""
        if self._adj is None:
            adj = np.zeros((self.n, self.n), dtype=bool)
            iu, ju = np.triu_indices(self.n, 1)
            adj[iu[self.bits], ju[self.bits]] = True
            adj[ju[~self.bits], iu[~self.bits]] = True
            adj.setflags(write=False)
            self._adj = adj
        return self._adj

    def out_degrees(self) -> np.ndarray:
        return self.adjacency.sum(axis=1)

    def arcs(self) -> Iterator[Arc]:
        """All arcs, ordered lexicographically by ``(min, max)`` of the pair."""
        iu, ju = np.triu_indices(self.n, 1)
        for u, v, b in zip(iu.tolist(), ju.tolist(), self.bits.tolist()):
            yield (u, v) if b else (v, u)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Tournament):
            return NotImplemented
        return self.n == other.n and np.array_equal(self.bits, other.bits)

    def __hash__(self) -> int:
        return hash((self.n, self.bits.tobytes()))

    def __repr__(self) -> str:
        return f"Tournament(n={self.n})"

    @classmethod
    def from_adjacency(cls, adj: np.ndarray) -> Tournament:
        adj = np.asarray(adj, dtype=bool)
        n = adj.shape[0]
        iu, ju = np.triu_indices(n, 1)
        fwd, bwd = adj[iu, ju], adj[ju, iu]
        if np.any(np.diag(adj)) or not np.all(fwd ^ bwd):
            raise InvalidParameterError("adjacency is not a tournament")
        return cls(n, fwd)

    @classmethod
    def from_arcs(cls, n: int, arcs: Iterable[Arc]) -> Tournament:
        bits = np.zeros(pair_count(n), dtype=bool)
        seen = np.zeros(pair_count(n), dtype=bool)
        for u, v in arcs:
            if u == v or not (0 <= u < n and 0 <= v < n):
                raise InvalidParameterError(f"bad arc {u}->{v} for n={n}")
            k = pair_index(n, u, v)
            if seen[k]:
                raise InvalidParameterError(f"pair {{{u},{v}}} oriented twice")
            seen[k] = True
            bits[k] = u < v
        if not seen.all():
            raise InvalidParameterError("arc list does not cover every pair")
        return cls(n, bits)


def generate_tournament(kind: str, n: int, seed: int | None = None) -> Tournament:
    """Build a test instance.

    ``random`` (alias ``uniform_random``) orients every pair by a fair coin
    drawn from ``numpy.random.default_rng(seed)``; ``transitive`` has ``u -> v``
    for all ``u < v``; ``rotational`` (odd ``n``) has ``i`` beating
    ``i+1, ..., i+(n-1)/2`` mod ``n``.
    """
    if n < 1:
        raise InvalidParameterError(f"n must be >= 1, got {n}")
    size = pair_count(n)
    if kind in ("random", "uniform_random"):
        if seed is None:
            raise InvalidParameterError("uniform_random needs a seed")
        rng = np.random.default_rng(seed)
        bits = rng.integers(0, 2, size=size, dtype=np.uint8).astype(bool)
    elif kind == "transitive":
        bits = np.ones(size, dtype=bool)
    elif kind == "rotational":
        if n % 2 == 0:
            raise InvalidParameterError(f"rotational tournament needs odd n, got {n}")
        iu, ju = np.triu_indices(n, 1)
        bits = (ju - iu) <= (n - 1) // 2
    else:
        raise InvalidParameterError(f"unknown tournament kind {kind!r}")
    return Tournament(n, bits)


# ---------------------------------------------------------------------------
# Ground-truth verifiers (never billed)


def _check_vertex(n: int, v: int) -> None:
    if not 0 <= v < n:
        raise InvalidParameterError(f"vertex {v} out of range for n={n}")


def _closed_second_out(adj: np.ndarray, v: int) -> np.ndarray:
    out = adj[v]
    reach = out | adj[out].any(axis=0)
    reach = reach.copy()
    reach[v] = True
    return reach


def second_out_neighborhood(t: Tournament, v: int) -> frozenset[int]:
    _check_vertex(t.n, v)
    return frozenset(np.flatnonzero(_closed_second_out(t.adjacency, v)).tolist())


def control_count(t: Tournament, v: int) -> int:
    _check_vertex(t.n, v)
    return int(_closed_second_out(t.adjacency, v).sum())


def control_counts(t: Tournament) -> np.ndarray:
    """``|N++[v]|`` for every vertex at once."""
    a = t.adjacency.astype(np.int32)
    reach = t.adjacency | ((a @ a) > 0) | np.eye(t.n, dtype=bool)
    return reach.sum(axis=1)


def control_fraction(t: Tournament, v: int) -> Fraction:
    return Fraction(control_count(t, v), t.n)


def is_king(t: Tournament, v: int) -> bool:
    return control_count(t, v) == t.n


def mod_vertex(t: Tournament) -> int:
    """Maximum out-degree vertex, smallest index on ties."""
    return int(np.argmax(t.out_degrees()))


# ---------------------------------------------------------------------------
# Query channel


class RevealedDigraph:
    """The arcs answered so far. Mutated only by :class:`ArcOracle`."""

    def __init__(self, n: int):
        self.n = n
        self.adjacency = np.zeros((n, n), dtype=bool)
        self.out_degree = np.zeros(n, dtype=np.int64)

    def _add(self, u: int, v: int) -> None:
        self.adjacency[u, v] = True
        self.out_degree[u] += 1

    def has_arc(self, u: int, v: int) -> bool:
        return bool(self.adjacency[u, v])

    def arcs(self) -> list[Arc]:
        us, vs = np.nonzero(self.adjacency)
        return list(zip(us.tolist(), vs.tolist()))

    @property
    def arc_count(self) -> int:
        return int(self.out_degree.sum())


def revealed_control_lower_bound(r: RevealedDigraph, v: int) -> int:
    """``|N++[v]|`` inside the revealed sub-digraph."""
    _check_vertex(r.n, v)
    return int(_closed_second_out(r.adjacency, v).sum())


def revealed_mod_vertex(r: RevealedDigraph) -> int:
    return int(np.argmax(r.out_degree))


@dataclass
class QueryLedger:
    n: int
    answers: dict[tuple[int, int], Arc] = field(default_factory=dict)

    @property
    def count(self) -> int:
        return len(self.answers)

    @property
    def queried(self) -> set[tuple[int, int]]:
        return set(self.answers)

    @property
    def transcript(self) -> list[Arc]:
        """Answered arcs in the order their pairs were first queried."""
        return list(self.answers.values())


def adversary_answer(state: RevealedDigraph, u: int, v: int) -> Arc:
    """Greedy obscurer: the arc points into whichever endpoint currently has the
    larger revealed out-degree; on a tie it points into the larger index."""
    du, dv = state.out_degree[u], state.out_degree[v]
    if du == dv:
        return (u, v) if u < v else (v, u)
    return (u, v) if dv > du else (v, u)


class ArcOracle:
    """Answers arc queries, memoising and billing each unordered pair once."""

    def __init__(self, n: int, answer: Callable[[RevealedDigraph, int, int], Arc],
                 tournament: Tournament | None = None):
        self.n = n
        self._answer = answer
        self.tournament = tournament
        self.ledger = QueryLedger(n)
        self.revealed = RevealedDigraph(n)

    @classmethod
    def fixed(cls, t: Tournament) -> ArcOracle:
        return cls(t.n, lambda _state, u, v: t.arc(u, v), tournament=t)

    @classmethod
    def greedy_adversary(cls, n: int) -> ArcOracle:
        return cls(n, adversary_answer)

    @property
    def is_fixed(self) -> bool:
        return self.tournament is not None

    @property
    def count(self) -> int:
        return self.ledger.count

    def query(self, u: int, v: int) -> Arc:
        if u == v:
            raise InvalidQueryError(f"cannot query the pair ({u}, {v})")
        if not (0 <= u < self.n and 0 <= v < self.n):
            raise InvalidQueryError(f"pair ({u}, {v}) out of range for n={self.n}")
        key = (u, v) if u < v else (v, u)
        arc = self.ledger.answers.get(key)
        if arc is None:
            arc = self._answer(self.revealed, u, v)
            self.ledger.answers[key] = arc
            self.revealed._add(*arc)
        return arc

    def query_pairs(self, pairs: Iterable[tuple[int, int]]) -> None:
        for u, v in pairs:
            self.query(u, v)

    def query_within(self, vertices: Iterable[int]) -> None:
        vs = sorted(set(vertices))
        for i, u in enumerate(vs):
            for v in vs[i + 1:]:
                self.query(u, v)

    def query_between(self, left: Iterable[int], right: Iterable[int]) -> None:
        right = sorted(set(right))
        for u in sorted(set(left)):
            for v in right:
                self.query(u, v)


def query(oracle: ArcOracle, u: int, v: int) -> Arc:
    return oracle.query(u, v)


# ---------------------------------------------------------------------------
# Text format: ``n=<int>`` then one ``u v`` line per pair, meaning ``u -> v``.


def format_tournament(t: Tournament) -> str:
    lines = [f"n={t.n}"]
    lines.extend(f"{u} {v}" for u, v in t.arcs())
    return "\n".join(lines) + "\n"


def parse_tournament(text: str) -> Tournament:
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not lines or not lines[0].startswith("n="):
        raise InvalidParameterError("tournament file must start with 'n=<int>'")
    n = int(lines[0][2:])
    arcs = []
    for ln in lines[1:]:
        u, v = ln.split()
        arcs.append((int(u), int(v)))
    return Tournament.from_arcs(n, arcs)


def write_tournament(t: Tournament, path) -> None:
    with open(path, "w") as fh:
        fh.write(format_tournament(t))


def read_tournament(path) -> Tournament:
    with open(path) as fh:
        return parse_tournament(fh.read())
