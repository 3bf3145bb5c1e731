"""Random template graphs: the non-adaptive first round of queries.

A template graph on ``[n]`` is sampled from G(n, p) with
``p = (2 ln n + 2) / (kappa * n^(2/3))``. Its defining property is that any two
disjoint vertex sets of size ``ceil(kappa * n^(2/3))`` are joined by an edge;
:func:`audit_template` checks that property exhaustively or by sampling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .core import ArcOracle, InvalidParameterError, pair_count
from .sizes import cover_set_size, tile_size

DEFAULT_EXHAUSTIVE_CUTOFF = 10**6


@dataclass(frozen=True)
class TemplateParams:
    n: int
    kappa: Fraction
    seed: int

    def __post_init__(self):
        object.__setattr__(self, "kappa", Fraction(self.kappa))
        if self.n < 1:
            raise InvalidParameterError(f"n must be >= 1, got {self.n}")
        if not 0 < self.kappa < 1:
            raise InvalidParameterError(f"kappa must lie in (0, 1), got {self.kappa}")

    @property
    def p(self) -> float:
        if self.n < 2:
            return 1.0
        raw = (2 * math.log(self.n) + 2) / (float(self.kappa) * self.n ** (2 / 3))
        return min(1.0, raw)

    @property
    def s(self) -> int:
        return tile_size(self.n)

    @property
    def set_size(self) -> int:
        return cover_set_size(self.n, self.kappa)


class TemplateGraph:
    """Undirected graph on ``range(n)``; edges kept as lexicographically sorted
    ``(u, v)`` arrays with ``u < v``."""

    def __init__(self, n: int, us, vs, params: TemplateParams | None = None):
        us = np.asarray(us, dtype=np.int64)
        vs = np.asarray(vs, dtype=np.int64)
        if us.shape != vs.shape:
            raise InvalidParameterError("edge endpoint arrays differ in length")
        lo, hi = np.minimum(us, vs), np.maximum(us, vs)
        if np.any(lo == hi):
            raise InvalidParameterError("template graph cannot contain self-loops")
        if lo.size and (lo.min() < 0 or hi.max() >= n):
            raise InvalidParameterError("edge endpoint out of range")
        keys = lo * n + hi
        order = np.argsort(keys, kind="stable")
        if np.any(np.diff(keys[order]) == 0):
            raise InvalidParameterError("duplicate template edge")
        self.n = n
        self.us = lo[order]
        self.vs = hi[order]
        self.params = params
        self._adj: np.ndarray | None = None

    def __len__(self) -> int:
        return int(self.us.size)

    @property
    def edges(self) -> set[tuple[int, int]]:
        return set(zip(self.us.tolist(), self.vs.tolist()))

    def edge_list(self) -> list[tuple[int, int]]:
        return list(zip(self.us.tolist(), self.vs.tolist()))

    @property
    def adjacency(self) -> np.ndarray:
        if self._adj is None:
            adj = np.zeros((self.n, self.n), dtype=bool)
            adj[self.us, self.vs] = True
            adj[self.vs, self.us] = True
            adj.setflags(write=False)
            self._adj = adj
        return self._adj

    @classmethod
    def complete(cls, n: int) -> TemplateGraph:
        iu, ju = np.triu_indices(n, 1)
        return cls(n, iu, ju)

    @classmethod
    def empty(cls, n: int) -> TemplateGraph:
        return cls(n, [], [])


def generate_template(params: TemplateParams) -> TemplateGraph:
    """Sample G(n, p); pair ``k`` (row-major upper triangle) is kept iff the
    ``k``-th uniform draw of ``default_rng(seed)`` falls below ``p``."""
    n = params.n
    iu, ju = np.triu_indices(n, 1)
    p = params.p
    if p >= 1.0:
        keep = np.ones(pair_count(n), dtype=bool)
    else:
        rng = np.random.default_rng(params.seed)
        keep = rng.random(pair_count(n)) < p
    return TemplateGraph(n, iu[keep], ju[keep], params=params)


def edge_budget(params: TemplateParams) -> int:
    """The Chernoff cutoff ``2m`` with ``m = (2 ln n + 2) n^(4/3) / kappa``."""
    n = params.n
    m = (2 * math.log(n) + 2) * n ** (4 / 3) / float(params.kappa)
    return math.floor(2 * m)


@dataclass(frozen=True)
class AuditReport:
    trials: int
    violations: int
    mode: str
    set_size: int

    @property
    def passed(self) -> bool:
        return self.violations == 0


def disjoint_pair_count(n: int, k: int) -> int:
    """Unordered pairs of disjoint ``k``-subsets of ``[n]``."""
    if 2 * k > n:
        return 0
    return math.comb(n, k) * math.comb(n - k, k) // 2


def _exhaustive_violations(adj: np.ndarray, k: int) -> tuple[int, int]:
    # Each unordered pair {H1, H2} is visited once with min(H1) < min(H2).
    # For fixed H1, the edge-free partners are the k-subsets of candidates that
    # avoid N(H1), so they can be counted instead of enumerated.
    from itertools import combinations

    n = adj.shape[0]
    trials = violations = 0
    for h1 in combinations(range(n), k):
        cand = np.ones(n, dtype=bool)
        cand[: h1[0] + 1] = False
        cand[list(h1)] = False
        total = int(cand.sum())
        free = int((cand & ~adj[list(h1)].any(axis=0)).sum())
        trials += math.comb(total, k)
        violations += math.comb(free, k)
    return trials, violations


def audit_template(g: TemplateGraph, kappa: Fraction, trials: int, seed: int,
                   exhaustive_cutoff: int = DEFAULT_EXHAUSTIVE_CUTOFF,
                   batch: int = 1000) -> AuditReport:
    """Count disjoint ``ceil(kappa n^(2/3))``-set pairs with no crossing edge."""
    n = g.n
    k = cover_set_size(n, Fraction(kappa))
    if k < 1:
        raise InvalidParameterError("kappa * n^(2/3) rounds up to zero")
    if 2 * k > n:
        return AuditReport(trials=0, violations=0, mode="exhaustive", set_size=k)
    adj = g.adjacency
    if disjoint_pair_count(n, k) <= exhaustive_cutoff:
        t, v = _exhaustive_violations(adj, k)
        return AuditReport(trials=t, violations=v, mode="exhaustive", set_size=k)

    rng = np.random.default_rng(seed)
    violations = 0
    done = 0
    while done < trials:
        b = min(batch, trials - done)
        keys = rng.random((b, n))
        pick = np.argpartition(keys, 2 * k - 1, axis=1)[:, : 2 * k]
        # shuffle the picked block uniformly by sorting on its own keys
        pick = np.take_along_axis(
            pick, np.argsort(np.take_along_axis(keys, pick, axis=1), axis=1), axis=1)
        h1, h2 = pick[:, :k], pick[:, k:]
        crossing = adj[h1[:, :, None], h2[:, None, :]].any(axis=(1, 2))
        violations += int((~crossing).sum())
        done += b
    return AuditReport(trials=trials, violations=violations, mode="sampled", set_size=k)


class OrientedTemplate:
    """The template's edges with orientations as answered by an oracle.

    ``out[u, v]`` is true iff the template edge ``{u, v}`` was answered ``u -> v``.
    """

    def __init__(self, n: int, arcs: list[tuple[int, int]]):
        self.n = n
        self.arcs = arcs
        out = np.zeros((n, n), dtype=bool)
        if arcs:
            a = np.asarray(arcs, dtype=np.int64)
            out[a[:, 0], a[:, 1]] = True
        out.setflags(write=False)
        self.out = out

    def __len__(self) -> int:
        return len(self.arcs)

    def out_degrees(self) -> np.ndarray:
        return self.out.sum(axis=1)


def orient_template(g: TemplateGraph, oracle: ArcOracle) -> OrientedTemplate:
    """Query every template edge, in lexicographic order."""
    if oracle.n != g.n:
        raise InvalidParameterError("oracle and template disagree on n")
    arcs = [oracle.query(u, v) for u, v in g.edge_list()]
    return OrientedTemplate(g.n, arcs)


# ---------------------------------------------------------------------------
# Text format: ``n=<int> kappa=<num> seed=<int>`` then one ``u v`` edge per line.


def format_template(g: TemplateGraph) -> str:
    kappa = g.params.kappa if g.params else ""
    seed = g.params.seed if g.params else ""
    lines = [f"n={g.n} kappa={kappa} seed={seed}"]
    lines.extend(f"{u} {v}" for u, v in g.edge_list())
    return "\n".join(lines) + "\n"


def parse_template(text: str) -> TemplateGraph:
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise InvalidParameterError("empty template file")
    header = dict(tok.split("=", 1) for tok in lines[0].split())
    if "n" not in header:
        raise InvalidParameterError("template header lacks n=<int>")
    n = int(header["n"])
    params = None
    if header.get("kappa") and header.get("seed"):
        params = TemplateParams(n, Fraction(header["kappa"]), int(header["seed"]))
    pairs = [tuple(map(int, ln.split())) for ln in lines[1:]]
    us = [u for u, _ in pairs]
    vs = [v for _, v in pairs]
    return TemplateGraph(n, us, vs, params=params)
