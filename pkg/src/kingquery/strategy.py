"""Seeker strategy: template round, weak tiling, free matrix, final pivot.

Every stage reads only what the oracle has answered. The deliverable of a run
is a candidate vertex together with ``revealed_bound``, the size of its closed
second out-neighbourhood inside the revealed arcs; that number is a sound lower
bound on the true control count regardless of how well the finite-``n``
thresholds behave. ``theoretical_bound`` is what the covering arguments give,
and is only meaningful when the template really has the covering property.

Weak/strong classification measures a set ``H`` by ``|N+(H) \\ H|``, the number
of distinct outside vertices it beats in the oriented template. The raw arc
count ``d+(H)`` is available as :func:`set_out_arcs`.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Sequence

import numpy as np

from .constants import ConstantsReport, verify_constants  # noqa: F401  (re-export)
from .core import (
    ArcOracle,
    InternalContradictionError,
    InvalidParameterError,
    Tournament,
    revealed_control_lower_bound,
    revealed_mod_vertex,
)
from .lemmas import find_bipartition_pivot
from .sizes import cube_root_ceil, tile_size
from .template import (
    OrientedTemplate,
    TemplateGraph,
    TemplateParams,
    generate_template,
    orient_template,
)

HALF = Fraction(1, 2)


class Branch(str, enum.Enum):
    ULTRA = "UltraCertificate"
    DECOMPOSITION_KING = "DecompositionKing"
    FINAL_PIVOT = "FinalPivot"
    FALLBACK = "Fallback"


class SetClass(str, enum.Enum):
    WEAK = "weak"
    STRONG = "strong"


@dataclass(frozen=True)
class StrategyParams:
    delta: Fraction = Fraction(2, 17)
    kappa: Fraction = Fraction(1, 2)
    eta: Fraction | None = None
    ultra_search_budget: int = 65536
    good_submatrix_trials: int = 64

    def __post_init__(self):
        object.__setattr__(self, "delta", Fraction(self.delta))
        object.__setattr__(self, "kappa", Fraction(self.kappa))
        eta = self.delta if self.eta is None else Fraction(self.eta)
        object.__setattr__(self, "eta", eta)
        if not 0 < self.kappa < 1:
            raise InvalidParameterError(f"kappa must lie in (0, 1), got {self.kappa}")
        if not 0 < self.delta < HALF:
            raise InvalidParameterError(f"delta must lie in (0, 1/2), got {self.delta}")
        if not 0 < eta < HALF:
            raise InvalidParameterError(f"eta must lie in (0, 1/2), got {eta}")
        if self.ultra_search_budget < 0 or self.good_submatrix_trials < 1:
            raise InvalidParameterError("search budgets must be positive")

    @property
    def decomposition_bound_valid(self) -> bool:
        """The decomposition king bound needs ``delta + kappa <= 1/2``."""
        return self.delta + self.kappa <= HALF


# ---------------------------------------------------------------------------
# Set measures on the oriented template


def _mask(n: int, vertices: Sequence[int]) -> np.ndarray:
    m = np.zeros(n, dtype=bool)
    m[list(vertices)] = True
    return m


def set_out_arcs(ot: OrientedTemplate, h: Sequence[int]) -> int:
    """``d+(H)``: template arcs from ``H`` to vertices outside ``H``."""
    inside = _mask(ot.n, h)
    return int(ot.out[inside][:, ~inside].sum())


def out_neighbourhood(ot: OrientedTemplate, h: Sequence[int]) -> np.ndarray:
    """Mask of ``N+(H) \\ H`` over template arcs."""
    inside = _mask(ot.n, h)
    return ot.out[inside].any(axis=0) & ~inside


def out_neighbourhood_size(ot: OrientedTemplate, h: Sequence[int]) -> int:
    return int(out_neighbourhood(ot, h).sum())


def strength_threshold(n: int, eta: Fraction) -> Fraction:
    return (HALF + Fraction(eta)) * n


def classify_set(ot: OrientedTemplate, h: Sequence[int], eta: Fraction) -> SetClass:
    if len(h) == 0:
        raise InvalidParameterError("cannot classify the empty set")
    if out_neighbourhood_size(ot, h) < strength_threshold(ot.n, eta):
        return SetClass.WEAK
    return SetClass.STRONG


def free_set(ot: OrientedTemplate, w: Sequence[int]) -> list[int]:
    """Vertices neither in ``W`` nor beaten by ``W`` in the template."""
    inside = _mask(ot.n, w)
    free = ~(inside | ot.out[inside].any(axis=0))
    return np.flatnonzero(free).tolist()


# ---------------------------------------------------------------------------
# Weak half-subset search


class _HalfSearch:
    """Evaluates ``|N+(X) \\ X|`` for half-subsets ``X`` of a fixed ``H``."""

    def __init__(self, ot: OrientedTemplate, h: Sequence[int], eta: Fraction):
        self.n = ot.n
        self.h = np.array(sorted(h), dtype=np.int64)
        self.half = len(self.h) // 2
        self.rows = ot.out[self.h].astype(np.int32)  # |H| x n
        self.limit = strength_threshold(ot.n, eta)
        self.examined = 0

    def spread(self, pos: np.ndarray) -> int:
        """``pos`` indexes into ``H``."""
        reach = self.rows[pos].any(axis=0)
        reach[self.h[pos]] = False
        return int(reach.sum())

    def spreads(self, pos: np.ndarray) -> np.ndarray:
        """Batch form; ``pos`` has shape ``(k, half)``."""
        reach = self.rows[pos].any(axis=1)
        np.put_along_axis(reach, self.h[pos], False, axis=1)
        return reach.sum(axis=1)

    def is_weak(self, value: int) -> bool:
        return value < self.limit

    def descend(self, pos: np.ndarray, budget: int | None = None) -> tuple[np.ndarray, int]:
        """Steepest single-swap descent; stops early once weak.

        Ties go to the smallest vertex swapped out, then the smallest swapped in.
        """
        pos = np.sort(pos)
        value = self.spread(pos)
        size = len(self.h)
        while not self.is_weak(value):
            out_pos = np.setdiff1d(np.arange(size), pos)
            if out_pos.size == 0 or pos.size == 0:
                break
            if budget is not None and self.examined + pos.size * out_pos.size > budget:
                break
            counts = self.rows[pos].sum(axis=0)  # beaters of each column inside X
            # candidate counts after swapping pos[i] out and out_pos[j] in
            cand = (counts[None, None, :] - self.rows[pos][:, None, :]
                    + self.rows[out_pos][None, :, :]) > 0
            member_vertices = self.h[pos]
            cand_members = cand[:, :, member_vertices].sum(axis=2)
            ii = np.arange(pos.size)
            cand_members -= cand[ii, :, member_vertices[ii]]
            incoming = self.h[out_pos]
            cand_members += cand[:, np.arange(out_pos.size), incoming]
            values = cand.sum(axis=2) - cand_members
            self.examined += values.size
            best = int(np.argmin(values))
            i, j = divmod(best, out_pos.size)
            if values[i, j] >= value:
                break
            pos = np.sort(np.concatenate([np.delete(pos, i), [out_pos[j]]]))
            value = int(values[i, j])
        return pos, value


def find_weak_half_subset(ot: OrientedTemplate, h: Sequence[int], eta: Fraction,
                          budget: int, rng: np.random.Generator | None = None
                          ) -> list[int] | None:
    """An ``eta``-weak subset of ``H`` with ``|H|/2`` elements, if one is found.

    Tries, in order: the ``|H|/2`` members of smallest template out-degree; a
    steepest-descent improvement of that seed; then either all half-subsets
    (when there are at most ``budget`` of them) or random restarts with descent
    until ``budget`` subsets have been examined.
    """
    if len(h) % 2:
        raise InvalidParameterError(f"|H| must be even, got {len(h)}")
    search = _HalfSearch(ot, h, eta)
    if search.half == 0:
        return None
    size = len(search.h)

    degrees = ot.out_degrees()[search.h]
    seed = np.sort(np.lexsort((search.h, degrees))[: search.half])
    if search.is_weak(search.spread(seed)):
        return search.h[seed].tolist()
    pos, value = search.descend(seed)
    if search.is_weak(value):
        return search.h[pos].tolist()

    if math.comb(size, search.half) <= budget:
        chunk = 4096
        it = combinations(range(size), search.half)
        while True:
            block = np.array(list(_take(it, chunk)), dtype=np.int64)
            if block.size == 0:
                return None
            values = search.spreads(block)
            weak = np.flatnonzero(values < search.limit)
            if weak.size:
                return search.h[block[weak[0]]].tolist()

    rng = rng if rng is not None else np.random.default_rng(0)
    search.examined = 0
    while search.examined < budget:
        start = np.sort(rng.choice(size, search.half, replace=False))
        search.examined += 1
        pos, value = search.descend(start, budget=budget)
        if search.is_weak(value):
            return search.h[pos].tolist()
    return None


def _take(it, k):
    for _ in range(k):
        try:
            yield next(it)
        except StopIteration:
            return


# ---------------------------------------------------------------------------
# Ultra branch and tiling


@dataclass
class UltraResult:
    candidate: int
    h: list[int]
    beaten: list[int]
    certified: bool
    bound: int | None


def ultra_branch(oracle: ArcOracle, ot: OrientedTemplate, h: Sequence[int],
                 eta: Fraction) -> UltraResult:
    """Reveal ``H`` completely and certify a vertex beating half of it.

    The smallest-index ``v`` with ``d+(v, H) >= |H|/2`` is chosen; if its
    out-neighbours inside ``H`` form a strong set, every outside vertex they
    beat is two steps from ``v``.
    """
    h = sorted(h)
    oracle.query_within(h)
    sub = oracle.revealed.adjacency[np.ix_(h, h)]
    degrees = sub.sum(axis=1)
    idx = np.flatnonzero(degrees * 2 >= len(h))
    if idx.size == 0:
        raise InternalContradictionError("no vertex beats half of a revealed tournament")
    v = h[int(idx[0])]
    beaten = [h[j] for j in np.flatnonzero(sub[idx[0]])]
    certified = bool(beaten) and classify_set(ot, beaten, eta) is SetClass.STRONG
    bound = math.ceil(strength_threshold(ot.n, eta)) if certified else None
    return UltraResult(v, h, beaten, certified, bound)


@dataclass
class WeakTiling:
    tiles: list[list[int]]
    remainder: list[int]
    tile_size: int

    @property
    def m(self) -> int:
        return len(self.tiles)


def build_weak_tiling(ot: OrientedTemplate, oracle: ArcOracle, params: StrategyParams,
                      rng: np.random.Generator | None = None
                      ) -> tuple[WeakTiling, UltraResult | None]:
    """Peel weak tiles off the ``2s`` smallest untiled vertices.

    Returns the (possibly partial) tiling and, when some ``H`` yielded no weak
    half, the result of the ultra branch on it.
    """
    n = ot.n
    s = tile_size(n)
    remaining = list(range(n))
    tiles: list[list[int]] = []
    while len(remaining) >= 2 * s:
        h = remaining[: 2 * s]
        w = find_weak_half_subset(ot, h, params.eta, params.ultra_search_budget, rng)
        if w is None:
            return WeakTiling(tiles, remaining, s), ultra_branch(oracle, ot, h, params.eta)
        tiles.append(w)
        taken = set(w)
        remaining = [v for v in remaining if v not in taken]
    return WeakTiling(tiles, remaining, s), None


# ---------------------------------------------------------------------------
# Free matrix


class FreeMatrix:
    """Tiles x vertices; entry ``(i, v)`` is 1 iff ``v`` lies in the free set of tile ``i``."""

    def __init__(self, bits: np.ndarray, tiles: list[list[int]]):
        bits = np.asarray(bits, dtype=bool)
        bits.setflags(write=False)
        self.bits = bits
        self.tiles = tiles
        self.row_weights = bits.sum(axis=1)
        self.col_weights = bits.sum(axis=0)

    @property
    def m(self) -> int:
        return self.bits.shape[0]

    @property
    def n(self) -> int:
        return self.bits.shape[1]

    def row_weights_on(self, columns: Sequence[int], rows: Sequence[int] | None = None) -> np.ndarray:
        sub = self.bits if rows is None else self.bits[list(rows)]
        return sub[:, list(columns)].sum(axis=1)

    def col_weights_on(self, rows: Sequence[int]) -> np.ndarray:
        return self.bits[list(rows)].sum(axis=0)


def build_free_matrix(ot: OrientedTemplate, tiling: WeakTiling) -> FreeMatrix:
    bits = np.zeros((tiling.m, ot.n), dtype=bool)
    for i, w in enumerate(tiling.tiles):
        bits[i, free_set(ot, w)] = True
    return FreeMatrix(bits, tiling.tiles)


def row_weight_floor(n: int, eta: Fraction, s: int) -> Fraction:
    """Guaranteed free-matrix row weight, ``(1/2 - eta) n - s``, for weak tiles of size ``s``."""
    return (HALF - Fraction(eta)) * n - s


# ---------------------------------------------------------------------------
# Good sub-matrix, decomposition, column selection, final pivot


def good_fraction(n: int, eta: Fraction) -> float:
    """Row-weight fraction a good column set must keep."""
    return float(HALF - Fraction(eta)) - 2 * math.sqrt(math.log(n)) / cube_root_ceil(n)


@dataclass
class GoodColumns:
    columns: list[int]
    accepted: bool
    min_row_weight: int
    threshold: float
    attempts: int


def sample_good_submatrix(m: FreeMatrix, params: StrategyParams,
                          rng: np.random.Generator) -> GoodColumns:
    """Sample ``2s`` columns until every row keeps its share of ones.

    After ``good_submatrix_trials`` misses, the sample with the largest
    minimum row weight is returned unaccepted.
    """
    n = m.n
    s = tile_size(n)
    k = 2 * s
    if n < k:
        raise InvalidParameterError(f"need n >= 2s, got n={n}, s={s}")
    threshold = good_fraction(n, params.eta) * k
    best: tuple[int, list[int]] | None = None
    for attempt in range(1, params.good_submatrix_trials + 1):
        cols = np.sort(rng.choice(n, k, replace=False)).tolist()
        weights = m.row_weights_on(cols)
        low = int(weights.min()) if weights.size else k
        if low >= threshold:
            return GoodColumns(cols, True, low, threshold, attempt)
        if best is None or low > best[0]:
            best = (low, cols)
    assert best is not None
    return GoodColumns(best[1], False, best[0], threshold, params.good_submatrix_trials)


@dataclass
class Decomposition:
    pivot: int
    v1: list[int]
    v2: list[int]
    small_rows: list[int]
    large_rows: list[int]
    king: bool
    bound: int | None = None


def decompose(m: FreeMatrix, oracle: ArcOracle, v: Sequence[int],
              params: StrategyParams) -> Decomposition:
    """Reveal ``V`` and split it around a vertex beating half of it.

    ``small_rows`` have fewer than ``kappa * s`` ones on ``V1``. When they are
    too few, ``king`` is set and ``pivot`` is the candidate.
    """
    n = m.n
    s = tile_size(n)
    c = cube_root_ceil(n)
    v = sorted(v)
    if len(v) != 2 * s:
        raise InvalidParameterError(f"|V| must be 2s = {2 * s}, got {len(v)}")
    oracle.query_within(v)
    sub = oracle.revealed.adjacency[np.ix_(v, v)]
    idx = np.flatnonzero(sub.sum(axis=1) >= s)
    if idx.size == 0:
        raise InternalContradictionError("no vertex of V beats half of V")
    y = v[int(idx[0])]
    beaten = [v[j] for j in np.flatnonzero(sub[idx[0]])]
    v1 = beaten[:s]
    v1_set = set(v1)
    v2 = [x for x in v if x not in v1_set]

    weights = m.row_weights_on(v1)
    cut = params.kappa * s
    small = [i for i in range(m.m) if weights[i] < cut]
    large = [i for i in range(m.m) if weights[i] >= cut]
    king = len(small) < (HALF - params.delta - params.kappa) * c - 2
    bound = None
    if king:
        bound = math.ceil((1 - params.kappa) * (HALF + params.delta + params.kappa) * n)
    return Decomposition(y, v1, v2, small, large, king, bound)


@dataclass
class ColumnSelection:
    columns: list[int]
    min_weight: int
    threshold: float
    flagged: bool


def select_v3(m: FreeMatrix, rows: Sequence[int], excluded: Sequence[int],
              s: int | None = None, delta: Fraction | None = None) -> ColumnSelection:
    """The ``s`` columns outside ``excluded`` heaviest on ``rows`` (smallest index on ties)."""
    n = m.n
    s = tile_size(n) if s is None else s
    blocked = set(excluded)
    avail = np.array([x for x in range(n) if x not in blocked], dtype=np.int64)
    if avail.size < s:
        raise InvalidParameterError(f"only {avail.size} columns available, need {s}")
    weights = m.col_weights_on(rows)[avail] if len(rows) else np.zeros(avail.size, dtype=np.int64)
    order = np.lexsort((avail, -weights))[:s]
    cols = sorted(avail[order].tolist())
    min_weight = int(weights[order].min()) if s else 0
    threshold = 0.0
    flagged = False
    if delta is not None and len(blocked) == 2 * s:
        threshold = (float(HALF - Fraction(delta)) - 3 / cube_root_ceil(n)) * len(rows)
        flagged = min_weight < threshold
    return ColumnSelection(cols, min_weight, threshold, flagged)


def final_pivot(oracle: ArcOracle, v2: Sequence[int], v3: Sequence[int]) -> int:
    """Reveal ``V2 + V3`` and return a vertex beating a quarter of each side."""
    v2, v3 = sorted(v2), sorted(v3)
    if len(v2) != len(v3) or set(v2) & set(v3):
        raise InvalidParameterError("V2 and V3 must be disjoint and of equal size")
    oracle.query_within(v3)
    oracle.query_between(v2, v3)
    oracle.query_within(v2)
    verts = sorted(v2 + v3)
    local = Tournament.from_adjacency(oracle.revealed.adjacency[np.ix_(verts, verts)])
    pos = {x: i for i, x in enumerate(verts)}
    found = find_bipartition_pivot(local, [pos[x] for x in v2], [pos[x] for x in v3],
                                   require_divisible=False)
    return verts[found]


# ---------------------------------------------------------------------------
# Full pipeline


@dataclass
class StrategyOutcome:
    n: int
    candidate: int
    branch: Branch
    revealed_bound: int
    theoretical_bound: int | None
    queries: int
    template_edges: int
    flags: list[str] = field(default_factory=list)
    stage_queries: dict[str, int] = field(default_factory=dict)
    stage_sets: dict[str, list[int]] = field(default_factory=dict)
    tiles: int = 0
    small_rows: int | None = None
    large_rows: int | None = None
    qualifying_rows: int | None = None
    row_weights: list[int] | None = None

    def summary(self) -> dict:
        return {
            "branch": self.branch.value,
            "candidate": self.candidate,
            "queries": self.queries,
            "stage_queries": dict(self.stage_queries),
            "flags": list(self.flags),
        }


class _StageMeter:
    def __init__(self, oracle: ArcOracle):
        self.oracle = oracle
        self.last = oracle.count
        self.counts: dict[str, int] = {}

    def mark(self, stage: str) -> None:
        now = self.oracle.count
        self.counts[stage] = self.counts.get(stage, 0) + now - self.last
        self.last = now


def _quarter(vertices: Sequence[int], beaten: np.ndarray, size: int) -> list[int]:
    return [x for x in sorted(vertices) if beaten[x]][:size]


def run_seeker(oracle: ArcOracle, params: StrategyParams, template_seed: int,
               rng: np.random.Generator | int | None = 0,
               template: TemplateGraph | None = None) -> StrategyOutcome:
    """Run the whole seeker against ``oracle``.

    A non-adaptive template round is followed by either the ultra branch or
    the tiling / free-matrix / decomposition / final-pivot chain. Threshold
    misses set flags and turn the branch into ``Fallback``; the candidate and
    its revealed bound are always reported.
    """
    n = oracle.n
    if n < 8:
        raise InvalidParameterError(f"run_seeker needs n >= 8, got {n}")
    if not isinstance(rng, np.random.Generator):
        rng = np.random.default_rng(rng)
    s = tile_size(n)
    if template is None:
        template = generate_template(TemplateParams(n, params.kappa, template_seed))
    elif template.n != n:
        raise InvalidParameterError("template and oracle disagree on n")

    meter = _StageMeter(oracle)
    ot = orient_template(template, oracle)
    meter.mark("template")
    flags: list[str] = []
    sets: dict[str, list[int]] = {}

    def finish(candidate: int, branch: Branch, theoretical: int | None, **extra) -> StrategyOutcome:
        if flags and branch is not Branch.FALLBACK:
            branch = Branch.FALLBACK
        return StrategyOutcome(
            n=n, candidate=candidate, branch=branch,
            revealed_bound=revealed_control_lower_bound(oracle.revealed, candidate),
            theoretical_bound=theoretical, queries=oracle.count,
            template_edges=len(template), flags=flags,
            stage_queries=dict(meter.counts), stage_sets=sets, **extra,
        )

    tiling, ultra = build_weak_tiling(ot, oracle, params, rng)
    meter.mark("ultra")
    fm = build_free_matrix(ot, tiling)
    row_info = dict(tiles=tiling.m, row_weights=fm.row_weights.tolist())
    if ultra is not None:
        sets["ultra"] = ultra.h
        if not ultra.certified:
            flags.append("ultra_strength_check_failed")
        return finish(ultra.candidate, Branch.ULTRA, ultra.bound, **row_info)
    if tiling.m == 0:
        flags.append("no_tiles")
        return finish(revealed_mod_vertex(oracle.revealed), Branch.FALLBACK, None, **row_info)

    good = sample_good_submatrix(fm, params, rng)
    if not good.accepted:
        flags.append("good_submatrix_below_threshold")
    sets["good_columns"] = good.columns

    dec = decompose(fm, oracle, good.columns, params)
    meter.mark("inside_V")
    sets["V1"], sets["V2"] = dec.v1, dec.v2
    row_info.update(small_rows=len(dec.small_rows), large_rows=len(dec.large_rows))
    if dec.king:
        return finish(dec.pivot, Branch.DECOMPOSITION_KING, dec.bound, **row_info)
    if n - 2 * s < s:
        flags.append("too_few_columns_for_v3")
        return finish(dec.pivot, Branch.FALLBACK, None, **row_info)

    sel = select_v3(fm, dec.large_rows, good.columns, s, params.delta)
    if sel.flagged:
        flags.append("v3_below_threshold")
    sets["V3"] = sel.columns

    # queried here so the meter can split the two groups; the same queries
    # inside final_pivot are then memoised
    oracle.query_within(sel.columns)
    meter.mark("inside_V3")
    oracle.query_between(dec.v2, sel.columns)
    meter.mark("V2xV3")
    try:
        v = final_pivot(oracle, dec.v2, sel.columns)
    except InternalContradictionError:
        flags.append("pivot_not_found")
        adj = oracle.revealed.adjacency
        pool = sorted(dec.v2 + sel.columns)
        v = max(pool, key=lambda x: (min(adj[x, dec.v2].sum(), adj[x, sel.columns].sum()), -x))
    meter.mark("V2xV3")

    beaten = oracle.revealed.adjacency[v]
    quarter = math.ceil(s / 4)
    v2q = _quarter(dec.v2, beaten, quarter)
    v3q = _quarter(sel.columns, beaten, quarter)
    if len(v2q) < quarter or len(v3q) < quarter:
        flags.append("pivot_quarter_short")
    sets["V2_quarter"], sets["V3_quarter"] = v2q, v3q
    weights = fm.row_weights_on(v2q + v3q)
    qualifying = int((weights >= params.kappa * s).sum())
    theoretical = math.ceil((1 - params.kappa) * s * qualifying)
    return finish(v, Branch.FINAL_PIVOT, theoretical, qualifying_rows=qualifying, **row_info)


def closed_form_query_count(template: TemplateGraph, outcome: StrategyOutcome) -> int:
    """Expected ledger size from the stage vertex sets alone.

    Each stage contributes its nominal pair count minus the pairs the template
    already covered; the stage pair sets are pairwise disjoint.
    """
    adj = template.adjacency

    def inside(vs):
        vs = sorted(vs)
        return math.comb(len(vs), 2) - int(np.triu(adj[np.ix_(vs, vs)], 1).sum())

    def between(a, b):
        return len(a) * len(b) - int(adj[np.ix_(sorted(a), sorted(b))].sum())

    total = len(template)
    sets = outcome.stage_sets
    if "ultra" in sets:
        total += inside(sets["ultra"])
    if "V1" in sets:
        total += inside(sets["V1"] + sets["V2"])
    if "V3" in sets:
        total += inside(sets["V3"]) + between(sets["V2"], sets["V3"])
    return total
