"""Seeded experiment runs, sweeps and the full-reveal baseline.

Per-run records are JSON objects (written as JSON Lines); sweeps and baselines
produce CSV. Child seeds are derived with :func:`derive_seed`, a BLAKE2b hash
of ``parent:n:index:stream``, so a run's randomness depends only on its own
coordinates and never on worker scheduling.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from fractions import Fraction
from statistics import mean

from .core import (
    ArcOracle,
    InvalidParameterError,
    control_count,
    generate_tournament,
    is_king,
    pair_count,
    revealed_mod_vertex,
)
from .strategy import StrategyParams, closed_form_query_count, run_seeker
from .template import TemplateParams, audit_template, generate_template

RECORD_FIELDS = (
    "n", "kappa", "delta", "template_seed", "tournament_seed", "branch",
    "candidate", "queries", "revealed_bound", "theoretical_bound", "flags",
)

SWEEP_FIELDS = (
    "kind", "n", "seed", "branch", "candidate", "queries", "queries_per_n43",
    "revealed_bound", "revealed_fraction", "ground_truth_control",
    "theoretical_bound", "flags", "error",
    "runs", "mean_queries_per_n43", "max_queries_per_n43",
    "mean_revealed_fraction", "mean_ground_truth_control",
)

BASELINE_FIELDS = ("n", "seed", "candidate", "queries", "control_fraction", "is_king")


def derive_seed(parent: int, n: int, index: int, stream: str) -> int:
    digest = hashlib.blake2b(f"{parent}:{n}:{index}:{stream}".encode(), digest_size=8).digest()
    return int.from_bytes(digest, "big") >> 1


@dataclass(frozen=True)
class ExperimentConfig:
    ns: tuple[int, ...]
    seeds: tuple[int, ...]
    kappa: Fraction = Fraction(1, 2)
    delta: Fraction = Fraction(2, 17)
    tournament: str = "random"
    oracle: str = "fixed"
    base_seed: int = 0
    verify: bool = True
    strict_template: bool = False
    audit_trials: int = 200
    workers: int = 1

    def __post_init__(self):
        object.__setattr__(self, "kappa", Fraction(self.kappa))
        object.__setattr__(self, "delta", Fraction(self.delta))
        object.__setattr__(self, "ns", tuple(self.ns))
        object.__setattr__(self, "seeds", tuple(self.seeds))
        if not self.ns or any(n < 8 for n in self.ns):
            raise InvalidParameterError("every n must be >= 8")
        if not self.seeds:
            raise InvalidParameterError("seed range is empty")
        if self.oracle not in ("fixed", "adversary"):
            raise InvalidParameterError(f"unknown oracle kind {self.oracle!r}")

    @property
    def strategy_params(self) -> StrategyParams:
        return StrategyParams(delta=self.delta, kappa=self.kappa)

    def tasks(self) -> list[tuple[int, int]]:
        return [(n, seed) for n in sorted(set(self.ns)) for seed in self.seeds]


def run_one(config: ExperimentConfig, n: int, seed: int) -> dict:
    """One seeker run; returns the outcome record plus diagnostic keys."""
    if config.oracle == "fixed":
        t = generate_tournament(config.tournament, n, seed)
        oracle = ArcOracle.fixed(t)
    else:
        t = None
        oracle = ArcOracle.greedy_adversary(n)

    template_seed = derive_seed(config.base_seed, n, seed, "template")
    template = generate_template(TemplateParams(n, config.kappa, template_seed))
    audit = audit_template(template, config.kappa, config.audit_trials,
                           derive_seed(config.base_seed, n, seed, "audit"))
    outcome = run_seeker(oracle, config.strategy_params, template_seed,
                         rng=derive_seed(config.base_seed, n, seed, "strategy"),
                         template=template)

    flags = list(outcome.flags)
    if not audit.passed:
        flags.append("template_audit_failed")
    record = {
        "run_seed": seed,
        "n": n,
        "kappa": float(config.kappa),
        "delta": float(config.delta),
        "template_seed": template_seed,
        "tournament_seed": seed if t is not None else None,
        "branch": outcome.branch.value,
        "candidate": outcome.candidate,
        "queries": outcome.queries,
        "revealed_bound": outcome.revealed_bound,
        "theoretical_bound": outcome.theoretical_bound,
        "flags": flags,
    }
    violations = []
    if outcome.queries != closed_form_query_count(template, outcome):
        violations.append("query_accounting_mismatch")
    if t is not None and config.verify:
        truth = control_count(t, outcome.candidate)
        record["ground_truth_control"] = truth / n
        if outcome.revealed_bound > truth:
            violations.append("revealed_bound_unsound")
    if config.strict_template and not audit.passed:
        violations.append("template_audit_failed")
    record["violations"] = violations
    record["tiles"] = outcome.tiles
    record["row_weights"] = outcome.row_weights
    return record


def _run_task(args) -> dict:
    config, n, seed = args
    try:
        return run_one(config, n, seed)
    except Exception as exc:  # recorded per row; a sweep never aborts
        return {"run_seed": seed, "n": n, "tournament_seed": seed, "error": f"{type(exc).__name__}: {exc}",
                "violations": []}


def run_records(config: ExperimentConfig) -> list[dict]:
    """All runs of the config, ordered by ``(n, seed)`` whatever the worker count."""
    jobs = [(config, n, seed) for n, seed in config.tasks()]
    if config.workers > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            results = list(pool.map(_run_task, jobs))
    else:
        results = [_run_task(j) for j in jobs]
    return sorted(results, key=lambda r: (r["n"], r["run_seed"]))


def public_record(record: dict) -> dict:
    """The documented JSON schema, without harness diagnostics."""
    out = {k: record.get(k) for k in RECORD_FIELDS}
    if "ground_truth_control" in record:
        out["ground_truth_control"] = record["ground_truth_control"]
    if "error" in record:
        out["error"] = record["error"]
    return out


def cmd_run(config: ExperimentConfig) -> tuple[list[dict], bool]:
    """Return the JSON records and whether any invariant was violated."""
    records = run_records(config)
    violated = any(r.get("violations") for r in records)
    return [public_record(r) for r in records], violated


def _fmt(x: float | None) -> str:
    return "" if x is None else f"{x:.4f}"


def sweep_rows(records: list[dict]) -> list[dict]:
    rows = []
    by_n: dict[int, list[dict]] = {}
    for r in records:
        n = r["n"]
        row = {k: "" for k in SWEEP_FIELDS}
        row.update(kind="run", n=n, seed=r["run_seed"])
        if "error" in r:
            row["error"] = r["error"]
        else:
            q43 = r["queries"] / n ** (4 / 3)
            row.update(
                branch=r["branch"], candidate=r["candidate"], queries=r["queries"],
                queries_per_n43=_fmt(q43), revealed_bound=r["revealed_bound"],
                revealed_fraction=_fmt(r["revealed_bound"] / n),
                ground_truth_control=_fmt(r.get("ground_truth_control")),
                theoretical_bound="" if r["theoretical_bound"] is None else r["theoretical_bound"],
                flags=";".join(r["flags"]),
            )
            by_n.setdefault(n, []).append(r)
        rows.append(row)
    for n in sorted({r["n"] for r in records}):
        ok = by_n.get(n, [])
        agg = {k: "" for k in SWEEP_FIELDS}
        agg.update(kind="aggregate", n=n, runs=len(ok))
        if ok:
            q43 = [r["queries"] / n ** (4 / 3) for r in ok]
            truth = [r["ground_truth_control"] for r in ok if "ground_truth_control" in r]
            agg.update(
                mean_queries_per_n43=_fmt(mean(q43)),
                max_queries_per_n43=_fmt(max(q43)),
                mean_revealed_fraction=_fmt(mean(r["revealed_bound"] / n for r in ok)),
                mean_ground_truth_control=_fmt(mean(truth)) if truth else "",
            )
        rows.append(agg)
    return rows


def to_csv(rows: list[dict], fields) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(fields), lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    return buf.getvalue()


def cmd_sweep(config: ExperimentConfig) -> tuple[str, bool]:
    records = run_records(config)
    violated = any(r.get("violations") for r in records)
    return to_csv(sweep_rows(records), SWEEP_FIELDS), violated


def baseline_row(config: ExperimentConfig, n: int, seed: int) -> dict:
    t = generate_tournament(config.tournament, n, seed)
    oracle = ArcOracle.fixed(t)
    oracle.query_within(range(n))
    v = revealed_mod_vertex(oracle.revealed)
    return {
        "n": n, "seed": seed, "candidate": v, "queries": oracle.count,
        "control_fraction": _fmt(control_count(t, v) / n), "is_king": is_king(t, v),
    }


def cmd_baseline(config: ExperimentConfig) -> tuple[str, bool]:
    rows = [baseline_row(config, n, seed) for n, seed in config.tasks()]
    violated = any(not r["is_king"] or r["queries"] != pair_count(r["n"]) for r in rows)
    return to_csv(rows, BASELINE_FIELDS), violated


def dump_jsonl(records: list[dict]) -> str:
    return "".join(json.dumps(r, sort_keys=False) + "\n" for r in records)


def parse_seeds(text: str) -> tuple[int, ...]:
    """``"7"``, ``"1,2,5"`` or a half-open range ``"0:10"``."""
    text = text.strip()
    if ":" in text:
        lo, hi = text.split(":", 1)
        seeds = tuple(range(int(lo), int(hi)))
    else:
        seeds = tuple(int(x) for x in text.split(",") if x.strip())
    if not seeds:
        raise InvalidParameterError(f"empty seed range {text!r}")
    return seeds


def with_workers(config: ExperimentConfig, workers: int) -> ExperimentConfig:
    return replace(config, workers=workers)


def query_scale(n: int) -> float:
    """``n^(4/3) ln n``, the normaliser for query counts."""
    return n ** (4 / 3) * math.log(n)
