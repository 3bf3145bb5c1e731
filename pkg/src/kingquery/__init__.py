"""Query-complexity simulator for finding kings in tournaments."""

from .core import (
    ArcOracle,
    InternalContradictionError,
    InvalidParameterError,
    InvalidQueryError,
    QueryLedger,
    RevealedDigraph,
    Tournament,
    adversary_answer,
    control_count,
    control_fraction,
    generate_tournament,
    is_king,
    mod_vertex,
    query,
    revealed_control_lower_bound,
    second_out_neighborhood,
)
from .constants import verify_constants
from .strategy import Branch, StrategyOutcome, StrategyParams, run_seeker
from .template import (
    TemplateGraph,
    TemplateParams,
    audit_template,
    edge_budget,
    generate_template,
    orient_template,
)

__all__ = [
    "ArcOracle", "Branch", "InternalContradictionError", "InvalidParameterError",
    "InvalidQueryError", "QueryLedger", "RevealedDigraph", "StrategyOutcome",
    "StrategyParams", "TemplateGraph", "TemplateParams", "Tournament",
    "adversary_answer", "audit_template", "control_count", "control_fraction",
    "edge_budget", "generate_template", "generate_tournament", "is_king",
    "mod_vertex", "orient_template", "query", "revealed_control_lower_bound",
    "run_seeker", "second_out_neighborhood", "verify_constants",
]
