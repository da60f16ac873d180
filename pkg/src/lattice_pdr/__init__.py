"""Property directed reachability over lattices.

Plain mode checks safety of finite transition systems on the powerset
lattice; down mode checks MDP max-reachability thresholds with frames of
exact rationals and half-space obligations.
"""

from .core import (
    EMPTY,
    Heuristic,
    HeuristicViolation,
    Holds,
    Index,
    MalformedRational,
    Mode,
    PdrError,
    PdrState,
    ProblemInstance,
    Refuted,
    Unknown,
    UnknownReason,
    ZeroDenominator,
    format_state,
    rat_parse,
    rat_str,
    verdict_name,
)
from .engine import Rule, Status, Trace, TraceEvent, apply_rule, check_invariants, classify, detect_repeat, init_state, solve
from .io import bundled_model, load_model, parse_model, serialize_model
from .mdp import Frame, HalfSpaceDownSet, Mdp, mdp_heuristics, mdp_instance
from .ts import ConflictMode, StateSet, TransitionSystem, heuristic_simple, ts_instance

__all__ = [
    "EMPTY", "Heuristic", "HeuristicViolation", "Holds", "Index", "MalformedRational", "Mode",
    "PdrError", "PdrState", "ProblemInstance", "Refuted", "Unknown", "UnknownReason",
    "ZeroDenominator", "format_state", "rat_parse", "rat_str", "verdict_name",
    "Rule", "Status", "Trace", "TraceEvent", "apply_rule", "check_invariants", "classify",
    "detect_repeat", "init_state", "solve",
    "bundled_model", "load_model", "parse_model", "serialize_model",
    "Frame", "HalfSpaceDownSet", "Mdp", "mdp_heuristics", "mdp_instance",
    "ConflictMode", "StateSet", "TransitionSystem", "heuristic_simple", "ts_instance",
]
