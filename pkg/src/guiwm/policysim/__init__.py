"""Candidate-action scoring simulations.

Each sample pairs a screenshot + goal with its ground-truth action; the
simulator asks a model for K-1 distractor actions, then measures how often
different selection procedures recover the ground truth (always candidate
1 in prompt numbering): direct selection from the full candidate list, or
argmax over per-candidate value estimates judged from the current state
alone versus from a predicted next state.
"""

from .alternatives import (
    DUPLICATE_RADIUS,
    GT_REASON,
    AlternativesParseError,
    Candidate,
    CandidateSet,
    DuplicateOfGroundTruth,
    actions_conflict,
    gen_alternatives,
    parse_alternatives,
)
from .value import ValueVerdict, estimate_value, parse_value_reply, select_candidate
from .selection import SelectionParseError, SelectionResult, parse_selection, select_action
from .runner import (
    MODES,
    PolicyEvalConfig,
    PolicyEvalResult,
    PolicySample,
    read_policy_samples,
    run_policy_eval,
)

__all__ = [
    "DUPLICATE_RADIUS",
    "GT_REASON",
    "MODES",
    "AlternativesParseError",
    "Candidate",
    "CandidateSet",
    "DuplicateOfGroundTruth",
    "PolicyEvalConfig",
    "PolicyEvalResult",
    "PolicySample",
    "SelectionParseError",
    "SelectionResult",
    "ValueVerdict",
    "actions_conflict",
    "estimate_value",
    "gen_alternatives",
    "parse_alternatives",
    "parse_selection",
    "parse_value_reply",
    "read_policy_samples",
    "run_policy_eval",
    "select_action",
    "select_candidate",
]
