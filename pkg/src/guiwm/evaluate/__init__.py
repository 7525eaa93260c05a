"""Render-and-judge evaluation of next-state predictors.

A predictor's reply is parsed into reasoning + HTML, the HTML is rendered,
and a panel of vision judges votes success/failure on the (current state,
rendered prediction, action) triple; the per-sample score is the mean of
the binary votes, zeroed outright when the render fails.  Embedding
similarity against the ground-truth next screenshot is tracked alongside.
"""

from .parse import ParseFail, WMOutput, format_wm_output, parse_wm_output
from .judging import JudgeVerdict, aggregate_iacc, judge_once, panel_statuses, parse_judge_reply
from .similarity import SimilarityScore, state_similarity
from .benchmark import (
    BenchmarkConfig,
    BenchmarkReport,
    Prediction,
    predict_next_state,
    reports_equal,
    run_benchmark,
    write_table,
)

__all__ = [
    "BenchmarkConfig",
    "BenchmarkReport",
    "JudgeVerdict",
    "ParseFail",
    "Prediction",
    "SimilarityScore",
    "WMOutput",
    "aggregate_iacc",
    "format_wm_output",
    "judge_once",
    "panel_statuses",
    "parse_judge_reply",
    "parse_wm_output",
    "predict_next_state",
    "reports_equal",
    "run_benchmark",
    "state_similarity",
    "write_table",
]
