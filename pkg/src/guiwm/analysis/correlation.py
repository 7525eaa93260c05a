"""Rank and linear agreement between two score series.

Pearson, Spearman, and Kendall tau-b in one call.  A constant series has
no defined correlation; those fields come back None rather than NaN so
JSON serialization stays clean and ``null`` means what it says.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats

__all__ = ["CorrelationResult", "correlations"]


@dataclass(frozen=True, slots=True)
class CorrelationResult:
    pearson: float | None
    spearman: float | None
    kendall_tau_b: float | None
    n: int

    def to_record(self) -> dict:
        return {
            "pearson": self.pearson,
            "spearman": self.spearman,
            "kendall_tau_b": self.kendall_tau_b,
            "n": self.n,
        }


def correlations(x, y) -> CorrelationResult:
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("x and y must be 1-D arrays of equal length")
    if x.size < 2:
        raise ValueError("need at least two points")
    degenerate = float(np.std(x)) == 0.0 or float(np.std(y)) == 0.0
    if degenerate:
        return CorrelationResult(None, None, None, int(x.size))
    pearson = float(stats.pearsonr(x, y).statistic)
    spearman = float(stats.spearmanr(x, y).statistic)
    kendall = float(stats.kendalltau(x, y, variant="b").statistic)
    return CorrelationResult(pearson, spearman, kendall, int(x.size))
