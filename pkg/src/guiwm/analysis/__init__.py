"""Scaling fits, correlation checks, gain decomposition, pareto pruning,
and the figures/CSV emitted alongside them."""

from .powerlaw import DegenerateX, NonPositivePoint, PowerLawFit, fit_power_law
from .correlation import CorrelationResult, correlations
from .gains import GainPoint, GainSummary, gain_analysis
from .pareto import pareto_frontier
from . import plots

__all__ = [
    "CorrelationResult",
    "DegenerateX",
    "GainPoint",
    "GainSummary",
    "NonPositivePoint",
    "PowerLawFit",
    "correlations",
    "fit_power_law",
    "gain_analysis",
    "pareto_frontier",
    "plots",
]
