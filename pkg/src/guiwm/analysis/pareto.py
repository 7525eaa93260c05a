"""Size/score pareto pruning.

A point is dominated when some other point is at most as large and scores
strictly higher; weak dominance on size means an equally sized but better
scoring point displaces its peer, while strictness on score keeps exact
ties (both survive).  The frontier comes back sorted by size.
"""

from __future__ import annotations

__all__ = ["pareto_frontier"]


def pareto_frontier(points: list[tuple[float, float]]) -> list[tuple[float, float]]:
    """points are (size, score); returns the non-dominated subset sorted by
    (size, score)."""
    kept = []
    for p in points:
        size, score = p
        dominated = any(q_size <= size and q_score > score for q_size, q_score in points)
        if not dominated:
            kept.append((size, score))
    kept = sorted(set(kept))
    return kept
