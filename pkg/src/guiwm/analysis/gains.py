"""Similarity-gain decomposition.

For a sample whose baseline similarity to the target is x, the largest
gain any improvement can deliver is 1 - x (similarity is capped at 1), so
gains are reported both raw and as the fraction of that ceiling actually
captured.  Points at the ceiling (x = 1) have nothing to gain and carry a
None fraction.
"""

from __future__ import annotations

from dataclasses import dataclass

__all__ = ["GainPoint", "GainSummary", "gain_analysis"]


@dataclass(frozen=True, slots=True)
class GainPoint:
    baseline: float
    improved: float
    gain: float
    ceiling: float
    fraction_of_ceiling: float | None

    def to_record(self) -> dict:
        return {
            "baseline": self.baseline,
            "improved": self.improved,
            "gain": self.gain,
            "ceiling": self.ceiling,
            "fraction_of_ceiling": self.fraction_of_ceiling,
        }


@dataclass(frozen=True, slots=True)
class GainSummary:
    n: int
    mean_baseline: float
    mean_improved: float
    mean_gain: float
    mean_fraction_of_ceiling: float | None
    points: tuple[GainPoint, ...]

    def to_record(self) -> dict:
        return {
            "n": self.n,
            "mean_baseline": self.mean_baseline,
            "mean_improved": self.mean_improved,
            "mean_gain": self.mean_gain,
            "mean_fraction_of_ceiling": self.mean_fraction_of_ceiling,
        }


def gain_analysis(baseline: list[float], improved: list[float]) -> GainSummary:
    if len(baseline) != len(improved):
        raise ValueError("baseline and improved must have equal length")
    if not baseline:
        raise ValueError("no points")
    points = []
    for x, y in zip(baseline, improved):
        if not (-1.0 <= x <= 1.0 and -1.0 <= y <= 1.0):
            raise ValueError(f"similarities must lie in [-1, 1], got ({x}, {y})")
        ceiling = 1.0 - x
        fraction = (y - x) / ceiling if ceiling > 0 else None
        points.append(GainPoint(x, y, y - x, ceiling, fraction))
    fractions = [p.fraction_of_ceiling for p in points if p.fraction_of_ceiling is not None]
    n = len(points)
    return GainSummary(
        n=n,
        mean_baseline=sum(p.baseline for p in points) / n,
        mean_improved=sum(p.improved for p in points) / n,
        mean_gain=sum(p.gain for p in points) / n,
        mean_fraction_of_ceiling=sum(fractions) / len(fractions) if fractions else None,
        points=tuple(points),
    )
