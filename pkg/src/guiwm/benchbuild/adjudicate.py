"""Applying human duplicate decisions to a corpus.

The decisions file is append-only JSONL; the latest line for a cluster
wins, so corrections are new appends, never edits.  ``apply_adjudication``
is a pure function of (transitions, clusters, resolved decisions): for a
cluster decided "duplicates" every member except the representative is
dropped (default representative: lowest member id); "distinct" and
undecided clusters keep all members.  Input order is preserved, which
makes the output reproducible byte for byte regardless of which tool wrote
the decisions.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

from ..trajectory import Transition
from .dedup import DedupCluster

__all__ = [
    "Decision",
    "UnknownCluster",
    "InvalidRepresentative",
    "AdjudicationStats",
    "validate_decision",
    "append_decision",
    "read_decisions",
    "resolve_decisions",
    "apply_adjudication",
]

DECISIONS = ("duplicates", "distinct")


class UnknownCluster(KeyError):
    pass


class InvalidRepresentative(ValueError):
    pass


@dataclass(frozen=True)
class Decision:
    cluster_id: str
    decision: str  # duplicates | distinct
    representative: str | None = None
    annotator: str | None = None
    timestamp: str | None = None

    def __post_init__(self) -> None:
        if self.decision not in DECISIONS:
            raise ValueError(f"decision must be one of {DECISIONS}, got {self.decision!r}")

    def to_record(self) -> dict:
        return {
            "cluster_id": self.cluster_id,
            "decision": self.decision,
            "representative": self.representative,
            "annotator": self.annotator,
            "timestamp": self.timestamp,
        }

    @classmethod
    def from_record(cls, record: dict) -> "Decision":
        return cls(
            cluster_id=record["cluster_id"],
            decision=record["decision"],
            representative=record.get("representative"),
            annotator=record.get("annotator"),
            timestamp=record.get("timestamp"),
        )


def validate_decision(decision: Decision, clusters_by_id: dict[str, DedupCluster]) -> None:
    cluster = clusters_by_id.get(decision.cluster_id)
    if cluster is None:
        raise UnknownCluster(decision.cluster_id)
    if decision.representative is not None and decision.representative not in cluster.members:
        raise InvalidRepresentative(
            f"{decision.representative!r} is not a member of cluster {decision.cluster_id}"
        )


def append_decision(path: str | Path, decision: Decision, clusters: list[DedupCluster]) -> Decision:
    """Validate against the clusters, then append; invalid decisions write
    nothing."""
    clusters_by_id = {c.cluster_id: c for c in clusters}
    validate_decision(decision, clusters_by_id)
    if decision.timestamp is None:
        decision = Decision(
            decision.cluster_id,
            decision.decision,
            decision.representative,
            decision.annotator,
            datetime.now(timezone.utc).isoformat(),
        )
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "a", encoding="utf-8") as fh:
        fh.write(json.dumps(decision.to_record(), ensure_ascii=False, sort_keys=True) + "\n")
    return decision


def read_decisions(path: str | Path) -> list[Decision]:
    path = Path(path)
    if not path.exists():
        return []
    out = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                out.append(Decision.from_record(json.loads(line)))
    return out


def resolve_decisions(decisions: list[Decision]) -> dict[str, Decision]:
    """Latest decision per cluster, by file order."""
    resolved: dict[str, Decision] = {}
    for decision in decisions:
        resolved[decision.cluster_id] = decision
    return resolved


@dataclass(frozen=True)
class AdjudicationStats:
    total: int
    kept: int
    removed: int
    clusters_total: int
    clusters_collapsed: int
    clusters_distinct: int
    clusters_pending: int

    def summary_line(self) -> str:
        return (
            f"{self.kept}/{self.total} transitions kept ({self.removed} removed); "
            f"clusters: {self.clusters_collapsed} collapsed, "
            f"{self.clusters_distinct} distinct, {self.clusters_pending} pending"
        )


def apply_adjudication(
    transitions: list[Transition],
    clusters: list[DedupCluster],
    decisions: list[Decision],
) -> tuple[list[Transition], AdjudicationStats]:
    clusters_by_id = {c.cluster_id: c for c in clusters}
    resolved = resolve_decisions(decisions)
    for decision in resolved.values():
        validate_decision(decision, clusters_by_id)

    drop: set[str] = set()
    collapsed = distinct = 0
    for cluster_id, decision in resolved.items():
        cluster = clusters_by_id[cluster_id]
        if decision.decision == "distinct":
            distinct += 1
            continue
        collapsed += 1
        representative = decision.representative or min(cluster.members)
        drop.update(m for m in cluster.members if m != representative)

    kept = [t for t in transitions if t.id not in drop]
    stats = AdjudicationStats(
        total=len(transitions),
        kept=len(kept),
        removed=len(transitions) - len(kept),
        clusters_total=len(clusters),
        clusters_collapsed=collapsed,
        clusters_distinct=distinct,
        clusters_pending=len(clusters) - len(resolved),
    )
    return kept, stats
