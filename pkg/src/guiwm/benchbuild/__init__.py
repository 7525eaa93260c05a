"""Benchmark curation: near-duplicate discovery and adjudication.

Transitions that share an app and an action signature are compared by
embedding similarity of both endpoint screenshots; pairs exceeding the
threshold on both are linked, connected components become clusters, and a
human decides per cluster whether to collapse it to one representative.
Decisions are an append-only JSONL log applied deterministically, so the
CLI and the review UI produce byte-identical curated corpora from the
same log.
"""

from .dedup import (
    DedupCluster,
    DedupConfig,
    action_signature,
    find_duplicate_clusters,
    read_clusters,
    write_clusters,
)
from .adjudicate import (
    AdjudicationStats,
    Decision,
    InvalidRepresentative,
    UnknownCluster,
    append_decision,
    apply_adjudication,
    read_decisions,
    resolve_decisions,
    validate_decision,
)
from .sampling import sample_split

__all__ = [
    "AdjudicationStats",
    "Decision",
    "DedupCluster",
    "DedupConfig",
    "InvalidRepresentative",
    "UnknownCluster",
    "action_signature",
    "append_decision",
    "apply_adjudication",
    "find_duplicate_clusters",
    "read_clusters",
    "read_decisions",
    "resolve_decisions",
    "sample_split",
    "validate_decision",
    "write_clusters",
]
