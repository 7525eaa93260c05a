"""Near-duplicate cluster discovery.

Comparisons are scoped to (app, action signature) groups: two transitions
can only be duplicates if they happen in the same app and their actions
are structurally alike.  The signature keeps an action's kind plus its
distinguishing field (scroll direction, text presence, target app) and
quantizes coordinates onto a 20 x 20 grid, so taps a few pixels apart
share a signature while taps across the screen do not.

Within a group, a pair is linked when embedding cosine similarity is
strictly above the threshold on the current screenshot AND on the next
one; linked pairs are closed transitively (connected components), and
components of two or more become clusters for human review.  Cluster ids
are content-derived from the sorted member ids, so regenerating clusters
over the same corpus names them identically.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

from ..actions import CanonicalAction, action_prompt_text
from ..gateway.embeddings import EmbeddingProvider, cosine
from ..trajectory import Transition

__all__ = [
    "SIGNATURE_GRID",
    "DedupConfig",
    "DedupCluster",
    "action_signature",
    "find_duplicate_clusters",
    "write_clusters",
    "read_clusters",
]

SIGNATURE_GRID = 20  # cells per axis over the [0, 1000] coordinate space


def _cell(value: int) -> int:
    return min(SIGNATURE_GRID - 1, value * SIGNATURE_GRID // 1000)


def action_signature(action: CanonicalAction) -> str:
    """Structural bucket for an action; see module docstring."""
    parts = [action.kind]
    if action.point is not None:
        parts.append(f"p{_cell(action.point[0])},{_cell(action.point[1])}")
    if action.end_point is not None:
        parts.append(f"e{_cell(action.end_point[0])},{_cell(action.end_point[1])}")
    if action.direction is not None:
        parts.append(f"d{action.direction}")
    if action.text is not None:
        parts.append("t1" if action.text else "t0")
    if action.app_name is not None:
        parts.append(f"a{action.app_name}")
    return ":".join(parts)


@dataclass(frozen=True)
class DedupConfig:
    tau: float = 0.997
    provider_id: str = "fallback"

    def __post_init__(self) -> None:
        if not (0.0 < self.tau <= 1.0):
            raise ValueError(f"tau must be in (0, 1], got {self.tau}")


@dataclass(frozen=True)
class DedupCluster:
    cluster_id: str
    app: str
    signature: str
    members: tuple[str, ...]  # transition ids, sorted
    # (id_a, id_b, sim_current, sim_next) for every linked pair
    evidence: tuple[tuple[str, str, float, float], ...]
    member_details: dict = field(default_factory=dict, compare=False, hash=False)

    def to_record(self) -> dict:
        return {
            "cluster_id": self.cluster_id,
            "app": self.app,
            "signature": self.signature,
            "members": list(self.members),
            "evidence": [list(e) for e in self.evidence],
            "member_details": self.member_details,
        }

    @classmethod
    def from_record(cls, record: dict) -> "DedupCluster":
        return cls(
            cluster_id=record["cluster_id"],
            app=record["app"],
            signature=record["signature"],
            members=tuple(record["members"]),
            evidence=tuple((a, b, float(s1), float(s2)) for a, b, s1, s2 in record["evidence"]),
            member_details=record.get("member_details", {}),
        )


def cluster_id_for(members: tuple[str, ...]) -> str:
    digest = hashlib.sha256(";".join(sorted(members)).encode()).hexdigest()
    return f"c{digest[:12]}"


def find_duplicate_clusters(
    transitions: list[Transition],
    provider: EmbeddingProvider,
    config: DedupConfig = DedupConfig(),
) -> list[DedupCluster]:
    groups: dict[tuple[str, str], list[Transition]] = {}
    for t in transitions:
        groups.setdefault((t.app, action_signature(t.action)), []).append(t)

    clusters: list[DedupCluster] = []
    for (app, signature), members in groups.items():
        if len(members) < 2:
            continue
        members = sorted(members, key=lambda t: t.id)
        embeds_t = {t.id: provider.embed(t.s_t) for t in members}
        embeds_t1 = {t.id: provider.embed(t.s_t1) for t in members}

        parent = {t.id: t.id for t in members}

        def find(x: str) -> str:
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        edges: list[tuple[str, str, float, float]] = []
        for i, a in enumerate(members):
            for b in members[i + 1 :]:
                sim_t = cosine(embeds_t[a.id], embeds_t[b.id])
                sim_t1 = cosine(embeds_t1[a.id], embeds_t1[b.id])
                if sim_t > config.tau and sim_t1 > config.tau:
                    edges.append((a.id, b.id, sim_t, sim_t1))
                    ra, rb = find(a.id), find(b.id)
                    if ra != rb:
                        parent[max(ra, rb)] = min(ra, rb)

        components: dict[str, list[str]] = {}
        for t in members:
            components.setdefault(find(t.id), []).append(t.id)
        by_id = {t.id: t for t in members}
        for component in components.values():
            if len(component) < 2:
                continue
            component = tuple(sorted(component))
            in_component = set(component)
            evidence = tuple(e for e in edges if e[0] in in_component)
            details = {
                tid: {
                    "s_t": by_id[tid].s_t.image_ref,
                    "s_t1": by_id[tid].s_t1.image_ref,
                    "action": action_prompt_text(by_id[tid].action),
                    "goal": by_id[tid].goal,
                }
                for tid in component
            }
            clusters.append(
                DedupCluster(
                    cluster_id=cluster_id_for(component),
                    app=app,
                    signature=signature,
                    members=component,
                    evidence=evidence,
                    member_details=details,
                )
            )
    clusters.sort(key=lambda c: c.cluster_id)
    return clusters


def write_clusters(clusters: list[DedupCluster], path: str | Path) -> int:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        for cluster in clusters:
            fh.write(json.dumps(cluster.to_record(), ensure_ascii=False, sort_keys=True) + "\n")
    return len(clusters)


def read_clusters(path: str | Path) -> list[DedupCluster]:
    clusters = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                clusters.append(DedupCluster.from_record(json.loads(line)))
    return clusters
