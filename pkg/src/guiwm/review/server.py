"""Cluster review HTTP API + static shell.

Endpoints:

    GET  /api/clusters                paged cluster list with decision state
    POST /api/clusters/{id}/decision  record duplicates/distinct (validated,
                                      append-only; invalid writes nothing)
    GET  /api/images/{key}            screenshots referenced by clusters

Image access is allow-listed: only files referenced by the loaded clusters
are served, under opaque content keys, so the server never exposes
arbitrary paths.  Posting an identical decision again is a no-op (200 with
the existing state) rather than a duplicate log line.
"""

from __future__ import annotations

import hashlib
from pathlib import Path

from fastapi import FastAPI, HTTPException
from fastapi.responses import FileResponse, HTMLResponse
from pydantic import BaseModel

from ..benchbuild import (
    Decision,
    DedupCluster,
    InvalidRepresentative,
    UnknownCluster,
    append_decision,
    read_clusters,
    read_decisions,
    resolve_decisions,
    validate_decision,
)

__all__ = ["create_app"]


class DecisionBody(BaseModel):
    decision: str
    representative: str | None = None
    annotator: str | None = None


def _image_key(path: str) -> str:
    return hashlib.sha256(path.encode("utf-8")).hexdigest()[:20]


def create_app(
    clusters_path: str | Path,
    decisions_path: str | Path,
    assets_dir: str | Path | None = None,
) -> FastAPI:
    clusters_path = Path(clusters_path)
    decisions_path = Path(decisions_path)
    clusters: list[DedupCluster] = read_clusters(clusters_path)
    clusters_by_id = {c.cluster_id: c for c in clusters}

    image_paths: dict[str, Path] = {}
    for cluster in clusters:
        for detail in cluster.member_details.values():
            for field in ("s_t", "s_t1"):
                ref = detail.get(field)
                if ref:
                    image_paths[_image_key(ref)] = Path(ref)

    app = FastAPI(title="cluster review")

    def cluster_payload(cluster: DedupCluster, decision: Decision | None) -> dict:
        record = cluster.to_record()
        # to_record aliases the cluster's own dict; rewrite a copy.
        record["member_details"] = {
            member: dict(detail) for member, detail in record["member_details"].items()
        }
        for detail in record["member_details"].values():
            for field in ("s_t", "s_t1"):
                ref = detail.get(field)
                if ref:
                    detail[field] = f"/api/images/{_image_key(ref)}"
        record["decision"] = decision.to_record() if decision else None
        record["status"] = "decided" if decision else "pending"
        return record

    @app.get("/api/clusters")
    def list_clusters(status: str = "all", offset: int = 0, limit: int = 50) -> dict:
        if status not in ("all", "pending", "decided"):
            raise HTTPException(422, "status must be all, pending, or decided")
        if offset < 0 or limit < 1 or limit > 500:
            raise HTTPException(422, "offset must be >= 0 and 1 <= limit <= 500")
        resolved = resolve_decisions(read_decisions(decisions_path))
        rows = [cluster_payload(c, resolved.get(c.cluster_id)) for c in clusters]
        if status != "all":
            rows = [r for r in rows if r["status"] == status]
        total = len(rows)
        page = rows[offset : offset + limit]
        decided = sum(1 for c in clusters if c.cluster_id in resolved)
        return {
            "clusters": page,
            "total": total,
            "offset": offset,
            "limit": limit,
            "counts": {"all": len(clusters), "decided": decided, "pending": len(clusters) - decided},
        }

    @app.get("/api/clusters/{cluster_id}")
    def get_cluster(cluster_id: str) -> dict:
        cluster = clusters_by_id.get(cluster_id)
        if cluster is None:
            raise HTTPException(404, f"unknown cluster {cluster_id}")
        resolved = resolve_decisions(read_decisions(decisions_path))
        return cluster_payload(cluster, resolved.get(cluster_id))

    @app.post("/api/clusters/{cluster_id}/decision")
    def post_decision(cluster_id: str, body: DecisionBody) -> dict:
        cluster = clusters_by_id.get(cluster_id)
        if cluster is None:
            raise HTTPException(404, f"unknown cluster {cluster_id}")
        try:
            decision = Decision(
                cluster_id=cluster_id,
                decision=body.decision,
                representative=body.representative,
                annotator=body.annotator,
            )
            validate_decision(decision, clusters_by_id)
        except (ValueError, UnknownCluster) as exc:
            # Includes InvalidRepresentative; nothing has been written.
            raise HTTPException(422, str(exc)) from exc
        current = resolve_decisions(read_decisions(decisions_path)).get(cluster_id)
        if (
            current is not None
            and current.decision == decision.decision
            and current.representative == decision.representative
        ):
            return {"cluster_id": cluster_id, "decision": current.to_record(), "written": False}
        try:
            written = append_decision(decisions_path, decision, clusters)
        except (InvalidRepresentative, UnknownCluster) as exc:
            raise HTTPException(422, str(exc)) from exc
        return {"cluster_id": cluster_id, "decision": written.to_record(), "written": True}

    @app.get("/api/images/{key}")
    def get_image(key: str) -> FileResponse:
        path = image_paths.get(key)
        if path is None or not path.exists():
            raise HTTPException(404, "unknown image")
        return FileResponse(path)

    index_candidates = []
    if assets_dir is not None:
        index_candidates.append(Path(assets_dir) / "index.html")
    index_candidates.append(Path(__file__).parent / "static" / "index.html")

    @app.get("/", response_class=HTMLResponse)
    def index() -> str:
        for candidate in index_candidates:
            if candidate.exists():
                return candidate.read_text(encoding="utf-8")
        raise HTTPException(500, "no review page available")

    if assets_dir is not None:
        assets_root = Path(assets_dir).resolve()

        @app.get("/assets/{name}")
        def get_asset(name: str) -> FileResponse:
            target = (assets_root / name).resolve()
            if assets_root not in target.parents or not target.is_file():
                raise HTTPException(404, "unknown asset")
            return FileResponse(target)

    return app
