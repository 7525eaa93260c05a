"""Content-addressed response cache.

Layout: ``<cache_dir>/<endpoint_id>/<key[:2]>/<key>.txt`` where key is the
sha256 hex of a canonical serialization of the request (endpoint id, model
name, ordered parts with image bytes hashed, sampling settings).  Entries
are written atomically (tmp file + rename) so a crashed run never leaves a
torn entry behind.
"""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
from pathlib import Path

__all__ = ["request_key", "ResponseCache"]


def request_key(endpoint_id: str, model_name: str, canonical_parts: list[dict], temperature: float, max_output_tokens: int) -> str:
    canonical = json.dumps(
        {
            "endpoint": endpoint_id,
            "model": model_name,
            "parts": canonical_parts,
            "temperature": temperature,
            "max_output_tokens": max_output_tokens,
        },
        sort_keys=True,
        separators=(",", ":"),
        ensure_ascii=False,
    )
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


class ResponseCache:
    """Plain-text response store keyed by request hash."""

    def __init__(self, root: str | Path):
        self.root = Path(root)

    def _path(self, endpoint_id: str, key: str) -> Path:
        return self.root / endpoint_id / key[:2] / f"{key}.txt"

    def get(self, endpoint_id: str, key: str) -> str | None:
        path = self._path(endpoint_id, key)
        try:
            return path.read_text(encoding="utf-8")
        except FileNotFoundError:
            return None

    def put(self, endpoint_id: str, key: str, text: str) -> None:
        path = self._path(endpoint_id, key)
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".tmp-", suffix=".txt")
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as fh:
                fh.write(text)
            os.replace(tmp, path)
        except BaseException:
            try:
                os.unlink(tmp)
            except OSError:
                pass
            raise

    def __contains__(self, pair: tuple[str, str]) -> bool:
        endpoint_id, key = pair
        return self._path(endpoint_id, key).exists()
