"""Image embedding providers.

All providers return unit-norm float64 vectors, so similarity is a plain
dot product.  Remote (http) providers are the interesting ones in
production; the deterministic fallback keeps every pipeline runnable with
zero network access and is also the tie-breaker of last resort when a
remote provider is down and the caller opted in via ``allow_fallback``.

Fallback definition (exact, so it can be independently re-derived):
grayscale each pixel as 0.299 r + 0.587 g + 0.114 b in float, partition the
image into a 32 x 32 cell grid using floor(i * H / 32) row boundaries (same
for columns), average each cell, flatten row-major to 1024 dims, subtract
the vector mean, and L2-normalize.  When an axis is shorter than 32 px some
floor boundaries coincide; such a cell takes the single row/column at its
lower boundary instead of being empty.  A constant image centers to the zero
vector, which is not normalizable; by convention it maps to
sign(gray_mean - 127.5) * ones / sqrt(1024) with sign(0) = +1, which keeps
all-black vs all-white at exactly -1 cosine.
"""

from __future__ import annotations

import base64
import hashlib
import json
from pathlib import Path
from typing import Protocol

import httpx
import numpy as np
from PIL import Image, UnidentifiedImageError

from ..trajectory import StateImage
from .cache import ResponseCache
from .config import ProviderSpec

__all__ = [
    "EmbeddingProvider",
    "FallbackEmbedder",
    "HttpEmbedder",
    "TableEmbedder",
    "CachedEmbedder",
    "ProviderUnavailable",
    "ImageDecodeError",
    "build_providers",
    "cosine",
]

FALLBACK_CELLS = 32


class ProviderUnavailable(RuntimeError):
    pass


class ImageDecodeError(ValueError):
    pass


class EmbeddingProvider(Protocol):
    id: str

    def embed(self, image: StateImage) -> np.ndarray: ...


def cosine(u: np.ndarray, v: np.ndarray) -> float:
    """Dot product of unit vectors, clipped against float drift."""
    return float(np.clip(np.dot(u, v), -1.0, 1.0))


def _open_image(image: StateImage) -> Image.Image:
    try:
        img = Image.open(image.image_ref)
        img.load()
    except (FileNotFoundError, UnidentifiedImageError, OSError) as exc:
        raise ImageDecodeError(f"cannot decode {image.image_ref}: {exc}") from exc
    return img


def _normalize(vec: np.ndarray) -> np.ndarray:
    norm = float(np.linalg.norm(vec))
    if norm == 0.0:
        raise ValueError("zero vector cannot be normalized")
    return vec / norm


class FallbackEmbedder:
    """Deterministic local embedding; see module docstring for the exact map."""

    def __init__(self, provider_id: str = "fallback"):
        self.id = provider_id

    def embed(self, image: StateImage) -> np.ndarray:
        img = _open_image(image).convert("RGB")
        arr = np.asarray(img, dtype=np.float64)
        gray = arr[:, :, 0] * 0.299 + arr[:, :, 1] * 0.587 + arr[:, :, 2] * 0.114
        h, w = gray.shape
        rows = [h * i // FALLBACK_CELLS for i in range(FALLBACK_CELLS + 1)]
        cols = [w * j // FALLBACK_CELLS for j in range(FALLBACK_CELLS + 1)]
        cells = np.empty((FALLBACK_CELLS, FALLBACK_CELLS), dtype=np.float64)
        for i in range(FALLBACK_CELLS):
            r0, r1 = rows[i], max(rows[i + 1], rows[i] + 1)
            for j in range(FALLBACK_CELLS):
                c0, c1 = cols[j], max(cols[j + 1], cols[j] + 1)
                cells[i, j] = gray[r0:r1, c0:c1].mean()
        vec = cells.reshape(-1)
        centered = vec - vec.mean()
        norm = float(np.linalg.norm(centered))
        if norm < 1e-12:
            sign = 1.0 if vec.mean() >= 127.5 else -1.0
            return np.full(vec.size, sign / np.sqrt(vec.size))
        return centered / norm


class HttpEmbedder:
    """Remote embedding service: POST /embed {model, image_b64} -> {vector}."""

    def __init__(self, spec: ProviderSpec, auth_token: str | None = None):
        self.id = spec.id
        self.spec = spec
        headers = {}
        if auth_token:
            headers["Authorization"] = f"Bearer {auth_token}"
        self.client = httpx.Client(base_url=spec.base_url, headers=headers, timeout=spec.timeout)

    def embed(self, image: StateImage) -> np.ndarray:
        try:
            data = Path(image.image_ref).read_bytes()
        except OSError as exc:
            raise ImageDecodeError(f"cannot read {image.image_ref}: {exc}") from exc
        payload = {"model": self.spec.model_name, "image_b64": base64.b64encode(data).decode("ascii")}
        try:
            resp = self.client.post("/embed", json=payload)
        except httpx.HTTPError as exc:
            raise ProviderUnavailable(f"{self.id}: {exc}") from exc
        if resp.status_code != 200:
            raise ProviderUnavailable(f"{self.id}: HTTP {resp.status_code}")
        vec = np.asarray(resp.json()["vector"], dtype=np.float64)
        return _normalize(vec)


class TableEmbedder:
    """Vectors looked up by image basename; for configs and tests that need
    exact planted similarities."""

    def __init__(self, provider_id: str, vectors: dict[str, list[float]]):
        self.id = provider_id
        self.vectors = {k: _normalize(np.asarray(v, dtype=np.float64)) for k, v in vectors.items()}

    def embed(self, image: StateImage) -> np.ndarray:
        name = Path(image.image_ref).name
        if name not in self.vectors:
            raise ProviderUnavailable(f"{self.id}: no vector for {name}")
        return self.vectors[name]


class CachedEmbedder:
    """Disk-cache wrapper keyed by (provider id, image content hash)."""

    def __init__(self, inner: EmbeddingProvider, cache: ResponseCache):
        self.id = inner.id
        self.inner = inner
        self.cache = cache

    def embed(self, image: StateImage) -> np.ndarray:
        try:
            digest = hashlib.sha256(Path(image.image_ref).read_bytes()).hexdigest()
        except OSError as exc:
            raise ImageDecodeError(f"cannot read {image.image_ref}: {exc}") from exc
        slot = f"embed-{self.id}"
        hit = self.cache.get(slot, digest)
        if hit is not None:
            return np.asarray(json.loads(hit), dtype=np.float64)
        vec = self.inner.embed(image)
        self.cache.put(slot, digest, json.dumps(vec.tolist()))
        return vec


def build_providers(
    specs: dict[str, ProviderSpec],
    cache_dir: str | Path | None = None,
    env: dict[str, str] | None = None,
) -> dict[str, EmbeddingProvider]:
    """Instantiate configured providers; a plain "fallback" is always present."""
    import os

    source = env if env is not None else os.environ
    providers: dict[str, EmbeddingProvider] = {}
    for pid, spec in specs.items():
        if spec.kind == "fallback":
            providers[pid] = FallbackEmbedder(pid)
        elif spec.kind == "table":
            providers[pid] = TableEmbedder(pid, spec.vectors)
        else:
            token = source.get(spec.auth_env) if spec.auth_env else None
            provider: EmbeddingProvider = HttpEmbedder(spec, token)
            if cache_dir is not None:
                provider = CachedEmbedder(provider, ResponseCache(cache_dir))
            providers[pid] = provider
    providers.setdefault("fallback", FallbackEmbedder())
    return providers
