"""Embedding similarity between two screenshots across providers.

Scores are cosines of unit vectors, one per configured provider, plus the
plain mean.  When a remote provider is unreachable the caller may opt in
to substituting the deterministic fallback embedding for that provider
(``allow_fallback``); the substitution is recorded so reports can show
which scores came from the stand-in.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..gateway.embeddings import EmbeddingProvider, FallbackEmbedder, ProviderUnavailable, cosine
from ..trajectory import StateImage

__all__ = ["SimilarityScore", "state_similarity"]


@dataclass(frozen=True)
class SimilarityScore:
    per_provider: dict[str, float]
    mean: float
    substituted: tuple[str, ...] = ()

    def to_record(self) -> dict:
        record = {"per_provider": dict(self.per_provider), "mean": self.mean}
        if self.substituted:
            record["substituted"] = list(self.substituted)
        return record


def state_similarity(
    a: StateImage,
    b: StateImage,
    providers: dict[str, EmbeddingProvider],
    provider_ids: list[str] | None = None,
    allow_fallback: bool = False,
) -> SimilarityScore:
    if provider_ids is None:
        provider_ids = sorted(providers)
    if not provider_ids:
        raise ValueError("at least one provider id is required")
    scores: dict[str, float] = {}
    substituted: list[str] = []
    fallback = providers.get("fallback") or FallbackEmbedder()
    for pid in provider_ids:
        try:
            provider = providers[pid]
        except KeyError:
            raise KeyError(f"unknown provider {pid!r}; configured: {sorted(providers)}") from None
        try:
            scores[pid] = cosine(provider.embed(a), provider.embed(b))
        except ProviderUnavailable:
            if not allow_fallback:
                raise
            scores[pid] = cosine(fallback.embed(a), fallback.embed(b))
            substituted.append(pid)
    mean = sum(scores.values()) / len(scores)
    return SimilarityScore(per_provider=scores, mean=mean, substituted=tuple(substituted))
