"""Model access layer: chat completions and image embeddings.

Every outbound call goes through one `Gateway`, which owns the disk cache,
per-endpoint concurrency limits, retry policy, and transport selection
(real HTTP or scripted mock).  Responses are cached by a content hash of
the full request, so reruns of any pipeline are free and deterministic.
"""

from .cache import ResponseCache, request_key
from .core import (
    AuthError,
    ChatRequest,
    EndpointError,
    Gateway,
    GatewayTimeout,
    ImagePart,
    ModelEndpoint,
    RequestBudgetExceeded,
    ScriptedRule,
    TextPart,
    MAX_OUTPUT_TOKENS,
)
from .config import load_config, GatewayConfig, ProviderSpec
from .embeddings import (
    CachedEmbedder,
    EmbeddingProvider,
    FallbackEmbedder,
    HttpEmbedder,
    ImageDecodeError,
    ProviderUnavailable,
    TableEmbedder,
    build_providers,
    cosine,
)

__all__ = [
    "AuthError",
    "CachedEmbedder",
    "ChatRequest",
    "EndpointError",
    "EmbeddingProvider",
    "FallbackEmbedder",
    "Gateway",
    "GatewayConfig",
    "GatewayTimeout",
    "HttpEmbedder",
    "ImageDecodeError",
    "ImagePart",
    "MAX_OUTPUT_TOKENS",
    "ModelEndpoint",
    "ProviderSpec",
    "ProviderUnavailable",
    "RequestBudgetExceeded",
    "ResponseCache",
    "ScriptedRule",
    "TableEmbedder",
    "TextPart",
    "build_providers",
    "cosine",
    "load_config",
    "request_key",
]
