"""YAML config for endpoints and embedding providers.

Example:

    cache_dir: cache
    endpoints:
      wm:
        kind: http
        base_url: https://models.internal/v1
        model_name: mwm-8b
        auth_env: WM_API_KEY
        max_in_flight: 8
      mock-judge:
        kind: mock
        model_name: scripted
        default_response: '{"Thoughts": "ok", "Status": "success"}'
        rules:
          - pattern: 'Action: .*TAP'
            response: 'Next State Reasoning: r\\n\\nHTML: <html>...</html>'
            latency: 0.01
    providers:
      fallback: {kind: fallback}
      dino-a:
        kind: http
        base_url: https://embed.internal
        model_name: dino-a
        auth_env: EMBED_KEY

Auth values are environment variable *names*; secrets never live in the
file itself.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .core import ModelEndpoint, ScriptedRule

__all__ = ["GatewayConfig", "ProviderSpec", "load_config"]


@dataclass(frozen=True)
class ProviderSpec:
    id: str
    kind: str  # fallback | http | table
    base_url: str = ""
    model_name: str = ""
    auth_env: str | None = None
    timeout: float = 60.0
    vectors: dict = field(default_factory=dict)  # table kind only


@dataclass(frozen=True)
class GatewayConfig:
    endpoints: dict[str, ModelEndpoint]
    providers: dict[str, ProviderSpec]
    cache_dir: Path | None


def _parse_rule(raw: dict) -> ScriptedRule:
    known = {"response", "pattern", "key_prefix", "latency", "fail_times"}
    unknown = set(raw) - known
    if unknown:
        raise ValueError(f"unknown mock rule keys: {sorted(unknown)}")
    if "response" not in raw:
        raise ValueError("mock rule needs a response")
    return ScriptedRule(
        response=raw["response"],
        pattern=raw.get("pattern"),
        key_prefix=raw.get("key_prefix"),
        latency=float(raw.get("latency", 0.0)),
        fail_times=int(raw.get("fail_times", 0)),
    )


def _parse_endpoint(endpoint_id: str, raw: dict) -> ModelEndpoint:
    return ModelEndpoint(
        id=endpoint_id,
        model_name=raw.get("model_name", endpoint_id),
        kind=raw.get("kind", "http"),
        base_url=raw.get("base_url", ""),
        auth_env=raw.get("auth_env"),
        max_in_flight=int(raw.get("max_in_flight", 4)),
        timeout=float(raw.get("timeout", 60.0)),
        max_retries=int(raw.get("max_retries", 3)),
        rules=tuple(_parse_rule(r) for r in raw.get("rules", [])),
        default_response=raw.get("default_response"),
    )


def _parse_provider(provider_id: str, raw: dict) -> ProviderSpec:
    kind = raw.get("kind", "http")
    if kind not in ("fallback", "http", "table"):
        raise ValueError(f"provider {provider_id!r}: unknown kind {kind!r}")
    return ProviderSpec(
        id=provider_id,
        kind=kind,
        base_url=raw.get("base_url", ""),
        model_name=raw.get("model_name", provider_id),
        auth_env=raw.get("auth_env"),
        timeout=float(raw.get("timeout", 60.0)),
        vectors=raw.get("vectors", {}),
    )


def load_config(path: str | Path) -> GatewayConfig:
    path = Path(path)
    with open(path, encoding="utf-8") as fh:
        raw = yaml.safe_load(fh) or {}
    if not isinstance(raw, dict):
        raise ValueError(f"{path}: top level must be a mapping")
    endpoints = {eid: _parse_endpoint(eid, spec or {}) for eid, spec in (raw.get("endpoints") or {}).items()}
    providers = {pid: _parse_provider(pid, spec or {}) for pid, spec in (raw.get("providers") or {}).items()}
    cache_dir = raw.get("cache_dir")
    if cache_dir is not None:
        cache_dir = Path(cache_dir)
        if not cache_dir.is_absolute():
            cache_dir = path.parent / cache_dir
    return GatewayConfig(endpoints=endpoints, providers=providers, cache_dir=cache_dir)
