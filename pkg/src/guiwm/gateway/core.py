"""Chat-completion dispatch with caching, retries, and concurrency limits.

A ``ChatRequest`` is an ordered list of text and image parts, sent as a
single user message in the chat-completions wire format with images inlined
as base64 data URLs.  Greedy decoding (temperature 0) is the default
everywhere; any request asking for more than ``MAX_OUTPUT_TOKENS`` output
tokens is rejected before dispatch.

Endpoints come in two kinds:

* ``http``: a real chat-completions server, reached via httpx with
  exponential backoff on transient failures (connect errors, timeouts,
  429, 5xx).  Auth material is referenced by environment variable name,
  never stored in config values.
* ``mock``: a scripted endpoint resolved in-process from an ordered rule
  list (regex over the concatenated text parts, or request-key prefix).
  Mocks honor the same cache, limits, and accounting as real endpoints,
  which is what makes hermetic pipeline runs possible.
"""

from __future__ import annotations

import base64
import hashlib
import random
import re
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path

import httpx

from .cache import ResponseCache, request_key

__all__ = [
    "MAX_OUTPUT_TOKENS",
    "TextPart",
    "ImagePart",
    "ChatRequest",
    "ScriptedRule",
    "ModelEndpoint",
    "EndpointError",
    "AuthError",
    "GatewayTimeout",
    "RequestBudgetExceeded",
    "Gateway",
]

MAX_OUTPUT_TOKENS = 16384


class EndpointError(RuntimeError):
    """Endpoint kept failing after the configured retries.

    Carries the request key so a failed call can be located in logs and
    retried by hand.
    """

    def __init__(self, message: str, request_key: str | None = None):
        super().__init__(message)
        self.request_key = request_key


class AuthError(EndpointError):
    """Credential rejected (HTTP 401/403); retrying would not help."""


class GatewayTimeout(EndpointError):
    """Deadline exceeded on every attempt."""


class RequestBudgetExceeded(ValueError):
    """Request asks for more output tokens than any endpoint may serve."""


@dataclass(frozen=True, slots=True)
class TextPart:
    text: str


@dataclass(frozen=True, slots=True)
class ImagePart:
    """Image by file reference; bytes are read at dispatch time."""

    path: str

    def read_bytes(self) -> bytes:
        return Path(self.path).read_bytes()


Part = TextPart | ImagePart


@dataclass(frozen=True)
class ChatRequest:
    parts: tuple[Part, ...]
    temperature: float = 0.0
    max_output_tokens: int = 4096

    def __post_init__(self) -> None:
        if not self.parts:
            raise ValueError("request must contain at least one part")
        object.__setattr__(self, "parts", tuple(self.parts))

    def text(self) -> str:
        """All text parts joined; what mock rules match against."""
        return "\n".join(p.text for p in self.parts if isinstance(p, TextPart))

    def with_extra_text(self, text: str) -> "ChatRequest":
        return ChatRequest(self.parts + (TextPart(text),), self.temperature, self.max_output_tokens)


@dataclass(frozen=True)
class ScriptedRule:
    """One mock behavior: respond with ``response`` when the rule matches.

    ``pattern`` is a regex searched over the request's concatenated text
    parts (DOTALL); ``key_prefix`` instead matches the request key's hex
    prefix.  ``latency`` seconds are slept while the in-flight slot is
    held, so concurrency limits are observable in tests.
    """

    response: str
    pattern: str | None = None
    key_prefix: str | None = None
    latency: float = 0.0
    fail_times: int = 0  # serve this many transient failures before succeeding


@dataclass(frozen=True)
class ModelEndpoint:
    id: str
    model_name: str
    kind: str = "http"  # http | mock
    base_url: str = ""
    auth_env: str | None = None
    max_in_flight: int = 4
    timeout: float = 60.0
    max_retries: int = 3
    rules: tuple[ScriptedRule, ...] = ()
    default_response: str | None = None

    def __post_init__(self) -> None:
        if self.kind not in ("http", "mock"):
            raise ValueError(f"endpoint kind must be http or mock, got {self.kind!r}")
        if self.kind == "http" and not self.base_url:
            raise ValueError(f"http endpoint {self.id!r} needs a base_url")
        if self.max_in_flight < 1:
            raise ValueError("max_in_flight must be >= 1")
        object.__setattr__(self, "rules", tuple(self.rules))


def canonical_parts(parts: tuple[Part, ...]) -> list[dict]:
    out: list[dict] = []
    for p in parts:
        if isinstance(p, TextPart):
            out.append({"t": p.text})
        else:
            digest = hashlib.sha256(p.read_bytes()).hexdigest()
            out.append({"i": digest})
    return out


def _guess_mime(path: str) -> str:
    ext = Path(path).suffix.lower()
    return {"jpg": "image/jpeg", "jpeg": "image/jpeg", "webp": "image/webp"}.get(ext.lstrip("."), "image/png")


class _HttpTransport:
    def __init__(self, endpoint: ModelEndpoint, auth_token: str | None):
        self.endpoint = endpoint
        headers = {}
        if auth_token:
            headers["Authorization"] = f"Bearer {auth_token}"
        self.client = httpx.Client(
            base_url=endpoint.base_url,
            headers=headers,
            timeout=endpoint.timeout,
        )

    def send(self, request: ChatRequest, key: str) -> str:
        content: list[dict] = []
        for p in request.parts:
            if isinstance(p, TextPart):
                content.append({"type": "text", "text": p.text})
            else:
                data = base64.b64encode(p.read_bytes()).decode("ascii")
                url = f"data:{_guess_mime(p.path)};base64,{data}"
                content.append({"type": "image_url", "image_url": {"url": url}})
        payload = {
            "model": self.endpoint.model_name,
            "messages": [{"role": "user", "content": content}],
            "temperature": request.temperature,
            "max_tokens": request.max_output_tokens,
        }
        resp = self.client.post("/chat/completions", json=payload)
        if resp.status_code in (401, 403):
            raise AuthError(f"{self.endpoint.id}: auth rejected ({resp.status_code})", key)
        if resp.status_code == 429 or resp.status_code >= 500:
            raise _Transient(f"{self.endpoint.id}: HTTP {resp.status_code}")
        if resp.status_code != 200:
            raise EndpointError(f"{self.endpoint.id}: HTTP {resp.status_code}: {resp.text[:500]}", key)
        body = resp.json()
        try:
            return body["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError):
            raise EndpointError(f"{self.endpoint.id}: malformed completion payload", key) from None

    def close(self) -> None:
        self.client.close()


class _Transient(RuntimeError):
    pass


class _TransientTimeout(_Transient):
    pass


class _MockTransport:
    """In-process scripted endpoint with call accounting for tests."""

    def __init__(self, endpoint: ModelEndpoint):
        self.endpoint = endpoint
        self.calls: list[str] = []
        self.active = 0
        self.peak_active = 0
        self._lock = threading.Lock()
        self._remaining_failures = {i: r.fail_times for i, r in enumerate(endpoint.rules)}

    def send(self, request: ChatRequest, key: str) -> str:
        with self._lock:
            self.calls.append(key)
            self.active += 1
            self.peak_active = max(self.peak_active, self.active)
        try:
            rule_index = self._match(request, key)
            if rule_index is None:
                if self.endpoint.default_response is not None:
                    return self.endpoint.default_response
                raise EndpointError(f"{self.endpoint.id}: no scripted rule matched", key)
            rule = self.endpoint.rules[rule_index]
            if rule.latency > 0:
                time.sleep(rule.latency)
            with self._lock:
                if self._remaining_failures.get(rule_index, 0) > 0:
                    self._remaining_failures[rule_index] -= 1
                    raise _Transient(f"{self.endpoint.id}: scripted transient failure")
            return rule.response
        finally:
            with self._lock:
                self.active -= 1

    def _match(self, request: ChatRequest, key: str) -> int | None:
        text = request.text()
        for i, rule in enumerate(self.endpoint.rules):
            if rule.key_prefix is not None and key.startswith(rule.key_prefix):
                return i
            if rule.pattern is not None and re.search(rule.pattern, text, re.DOTALL):
                return i
        return None

    def close(self) -> None:
        pass


class Gateway:
    """Front door for all model calls.

    Thread-safe; pipelines share one instance across worker threads.  With
    ``cache_dir`` set, a repeated request never reaches the transport.
    """

    def __init__(
        self,
        endpoints: dict[str, ModelEndpoint],
        cache_dir: str | Path | None = None,
        env: dict[str, str] | None = None,
        backoff_base: float = 0.5,
        backoff_jitter: float = 0.0,
        sleep=time.sleep,
    ):
        self.endpoints = dict(endpoints)
        self.cache = ResponseCache(cache_dir) if cache_dir is not None else None
        self._env = env
        self._backoff_base = backoff_base
        self._backoff_jitter = backoff_jitter
        self._sleep = sleep
        self._transports: dict[str, _HttpTransport | _MockTransport] = {}
        self._semaphores: dict[str, threading.BoundedSemaphore] = {}
        self._lock = threading.Lock()

    def endpoint(self, endpoint_id: str) -> ModelEndpoint:
        try:
            return self.endpoints[endpoint_id]
        except KeyError:
            raise KeyError(f"unknown endpoint {endpoint_id!r}; configured: {sorted(self.endpoints)}") from None

    def transport(self, endpoint_id: str):
        with self._lock:
            t = self._transports.get(endpoint_id)
            if t is None:
                ep = self.endpoint(endpoint_id)
                if ep.kind == "mock":
                    t = _MockTransport(ep)
                else:
                    t = _HttpTransport(ep, self._auth_token(ep))
                self._transports[endpoint_id] = t
            return t

    def _auth_token(self, ep: ModelEndpoint) -> str | None:
        if ep.auth_env is None:
            return None
        import os

        source = self._env if self._env is not None else os.environ
        token = source.get(ep.auth_env)
        if not token:
            raise AuthError(f"{ep.id}: auth environment variable {ep.auth_env} is unset")
        return token

    def _semaphore(self, endpoint_id: str) -> threading.BoundedSemaphore:
        with self._lock:
            sem = self._semaphores.get(endpoint_id)
            if sem is None:
                sem = threading.BoundedSemaphore(self.endpoint(endpoint_id).max_in_flight)
                self._semaphores[endpoint_id] = sem
            return sem

    def request_key(self, endpoint_id: str, request: ChatRequest) -> str:
        ep = self.endpoint(endpoint_id)
        return request_key(
            ep.id, ep.model_name, canonical_parts(request.parts), request.temperature, request.max_output_tokens
        )

    def chat(self, endpoint_id: str, request: ChatRequest) -> str:
        if request.max_output_tokens > MAX_OUTPUT_TOKENS:
            raise RequestBudgetExceeded(
                f"max_output_tokens {request.max_output_tokens} exceeds the {MAX_OUTPUT_TOKENS} cap"
            )
        if request.max_output_tokens < 1:
            raise RequestBudgetExceeded("max_output_tokens must be >= 1")
        ep = self.endpoint(endpoint_id)
        key = self.request_key(endpoint_id, request)
        if self.cache is not None:
            hit = self.cache.get(ep.id, key)
            if hit is not None:
                return hit
        transport = self.transport(endpoint_id)
        sem = self._semaphore(endpoint_id)
        last_error: Exception | None = None
        for attempt in range(ep.max_retries + 1):
            if attempt > 0:
                delay = self._backoff_base * (2 ** (attempt - 1))
                if self._backoff_jitter:
                    delay += random.uniform(0, self._backoff_jitter)
                self._sleep(delay)
            try:
                with sem:
                    try:
                        text = transport.send(request, key)
                    except httpx.TimeoutException as exc:
                        raise _TransientTimeout(str(exc)) from exc
                    except httpx.TransportError as exc:
                        raise _Transient(str(exc)) from exc
            except _Transient as exc:
                last_error = exc
                continue
            if self.cache is not None:
                self.cache.put(ep.id, key, text)
            return text
        if isinstance(last_error, _TransientTimeout):
            raise GatewayTimeout(f"{ep.id}: timed out after {ep.max_retries + 1} attempts", key)
        raise EndpointError(f"{ep.id}: failed after {ep.max_retries + 1} attempts: {last_error}", key)

    def close(self) -> None:
        with self._lock:
            for t in self._transports.values():
                t.close()
            self._transports.clear()

    def __enter__(self) -> "Gateway":
        return self

    def __exit__(self, *exc) -> None:
        self.close()
