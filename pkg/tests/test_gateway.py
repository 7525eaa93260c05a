"""Gateway dispatch: caching, retries, concurrency limits, budgets, auth.

HTTP behavior is exercised against a real in-process HTTP server rather
than a patched client, so status handling, auth headers, and payload
shapes are tested end to end.
"""

import json
import threading
from concurrent.futures import ThreadPoolExecutor
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import pytest

from guiwm.gateway import (
    MAX_OUTPUT_TOKENS,
    AuthError,
    ChatRequest,
    EndpointError,
    Gateway,
    ImagePart,
    ModelEndpoint,
    RequestBudgetExceeded,
    ScriptedRule,
    TextPart,
)


def mock_endpoint(endpoint_id="mock", rules=(), default=None, **kw):
    return ModelEndpoint(
        id=endpoint_id, model_name="scripted", kind="mock", rules=tuple(rules), default_response=default, **kw
    )


def text_request(text, **kw):
    return ChatRequest((TextPart(text),), **kw)


# --- caching ---------------------------------------------------------------


def test_cache_hit_skips_transport(tmp_path):
    ep = mock_endpoint(default="pong")
    gw = Gateway({"mock": ep}, cache_dir=tmp_path / "cache")
    assert gw.chat("mock", text_request("ping")) == "pong"
    assert gw.chat("mock", text_request("ping")) == "pong"
    assert len(gw.transport("mock").calls) == 1


def test_cache_persists_across_gateway_instances(tmp_path):
    ep = mock_endpoint(default="pong")
    Gateway({"mock": ep}, cache_dir=tmp_path / "cache").chat("mock", text_request("ping"))
    gw2 = Gateway({"mock": ep}, cache_dir=tmp_path / "cache")
    assert gw2.chat("mock", text_request("ping")) == "pong"
    assert len(gw2.transport("mock").calls) == 0


def test_decoding_parameters_change_the_key(tmp_path):
    gw = Gateway({"mock": mock_endpoint(default="pong")}, cache_dir=tmp_path / "c")
    base = gw.request_key("mock", text_request("ping"))
    assert gw.request_key("mock", text_request("ping", temperature=0.2)) != base
    assert gw.request_key("mock", text_request("ping", max_output_tokens=128)) != base
    assert gw.request_key("mock", text_request("ping")) == base


def test_image_parts_key_on_content_not_path(tmp_path):
    (tmp_path / "a.png").write_bytes(b"same-bytes")
    (tmp_path / "b.png").write_bytes(b"same-bytes")
    (tmp_path / "c.png").write_bytes(b"other-bytes")
    gw = Gateway({"mock": mock_endpoint(default="x")})
    req = lambda p: ChatRequest((TextPart("t"), ImagePart(str(p))))
    assert gw.request_key("mock", req(tmp_path / "a.png")) == gw.request_key("mock", req(tmp_path / "b.png"))
    assert gw.request_key("mock", req(tmp_path / "a.png")) != gw.request_key("mock", req(tmp_path / "c.png"))


# --- scripted rules --------------------------------------------------------


def test_rules_match_in_order_over_joined_text():
    ep = mock_endpoint(
        rules=[
            ScriptedRule(response="first", pattern="alpha"),
            ScriptedRule(response="second", pattern="alpha|beta"),
        ],
        default="fallback",
    )
    gw = Gateway({"mock": ep})
    assert gw.chat("mock", text_request("has alpha inside")) == "first"
    assert gw.chat("mock", text_request("has beta inside")) == "second"
    assert gw.chat("mock", text_request("nothing")) == "fallback"


def test_rule_pattern_spans_multiple_text_parts():
    ep = mock_endpoint(rules=[ScriptedRule(response="hit", pattern="top.*bottom")])
    gw = Gateway({"mock": ep})
    req = ChatRequest((TextPart("top line"), TextPart("bottom line")))
    assert gw.chat("mock", req) == "hit"


def test_key_prefix_rule_targets_one_exact_request():
    probe = Gateway({"mock": mock_endpoint()})
    key = probe.request_key("mock", text_request("special"))
    ep = mock_endpoint(rules=[ScriptedRule(response="keyed", key_prefix=key[:12])], default="other")
    gw = Gateway({"mock": ep})
    assert gw.chat("mock", text_request("special")) == "keyed"
    assert gw.chat("mock", text_request("different")) == "other"


def test_no_rule_and_no_default_is_an_error():
    gw = Gateway({"mock": mock_endpoint(rules=[ScriptedRule(response="x", pattern="zzz")])})
    with pytest.raises(EndpointError):
        gw.chat("mock", text_request("unmatched"))


# --- retries and backoff ---------------------------------------------------


def test_transient_failures_retry_with_exponential_backoff():
    delays = []
    ep = mock_endpoint(rules=[ScriptedRule(response="ok", pattern=".", fail_times=2)], max_retries=3)
    gw = Gateway({"mock": ep}, backoff_base=0.5, sleep=delays.append)
    assert gw.chat("mock", text_request("go")) == "ok"
    assert delays == [0.5, 1.0]
    assert len(gw.transport("mock").calls) == 3


def test_exhausted_retries_raise_with_request_key():
    delays = []
    ep = mock_endpoint(rules=[ScriptedRule(response="ok", pattern=".", fail_times=10)], max_retries=3)
    gw = Gateway({"mock": ep}, backoff_base=0.5, sleep=delays.append)
    with pytest.raises(EndpointError) as excinfo:
        gw.chat("mock", text_request("go"))
    assert delays == [0.5, 1.0, 2.0]
    assert excinfo.value.request_key == gw.request_key("mock", text_request("go"))


def test_failed_requests_are_not_cached(tmp_path):
    ep = mock_endpoint(rules=[ScriptedRule(response="ok", pattern=".", fail_times=10)], max_retries=0)
    gw = Gateway({"mock": ep}, cache_dir=tmp_path / "c", sleep=lambda _: None)
    with pytest.raises(EndpointError):
        gw.chat("mock", text_request("go"))
    # a later success must come from the transport, not a poisoned cache
    ep2 = mock_endpoint(rules=[ScriptedRule(response="ok", pattern=".")])
    gw2 = Gateway({"mock": ep2}, cache_dir=tmp_path / "c")
    assert gw2.chat("mock", text_request("go")) == "ok"
    assert len(gw2.transport("mock").calls) == 1


# --- budgets ---------------------------------------------------------------


def test_output_token_cap_rejected_before_dispatch():
    gw = Gateway({"mock": mock_endpoint(default="x")})
    with pytest.raises(RequestBudgetExceeded):
        gw.chat("mock", text_request("hi", max_output_tokens=MAX_OUTPUT_TOKENS + 1))
    with pytest.raises(RequestBudgetExceeded):
        gw.chat("mock", text_request("hi", max_output_tokens=0))
    assert len(gw.transport("mock").calls) == 0
    # the cap itself is allowed
    assert gw.chat("mock", text_request("hi", max_output_tokens=MAX_OUTPUT_TOKENS)) == "x"


def test_empty_request_rejected():
    with pytest.raises(ValueError):
        ChatRequest(())


# --- concurrency -----------------------------------------------------------


def test_in_flight_limit_bounds_concurrency():
    ep = mock_endpoint(
        rules=[ScriptedRule(response="ok", pattern=".", latency=0.03)], max_in_flight=2
    )
    gw = Gateway({"mock": ep})
    with ThreadPoolExecutor(max_workers=8) as pool:
        list(pool.map(lambda i: gw.chat("mock", text_request(f"r{i}")), range(12)))
    transport = gw.transport("mock")
    assert transport.peak_active <= 2
    assert transport.peak_active == 2  # the limit was actually reached
    assert len(transport.calls) == 12


# --- http transport --------------------------------------------------------


class _ScriptedHttp(BaseHTTPRequestHandler):
    # class-level script: list of (status, body_dict); popped per request
    script = []
    seen = []

    def do_POST(self):
        length = int(self.headers["Content-Length"])
        body = json.loads(self.rfile.read(length))
        type(self).seen.append({"path": self.path, "auth": self.headers.get("Authorization"), "body": body})
        status, payload = type(self).script.pop(0) if type(self).script else (200, {})
        data = json.dumps(payload).encode()
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(data)))
        self.end_headers()
        self.wfile.write(data)

    def log_message(self, *args):
        pass


@pytest.fixture
def http_server():
    server = ThreadingHTTPServer(("127.0.0.1", 0), _ScriptedHttp)
    _ScriptedHttp.script = []
    _ScriptedHttp.seen = []
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    yield f"http://127.0.0.1:{server.server_port}", _ScriptedHttp
    server.shutdown()
    server.server_close()


def completion(text):
    return {"choices": [{"message": {"content": text}}]}


def http_endpoint(base_url, **kw):
    return ModelEndpoint(id="api", model_name="m1", kind="http", base_url=base_url, **kw)


def test_http_success_and_wire_shape(http_server, tmp_path):
    base_url, handler = http_server
    handler.script.append((200, completion("hello")))
    (tmp_path / "i.png").write_bytes(b"\x89PNG-ish")
    gw = Gateway(
        {"api": http_endpoint(base_url, auth_env="API_TOKEN")},
        env={"API_TOKEN": "sekrit"},
    )
    req = ChatRequest((TextPart("describe"), ImagePart(str(tmp_path / "i.png"))), temperature=0.2)
    assert gw.chat("api", req) == "hello"
    (call,) = handler.seen
    assert call["path"] == "/chat/completions"
    assert call["auth"] == "Bearer sekrit"
    assert call["body"]["model"] == "m1"
    assert call["body"]["temperature"] == 0.2
    parts = call["body"]["messages"][0]["content"]
    assert parts[0] == {"type": "text", "text": "describe"}
    assert parts[1]["image_url"]["url"].startswith("data:image/png;base64,")


def test_http_5xx_retries_then_succeeds(http_server):
    base_url, handler = http_server
    handler.script += [(500, {}), (503, {}), (200, completion("recovered"))]
    gw = Gateway({"api": http_endpoint(base_url, max_retries=3)}, sleep=lambda _: None)
    assert gw.chat("api", text_request("x")) == "recovered"
    assert len(handler.seen) == 3


def test_http_auth_rejection_is_not_retried(http_server):
    base_url, handler = http_server
    handler.script.append((401, {}))
    gw = Gateway({"api": http_endpoint(base_url, max_retries=3)}, sleep=lambda _: None)
    with pytest.raises(AuthError):
        gw.chat("api", text_request("x"))
    assert len(handler.seen) == 1


def test_http_4xx_is_a_hard_error(http_server):
    base_url, handler = http_server
    handler.script.append((400, {"error": "bad request"}))
    gw = Gateway({"api": http_endpoint(base_url)}, sleep=lambda _: None)
    with pytest.raises(EndpointError):
        gw.chat("api", text_request("x"))
    assert len(handler.seen) == 1


def test_http_malformed_completion_payload(http_server):
    base_url, handler = http_server
    handler.script.append((200, {"choices": []}))
    gw = Gateway({"api": http_endpoint(base_url)})
    with pytest.raises(EndpointError):
        gw.chat("api", text_request("x"))


def test_missing_auth_env_fails_fast(http_server):
    base_url, _ = http_server
    gw = Gateway({"api": http_endpoint(base_url, auth_env="NOT_SET")}, env={})
    with pytest.raises(AuthError):
        gw.chat("api", text_request("x"))


def test_unknown_endpoint_named_in_error():
    gw = Gateway({"mock": mock_endpoint(default="x")})
    with pytest.raises(KeyError, match="wrong"):
        gw.chat("wrong", text_request("x"))


def test_endpoint_validation():
    with pytest.raises(ValueError):
        ModelEndpoint(id="x", model_name="m", kind="carrier-pigeon")
    with pytest.raises(ValueError):
        ModelEndpoint(id="x", model_name="m", kind="http", base_url="")
    with pytest.raises(ValueError):
        ModelEndpoint(id="x", model_name="m", kind="mock", max_in_flight=0)
