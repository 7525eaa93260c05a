"""Headless Chromium driver over the DevTools wire protocol.

One long-lived browser process (or an externally provided debugger URL),
one websocket, N page sessions multiplexed over it.  A dedicated reader
thread routes command replies by id and buffers events by session; page
sessions are single-renter (the pool checks one out per in-flight render).

Sessions run offline (network emulation) so external references cannot be
fetched; anything that should resolve must be inlined beforehand (see
``assets.inline_vendored_assets``).  Screenshot bytes come back base64 on
the wire and are decoded to a Pillow image.
"""

from __future__ import annotations

import base64
import io
import json
import shutil
import subprocess
import threading
import time
from collections import deque

from PIL import Image

from .ws import WebSocket, WebSocketError

__all__ = ["BrowserUnavailable", "RenderTimeout", "CdpConnection", "ChromiumEngine", "find_browser"]

_CANDIDATE_BINARIES = (
    "chromium",
    "chromium-browser",
    "google-chrome",
    "google-chrome-stable",
    "chrome",
    "headless-chromium",
)


class BrowserUnavailable(RuntimeError):
    pass


class RenderTimeout(TimeoutError):
    pass


class CdpError(RuntimeError):
    pass


def find_browser() -> str | None:
    for name in _CANDIDATE_BINARIES:
        path = shutil.which(name)
        if path:
            return path
    return None


class CdpConnection:
    """Thread-safe command/event multiplexer over one devtools websocket."""

    def __init__(self, ws: WebSocket):
        self._ws = ws
        self._send_lock = threading.Lock()
        self._state = threading.Condition()
        self._next_id = 1
        self._replies: dict[int, dict] = {}
        self._events: deque[dict] = deque(maxlen=4096)
        self._dead: Exception | None = None
        self._reader = threading.Thread(target=self._read_loop, name="cdp-reader", daemon=True)
        self._reader.start()

    def _read_loop(self) -> None:
        try:
            while True:
                message = json.loads(self._ws.recv_text())
                with self._state:
                    if "id" in message:
                        self._replies[message["id"]] = message
                    else:
                        self._events.append(message)
                    self._state.notify_all()
        except (WebSocketError, OSError, ValueError) as exc:
            with self._state:
                self._dead = exc
                self._state.notify_all()

    def call(self, method: str, params: dict | None = None, session_id: str | None = None, timeout: float = 30.0) -> dict:
        with self._state:
            if self._dead is not None:
                raise CdpError(f"connection lost: {self._dead}")
            call_id = self._next_id
            self._next_id += 1
        message: dict = {"id": call_id, "method": method, "params": params or {}}
        if session_id is not None:
            message["sessionId"] = session_id
        with self._send_lock:
            self._ws.send_text(json.dumps(message))
        deadline = time.monotonic() + timeout
        with self._state:
            while call_id not in self._replies:
                if self._dead is not None:
                    raise CdpError(f"connection lost: {self._dead}")
                remaining = deadline - time.monotonic()
                if remaining <= 0:
                    raise RenderTimeout(f"{method} did not reply within {timeout}s")
                self._state.wait(remaining)
            reply = self._replies.pop(call_id)
        if "error" in reply:
            raise CdpError(f"{method}: {reply['error'].get('message', reply['error'])}")
        return reply.get("result", {})

    def wait_event(self, method: str, session_id: str | None, timeout: float) -> dict:
        """Block until a matching buffered or future event arrives."""
        deadline = time.monotonic() + timeout
        seen = 0
        with self._state:
            while True:
                events = list(self._events)
                for event in events[seen:]:
                    if event.get("method") == method and event.get("sessionId") == session_id:
                        return event
                seen = len(events)
                if self._dead is not None:
                    raise CdpError(f"connection lost: {self._dead}")
                remaining = deadline - time.monotonic()
                if remaining <= 0:
                    raise RenderTimeout(f"no {method} event within {timeout}s")
                self._state.wait(remaining)

    def drain_events(self, session_id: str | None) -> None:
        with self._state:
            kept = [e for e in self._events if e.get("sessionId") != session_id]
            self._events.clear()
            self._events.extend(kept)

    def close(self) -> None:
        self._ws.close()


class ChromiumSession:
    """One attached page target; used by one render at a time."""

    def __init__(self, conn: CdpConnection, session_id: str, target_id: str, nav_timeout: float):
        self._conn = conn
        self.session_id = session_id
        self.target_id = target_id
        self.nav_timeout = nav_timeout
        conn.call("Page.enable", session_id=session_id)
        # Hermetic renders: no real network, external fetches fail fast.
        conn.call("Network.enable", session_id=session_id)
        conn.call(
            "Network.emulateNetworkConditions",
            {"offline": True, "latency": 0, "downloadThroughput": -1, "uploadThroughput": -1},
            session_id=session_id,
        )

    def render(self, html: str, viewport) -> Image.Image:
        sid = self.session_id
        self._conn.drain_events(sid)
        self._conn.call(
            "Emulation.setDeviceMetricsOverride",
            {
                "width": viewport.width_px,
                "height": viewport.height_px,
                "deviceScaleFactor": viewport.device_scale,
                "mobile": True,
            },
            session_id=sid,
        )
        url = "data:text/html;base64," + base64.b64encode(html.encode("utf-8")).decode("ascii")
        self._conn.call("Page.navigate", {"url": url}, session_id=sid, timeout=self.nav_timeout)
        self._conn.wait_event("Page.loadEventFired", sid, timeout=self.nav_timeout)
        result = self._conn.call("Page.captureScreenshot", {"format": "png"}, session_id=sid)
        data = base64.b64decode(result["data"])
        img = Image.open(io.BytesIO(data))
        img.load()
        return img.convert("RGB")

    def close(self) -> None:
        try:
            self._conn.call("Target.closeTarget", {"targetId": self.target_id}, timeout=5.0)
        except (CdpError, RenderTimeout, WebSocketError, OSError):
            pass


class ChromiumEngine:
    """Launches (or attaches to) one browser and hands out page sessions."""

    def __init__(self, binary: str | None = None, ws_url: str | None = None, nav_timeout: float = 15.0, launch_timeout: float = 20.0):
        self.binary = binary
        self.ws_url = ws_url
        self.nav_timeout = nav_timeout
        self.launch_timeout = launch_timeout
        self._proc: subprocess.Popen | None = None
        self._conn: CdpConnection | None = None

    def start(self) -> None:
        if self._conn is not None:
            return
        url = self.ws_url
        if url is None:
            binary = self.binary or find_browser()
            if binary is None:
                raise BrowserUnavailable(
                    "no Chromium/Chrome binary found on PATH; install one or pass ws_url of a running browser"
                )
            self._proc = subprocess.Popen(
                [
                    binary,
                    "--headless=new",
                    "--remote-debugging-port=0",
                    "--remote-debugging-address=127.0.0.1",
                    "--no-sandbox",
                    "--disable-gpu",
                    "--no-first-run",
                    "--disable-extensions",
                    "about:blank",
                ],
                stdout=subprocess.DEVNULL,
                stderr=subprocess.PIPE,
                text=True,
            )
            url = self._discover_ws_url()
        self._conn = CdpConnection(WebSocket.connect(url))

    def _discover_ws_url(self) -> str:
        """The browser prints its debugger URL on stderr shortly after launch."""
        assert self._proc is not None and self._proc.stderr is not None
        deadline = time.monotonic() + self.launch_timeout
        for line in self._proc.stderr:
            marker = "DevTools listening on "
            if marker in line:
                return line.split(marker, 1)[1].strip()
            if time.monotonic() > deadline:
                break
        self._kill_browser()
        raise BrowserUnavailable("browser started but never announced a DevTools URL")

    def new_session(self) -> ChromiumSession:
        if self._conn is None:
            self.start()
        assert self._conn is not None
        created = self._conn.call("Target.createTarget", {"url": "about:blank"})
        target_id = created["targetId"]
        attached = self._conn.call("Target.attachToTarget", {"targetId": target_id, "flatten": True})
        return ChromiumSession(self._conn, attached["sessionId"], target_id, self.nav_timeout)

    def close(self) -> None:
        if self._conn is not None:
            try:
                self._conn.call("Browser.close", timeout=5.0)
            except (CdpError, RenderTimeout, WebSocketError, OSError):
                pass
            self._conn.close()
            self._conn = None
        self._kill_browser()

    def _kill_browser(self) -> None:
        if self._proc is None:
            return
        proc, self._proc = self._proc, None
        try:
            proc.terminate()
            try:
                proc.wait(timeout=5)
            except subprocess.TimeoutExpired:
                proc.kill()
                proc.wait(timeout=5)
        except OSError:
            pass
