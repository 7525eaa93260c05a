"""Minimal RFC 6455 websocket client over stdlib sockets.

Covers exactly what the DevTools wire protocol needs: text frames both
ways, client-side masking, fragmented messages, ping/pong, and clean
close.  No extensions, no TLS (DevTools listens on loopback), no server
role.
"""

from __future__ import annotations

import base64
import hashlib
import os
import socket
import struct
from urllib.parse import urlparse

__all__ = ["WebSocket", "WebSocketError"]

_GUID = "258EAFA5-E914-47DA-95CA-C5AB0DC85B11"


class WebSocketError(ConnectionError):
    pass


class WebSocket:
    def __init__(self, sock: socket.socket):
        self._sock = sock
        self._buffer = b""
        self._closed = False

    # -- connection -------------------------------------------------------

    @classmethod
    def connect(cls, url: str, timeout: float = 10.0) -> "WebSocket":
        parsed = urlparse(url)
        if parsed.scheme != "ws":
            raise WebSocketError(f"only ws:// URLs are supported, got {url}")
        host = parsed.hostname or "127.0.0.1"
        port = parsed.port or 80
        path = parsed.path or "/"
        if parsed.query:
            path += "?" + parsed.query
        sock = socket.create_connection((host, port), timeout=timeout)
        key = base64.b64encode(os.urandom(16)).decode("ascii")
        handshake = (
            f"GET {path} HTTP/1.1\r\n"
            f"Host: {host}:{port}\r\n"
            "Upgrade: websocket\r\n"
            "Connection: Upgrade\r\n"
            f"Sec-WebSocket-Key: {key}\r\n"
            "Sec-WebSocket-Version: 13\r\n"
            "\r\n"
        )
        sock.sendall(handshake.encode("ascii"))
        ws = cls(sock)
        status, headers = ws._read_http_response()
        if status != 101:
            sock.close()
            raise WebSocketError(f"handshake rejected with HTTP {status}")
        expected = base64.b64encode(hashlib.sha1((key + _GUID).encode("ascii")).digest()).decode("ascii")
        if headers.get("sec-websocket-accept") != expected:
            sock.close()
            raise WebSocketError("handshake accept key mismatch")
        return ws

    def _read_http_response(self) -> tuple[int, dict[str, str]]:
        data = b""
        while b"\r\n\r\n" not in data:
            chunk = self._sock.recv(4096)
            if not chunk:
                raise WebSocketError("connection closed during handshake")
            data += chunk
        head, _, rest = data.partition(b"\r\n\r\n")
        self._buffer = rest
        lines = head.decode("latin-1").split("\r\n")
        try:
            status = int(lines[0].split(" ", 2)[1])
        except (IndexError, ValueError):
            raise WebSocketError(f"malformed handshake response: {lines[0]!r}") from None
        headers = {}
        for line in lines[1:]:
            name, _, value = line.partition(":")
            headers[name.strip().lower()] = value.strip()
        return status, headers

    # -- frames -----------------------------------------------------------

    def _read_exact(self, n: int) -> bytes:
        while len(self._buffer) < n:
            chunk = self._sock.recv(65536)
            if not chunk:
                raise WebSocketError("connection closed mid-frame")
            self._buffer += chunk
        out, self._buffer = self._buffer[:n], self._buffer[n:]
        return out

    def send_text(self, text: str) -> None:
        self._send_frame(0x1, text.encode("utf-8"))

    def _send_frame(self, opcode: int, payload: bytes) -> None:
        if self._closed:
            raise WebSocketError("websocket is closed")
        header = bytes([0x80 | opcode])
        length = len(payload)
        mask_bit = 0x80  # client frames must be masked
        if length < 126:
            header += bytes([mask_bit | length])
        elif length < 1 << 16:
            header += bytes([mask_bit | 126]) + struct.pack(">H", length)
        else:
            header += bytes([mask_bit | 127]) + struct.pack(">Q", length)
        mask = os.urandom(4)
        masked = bytes(b ^ mask[i & 3] for i, b in enumerate(payload))
        self._sock.sendall(header + mask + masked)

    def recv_text(self, timeout: float | None = None) -> str:
        """Next complete text message; pings answered transparently.

        Raises WebSocketError on close frame or socket loss; socket.timeout
        propagates so callers can implement deadlines.
        """
        if timeout is not None:
            self._sock.settimeout(timeout)
        fragments: list[bytes] = []
        while True:
            b0, b1 = self._read_exact(2)
            fin = bool(b0 & 0x80)
            opcode = b0 & 0x0F
            masked = bool(b1 & 0x80)
            length = b1 & 0x7F
            if length == 126:
                (length,) = struct.unpack(">H", self._read_exact(2))
            elif length == 127:
                (length,) = struct.unpack(">Q", self._read_exact(8))
            mask = self._read_exact(4) if masked else b""
            payload = self._read_exact(length)
            if masked:
                payload = bytes(b ^ mask[i & 3] for i, b in enumerate(payload))
            if opcode == 0x9:  # ping
                self._send_frame(0xA, payload)
                continue
            if opcode == 0xA:  # pong
                continue
            if opcode == 0x8:  # close
                try:
                    self._send_frame(0x8, b"")
                except OSError:
                    pass
                self._closed = True
                raise WebSocketError("server closed the connection")
            if opcode in (0x1, 0x2, 0x0):
                fragments.append(payload)
                if fin:
                    return b"".join(fragments).decode("utf-8")
                continue
            raise WebSocketError(f"unexpected opcode {opcode:#x}")

    def close(self) -> None:
        if not self._closed:
            self._closed = True
            try:
                header = bytes([0x80 | 0x8, 0x80])
                self._sock.sendall(header + os.urandom(4))
            except OSError:
                pass
        try:
            self._sock.close()
        except OSError:
            pass
