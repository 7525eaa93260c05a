"""Render orchestration: gate -> inline assets -> engine -> blank check -> PNG.

`RenderPool` owns a fixed set of engine sessions handed to worker threads,
so N workers drive at most N page sessions against one engine.  Every
entry point funnels through `render`, which classifies the outcome:

    parse_fail    static gate rejected the markup (no engine work done)
    nav_fail      engine navigation failed or timed out
    blank_render  >= BLANK_FRACTION of pixels share one color
    ok            screenshot written and non-uniform

Closing the pool closes the sessions and the engine; for the Chromium
engine that is what guarantees no orphaned browser processes.
"""

from __future__ import annotations

import hashlib
import queue
import re
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

from ..trajectory import StateImage
from .assets import AssetRule, inline_vendored_assets
from .cdp import RenderTimeout
from .gate import renderability_check

__all__ = ["Viewport", "RenderResult", "RenderPool", "uniform_fraction", "BLANK_FRACTION"]

BLANK_FRACTION = 0.995


@dataclass(frozen=True, slots=True)
class Viewport:
    width_px: int
    height_px: int
    device_scale: float = 1.0

    def __post_init__(self) -> None:
        if self.width_px <= 0 or self.height_px <= 0:
            raise ValueError(f"viewport must be positive, got {self.width_px}x{self.height_px}")
        if self.device_scale <= 0:
            raise ValueError("device_scale must be positive")

    @classmethod
    def parse(cls, spec: str) -> "Viewport":
        """Accepts "1080x2400" or "1080x2400@2"."""
        m = re.fullmatch(r"(\d+)x(\d+)(?:@([\d.]+))?", spec.strip())
        if not m:
            raise ValueError(f"viewport spec must look like 1080x2400, got {spec!r}")
        scale = float(m.group(3)) if m.group(3) else 1.0
        return cls(int(m.group(1)), int(m.group(2)), scale)


VERDICTS = ("ok", "parse_fail", "nav_fail", "blank_render")


@dataclass(frozen=True, slots=True)
class RenderResult:
    verdict: str
    screenshot: StateImage | None
    elapsed_s: float
    detail: str | None = None

    def __post_init__(self) -> None:
        if self.verdict not in VERDICTS:
            raise ValueError(f"verdict must be one of {VERDICTS}, got {self.verdict!r}")
        if self.verdict == "ok" and self.screenshot is None:
            raise ValueError("ok result must carry a screenshot")

    @property
    def ok(self) -> bool:
        return self.verdict == "ok"


def uniform_fraction(img: Image.Image) -> tuple[float, tuple[int, int, int]]:
    """Share of pixels holding the single most common color, and that color."""
    arr = np.asarray(img.convert("RGB"), dtype=np.uint32)
    packed = (arr[:, :, 0] << 16) | (arr[:, :, 1] << 8) | arr[:, :, 2]
    values, counts = np.unique(packed.reshape(-1), return_counts=True)
    top = int(np.argmax(counts))
    value = int(values[top])
    color = ((value >> 16) & 0xFF, (value >> 8) & 0xFF, value & 0xFF)
    return float(counts[top]) / packed.size, color


class RenderPool:
    def __init__(
        self,
        engine,
        out_dir: str | Path,
        workers: int = 4,
        viewport: Viewport | None = None,
        manifest: list[AssetRule] | None = None,
    ):
        if workers < 1:
            raise ValueError("workers must be >= 1")
        self.engine = engine
        self.out_dir = Path(out_dir)
        self.out_dir.mkdir(parents=True, exist_ok=True)
        self.workers = workers
        self.default_viewport = viewport or Viewport(1080, 2400)
        self.manifest = manifest
        self._sessions: queue.SimpleQueue = queue.SimpleQueue()
        self._all_sessions: list = []
        self._session_lock = threading.Lock()
        self._started = False
        self._closed = False

    def _ensure_started(self) -> None:
        with self._session_lock:
            if self._closed:
                raise RuntimeError("pool is closed")
            if self._started:
                return
            self.engine.start()
            for _ in range(self.workers):
                session = self.engine.new_session()
                self._all_sessions.append(session)
                self._sessions.put(session)
            self._started = True

    def render(self, html: str, viewport: Viewport | None = None, name: str | None = None) -> RenderResult:
        """Render one document to ``<out_dir>/<name>.png``; thread-safe."""
        viewport = viewport or self.default_viewport
        if name is None:
            name = hashlib.sha256(html.encode("utf-8")).hexdigest()[:16]
        started = time.perf_counter()
        gate = renderability_check(html)
        if not gate:
            return RenderResult("parse_fail", None, time.perf_counter() - started, gate.reason)
        prepared = inline_vendored_assets(html, self.manifest)
        self._ensure_started()
        session = self._sessions.get()
        try:
            img = session.render(prepared, viewport)
        except RenderTimeout as exc:
            return RenderResult("nav_fail", None, time.perf_counter() - started, str(exc))
        except Exception as exc:
            return RenderResult("nav_fail", None, time.perf_counter() - started, f"{type(exc).__name__}: {exc}")
        finally:
            self._sessions.put(session)
        fraction, color = uniform_fraction(img)
        path = self.out_dir / f"{name}.png"
        img.save(path, format="PNG")
        shot = StateImage(str(path), img.width, img.height)
        elapsed = time.perf_counter() - started
        if fraction >= BLANK_FRACTION:
            return RenderResult(
                "blank_render", shot, elapsed, f"{fraction:.2%} of pixels are rgb{color}"
            )
        return RenderResult("ok", shot, elapsed)

    def render_batch(self, items: list[tuple[str, str]], viewport: Viewport | None = None) -> list[RenderResult]:
        """Render ``(name, html)`` pairs across the worker pool, order-preserving."""
        with ThreadPoolExecutor(max_workers=self.workers) as pool:
            futures = [pool.submit(self.render, html, viewport, name) for name, html in items]
            return [f.result() for f in futures]

    def close(self) -> None:
        with self._session_lock:
            if self._closed:
                return
            self._closed = True
            sessions, self._all_sessions = self._all_sessions, []
        for session in sessions:
            try:
                session.close()
            except Exception:
                pass
        self.engine.close()

    def __enter__(self) -> "RenderPool":
        return self

    def __exit__(self, *exc) -> None:
        self.close()
