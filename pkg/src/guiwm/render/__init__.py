"""HTML to screenshot harness.

Two interchangeable engines sit behind one `RenderPool`:

* `BuiltinEngine`: a deterministic pure-Python paint engine (block layout,
  inline styles, placeholder boxes).  No external processes, identical
  bytes for identical input; the default for tests and offline work.
* `ChromiumEngine`: drives a real headless Chromium over its remote
  debugging protocol for faithful rendering when a browser is installed.

The pool applies the static renderability gate first, inlines vendored
assets for known CDN references, renders, runs blank detection, and writes
the screenshot, yielding a `RenderResult` whose verdict is one of
ok / parse_fail / nav_fail / blank_render.
"""

from .gate import GateReport, renderability_check
from .builtin import BuiltinEngine
from .cdp import BrowserUnavailable, ChromiumEngine, RenderTimeout
from .assets import default_manifest, inline_vendored_assets, load_manifest
from .pool import BLANK_FRACTION, RenderPool, RenderResult, Viewport, uniform_fraction

__all__ = [
    "BLANK_FRACTION",
    "BrowserUnavailable",
    "BuiltinEngine",
    "ChromiumEngine",
    "GateReport",
    "RenderPool",
    "RenderResult",
    "RenderTimeout",
    "Viewport",
    "default_manifest",
    "inline_vendored_assets",
    "load_manifest",
    "renderability_check",
    "uniform_fraction",
]
