"""Canonical device actions and the two external record schemas.

The canonical action is a single validated type covering every gesture the
pipelines care about.  Two wire schemas exist in the corpora we ingest:

* ``kapps``: ``{"action": ..., "params": ...}`` records, coordinate pairs as
  two-element lists, system keys folded into one ``system_button`` action.
* ``m3a``: ``{"action_type": "TAP" | "SCROLL" | ...}`` records with flat
  ``x``/``y``/``direction``/``text``/``app_name`` fields.

Neither schema covers the full canonical set, so each codec refuses (raises
``UnknownActionType``) rather than silently coercing.  The one sanctioned
lossy direction is swipe -> m3a, which collapses to a dominant-axis SCROLL;
see ``serialize_action``.

All coordinates live on a [0, 1000] x [0, 1000] grid independent of screen
resolution; ``denormalize_point`` maps them onto real pixels.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, fields

__all__ = [
    "ACTION_KINDS",
    "CanonicalAction",
    "CodecError",
    "UnknownActionType",
    "MissingField",
    "CoordinateOutOfRange",
    "serialize_action",
    "parse_action",
    "detect_schema",
    "action_prompt_text",
    "denormalize_point",
]

GRID_MAX = 1000

ACTION_KINDS = (
    "click",
    "long_press",
    "swipe",
    "scroll_direction",
    "type_text",
    "set_text",
    "system_back",
    "system_home",
    "system_recent",
    "enter",
    "open_app",
    "launch_app",
    "wait",
    "complete",
    "impossible",
)

SCROLL_DIRECTIONS = ("up", "down", "left", "right")


class CodecError(ValueError):
    """Base for action validation and codec failures."""


class UnknownActionType(CodecError):
    pass


class MissingField(CodecError):
    pass


class CoordinateOutOfRange(CodecError):
    pass


def _check_point(name: str, value: object) -> tuple[int, int]:
    if (
        not isinstance(value, (tuple, list))
        or len(value) != 2
        or not all(isinstance(c, (int, float)) and not isinstance(c, bool) for c in value)
    ):
        raise MissingField(f"{name} must be a pair of numbers, got {value!r}")
    x, y = (int(round(c)) for c in value)
    if not (0 <= x <= GRID_MAX and 0 <= y <= GRID_MAX):
        raise CoordinateOutOfRange(f"{name}=({x}, {y}) outside [0, {GRID_MAX}] grid")
    return (x, y)


# Which optional fields each kind requires / permits.  Anything not listed
# must be absent so that equality and hashing stay meaningful.
_REQUIRED: dict[str, tuple[str, ...]] = {
    "click": ("point",),
    "long_press": ("point",),
    "swipe": ("point", "end_point"),
    "scroll_direction": ("direction",),
    "type_text": ("text",),
    "set_text": ("point", "text"),
    "system_back": (),
    "system_home": (),
    "system_recent": (),
    "enter": (),
    "open_app": ("app_name",),
    "launch_app": ("app_name",),
    "wait": (),
    "complete": (),
    "impossible": (),
}

_OPTIONAL: dict[str, tuple[str, ...]] = {
    "swipe": ("velocity",),
    "wait": ("duration",),
    "complete": ("comment",),
    "impossible": ("comment",),
}


@dataclass(frozen=True, slots=True)
class CanonicalAction:
    """One validated device action on the normalized [0, 1000] grid."""

    kind: str
    point: tuple[int, int] | None = None
    end_point: tuple[int, int] | None = None
    velocity: float | None = None
    direction: str | None = None
    text: str | None = None
    app_name: str | None = None
    duration: float | None = None
    comment: str | None = None

    def __post_init__(self) -> None:
        if self.kind not in _REQUIRED:
            raise UnknownActionType(f"unknown action kind {self.kind!r}")
        required = _REQUIRED[self.kind]
        allowed = set(required) | set(_OPTIONAL.get(self.kind, ()))
        for f in fields(self):
            if f.name == "kind":
                continue
            value = getattr(self, f.name)
            if f.name in required and value is None:
                raise MissingField(f"{self.kind} requires {f.name}")
            if value is not None and f.name not in allowed:
                raise MissingField(f"{self.kind} does not take {f.name}")
        if self.point is not None:
            object.__setattr__(self, "point", _check_point("point", self.point))
        if self.end_point is not None:
            object.__setattr__(self, "end_point", _check_point("end_point", self.end_point))
        if self.direction is not None and self.direction not in SCROLL_DIRECTIONS:
            raise MissingField(f"direction must be one of {SCROLL_DIRECTIONS}, got {self.direction!r}")
        for name in ("velocity", "duration"):
            value = getattr(self, name)
            if value is not None:
                if not isinstance(value, (int, float)) or isinstance(value, bool):
                    raise MissingField(f"{name} must be numeric, got {value!r}")
                object.__setattr__(self, name, float(value))
        for name in ("text", "app_name", "comment"):
            value = getattr(self, name)
            if value is not None and not isinstance(value, str):
                raise MissingField(f"{name} must be a string, got {value!r}")


def denormalize_point(point: tuple[int, int], width_px: int, height_px: int) -> tuple[int, int]:
    """Map a grid point onto pixel coordinates of a width_px x height_px image.

    Round-to-nearest, then clamp into the valid pixel range so the grid
    maximum lands on the last pixel, not one past it.
    """
    if width_px <= 0 or height_px <= 0:
        raise ValueError(f"image dimensions must be positive, got {width_px}x{height_px}")
    gx, gy = point
    px = min(width_px - 1, max(0, round(gx / GRID_MAX * width_px)))
    py = min(height_px - 1, max(0, round(gy / GRID_MAX * height_px)))
    return (px, py)


# ---------------------------------------------------------------------------
# kapps codec

_SYSTEM_KEYS = {"system_back": "back", "system_home": "home", "system_recent": "recent"}
_SYSTEM_KINDS = {v: k for k, v in _SYSTEM_KEYS.items()}


def _to_kapps(action: CanonicalAction) -> dict:
    k = action.kind
    if k == "click":
        return {"action": "click", "params": list(action.point)}
    if k == "long_press":
        return {"action": "long_press", "params": list(action.point)}
    if k == "swipe":
        sx, sy = action.point
        ex, ey = action.end_point
        return {"action": "swipe", "params": [sx, sy, action.velocity, ex, ey]}
    if k in _SYSTEM_KEYS:
        return {"action": "system_button", "params": _SYSTEM_KEYS[k]}
    if k == "set_text":
        return {"action": "set_text", "params": list(action.point), "text": action.text}
    if k == "wait":
        return {"action": "wait", "params": action.duration}
    if k in ("complete", "impossible"):
        rec: dict = {"action": k}
        if action.comment is not None:
            rec["comment"] = action.comment
        return rec
    if k == "launch_app":
        return {"action": "launch_app", "params": action.app_name}
    raise UnknownActionType(f"{k} is not expressible in the kapps schema")


def _from_kapps(record: dict) -> CanonicalAction:
    name = record.get("action")
    if name is None:
        raise MissingField("kapps record has no 'action' field")
    params = record.get("params")
    if name in ("click", "long_press"):
        return CanonicalAction(name, point=_require_pair(name, params))
    if name == "swipe":
        if not isinstance(params, (list, tuple)) or len(params) != 5:
            raise MissingField(f"swipe params must be [sx, sy, velocity, ex, ey], got {params!r}")
        sx, sy, vel, ex, ey = params
        return CanonicalAction("swipe", point=_require_pair("swipe start", (sx, sy)),
                               end_point=_require_pair("swipe end", (ex, ey)),
                               velocity=None if vel is None else float(vel))
    if name == "system_button":
        kind = _SYSTEM_KINDS.get(params)
        if kind is None:
            raise MissingField(f"system_button params must be back/home/recent, got {params!r}")
        return CanonicalAction(kind)
    if name == "set_text":
        text = record.get("text")
        if text is None:
            raise MissingField("set_text record has no 'text' field")
        return CanonicalAction("set_text", point=_require_pair("set_text", params), text=text)
    if name == "wait":
        return CanonicalAction("wait", duration=None if params is None else float(params))
    if name in ("complete", "impossible"):
        return CanonicalAction(name, comment=record.get("comment"))
    if name == "launch_app":
        if not isinstance(params, str):
            raise MissingField(f"launch_app params must be a package name string, got {params!r}")
        return CanonicalAction("launch_app", app_name=params)
    raise UnknownActionType(f"unknown kapps action {name!r}")


def _require_pair(name: str, value: object) -> tuple[int, int]:
    if not isinstance(value, (list, tuple)) or len(value) != 2:
        raise MissingField(f"{name} params must be a coordinate pair, got {value!r}")
    return _check_point(name, value)


# ---------------------------------------------------------------------------
# m3a codec

_M3A_SYSTEM = {"system_back": "BACK", "system_home": "HOME", "enter": "ENTER"}
_M3A_SYSTEM_KINDS = {v: k for k, v in _M3A_SYSTEM.items()}


def _to_m3a(action: CanonicalAction) -> dict:
    k = action.kind
    if k == "click":
        x, y = action.point
        return {"action_type": "TAP", "x": x, "y": y}
    if k == "long_press":
        x, y = action.point
        return {"action_type": "LONG_PRESS", "x": x, "y": y}
    if k == "scroll_direction":
        return {"action_type": "SCROLL", "direction": action.direction}
    if k == "swipe":
        # Lossy by design: an m3a consumer only understands axis scrolls, so
        # the gesture collapses to its dominant axis, direction following the
        # drag vector.  Ties prefer the vertical axis.
        sx, sy = action.point
        ex, ey = action.end_point
        dx, dy = ex - sx, ey - sy
        if abs(dy) >= abs(dx):
            direction = "up" if dy < 0 else "down"
        else:
            direction = "left" if dx < 0 else "right"
        return {"action_type": "SCROLL", "direction": direction}
    if k == "type_text":
        return {"action_type": "TYPE", "text": action.text}
    if k in _M3A_SYSTEM:
        return {"action_type": _M3A_SYSTEM[k]}
    if k == "open_app":
        return {"action_type": "OPEN_APP", "app_name": action.app_name}
    raise UnknownActionType(f"{k} is not expressible in the m3a schema")


def _from_m3a(record: dict) -> CanonicalAction:
    name = record.get("action_type")
    if name is None:
        raise MissingField("m3a record has no 'action_type' field")
    if name in ("TAP", "LONG_PRESS"):
        if "x" not in record or "y" not in record:
            raise MissingField(f"{name} record needs x and y")
        point = _check_point(name, (record["x"], record["y"]))
        return CanonicalAction("click" if name == "TAP" else "long_press", point=point)
    if name == "SCROLL":
        direction = record.get("direction")
        if direction is None:
            raise MissingField("SCROLL record needs direction")
        return CanonicalAction("scroll_direction", direction=str(direction).lower())
    if name == "TYPE":
        if "text" not in record:
            raise MissingField("TYPE record needs text")
        return CanonicalAction("type_text", text=record["text"])
    if name in _M3A_SYSTEM_KINDS:
        return CanonicalAction(_M3A_SYSTEM_KINDS[name])
    if name == "OPEN_APP":
        if "app_name" not in record:
            raise MissingField("OPEN_APP record needs app_name")
        return CanonicalAction("open_app", app_name=record["app_name"])
    raise UnknownActionType(f"unknown m3a action_type {name!r}")


# ---------------------------------------------------------------------------
# public codec surface

_SCHEMAS = ("kapps", "m3a")


def serialize_action(action: CanonicalAction, schema: str) -> dict:
    """Encode a canonical action as a kapps or m3a record.

    Raises UnknownActionType when the target schema cannot express the kind.
    Every expressible encoding except swipe -> m3a round-trips losslessly
    through ``parse_action``.
    """
    if schema == "kapps":
        return _to_kapps(action)
    if schema == "m3a":
        return _to_m3a(action)
    raise ValueError(f"schema must be one of {_SCHEMAS}, got {schema!r}")


def parse_action(record: dict, schema: str | None = None) -> CanonicalAction:
    """Decode a wire record; schema auto-detected from its fields when omitted."""
    if not isinstance(record, dict):
        raise MissingField(f"action record must be an object, got {type(record).__name__}")
    if schema is None:
        schema = detect_schema(record)
    if schema == "kapps":
        return _from_kapps(record)
    if schema == "m3a":
        return _from_m3a(record)
    raise ValueError(f"schema must be one of {_SCHEMAS}, got {schema!r}")


def detect_schema(record: dict) -> str:
    if "action_type" in record:
        return "m3a"
    if "action" in record:
        return "kapps"
    raise UnknownActionType(f"record matches neither schema: {sorted(record)!r}")


def action_prompt_text(action: CanonicalAction) -> str:
    """Compact JSON form of an action for embedding in prompt templates.

    Prefers the m3a encoding (the form the scoring prompts document); falls
    back to kapps for kinds m3a cannot express.
    """
    try:
        record = _to_m3a(action)
    except UnknownActionType:
        record = _to_kapps(action)
    return json.dumps(record, separators=(", ", ": "), ensure_ascii=False)
