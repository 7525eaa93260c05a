"""Pulling JSON objects out of free-form model text.

Models wrap their JSON in markdown fences, prose, or both.  The scanner
below walks the text for balanced top-level ``{...}`` spans (string-aware,
so braces inside string values do not confuse it) and attempts to decode
each span, yielding the ones that parse.
"""

from __future__ import annotations

import json
from typing import Iterator

__all__ = ["iter_json_objects", "first_json_object", "strip_fences"]


def strip_fences(text: str) -> str:
    """Drop a single wrapping markdown code fence, if present."""
    stripped = text.strip()
    if not stripped.startswith("```"):
        return text
    lines = stripped.splitlines()
    if len(lines) >= 2 and lines[-1].strip() == "```":
        return "\n".join(lines[1:-1])
    return text


def _balanced_spans(text: str) -> Iterator[tuple[int, int]]:
    depth = 0
    start = -1
    in_string = False
    escape = False
    for i, ch in enumerate(text):
        if in_string:
            if escape:
                escape = False
            elif ch == "\\":
                escape = True
            elif ch == '"':
                in_string = False
            continue
        if ch == '"':
            if depth > 0:
                in_string = True
        elif ch == "{":
            if depth == 0:
                start = i
            depth += 1
        elif ch == "}":
            if depth > 0:
                depth -= 1
                if depth == 0:
                    yield (start, i + 1)
    # Unbalanced tails are simply not yielded.


def iter_json_objects(text: str) -> Iterator[dict]:
    """Yield every decodable top-level JSON object found in the text, in order."""
    for start, end in _balanced_spans(text):
        try:
            obj = json.loads(text[start:end])
        except json.JSONDecodeError:
            continue
        if isinstance(obj, dict):
            yield obj


def first_json_object(text: str, required_keys: tuple[str, ...] = ()) -> dict | None:
    """First decodable object containing all required keys (case-insensitive)."""
    wanted = {k.lower() for k in required_keys}
    for obj in iter_json_objects(text):
        if not wanted:
            return obj
        have = {str(k).lower() for k in obj}
        if wanted <= have:
            return obj
    return None
