"""Splitting a predictor's reply into reasoning and HTML.

The trained format is

    Next State Reasoning: <trace>

    HTML: <markup>

and the primary rule splits on the first *line-initial* ``HTML:`` marker,
so an ``HTML:`` mentioned mid-sentence inside the reasoning never splits
early.  Models that drop the markers still usually emit a document, so a
fallback accepts any reply whose tail from the first ``<!doctype`` or
``<html`` onward looks like markup, treating whatever precedes it as the
reasoning.  Markdown fences around either section are tolerated and
stripped.  Anything else raises ``ParseFail``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from ..jsonx import strip_fences

__all__ = ["ParseFail", "WMOutput", "parse_wm_output", "format_wm_output"]

_HTML_MARKER = re.compile(r"(?m)^[ \t]*HTML[ \t]*:")
_REASONING_PREFIX = re.compile(r"^\s*Next State Reasoning[ \t]*:[ \t]*", re.IGNORECASE)
_DOC_START = re.compile(r"<!doctype\b|<html\b", re.IGNORECASE)


class ParseFail(ValueError):
    pass


@dataclass(frozen=True, slots=True)
class WMOutput:
    reasoning: str
    html: str


def _clean_html(fragment: str) -> str:
    fragment = strip_fences(fragment.strip()).strip()
    # Leading "html" language tag left over from a fence like ```html
    if fragment.lower().startswith("html\n"):
        fragment = fragment[5:]
    return fragment.strip()


def _clean_reasoning(fragment: str) -> str:
    fragment = _REASONING_PREFIX.sub("", fragment.strip())
    return fragment.strip()


def parse_wm_output(text: str) -> WMOutput:
    if not text or not text.strip():
        raise ParseFail("empty reply")
    body = strip_fences(text)
    marker = _HTML_MARKER.search(body)
    if marker:
        reasoning = _clean_reasoning(body[: marker.start()])
        html = _clean_html(body[marker.end() :])
        if not html:
            raise ParseFail("HTML marker present but no markup follows")
        return WMOutput(reasoning=reasoning, html=html)
    doc = _DOC_START.search(body)
    if doc:
        reasoning = _clean_reasoning(body[: doc.start()])
        html = _clean_html(body[doc.start() :])
        return WMOutput(reasoning=reasoning, html=html)
    raise ParseFail("no HTML marker and no recognizable document start")


def format_wm_output(output: WMOutput) -> str:
    """Inverse of ``parse_wm_output`` for well-formed pairs; the round-trip
    parse(format(o)) == o holds whenever the reasoning obeys the delimiter
    rule (no line-initial HTML: marker)."""
    return f"Next State Reasoning: {output.reasoning}\n\nHTML: {output.html}"
