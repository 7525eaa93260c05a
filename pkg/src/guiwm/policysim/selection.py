"""Direct best-of-K selection.

The selector model sees the numbered candidate list and must end its reply
with ``Best: <n>``; the last such line wins, so chains of reasoning that
mention intermediate picks do not confuse the parse.  An out-of-range or
missing number is a SelectionParseError, never a silent default.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from ..gateway import ChatRequest, Gateway, ImagePart, TextPart
from ..prompts import build_select
from .alternatives import CandidateSet

__all__ = ["SelectionParseError", "SelectionResult", "parse_selection", "select_action"]

_BEST_RE = re.compile(r"(?im)^\s*Best\s*:\s*(\d+)\s*\.?\s*$")


class SelectionParseError(ValueError):
    pass


@dataclass(frozen=True, slots=True)
class SelectionResult:
    best_index: int  # 0-based into the candidate tuple
    reason: str


def parse_selection(text: str, k: int) -> SelectionResult:
    matches = _BEST_RE.findall(text)
    if not matches:
        raise SelectionParseError("no 'Best: <n>' line in reply")
    number = int(matches[-1])
    if not (1 <= number <= k):
        raise SelectionParseError(f"Best: {number} is outside 1..{k}")
    reason_match = re.search(r"(?is)Reason\s*:\s*(.*?)(?:\n\s*Best\s*:|\Z)", text)
    reason = reason_match.group(1).strip() if reason_match else ""
    return SelectionResult(best_index=number - 1, reason=reason)


def select_action(
    gateway: Gateway,
    endpoint_id: str,
    image_ref: str,
    goal: str,
    history: list[str] | None,
    candidate_set: CandidateSet,
    max_output_tokens: int = 2048,
) -> SelectionResult:
    prompt = build_select(goal, history, [(c.action, c.reason) for c in candidate_set.candidates])
    request = ChatRequest((TextPart(prompt), ImagePart(image_ref)), max_output_tokens=max_output_tokens)
    reply = gateway.chat(endpoint_id, request)
    return parse_selection(reply, candidate_set.k)
