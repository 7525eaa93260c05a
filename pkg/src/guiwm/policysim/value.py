"""Per-candidate value estimation and the selection reduction.

A value reply is a ``{"Reason", "Judgement", "Confidence"}`` JSON map;
an out-of-range confidence is clamped into [0, 1] and flagged, and
anything unparseable degrades to (invalid, 0.0) with the same flag
instead of crashing a whole run.  Selection
takes the argmax of confidence over candidates judged valid, breaking ties
toward the lowest index; if nothing was judged valid it falls back to the
overall argmax.  Only the ordering of confidences matters, never their
scale.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..gateway import ChatRequest, Gateway, ImagePart, TextPart
from ..jsonx import first_json_object
from ..prompts import build_value_current, build_value_predicted
from ..trajectory import StateImage
from .alternatives import Candidate

__all__ = ["ValueVerdict", "parse_value_reply", "estimate_value", "select_candidate"]


@dataclass(frozen=True, slots=True)
class ValueVerdict:
    judgement: str  # valid | invalid
    confidence: float
    reason: str = ""
    parse_flag: bool = False

    @property
    def valid(self) -> bool:
        return self.judgement == "valid"


def parse_value_reply(text: str) -> ValueVerdict:
    obj = first_json_object(text, required_keys=("judgement", "confidence"))
    if obj is None:
        return ValueVerdict("invalid", 0.0, "", parse_flag=True)
    by_lower = {str(k).lower(): v for k, v in obj.items()}
    judgement = str(by_lower.get("judgement", "")).strip().lower()
    reason = by_lower.get("reason")
    reason = reason if isinstance(reason, str) else ""
    raw_confidence = by_lower.get("confidence")
    try:
        confidence = float(raw_confidence)
    except (TypeError, ValueError):
        return ValueVerdict("invalid", 0.0, reason, parse_flag=True)
    if judgement not in ("valid", "invalid"):
        return ValueVerdict("invalid", 0.0, reason, parse_flag=True)
    clamped = min(1.0, max(0.0, confidence))
    return ValueVerdict(judgement, clamped, reason, parse_flag=clamped != confidence)


def estimate_value(
    gateway: Gateway,
    endpoint_id: str,
    goal: str,
    history: list[str] | None,
    candidate: Candidate,
    current: StateImage,
    predicted: StateImage | None = None,
    max_output_tokens: int = 2048,
) -> ValueVerdict:
    """Judge one candidate; with ``predicted`` the judgement sees the
    before/after pair, without it only the current state."""
    if predicted is None:
        prompt = build_value_current(goal, history, candidate.action, candidate.reason)
        parts = (TextPart(prompt), ImagePart(current.image_ref))
    else:
        prompt = build_value_predicted(goal, history, candidate.action, candidate.reason)
        parts = (TextPart(prompt), ImagePart(current.image_ref), ImagePart(predicted.image_ref))
    reply = gateway.chat(endpoint_id, ChatRequest(parts, max_output_tokens=max_output_tokens))
    return parse_value_reply(reply)


def select_candidate(verdicts: list[ValueVerdict]) -> int:
    """Index of the winning candidate under the argmax-over-valid rule."""
    if not verdicts:
        raise ValueError("no verdicts to select from")
    pool = [i for i, v in enumerate(verdicts) if v.valid]
    if not pool:
        pool = list(range(len(verdicts)))
    best = pool[0]
    for i in pool[1:]:
        if verdicts[i].confidence > verdicts[best].confidence:
            best = i
    return best
