"""Vision-judge voting on predicted next states.

Each judge sees the current screenshot, the rendered prediction, and the
action text, and must answer with a ``{"Thoughts", "Status"}`` JSON map.
Replies that cannot be parsed, or whose Status is neither success nor
failure (any casing), count as failure and are flagged so aggregate flag
rates stay observable.  The per-sample score is the plain mean of binary
verdicts; a failed render short-circuits to 0 without consulting judges.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..actions import CanonicalAction
from ..gateway import ChatRequest, Gateway, ImagePart, TextPart
from ..jsonx import first_json_object
from ..prompts import build_judge
from ..trajectory import StateImage

__all__ = ["JudgeVerdict", "parse_judge_reply", "judge_once", "aggregate_iacc", "panel_statuses"]


@dataclass(frozen=True, slots=True)
class JudgeVerdict:
    judge_id: str
    status: str  # success | failure
    thoughts: str
    parse_flag: bool = False


def parse_judge_reply(judge_id: str, text: str) -> JudgeVerdict:
    obj = first_json_object(text, required_keys=("status",))
    if obj is None:
        return JudgeVerdict(judge_id, "failure", "", parse_flag=True)
    by_lower = {str(k).lower(): v for k, v in obj.items()}
    status = str(by_lower.get("status", "")).strip().lower()
    thoughts = by_lower.get("thoughts")
    thoughts = thoughts if isinstance(thoughts, str) else ""
    if status not in ("success", "failure"):
        return JudgeVerdict(judge_id, "failure", thoughts, parse_flag=True)
    return JudgeVerdict(judge_id, status, thoughts)


def judge_once(
    gateway: Gateway,
    judge_id: str,
    current: StateImage,
    predicted: StateImage,
    action: CanonicalAction,
    max_output_tokens: int = 2048,
) -> JudgeVerdict:
    request = ChatRequest(
        (
            TextPart(build_judge(action)),
            ImagePart(current.image_ref),
            ImagePart(predicted.image_ref),
        ),
        max_output_tokens=max_output_tokens,
    )
    return parse_judge_reply(judge_id, gateway.chat(judge_id, request))


def panel_statuses(verdicts: list[JudgeVerdict]) -> list[str]:
    return [v.status for v in verdicts]


def aggregate_iacc(statuses: list[str], render_failed: bool) -> float:
    """Mean of binary judge verdicts; 0.0 outright when the render failed."""
    if render_failed:
        return 0.0
    if not statuses:
        raise ValueError("cannot aggregate an empty judge panel")
    for status in statuses:
        if status not in ("success", "failure"):
            raise ValueError(f"status must be success or failure, got {status!r}")
    return sum(1.0 for s in statuses if s == "success") / len(statuses)
