"""Distractor action generation.

The generator must return exactly K-1 numbered alternatives, none of which
collides with the ground truth.  Collision means structural equality on the
distinguishing fields with pointer coordinates within DUPLICATE_RADIUS grid
units (Chebyshev), mirroring the prompt's own "not at (500, 301) or nearby"
instruction; a SCROLL up is never a duplicate of a SCROLL down.

One bad reply earns one re-request that names the problem (appended as an
extra prompt part, so it caches under its own key); a second bad reply is a
hard error rather than a silently degraded candidate set.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from ..actions import CanonicalAction, CodecError, parse_action
from ..gateway import ChatRequest, Gateway, ImagePart, TextPart
from ..jsonx import iter_json_objects
from ..prompts import build_alternatives

__all__ = [
    "DUPLICATE_RADIUS",
    "Candidate",
    "CandidateSet",
    "AlternativesParseError",
    "DuplicateOfGroundTruth",
    "actions_conflict",
    "parse_alternatives",
    "gen_alternatives",
    "GT_REASON",
]

DUPLICATE_RADIUS = 25  # grid units on the [0, 1000] axes

# Neutral stand-in reason for the ground-truth candidate; generated
# alternatives carry model-written reasons and prompts render every
# candidate the same way, so nothing distinguishes the ground truth.
GT_REASON = "Suggested action for this step."


class AlternativesParseError(ValueError):
    pass


class DuplicateOfGroundTruth(RuntimeError):
    def __init__(self, duplicates: list["Candidate"]):
        text = "; ".join(f"{c.action.kind}" for c in duplicates)
        super().__init__(f"generator repeated the ground-truth action: {text}")
        self.duplicates = duplicates


@dataclass(frozen=True, slots=True)
class Candidate:
    action: CanonicalAction
    reason: str


@dataclass(frozen=True)
class CandidateSet:
    """Ground truth first; prompt numbering is 1-based, so GT is candidate 1."""

    sample_id: str
    candidates: tuple[Candidate, ...]

    def __post_init__(self) -> None:
        if len(self.candidates) < 2:
            raise ValueError("a candidate set needs the ground truth plus at least one alternative")

    @property
    def k(self) -> int:
        return len(self.candidates)

    @property
    def ground_truth(self) -> Candidate:
        return self.candidates[0]


def _points_close(a: tuple[int, int] | None, b: tuple[int, int] | None) -> bool:
    if a is None and b is None:
        return True
    if a is None or b is None:
        return False
    return max(abs(a[0] - b[0]), abs(a[1] - b[1])) <= DUPLICATE_RADIUS


def actions_conflict(a: CanonicalAction, b: CanonicalAction) -> bool:
    """True when ``b`` is the same move as ``a`` for duplicate purposes."""
    if a.kind != b.kind:
        return False
    if (a.direction, a.text, a.app_name) != (b.direction, b.text, b.app_name):
        return False
    return _points_close(a.point, b.point) and _points_close(a.end_point, b.end_point)


_ENTRY_RE = re.compile(r"(?:^|[{,\n])\s*\"?(\d+)\"?\s*:", re.M)
_ACTION_LABEL_RE = re.compile(r"\"?Action\"?\s*:", re.I)


def _entry_action_object(chunk: str) -> dict | None:
    # The entry value may wrap the action in pseudo-JSON braces
    # ({Reason: ..., Action: {...}}) that never decode, so scan from the
    # Action label first and only then fall back to the whole chunk.
    label = _ACTION_LABEL_RE.search(chunk)
    if label:
        obj = next(iter_json_objects(chunk[label.end():]), None)
        if obj is not None:
            return obj
    return next(iter_json_objects(chunk), None)


def parse_alternatives(text: str, expected: int) -> list[Candidate]:
    """Decode the numbered map reply into candidates 1..expected, in order.

    The documented reply shape is ``{1: {Reason: ..., Action: {...}}, ...}``
    which is not strict JSON, so parsing is structural: entries are located
    by their number labels, the action is the first decodable JSON object
    after the entry's Action label (or anywhere in the entry when the label
    is missing), and the reason is the text between the Reason and Action
    labels.  Strict-JSON replies parse through the same path.
    """
    entries: dict[int, str] = {}
    matches = list(_ENTRY_RE.finditer(text))
    for i, m in enumerate(matches):
        number = int(m.group(1))
        end = matches[i + 1].start() if i + 1 < len(matches) else len(text)
        entries[number] = text[m.end() : end]
    expected_numbers = list(range(1, expected + 1))
    missing = [n for n in expected_numbers if n not in entries]
    if missing:
        raise AlternativesParseError(f"reply is missing entries {missing}; found {sorted(entries)}")
    extra = [n for n in entries if n not in expected_numbers]
    if extra:
        raise AlternativesParseError(f"reply has unexpected entries {sorted(extra)}")

    candidates = []
    for number in expected_numbers:
        chunk = entries[number]
        action_obj = _entry_action_object(chunk)
        if action_obj is None:
            raise AlternativesParseError(f"entry {number} contains no action object")
        try:
            action = parse_action(action_obj)
        except CodecError as exc:
            raise AlternativesParseError(f"entry {number}: {exc}") from exc
        reason_match = re.search(r"Reason\"?\s*:\s*(.*?)(?:,?\s*\"?Action\"?\s*:)", chunk, re.S | re.I)
        reason = reason_match.group(1).strip().strip("\"',") if reason_match else ""
        candidates.append(Candidate(action=action, reason=reason))
    return candidates


_RETRY_NOTE = (
    "Your previous reply was rejected: {problem}. "
    "Provide exactly {n} well-formed alternatives in the required numbered format, "
    "each clearly different from the already-suggested action."
)


def gen_alternatives(
    gateway: Gateway,
    endpoint_id: str,
    sample_id: str,
    image_ref: str,
    goal: str,
    history: list[str] | None,
    gt_action: CanonicalAction,
    k: int,
    max_output_tokens: int = 2048,
) -> CandidateSet:
    if k < 2:
        raise ValueError("k must be >= 2 (ground truth plus alternatives)")
    prompt = build_alternatives(goal, history, gt_action, k - 1)
    request = ChatRequest((TextPart(prompt), ImagePart(image_ref)), max_output_tokens=max_output_tokens)

    problem: str | None = None
    last_error: Exception | None = None
    for attempt in range(2):
        if attempt == 1:
            request = request.with_extra_text(_RETRY_NOTE.format(problem=problem, n=k - 1))
        reply = gateway.chat(endpoint_id, request)
        try:
            alternatives = parse_alternatives(reply, k - 1)
        except AlternativesParseError as exc:
            problem, last_error = str(exc), exc
            continue
        duplicates = [c for c in alternatives if actions_conflict(gt_action, c.action)]
        if duplicates:
            last_error = DuplicateOfGroundTruth(duplicates)
            problem = "some suggestions repeated or nearly repeated the already-suggested action"
            continue
        ground_truth = Candidate(action=gt_action, reason=GT_REASON)
        return CandidateSet(sample_id=sample_id, candidates=(ground_truth, *alternatives))
    assert last_error is not None
    raise last_error
