"""Individual generation steps and the assembled sample type.

The assistant target string is the training-time contract:

    Next State Reasoning: <trace>

    HTML: <markup>

``evaluate.parse.parse_wm_output`` splits on exactly these markers, which
is why a reasoning trace may not contain a line starting with "HTML:"
(DelimiterReject) and why the blocklist exists at all: a trace that leaks
the annotation legend or the ground-truth next state would teach the model
to reference inputs it will not have at inference time.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from ..jsonx import first_json_object
from ..trajectory import Transition

__all__ = [
    "DEFAULT_BLOCKLIST",
    "BlocklistReject",
    "DelimiterReject",
    "RelabelParseError",
    "CodeState",
    "ReasoningTrace",
    "SftSample",
    "check_blocklist",
    "parse_relabel_response",
    "build_sft_sample",
    "ASSISTANT_TEMPLATE",
]

# Substring matches, case-insensitive.  "annotat" covers annotated /
# annotation / annotations.
DEFAULT_BLOCKLIST: tuple[str, ...] = (
    "annotat",
    "crosshair",
    "red circle",
    "yellow dot",
    "yellow center",
    "blue line",
    "green start",
    "red end",
    "ground truth",
    "ground-truth",
    "second image",
    "second screenshot",
    "next state image",
    "next screenshot",
    "visual marker",
)

_HTML_MARKER_LINE = re.compile(r"(?m)^\s*HTML\s*:")

ASSISTANT_TEMPLATE = "Next State Reasoning: {reasoning}\n\nHTML: {html}"


class BlocklistReject(ValueError):
    def __init__(self, term: str):
        super().__init__(f"reasoning mentions blocked phrase {term!r}")
        self.term = term


class DelimiterReject(ValueError):
    pass


class RelabelParseError(ValueError):
    pass


def check_blocklist(text: str, blocklist: tuple[str, ...] = DEFAULT_BLOCKLIST) -> str | None:
    """The first blocked phrase found in ``text``, or None."""
    lowered = text.lower()
    for term in blocklist:
        if term in lowered:
            return term
    return None


@dataclass(frozen=True, slots=True)
class CodeState:
    """Image-to-code result for one screenshot."""

    reasoning: str
    html: str


@dataclass(frozen=True, slots=True)
class ReasoningTrace:
    """A validated look-ahead trace, safe to splice into the target string."""

    text: str
    blocklist: tuple[str, ...] = field(default=DEFAULT_BLOCKLIST, compare=False)

    def __post_init__(self) -> None:
        term = check_blocklist(self.text, self.blocklist)
        if term is not None:
            raise BlocklistReject(term)
        if _HTML_MARKER_LINE.search(self.text):
            raise DelimiterReject("reasoning contains a line-initial 'HTML:' marker")


def parse_relabel_response(text: str) -> CodeState:
    """Decode the image-to-code JSON reply, tolerating fences and prose.

    The reply must contain a JSON object with non-empty string "reasoning"
    and "html" fields; anything else is a RelabelParseError.
    """
    obj = first_json_object(text, required_keys=("reasoning", "html"))
    if obj is None:
        raise RelabelParseError("no JSON object with reasoning and html fields")
    by_lower = {str(k).lower(): v for k, v in obj.items()}
    reasoning = by_lower.get("reasoning")
    html = by_lower.get("html")
    if not isinstance(reasoning, str) or not isinstance(html, str):
        raise RelabelParseError("reasoning and html must both be strings")
    if not html.strip():
        raise RelabelParseError("html field is empty")
    return CodeState(reasoning=reasoning, html=html)


@dataclass(frozen=True, slots=True)
class SftSample:
    transition_id: str
    app: str
    goal: str
    strategy: str
    prompt: str
    image_ref: str
    assistant: str

    def to_record(self) -> dict:
        return {
            "transition_id": self.transition_id,
            "app": self.app,
            "goal": self.goal,
            "strategy": self.strategy,
            "prompt": self.prompt,
            "image": self.image_ref,
            "assistant": self.assistant,
        }


def build_sft_sample(
    transition: Transition,
    strategy: str,
    code_state: CodeState,
    trace: ReasoningTrace | None,
    prompt: str,
) -> SftSample:
    """Assemble the training sample for one transition.

    ours             look-ahead trace + relabeled next-state HTML
    naive-reasoning  the relabeler's own analysis stands in for the trace
    naive-state      HTML only, no reasoning section
    """
    if strategy in ("ours", "naive-reasoning"):
        if trace is None:
            raise ValueError(f"strategy {strategy} needs a reasoning trace")
        assistant = ASSISTANT_TEMPLATE.format(reasoning=trace.text, html=code_state.html)
    elif strategy == "naive-state":
        assistant = f"HTML: {code_state.html}"
    else:
        raise ValueError(f"unknown strategy {strategy!r}")
    return SftSample(
        transition_id=transition.id,
        app=transition.app,
        goal=transition.goal,
        strategy=strategy,
        prompt=prompt,
        image_ref=transition.s_t.image_ref,
        assistant=assistant,
    )
