"""The three evaluation modes over a sample set.

    oracle         the selector model picks directly from the candidate list
    value_no_wm    per-candidate value judged from the current state only
    value_with_wm  each candidate is rolled forward through the next-state
                   predictor and judged on the (before, predicted-after) pair

Ground truth is always candidate 1, so accuracy is simply the fraction of
samples whose selected index is 0.  In value_with_wm, a candidate whose
roll-out fails to render is scored (invalid, 0.0) and flagged rather than
aborting the sample.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from ..actions import CanonicalAction, action_prompt_text, parse_action
from ..gateway import ChatRequest, Gateway, ImagePart, TextPart
from ..prompts import build_next_state
from ..render import RenderPool, Viewport
from ..evaluate.parse import ParseFail, parse_wm_output
from ..trajectory import StateImage
from .alternatives import CandidateSet, gen_alternatives
from .selection import select_action
from .value import ValueVerdict, estimate_value, select_candidate

__all__ = [
    "MODES",
    "PolicySample",
    "PolicyEvalConfig",
    "PolicyEvalResult",
    "read_policy_samples",
    "run_policy_eval",
]

MODES = ("oracle", "value_no_wm", "value_with_wm")


@dataclass(frozen=True)
class PolicySample:
    id: str
    image: StateImage
    goal: str
    gt_action: CanonicalAction
    history: tuple[str, ...] = ()

    @classmethod
    def from_record(cls, record: dict) -> "PolicySample":
        return cls(
            id=record["id"],
            image=StateImage(record["image"], record["width_px"], record["height_px"]),
            goal=record["goal"],
            gt_action=parse_action(record["gt_action"]),
            history=tuple(record.get("history", ())),
        )


def read_policy_samples(path: str | Path, root: Path | None = None) -> list[PolicySample]:
    path = Path(path)
    if root is None:
        root = path.parent
    samples = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            record = json.loads(line)
            image = record["image"]
            if not Path(image).is_absolute():
                record = {**record, "image": str(root / image)}
            samples.append(PolicySample.from_record(record))
    return samples


@dataclass(frozen=True)
class PolicyEvalConfig:
    mode: str
    alt_endpoint: str
    selector_endpoint: str | None = None  # oracle mode
    value_endpoint: str | None = None  # value modes
    wm_endpoint: str | None = None  # value_with_wm
    k: int = 3
    workers: int = 4
    max_output_tokens: int = 2048
    wm_max_output_tokens: int = 8192

    def __post_init__(self) -> None:
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.mode == "oracle" and not self.selector_endpoint:
            raise ValueError("oracle mode needs selector_endpoint")
        if self.mode in ("value_no_wm", "value_with_wm") and not self.value_endpoint:
            raise ValueError(f"{self.mode} needs value_endpoint")
        if self.mode == "value_with_wm" and not self.wm_endpoint:
            raise ValueError("value_with_wm needs wm_endpoint")
        if self.k < 2:
            raise ValueError("k must be >= 2")


@dataclass
class PolicyEvalResult:
    mode: str
    accuracy: float
    rows: list[dict] = field(default_factory=list)

    @property
    def n(self) -> int:
        return len(self.rows)

    def save_rows(self, path: str | Path) -> None:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8") as fh:
            for row in self.rows:
                fh.write(json.dumps(row, ensure_ascii=False, sort_keys=True) + "\n")


def _rollout(
    gateway: Gateway,
    pool: RenderPool,
    config: PolicyEvalConfig,
    sample: PolicySample,
    candidate_index: int,
    action: CanonicalAction,
) -> StateImage | None:
    """Predicted next-state screenshot for one candidate, or None when the
    prediction does not survive parse + render."""
    request = ChatRequest(
        (TextPart(build_next_state(action)), ImagePart(sample.image.image_ref)),
        max_output_tokens=config.wm_max_output_tokens,
    )
    raw = gateway.chat(config.wm_endpoint, request)
    try:
        output = parse_wm_output(raw)
    except ParseFail:
        return None
    viewport = Viewport(sample.image.width_px, sample.image.height_px)
    result = pool.render(output.html, viewport=viewport, name=f"{sample.id}-c{candidate_index}")
    return result.screenshot if result.ok else None


def _evaluate_sample(
    gateway: Gateway,
    pool: RenderPool | None,
    config: PolicyEvalConfig,
    sample: PolicySample,
) -> dict:
    candidate_set: CandidateSet = gen_alternatives(
        gateway,
        config.alt_endpoint,
        sample.id,
        sample.image.image_ref,
        sample.goal,
        list(sample.history),
        sample.gt_action,
        config.k,
        config.max_output_tokens,
    )
    row: dict = {
        "sample_id": sample.id,
        "mode": config.mode,
        "candidates": [action_prompt_text(c.action) for c in candidate_set.candidates],
    }
    if config.mode == "oracle":
        selection = select_action(
            gateway,
            config.selector_endpoint,
            sample.image.image_ref,
            sample.goal,
            list(sample.history),
            candidate_set,
            config.max_output_tokens,
        )
        selected = selection.best_index
        row["selector_reason"] = selection.reason
    else:
        verdicts: list[ValueVerdict] = []
        for i, candidate in enumerate(candidate_set.candidates):
            predicted = None
            flagged_render = False
            if config.mode == "value_with_wm":
                predicted = _rollout(gateway, pool, config, sample, i, candidate.action)
                if predicted is None:
                    verdicts.append(ValueVerdict("invalid", 0.0, "roll-out failed to render", parse_flag=True))
                    flagged_render = True
            if not flagged_render:
                verdicts.append(
                    estimate_value(
                        gateway,
                        config.value_endpoint,
                        sample.goal,
                        list(sample.history),
                        candidate,
                        sample.image,
                        predicted,
                        config.max_output_tokens,
                    )
                )
        selected = select_candidate(verdicts)
        row["verdicts"] = [
            {
                "judgement": v.judgement,
                "confidence": v.confidence,
                "parse_flag": v.parse_flag,
            }
            for v in verdicts
        ]
    row["selected"] = selected
    row["correct"] = selected == 0
    return row


def run_policy_eval(
    samples: list[PolicySample],
    gateway: Gateway,
    config: PolicyEvalConfig,
    pool: RenderPool | None = None,
) -> PolicyEvalResult:
    if config.mode == "value_with_wm" and pool is None:
        raise ValueError("value_with_wm needs a render pool")
    ordered = sorted(samples, key=lambda s: s.id)
    with ThreadPoolExecutor(max_workers=config.workers) as executor:
        futures = [executor.submit(_evaluate_sample, gateway, pool, config, s) for s in ordered]
        rows = [f.result() for f in futures]
    correct = sum(1 for r in rows if r["correct"])
    accuracy = correct / len(rows) if rows else 0.0
    return PolicyEvalResult(mode=config.mode, accuracy=accuracy, rows=rows)
