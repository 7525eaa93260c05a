"""End-to-end dataset generation.

For each transition the pipeline runs two independent model calls, one
relabeling the next-state screenshot into HTML and one synthesizing the
look-ahead trace from the annotated current screenshot; both are submitted
to one shared worker pool, so a batch keeps every configured in-flight
slot busy.

Failure handling is uniform: any parse, gate, blocklist, or delimiter
failure earns exactly one retry at ``retry_temperature`` (a distinct cache
key, so the retry is itself deterministic), after which the transition is
rejected with a stage + reason row in the rejection report.  Outputs are
sorted by transition id and written atomically, which together with the
response cache makes an interrupted run resumable: rerunning reproduces
the identical file without re-hitting the endpoint.
"""

from __future__ import annotations

import json
import os
import tempfile
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from ..gateway import ChatRequest, Gateway, ImagePart, TextPart
from ..prompts import build_img_to_code, build_look_ahead, build_next_state
from ..render.gate import renderability_check
from ..trajectory import Transition
from .annotate import annotate_action
from .steps import (
    DEFAULT_BLOCKLIST,
    BlocklistReject,
    CodeState,
    DelimiterReject,
    ReasoningTrace,
    RelabelParseError,
    SftSample,
    build_sft_sample,
    parse_relabel_response,
)

__all__ = ["PipelineConfig", "GenerationReport", "generate_dataset", "STRATEGIES"]

STRATEGIES = ("ours", "naive-state", "naive-reasoning")


@dataclass(frozen=True)
class PipelineConfig:
    endpoint_id: str
    strategy: str = "ours"
    workers: int = 4
    retry_temperature: float = 0.2
    max_output_tokens: int = 8192
    blocklist: tuple[str, ...] = DEFAULT_BLOCKLIST

    def __post_init__(self) -> None:
        if self.strategy not in STRATEGIES:
            raise ValueError(f"strategy must be one of {STRATEGIES}, got {self.strategy!r}")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")


@dataclass
class GenerationReport:
    total: int = 0
    emitted: int = 0
    rejected: int = 0
    renderable_rate: float = 0.0
    by_reason: dict = field(default_factory=dict)
    rejects: list = field(default_factory=list)

    def summary_line(self) -> str:
        reasons = ", ".join(f"{k}={v}" for k, v in sorted(self.by_reason.items())) or "none"
        return (
            f"{self.emitted}/{self.total} samples emitted, "
            f"renderable rate {self.renderable_rate:.1%}, rejections: {reasons}"
        )


@dataclass(frozen=True)
class _Reject:
    transition_id: str
    stage: str
    reason: str
    detail: str

    def to_record(self) -> dict:
        return {
            "transition_id": self.transition_id,
            "stage": self.stage,
            "reason": self.reason,
            "detail": self.detail,
        }


def _relabel_once(gateway: Gateway, cfg: PipelineConfig, t: Transition, temperature: float) -> CodeState:
    request = ChatRequest(
        (TextPart(build_img_to_code()), ImagePart(t.s_t1.image_ref)),
        temperature=temperature,
        max_output_tokens=cfg.max_output_tokens,
    )
    return parse_relabel_response(gateway.chat(cfg.endpoint_id, request))


def _relabel_task(gateway: Gateway, cfg: PipelineConfig, t: Transition):
    """-> ("ok", CodeState) or ("reject", _Reject).  One retry at the bumped
    temperature covers parse failures, gate failures, and (for the
    naive-reasoning strategy) delimiter collisions in the relabel analysis."""
    last: _Reject | None = None
    for temperature in (0.0, cfg.retry_temperature):
        try:
            code = _relabel_once(gateway, cfg, t, temperature)
        except RelabelParseError as exc:
            last = _Reject(t.id, "relabel", "parse", str(exc))
            continue
        gate = renderability_check(code.html)
        if not gate:
            last = _Reject(t.id, "relabel", "renderability", gate.reason or "gate failed")
            continue
        if cfg.strategy == "naive-reasoning":
            try:
                ReasoningTrace(code.reasoning.strip(), blocklist=())
            except DelimiterReject as exc:
                last = _Reject(t.id, "relabel", "delimiter", str(exc))
                continue
        return ("ok", code)
    return ("reject", last)


def _reasoning_task(gateway: Gateway, cfg: PipelineConfig, t: Transition, workdir: Path):
    annotated = annotate_action(t.s_t, t.action, workdir / "annotated", name=t.id)
    prompt = build_look_ahead(t.action)
    last: _Reject | None = None
    for temperature in (0.0, cfg.retry_temperature):
        request = ChatRequest(
            (TextPart(prompt), ImagePart(annotated.image_ref), ImagePart(t.s_t1.image_ref)),
            temperature=temperature,
            max_output_tokens=cfg.max_output_tokens,
        )
        text = gateway.chat(cfg.endpoint_id, request).strip()
        try:
            trace = ReasoningTrace(text, blocklist=cfg.blocklist)
        except BlocklistReject as exc:
            last = _Reject(t.id, "reasoning", "blocklist", str(exc))
            continue
        except DelimiterReject as exc:
            last = _Reject(t.id, "reasoning", "delimiter", str(exc))
            continue
        return ("ok", trace)
    return ("reject", last)


def generate_dataset(
    transitions: list[Transition],
    gateway: Gateway,
    config: PipelineConfig,
    workdir: str | Path,
    out_path: str | Path,
    report_path: str | Path | None = None,
) -> GenerationReport:
    workdir = Path(workdir)
    workdir.mkdir(parents=True, exist_ok=True)
    out_path = Path(out_path)
    ordered = sorted(transitions, key=lambda t: t.id)
    dup = _first_duplicate(ordered)
    if dup is not None:
        raise ValueError(f"duplicate transition id {dup!r} in input")

    with ThreadPoolExecutor(max_workers=config.workers) as pool:
        relabel_futures = {t.id: pool.submit(_relabel_task, gateway, config, t) for t in ordered}
        reasoning_futures = {}
        if config.strategy == "ours":
            reasoning_futures = {
                t.id: pool.submit(_reasoning_task, gateway, config, t, workdir) for t in ordered
            }
        samples: list[SftSample] = []
        rejects: list[_Reject] = []
        relabel_failed: set[str] = set()
        for t in ordered:
            status, payload = relabel_futures[t.id].result()
            if status == "reject":
                rejects.append(payload)
                relabel_failed.add(t.id)
                continue
            code: CodeState = payload
            trace: ReasoningTrace | None = None
            if config.strategy == "ours":
                r_status, r_payload = reasoning_futures[t.id].result()
                if r_status == "reject":
                    rejects.append(r_payload)
                    continue
                trace = r_payload
            elif config.strategy == "naive-reasoning":
                trace = ReasoningTrace(code.reasoning.strip(), blocklist=())
            samples.append(build_sft_sample(t, config.strategy, code, trace, build_next_state(t.action)))

    _write_jsonl_atomic(out_path, (s.to_record() for s in samples))
    rejects.sort(key=lambda r: (r.transition_id, r.stage))
    if report_path is not None:
        _write_jsonl_atomic(Path(report_path), (r.to_record() for r in rejects))

    by_reason: dict[str, int] = {}
    for r in rejects:
        by_reason[r.reason] = by_reason.get(r.reason, 0) + 1
    total = len(ordered)
    renderable = total - len([r for r in rejects if r.stage == "relabel" and r.reason in ("parse", "renderability")])
    return GenerationReport(
        total=total,
        emitted=len(samples),
        rejected=len(rejects),
        renderable_rate=renderable / total if total else 0.0,
        by_reason=by_reason,
        rejects=[r.to_record() for r in rejects],
    )


def _first_duplicate(ordered: list[Transition]) -> str | None:
    for a, b in zip(ordered, ordered[1:]):
        if a.id == b.id:
            return a.id
    return None


def _write_jsonl_atomic(path: Path, records) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            for record in records:
                fh.write(json.dumps(record, ensure_ascii=False, sort_keys=True) + "\n")
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise
