"""Benchmark runner: predict, render, judge, score, report.

One report JSON captures everything: config snapshot, per-sample rows
(sorted by transition id), and aggregates recomputed from those rows, so
the report-level score always equals the mean of its own sample rows.
Screenshot paths inside the report are relative to the output directory,
and wall-clock facts live under "created_at"/"timing" only; two runs over
the same inputs therefore produce equal reports under ``reports_equal``,
which compares everything else.
"""

from __future__ import annotations

import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from ..gateway import ChatRequest, Gateway, ImagePart, TextPart
from ..prompts import build_next_state
from ..render import RenderPool, RenderResult, Viewport
from ..trajectory import StateImage, Transition
from .judging import JudgeVerdict, aggregate_iacc, judge_once
from .parse import ParseFail, parse_wm_output
from .similarity import state_similarity

__all__ = [
    "SCHEMA_VERSION",
    "BenchmarkConfig",
    "Prediction",
    "BenchmarkReport",
    "predict_next_state",
    "run_benchmark",
    "reports_equal",
    "write_table",
]

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class BenchmarkConfig:
    wm_endpoint: str
    judge_endpoints: tuple[str, ...]
    provider_ids: tuple[str, ...] = ("fallback",)
    name: str = "benchmark"
    workers: int = 4
    allow_fallback: bool = False
    max_output_tokens: int = 8192

    def __post_init__(self) -> None:
        if not self.judge_endpoints:
            raise ValueError("at least one judge endpoint is required")
        object.__setattr__(self, "judge_endpoints", tuple(self.judge_endpoints))
        object.__setattr__(self, "provider_ids", tuple(self.provider_ids))

    def to_record(self) -> dict:
        return {
            "wm_endpoint": self.wm_endpoint,
            "judge_endpoints": list(self.judge_endpoints),
            "provider_ids": list(self.provider_ids),
            "name": self.name,
            "workers": self.workers,
            "allow_fallback": self.allow_fallback,
            "max_output_tokens": self.max_output_tokens,
        }


@dataclass(frozen=True)
class Prediction:
    """A predictor reply taken through parse + render."""

    transition_id: str
    raw: str
    reasoning: str | None
    html: str | None
    render: RenderResult | None  # None when parsing failed

    @property
    def render_failed(self) -> bool:
        return self.render is None or not self.render.ok

    @property
    def verdict(self) -> str:
        return "parse_fail" if self.render is None else self.render.verdict

    @property
    def screenshot(self) -> StateImage | None:
        return self.render.screenshot if self.render is not None else None


def predict_next_state(
    gateway: Gateway,
    pool: RenderPool,
    wm_endpoint: str,
    transition: Transition,
    max_output_tokens: int = 8192,
) -> Prediction:
    """Ask the predictor for S_{t+1} given (S_t, A_t) and render the reply.

    The render viewport is the ground-truth next screenshot's dimensions,
    so the prediction and the target are compared at the same size.
    """
    request = ChatRequest(
        (TextPart(build_next_state(transition.action)), ImagePart(transition.s_t.image_ref)),
        max_output_tokens=max_output_tokens,
    )
    raw = gateway.chat(wm_endpoint, request)
    try:
        output = parse_wm_output(raw)
    except ParseFail:
        return Prediction(transition.id, raw, None, None, None)
    viewport = Viewport(transition.s_t1.width_px, transition.s_t1.height_px)
    render = pool.render(output.html, viewport=viewport, name=transition.id)
    return Prediction(transition.id, raw, output.reasoning, output.html, render)


@dataclass
class BenchmarkReport:
    data: dict = field(default_factory=dict)

    def save(self, path: str | Path) -> None:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        Path(path).write_text(
            json.dumps(self.data, indent=2, sort_keys=True, ensure_ascii=False) + "\n", encoding="utf-8"
        )

    @classmethod
    def load(cls, path: str | Path) -> "BenchmarkReport":
        return cls(json.loads(Path(path).read_text(encoding="utf-8")))

    @property
    def aggregates(self) -> dict:
        return self.data["aggregates"]

    @property
    def samples(self) -> list[dict]:
        return self.data["samples"]


def _evaluate_one(
    gateway: Gateway,
    pool: RenderPool,
    providers,
    config: BenchmarkConfig,
    transition: Transition,
) -> dict:
    prediction = predict_next_state(gateway, pool, config.wm_endpoint, transition, config.max_output_tokens)
    verdicts: list[JudgeVerdict] = []
    if not prediction.render_failed:
        shot = prediction.screenshot
        assert shot is not None
        for judge_id in config.judge_endpoints:
            verdicts.append(judge_once(gateway, judge_id, transition.s_t, shot, transition.action))
    iacc = aggregate_iacc([v.status for v in verdicts], prediction.render_failed)
    similarity = None
    if not prediction.render_failed and providers is not None:
        similarity = state_similarity(
            prediction.screenshot,
            transition.s_t1,
            providers,
            list(config.provider_ids),
            allow_fallback=config.allow_fallback,
        )
    row = {
        "id": transition.id,
        "app": transition.app,
        "verdict": prediction.verdict,
        "render_failed": prediction.render_failed,
        "iacc": iacc,
        "judges": {
            v.judge_id: {"status": v.status, "thoughts": v.thoughts, "parse_flag": v.parse_flag}
            for v in verdicts
        },
        "similarity": similarity.to_record() if similarity is not None else None,
        "screenshot": (
            _relative_to(prediction.screenshot.image_ref, pool.out_dir)
            if prediction.screenshot is not None
            else None
        ),
    }
    return row


def _relative_to(path: str, root: Path) -> str:
    try:
        return str(Path(path).relative_to(root))
    except ValueError:
        return str(path)


def run_benchmark(
    transitions: list[Transition],
    gateway: Gateway,
    pool: RenderPool,
    config: BenchmarkConfig,
    providers=None,
) -> BenchmarkReport:
    started = time.perf_counter()
    ordered = sorted(transitions, key=lambda t: t.id)
    with ThreadPoolExecutor(max_workers=config.workers) as executor:
        futures = [
            executor.submit(_evaluate_one, gateway, pool, providers, config, t) for t in ordered
        ]
        rows = [f.result() for f in futures]

    n = len(rows)
    aggregates: dict = {"n": n}
    if n:
        aggregates["iacc_pct"] = 100.0 * sum(r["iacc"] for r in rows) / n
        aggregates["render_fail_pct"] = 100.0 * sum(1 for r in rows if r["render_failed"]) / n
        sims = [r["similarity"]["mean"] for r in rows if r["similarity"] is not None]
        aggregates["similarity_pct"] = 100.0 * sum(sims) / len(sims) if sims else None
        by_provider: dict[str, float] = {}
        for pid in config.provider_ids:
            vals = [
                r["similarity"]["per_provider"][pid]
                for r in rows
                if r["similarity"] is not None and pid in r["similarity"]["per_provider"]
            ]
            by_provider[pid] = 100.0 * sum(vals) / len(vals) if vals else None
        aggregates["similarity_by_provider"] = by_provider
        by_judge: dict[str, float] = {}
        for judge_id in config.judge_endpoints:
            # Render failures count as failure for every judge on the panel.
            score = sum(
                1.0
                for r in rows
                if not r["render_failed"] and r["judges"].get(judge_id, {}).get("status") == "success"
            )
            by_judge[judge_id] = 100.0 * score / n
        aggregates["iacc_by_judge"] = by_judge
        aggregates["judge_parse_flag_count"] = sum(
            1 for r in rows for v in r["judges"].values() if v["parse_flag"]
        )

    report = BenchmarkReport(
        {
            "schema_version": SCHEMA_VERSION,
            "benchmark": config.name,
            "created_at": datetime.now(timezone.utc).isoformat(),
            "config": config.to_record(),
            "aggregates": aggregates,
            "samples": rows,
            "timing": {"wall_s": time.perf_counter() - started},
        }
    )
    return report


_VOLATILE_KEYS = ("created_at", "timing")


def reports_equal(a: BenchmarkReport, b: BenchmarkReport) -> bool:
    """Equality over everything that is supposed to be reproducible."""

    def stripped(report: BenchmarkReport) -> dict:
        data = dict(report.data)
        for key in _VOLATILE_KEYS:
            data.pop(key, None)
        return data

    return stripped(a) == stripped(b)


def write_table(report: BenchmarkReport) -> str:
    """Fixed-width summary table for terminals and logs."""
    agg = report.data.get("aggregates", {})
    name = report.data.get("benchmark", "benchmark")
    sim = agg.get("similarity_pct")
    lines = [
        f"{'Benchmark':<24}{'N':>6}{'IAcc %':>10}{'Render Fail %':>16}{'Similarity %':>15}",
        f"{name:<24}{agg.get('n', 0):>6}"
        f"{agg.get('iacc_pct', 0.0):>10.2f}"
        f"{agg.get('render_fail_pct', 0.0):>16.2f}"
        + (f"{sim:>15.2f}" if sim is not None else f"{'-':>15}"),
    ]
    by_judge = agg.get("iacc_by_judge") or {}
    for judge_id in sorted(by_judge):
        value = by_judge[judge_id]
        lines.append(f"  judge {judge_id:<16}{'':>6}{value:>10.2f}")
    return "\n".join(lines)
