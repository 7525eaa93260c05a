"""Release gate: nine end-to-end checks, one printed verdict line each.

Each test covers one numbered criterion and prints ``criterion NN PASS|FAIL``
straight to the terminal (bypassing capture) so a full run reads as a
checklist.  The checks are oracle- and arithmetic-based: reference tallies,
hand-enumerated fixtures, and brute-force reimplementations from
``oracles.py``, never outputs recycled from the code under test.
"""

import itertools
import json
import os
import random
import re
import time
from contextlib import contextmanager
from pathlib import Path

import pytest
from click.testing import CliRunner
from fastapi.testclient import TestClient
from PIL import Image

import oracles
from conftest import RICH_PAGE, write_png
from guiwm.actions import CanonicalAction, action_prompt_text, parse_action
from guiwm.analysis import correlations, fit_power_law, pareto_frontier
from guiwm.benchbuild import (
    Decision,
    DedupCluster,
    DedupConfig,
    action_signature,
    apply_adjudication,
    find_duplicate_clusters,
    write_clusters,
)
from guiwm.cli import main as cli_main
from guiwm.datagen import PipelineConfig, generate_dataset
from guiwm.evaluate import (
    BenchmarkConfig,
    ParseFail,
    WMOutput,
    aggregate_iacc,
    format_wm_output,
    parse_wm_output,
    reports_equal,
    run_benchmark,
)
from guiwm.gateway import FallbackEmbedder, Gateway, ModelEndpoint, ScriptedRule
from guiwm.policysim import PolicyEvalConfig, PolicySample, run_policy_eval
from guiwm.render import BuiltinEngine, RenderPool, Viewport
from guiwm.review import create_app
from guiwm.trajectory import Episode, StateImage, Transition, to_transitions, write_transitions


@pytest.fixture
def criterion(capfd):
    """One ``criterion NN PASS|FAIL`` line on the real terminal per check."""

    def emit(num: int, desc: str, passed: bool) -> None:
        state = "PASS" if passed else "FAIL"
        with capfd.disabled():
            print(f"criterion {num:02d} {state} {desc}", flush=True)

    @contextmanager
    def track(num: int, desc: str):
        try:
            yield
        except BaseException:
            emit(num, desc, False)
            raise
        emit(num, desc, True)

    return track


def _mock(endpoint_id: str, rules=(), default=None) -> ModelEndpoint:
    return ModelEndpoint(
        id=endpoint_id, model_name="scripted", kind="mock", rules=tuple(rules), default_response=default
    )


# -- 1: corpus arithmetic ---------------------------------------------------

# Episode/step tallies of the four source corpora the training mix is drawn
# from; unrolling must land on transitions == steps - episodes for each.
CORPUS_TALLIES = (
    ("gui_odyssey", 8_334, 119_559, 111_225),
    ("android_control", 14_501, 73_968, 59_467),
    ("aitw", 707_186, 4_232_911, 3_525_725),
    ("amex", 3_046, 35_661, 32_615),
)
CORPUS_TOTALS = (733_067, 4_462_099, 3_729_032)


def test_corpus_unrolling_reproduces_reference_tallies(criterion):
    with criterion(1, "episode unrolling reproduces the reference corpus tallies"):
        started = time.monotonic()
        img = StateImage("state.png", 1080, 2400)
        act = CanonicalAction(kind="click", point=(500, 500))
        totals = [0, 0, 0]
        for label, n_episodes, n_steps, expected in CORPUS_TALLIES:
            q, r = divmod(n_steps, n_episodes)
            # Step payloads are immutable, so episodes of equal length can
            # share one tuple; ids still differ per episode.
            steps_by_len = {
                k: tuple((img, act) for _ in range(k - 1)) + ((img, None),)
                for k in (q, q + 1)
            }
            steps_seen = transitions = 0
            for i in range(n_episodes):
                k = q + 1 if i < r else q
                episode = Episode(
                    episode_id=f"{label}-{i:07d}",
                    app="app",
                    goal="goal",
                    lang="en",
                    steps=steps_by_len[k],
                )
                steps_seen += episode.num_steps
                transitions += len(to_transitions(episode))
            assert steps_seen == n_steps
            assert transitions == n_steps - n_episodes == expected
            totals[0] += n_episodes
            totals[1] += steps_seen
            totals[2] += transitions
        assert tuple(totals) == CORPUS_TOTALS
        assert time.monotonic() - started < 60.0


# -- 2: end-to-end mock pipeline --------------------------------------------

GOOD_HTML = "<html><body><p>Inbox refreshed.</p></body></html>"
RELABEL = json.dumps({"reasoning": "a list of conversations", "html": GOOD_HTML})


def test_mock_pipeline_emits_identical_sample_sets(tmp_path, criterion):
    with criterion(2, "mock pipeline emits 9 renderable samples, byte-identical across runs"):
        started = time.monotonic()
        transitions = []
        for e in range(3):
            steps = []
            for s in range(4):
                shot = write_png(tmp_path / f"ep{e}s{s}.png", 64, 128, (120 + 10 * e, 140, 160))
                action = CanonicalAction(kind="click", point=(100 * (s + 1) + e, 300)) if s < 3 else None
                steps.append((shot, action))
            episode = Episode(
                episode_id=f"ep{e}", app="mail", goal="archive everything", lang="en", steps=tuple(steps)
            )
            transitions.extend(to_transitions(episode))
        assert len(transitions) == 9
        random.Random(5).shuffle(transitions)

        gateway = Gateway(
            {
                "gen": _mock(
                    "gen",
                    rules=[ScriptedRule(response=RELABEL, pattern="expert mobile UI developer")],
                    default="the tapped row opens and the list advances",
                )
            }
        )
        emitted = []
        for run in ("one", "two"):
            out = tmp_path / run / "sft.jsonl"
            report = generate_dataset(
                transitions, gateway, PipelineConfig(endpoint_id="gen"), tmp_path / run / "work", out
            )
            assert (report.total, report.emitted, report.rejected) == (9, 9, 0)
            assert report.renderable_rate == 1.0
            emitted.append(out.read_bytes())
        assert emitted[0] == emitted[1]

        ids = [json.loads(line)["transition_id"] for line in emitted[0].decode().splitlines()]
        assert len(ids) == 9
        assert ids == sorted(ids)
        assert time.monotonic() - started < 120.0


# -- 3: judge aggregation ---------------------------------------------------


def test_judge_panel_aggregation_is_closed_form(criterion):
    with criterion(3, "judge aggregation matches the mean/zero rule on every panel outcome"):
        for combo in itertools.product(("success", "failure"), repeat=3):
            statuses = list(combo)
            assert aggregate_iacc(statuses, render_failed=False) == combo.count("success") / 3
            assert aggregate_iacc(statuses, render_failed=False) == oracles.iacc_mean(statuses)
            assert aggregate_iacc(statuses, render_failed=True) == 0.0
        assert aggregate_iacc([], render_failed=True) == 0.0
        with pytest.raises(ValueError):
            aggregate_iacc([], render_failed=False)


# -- 4: render harness ------------------------------------------------------


def _orphan_browsers() -> list[str]:
    me = str(os.getpid())
    orphans = []
    for proc in Path("/proc").iterdir():
        if not proc.name.isdigit() or proc.name == me:
            continue
        try:
            stat = (proc / "stat").read_text()
        except OSError:
            continue
        comm = stat[stat.index("(") + 1 : stat.rindex(")")]
        ppid = stat[stat.rindex(")") + 2 :].split()[1]
        if ppid == me and any(t in comm.lower() for t in ("chrom", "firefox", "webkit", "headless")):
            orphans.append(comm)
    return orphans


def test_render_pool_throughput_and_classification(tmp_path, criterion):
    with criterion(4, "render pool sustains >= 3 docs/sec and classifies failure modes"):
        docs = [(f"doc{i:03d}", RICH_PAGE) for i in range(98)]
        docs.append(("ghost", '<html><body><p style="color:#ffffff">ghost</p></body></html>'))
        docs.append(("prose", "no markup at all, just prose"))
        with RenderPool(BuiltinEngine(), tmp_path / "shots", workers=4, viewport=Viewport(360, 640)) as pool:
            started = time.monotonic()
            results = pool.render_batch(docs)
            elapsed = time.monotonic() - started
        counts: dict[str, int] = {}
        for result in results:
            counts[result.verdict] = counts.get(result.verdict, 0) + 1
        assert counts == {"ok": 98, "blank_render": 1, "parse_fail": 1}
        assert elapsed < len(docs) / 3.0
        assert _orphan_browsers() == []


# -- 5: duplicate discovery vs. brute force ---------------------------------

DEDUP_ACTION = CanonicalAction(kind="click", point=(500, 500))
DEDUP_SIGNATURE = action_signature(DEDUP_ACTION)
# Pixel-flip counts chosen so pair similarity (roughly 1 - flips/1024)
# straddles every threshold under test.
FLIP_CHOICES = (0, 1, 2, 5, 12, 40, 80, 150)


def _noise_pixels(rng) -> list[int]:
    return [rng.randrange(256) for _ in range(1024)]


def _perturbed(rng, base: list[int], flips: int) -> list[int]:
    px = list(base)
    for _ in range(flips):
        px[rng.randrange(1024)] = rng.randrange(256)
    return px


def _save_gray(path: Path, px: list[int]) -> StateImage:
    path.parent.mkdir(parents=True, exist_ok=True)
    img = Image.new("L", (32, 32))
    img.putdata(px)
    img.convert("RGB").save(path)
    return StateImage(str(path), 32, 32)


def _pixel_rows(px: list[int]) -> list[list[tuple[int, int, int]]]:
    return [[(v, v, v) for v in px[y * 32 : (y + 1) * 32]] for y in range(32)]


def _planted_case(case_dir: Path, case: int):
    rng = random.Random(9_000 + case)
    transitions, oracle_items = [], []

    def add(px0, px1):
        tid = f"c{case:02d}t{len(transitions):03d}"
        transitions.append(
            Transition(
                id=tid,
                episode_id=tid,
                step_index=0,
                app="mail",
                goal="g",
                lang="en",
                s_t=_save_gray(case_dir / f"{tid}-a.png", px0),
                action=DEDUP_ACTION,
                s_t1=_save_gray(case_dir / f"{tid}-b.png", px1),
            )
        )
        oracle_items.append(
            (
                tid,
                "mail",
                DEDUP_SIGNATURE,
                oracles.grid_embedding(_pixel_rows(px0)),
                oracles.grid_embedding(_pixel_rows(px1)),
            )
        )

    for _ in range(rng.randint(2, 4)):  # planted near-duplicate families
        base0, base1 = _noise_pixels(rng), _noise_pixels(rng)
        for _ in range(rng.randint(2, 4)):
            add(
                _perturbed(rng, base0, rng.choice(FLIP_CHOICES)),
                _perturbed(rng, base1, rng.choice(FLIP_CHOICES)),
            )
    for _ in range(rng.randint(2, 5)):  # unrelated singletons
        add(_noise_pixels(rng), _noise_pixels(rng))
    return transitions, oracle_items


def _check_adjudication_arithmetic(transitions, embedder):
    clusters = find_duplicate_clusters(transitions, embedder, DedupConfig(tau=0.99))
    decisions, expected_removed, collapsed, distinct = [], 0, 0, 0
    for i, cluster in enumerate(clusters):
        if i % 3 == 2:
            continue  # leave every third cluster pending
        mark = "duplicates" if i % 3 == 0 else "distinct"
        decisions.append(Decision(cluster_id=cluster.cluster_id, decision=mark))
        if mark == "duplicates":
            expected_removed += len(cluster.members) - 1
            collapsed += 1
        else:
            distinct += 1
    kept, stats = apply_adjudication(transitions, clusters, decisions)
    assert stats.total == len(transitions)
    assert stats.removed == expected_removed
    assert stats.kept == len(kept) == len(transitions) - expected_removed
    assert stats.clusters_total == len(clusters)
    assert (stats.clusters_collapsed, stats.clusters_distinct) == (collapsed, distinct)
    assert stats.clusters_pending == len(clusters) - collapsed - distinct


def test_duplicate_discovery_matches_bruteforce_oracle(tmp_path, criterion):
    with criterion(5, "duplicate discovery matches the brute-force oracle on 50 random corpora"):
        embedder = FallbackEmbedder()
        linked_components = 0
        for case in range(50):
            transitions, items = _planted_case(tmp_path / f"case{case:02d}", case)
            assert len(transitions) <= 200
            for tau in (0.9, 0.99, 0.997):
                clusters = find_duplicate_clusters(transitions, embedder, DedupConfig(tau=tau))
                assert {frozenset(c.members) for c in clusters} == oracles.duplicate_components(items, tau)
                linked_components += len(clusters)
            _check_adjudication_arithmetic(transitions, embedder)
        assert linked_components > 50  # the corpora genuinely exercise linking


# -- 6: policy simulation ---------------------------------------------------

GT_POLICY = CanonicalAction(kind="click", point=(500, 301))
ALT_TAP = parse_action({"action_type": "TAP", "x": 200, "y": 80})
ALT_SCROLL = parse_action({"action_type": "SCROLL", "direction": "down"})
CANDIDATE_TEXTS = tuple(action_prompt_text(a) for a in (GT_POLICY, ALT_TAP, ALT_SCROLL))
ALT_REPLY = (
    '{1: {Reason: "reveals more of the list", Action: {"action_type": "TAP", "x": 200, "y": 80}},\n'
    ' 2: {Reason: "scrolls further down", Action: {"action_type": "SCROLL", "direction": "down"}}}'
)

# Per-sample (judgement, confidence) for candidates [ground truth, tap, scroll].
# Planned outcomes: samples 0-2, 6, 8, 9 recover the ground truth (0.6 overall)
# while exercising argmax-over-valid (1, 8), an exact tie (2), and the
# all-invalid fallback (3).
NO_WM_VERDICTS = {
    0: (("valid", 0.9), ("valid", 0.5), ("valid", 0.1)),
    1: (("valid", 0.8), ("invalid", 0.95), ("valid", 0.3)),
    2: (("valid", 0.7), ("valid", 0.7), ("valid", 0.2)),
    3: (("invalid", 0.2), ("invalid", 0.6), ("invalid", 0.4)),
    4: (("valid", 0.4), ("valid", 0.9), ("valid", 0.2)),
    5: (("invalid", 0.9), ("valid", 0.3), ("valid", 0.2)),
    6: (("valid", 0.85), ("valid", 0.3), ("valid", 0.1)),
    7: (("valid", 0.6), ("valid", 0.2), ("valid", 0.95)),
    8: (("valid", 0.75), ("valid", 0.2), ("invalid", 0.99)),
    9: (("valid", 0.9), ("invalid", 0.1), ("valid", 0.35)),
}
NO_WM_EXPECTED = [0, 0, 0, 1, 1, 1, 0, 2, 0, 0]

WITH_WM_VERDICTS = {
    **{i: (("valid", 0.9), ("valid", 0.4), ("valid", 0.2)) for i in range(7)},
    7: (("valid", 0.3), ("valid", 0.8), ("valid", 0.1)),
    8: (("invalid", 0.5), ("valid", 0.2), ("valid", 0.6)),
    9: (("invalid", 0.3), ("invalid", 0.7), ("invalid", 0.1)),
}


def _policy_samples(tmp_path) -> list[PolicySample]:
    samples = []
    for i in range(10):
        shot = write_png(tmp_path / f"s{i:02d}.png", 64, 128, (118 + i, 140, 160))
        samples.append(
            PolicySample(
                id=f"s{i:02d}",
                image=shot,
                goal=f"policy goal s{i:02d}",
                gt_action=GT_POLICY,
                history=("opened mail",),
            )
        )
    return samples


def _value_rules(matrix, scale: float = 1.0) -> list[ScriptedRule]:
    rules = []
    for i, verdicts in matrix.items():
        for text, (judgement, confidence) in zip(CANDIDATE_TEXTS, verdicts):
            rules.append(
                ScriptedRule(
                    response=json.dumps(
                        {"judgement": judgement, "confidence": confidence * scale, "reason": "scripted"}
                    ),
                    pattern=rf"policy goal s{i:02d}\b.*The action being evaluated: {re.escape(text)}\n",
                )
            )
    return rules


def test_policy_modes_reach_planned_accuracy(tmp_path, criterion):
    with criterion(6, "policy modes land exactly on the scripted accuracies"):
        samples = _policy_samples(tmp_path)
        alt = _mock("alt", default=ALT_REPLY)

        selector = _mock(
            "sel",
            rules=[
                ScriptedRule(
                    response=f"Reason: scripted pick.\nBest: {1 if i < 7 else 2}",
                    pattern=rf"policy goal s{i:02d}\b",
                )
                for i in range(10)
            ],
        )
        gateway = Gateway({"alt": alt, "sel": selector})
        oracle_run = run_policy_eval(
            samples, gateway, PolicyEvalConfig(mode="oracle", alt_endpoint="alt", selector_endpoint="sel")
        )
        assert (oracle_run.n, oracle_run.accuracy) == (10, 0.7)

        for scale, label in ((1.0, "base"), (0.5, "rescaled")):
            gateway = Gateway(
                {"alt": alt, "value-now": _mock("value-now", rules=_value_rules(NO_WM_VERDICTS, scale))}
            )
            run = run_policy_eval(
                samples,
                gateway,
                PolicyEvalConfig(mode="value_no_wm", alt_endpoint="alt", value_endpoint="value-now"),
            )
            assert run.accuracy == 0.6, label
            assert [row["selected"] for row in run.rows] == NO_WM_EXPECTED, label

        wm = _mock(
            "wm",
            rules=[
                ScriptedRule(response=f"Next State Reasoning: the view advances\n\nHTML: {RICH_PAGE}", pattern=pat)
                for pat in ('"x": 500,', '"x": 200,', '"direction": "down"')
            ],
        )
        gateway = Gateway(
            {"alt": alt, "wm": wm, "value-wm": _mock("value-wm", rules=_value_rules(WITH_WM_VERDICTS))}
        )
        with RenderPool(BuiltinEngine(), tmp_path / "rollouts", workers=4, viewport=Viewport(360, 640)) as pool:
            with_wm = run_policy_eval(
                samples,
                gateway,
                PolicyEvalConfig(
                    mode="value_with_wm", alt_endpoint="alt", value_endpoint="value-wm", wm_endpoint="wm"
                ),
                pool,
            )
        assert with_wm.accuracy == 0.7


# -- 7: analysis ------------------------------------------------------------


def test_analysis_matches_reference_oracles(criterion):
    with criterion(7, "curve fits, correlations, and the frontier match reference oracles"):
        xs = [1.0, 2.0, 4.0, 8.0, 16.0]
        ys = [3.7 * x**0.42 for x in xs]
        fit = fit_power_law(xs, ys)
        assert abs(fit.a - 3.7) < 1e-9
        assert abs(fit.b - 0.42) < 1e-9
        assert abs(fit.r2_log - 1.0) < 1e-12
        oracle_a, oracle_b = oracles.power_law(xs, ys)
        assert abs(fit.a - oracle_a) < 1e-9
        assert abs(fit.b - oracle_b) < 1e-9

        rng = random.Random(97)
        for decimals in (None, 1):  # second pass forces ties
            sx = [rng.uniform(0.1, 50.0) for _ in range(50)]
            sy = [rng.uniform(0.1, 50.0) for _ in range(50)]
            if decimals is not None:
                sx = [round(v, decimals) for v in sx]
                sy = [round(v, decimals) for v in sy]
            res = correlations(sx, sy)
            assert abs(res.pearson - oracles.pearson(sx, sy)) < 1e-12
            assert abs(res.spearman - oracles.spearman(sx, sy)) < 1e-12
            assert abs(res.kendall_tau_b - oracles.kendall_tau_b(sx, sy)) < 1e-12

        assert pareto_frontier([(8, 74.9), (32, 79.6), (106, 67.4)]) == [(8, 74.9), (32, 79.6)]


# -- 8: reply format round-trip ---------------------------------------------

WORDS = (
    "inbox", "refreshes", "after", "the", "tap", "list",
    "scrolls", "row", "opens", "compose", "draft", "saved",
)


def _random_reasoning(rng) -> str:
    lines = []
    for _ in range(rng.randint(1, 3)):
        words = [rng.choice(WORDS) for _ in range(rng.randint(1, 6))]
        if rng.random() < 0.3:
            # A mid-line marker mention is legal; only line-initial splits.
            words.insert(rng.randrange(1, len(words) + 1), "HTML:")
        lines.append(" ".join(words))
    return "\n".join(lines)


def test_reply_format_round_trips(criterion):
    with criterion(8, "reply format/parse round-trip holds on 1,000 random cases"):
        rng = random.Random(41)
        for _ in range(1000):
            body = " ".join(rng.choice(WORDS) for _ in range(rng.randint(1, 8)))
            case = WMOutput(reasoning=_random_reasoning(rng), html=f"<html><body><p>{body}</p></body></html>")
            assert parse_wm_output(format_wm_output(case)) == case

        fenced = "```\nNext State Reasoning: a quiet screen\n\nHTML: <html><body><p>hi</p></body></html>\n```"
        assert parse_wm_output(fenced).html.startswith("<html>")
        with pytest.raises(ParseFail):
            parse_wm_output("neither marker nor markup, just chat")
        tricky = (
            "Next State Reasoning: the footer says HTML: is plain text here\n\n"
            "HTML: <html><body><p>x</p></body></html>"
        )
        assert parse_wm_output(tricky).reasoning == "the footer says HTML: is plain text here"


# -- 9: benchmark arithmetic and determinism --------------------------------


def test_benchmark_arithmetic_and_determinism(tmp_path, transition_factory, criterion):
    with criterion(9, "benchmark lands on the hand-derived aggregates, reproducibly"):
        transitions = [
            transition_factory(action=CanonicalAction(kind="click", point=(101 + i, 300))) for i in range(4)
        ]
        wm = _mock(
            "wm",
            rules=[
                ScriptedRule(response=f"Next State Reasoning: pane updates\n\nHTML: {RICH_PAGE}", pattern=f'"x": {x},')
                for x in (101, 102, 103)
            ]
            + [ScriptedRule(response="rambling with no structure at all", pattern='"x": 104,')],
        )

        def judge(endpoint_id: str, by_x: dict[int, str]) -> ModelEndpoint:
            return _mock(
                endpoint_id,
                rules=[
                    ScriptedRule(
                        response=json.dumps({"Thoughts": "scripted", "Status": status}),
                        pattern=f'"x": {x},',
                    )
                    for x, status in by_x.items()
                ],
            )

        gateway = Gateway(
            {
                "wm": wm,
                "j1": judge("j1", {101: "success", 102: "success", 103: "failure"}),
                "j2": judge("j2", {101: "success", 102: "success", 103: "failure"}),
                "j3": judge("j3", {101: "success", 102: "failure", 103: "failure"}),
            }
        )
        config = BenchmarkConfig(
            wm_endpoint="wm",
            judge_endpoints=("j1", "j2", "j3"),
            provider_ids=("fallback",),
            name="mock-bench",
            workers=4,
        )
        reports = []
        for sub in ("one", "two"):
            with RenderPool(BuiltinEngine(), tmp_path / sub, workers=4, viewport=Viewport(360, 640)) as pool:
                reports.append(
                    run_benchmark(transitions, gateway, pool, config, providers={"fallback": FallbackEmbedder()})
                )

        aggregates = reports[0].data["aggregates"]
        # Panels: 3/3, 2/3, 0/3 successes, plus one parse failure -> mean 5/12.
        assert aggregates["n"] == 4
        assert abs(aggregates["iacc_pct"] - 500 / 12) < 1e-9
        assert aggregates["render_fail_pct"] == 25.0
        assert reports_equal(*reports)


# -- 10: review decision round-trip -----------------------------------------


def test_review_decisions_match_the_cli_path(tmp_path, transition_factory, criterion):
    with criterion(10, "review API decisions produce the same curated output as the CLI"):
        transitions = [transition_factory() for _ in range(12)]
        corpus = tmp_path / "transitions.jsonl"
        write_transitions(transitions, corpus)
        ids = [t.id for t in transitions]
        grouping = [ids[0:3], ids[3:5], ids[5:7], ids[7:9], ids[9:11]]  # ids[11] unclustered
        clusters = [
            DedupCluster(
                cluster_id=f"cl{i}",
                app="mail",
                signature=DEDUP_SIGNATURE,
                members=tuple(sorted(members)),
                evidence=(),
            )
            for i, members in enumerate(grouping)
        ]
        clusters_path = tmp_path / "clusters.jsonl"
        write_clusters(clusters, clusters_path)

        # (decision, explicit representative or None for the default)
        script = [
            ("duplicates", sorted(grouping[0])[1]),
            ("duplicates", None),
            ("distinct", None),
            ("duplicates", sorted(grouping[3])[1]),
            ("distinct", None),
        ]

        api_decisions = tmp_path / "api-decisions.jsonl"
        client = TestClient(create_app(clusters_path, api_decisions))
        for cluster, (mark, representative) in zip(clusters, script):
            body = {"decision": mark, "annotator": "reviewer"}
            if representative is not None:
                body["representative"] = representative
            response = client.post(f"/api/clusters/{cluster.cluster_id}/decision", json=body)
            assert response.status_code == 200, response.text

        # An invalid representative is rejected and appends nothing.
        lines_before = api_decisions.read_text().splitlines()
        bad = client.post(
            "/api/clusters/cl0/decision",
            json={"decision": "duplicates", "representative": ids[11], "annotator": "reviewer"},
        )
        assert bad.status_code == 422
        assert api_decisions.read_text().splitlines() == lines_before

        cli_decisions = tmp_path / "cli-decisions.jsonl"
        runner = CliRunner()
        for cluster, (mark, representative) in zip(clusters, script):
            args = [
                "bench", "decide",
                "--clusters", str(clusters_path),
                "--decisions", str(cli_decisions),
                "--cluster", cluster.cluster_id,
                "--mark", mark,
                "--annotator", "reviewer",
            ]
            if representative is not None:
                args += ["--representative", representative]
            result = runner.invoke(cli_main, args, catch_exceptions=False)
            assert result.exit_code == 0, result.output

        outputs = []
        for label, decisions_path in (("api", api_decisions), ("cli", cli_decisions)):
            out = tmp_path / f"kept-{label}.jsonl"
            result = runner.invoke(
                cli_main,
                [
                    "bench", "apply",
                    "--in", str(corpus),
                    "--clusters", str(clusters_path),
                    "--decisions", str(decisions_path),
                    "--out", str(out),
                ],
                catch_exceptions=False,
            )
            assert result.exit_code == 0, result.output
            assert "8/12 transitions kept (4 removed)" in result.output
            outputs.append(out.read_bytes())
        assert outputs[0] == outputs[1]
