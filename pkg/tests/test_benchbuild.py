"""Duplicate discovery against a brute-force oracle, adjudication, sampling."""

import hashlib
import json
import math
import random

import pytest

import oracles
from guiwm.actions import CanonicalAction
from guiwm.benchbuild import (
    AdjudicationStats,
    Decision,
    DedupCluster,
    DedupConfig,
    InvalidRepresentative,
    UnknownCluster,
    action_signature,
    append_decision,
    apply_adjudication,
    find_duplicate_clusters,
    read_clusters,
    read_decisions,
    resolve_decisions,
    sample_split,
    write_clusters,
)
from guiwm.gateway.embeddings import TableEmbedder
from guiwm.trajectory import StateImage, Transition


def bare_transition(tid, app="mail", action=None, before="b.png", after="a.png"):
    return Transition(
        id=tid,
        episode_id="ep",
        step_index=0,
        app=app,
        goal="g",
        lang="en",
        s_t=StateImage(before, 4, 4),
        action=action or CanonicalAction(kind="click", point=(100, 100)),
        s_t1=StateImage(after, 4, 4),
    )


# -- action signatures -----------------------------------------------------


def test_signature_buckets_nearby_taps_together():
    near = action_signature(CanonicalAction(kind="click", point=(505, 310)))
    assert action_signature(CanonicalAction(kind="click", point=(500, 301))) == near == "click:p10,6"
    far = action_signature(CanonicalAction(kind="click", point=(900, 301)))
    assert far != near


def test_signature_cell_arithmetic():
    assert action_signature(CanonicalAction(kind="click", point=(0, 0))) == "click:p0,0"
    assert action_signature(CanonicalAction(kind="click", point=(49, 50))) == "click:p0,1"
    # The grid maximum folds into the last cell instead of a 21st one.
    assert action_signature(CanonicalAction(kind="click", point=(1000, 999))) == "click:p19,19"


def test_signature_cell_matches_span_of_fifty():
    rng = random.Random(7)
    for _ in range(200):
        v = rng.randint(0, 1000)
        sig = action_signature(CanonicalAction(kind="click", point=(v, 0)))
        assert sig == f"click:p{min(19, v // 50)},0"


def test_signature_covers_distinguishing_fields():
    assert action_signature(CanonicalAction(kind="scroll_direction", direction="up")) == "scroll_direction:dup"
    assert action_signature(CanonicalAction(kind="type_text", text="hi")) == "type_text:t1"
    assert action_signature(CanonicalAction(kind="type_text", text="")) == "type_text:t0"
    assert action_signature(CanonicalAction(kind="open_app", app_name="Gmail")) == "open_app:aGmail"
    swipe = action_signature(CanonicalAction(kind="swipe", point=(100, 800), end_point=(100, 200)))
    assert swipe == "swipe:p2,16:e2,4"


def test_dedup_config_validation():
    with pytest.raises(ValueError, match="tau"):
        DedupConfig(tau=0.0)
    with pytest.raises(ValueError, match="tau"):
        DedupConfig(tau=1.2)
    DedupConfig(tau=1.0)


# -- randomized corpora against the oracle ---------------------------------

_FAMILY_ANGLES = (0.0, 0.5, 1.0, 1.5)


def planted_corpus(rng, size):
    """Transitions plus planted unit vectors with structure at several taus.

    Angles cluster around family centers with jitter, so links within a
    family depend on tau while cross-family links never form.
    """
    actions = [
        CanonicalAction(kind="click", point=(100, 100)),
        CanonicalAction(kind="click", point=(900, 900)),
        CanonicalAction(kind="scroll_direction", direction="up"),
    ]
    items = []
    transitions = []
    vectors = {}
    for i in range(size):
        tid = f"t{i:03d}"
        app = rng.choice(["mail", "maps"])
        action = rng.choice(actions)
        family = rng.choice(_FAMILY_ANGLES)
        angle_b = family + rng.uniform(-0.05, 0.05)
        after_family = family if rng.random() >= 0.2 else rng.choice(_FAMILY_ANGLES)
        angle_a = after_family + rng.uniform(-0.05, 0.05)
        vec_b = [math.cos(angle_b), math.sin(angle_b)]
        vec_a = [math.cos(angle_a), math.sin(angle_a)]
        before, after = f"{tid}-b.png", f"{tid}-a.png"
        vectors[before] = vec_b
        vectors[after] = vec_a
        transitions.append(bare_transition(tid, app=app, action=action, before=before, after=after))
        items.append((tid, app, action_signature(action), vec_b, vec_a))
    return transitions, TableEmbedder("planted", vectors), items


@pytest.mark.parametrize("tau", [0.9, 0.99, 0.997])
def test_clusters_match_brute_force_oracle(tau):
    rng = random.Random(hash(tau) & 0xFFFF)
    for round_no in range(12):
        transitions, provider, items = planted_corpus(rng, rng.randint(6, 40))
        clusters = find_duplicate_clusters(transitions, provider, DedupConfig(tau=tau))
        got = {frozenset(c.members) for c in clusters}
        expected = oracles.duplicate_components(items, tau)
        assert got == expected, f"round {round_no} tau {tau}"
        for cluster in clusters:
            assert list(cluster.members) == sorted(cluster.members)
            assert cluster.cluster_id == "c" + hashlib.sha256(
                ";".join(cluster.members).encode()
            ).hexdigest()[:12]
            for a, b, sim_t, sim_t1 in cluster.evidence:
                assert a in cluster.members and b in cluster.members
                assert sim_t > tau and sim_t1 > tau


def test_cluster_ids_stable_across_runs():
    rng = random.Random(41)
    transitions, provider, _ = planted_corpus(rng, 30)
    first = find_duplicate_clusters(transitions, provider, DedupConfig(tau=0.99))
    second = find_duplicate_clusters(list(reversed(transitions)), provider, DedupConfig(tau=0.99))
    assert [c.cluster_id for c in first] == [c.cluster_id for c in second]
    assert [c.members for c in first] == [c.members for c in second]


def _pair(q_before, q_after):
    """Two one-group transitions; p's vectors are the [1, 0] axis."""
    vectors = {
        "p-b.png": [1.0, 0.0],
        "q-b.png": q_before,
        "p-a.png": [1.0, 0.0],
        "q-a.png": q_after,
    }
    transitions = [
        bare_transition("p", before="p-b.png", after="p-a.png"),
        bare_transition("q", before="q-b.png", after="q-a.png"),
    ]
    return transitions, TableEmbedder("exact", vectors)


def test_threshold_is_strictly_above_on_both_sides():
    # [1, 1] normalizes to (1/sqrt2, 1/sqrt2), whose dot with [1, 0] is
    # exactly the IEEE value of 1/sqrt(2); a tau of that value therefore
    # sits exactly on the similarity, where strict comparison excludes.
    boundary = 1 / math.sqrt(2)
    transitions, provider = _pair([1.0, 0.0], [1.0, 1.0])
    assert find_duplicate_clusters(transitions, provider, DedupConfig(tau=boundary)) == []
    assert len(find_duplicate_clusters(transitions, provider, DedupConfig(tau=0.707))) == 1

    transitions, provider = _pair([1.0, 1.0], [1.0, 0.0])
    assert find_duplicate_clusters(transitions, provider, DedupConfig(tau=boundary)) == []

    # High similarity on one side alone never links.
    transitions, provider = _pair([1.0, 0.0], [0.0, 1.0])
    assert find_duplicate_clusters(transitions, provider, DedupConfig(tau=0.9)) == []


def test_groups_isolate_apps_and_signatures():
    vectors = {name: [1.0, 0.0] for name in ("x-b.png", "x-a.png", "y-b.png", "y-a.png")}
    provider = TableEmbedder("same", vectors)
    across_apps = [
        bare_transition("x", app="mail", before="x-b.png", after="x-a.png"),
        bare_transition("y", app="maps", before="y-b.png", after="y-a.png"),
    ]
    assert find_duplicate_clusters(across_apps, provider, DedupConfig(tau=0.9)) == []

    across_signatures = [
        bare_transition("x", action=CanonicalAction(kind="click", point=(100, 100)),
                        before="x-b.png", after="x-a.png"),
        bare_transition("y", action=CanonicalAction(kind="click", point=(900, 900)),
                        before="y-b.png", after="y-a.png"),
    ]
    assert find_duplicate_clusters(across_signatures, provider, DedupConfig(tau=0.9)) == []


def test_transitive_component_with_evidence():
    # before: all identical; after: A~B and B~C link, A~C falls short.
    tau = math.cos(0.08)
    angles = {"ta": 0.0, "tb": 0.06, "tc": 0.12}
    vectors = {}
    transitions = []
    for tid, angle in angles.items():
        vectors[f"{tid}-b.png"] = [1.0, 0.0]
        vectors[f"{tid}-a.png"] = [math.cos(angle), math.sin(angle)]
        transitions.append(bare_transition(tid, before=f"{tid}-b.png", after=f"{tid}-a.png"))
    clusters = find_duplicate_clusters(transitions, TableEmbedder("tri", vectors), DedupConfig(tau=tau))
    assert len(clusters) == 1
    cluster = clusters[0]
    assert cluster.members == ("ta", "tb", "tc")
    linked = {(a, b) for a, b, _, _ in cluster.evidence}
    assert linked == {("ta", "tb"), ("tb", "tc")}
    for a, b, sim_t, sim_t1 in cluster.evidence:
        expected = oracles.cosine(vectors[f"{a}-a.png"], vectors[f"{b}-a.png"])
        assert sim_t == pytest.approx(1.0, abs=1e-12)
        assert sim_t1 == pytest.approx(expected, abs=1e-12)
    assert cluster.member_details["ta"]["s_t"] == "ta-b.png"
    assert cluster.member_details["tb"]["goal"] == "g"


def test_clusters_round_trip_through_jsonl(tmp_path):
    rng = random.Random(17)
    transitions, provider, _ = planted_corpus(rng, 25)
    clusters = find_duplicate_clusters(transitions, provider, DedupConfig(tau=0.99))
    assert clusters, "seed produced no clusters; pick another"
    path = tmp_path / "clusters.jsonl"
    assert write_clusters(clusters, path) == len(clusters)
    loaded = read_clusters(path)
    assert [c.to_record() for c in loaded] == [c.to_record() for c in clusters]


# -- adjudication ----------------------------------------------------------


def toy_cluster(cluster_id, members):
    return DedupCluster(
        cluster_id=cluster_id,
        app="mail",
        signature="click:p2,2",
        members=tuple(sorted(members)),
        evidence=(),
    )


def test_append_decision_validates_before_writing(tmp_path):
    path = tmp_path / "decisions.jsonl"
    clusters = [toy_cluster("c1", ["t1", "t2"])]
    with pytest.raises(UnknownCluster):
        append_decision(path, Decision("nope", "duplicates"), clusters)
    assert not path.exists()
    with pytest.raises(InvalidRepresentative):
        append_decision(path, Decision("c1", "duplicates", representative="t9"), clusters)
    assert not path.exists()

    written = append_decision(path, Decision("c1", "duplicates", representative="t2"), clusters)
    assert written.timestamp is not None
    assert len(path.read_text().splitlines()) == 1


def test_decision_record_round_trip_and_validation(tmp_path):
    with pytest.raises(ValueError, match="decision"):
        Decision("c1", "sort-of")
    decision = Decision("c1", "distinct", annotator="web", timestamp="2026-01-01T00:00:00+00:00")
    assert Decision.from_record(decision.to_record()) == decision

    path = tmp_path / "d.jsonl"
    append_decision(path, decision, [toy_cluster("c1", ["t1", "t2"])])
    assert read_decisions(path) == [decision]
    assert read_decisions(tmp_path / "absent.jsonl") == []


def test_resolve_takes_the_latest_line():
    first = Decision("c1", "duplicates", timestamp="t0")
    second = Decision("c1", "distinct", timestamp="t1")
    other = Decision("c2", "duplicates", timestamp="t0")
    resolved = resolve_decisions([first, other, second])
    assert resolved["c1"] is second
    assert resolved["c2"] is other


def test_apply_adjudication_drops_non_representatives():
    transitions = [bare_transition(f"t{i}") for i in range(1, 8)]
    clusters = [
        toy_cluster("c1", ["t1", "t2", "t3"]),
        toy_cluster("c2", ["t4", "t5"]),
        toy_cluster("c3", ["t6", "t7"]),
    ]
    decisions = [
        Decision("c1", "duplicates", representative="t2"),
        Decision("c2", "distinct"),
        # c3 left pending
    ]
    kept, stats = apply_adjudication(transitions, clusters, decisions)
    assert [t.id for t in kept] == ["t2", "t4", "t5", "t6", "t7"]
    assert stats == AdjudicationStats(
        total=7, kept=5, removed=2, clusters_total=3,
        clusters_collapsed=1, clusters_distinct=1, clusters_pending=1,
    )
    assert "5/7 transitions kept (2 removed)" in stats.summary_line()


def test_apply_adjudication_defaults_to_lowest_member_id():
    transitions = [bare_transition(t) for t in ("t9", "t2", "t5")]
    clusters = [toy_cluster("c1", ["t9", "t2", "t5"])]
    kept, _ = apply_adjudication(transitions, clusters, [Decision("c1", "duplicates")])
    assert [t.id for t in kept] == ["t2"]  # input order preserved, min id kept


def test_apply_adjudication_last_decision_wins():
    transitions = [bare_transition(t) for t in ("t1", "t2")]
    clusters = [toy_cluster("c1", ["t1", "t2"])]
    decisions = [Decision("c1", "duplicates"), Decision("c1", "distinct")]
    kept, stats = apply_adjudication(transitions, clusters, decisions)
    assert len(kept) == 2
    assert (stats.clusters_collapsed, stats.clusters_distinct) == (0, 1)


def test_apply_adjudication_rejects_stale_decisions():
    transitions = [bare_transition("t1")]
    with pytest.raises(UnknownCluster):
        apply_adjudication(transitions, [], [Decision("ghost", "duplicates")])


# -- sampling --------------------------------------------------------------


def test_sample_split_is_order_insensitive_and_sorted():
    transitions = [bare_transition(f"t{i:02d}") for i in range(30)]
    rng = random.Random(3)
    shuffled = transitions[:]
    rng.shuffle(shuffled)
    a = sample_split(transitions, 10, seed=7)
    b = sample_split(shuffled, 10, seed=7)
    assert [t.id for t in a] == [t.id for t in b]
    assert [t.id for t in a] == sorted(t.id for t in a)
    assert len({t.id for t in a}) == 10


def test_sample_split_seed_changes_selection():
    transitions = [bare_transition(f"t{i:02d}") for i in range(30)]
    assert [t.id for t in sample_split(transitions, 5, seed=0)] != [
        t.id for t in sample_split(transitions, 5, seed=1)
    ]


def test_sample_split_bounds():
    transitions = [bare_transition(f"t{i}") for i in range(3)]
    assert [t.id for t in sample_split(transitions, 3, seed=0)] == sorted(t.id for t in transitions)
    assert sample_split(transitions, 0, seed=0) == []
    with pytest.raises(ValueError, match="cannot sample"):
        sample_split(transitions, 4, seed=0)
    with pytest.raises(ValueError, match=">= 0"):
        sample_split(transitions, -1, seed=0)
