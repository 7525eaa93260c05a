"""Command line entry points.

Every report-producing command writes delimited output (CSV or JSONL) and,
where a chart makes sense, a PNG figure next to it, so results can be both
diffed and eyeballed.
"""

from __future__ import annotations

import csv
import dataclasses
import json
from pathlib import Path

import click

from . import __version__
from .analysis import (
    correlations,
    fit_power_law,
    gain_analysis,
    pareto_frontier,
    plots,
)
from .benchbuild import (
    Decision,
    DedupConfig,
    InvalidRepresentative,
    UnknownCluster,
    append_decision,
    apply_adjudication,
    find_duplicate_clusters,
    read_clusters,
    read_decisions,
    sample_split,
    write_clusters,
)
from .datagen import PipelineConfig, generate_dataset
from .evaluate import BenchmarkConfig, run_benchmark, write_table
from .gateway import Gateway, build_providers, load_config
from .policysim import MODES, PolicyEvalConfig, read_policy_samples, run_policy_eval
from .render import BrowserUnavailable, BuiltinEngine, ChromiumEngine, RenderPool, Viewport
from .render.cdp import find_browser
from .trajectory import read_transitions, write_transitions


def _gateway(config_path: str) -> tuple:
    cfg = load_config(config_path)
    return cfg, Gateway(cfg.endpoints, cache_dir=cfg.cache_dir)


def _engine(name: str):
    if name == "builtin":
        return BuiltinEngine()
    try:
        return ChromiumEngine(find_browser())
    except BrowserUnavailable as exc:
        raise click.ClickException(str(exc)) from exc


def _read_csv(path: str, required: tuple[str, ...]) -> list[dict]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        missing = set(required) - set(reader.fieldnames or [])
        if missing:
            raise click.ClickException(f"{path}: missing columns {sorted(missing)}")
        return list(reader)


def _write_csv(path: Path, fieldnames: list[str], rows: list[dict]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=fieldnames)
        writer.writeheader()
        writer.writerows(rows)


def _write_json(path: Path, payload) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")


@click.group()
@click.version_option(__version__, prog_name="guiwm")
def main() -> None:
    """GUI world model toolkit: training data, rendering, evaluation, curation."""


@main.command()
@click.option("--transitions", "transitions_path", required=True, type=click.Path(exists=True), help="Transition triplets, JSONL.")
@click.option("--config", "config_path", required=True, type=click.Path(exists=True), help="Endpoint config, YAML.")
@click.option("--endpoint", required=True, help="Chat endpoint id used for relabeling and reasoning.")
@click.option("--strategy", default="ours", show_default=True, type=click.Choice(["ours", "naive-state", "naive-reasoning"]))
@click.option("--workdir", required=True, type=click.Path(), help="Scratch dir for annotated screenshots.")
@click.option("--out", "out_path", required=True, type=click.Path(), help="Training samples, JSONL.")
@click.option("--report", "report_path", type=click.Path(), help="Generation report, JSON.")
@click.option("--workers", default=4, show_default=True)
@click.option("--max-output-tokens", default=8192, show_default=True)
def datagen(transitions_path, config_path, endpoint, strategy, workdir, out_path, report_path, workers, max_output_tokens):
    """Build supervised training samples from transition triplets."""
    cfg, gateway = _gateway(config_path)
    if endpoint not in cfg.endpoints:
        raise click.ClickException(f"endpoint {endpoint!r} not in {config_path}")
    transitions = read_transitions(transitions_path)
    pipeline = PipelineConfig(
        endpoint_id=endpoint, strategy=strategy, workers=workers, max_output_tokens=max_output_tokens
    )
    with gateway:
        report = generate_dataset(transitions, gateway, pipeline, workdir, out_path, report_path)
    click.echo(report.summary_line())


@main.command()
@click.option("--in", "in_path", required=True, type=click.Path(exists=True), help='JSONL of {"name", "html"}.')
@click.option("--out", "out_dir", required=True, type=click.Path(), help="Directory for PNG screenshots.")
@click.option("--viewport", default="1080x2400", show_default=True, help="WIDTHxHEIGHT, optional @SCALE.")
@click.option("--workers", default=4, show_default=True)
@click.option("--engine", "engine_name", default="builtin", show_default=True, type=click.Choice(["builtin", "chromium"]))
@click.option("--results", "results_path", type=click.Path(), help="Per-document verdicts, JSONL.")
def render(in_path, out_dir, viewport, workers, engine_name, results_path):
    """Render HTML documents to screenshots."""
    items = []
    with open(in_path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            record = json.loads(line)
            items.append((record["name"], record["html"]))
    vp = Viewport.parse(viewport)
    with RenderPool(_engine(engine_name), out_dir, workers=workers, viewport=vp) as pool:
        results = pool.render_batch(items)
    rows = []
    counts: dict[str, int] = {}
    for (name, _), result in zip(items, results):
        counts[result.verdict] = counts.get(result.verdict, 0) + 1
        rows.append(
            {
                "name": name,
                "verdict": result.verdict,
                "elapsed_s": round(result.elapsed_s, 4),
                "detail": result.detail,
                "screenshot": result.screenshot.image_ref if result.screenshot else None,
            }
        )
    if results_path:
        Path(results_path).parent.mkdir(parents=True, exist_ok=True)
        with open(results_path, "w", encoding="utf-8") as fh:
            for row in rows:
                fh.write(json.dumps(row, sort_keys=True) + "\n")
    summary = ", ".join(f"{k}={v}" for k, v in sorted(counts.items()))
    click.echo(f"{len(items)} documents: {summary or 'none'}")


@main.command("eval")
@click.option("--bench", "bench_path", required=True, type=click.Path(exists=True), help="Benchmark transitions, JSONL.")
@click.option("--config", "config_path", required=True, type=click.Path(exists=True))
@click.option("--wm", "wm_endpoint", required=True, help="Next-state model endpoint id.")
@click.option("--judges", required=True, help="Comma-separated judge endpoint ids.")
@click.option("--providers", "provider_ids", default="fallback", show_default=True, help="Comma-separated embedding provider ids.")
@click.option("--out", "out_path", required=True, type=click.Path(), help="Report, JSON.")
@click.option("--shots-dir", default="shots", show_default=True, type=click.Path())
@click.option("--workers", default=4, show_default=True)
@click.option("--engine", "engine_name", default="builtin", show_default=True, type=click.Choice(["builtin", "chromium"]))
@click.option("--table", "table_path", type=click.Path(), help="Also write a fixed-width text table.")
@click.option("--allow-fallback", is_flag=True, help="Substitute the deterministic embedder when a provider is down.")
@click.option("--name", default="benchmark", show_default=True)
@click.option("--max-output-tokens", default=8192, show_default=True)
def eval_cmd(bench_path, config_path, wm_endpoint, judges, provider_ids, out_path, shots_dir, workers, engine_name, table_path, allow_fallback, name, max_output_tokens):
    """Score predicted next states with a judge panel and embedding similarity."""
    cfg, gateway = _gateway(config_path)
    transitions = read_transitions(bench_path)
    judge_ids = tuple(j.strip() for j in judges.split(",") if j.strip())
    pids = tuple(p.strip() for p in provider_ids.split(",") if p.strip())
    providers = build_providers(cfg.providers, cache_dir=cfg.cache_dir)
    bench_cfg = BenchmarkConfig(
        wm_endpoint=wm_endpoint,
        judge_endpoints=judge_ids,
        provider_ids=pids,
        name=name,
        workers=workers,
        allow_fallback=allow_fallback,
        max_output_tokens=max_output_tokens,
    )
    with gateway, RenderPool(_engine(engine_name), shots_dir, workers=workers) as pool:
        report = run_benchmark(transitions, gateway, pool, bench_cfg, providers)
    report.save(out_path)
    if table_path:
        Path(table_path).parent.mkdir(parents=True, exist_ok=True)
        Path(table_path).write_text(write_table(report), encoding="utf-8")
    agg = report.data["aggregates"]
    sim = agg["similarity_pct"]
    sim_txt = f"{sim:.2f}%" if sim is not None else "n/a"
    click.echo(
        f"n={agg['n']} iacc={agg['iacc_pct']:.2f}% render_fail={agg['render_fail_pct']:.2f}% similarity={sim_txt}"
    )


@main.group()
def bench() -> None:
    """Benchmark curation: duplicate discovery, adjudication, splits."""


@bench.command()
@click.option("--in", "in_path", required=True, type=click.Path(exists=True))
@click.option("--config", "config_path", type=click.Path(exists=True), help="Needed only for non-fallback providers.")
@click.option("--tau", default=0.997, show_default=True, help="Similarity threshold; a pair links only if both sides exceed it.")
@click.option("--provider", default="fallback", show_default=True)
@click.option("--clusters", "clusters_path", required=True, type=click.Path())
def dedup(in_path, config_path, tau, provider, clusters_path):
    """Find near-duplicate transition clusters."""
    specs, cache_dir = {}, None
    if config_path:
        cfg = load_config(config_path)
        specs, cache_dir = cfg.providers, cfg.cache_dir
    providers = build_providers(specs, cache_dir=cache_dir)
    if provider not in providers:
        raise click.ClickException(f"unknown provider {provider!r}; have {sorted(providers)}")
    transitions = read_transitions(in_path)
    clusters = find_duplicate_clusters(transitions, providers[provider], DedupConfig(tau=tau, provider_id=provider))
    write_clusters(clusters, clusters_path)
    flagged = sum(len(c.members) for c in clusters)
    click.echo(f"{len(clusters)} clusters covering {flagged} of {len(transitions)} transitions")


@bench.command()
@click.option("--clusters", "clusters_path", required=True, type=click.Path(exists=True))
@click.option("--decisions", "decisions_path", required=True, type=click.Path())
@click.option("--cluster", "cluster_id", required=True)
@click.option("--mark", required=True, type=click.Choice(["duplicates", "distinct"]))
@click.option("--representative", help="Member to keep; defaults to the lowest id.")
@click.option("--annotator", default="cli", show_default=True)
def decide(clusters_path, decisions_path, cluster_id, mark, representative, annotator):
    """Record one adjudication decision (append-only; latest wins)."""
    clusters = read_clusters(clusters_path)
    decision = Decision(cluster_id=cluster_id, decision=mark, representative=representative, annotator=annotator)
    try:
        written = append_decision(decisions_path, decision, clusters)
    except (UnknownCluster, InvalidRepresentative) as exc:
        raise click.ClickException(str(exc)) from exc
    kept = written.representative or "lowest member id"
    click.echo(f"{cluster_id}: {mark}" + (f" (keep {kept})" if mark == "duplicates" else ""))


@bench.command("apply")
@click.option("--in", "in_path", required=True, type=click.Path(exists=True))
@click.option("--clusters", "clusters_path", required=True, type=click.Path(exists=True))
@click.option("--decisions", "decisions_path", required=True, type=click.Path(exists=True))
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--schema", default="kapps", show_default=True, type=click.Choice(["kapps", "m3a"]))
def apply_cmd(in_path, clusters_path, decisions_path, out_path, schema):
    """Drop adjudicated duplicates, keeping one representative per cluster."""
    transitions = read_transitions(in_path)
    clusters = read_clusters(clusters_path)
    decisions = read_decisions(decisions_path)
    try:
        kept, stats = apply_adjudication(transitions, clusters, decisions)
    except (UnknownCluster, InvalidRepresentative) as exc:
        raise click.ClickException(str(exc)) from exc
    write_transitions(kept, out_path, action_schema=schema)
    click.echo(stats.summary_line())


@bench.command()
@click.option("--in", "in_path", required=True, type=click.Path(exists=True))
@click.option("--n", required=True, type=int)
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--schema", default="kapps", show_default=True, type=click.Choice(["kapps", "m3a"]))
def sample(in_path, n, seed, out_path, schema):
    """Draw a deterministic evaluation split."""
    transitions = read_transitions(in_path)
    if n > len(transitions):
        raise click.ClickException(f"asked for {n} of {len(transitions)} transitions")
    chosen = sample_split(transitions, n, seed)
    write_transitions(chosen, out_path, action_schema=schema)
    click.echo(f"{len(chosen)} transitions -> {out_path}")


@main.command("policy-eval")
@click.option("--samples", "samples_path", required=True, type=click.Path(exists=True))
@click.option("--config", "config_path", required=True, type=click.Path(exists=True))
@click.option("--mode", required=True, type=click.Choice(list(MODES)))
@click.option("--alt-endpoint", required=True, help="Endpoint that proposes alternative actions.")
@click.option("--selector-endpoint", help="Oracle mode: endpoint that picks the best candidate.")
@click.option("--value-endpoint", help="Value modes: endpoint that scores each candidate.")
@click.option("--wm-endpoint", help="value_with_wm: endpoint that predicts the next state.")
@click.option("--k", default=3, show_default=True, help="Candidates per step, ground truth included.")
@click.option("--workers", default=4, show_default=True)
@click.option("--out", "out_path", type=click.Path(), help="Per-sample rows, JSONL.")
@click.option("--shots-dir", default="rollouts", show_default=True, type=click.Path())
@click.option("--engine", "engine_name", default="builtin", show_default=True, type=click.Choice(["builtin", "chromium"]))
def policy_eval(samples_path, config_path, mode, alt_endpoint, selector_endpoint, value_endpoint, wm_endpoint, k, workers, out_path, shots_dir, engine_name):
    """Measure how often a selection policy recovers the suggested action."""
    cfg, gateway = _gateway(config_path)
    samples = read_policy_samples(samples_path)
    try:
        policy_cfg = PolicyEvalConfig(
            mode=mode,
            alt_endpoint=alt_endpoint,
            selector_endpoint=selector_endpoint,
            value_endpoint=value_endpoint,
            wm_endpoint=wm_endpoint,
            k=k,
            workers=workers,
        )
    except ValueError as exc:
        raise click.ClickException(str(exc)) from exc
    if mode == "value_with_wm":
        with gateway, RenderPool(_engine(engine_name), shots_dir, workers=workers) as pool:
            result = run_policy_eval(samples, gateway, policy_cfg, pool)
    else:
        with gateway:
            result = run_policy_eval(samples, gateway, policy_cfg)
    if out_path:
        result.save_rows(out_path)
    click.echo(f"mode={result.mode} n={result.n} accuracy={result.accuracy:.4f}")


@main.group()
def analyze() -> None:
    """Fits and figures over evaluation results."""


@analyze.command()
@click.option("--in", "in_path", required=True, type=click.Path(exists=True), help="CSV with series,x,y columns.")
@click.option("--out-dir", required=True, type=click.Path())
def scaling(in_path, out_dir):
    """Fit y = a*x^b per series and plot on log-log axes."""
    rows = _read_csv(in_path, ("series", "x", "y"))
    grouped: dict[str, tuple[list[float], list[float]]] = {}
    for row in rows:
        xs, ys = grouped.setdefault(row["series"], ([], []))
        xs.append(float(row["x"]))
        ys.append(float(row["y"]))
    out = Path(out_dir)
    fits = {}
    series = {}
    for label in sorted(grouped):
        xs, ys = grouped[label]
        try:
            fit = fit_power_law(xs, ys)
        except ValueError as exc:
            raise click.ClickException(f"series {label!r}: {exc}") from exc
        fits[label] = fit
        series[label] = (xs, ys, fit)
    _write_csv(
        out / "scaling.csv",
        ["series", "a", "b", "r2_log", "r2_linear", "n"],
        [{"series": label, **fit.to_record()} for label, fit in fits.items()],
    )
    _write_json(out / "scaling.json", {label: fit.to_record() for label, fit in fits.items()})
    plots.scaling_figure(series, out / "scaling.png")
    for label, fit in fits.items():
        click.echo(f"{label}: y = {fit.a:.4g} * x^{fit.b:.4f} (log-space R2 {fit.r2_log:.4f}, n={fit.n})")


@analyze.command()
@click.option("--in", "in_path", required=True, type=click.Path(exists=True), help="CSV with baseline,improved columns.")
@click.option("--out-dir", required=True, type=click.Path())
def gains(in_path, out_dir):
    """Improvement over baseline relative to the 1 - baseline ceiling."""
    rows = _read_csv(in_path, ("baseline", "improved"))
    baseline = [float(r["baseline"]) for r in rows]
    improved = [float(r["improved"]) for r in rows]
    try:
        summary = gain_analysis(baseline, improved)
    except ValueError as exc:
        raise click.ClickException(str(exc)) from exc
    out = Path(out_dir)
    _write_csv(
        out / "gains.csv",
        ["baseline", "improved", "gain", "ceiling", "fraction_of_ceiling"],
        [dataclasses.asdict(p) for p in summary.points],
    )
    record = dataclasses.asdict(summary)
    record["points"] = [dataclasses.asdict(p) for p in summary.points]
    _write_json(out / "gains.json", record)
    plots.gains_figure(summary, out / "gains.png")
    frac = summary.mean_fraction_of_ceiling
    frac_txt = f"{frac:.4f}" if frac is not None else "n/a"
    click.echo(
        f"n={summary.n} mean_gain={summary.mean_gain:.4f} mean_fraction_of_ceiling={frac_txt}"
    )


@analyze.command()
@click.option("--in", "in_path", required=True, type=click.Path(exists=True), help="CSV with label,size,score columns.")
@click.option("--out-dir", required=True, type=click.Path())
def pareto(in_path, out_dir):
    """Keep configurations no other beats at equal or smaller size."""
    rows = _read_csv(in_path, ("label", "size", "score"))
    points = [(float(r["size"]), float(r["score"]), r["label"]) for r in rows]
    frontier = pareto_frontier([(s, v) for s, v, _ in points])
    on_frontier = set(frontier)
    out = Path(out_dir)
    _write_csv(
        out / "pareto.csv",
        ["label", "size", "score", "on_frontier"],
        [
            {"label": label, "size": size, "score": score, "on_frontier": (size, score) in on_frontier}
            for size, score, label in points
        ],
    )
    _write_json(out / "pareto.json", {"frontier": [list(p) for p in frontier]})
    plots.pareto_figure(points, frontier, out / "pareto.png")
    click.echo(f"{len(frontier)} of {len(points)} points on the frontier")


@analyze.command()
@click.option("--in", "in_path", required=True, type=click.Path(exists=True), help="CSV of metric columns, one row per sample.")
@click.option("--out-dir", required=True, type=click.Path())
def agreement(in_path, out_dir):
    """Pairwise rank agreement between metric columns."""
    with open(in_path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        names = list(reader.fieldnames or [])
        rows = list(reader)
    if len(names) < 2:
        raise click.ClickException("need at least two metric columns")
    columns = {name: [float(r[name]) for r in rows] for name in names}
    pairs = {}
    for i, a in enumerate(names):
        for b in names[i + 1 :]:
            pairs[(a, b)] = correlations(columns[a], columns[b])
    out = Path(out_dir)
    _write_csv(
        out / "agreement.csv",
        ["a", "b", "pearson", "spearman", "kendall_tau_b", "n"],
        [{"a": a, "b": b, **dataclasses.asdict(res)} for (a, b), res in pairs.items()],
    )
    _write_json(
        out / "agreement.json",
        {f"{a}|{b}": dataclasses.asdict(res) for (a, b), res in pairs.items()},
    )
    plots.agreement_figure(pairs, out / "agreement.png")
    for (a, b), res in pairs.items():
        tau = res.kendall_tau_b
        click.echo(f"{a} vs {b}: tau_b={tau:.4f}" if tau is not None else f"{a} vs {b}: degenerate")


@main.command()
@click.option("--clusters", "clusters_path", required=True, type=click.Path(exists=True))
@click.option("--decisions", "decisions_path", required=True, type=click.Path())
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8190, show_default=True, type=int)
@click.option("--assets", "assets_dir", type=click.Path(exists=True), help="Directory with a built review frontend.")
def review(clusters_path, decisions_path, host, port, assets_dir):
    """Serve the duplicate-cluster review UI and its JSON API."""
    import uvicorn

    from .review import create_app

    app = create_app(clusters_path, decisions_path, assets_dir=assets_dir)
    click.echo(f"review UI on http://{host}:{port}/")
    uvicorn.run(app, host=host, port=port, log_level="warning")


if __name__ == "__main__":
    main()
