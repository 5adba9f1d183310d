"""Command-line front end.

Subcommands: ingest, analyze, fit, figures, cluster, generations, report.
All stages share one run directory; the first stage records a manifest of
the effective configuration and every later stage refuses to touch
artifacts produced under a different one.  Flags can also be supplied via
``--config`` as a flat ``key = value`` file whose keys mirror the flag
names; command-line values win.

Exit codes: 0 success, 1 usage, 2 data error, 3 numeric non-convergence.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from . import corpus as corpus_mod
from . import evt
from . import graph as graph_mod
from . import temporal
from .artifacts import (
    RunManifest,
    read_column,
    read_table,
    verify_artifact_hash,
    write_json,
    write_table,
)
from .corpus import CleaningConfig, CorpusIndex, IngestReport
from .errors import ArtifactError, ConvergenceError, DataError, KeysenseError
from .pipeline import (
    CLUSTERS_SCHEMA,
    EDGES_SCHEMA,
    METRICS_HEADER,
    METRICS_SCHEMA,
    TMI_SCHEMA,
    AnalysisConfig,
    analyze_corpus,
)

FIT_FAMILIES = ("frechet", "paretoII")


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on usage errors; the contract here is 1."""

    def error(self, message):  # noqa: D102
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _scan_config_path(argv: list[str]) -> str | None:
    for i, arg in enumerate(argv):
        if arg == "--config" and i + 1 < len(argv):
            return argv[i + 1]
        if arg.startswith("--config="):
            return arg.split("=", 1)[1]
    return None


def _load_config_file(path: str) -> dict[str, str]:
    """Flat ``key = value`` lines; ``#`` starts a comment."""
    values: dict[str, str] = {}
    for line_no, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise DataError(f"{path}:{line_no}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        values[key.replace("_", "-")] = value
    return values


def build_parser(cfg: dict[str, str]) -> _Parser:
    parser = _Parser(prog="keysense", description=__doc__)
    parser.add_argument("--version", action="version", version=f"keysense {__version__}")

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat key=value config file mirroring these flags")
    common.add_argument("--out-dir", default=cfg.get("out-dir"),
                        required="out-dir" not in cfg, help="run directory for artifacts")
    common.add_argument("--year-from", type=int, default=cfg.get("year-from"))
    common.add_argument("--year-to", type=int, default=cfg.get("year-to"))
    common.add_argument("--tmi-mode", choices=("pointwise", "full-mi"),
                        default=cfg.get("tmi-mode", "pointwise"))
    common.add_argument("--damping", type=float, default=cfg.get("damping", 0.85))
    common.add_argument("--walk-steps", type=int, default=cfg.get("walk-steps", 4))
    common.add_argument("--weight-mode", choices=("count", "positive-pmi", "positivePMI"),
                        default=cfg.get("weight-mode", "positive-pmi"))
    common.add_argument("--seed", type=int, default=cfg.get("seed", 0))
    common.add_argument("--citation-window", type=int, default=cfg.get("citation-window", 3))
    common.add_argument("--blacklist-file", default=cfg.get("blacklist-file"))
    common.add_argument("--workers", type=int, default=cfg.get("workers", 1),
                        help="process fan-out; never affects results")

    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p_ingest = sub.add_parser("ingest", parents=[common], help="parse, clean, and index a corpus")
    p_ingest.add_argument("--input", default=cfg.get("input"), required="input" not in cfg,
                          help="JSONL or CSV record stream")
    p_ingest.add_argument("--format", choices=("jsonl", "csv"), default=cfg.get("format"))
    p_ingest.set_defaults(func=cmd_ingest)

    p_analyze = sub.add_parser("analyze", parents=[common], help="compute the per-sense metric table")
    p_analyze.set_defaults(func=cmd_analyze)

    p_fit = sub.add_parser("fit", parents=[common], help="fit a distribution to a metric column")
    p_fit.add_argument("--column", default=cfg.get("column"), required="column" not in cfg)
    p_fit.add_argument("--family", choices=FIT_FAMILIES, default=cfg.get("family"),
                       required="family" not in cfg)
    p_fit.add_argument("--bins", type=int, default=cfg.get("bins", 40))
    p_fit.set_defaults(func=cmd_fit)

    p_figures = sub.add_parser("figures", parents=[common], help="emit per-figure plot data")
    p_figures.set_defaults(func=cmd_figures)

    p_cluster = sub.add_parser("cluster", parents=[common], help="random-walk community detection")
    p_cluster.set_defaults(func=cmd_cluster)

    p_gen = sub.add_parser("generations", parents=[common], help="generation boundaries and cohorts")
    p_gen.set_defaults(func=cmd_generations)

    p_report = sub.add_parser("report", parents=[common], help="summarize the run directory")
    p_report.add_argument("--top", type=int, default=cfg.get("top", 30))
    p_report.set_defaults(func=cmd_report)

    return parser


# ---------------------------------------------------------------------------
# Shared run plumbing
# ---------------------------------------------------------------------------


def _analysis_config(args) -> AnalysisConfig:
    if args.blacklist_file:
        blacklist = CleaningConfig.with_blacklist_file(args.blacklist_file).blacklist
    else:
        blacklist = corpus_mod.DEFAULT_BLACKLIST
    return AnalysisConfig(
        blacklist=tuple(sorted(blacklist)),
        year_from=args.year_from,
        year_to=args.year_to,
        tmi_mode=args.tmi_mode,
        damping=args.damping,
        walk_steps=args.walk_steps,
        weight_mode="positive-pmi" if args.weight_mode == "positivePMI" else args.weight_mode,
        seed=args.seed,
        citation_window=args.citation_window,
    )


def _manifest_for(args, input_digest: str) -> RunManifest:
    return RunManifest(
        version=__version__,
        config=_analysis_config(args).manifest_config(),
        input_digest=input_digest,
    )


def _load_run(args) -> tuple[CorpusIndex, RunManifest]:
    out = Path(args.out_dir)
    manifest_path = out / "manifest.json"
    corpus_path = out / "corpus.json"
    if not manifest_path.exists() or not corpus_path.exists():
        raise ArtifactError(f"{out} holds no ingested corpus; run `keysense ingest` first")
    stored = RunManifest.from_json(manifest_path.read_text(encoding="utf-8"))
    payload_text = corpus_path.read_text(encoding="utf-8")
    if json.loads(payload_text).get("manifest_hash") != stored.hash:
        raise ArtifactError("corpus.json was produced under a different manifest")
    index = CorpusIndex.from_json(payload_text)
    if index.digest() != stored.input_digest:
        raise ArtifactError("corpus.json does not match the manifest input digest")
    expected = _manifest_for(args, index.digest())
    if expected.hash != stored.hash:
        diffs = sorted(
            key
            for key in set(expected.config) | set(stored.config)
            if expected.config.get(key) != stored.config.get(key)
        )
        raise ArtifactError(
            "flags disagree with the run manifest on: " + (", ".join(diffs) or "version")
        )
    return index, stored


def _timed(label: str, t0: float) -> float:
    t1 = time.perf_counter()
    print(f"[keysense] {label}: {t1 - t0:.3f}s", file=sys.stderr)
    return t1


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def cmd_ingest(args) -> int:
    cfg = _analysis_config(args)
    report = IngestReport()
    t0 = time.perf_counter()
    index = corpus_mod.ingest(args.input, cfg.cleaning(), fmt=args.format, report=report)
    manifest = _manifest_for(args, index.digest())
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "manifest.json").write_text(manifest.to_json(), encoding="utf-8")
    write_json(out / "corpus.json", json.loads(index.to_json()), manifest.hash)
    write_json(out / "ingest_report.json", dict(report.__dict__), manifest.hash)
    _timed("ingest", t0)
    print(
        f"ingested {report.documents_kept} documents, {report.concepts} concepts "
        f"({report.dropped_documents} dropped, {report.skipped_years} outside window) "
        f"-> {out}"
    )
    return 0


def cmd_analyze(args) -> int:
    index, manifest = _load_run(args)
    cfg = _analysis_config(args)
    out = Path(args.out_dir)
    t0 = time.perf_counter()
    result = analyze_corpus(index, cfg, workers=args.workers)
    t0 = _timed("analyze", t0)
    write_table(
        out / "metrics.csv",
        METRICS_HEADER,
        result.metric_rows,
        manifest.hash,
        METRICS_SCHEMA,
        meta={"tmi-mode": cfg.tmi_mode},
    )
    write_table(
        out / "edges.csv",
        ("sense_a", "sense_b", "cooc", "pmi"),
        result.edge_rows(),
        manifest.hash,
        EDGES_SCHEMA,
    )
    write_table(
        out / "tmi.csv",
        ("sense", "mode", "tmi", "per_year"),
        result.tmi_rows,
        manifest.hash,
        TMI_SCHEMA,
    )
    write_table(
        out / "clusters.csv",
        ("sense", "cluster"),
        result.cluster_rows(),
        manifest.hash,
        CLUSTERS_SCHEMA,
    )
    _timed("write", t0)
    print(
        f"analyzed {index.n_concepts} senses over {index.n_documents} documents; "
        f"{len(set(result.clusters.values()))} clusters, "
        f"{len(result.generation_table.spans)} generations -> {out}"
    )
    return 0


def cmd_fit(args) -> int:
    index, manifest = _load_run(args)
    out = Path(args.out_dir)
    metrics_path = out / "metrics.csv"
    if not metrics_path.exists():
        raise ArtifactError("metrics.csv missing; run `keysense analyze` first")
    meta, _ = read_table(metrics_path)
    verify_artifact_hash(metrics_path, manifest.hash, meta)
    values = np.asarray(read_column(metrics_path, args.column))

    excluded = int(np.sum(values <= 0)) if args.family == "frechet" else int(np.sum(values < 0))
    sample = values[values > 0] if args.family == "frechet" else values[values >= 0]
    t0 = time.perf_counter()
    fit = evt.fit_frechet(sample) if args.family == "frechet" else evt.fit_pareto2(sample)
    _timed(f"fit {args.family}", t0)

    payload = fit.to_dict()
    payload["column"] = args.column
    payload["excluded_values"] = excluded
    stem = f"fit_{args.column}_{args.family}"
    write_json(out / f"{stem}.json", payload, manifest.hash)

    positive = sample[sample > 0]
    lo, hi = float(positive.min()), float(positive.max())
    if lo == hi:
        hi = lo * (1.0 + 1e-9)
    edges = np.logspace(np.log10(lo), np.log10(hi), args.bins + 1)
    counts, _ = np.histogram(sample, bins=edges)
    widths = np.diff(edges)
    centers = np.sqrt(edges[:-1] * edges[1:])
    density = counts / (len(sample) * widths)
    if args.family == "frechet":
        pdf = evt.frechet_pdf(centers, fit.alpha, fit.beta)
    else:
        pdf = evt.lomax_pdf(centers, fit.alpha, fit.beta)
    write_table(
        out / f"{stem}_density.csv",
        ("bin_left", "bin_right", "center", "density", "fitted_pdf"),
        zip(edges[:-1], edges[1:], centers, density, pdf),
        manifest.hash,
        "fit-density-v1",
        meta={"family": args.family, "alpha": fit.alpha, "beta": fit.beta},
    )
    print(
        f"{args.family} fit of {args.column}: alpha={fit.alpha:.6g} beta={fit.beta:.6g} "
        f"ks={fit.ks_stat:.6g} n={fit.n}"
    )
    return 0


def _metric_columns(path: Path) -> dict[str, list]:
    meta, rows = read_table(path)
    columns: dict[str, list] = {name: [] for name in rows[0].keys()} if rows else {}
    for row in rows:
        for name, cell in row.items():
            columns[name].append(cell)
    return columns


FIGURES = (
    # name, x column, y column, model
    ("fig8_pagerank_tmi", "tmi", "pagerank", "linear"),
    ("fig3_citations_tmi", "tmi", "citations", "quadratic"),
    ("fig4_dim_transitivity", "transitivity", "dim", "inverse"),
    ("fig5_tmi_dim", "dim", "tmi", "loglogPower"),
    ("fig6_tmi_docs", "docs", "tmi", "loglogPower"),
    ("fig9_complexity_entropy", "h_norm", "complexity", None),
)


def _fit_figure_model(model: str | None, xs: list[float], ys: list[float]):
    if model is None or len(xs) < 4:
        return None
    if model == "inverse":
        inv = [1.0 / x for x in xs]
        fit = evt.regress("linear", inv, ys)
        return evt.RegressionResult("inverse", fit.coefficients, fit.r2, fit.p_value)
    return evt.regress(model, xs, ys)


def cmd_figures(args) -> int:
    index, manifest = _load_run(args)
    out = Path(args.out_dir)
    metrics_path = out / "metrics.csv"
    if not metrics_path.exists():
        raise ArtifactError("metrics.csv missing; run `keysense analyze` first")
    meta, rows = read_table(metrics_path)
    verify_artifact_hash(metrics_path, manifest.hash, meta)
    if not rows:
        raise ArtifactError("metrics.csv has no rows")

    regression_report: dict[str, dict] = {}
    for name, x_col, y_col, model in FIGURES:
        for col in (x_col, y_col):
            if col not in rows[0]:
                raise ArtifactError(f"metrics.csv lacks column {col!r} needed by {name}")
        xs, ys = [], []
        excluded = 0
        for row in rows:
            if row[x_col] == "" or row[y_col] == "":
                excluded += 1
                continue
            x, y = float(row[x_col]), float(row[y_col])
            if model == "inverse" and x == 0.0:
                excluded += 1
                continue
            if model == "loglogPower" and (x <= 0.0 or y <= 0.0):
                excluded += 1
                continue
            xs.append(x)
            ys.append(y)
        fit = _fit_figure_model(model, xs, ys)
        fig_meta: dict[str, object] = {"excluded": excluded}
        if fit is not None:
            fig_meta.update(
                model=fit.model,
                coefficients=json.dumps(list(fit.coefficients)),
                r2=fit.r2,
                p_value=fit.p_value,
            )
            regression_report[name] = dict(fit.to_dict(), x=x_col, y=y_col, n=len(xs))
        write_table(
            out / f"{name}.csv",
            (x_col, y_col),
            zip(xs, ys),
            manifest.hash,
            f"{name}-v1",
            meta=fig_meta,
        )

    boundaries = temporal.generation_boundaries(index)
    table = temporal.assign_generations(index, boundaries)
    plane = temporal.generation_plane(index, table)
    plane_rows = []
    for span in table.spans:
        mean = plane.means[span.generation]
        plane_rows.append(
            (
                span.generation,
                plane.sense_years[span.generation],
                None if mean is None else mean[1],
                None if mean is None else mean[0],
            )
        )
    write_table(
        out / "fig10_generation_means.csv",
        ("generation", "sense_years", "mean_h_norm", "mean_complexity"),
        plane_rows,
        manifest.hash,
        "fig10_generation_means-v1",
        meta={"skipped": plane.skipped},
    )
    write_json(out / "figures_fits.json", {"figures": regression_report}, manifest.hash)
    print(f"figure data written -> {out}")
    return 0


def cmd_cluster(args) -> int:
    index, manifest = _load_run(args)
    cfg = _analysis_config(args)
    out = Path(args.out_dir)
    sense_graph = graph_mod.build_graph(index)
    clusters = graph_mod.walktrap_clusters(
        sense_graph, steps=cfg.walk_steps, weight_mode=cfg.weight_mode, workers=args.workers
    )
    write_table(
        out / "edges.csv",
        ("sense_a", "sense_b", "cooc", "pmi"),
        [
            (a, b, sense_graph.edges[(a, b)], sense_graph.sim[(a, b)])
            for a, b in sorted(sense_graph.edges)
        ],
        manifest.hash,
        EDGES_SCHEMA,
    )
    write_table(
        out / "clusters.csv",
        ("sense", "cluster"),
        [(cid, clusters[cid]) for cid in sorted(clusters)],
        manifest.hash,
        CLUSTERS_SCHEMA,
    )
    print(f"{len(set(clusters.values()))} clusters over {len(clusters)} senses -> {out}")
    return 0


def cmd_generations(args) -> int:
    index, manifest = _load_run(args)
    out = Path(args.out_dir)
    boundaries = temporal.generation_boundaries(index)
    table = temporal.assign_generations(index, boundaries)
    write_table(
        out / "generations.csv",
        (
            "generation",
            "years",
            "total_senses",
            "new_senses",
            "percent_new",
            "mean_dim",
            "mean_h_norm",
            "mean_complexity",
        ),
        [
            (
                agg.generation,
                f"{agg.start}-{agg.end}",
                agg.total_senses,
                agg.new_senses,
                100.0 * agg.share_new,
                agg.mean_dim,
                agg.mean_h_norm,
                agg.mean_complexity,
            )
            for agg in table.aggregates
        ],
        manifest.hash,
        "generations-v1",
        meta={"boundaries": json.dumps(list(table.boundaries))},
    )
    plane = temporal.generation_plane(index, table)
    write_table(
        out / "generation_plane.csv",
        ("generation", "sense_years", "mean_complexity", "mean_h_norm"),
        [
            (
                gen,
                plane.sense_years[gen],
                None if plane.means[gen] is None else plane.means[gen][0],
                None if plane.means[gen] is None else plane.means[gen][1],
            )
            for gen in sorted(plane.sense_years)
        ],
        manifest.hash,
        "generation-plane-v1",
        meta={"skipped": plane.skipped},
    )
    core = temporal.core_senses(table, index)
    write_table(
        out / "core_senses.csv",
        ("sense", "label"),
        [(cid, index.label(cid)) for cid in sorted(core)],
        manifest.hash,
        "core-senses-v1",
    )
    strata = temporal.longevity_strata(table, index)
    write_table(
        out / "longevity.csv",
        ("generations_present", "senses", "mean_dim"),
        [(k, count, mean) for k, (count, mean) in strata.items()],
        manifest.hash,
        "longevity-v1",
    )
    print(
        f"{len(table.spans)} generations (boundaries {list(table.boundaries)}), "
        f"{len(core)} core senses -> {out}"
    )
    return 0


def cmd_report(args) -> int:
    index, manifest = _load_run(args)
    out = Path(args.out_dir)
    summary: dict = {
        "corpus": {
            "documents": index.n_documents,
            "concepts": index.n_concepts,
            "years": [index.years()[0], index.years()[-1]] if index.years() else [],
        }
    }
    ingest_path = out / "ingest_report.json"
    if ingest_path.exists():
        summary["ingest"] = json.loads(ingest_path.read_text(encoding="utf-8"))

    metrics_path = out / "metrics.csv"
    lines = [f"keysense report for {out}", f"manifest {manifest.hash[:12]}"]
    lines.append(
        f"corpus: {index.n_documents} documents, {index.n_concepts} concepts, "
        f"years {summary['corpus']['years']}"
    )
    if metrics_path.exists():
        meta, rows = read_table(metrics_path)
        verify_artifact_hash(metrics_path, manifest.hash, meta)
        ranked = sorted(rows, key=lambda r: -float(r["pagerank"]))[: args.top]
        summary["top_senses"] = [
            {
                "rank": i + 1,
                "label": row["label"],
                "pagerank": float(row["pagerank"]),
                "dim": int(row["dim"]),
            }
            for i, row in enumerate(ranked)
        ]
        clusters = {row["cluster"] for row in rows if row["cluster"] != ""}
        summary["clusters"] = len(clusters)
        lines.append(f"clusters: {len(clusters)}")
        lines.append("top senses by pagerank:")
        for entry in summary["top_senses"][:10]:
            lines.append(
                f"  {entry['rank']:>3}. {entry['label']} "
                f"(pagerank {entry['pagerank']:.3e}, dim {entry['dim']})"
            )

    fits = {}
    for fit_path in sorted(out.glob("fit_*.json")):
        payload = json.loads(fit_path.read_text(encoding="utf-8"))
        if payload.get("manifest_hash") != manifest.hash:
            raise ArtifactError(f"{fit_path} was produced under a different manifest")
        fits[fit_path.stem] = {
            k: payload[k] for k in ("family", "alpha", "beta", "ks", "n", "column")
        }
        lines.append(
            f"{payload['column']}: {payload['family']} alpha={payload['alpha']:.4f} "
            f"beta={payload['beta']:.4f} ks={payload['ks']:.4f}"
        )
    if fits:
        summary["fits"] = fits

    gen_path = out / "generations.csv"
    if gen_path.exists():
        meta, rows = read_table(gen_path)
        verify_artifact_hash(gen_path, manifest.hash, meta)
        summary["generations"] = rows
        for row in rows:
            lines.append(
                f"generation {row['generation']} ({row['years']}): "
                f"{row['total_senses']} senses, {row['new_senses']} new"
            )

    write_json(out / "report.json", summary, manifest.hash)
    print("\n".join(lines))
    return 0


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        config_path = _scan_config_path(argv)
        file_cfg = _load_config_file(config_path) if config_path else {}
        parser = build_parser(file_cfg)
        try:
            args = parser.parse_args(argv)
        except SystemExit as exc:
            return int(exc.code or 0)
        return args.func(args)
    except ConvergenceError as exc:
        print(f"keysense: non-convergence: {exc}", file=sys.stderr)
        return 3
    except (DataError, ValueError) as exc:
        print(f"keysense: data error: {exc}", file=sys.stderr)
        return 2
    except KeysenseError as exc:
        print(f"keysense: error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"keysense: i/o error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
