"""End-to-end analysis: one immutable config, one metric table.

Ties the corpus, sense, graph, and temporal layers together into the
per-sense metric table and its side artifacts (edge list, yearly TMI
records, cluster assignment, generation table).  Per-sense work can fan
out over processes; every row is a pure function of the index and the
config, so the assembled table is identical for any worker count.
"""

from __future__ import annotations

import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Mapping, Sequence

from . import graph as graph_mod
from . import sense as sense_mod
from .corpus import DEFAULT_BLACKLIST, CleaningConfig, CorpusIndex, citation_rates
from .errors import DataError
from .temporal import GenerationTable, assign_generations, generation_boundaries

METRICS_SCHEMA = "metrics-v1"
EDGES_SCHEMA = "edges-v1"
TMI_SCHEMA = "tmi-v1"
CLUSTERS_SCHEMA = "clusters-v1"

METRICS_HEADER = (
    "sense",
    "label",
    "docs",
    "dim",
    "h",
    "h_norm",
    "diseq",
    "complexity",
    "transitivity",
    "tmi",
    "citations",
    "pagerank",
    "generation",
    "cluster",
)


@dataclass(frozen=True)
class AnalysisConfig:
    """Every knob that affects analysis output; hashed into the manifest."""

    blacklist: tuple[str, ...] = tuple(sorted(DEFAULT_BLACKLIST))
    year_from: int | None = None
    year_to: int | None = None
    tmi_mode: str = "pointwise"
    damping: float = 0.85
    walk_steps: int = 4
    weight_mode: str = "positive-pmi"
    seed: int = 0
    citation_window: int = 3

    def cleaning(self) -> CleaningConfig:
        return CleaningConfig(
            blacklist=frozenset(self.blacklist),
            year_min=self.year_from,
            year_max=self.year_to,
        )

    def manifest_config(self) -> dict:
        return {
            "blacklist": list(self.blacklist),
            "year_from": self.year_from,
            "year_to": self.year_to,
            "tmi_mode": self.tmi_mode,
            "damping": self.damping,
            "walk_steps": self.walk_steps,
            "weight_mode": self.weight_mode,
            "seed": self.seed,
            "citation_window": self.citation_window,
        }


@dataclass
class AnalysisResult:
    graph: graph_mod.SenseGraph
    generation_table: GenerationTable
    clusters: Mapping[int, int]
    pagerank: Mapping[int, float]
    metric_rows: list[tuple]
    tmi_rows: list[tuple]

    def edge_rows(self) -> list[tuple]:
        return [
            (a, b, self.graph.edges[(a, b)], self.graph.sim[(a, b)])
            for a, b in sorted(self.graph.edges)
        ]

    def cluster_rows(self) -> list[tuple]:
        return [(cid, self.clusters[cid]) for cid in sorted(self.clusters)]


# --- per-sense work, shared by the inline and multiprocess paths ----------

_WORKER_STATE: dict = {}


def _init_worker(index: CorpusIndex, years: tuple[int, ...], tmi_mode: str) -> None:
    _WORKER_STATE["index"] = index
    _WORKER_STATE["years"] = years
    _WORKER_STATE["tmi_mode"] = tmi_mode


def _sense_chunk(chunk: Sequence[int]) -> list[tuple]:
    index: CorpusIndex = _WORKER_STATE["index"]
    years: tuple[int, ...] = _WORKER_STATE["years"]
    tmi_mode: str = _WORKER_STATE["tmi_mode"]
    out = []
    for cid in chunk:
        cfg = sense_mod.build_configuration(index, cid)
        metrics = sense_mod.sense_metrics(cfg)
        tmi = graph_mod.trajectory_mutual_information(index, cid, years, tmi_mode)
        per_year = json.dumps({str(y): v for y, v in sorted(tmi.per_year.items())})
        out.append(
            (
                cid,
                len(index.orbit(cid)),
                metrics.dim,
                metrics.h,
                metrics.h_norm,
                metrics.diseq,
                metrics.complexity,
                tmi.tmi,
                per_year,
            )
        )
    return out


def analyze_corpus(
    index: CorpusIndex, config: AnalysisConfig, workers: int = 1
) -> AnalysisResult:
    """Compute the full metric table and side structures for one corpus."""
    if index.n_documents == 0:
        raise DataError("corpus is empty")
    years = index.years()

    sense_graph = graph_mod.build_graph(index)
    ranks = graph_mod.pagerank(sense_graph, damping=config.damping)
    clusters = graph_mod.walktrap_clusters(
        sense_graph,
        steps=config.walk_steps,
        weight_mode=config.weight_mode,
        workers=workers,
    )
    boundaries = generation_boundaries(index)
    table = assign_generations(index, boundaries)
    citations = citation_rates(index, config.citation_window)

    concept_ids = [c.id for c in index.concepts]
    if workers > 1 and len(concept_ids) > 1:
        chunk_size = max(1, (len(concept_ids) + workers - 1) // workers)
        chunks = [
            concept_ids[i : i + chunk_size]
            for i in range(0, len(concept_ids), chunk_size)
        ]
        with ProcessPoolExecutor(
            max_workers=workers,
            initializer=_init_worker,
            initargs=(index, years, config.tmi_mode),
        ) as pool:
            chunk_results = list(pool.map(_sense_chunk, chunks))
        sense_rows = [row for chunk in chunk_results for row in chunk]
    else:
        _init_worker(index, years, config.tmi_mode)
        sense_rows = _sense_chunk(concept_ids)

    metric_rows: list[tuple] = []
    tmi_rows: list[tuple] = []
    for cid, docs, dim, h, h_norm, diseq, cplx, tmi, per_year in sense_rows:
        metric_rows.append(
            (
                cid,
                index.label(cid),
                docs,
                dim,
                h,
                h_norm,
                diseq,
                cplx,
                graph_mod.transitivity(sense_graph, cid),
                tmi,
                citations[cid],
                ranks.get(cid, 0.0),
                table.assignments[cid],
                clusters.get(cid, 0),
            )
        )
        tmi_rows.append((cid, config.tmi_mode, tmi, per_year))

    return AnalysisResult(
        graph=sense_graph,
        generation_table=table,
        clusters=clusters,
        pagerank=ranks,
        metric_rows=metric_rows,
        tmi_rows=tmi_rows,
    )
