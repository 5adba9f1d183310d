"""Sense-intersection graph and pairwise/global quantities.

Two senses are linked when their orbits share at least one document.
Edges carry the co-document count and the pointwise mutual information of
the two document indicators.  On top of the graph live the local
clustering coefficient, trajectory mutual information summed over yearly
slices, weighted PageRank, and random-walk community detection (see
``walktrap``).
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Literal, Mapping, Sequence

import numpy as np
import scipy.sparse as sp

from .corpus import CorpusIndex
from .errors import ConvergenceError, DataError, EmptyOrbitError, NoEdgeError

TmiMode = Literal["pointwise", "full-mi"]


@dataclass(frozen=True)
class SenseGraph:
    """Weighted undirected co-occurrence graph over sense ids.

    ``edges`` stores each undirected pair once under ``(a, b)`` with
    ``a < b``; ``adjacency`` answers symmetric queries.  ``n_documents``
    is the slice size the PMI values were computed against.
    """

    nodes: tuple[int, ...]
    edges: Mapping[tuple[int, int], int]
    sim: Mapping[tuple[int, int], float]
    adjacency: Mapping[int, tuple[int, ...]]
    n_documents: int

    def degree(self, node: int) -> int:
        return len(self.adjacency.get(node, ()))

    def cooc(self, a: int, b: int) -> int:
        return self.edges.get((a, b) if a < b else (b, a), 0)

    def similarity(self, a: int, b: int) -> float:
        key = (a, b) if a < b else (b, a)
        if key not in self.sim:
            raise NoEdgeError(f"senses {a} and {b} never co-occur")
        return self.sim[key]


def build_graph(
    index: CorpusIndex, year_range: tuple[int, int] | None = None
) -> SenseGraph:
    """Count pairwise co-occurrences over the (optionally year-sliced) corpus."""
    doc_positions = index.documents_in_range(year_range)
    if index.n_documents == 0:
        raise DataError("cannot build a graph over an empty index")
    n_docs = len(doc_positions)

    label_to_id = index._label_to_id
    orbit_sizes: Counter = Counter()
    pair_counts: Counter = Counter()
    nodes: set[int] = set()
    for pos in doc_positions:
        cids = sorted(label_to_id[kw] for kw in index.documents[pos].keywords)
        nodes.update(cids)
        for c in cids:
            orbit_sizes[c] += 1
        for a, b in combinations(cids, 2):
            pair_counts[(a, b)] += 1

    sim = {
        (a, b): math.log(c * n_docs) - math.log(orbit_sizes[a] * orbit_sizes[b])
        for (a, b), c in pair_counts.items()
    }
    adjacency: dict[int, list[int]] = {c: [] for c in nodes}
    for a, b in pair_counts:
        adjacency[a].append(b)
        adjacency[b].append(a)

    return SenseGraph(
        nodes=tuple(sorted(nodes)),
        edges=dict(pair_counts),
        sim=sim,
        adjacency={c: tuple(sorted(ns)) for c, ns in adjacency.items()},
        n_documents=n_docs,
    )


def similarity(
    index: CorpusIndex,
    a: int,
    b: int,
    year_range: tuple[int, int] | None = None,
) -> float:
    """Pointwise mutual information of two senses' document indicators.

    Probabilities are document fractions of the chosen slice.  Raises
    :class:`NoEdgeError` when the orbits do not intersect there.
    """
    doc_positions = index.documents_in_range(year_range)
    n = len(doc_positions)
    pos_a = set(index.orbit_positions(a)) & set(doc_positions)
    pos_b = set(index.orbit_positions(b)) & set(doc_positions)
    joint = len(pos_a & pos_b)
    if joint == 0:
        raise NoEdgeError(f"senses {a} and {b} never co-occur in range {year_range}")
    return math.log(joint * n) - math.log(len(pos_a) * len(pos_b))


# ---------------------------------------------------------------------------
# Trajectory mutual information
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TmiRecord:
    """Summed information shared with co-occurring senses, by year."""

    sense: int
    mode: TmiMode
    tmi: float
    per_year: Mapping[int, float]


def _mi_cell(cell: int, row: int, col: int, n: int) -> float:
    """One mutual-information term from integer counts; empty cells are zero.

    Exact integer cell counts matter: deriving them by float subtraction
    leaves ~1e-16 residues in cells that are mathematically empty, which then
    divide by exactly-zero marginals.
    """
    if cell <= 0:
        return 0.0
    return (cell / n) * math.log(cell * n / (row * col))


def _year_pair_contribution(
    n_joint: int, n_a: int, n_b: int, n_docs: int, mode: TmiMode
) -> float:
    if mode == "pointwise":
        return _mi_cell(n_joint, n_a, n_b, n_docs)
    # full 2x2 mutual information of the document-indicator variables
    return (
        _mi_cell(n_joint, n_a, n_b, n_docs)
        + _mi_cell(n_a - n_joint, n_a, n_docs - n_b, n_docs)
        + _mi_cell(n_b - n_joint, n_docs - n_a, n_b, n_docs)
        + _mi_cell(n_docs - n_a - n_b + n_joint, n_docs - n_a, n_docs - n_b, n_docs)
    )


def trajectory_mutual_information(
    index: CorpusIndex,
    sense: int,
    years: Iterable[int],
    mode: TmiMode = "pointwise",
) -> TmiRecord:
    """Accumulate the sense's yearly mutual information with its co-occurring senses.

    For each year, every sense whose orbit intersects the focal orbit within
    that year's slice contributes one term; years where the focal sense is
    absent contribute zero.  Raises :class:`EmptyOrbitError` when the sense
    occurs in none of the requested years.
    """
    if mode not in ("pointwise", "full-mi"):
        raise ValueError(f"unknown TMI mode {mode!r}")
    label_to_id = index._label_to_id
    focal_label = index.label(sense)
    per_year: dict[int, float] = {}
    occurred = False
    for year in sorted(set(years)):
        docs = index.yearly_slice(year)
        n_docs = len(docs)
        if n_docs == 0:
            per_year[year] = 0.0
            continue
        focal_docs = [d for d in docs if focal_label in d.keywords]
        n_a = len(focal_docs)
        if n_a == 0:
            per_year[year] = 0.0
            continue
        occurred = True
        joint: Counter = Counter()
        for doc in focal_docs:
            for kw in doc.keywords:
                cid = label_to_id[kw]
                if cid != sense:
                    joint[cid] += 1
        slice_counts: Counter = Counter()
        for doc in docs:
            for kw in doc.keywords:
                slice_counts[label_to_id[kw]] += 1
        total = 0.0
        for other in sorted(joint):
            total += _year_pair_contribution(
                joint[other], n_a, slice_counts[other], n_docs, mode
            )
        per_year[year] = total
    if not occurred:
        raise EmptyOrbitError(f"sense {sense} occurs in none of the requested years")
    return TmiRecord(
        sense=sense, mode=mode, tmi=float(sum(per_year.values())), per_year=per_year
    )


# ---------------------------------------------------------------------------
# Transitivity
# ---------------------------------------------------------------------------


def transitivity(graph: SenseGraph, sense: int) -> float | None:
    """Local clustering coefficient; ``None`` marks degree < 2 (undefined)."""
    neighbors = graph.adjacency.get(sense, ())
    k = len(neighbors)
    if k < 2:
        return None
    # adjacency tuples are sorted, so combinations yields (a, b) with a < b
    closed = sum(1 for a, b in combinations(neighbors, 2) if (a, b) in graph.edges)
    return closed / (k * (k - 1) / 2)


# ---------------------------------------------------------------------------
# PageRank
# ---------------------------------------------------------------------------


def pagerank(
    graph: SenseGraph,
    damping: float = 0.85,
    tol: float = 1e-9,
    max_iter: int = 200,
) -> dict[int, float]:
    """Power iteration over the co-occurrence-weighted random walk.

    Each undirected edge acts as two directed edges weighted by its
    co-document count.  Scores sum to one; convergence is declared when the
    L1 change of an iteration drops below ``tol``.
    """
    nodes = graph.nodes
    n = len(nodes)
    if n == 0:
        raise DataError("cannot rank an empty graph")
    pos = {c: i for i, c in enumerate(nodes)}

    rows, cols, vals = [], [], []
    for (a, b), w in graph.edges.items():
        rows.append(pos[a]); cols.append(pos[b]); vals.append(float(w))
        rows.append(pos[b]); cols.append(pos[a]); vals.append(float(w))
    weights = sp.csr_matrix((vals, (rows, cols)), shape=(n, n))
    strength = np.asarray(weights.sum(axis=1)).ravel()
    dangling = strength == 0.0
    inv_strength = np.zeros(n)
    inv_strength[~dangling] = 1.0 / strength[~dangling]
    # column-stochastic transition: entry (j, i) moves rank from i to j
    transition = (weights.multiply(inv_strength[:, None])).T.tocsr()

    rank = np.full(n, 1.0 / n)
    teleport = (1.0 - damping) / n
    delta = float("inf")
    for _ in range(max_iter):
        spread = np.asarray(transition @ rank).ravel()
        lost = damping * rank[dangling].sum() / n
        new_rank = damping * spread + teleport + lost
        delta = float(np.abs(new_rank - rank).sum())
        rank = new_rank
        if delta < tol:
            rank = rank / rank.sum()
            return {c: float(rank[pos[c]]) for c in nodes}
    raise ConvergenceError(
        "pagerank did not converge", {"max_iter": max_iter, "residual": delta}
    )


def pagerank_dense_solve(graph: SenseGraph, damping: float = 0.85) -> dict[int, float]:
    """Direct linear solve of the stationary equations (small graphs only)."""
    nodes = graph.nodes
    n = len(nodes)
    pos = {c: i for i, c in enumerate(nodes)}
    weights = np.zeros((n, n))
    for (a, b), w in graph.edges.items():
        weights[pos[a], pos[b]] = w
        weights[pos[b], pos[a]] = w
    strength = weights.sum(axis=1)
    transition = np.zeros((n, n))
    nonzero = strength > 0
    transition[nonzero] = weights[nonzero] / strength[nonzero, None]
    transition[~nonzero] = 1.0 / n  # dangling mass spreads uniformly
    system = np.eye(n) - damping * transition.T
    rank = np.linalg.solve(system, np.full(n, (1.0 - damping) / n))
    rank = rank / rank.sum()
    return {c: float(rank[pos[c]]) for c in nodes}


from .walktrap import walktrap_clusters  # noqa: E402  (re-export; lives with the graph API)

__all__ = [
    "SenseGraph",
    "TmiRecord",
    "build_graph",
    "similarity",
    "trajectory_mutual_information",
    "transitivity",
    "pagerank",
    "pagerank_dense_solve",
    "walktrap_clusters",
]
