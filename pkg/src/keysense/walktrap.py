"""Random-walk community detection (Pons-Latapy walktrap).

Vertices are compared through the distribution of short random walks
started at them: two vertices whose walk distributions land similarly are
likely in the same community.  Communities are merged agglomeratively by
a Ward-like criterion on those walk distances, and the merge sequence is
cut where modularity peaks.  Everything is deterministic: ties are broken
toward the lowest community indices, components are processed in sorted
order, and the result is independent of the worker count.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from typing import TYPE_CHECKING, Mapping

import numpy as np

if TYPE_CHECKING:  # pragma: no cover
    from .graph import SenseGraph

WeightMode = str  # "count" | "positive-pmi" (alias "positivePMI")


def _filtered_edges(graph: "SenseGraph", weight_mode: WeightMode) -> dict[tuple[int, int], float]:
    if weight_mode == "count":
        return {pair: float(w) for pair, w in graph.edges.items()}
    if weight_mode in ("positive-pmi", "positivePMI"):
        return {pair: s for pair, s in graph.sim.items() if s > 0.0}
    raise ValueError(f"unknown weight mode {weight_mode!r}")


def _components(
    nodes: tuple[int, ...], edges: Mapping[tuple[int, int], float]
) -> list[list[int]]:
    """Connected components over the filtered graph, each sorted, in sorted order."""
    neighbors: dict[int, list[int]] = {n: [] for n in nodes}
    for a, b in edges:
        neighbors[a].append(b)
        neighbors[b].append(a)
    seen: set[int] = set()
    components: list[list[int]] = []
    for start in nodes:
        if start in seen:
            continue
        stack = [start]
        seen.add(start)
        comp = []
        while stack:
            node = stack.pop()
            comp.append(node)
            for nb in neighbors[node]:
                if nb not in seen:
                    seen.add(nb)
                    stack.append(nb)
        components.append(sorted(comp))
    return components


def _walktrap_component(
    nodes: list[int],
    edges: dict[tuple[int, int], float],
    steps: int,
    total_weight: float,
) -> list[list[int]]:
    """Merge one connected component and cut at its modularity peak.

    ``total_weight`` is the weight of the whole filtered graph, so the
    per-component modularity contributions add up to the global value and
    per-component cuts remain globally optimal.
    """
    k = len(nodes)
    if k == 1:
        return [list(nodes)]
    index = {node: i for i, node in enumerate(nodes)}

    weights = np.zeros((k, k))
    for (a, b), w in edges.items():
        ia, ib = index[a], index[b]
        weights[ia, ib] = w
        weights[ib, ia] = w
    strength = weights.sum(axis=1)
    walk = np.linalg.matrix_power(weights / strength[:, None], steps)
    # rows scaled so squared euclidean distance equals the walk distance
    vectors = walk / np.sqrt(strength)[None, :]

    two_m = 2.0 * total_weight
    size = {i: 1 for i in range(k)}
    vec = {i: vectors[i] for i in range(k)}
    com_strength = {i: float(strength[i]) for i in range(k)}
    between: dict[tuple[int, int], float] = {}
    for (a, b), w in edges.items():
        ia, ib = index[a], index[b]
        between[(min(ia, ib), max(ia, ib))] = w

    def ward_cost(c1: int, c2: int) -> float:
        s1, s2 = size[c1], size[c2]
        diff = vec[c1] - vec[c2]
        return (s1 * s2) / (s1 + s2) / k * float(diff @ diff)

    cost = {pair: ward_cost(*pair) for pair in between}

    modularity = sum(-(s / two_m) ** 2 for s in com_strength.values())
    merges: list[tuple[int, int, int]] = []
    best_step, best_modularity = 0, modularity
    next_id = k

    for step_no in range(1, k):
        (c1, c2) = min(cost, key=lambda pair: (cost[pair], pair))
        w_12 = between[(c1, c2)]
        new = next_id
        next_id += 1
        merges.append((c1, c2, new))

        modularity += w_12 / total_weight - (
            com_strength[c1] * com_strength[c2] / (2.0 * total_weight**2)
        )
        if modularity > best_modularity:
            best_modularity = modularity
            best_step = step_no

        s1, s2 = size[c1], size[c2]
        vec[new] = (s1 * vec[c1] + s2 * vec[c2]) / (s1 + s2)
        size[new] = s1 + s2
        com_strength[new] = com_strength[c1] + com_strength[c2]

        # rewire neighbor bookkeeping onto the merged community
        new_between: dict[int, float] = {}
        for pair in list(between):
            if c1 in pair or c2 in pair:
                other = pair[1] if pair[0] in (c1, c2) else pair[0]
                w = between.pop(pair)
                cost.pop(pair, None)
                if other not in (c1, c2):
                    new_between[other] = new_between.get(other, 0.0) + w
        for other, w in new_between.items():
            pair = (min(other, new), max(other, new))
            between[pair] = w
            cost[pair] = ward_cost(other, new)
        for com in (c1, c2):
            del vec[com], size[com], com_strength[com]

    # replay merges up to the best step to recover the chosen partition
    groups = {i: [nodes[i]] for i in range(k)}
    for c1, c2, new in merges[:best_step]:
        groups[new] = groups.pop(c1) + groups.pop(c2)
    return [sorted(g) for g in groups.values()]


def walktrap_clusters(
    graph: "SenseGraph",
    steps: int = 4,
    weight_mode: WeightMode = "positive-pmi",
    workers: int = 1,
) -> dict[int, int]:
    """Assign every sense to a community; returns sense id -> 1-based cluster id.

    ``weight_mode`` chooses the walk weights: raw co-occurrence counts, or
    pairwise similarity clamped below at zero (edges with nonpositive
    similarity are dropped, which may split components).  Components are
    clustered independently; ``workers`` only parallelizes across them.
    """
    if steps < 1:
        raise ValueError("steps must be >= 1")
    edges = _filtered_edges(graph, weight_mode)
    if not graph.nodes:
        return {}
    components = _components(graph.nodes, edges)
    total_weight = sum(edges.values())

    def run(comp: list[int]) -> list[list[int]]:
        comp_set = set(comp)
        comp_edges = {pair: w for pair, w in edges.items() if pair[0] in comp_set}
        return _walktrap_component(comp, comp_edges, steps, total_weight)

    if workers > 1 and len(components) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            partitions = list(pool.map(run, components))
    else:
        partitions = [run(comp) for comp in components]

    clusters = sorted((group for part in partitions for group in part), key=min)
    assignment: dict[int, int] = {}
    for cluster_id, group in enumerate(clusters, start=1):
        for node in group:
            assignment[node] = cluster_id
    return assignment
