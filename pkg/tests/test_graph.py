"""Sense graph construction, PMI, TMI, transitivity, and PageRank."""

import math

import numpy as np
import pytest

from keysense.corpus import ingest_records
from keysense.errors import ConvergenceError, EmptyOrbitError, NoEdgeError
from keysense.graph import (
    SenseGraph,
    build_graph,
    pagerank,
    pagerank_dense_solve,
    similarity,
    trajectory_mutual_information,
    transitivity,
)

import oracles


def make_index(records):
    return ingest_records(enumerate(records, start=1))


def docs_to_records(docs):
    return [dict(d) for d in docs]


def graph_from_edges(edges, weights=None):
    """Hand-built graph for unit tests; PMI values default to 1.0."""
    nodes = sorted({n for e in edges for n in e})
    norm = {(min(a, b), max(a, b)): (weights or {}).get((a, b), 1) for a, b in edges}
    adjacency = {n: [] for n in nodes}
    for a, b in norm:
        adjacency[a].append(b)
        adjacency[b].append(a)
    return SenseGraph(
        nodes=tuple(nodes),
        edges=norm,
        sim={pair: 1.0 for pair in norm},
        adjacency={n: tuple(sorted(v)) for n, v in adjacency.items()},
        n_documents=len(norm),
    )


# --- graph construction ------------------------------------------------------


def test_build_graph_edges_match_hand_enumeration():
    index = make_index(
        [
            {"id": "d1", "year": 2000, "keywords": ["a", "b"]},
            {"id": "d2", "year": 2000, "keywords": ["a", "c"]},
        ]
    )
    g = build_graph(index)
    a, b, c = (index.concept_id(x) for x in "abc")
    assert g.cooc(a, b) == 1
    assert g.cooc(a, c) == 1
    assert g.cooc(b, c) == 0
    assert g.degree(a) == 2


def test_single_document_clique():
    index = make_index([{"id": "d1", "year": 2000, "keywords": ["a", "b", "c"]}])
    g = build_graph(index)
    assert len(g.edges) == 3
    assert all(w == 1 for w in g.edges.values())


def test_disjoint_documents_make_two_components():
    index = make_index(
        [
            {"id": "d1", "year": 2000, "keywords": ["a", "b"]},
            {"id": "d2", "year": 2000, "keywords": ["c", "d"]},
        ]
    )
    g = build_graph(index)
    a, b, c, d = (index.concept_id(x) for x in "abcd")
    assert g.cooc(a, b) == 1 and g.cooc(c, d) == 1
    assert g.cooc(a, c) == 0 and g.cooc(b, d) == 0


def test_degree_equals_dimension_minus_one():
    rng = np.random.default_rng(21)
    from keysense.sense import build_configuration, dimension

    for _ in range(10):
        docs = oracles.random_tiny_corpus(rng)
        index = make_index(docs)
        g = build_graph(index)
        for concept in index.concepts:
            cfg = build_configuration(index, concept.id)
            assert g.degree(concept.id) == dimension(cfg) - 1


# --- similarity ---------------------------------------------------------------


def test_similarity_independence_is_zero():
    index = make_index(
        [
            {"id": "d1", "year": 2000, "keywords": ["a", "b"]},
            {"id": "d2", "year": 2000, "keywords": ["a", "x"]},
            {"id": "d3", "year": 2000, "keywords": ["b", "y"]},
            {"id": "d4", "year": 2000, "keywords": ["x", "y"]},
        ]
    )
    # N=4, |O_a|=2, |O_b|=2, joint=1 -> ln(0.25 / 0.25) = 0
    value = similarity(index, index.concept_id("a"), index.concept_id("b"))
    assert value == pytest.approx(0.0, abs=1e-12)


def test_similarity_perfect_cooccurrence():
    index = make_index(
        [
            {"id": "d1", "year": 2000, "keywords": ["a", "b"]},
            {"id": "d2", "year": 2000, "keywords": ["a", "b"]},
            {"id": "d3", "year": 2000, "keywords": ["x", "y"]},
            {"id": "d4", "year": 2000, "keywords": ["x", "y"]},
        ]
    )
    value = similarity(index, index.concept_id("a"), index.concept_id("b"))
    assert value == pytest.approx(math.log(2))


def test_similarity_sub_independent_pair():
    # N=8, |O_A|=4, |O_B|=4, joint 1 -> -ln 2
    records = [{"id": f"a{i}", "year": 2000, "keywords": ["a", f"fa{i}"]} for i in range(3)]
    records += [{"id": f"b{i}", "year": 2000, "keywords": ["b", f"fb{i}"]} for i in range(3)]
    records.append({"id": "ab", "year": 2000, "keywords": ["a", "b"]})
    records.append({"id": "pad", "year": 2000, "keywords": ["fa0", "fb0"]})
    index = make_index(records)
    assert len(index.orbit(index.concept_id("a"))) == 4
    assert len(index.orbit(index.concept_id("b"))) == 4
    value = similarity(index, index.concept_id("a"), index.concept_id("b"))
    assert value == pytest.approx(-math.log(2))


def test_similarity_requires_intersection():
    index = make_index(
        [
            {"id": "d1", "year": 2000, "keywords": ["a", "b"]},
            {"id": "d2", "year": 2000, "keywords": ["c", "d"]},
        ]
    )
    with pytest.raises(NoEdgeError):
        similarity(index, index.concept_id("a"), index.concept_id("c"))


def test_similarity_is_symmetric_and_matches_graph():
    rng = np.random.default_rng(23)
    docs = oracles.random_tiny_corpus(rng)
    index = make_index(docs)
    g = build_graph(index)
    for (a, b), _ in g.edges.items():
        assert similarity(index, a, b) == similarity(index, b, a)
        assert g.similarity(a, b) == pytest.approx(similarity(index, a, b), abs=1e-12)
        la, lb = index.label(a), index.label(b)
        assert similarity(index, a, b) == pytest.approx(
            oracles.pmi(docs_to_records(docs), la, lb), abs=1e-9
        )


# --- trajectory mutual information --------------------------------------------


def perfect_pair_index():
    return make_index(
        [
            {"id": "d1", "year": 2000, "keywords": ["a", "b"]},
            {"id": "d2", "year": 2000, "keywords": ["a", "b"]},
            {"id": "d3", "year": 2000, "keywords": ["x", "y"]},
            {"id": "d4", "year": 2000, "keywords": ["x", "y"]},
        ]
    )


def test_tmi_full_mi_perfectly_dependent_pair():
    index = perfect_pair_index()
    rec = trajectory_mutual_information(index, index.concept_id("a"), [2000], "full-mi")
    assert rec.tmi == pytest.approx(math.log(2))


def test_tmi_pointwise_perfectly_dependent_pair():
    index = perfect_pair_index()
    rec = trajectory_mutual_information(index, index.concept_id("a"), [2000], "pointwise")
    assert rec.tmi == pytest.approx(0.5 * math.log(2))


def test_tmi_no_neighbors_is_zero():
    # focal co-occurs only with its constant partner; remove partner from slice?
    # simplest: sense occurs in a year where it has no co-occurring documents
    index = make_index(
        [
            {"id": "d1", "year": 2000, "keywords": ["a", "b"]},
            {"id": "d2", "year": 2001, "keywords": ["x", "y"]},
        ]
    )
    rec = trajectory_mutual_information(index, index.concept_id("a"), [2000, 2001])
    # the year-2000 slice is {d1}: p(a,b)=p(a)=p(b)=1 -> ln 1 = 0
    assert rec.tmi == pytest.approx(0.0)
    assert rec.per_year[2001] == 0.0


def test_tmi_missing_years_error():
    index = make_index([{"id": "d1", "year": 2000, "keywords": ["a", "b"]}])
    with pytest.raises(EmptyOrbitError):
        trajectory_mutual_information(index, index.concept_id("a"), [2001])


def test_tmi_additivity_over_disjoint_year_sets():
    rng = np.random.default_rng(29)
    docs = oracles.random_tiny_corpus(rng)
    index = make_index(docs)
    years = index.years()
    cid = 0
    for mode in ("pointwise", "full-mi"):
        try:
            whole = trajectory_mutual_information(index, cid, years, mode).tmi
        except EmptyOrbitError:
            continue
        parts = 0.0
        for year in years:
            try:
                parts += trajectory_mutual_information(index, cid, [year], mode).tmi
            except EmptyOrbitError:
                pass
        assert whole == pytest.approx(parts, abs=1e-12)


def test_tmi_full_mi_contributions_nonnegative():
    rng = np.random.default_rng(31)
    for _ in range(10):
        docs = oracles.random_tiny_corpus(rng)
        index = make_index(docs)
        for concept in index.concepts:
            try:
                rec = trajectory_mutual_information(
                    index, concept.id, index.years(), "full-mi"
                )
            except EmptyOrbitError:
                continue
            assert all(v >= -1e-15 for v in rec.per_year.values())


def test_tmi_independent_indicators_contribute_zero():
    # year slice of 4 docs where a and b are exactly independent
    index = make_index(
        [
            {"id": "d1", "year": 2000, "keywords": ["a", "b"]},
            {"id": "d2", "year": 2000, "keywords": ["a", "x"]},
            {"id": "d3", "year": 2000, "keywords": ["b", "y"]},
            {"id": "d4", "year": 2000, "keywords": ["x", "y"]},
        ]
    )
    for mode in ("pointwise", "full-mi"):
        rec = trajectory_mutual_information(index, index.concept_id("a"), [2000], mode)
        # only neighbors are b (independent) and x (not independent); isolate b
        # by checking the pair term directly through the oracle
        assert rec.per_year[2000] == pytest.approx(
            oracles.tmi(
                [
                    {"id": "d1", "year": 2000, "keywords": ["a", "b"]},
                    {"id": "d2", "year": 2000, "keywords": ["a", "x"]},
                    {"id": "d3", "year": 2000, "keywords": ["b", "y"]},
                    {"id": "d4", "year": 2000, "keywords": ["x", "y"]},
                ],
                "a",
                [2000],
                mode,
            ),
            abs=1e-12,
        )


def test_tmi_matches_oracle_on_random_corpora():
    rng = np.random.default_rng(37)
    for _ in range(10):
        docs = oracles.random_tiny_corpus(rng)
        index = make_index(docs)
        for concept in index.concepts:
            for mode in ("pointwise", "full-mi"):
                try:
                    rec = trajectory_mutual_information(
                        index, concept.id, index.years(), mode
                    )
                except EmptyOrbitError:
                    continue
                expected = oracles.tmi(
                    docs_to_records(docs), concept.label, index.years(), mode
                )
                assert rec.tmi == pytest.approx(expected, abs=1e-9)


# --- transitivity --------------------------------------------------------------


def test_transitivity_triangle():
    index = make_index([{"id": "d1", "year": 2000, "keywords": ["a", "b", "c"]}])
    g = build_graph(index)
    assert transitivity(g, index.concept_id("a")) == 1.0


def test_transitivity_star_center():
    index = make_index(
        [
            {"id": "d1", "year": 2000, "keywords": ["hub", "l1"]},
            {"id": "d2", "year": 2000, "keywords": ["hub", "l2"]},
            {"id": "d3", "year": 2000, "keywords": ["hub", "l3"]},
        ]
    )
    g = build_graph(index)
    assert transitivity(g, index.concept_id("hub")) == 0.0


def test_transitivity_one_closed_pair_of_three():
    index = make_index(
        [
            {"id": "d1", "year": 2000, "keywords": ["a", "b"]},
            {"id": "d2", "year": 2000, "keywords": ["a", "c"]},
            {"id": "d3", "year": 2000, "keywords": ["a", "d"]},
            {"id": "d4", "year": 2000, "keywords": ["b", "c"]},
        ]
    )
    g = build_graph(index)
    assert transitivity(g, index.concept_id("a")) == pytest.approx(1 / 3)


def test_transitivity_undefined_below_degree_two():
    index = make_index([{"id": "d1", "year": 2000, "keywords": ["a", "b"]}])
    g = build_graph(index)
    assert transitivity(g, index.concept_id("a")) is None


def test_transitivity_monotone_in_neighborhood_density():
    # star with k leaves; add leaf-leaf edges one at a time
    leaves = [f"l{i}" for i in range(4)]
    base = [{"id": f"d{i}", "year": 2000, "keywords": ["hub", leaf]} for i, leaf in enumerate(leaves)]
    extra_pairs = [("l0", "l1"), ("l2", "l3"), ("l0", "l2")]
    last = -1.0
    for n_extra in range(len(extra_pairs) + 1):
        records = list(base) + [
            {"id": f"e{i}", "year": 2000, "keywords": list(pair)}
            for i, pair in enumerate(extra_pairs[:n_extra])
        ]
        index = make_index(records)
        g = build_graph(index)
        tr = transitivity(g, index.concept_id("hub"))
        assert tr > last
        last = tr


def test_transitivity_matches_oracle():
    rng = np.random.default_rng(41)
    for _ in range(10):
        docs = oracles.random_tiny_corpus(rng)
        index = make_index(docs)
        g = build_graph(index)
        for concept in index.concepts:
            expected = oracles.transitivity(docs_to_records(docs), concept.label)
            got = transitivity(g, concept.id)
            if expected is None:
                assert got is None
            else:
                assert got == pytest.approx(expected, abs=1e-12)


# --- pagerank -------------------------------------------------------------------


def ring_graph(n):
    return graph_from_edges([(i, (i + 1) % n) for i in range(n)])


def test_pagerank_uniform_on_rings():
    for n in (5, 50):
        scores = pagerank(ring_graph(n), tol=1e-12)
        for value in scores.values():
            assert value == pytest.approx(1.0 / n, abs=1e-9)


def test_pagerank_two_nodes():
    scores = pagerank(graph_from_edges([(0, 1)]))
    assert scores[0] == pytest.approx(0.5)
    assert scores[1] == pytest.approx(0.5)


def test_pagerank_three_node_path_matches_linear_solve():
    g = graph_from_edges([(0, 1), (1, 2)])
    scores = pagerank(g, damping=0.85, tol=1e-13)
    # exact stationary solution: ends 19/74, middle 18/37
    assert scores[0] == pytest.approx(19 / 74, abs=1e-9)
    assert scores[2] == pytest.approx(19 / 74, abs=1e-9)
    assert scores[1] == pytest.approx(18 / 37, abs=1e-9)
    oracle = oracles.pagerank_linear_solve([0, 1, 2], {(0, 1): 1, (1, 2): 1})
    for node in (0, 1, 2):
        assert scores[node] == pytest.approx(oracle[node], abs=1e-9)


def test_pagerank_sums_to_one_and_scale_invariant():
    rng = np.random.default_rng(43)
    docs = oracles.random_tiny_corpus(rng)
    index = make_index(docs)
    g = build_graph(index)
    scores = pagerank(g, tol=1e-12)
    assert sum(scores.values()) == pytest.approx(1.0, abs=1e-9)
    scaled = SenseGraph(
        nodes=g.nodes,
        edges={pair: w * 7 for pair, w in g.edges.items()},
        sim=g.sim,
        adjacency=g.adjacency,
        n_documents=g.n_documents,
    )
    rescored = pagerank(scaled, tol=1e-12)
    for node, value in scores.items():
        assert rescored[node] == pytest.approx(value, abs=1e-12)


def test_pagerank_matches_dense_solve_on_random_graphs():
    rng = np.random.default_rng(47)
    for _ in range(5):
        docs = oracles.random_tiny_corpus(rng)
        index = make_index(docs)
        g = build_graph(index)
        power = pagerank(g, tol=1e-13, max_iter=2000)
        dense = pagerank_dense_solve(g)
        for node in g.nodes:
            assert power[node] == pytest.approx(dense[node], abs=1e-9)


def test_pagerank_nonconvergence_raises():
    # an asymmetric graph cannot reach an exactly-zero update in 2 steps
    g = graph_from_edges([(0, 1), (1, 2)])
    with pytest.raises(ConvergenceError):
        pagerank(g, tol=0.0, max_iter=2)
