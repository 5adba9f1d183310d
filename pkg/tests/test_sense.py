"""Configuration building and the single-sense metric family."""

import math

import numpy as np
import pytest

from keysense.corpus import ingest_records
from keysense.errors import EmptyOrbitError
from keysense.sense import (
    Configuration,
    build_configuration,
    complexity,
    dimension,
    disequilibrium,
    entropy,
    homeomorphism_log_count,
    normalized_entropy,
    partition_log_prob,
    sense_metrics,
)

import oracles


def cfg_from(counts, focal="a"):
    labels = sorted(counts)
    entries = tuple((i, counts[lab]) for i, lab in enumerate(labels))
    return Configuration(
        focal=labels.index(focal), entries=entries, total=sum(counts.values())
    )


ABC = {"a": 2, "b": 1, "c": 1}  # the canonical worked example


def make_index(records):
    return ingest_records(enumerate(records, start=1))


# --- configuration building ---------------------------------------------------


def test_build_configuration_enumerates_orbit():
    index = make_index(
        [
            {"id": "d1", "year": 2000, "keywords": ["a", "b"]},
            {"id": "d2", "year": 2000, "keywords": ["a", "c"]},
            {"id": "d3", "year": 2000, "keywords": ["b", "c"]},
        ]
    )
    cfg = build_configuration(index, index.concept_id("a"))
    counts = dict(cfg.entries)
    assert counts == {
        index.concept_id("a"): 2,
        index.concept_id("b"): 1,
        index.concept_id("c"): 1,
    }
    assert cfg.total == 4
    cfg.validate()


def test_minimal_orbit():
    index = make_index([{"id": "d1", "year": 2000, "keywords": ["a", "b"]}])
    cfg = build_configuration(index, index.concept_id("a"))
    assert dict(cfg.entries) == {0: 1, 1: 1}
    assert cfg.total == 2


def test_empty_filtered_orbit_raises():
    index = make_index([{"id": "d1", "year": 2000, "keywords": ["a", "b"]}])
    with pytest.raises(EmptyOrbitError):
        build_configuration(index, index.concept_id("a"), year_range=(1990, 1999))


def test_year_filter_restricts_orbit():
    index = make_index(
        [
            {"id": "d1", "year": 2000, "keywords": ["a", "b"]},
            {"id": "d2", "year": 2001, "keywords": ["a", "c"]},
        ]
    )
    cfg = build_configuration(index, index.concept_id("a"), year_range=(2000, 2000))
    assert dict(cfg.entries) == {index.concept_id("a"): 1, index.concept_id("b"): 1}


# --- frozen worked examples ----------------------------------------------------


def test_dimension():
    assert dimension(cfg_from(ABC)) == 3
    assert dimension(cfg_from({"a": 1, "b": 1})) == 2


def test_homeomorphism_log_count():
    assert homeomorphism_log_count(cfg_from({"a": 1, "b": 1, "c": 1})) == 0.0
    assert homeomorphism_log_count(cfg_from(ABC)) == pytest.approx(2 * math.log(2))
    assert homeomorphism_log_count(cfg_from({"a": 3})) == pytest.approx(3 * math.log(3))


def test_partition_log_prob():
    assert partition_log_prob(cfg_from(ABC)) == pytest.approx(-3 * math.log(4))
    assert partition_log_prob(cfg_from({"a": 5})) == pytest.approx(0.0)
    k = 6
    uniform = cfg_from({f"c{i}": 1 for i in range(k)}, focal="c0")
    assert partition_log_prob(uniform) == pytest.approx(-k * math.log(k))


def test_entropy_values():
    assert entropy(cfg_from(ABC)) == pytest.approx(1.039721, abs=1e-6)
    assert entropy(cfg_from({"a": 7})) == 0.0
    uniform = cfg_from({f"c{i}": 1 for i in range(5)}, focal="c0")
    assert entropy(uniform) == pytest.approx(math.log(5))


def test_normalized_entropy_values():
    assert normalized_entropy(cfg_from(ABC)) == pytest.approx(0.946395, abs=1e-6)
    uniform = cfg_from({f"c{i}": 3 for i in range(4)}, focal="c0")
    assert normalized_entropy(uniform) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        normalized_entropy(cfg_from({"a": 4}))


def test_disequilibrium_values():
    assert disequilibrium(cfg_from(ABC)) == pytest.approx(1 / 24, abs=1e-9)
    # exact value 56454/90000, frozen from the Fraction oracle
    assert disequilibrium(cfg_from({"a": 98, "b": 1, "c": 1})) == pytest.approx(
        0.6272666666666666, abs=1e-9
    )
    uniform = cfg_from({f"c{i}": 2 for i in range(7)}, focal="c0")
    assert disequilibrium(uniform) == pytest.approx(0.0, abs=1e-15)


def test_complexity_values():
    assert complexity(cfg_from(ABC)) == pytest.approx(0.039433, abs=1e-6)
    uniform = cfg_from({f"c{i}": 1 for i in range(5)}, focal="c0")
    assert complexity(uniform) == pytest.approx(0.0, abs=1e-15)


def test_sense_metrics_bundle_is_consistent():
    cfg = cfg_from(ABC)
    metrics = sense_metrics(cfg)
    assert metrics.dim == dimension(cfg)
    assert metrics.h == entropy(cfg)
    assert metrics.complexity == metrics.h_norm * metrics.diseq


# --- invariants ------------------------------------------------------------


def random_config(rng, max_dim=30, max_mult=50):
    k = int(rng.integers(2, max_dim + 1))
    counts = {f"c{i}": int(rng.integers(1, max_mult + 1)) for i in range(k)}
    return cfg_from(counts, focal="c0")


def test_partition_identity_random():
    rng = np.random.default_rng(0)
    for _ in range(200):
        cfg = random_config(rng)
        assert abs(entropy(cfg) + partition_log_prob(cfg) / cfg.total) < 1e-10


def test_entropy_bounds_and_uniform_equality():
    rng = np.random.default_rng(1)
    for _ in range(100):
        cfg = random_config(rng)
        h = entropy(cfg)
        assert -1e-12 <= h <= math.log(dimension(cfg)) + 1e-12
    uniform = cfg_from({f"c{i}": 4 for i in range(9)}, focal="c0")
    assert entropy(uniform) == pytest.approx(math.log(9))


def test_permutation_invariance():
    rng = np.random.default_rng(2)
    cfg = random_config(rng)
    reversed_cfg = Configuration(
        focal=cfg.focal, entries=tuple(reversed(cfg.entries)), total=cfg.total
    )
    assert sense_metrics(cfg) == sense_metrics(reversed_cfg)


def test_scaling_multiplicities_preserves_distribution_metrics():
    rng = np.random.default_rng(3)
    for scale in (2, 5):
        cfg = random_config(rng)
        scaled = Configuration(
            focal=cfg.focal,
            entries=tuple((c, m * scale) for c, m in cfg.entries),
            total=cfg.total * scale,
        )
        assert entropy(scaled) == pytest.approx(entropy(cfg), abs=1e-12)
        assert normalized_entropy(scaled) == pytest.approx(
            normalized_entropy(cfg), abs=1e-12
        )
        assert disequilibrium(scaled) == pytest.approx(disequilibrium(cfg), abs=1e-12)
        assert complexity(scaled) == pytest.approx(complexity(cfg), abs=1e-12)


def test_complexity_zero_only_for_uniform():
    rng = np.random.default_rng(4)
    for _ in range(50):
        cfg = random_config(rng)
        mults = {m for _, m in cfg.entries}
        if len(mults) > 1:
            assert complexity(cfg) > 0.0
        else:
            assert complexity(cfg) == pytest.approx(0.0, abs=1e-15)


def test_validate_rejects_broken_configurations():
    with pytest.raises(ValueError):
        Configuration(focal=0, entries=((0, 1), (0, 2)), total=3).validate()
    with pytest.raises(ValueError):
        Configuration(focal=0, entries=((0, 1), (1, 2)), total=4).validate()
    with pytest.raises(ValueError):
        Configuration(focal=9, entries=((0, 1), (1, 2)), total=3).validate()


# --- oracle cross-checks -----------------------------------------------------


def test_metrics_match_exact_integer_oracle():
    rng = np.random.default_rng(5)
    for _ in range(30):
        counts = {f"c{i}": int(rng.integers(1, 9)) for i in range(int(rng.integers(2, 7)))}
        cfg = cfg_from(counts, focal="c0")
        assert homeomorphism_log_count(cfg) == pytest.approx(
            oracles.log_nu(counts), abs=1e-9
        )
        assert partition_log_prob(cfg) == pytest.approx(
            oracles.log_partition_prob(counts), abs=1e-9
        )
        assert entropy(cfg) == pytest.approx(oracles.entropy(counts), abs=1e-9)
        assert entropy(cfg) == pytest.approx(oracles.entropy_shannon(counts), abs=1e-9)
        assert normalized_entropy(cfg) == pytest.approx(
            oracles.normalized_entropy(counts), abs=1e-9
        )
        assert disequilibrium(cfg) == pytest.approx(
            oracles.disequilibrium(counts), abs=1e-9
        )
        assert complexity(cfg) == pytest.approx(oracles.complexity(counts), abs=1e-9)
