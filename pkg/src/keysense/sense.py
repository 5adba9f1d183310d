"""Per-concept sense profiles and their information-theoretic metrics.

A sense is summarized by its configuration: the focal concept, every
concept co-occurring in its orbit, and the multiplicity of each (how many
orbit documents contain it).  All metrics here are pure functions of that
multiplicity multiset, evaluated in natural log; counts of self-maps and
partition probabilities are kept in log space so configurations with
hundreds of thousands of documents do not overflow.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

import numpy as np

from .corpus import CorpusIndex
from .errors import EmptyOrbitError


@dataclass(frozen=True)
class Configuration:
    """A focal concept with the multiplicities of its spectrum.

    ``entries`` maps every concept occurring in at least one orbit document
    to the number of orbit documents containing it; the focal concept is
    always present with multiplicity equal to the orbit size.  ``total`` is
    the sum of all multiplicities.
    """

    focal: int
    entries: tuple[tuple[int, int], ...]
    total: int

    def multiplicities(self) -> np.ndarray:
        # canonical (sorted) order makes every metric exactly invariant
        # under entry permutations despite float summation
        return np.sort(np.array([m for _, m in self.entries], dtype=np.float64))

    def validate(self) -> None:
        """Check structural invariants; raises ValueError on violation."""
        ids = [c for c, _ in self.entries]
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate concept in configuration entries")
        if any(m < 1 for _, m in self.entries):
            raise ValueError("multiplicities must be positive")
        if sum(m for _, m in self.entries) != self.total:
            raise ValueError("total does not match entry sum")
        if self.focal not in set(ids):
            raise ValueError("focal concept missing from entries")


@dataclass(frozen=True)
class SenseMetrics:
    """The full single-sense metric record.

    ``nu_log`` and ``log_prob`` are natural logs of the self-map count and
    the partition probability; ``h`` is Shannon entropy in nats.
    """

    dim: int
    nu_log: float
    log_prob: float
    h: float
    h_norm: float
    diseq: float
    complexity: float


def build_configuration(
    index: CorpusIndex,
    focal: int,
    year_range: tuple[int, int] | None = None,
) -> Configuration:
    """Enumerate the orbit of ``focal`` (optionally year-restricted) into a configuration."""
    positions = index.orbit_positions(focal)
    if year_range is not None:
        lo, hi = year_range
        positions = [p for p in positions if lo <= index.documents[p].year <= hi]
    if len(positions) == 0:
        raise EmptyOrbitError(
            f"concept {focal} has no documents in range {year_range}"
        )
    label_to_id = index._label_to_id
    counts: Counter = Counter()
    for pos in positions:
        for kw in index.documents[pos].keywords:
            counts[label_to_id[kw]] += 1
    entries = tuple(sorted(counts.items()))
    return Configuration(focal=focal, entries=entries, total=sum(counts.values()))


def dimension(cfg: Configuration) -> int:
    """Number of distinct concepts in the spectrum, the focal one included."""
    return len(cfg.entries)


def homeomorphism_log_count(cfg: Configuration) -> float:
    """Log count of multiplicity-preserving self-maps: sum of m*ln(m)."""
    m = cfg.multiplicities()
    return float(np.sum(m * np.log(m)))


def partition_log_prob(cfg: Configuration) -> float:
    """Log probability of the orbit partition among all M^M self-maps."""
    M = float(cfg.total)
    return homeomorphism_log_count(cfg) - M * float(np.log(M))


def entropy(cfg: Configuration) -> float:
    """Shannon entropy (nats) of the multiplicity distribution."""
    p = cfg.multiplicities() / cfg.total
    return float(-np.sum(p * np.log(p)))


def normalized_entropy(cfg: Configuration) -> float:
    """Entropy divided by its maximum ln(dim); requires dim >= 2."""
    k = dimension(cfg)
    if k < 2:
        raise ValueError("normalized entropy undefined for dimension < 2")
    return entropy(cfg) / float(np.log(k))


def disequilibrium(cfg: Configuration) -> float:
    """Squared deviation of the multiplicity distribution from uniform."""
    k = dimension(cfg)
    p = cfg.multiplicities() / cfg.total
    return float(np.sum((p - 1.0 / k) ** 2))


def complexity(cfg: Configuration) -> float:
    """Statistical complexity: normalized entropy times disequilibrium."""
    return normalized_entropy(cfg) * disequilibrium(cfg)


def sense_metrics(cfg: Configuration) -> SenseMetrics:
    """Compute the whole metric record for one configuration."""
    h = entropy(cfg)
    h_norm = normalized_entropy(cfg)
    d = disequilibrium(cfg)
    return SenseMetrics(
        dim=dimension(cfg),
        nu_log=homeomorphism_log_count(cfg),
        log_prob=partition_log_prob(cfg),
        h=h,
        h_norm=h_norm,
        diseq=d,
        complexity=h_norm * d,
    )
