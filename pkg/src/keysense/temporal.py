"""Generations of senses and time-resolved aggregates.

The timeline is segmented wherever the cumulative count of distinct
senses first doubles relative to the previous segment boundary.  Each
sense belongs to the generation in which it first occurs; senses present
in every generation's span form the discourse core.  Per-generation
means of complexity and normalized entropy (computed on year-restricted
orbits) place each cohort on the complexity-entropy plane.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

from .corpus import CorpusIndex
from .errors import DataError, EmptyOrbitError
from .sense import build_configuration, complexity, dimension, normalized_entropy


@dataclass(frozen=True)
class GenerationSpan:
    """One generation's inclusive year interval."""

    generation: int
    start: int
    end: int


@dataclass(frozen=True)
class GenerationAggregate:
    """Table row describing one generation's cohort."""

    generation: int
    start: int
    end: int
    total_senses: int
    new_senses: int
    share_new: float
    mean_dim: float
    mean_h_norm: float
    mean_complexity: float


@dataclass(frozen=True)
class GenerationTable:
    boundaries: tuple[int, ...]
    spans: tuple[GenerationSpan, ...]
    assignments: Mapping[int, int]
    aggregates: tuple[GenerationAggregate, ...]

    def generation_of_year(self, year: int) -> int:
        for span in self.spans:
            if span.start <= year <= span.end:
                return span.generation
        raise ValueError(f"year {year} outside the generation spans")


def first_occurrence_years(index: CorpusIndex) -> dict[int, int]:
    """Year each concept first appears in."""
    first: dict[int, int] = {}
    for doc in index.documents:
        for kw in doc.keywords:
            cid = index._label_to_id[kw]
            if cid not in first or doc.year < first[cid]:
                first[cid] = doc.year
    return first


def generation_boundaries(index: CorpusIndex) -> list[int]:
    """Years where the cumulative distinct-sense count first doubles.

    The scan walks data years in ascending order; the reference count is the
    cumulative total at the end of the first year, and moves to the boundary
    year's total whenever a boundary fires.  Needs at least two years of data.
    """
    years = index.years()
    if len(years) < 2:
        raise DataError("generation boundaries need at least 2 years of data")
    first = first_occurrence_years(index)
    new_by_year: dict[int, int] = {}
    for cid, year in first.items():
        new_by_year[year] = new_by_year.get(year, 0) + 1

    boundaries: list[int] = []
    cumulative = new_by_year.get(years[0], 0)
    reference = cumulative
    for year in years[1:]:
        cumulative += new_by_year.get(year, 0)
        if reference > 0 and cumulative >= 2 * reference:
            boundaries.append(year)
            reference = cumulative
    return boundaries


def assign_generations(
    index: CorpusIndex, boundaries: Sequence[int]
) -> GenerationTable:
    """Assign every sense to a generation by first occurrence and aggregate.

    ``boundaries`` are the years that open generations 2..g; the full data
    range supplies the outer limits.  Per-generation metric means are taken
    over the full-period configurations of the cohort.
    """
    years = index.years()
    if not years:
        raise DataError("empty index")
    bounds = sorted(boundaries)
    if bounds and not (years[0] < bounds[0] and bounds[-1] <= years[-1]):
        raise DataError(
            f"boundaries {bounds} must fall inside the data years "
            f"({years[0]}..{years[-1]})"
        )
    starts = [years[0]] + bounds
    ends = bounds + [years[-1]]
    spans = tuple(
        GenerationSpan(g, start, end if g == len(starts) else end - 1)
        for g, (start, end) in enumerate(zip(starts, ends), start=1)
    )

    first = first_occurrence_years(index)
    assignments: dict[int, int] = {}
    for cid, year in first.items():
        for span in spans:
            if span.start <= year <= span.end:
                assignments[cid] = span.generation
                break
        else:
            raise DataError(f"concept {cid} first occurs outside the spans")

    # senses active within each span (not only the new ones)
    active: dict[int, set[int]] = {span.generation: set() for span in spans}
    for doc in index.documents:
        for span in spans:
            if span.start <= doc.year <= span.end:
                for kw in doc.keywords:
                    active[span.generation].add(index._label_to_id[kw])
                break

    total_senses = index.n_concepts
    aggregates = []
    for span in spans:
        cohort = [cid for cid, g in assignments.items() if g == span.generation]
        dims, hns, cs = [], [], []
        for cid in cohort:
            cfg = build_configuration(index, cid)
            dims.append(dimension(cfg))
            if dimension(cfg) >= 2:
                hns.append(normalized_entropy(cfg))
                cs.append(complexity(cfg))
        aggregates.append(
            GenerationAggregate(
                generation=span.generation,
                start=span.start,
                end=span.end,
                total_senses=len(active[span.generation]),
                new_senses=len(cohort),
                share_new=len(cohort) / total_senses if total_senses else 0.0,
                mean_dim=float(sum(dims) / len(dims)) if dims else float("nan"),
                mean_h_norm=float(sum(hns) / len(hns)) if hns else float("nan"),
                mean_complexity=float(sum(cs) / len(cs)) if cs else float("nan"),
            )
        )
    return GenerationTable(
        boundaries=tuple(bounds),
        spans=spans,
        assignments=assignments,
        aggregates=tuple(aggregates),
    )


def core_senses(table: GenerationTable, index: CorpusIndex) -> set[int]:
    """Senses occurring in every generation's year span."""
    occurs: dict[int, set[int]] = {}
    for doc in index.documents:
        gen = table.generation_of_year(doc.year)
        for kw in doc.keywords:
            occurs.setdefault(index._label_to_id[kw], set()).add(gen)
    all_gens = {span.generation for span in table.spans}
    return {cid for cid, gens in occurs.items() if gens == all_gens}


def longevity_strata(
    table: GenerationTable, index: CorpusIndex
) -> dict[int, tuple[int, float]]:
    """Mean full-period dimension by the number of generations a sense spans.

    Returns ``{generations_present: (sense_count, mean_dim)}``; the top
    stratum is the core.
    """
    occurs: dict[int, set[int]] = {}
    for doc in index.documents:
        gen = table.generation_of_year(doc.year)
        for kw in doc.keywords:
            occurs.setdefault(index._label_to_id[kw], set()).add(gen)
    strata: dict[int, list[int]] = {}
    for cid, gens in occurs.items():
        cfg = build_configuration(index, cid)
        strata.setdefault(len(gens), []).append(dimension(cfg))
    return {
        k: (len(dims), float(sum(dims) / len(dims))) for k, dims in sorted(strata.items())
    }


@dataclass(frozen=True)
class GenerationPlane:
    """Per-generation mean (complexity, normalized entropy) over sense-years."""

    means: Mapping[int, tuple[float, float] | None]
    sense_years: Mapping[int, int]
    skipped: int


def generation_plane(index: CorpusIndex, table: GenerationTable) -> GenerationPlane:
    """Average year-restricted complexity and normalized entropy by generation.

    Every (sense, year) pair with a nonempty year orbit contributes one
    point, attributed to the sense's generation.  Pairs whose year-restricted
    spectrum has fewer than two concepts are skipped and counted.
    """
    sums: dict[int, list[float]] = {
        span.generation: [0.0, 0.0] for span in table.spans
    }
    counts: dict[int, int] = {span.generation: 0 for span in table.spans}
    skipped = 0

    years_of: dict[int, set[int]] = {}
    for doc in index.documents:
        for kw in doc.keywords:
            years_of.setdefault(index._label_to_id[kw], set()).add(doc.year)

    for cid in sorted(years_of):
        gen = table.assignments[cid]
        for year in sorted(years_of[cid]):
            try:
                cfg = build_configuration(index, cid, (year, year))
            except EmptyOrbitError:  # pragma: no cover - years_of guarantees orbit
                continue
            if dimension(cfg) < 2:
                skipped += 1
                continue
            sums[gen][0] += complexity(cfg)
            sums[gen][1] += normalized_entropy(cfg)
            counts[gen] += 1

    means: dict[int, tuple[float, float] | None] = {}
    for gen, n in counts.items():
        means[gen] = None if n == 0 else (sums[gen][0] / n, sums[gen][1] / n)
    return GenerationPlane(means=means, sense_years=counts, skipped=skipped)
