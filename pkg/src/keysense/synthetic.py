"""Seeded synthetic document-keyword corpora for demos and validation.

Concept popularity follows a Zipf-like law so dimension and co-occurrence
populations come out heavy-tailed; yearly volume grows geometrically so
cumulative sense counts double a few times along the timeline; references
point a bounded number of years back so citation windows bite.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np


def synthetic_records(
    n_docs: int = 1000,
    n_concepts: int = 200,
    year_range: tuple[int, int] = (2000, 2009),
    seed: int = 0,
    keywords_per_doc: tuple[int, int] = (2, 8),
    refs_per_doc: tuple[int, int] = (0, 3),
    zipf_exponent: float = 1.2,
    yearly_growth: float = 1.25,
) -> list[dict]:
    """Generate raw ingest records (id, year, keywords, refs)."""
    rng = np.random.default_rng(seed)
    labels = [f"topic {i:04d}" for i in range(n_concepts)]
    popularity = (np.arange(1, n_concepts + 1, dtype=np.float64)) ** (-zipf_exponent)
    popularity /= popularity.sum()

    y0, y1 = year_range
    n_years = y1 - y0 + 1
    year_weights = yearly_growth ** np.arange(n_years)
    year_weights /= year_weights.sum()
    years = np.sort(rng.choice(np.arange(y0, y1 + 1), size=n_docs, p=year_weights))

    records: list[dict] = []
    for i in range(n_docs):
        k = int(rng.integers(keywords_per_doc[0], keywords_per_doc[1] + 1))
        k = min(k, n_concepts)
        chosen = rng.choice(n_concepts, size=k, replace=False, p=popularity)
        n_refs = int(rng.integers(refs_per_doc[0], refs_per_doc[1] + 1))
        candidates = [
            j for j in range(i) if 0 <= int(years[i]) - int(years[j]) <= 4
        ]
        refs = []
        if candidates and n_refs:
            picks = rng.choice(len(candidates), size=min(n_refs, len(candidates)), replace=False)
            refs = [f"doc-{candidates[p]:06d}" for p in sorted(picks)]
        records.append(
            {
                "id": f"doc-{i:06d}",
                "year": int(years[i]),
                "keywords": [labels[c] for c in sorted(chosen)],
                "refs": refs,
            }
        )
    return records


def write_jsonl(records: list[dict], path: str | Path) -> Path:
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec, sort_keys=True) + "\n")
    return path


def write_csv(records: list[dict], path: str | Path) -> Path:
    """Write the same records in the CSV encoding (semicolon-joined lists)."""
    import csv

    path = Path(path)
    with path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["id", "year", "keywords", "refs"])
        for rec in records:
            writer.writerow(
                [
                    rec["id"],
                    rec["year"],
                    ";".join(rec["keywords"]),
                    ";".join(rec.get("refs", [])),
                ]
            )
    return path
