"""Document-keyword corpus: parsing, cleaning, and the inverted index.

A corpus is a stream of records ``{id, year, keywords, refs?}``.  Ingest
normalizes keyword labels, removes document-type terms and malformed
labels, drops documents left with fewer than two distinct concepts, and
freezes everything into an immutable :class:`CorpusIndex`.  The index
maps every concept to its orbit (the documents mentioning it) and every
year to its document slice, which is all the downstream metric machinery
needs.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import unicodedata
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

from .errors import DataError, DuplicateDocumentError, MalformedRecordError

#: Keyword labels that mark a document type rather than a concept.
DEFAULT_BLACKLIST = frozenset(
    {"book", "thesis", "report", "lectures", "talk", "proceedings"}
)

MAX_LABEL_LENGTH = 120


def normalize_label(raw: str) -> str:
    """Lowercase, trim, and collapse internal whitespace of a keyword label."""
    return " ".join(raw.lower().split())


def _label_is_valid(label: str) -> bool:
    if not label or len(label) > MAX_LABEL_LENGTH:
        return False
    return not any(unicodedata.category(ch) == "Cc" for ch in label)


@dataclass(frozen=True)
class CleaningConfig:
    """Knobs for the ingest pipeline.

    ``year_min``/``year_max`` bound the analysis window (inclusive); records
    outside it are skipped and counted, never errors.  ``blacklist`` holds
    normalized document-type labels removed before the minimum-size rule.
    """

    blacklist: frozenset[str] = DEFAULT_BLACKLIST
    year_min: int | None = None
    year_max: int | None = None

    def year_in_window(self, year: int) -> bool:
        if self.year_min is not None and year < self.year_min:
            return False
        if self.year_max is not None and year > self.year_max:
            return False
        return True

    @staticmethod
    def with_blacklist_file(path: str | Path, **kwargs) -> "CleaningConfig":
        """Build a config whose blacklist is read from a newline-separated file."""
        terms = set()
        for line in Path(path).read_text(encoding="utf-8").splitlines():
            term = normalize_label(line)
            if term and not term.startswith("#"):
                terms.add(term)
        return CleaningConfig(blacklist=frozenset(terms), **kwargs)


@dataclass(frozen=True)
class Document:
    """One publication record after cleaning.

    ``keywords`` are normalized, duplicate-free, and ordered by first
    appearance; ``refs`` lists cited document ids, possibly unresolvable.
    """

    id: str
    year: int
    keywords: tuple[str, ...]
    refs: tuple[str, ...] = ()


@dataclass(frozen=True)
class Concept:
    """A normalized keyword with its dense integer handle."""

    id: int
    label: str


@dataclass
class IngestReport:
    """Counters emitted alongside the index, serialized as JSON."""

    records_read: int = 0
    documents_kept: int = 0
    dropped_documents: int = 0
    dropped_keywords: int = 0
    skipped_years: int = 0
    unresolved_refs: int = 0
    concepts: int = 0

    def to_json(self) -> str:
        return json.dumps(self.__dict__, indent=2, sort_keys=True) + "\n"


@dataclass(frozen=True)
class CorpusIndex:
    """Immutable inverted index over a cleaned corpus.

    Safe for shared read access from any number of workers.  ``by_concept``
    holds each concept's orbit as a sorted, duplicate-free tuple of document
    ids; ``by_year`` partitions documents by calendar year.
    """

    documents: tuple[Document, ...]
    concepts: tuple[Concept, ...]
    by_concept: Mapping[int, tuple[str, ...]]
    by_year: Mapping[int, tuple[str, ...]]
    _doc_pos: Mapping[str, int] = field(repr=False)
    _orbit_pos: Mapping[int, np.ndarray] = field(repr=False)
    _label_to_id: Mapping[str, int] = field(repr=False)

    # -- lookups ---------------------------------------------------------

    @property
    def n_documents(self) -> int:
        return len(self.documents)

    @property
    def n_concepts(self) -> int:
        return len(self.concepts)

    def concept_id(self, label: str) -> int:
        try:
            return self._label_to_id[normalize_label(label)]
        except KeyError:
            raise KeyError(f"unknown concept label {label!r}") from None

    def label(self, concept: int) -> str:
        return self.concepts[concept].label

    def document(self, doc_id: str) -> Document:
        return self.documents[self._doc_pos[doc_id]]

    def orbit(self, concept: int) -> tuple[str, ...]:
        """Sorted document ids mentioning ``concept``."""
        return self.by_concept[concept]

    def orbit_positions(self, concept: int) -> np.ndarray:
        """Orbit as sorted positions into ``documents`` (internal fast path)."""
        return self._orbit_pos[concept]

    def years(self) -> tuple[int, ...]:
        return tuple(sorted(self.by_year))

    def yearly_slice(self, year: int) -> tuple[Document, ...]:
        """Documents published in ``year``; empty tuple when there are none."""
        ids = self.by_year.get(year, ())
        return tuple(self.documents[self._doc_pos[i]] for i in ids)

    def documents_in_range(self, year_range: tuple[int, int] | None) -> tuple[int, ...]:
        """Document positions within the inclusive ``(start, end)`` year range."""
        if year_range is None:
            return tuple(range(len(self.documents)))
        lo, hi = year_range
        return tuple(
            pos for pos, doc in enumerate(self.documents) if lo <= doc.year <= hi
        )

    # -- serialization ----------------------------------------------------

    def to_json(self) -> str:
        """Canonical JSON for the artifact store; stable across runs."""
        payload = {
            "documents": [
                {
                    "id": d.id,
                    "year": d.year,
                    "keywords": list(d.keywords),
                    "refs": list(d.refs),
                }
                for d in self.documents
            ],
            "concepts": [c.label for c in self.concepts],
        }
        return json.dumps(payload, sort_keys=True, separators=(",", ":")) + "\n"

    def digest(self) -> str:
        """Content hash of the cleaned corpus, identical across input encodings."""
        return hashlib.sha256(self.to_json().encode("utf-8")).hexdigest()

    @staticmethod
    def from_json(text: str) -> "CorpusIndex":
        payload = json.loads(text)
        docs = [
            Document(
                id=d["id"],
                year=int(d["year"]),
                keywords=tuple(d["keywords"]),
                refs=tuple(d.get("refs", ())),
            )
            for d in payload["documents"]
        ]
        labels = list(payload["concepts"])
        return _build_index(docs, labels)


def _build_index(documents: Sequence[Document], labels: Sequence[str]) -> CorpusIndex:
    label_to_id = {lab: i for i, lab in enumerate(labels)}
    concepts = tuple(Concept(i, lab) for i, lab in enumerate(labels))
    doc_pos = {d.id: i for i, d in enumerate(documents)}

    orbit_ids: dict[int, list[str]] = {i: [] for i in range(len(labels))}
    orbit_pos: dict[int, list[int]] = {i: [] for i in range(len(labels))}
    by_year: dict[int, list[str]] = {}
    for pos, doc in enumerate(documents):
        by_year.setdefault(doc.year, []).append(doc.id)
        for kw in doc.keywords:
            cid = label_to_id[kw]
            orbit_ids[cid].append(doc.id)
            orbit_pos[cid].append(pos)

    return CorpusIndex(
        documents=tuple(documents),
        concepts=concepts,
        by_concept={c: tuple(sorted(ids)) for c, ids in orbit_ids.items()},
        by_year={y: tuple(ids) for y, ids in by_year.items()},
        _doc_pos=doc_pos,
        _orbit_pos={c: np.array(sorted(p), dtype=np.int64) for c, p in orbit_pos.items()},
        _label_to_id=label_to_id,
    )


# ---------------------------------------------------------------------------
# Ingest
# ---------------------------------------------------------------------------

RawRecord = Mapping[str, object]


def _clean_keywords(
    raw_keywords: Iterable[str], config: CleaningConfig
) -> tuple[tuple[str, ...], int]:
    """Normalize, filter, and dedupe one document's keywords.

    Returns the kept labels (first-appearance order) and the number of
    keyword occurrences removed (blacklisted, malformed, or duplicate).
    """
    kept: list[str] = []
    seen: set[str] = set()
    dropped = 0
    for raw in raw_keywords:
        label = normalize_label(raw)
        if not _label_is_valid(label) or label in config.blacklist:
            dropped += 1
            continue
        if label in seen:
            dropped += 1
            continue
        seen.add(label)
        kept.append(label)
    return tuple(kept), dropped


def ingest_records(
    records: Iterable[tuple[int, RawRecord]],
    config: CleaningConfig | None = None,
    report: IngestReport | None = None,
) -> CorpusIndex:
    """Clean an iterable of ``(line_number, record)`` pairs into an index.

    Raises :class:`MalformedRecordError` for unusable records and
    :class:`DuplicateDocumentError` when a document id repeats; out-of-window
    years are skipped and counted instead.
    """
    config = config or CleaningConfig()
    report = report if report is not None else IngestReport()

    documents: list[Document] = []
    labels: list[str] = []
    label_seen: set[str] = set()
    ids_seen: set[str] = set()

    for line_no, rec in records:
        report.records_read += 1
        try:
            doc_id = str(rec["id"])
            year = int(rec["year"])  # type: ignore[arg-type]
            raw_keywords = rec["keywords"]
        except (KeyError, TypeError, ValueError) as exc:
            raise MalformedRecordError(line_no, f"missing or invalid field ({exc})")
        if not isinstance(raw_keywords, (list, tuple)):
            raise MalformedRecordError(line_no, "keywords must be a list")
        if not doc_id:
            raise MalformedRecordError(line_no, "empty document id")
        refs_raw = rec.get("refs") or ()
        if not isinstance(refs_raw, (list, tuple)):
            raise MalformedRecordError(line_no, "refs must be a list")

        if doc_id in ids_seen:
            raise DuplicateDocumentError(doc_id, line_no)
        ids_seen.add(doc_id)

        if not config.year_in_window(year):
            report.skipped_years += 1
            continue

        keywords, dropped = _clean_keywords([str(k) for k in raw_keywords], config)
        report.dropped_keywords += dropped
        if len(keywords) < 2:
            report.dropped_documents += 1
            continue

        documents.append(
            Document(id=doc_id, year=year, keywords=keywords, refs=tuple(str(r) for r in refs_raw))
        )
        for kw in keywords:
            if kw not in label_seen:
                label_seen.add(kw)
                labels.append(kw)

    report.documents_kept = len(documents)
    report.concepts = len(labels)
    # refs pointing at dropped or unknown records are unresolved
    kept_ids = {d.id for d in documents}
    report.unresolved_refs = sum(1 for d in documents for r in d.refs if r not in kept_ids)

    return _build_index(documents, labels)


def _iter_jsonl(text: str) -> Iterator[tuple[int, RawRecord]]:
    for line_no, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
        except json.JSONDecodeError as exc:
            raise MalformedRecordError(line_no, f"invalid JSON ({exc.msg})")
        if not isinstance(rec, dict):
            raise MalformedRecordError(line_no, "record is not an object")
        yield line_no, rec


def _iter_csv(text: str) -> Iterator[tuple[int, RawRecord]]:
    reader = csv.DictReader(io.StringIO(text))
    required = {"id", "year", "keywords"}
    if reader.fieldnames is None or not required.issubset(reader.fieldnames):
        raise MalformedRecordError(1, "CSV header must contain id, year, keywords")
    for line_no, row in enumerate(reader, start=2):
        if any(row.get(col) is None for col in required):
            raise MalformedRecordError(line_no, "short row")
        keywords = [k for k in (row["keywords"] or "").split(";") if k.strip()]
        refs = [r.strip() for r in (row.get("refs") or "").split(";") if r.strip()]
        yield line_no, {
            "id": row["id"],
            "year": row["year"],
            "keywords": keywords,
            "refs": refs,
        }


def ingest(
    source: str | Path,
    config: CleaningConfig | None = None,
    fmt: str | None = None,
    report: IngestReport | None = None,
) -> CorpusIndex:
    """Parse and clean a JSONL or CSV corpus file into a :class:`CorpusIndex`.

    ``fmt`` is ``"jsonl"`` or ``"csv"``; by default it is inferred from the
    file extension.  Raises :class:`DataError` when the file yields no records.
    """
    path = Path(source)
    if fmt is None:
        fmt = "csv" if path.suffix.lower() == ".csv" else "jsonl"
    text = path.read_text(encoding="utf-8")
    if fmt == "csv":
        records: Iterator[tuple[int, RawRecord]] = _iter_csv(text)
    elif fmt == "jsonl":
        records = _iter_jsonl(text)
    else:
        raise ValueError(f"unknown format {fmt!r}")

    report = report if report is not None else IngestReport()
    index = ingest_records(records, config, report)
    if report.records_read == 0:
        raise DataError(f"no records in {path}")
    return index


# ---------------------------------------------------------------------------
# Citation accounting
# ---------------------------------------------------------------------------


def citation_rates(index: CorpusIndex, window_years: int = 3) -> dict[int, float]:
    """Fractional citation rate per concept within a citation window.

    A citation from document ``z`` (year ``t_z``) to document ``y`` (year
    ``t_y``) counts iff ``0 <= t_z - t_y <= window_years`` and contributes
    ``1/k`` to each of the ``k`` concepts of ``y``.  Refs that do not resolve
    within the corpus are ignored.
    """
    if window_years < 0:
        raise ValueError("window_years must be nonnegative")
    rates = {c.id: 0.0 for c in index.concepts}
    for citing in index.documents:
        for ref in citing.refs:
            pos = index._doc_pos.get(ref)
            if pos is None:
                continue
            cited = index.documents[pos]
            lag = citing.year - cited.year
            if 0 <= lag <= window_years:
                share = 1.0 / len(cited.keywords)
                for kw in cited.keywords:
                    rates[index._label_to_id[kw]] += share
    return rates


def count_citation_events(index: CorpusIndex, window_years: int = 3) -> int:
    """Number of in-window, resolvable citation events (for conservation checks)."""
    events = 0
    for citing in index.documents:
        for ref in citing.refs:
            pos = index._doc_pos.get(ref)
            if pos is None:
                continue
            if 0 <= citing.year - index.documents[pos].year <= window_years:
                events += 1
    return events


def concept_counts_by_year(index: CorpusIndex, year: int) -> Counter:
    """How many documents of ``year`` mention each concept id."""
    counts: Counter = Counter()
    for doc in index.yearly_slice(year):
        for kw in doc.keywords:
            counts[index._label_to_id[kw]] += 1
    return counts
