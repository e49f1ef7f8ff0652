"""Cohort data model, metadata-dump ingestion and disease-term filtering.

The catalog line format is one JSON object per line with keys: accession,
title, summary, pmid, publication_title, disease, po, as, ph, ti (the last
four are lists of raw strings). Publication metadata is expected pre-joined
in the dump; nothing is fetched over the network.
"""

from __future__ import annotations

import hashlib
import json
import re
from functools import cached_property
from dataclasses import dataclass, field, replace

DIMENSIONS = ("Po", "As", "Ph", "Ti")

# dimension label -> key in the line format / attribute on CohortRecord
_DIM_KEYS = {"Po": "po", "As": "as", "Ph": "ph", "Ti": "ti"}
_DIM_ATTRS = {"Po": "po", "As": "as_", "Ph": "ph", "Ti": "ti"}


class CatalogParseError(ValueError):
    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


class DuplicateAccessionError(ValueError):
    def __init__(self, accession: str):
        super().__init__(f"duplicate accession {accession!r}")
        self.accession = accession


@dataclass(frozen=True)
class CohortRecord:
    """One omics study with raw values for the four metadata dimensions."""

    accession: str
    title: str = ""
    summary: str = ""
    pmid: str | None = None
    publication_title: str | None = None
    disease: str = ""
    po: tuple[str, ...] = ()
    as_: tuple[str, ...] = ()
    ph: tuple[str, ...] = ()
    ti: tuple[str, ...] = ()

    def values(self, dimension: str) -> tuple[str, ...]:
        return getattr(self, _DIM_ATTRS[dimension])

    def with_values(self, dimension: str, values: tuple[str, ...]) -> "CohortRecord":
        return replace(self, **{_DIM_ATTRS[dimension]: values})


@dataclass
class CohortCatalog:
    records: list[CohortRecord] = field(default_factory=list)
    source_digest: str = ""

    def __len__(self) -> int:
        return len(self.records)

    @cached_property
    def by_accession(self) -> dict[str, CohortRecord]:
        # records are never mutated after parse, so caching is safe
        return {record.accession: record for record in self.records}


@dataclass(frozen=True)
class DiseaseTermSet:
    """Disease-specific match strings; the canonical label is always a member."""

    disease: str
    terms: tuple[str, ...]

    def __post_init__(self):
        if not self.terms:
            raise ValueError("terms must be non-empty")
        lowered = {t.lower() for t in self.terms}
        if self.disease.lower() not in lowered:
            object.__setattr__(self, "terms", (self.disease, *self.terms))


def _record_from_mapping(obj: dict, lineno: int) -> CohortRecord:
    accession = obj.get("accession")
    if not isinstance(accession, str) or not accession:
        raise CatalogParseError("missing or empty accession", lineno)
    dims = {}
    for label in DIMENSIONS:
        raw = obj.get(_DIM_KEYS[label], [])
        if raw is None:
            raw = []
        if not isinstance(raw, list) or any(not isinstance(v, str) for v in raw):
            raise CatalogParseError(f"{_DIM_KEYS[label]} must be a list of strings", lineno)
        if any(not v for v in raw):
            raise CatalogParseError(f"empty string in {_DIM_KEYS[label]}", lineno)
        dims[_DIM_ATTRS[label]] = tuple(raw)
    pmid = obj.get("pmid")
    publication_title = obj.get("publication_title")
    return CohortRecord(
        accession=accession,
        title=obj.get("title", "") or "",
        summary=obj.get("summary", "") or "",
        pmid=str(pmid) if pmid not in (None, "") else None,
        publication_title=publication_title if publication_title else None,
        disease=obj.get("disease", "") or "",
        **dims,
    )


def parse_catalog(stream) -> CohortCatalog:
    """Parse a line-delimited record stream, preserving input order.

    `stream` is an iterable of text lines (an open file works). Raises
    CatalogParseError with the offending line number on malformed input and
    DuplicateAccessionError when an accession occurs twice.
    """
    records: list[CohortRecord] = []
    seen: set[str] = set()
    digest = hashlib.sha256()
    for lineno, line in enumerate(stream, start=1):
        digest.update(line.encode("utf-8"))
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise CatalogParseError(f"invalid record: {exc.msg}", lineno) from exc
        if not isinstance(obj, dict):
            raise CatalogParseError("record must be a mapping", lineno)
        record = _record_from_mapping(obj, lineno)
        if record.accession in seen:
            raise DuplicateAccessionError(record.accession)
        seen.add(record.accession)
        records.append(record)
    return CohortCatalog(records=records, source_digest=digest.hexdigest())


def record_to_mapping(record: CohortRecord) -> dict:
    obj = {
        "accession": record.accession,
        "title": record.title,
        "summary": record.summary,
        "disease": record.disease,
        "po": list(record.po),
        "as": list(record.as_),
        "ph": list(record.ph),
        "ti": list(record.ti),
    }
    if record.pmid is not None:
        obj["pmid"] = record.pmid
    if record.publication_title is not None:
        obj["publication_title"] = record.publication_title
    return obj


def write_catalog(records, sink) -> None:
    if isinstance(records, CohortCatalog):
        records = records.records
    for record in records:
        sink.write(json.dumps(record_to_mapping(record), ensure_ascii=False) + "\n")


# Sentence boundary: '.', '!' or '?' followed by whitespace or end-of-text.
# Abbreviations are not special-cased; the filter tolerates over-segmentation.
_SENTENCE_SPLIT = re.compile(r"(?<=[.!?])(?:\s+|$)")


def split_sentences(text: str) -> list[str]:
    return [part for part in _SENTENCE_SPLIT.split(text) if part and part.strip()]


def strip_boilerplate(summary: str) -> str:
    """Drop the first and last sentences; texts with <= 2 sentences yield ""."""
    sentences = split_sentences(summary)
    if len(sentences) <= 2:
        return ""
    return " ".join(sentences[1:-1])


def _term_pattern(term: str) -> re.Pattern:
    # Word-boundary substring: no match inside a longer alphanumeric token.
    return re.compile(r"(?<!\w)" + re.escape(term) + r"(?!\w)", re.IGNORECASE)


def _record_matches(record: CohortRecord, patterns: list[re.Pattern]) -> bool:
    fields = [record.title]
    if record.publication_title is not None:
        fields.append(record.publication_title)
    fields.append(strip_boilerplate(record.summary))
    searchable = "\n".join(fields)
    return any(p.search(searchable) for p in patterns)


def filter_disease(catalog: CohortCatalog, terms: DiseaseTermSet) -> CohortCatalog:
    """Retain records where some term appears (case-insensitive, on word
    boundaries) in the title, the publication title, or the summary with its
    first and last sentences excluded. Order is preserved."""
    patterns = [_term_pattern(t) for t in terms.terms]
    kept = [r for r in catalog.records if _record_matches(r, patterns)]
    return CohortCatalog(records=kept, source_digest=catalog.source_digest)


def filter_disease_multi(catalog: CohortCatalog,
                         term_sets: dict[str, DiseaseTermSet]) -> CohortCatalog:
    """Apply filter_disease record-wise using each record's own disease label.
    Records whose disease has no term set are dropped."""
    patterns = {d: [_term_pattern(t) for t in ts.terms] for d, ts in term_sets.items()}
    kept = []
    for record in catalog.records:
        pats = patterns.get(record.disease)
        if pats and _record_matches(record, pats):
            kept.append(record)
    return CohortCatalog(records=kept, source_digest=catalog.source_digest)


def load_term_sets(source) -> dict[str, DiseaseTermSet]:
    """Read a {disease: [terms...]} mapping from a JSON text stream."""
    data = json.load(source)
    if not isinstance(data, dict):
        raise ValueError("term set file must be a mapping of disease to term list")
    return {
        disease: DiseaseTermSet(disease, tuple(terms))
        for disease, terms in data.items()
    }
