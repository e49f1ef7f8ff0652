"""Per-dimension ontology normalization and synonym expansion.

Each metadata dimension routes through a prioritized chain of synonym tables
(primary ontology first, then MeSH, then UMLS). Within each table an exact
pass runs before the fuzzy pass, and the first table yielding any match wins.
Matched raw values are rewritten to their canonical label; unmatched values
are kept verbatim so nothing silently disappears from the records.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .catalog import DIMENSIONS, CohortCatalog, CohortRecord
from .ontology import (
    DEFAULT_THRESHOLD,
    EFO,
    MESH,
    NCBI_TAXON,
    UBERON,
    UMLS,
    MatchResult,
    NO_MATCH,
    SynonymTable,
    lookup,
    normalize,
)

# Primary table per dimension; the fallback order is then MESH, UMLS.
# Ph has no dedicated primary ontology, so its route starts at EFO.
DEFAULT_ROUTES = {
    "Po": (NCBI_TAXON, MESH, UMLS),
    "As": (EFO, MESH, UMLS),
    "Ph": (EFO, MESH, UMLS),
    "Ti": (UBERON, MESH, UMLS),
}


class UnknownCanonicalError(KeyError):
    def __init__(self, canonical: str, dimension: str):
        super().__init__(f"no concept with canonical {canonical!r} on the {dimension} route")
        self.canonical = canonical
        self.dimension = dimension


@dataclass
class OntologyRegistry:
    """Ordered per-dimension synonym-table routes."""

    routes: dict[str, list[SynonymTable]]

    @classmethod
    def from_tables(cls, tables: dict[str, SynonymTable],
                    routes: dict[str, tuple[str, ...]] | None = None) -> "OntologyRegistry":
        """Build routes from tables keyed by ontology id; missing ontologies
        are simply skipped in the chain."""
        routes = routes or DEFAULT_ROUTES
        resolved = {
            dim: [tables[oid] for oid in routes[dim] if oid in tables]
            for dim in DIMENSIONS
        }
        return cls(routes=resolved)

    def tables_for(self, dimension: str) -> list[SynonymTable]:
        return self.routes.get(dimension, [])


@dataclass(frozen=True)
class NormalizedTerm:
    raw: str
    dimension: str
    match: MatchResult

    @property
    def canonical(self) -> str | None:
        return self.match.canonical


@dataclass
class VocabEntry:
    canonical: str
    synonyms: list[str]
    source_ontology: str
    match_kind: str


@dataclass
class AugmentedVocabulary:
    """Per-dimension canonical -> VocabEntry mapping. Within a dimension the
    union of all canonicals and synonyms is duplicate-free: the first writer
    wins and every collision is counted."""

    dims: dict[str, dict[str, VocabEntry]] = field(
        default_factory=lambda: {d: {} for d in DIMENSIONS})
    collisions: int = 0
    _seen: dict[str, dict[str, str]] = field(
        default_factory=lambda: {d: {} for d in DIMENSIONS}, repr=False)

    def add(self, dimension: str, canonical: str, synonyms: list[str],
            source_ontology: str, match_kind: str) -> None:
        seen = self._seen[dimension]
        entries = self.dims[dimension]
        if canonical in seen:
            if canonical not in entries:
                self.collisions += 1
            return
        kept = []
        for syn in synonyms:
            if syn in seen or syn == canonical:
                self.collisions += 1
                continue
            seen[syn] = canonical
            kept.append(syn)
        seen[canonical] = canonical
        entries[canonical] = VocabEntry(canonical, kept, source_ontology, match_kind)

    def terms(self, dimension: str) -> list[str]:
        """All vocabulary terms of one dimension: canonicals plus synonyms."""
        out = []
        for entry in self.dims[dimension].values():
            out.append(entry.canonical)
            out.extend(entry.synonyms)
        return out

    def canonical_of(self, dimension: str, term: str) -> str | None:
        return self._seen[dimension].get(term)

    def size(self) -> int:
        return sum(len(self.terms(d)) for d in DIMENSIONS)

    def to_mapping(self) -> dict:
        return {
            dim: {
                canonical: {
                    "synonyms": entry.synonyms,
                    "source": entry.source_ontology,
                    "kind": entry.match_kind,
                }
                for canonical, entry in entries.items()
            }
            for dim, entries in self.dims.items()
        }

    @classmethod
    def from_mapping(cls, data: dict) -> "AugmentedVocabulary":
        vocab = cls()
        for dim in DIMENSIONS:
            for canonical, entry in data.get(dim, {}).items():
                vocab.add(dim, canonical, list(entry["synonyms"]),
                          entry["source"], entry["kind"])
        return vocab


@dataclass
class DimensionStats:
    original_count: int = 0
    no_match: int = 0
    match: int = 0
    synonyms: int = 0
    ontology_counts: dict[str, int] = field(default_factory=dict)
    direct: int = 0
    fuzzy: int = 0
    final_count: int = 0


@dataclass
class AugmentationStats:
    dims: dict[str, DimensionStats] = field(
        default_factory=lambda: {d: DimensionStats() for d in DIMENSIONS})

    def to_mapping(self) -> dict:
        return {dim: vars(stats).copy() for dim, stats in self.dims.items()}

    @classmethod
    def from_mapping(cls, data: dict) -> "AugmentationStats":
        stats = cls()
        for dim, values in data.items():
            stats.dims[dim] = DimensionStats(**values)
        return stats


def normalize_term(raw: str, dimension: str, registry: OntologyRegistry,
                   threshold: float = DEFAULT_THRESHOLD) -> NormalizedTerm:
    """Try the dimension's tables in route order; the first table yielding a
    match (exact pass before fuzzy pass, as lookup does) wins."""
    for table in registry.tables_for(dimension):
        result = lookup(raw, table, threshold)
        if result.matched:
            return NormalizedTerm(raw=raw, dimension=dimension, match=result)
    return NormalizedTerm(raw=raw, dimension=dimension, match=NO_MATCH)


def expand_synonyms(canonical: str, dimension: str,
                    registry: OntologyRegistry) -> list[str]:
    """Synonym list of the concept owning `canonical`, resolved along the
    dimension's route; the canonical itself is never included."""
    key = normalize(canonical)
    for table in registry.tables_for(dimension):
        entry = table.entries.get(key)
        if entry is not None:
            return list(entry.synonyms)
    raise UnknownCanonicalError(canonical, dimension)


def augment_catalog(catalog: CohortCatalog, registry: OntologyRegistry,
                    threshold: float = DEFAULT_THRESHOLD,
                    ) -> tuple[AugmentedVocabulary, AugmentationStats, CohortCatalog]:
    """Normalize every distinct raw value per dimension exactly once, rewrite
    matched values in the records to their canonical label, and collect the
    synonym-expanded vocabulary plus the per-dimension tally."""
    vocab = AugmentedVocabulary()
    stats = AugmentationStats()
    resolved: dict[str, dict[str, NormalizedTerm]] = {d: {} for d in DIMENSIONS}

    for dimension in DIMENSIONS:
        dim_stats = stats.dims[dimension]
        seen = resolved[dimension]
        for record in catalog.records:
            for raw in record.values(dimension):
                if raw in seen:
                    continue
                term = normalize_term(raw, dimension, registry, threshold)
                seen[raw] = term
                dim_stats.original_count += 1
                if not term.match.matched:
                    dim_stats.no_match += 1
                    continue
                dim_stats.match += 1
                if term.match.kind == "exact":
                    dim_stats.direct += 1
                else:
                    dim_stats.fuzzy += 1
                source = term.match.ontology_id
                dim_stats.ontology_counts[source] = (
                    dim_stats.ontology_counts.get(source, 0) + 1)
                vocab.add(dimension, term.match.canonical,
                          expand_synonyms(term.match.canonical, dimension, registry),
                          source, term.match.kind)
        dim_stats.final_count = len(vocab.terms(dimension))
        dim_stats.synonyms = sum(
            len(e.synonyms) for e in vocab.dims[dimension].values())

    rewritten = []
    for record in catalog.records:
        new_record = record
        for dimension in DIMENSIONS:
            values = []
            for raw in record.values(dimension):
                term = resolved[dimension][raw]
                value = term.canonical if term.match.matched else raw
                if value not in values:
                    values.append(value)
            new_record = new_record.with_values(dimension, tuple(values))
        rewritten.append(new_record)

    normalized = CohortCatalog(records=rewritten, source_digest=catalog.source_digest)
    return vocab, stats, normalized


# --- report rendering ------------------------------------------------------

# Ontology column grouping of the summary table: the per-dimension primary
# ontologies share the first column.
_PRIMARY_GROUP = (EFO, NCBI_TAXON, UBERON)

REPORT_HEADER = (
    "Field\tOriginal Count\tNo Match\tMatch\tSynonyms\t"
    "EFO/NCBI/UBERON (%)\tMeSH (%)\tUMLS (%)\tDirect (%)\tFuzzy (%)\tFinal Count"
)


def _count_pct(count: int, denominator: int) -> str:
    pct = 100.0 * count / denominator if denominator else 0.0
    return f"{count} ({pct:.2f})"


def augmentation_report(stats: AugmentationStats) -> str:
    """Tab-separated synonym-augmentation summary, one row per dimension.
    Percentages are derived (two decimals), never stored."""
    lines = [REPORT_HEADER]
    for dimension in DIMENSIONS:
        s = stats.dims[dimension]
        primary = sum(s.ontology_counts.get(o, 0) for o in _PRIMARY_GROUP)
        mesh = s.ontology_counts.get(MESH, 0)
        umls = s.ontology_counts.get(UMLS, 0)
        source_total = primary + mesh + umls
        kind_total = s.direct + s.fuzzy
        lines.append("\t".join([
            dimension,
            str(s.original_count),
            str(s.no_match),
            str(s.match),
            str(s.synonyms),
            _count_pct(primary, source_total),
            _count_pct(mesh, source_total),
            _count_pct(umls, source_total),
            _count_pct(s.direct, kind_total),
            _count_pct(s.fuzzy, kind_total),
            str(s.final_count),
        ]))
    return "\n".join(lines) + "\n"


def write_vocabulary(vocab: AugmentedVocabulary, sink) -> None:
    json.dump(vocab.to_mapping(), sink, ensure_ascii=False, indent=2)
    sink.write("\n")


def load_vocabulary(source) -> AugmentedVocabulary:
    return AugmentedVocabulary.from_mapping(json.load(source))


ONTOLOGY_FILE_NAMES = {
    "efo.owl": EFO,
    "uberon.owl": UBERON,
    "ncbi_taxon.owl": NCBI_TAXON,
    "mesh.xml": MESH,
    "umls.tsv": UMLS,
}


def load_ontology_dir(directory) -> OntologyRegistry:
    """Load every recognized ontology file present in `directory` (by fixed
    file name, see ONTOLOGY_FILE_NAMES) into a registry; absent files just
    leave their ontology out of the routes."""
    from pathlib import Path

    from .ontology import load_umls_dict, parse_mesh_concepts, parse_owl_synonyms

    directory = Path(directory)
    tables = {}
    for name, ontology_id in ONTOLOGY_FILE_NAMES.items():
        path = directory / name
        if not path.is_file():
            continue
        if name.endswith(".owl"):
            tables[ontology_id] = parse_owl_synonyms(
                path.read_text(encoding="utf-8"), ontology_id)
        elif name.endswith(".xml"):
            tables[ontology_id] = parse_mesh_concepts(
                path.read_text(encoding="utf-8"))
        else:
            with path.open(encoding="utf-8") as source:
                tables[ontology_id] = load_umls_dict(source)
    return OntologyRegistry.from_tables(tables)
