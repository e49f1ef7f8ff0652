"""Synonym tables parsed from ontology sources, plus exact/fuzzy term lookup.

Three source formats are supported: OWL in RDF/XML serialization (labels in
rdfs:label, synonyms in oboInOwl hasExactSynonym), MeSH descriptor XML
(DescriptorRecord/ConceptList nesting), and a precompiled 3-column
tab-separated concept dictionary (CUI, preferred label, synonym).

All matching happens on normalized strings: lowercased, trimmed, internal
whitespace collapsed, surrounding quotes stripped.
"""

from __future__ import annotations

import re
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field

EFO = "EFO"
UBERON = "UBERON"
NCBI_TAXON = "NCBI_TAXON"
MESH = "MESH"
UMLS = "UMLS"
ONTOLOGY_IDS = (EFO, UBERON, NCBI_TAXON, MESH, UMLS)

DEFAULT_THRESHOLD = 80.0

_WS = re.compile(r"\s+")
_QUOTES = "\"'“”‘’"


class OntologyParseError(ValueError):
    """Raised when an ontology source document cannot be parsed."""

    def __init__(self, message: str, line: int | None = None):
        super().__init__(message if line is None else f"line {line}: {message}")
        self.line = line


def normalize(s: str) -> str:
    """Normal form used for every comparison: lowercase, trimmed, collapsed."""
    s = s.strip().strip(_QUOTES).strip()
    return _WS.sub(" ", s).lower()


@dataclass(frozen=True)
class ConceptEntry:
    concept_id: str
    canonical: str
    synonyms: tuple[str, ...]


@dataclass
class SynonymTable:
    """Concept entries of one ontology, keyed by normalized canonical label."""

    ontology_id: str
    entries: dict[str, ConceptEntry] = field(default_factory=dict)
    warnings: int = 0

    def add(self, concept_id: str, canonical: str, synonyms: list[str]) -> bool:
        """Add one concept; returns False (and counts a warning) on collision
        with an existing canonical, or when canonical/concept_id is empty."""
        canonical = normalize(canonical)
        if not canonical or not concept_id:
            self.warnings += 1
            return False
        if canonical in self.entries:
            self.warnings += 1
            return False
        seen: set[str] = {canonical}
        kept: list[str] = []
        for syn in synonyms:
            syn = normalize(syn)
            if syn and syn not in seen:
                seen.add(syn)
                kept.append(syn)
        self.entries[canonical] = ConceptEntry(concept_id, canonical, tuple(kept))
        return True

    def __len__(self) -> int:
        return len(self.entries)


@dataclass(frozen=True)
class MatchResult:
    matched: bool
    kind: str  # "exact" | "fuzzy" | "none"
    canonical: str | None = None
    concept_id: str | None = None
    ontology_id: str | None = None
    score: float = 0.0


NO_MATCH = MatchResult(matched=False, kind="none")


def levenshtein(a: str, b: str) -> int:
    """Minimum number of single-character insert/delete/substitute edits
    transforming a into b. Operates on Unicode scalar values."""
    if a == b:
        return 0
    if len(a) < len(b):
        a, b = b, a
    if not b:
        return len(a)
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        cur = [i]
        for j, cb in enumerate(b, start=1):
            cost = 0 if ca == cb else 1
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + cost))
        prev = cur
    return prev[-1]


def similarity_score(a: str, b: str) -> float:
    """Percentage similarity in [0, 100] between the normalized forms:
    100 * (1 - distance / max length). Two empty strings score 100."""
    na, nb = normalize(a), normalize(b)
    longest = max(len(na), len(nb))
    if longest == 0:
        return 100.0
    return 100.0 * (1.0 - levenshtein(na, nb) / longest)


def lookup(term: str, table: SynonymTable, threshold: float = DEFAULT_THRESHOLD) -> MatchResult:
    """Two-stage lookup: exact pass over canonicals and synonyms first, then
    best fuzzy candidate with score >= threshold. Ties break toward the higher
    score, then the lexicographically smaller canonical. The returned label is
    always the canonical of the winning concept."""
    nterm = normalize(term)

    exact_hits = []
    for canonical, entry in table.entries.items():
        if nterm == canonical or nterm in entry.synonyms:
            exact_hits.append(canonical)
    if exact_hits:
        winner = table.entries[min(exact_hits)]
        return MatchResult(True, "exact", winner.canonical, winner.concept_id,
                           table.ontology_id, 100.0)

    best: tuple[float, str] | None = None
    for canonical, entry in table.entries.items():
        for candidate in (canonical, *entry.synonyms):
            score = similarity_score(nterm, candidate)
            if score < threshold:
                continue
            if best is None or score > best[0] or (score == best[0] and canonical < best[1]):
                best = (score, canonical)
    if best is None:
        return NO_MATCH
    winner = table.entries[best[1]]
    return MatchResult(True, "fuzzy", winner.canonical, winner.concept_id,
                       table.ontology_id, best[0])


# --- OWL (RDF/XML) ---------------------------------------------------------

_OWL_CLASS = "{http://www.w3.org/2002/07/owl#}Class"
_RDF_ABOUT = "{http://www.w3.org/1999/02/22-rdf-syntax-ns#}about"
_RDFS_LABEL = "{http://www.w3.org/2000/01/rdf-schema#}label"
_EXACT_SYNONYM = "{http://www.geneontology.org/formats/oboInOwl#}hasExactSynonym"


def _uri_fragment(uri: str) -> str:
    if "#" in uri:
        return uri.rsplit("#", 1)[1]
    return uri.rstrip("/").rsplit("/", 1)[-1]


def parse_owl_synonyms(doc: str, ontology_id: str) -> SynonymTable:
    """Extract one concept per owl:Class carrying an rdfs:label; synonyms come
    from oboInOwl:hasExactSynonym literals. Classes with synonyms but no label
    are skipped and counted in the table's warnings tally."""
    try:
        root = ET.fromstring(doc)
    except ET.ParseError as exc:
        raise OntologyParseError(f"malformed RDF/XML: {exc}") from exc

    table = SynonymTable(ontology_id)
    for cls in root.iter(_OWL_CLASS):
        label_el = cls.find(_RDFS_LABEL)
        synonyms = [syn.text for syn in cls.findall(_EXACT_SYNONYM) if syn.text]
        if label_el is None or not (label_el.text or "").strip():
            if synonyms:
                table.warnings += 1
            continue
        concept_id = _uri_fragment(cls.get(_RDF_ABOUT, "")) or normalize(label_el.text)
        table.add(concept_id, label_el.text, synonyms)
    return table


# --- MeSH descriptor XML ---------------------------------------------------

def parse_mesh_concepts(doc: str) -> SynonymTable:
    """Per DescriptorRecord: canonical = descriptor name, synonyms = every
    Term String across its ConceptList minus the canonical itself."""
    try:
        root = ET.fromstring(doc)
    except ET.ParseError as exc:
        raise OntologyParseError(f"malformed MeSH XML: {exc}") from exc

    table = SynonymTable(MESH)
    for record in root.iter("DescriptorRecord"):
        ui = record.findtext("DescriptorUI", default="").strip()
        name = record.findtext("DescriptorName/String", default="")
        if not name.strip():
            table.warnings += 1
            continue
        terms = [
            el.text
            for el in record.findall("ConceptList/Concept/TermList/Term/String")
            if el.text
        ]
        table.add(ui or normalize(name), name, terms)
    return table


# --- Precompiled concept dictionary (CUI TSV) ------------------------------

def load_umls_dict(stream) -> SynonymTable:
    """Read CUI <tab> preferred label <tab> synonym lines, grouping by CUI.
    `stream` is an iterable of text lines."""
    by_cui: dict[str, tuple[str, list[str]]] = {}
    for lineno, line in enumerate(stream, start=1):
        line = line.rstrip("\n")
        if not line.strip():
            continue
        cols = line.split("\t")
        if len(cols) != 3:
            raise OntologyParseError(
                f"expected 3 tab-separated columns, got {len(cols)}", line=lineno)
        cui, preferred, synonym = (c.strip() for c in cols)
        if not cui:
            raise OntologyParseError("empty CUI", line=lineno)
        if cui not in by_cui:
            by_cui[cui] = (preferred, [])
        by_cui[cui][1].append(synonym)

    table = SynonymTable(UMLS)
    for cui, (preferred, synonyms) in by_cui.items():
        table.add(cui, preferred, synonyms)
    return table
