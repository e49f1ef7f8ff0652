"""Deterministic synthetic corpus for the end-to-end demo and test fixtures.

Everything here is invented but shaped like the real inputs: a JSONL cohort
catalogue with messy free-text metadata, small OWL/MeSH/UMLS ontology files,
and per-disease term sets for the text filter. Each concept family carries a
distinctive latin-flavored marker token shared by its synonyms but absent
from the canonical label, so synonym queries have no lexical overlap with
catalogue rows until the projection head has learned the mapping.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from pathlib import Path
from xml.sax.saxutils import escape

from .catalog import CohortRecord

DEFAULT_SEED = 7
RAW_RECORD_COUNT = 240


@dataclass(frozen=True)
class TermFamily:
    dimension: str
    canonical: str
    concept_id: str
    ontology: str  # which fixture file defines it
    synonyms: tuple[str, ...]


FAMILIES: tuple[TermFamily, ...] = (
    # populations
    TermFamily("Po", "homo sapiens", "NCBITaxon_9606", "ncbi_taxon",
               ("genus hominum", "species hominum", "hominum sapiens",
                "hominum vulgaris")),
    TermFamily("Po", "mus musculus", "NCBITaxon_10090", "ncbi_taxon",
               ("genus murinus", "species murinus", "murinus communis",
                "murinus domesticus")),
    TermFamily("Po", "rattus norvegicus", "NCBITaxon_10116", "ncbi_taxon",
               ("genus rattidae", "species rattidae", "rattidae norvegica",
                "rattidae domestica")),
    TermFamily("Po", "danio rerio", "NCBITaxon_7955", "ncbi_taxon",
               ("genus zebraica", "species zebraica", "zebraica fluvialis",
                "zebraica minor")),
    TermFamily("Po", "macaca mulatta", "D038981", "mesh",
               ("genus macacae", "species macacae", "macacae rhesus",
                "macacae indica")),
    TermFamily("Po", "drosophila melanogaster", "C0013138", "umls",
               ("genus drosophilidae", "species drosophilidae",
                "drosophilidae communis", "drosophilidae minor")),
    # assays
    TermFamily("As", "transcription profiling by array", "EFO_0002768", "efo",
               ("assay microarraia", "technica microarraia",
                "microarraia expressionis", "microarraia duplex")),
    TermFamily("As", "rna sequencing assay", "EFO_0008896", "efo",
               ("assay rnaseqia", "technica rnaseqia", "rnaseqia profunda",
                "rnaseqia directa")),
    TermFamily("As", "chromatin immunoprecipitation assay", "EFO_0002692", "efo",
               ("assay chipseqia", "technica chipseqia", "chipseqia genomica",
                "chipseqia directa")),
    TermFamily("As", "single cell rna sequencing", "EFO_0008913", "efo",
               ("assay unicellula", "technica unicellula", "unicellula dissecta",
                "unicellula profunda")),
    TermFamily("As", "methylation profiling assay", "D019175", "mesh",
               ("assay methylomia", "technica methylomia", "methylomia genomica",
                "methylomia directa")),
    TermFamily("As", "proteomic profiling assay", "C1328728", "umls",
               ("assay proteomia", "technica proteomia",
                "proteomia quantitativa", "proteomia directa")),
    # phenotypes
    TermFamily("Ph", "alzheimer disease", "EFO_0000249", "efo",
               ("morbus alzheimeri", "dementia alzheimeri",
                "alzheimeri senilis", "alzheimeri praecox")),
    TermFamily("Ph", "parkinson disease", "EFO_0002508", "efo",
               ("morbus parkinsoni", "paralysis parkinsoni",
                "parkinsoni agitans", "parkinsoni tremens")),
    TermFamily("Ph", "huntington disease", "EFO_0000337", "efo",
               ("chorea huntingtoni", "morbus huntingtoni",
                "huntingtoni degenerativa", "huntingtoni hereditaria")),
    TermFamily("Ph", "multiple sclerosis", "EFO_0003885", "efo",
               ("encephalomyelitis sclerotica", "sclerotica disseminata",
                "sclerotica cerebrospinalis", "sclerotica recurrens")),
    TermFamily("Ph", "amyotrophic lateral sclerosis", "D000690", "mesh",
               ("paralysis amyotrophica", "amyotrophica progressiva",
                "atrophia amyotrophica", "amyotrophica spinalis")),
    TermFamily("Ph", "major depressive disorder", "C1269683", "umls",
               ("melancholia gravis", "melancholia recurrens",
                "morbus melancholiae", "melancholia unipolaris")),
    # tissues
    TermFamily("Ti", "hippocampus", "UBERON_0002421", "uberon",
               ("formatio hippocampalis", "regio hippocampalis",
                "cornu hippocampalis", "area hippocampalis")),
    TermFamily("Ti", "prefrontal cortex", "UBERON_0000451", "uberon",
               ("cortex praefrontalis", "regio praefrontalis",
                "area praefrontalis", "lamina praefrontalis")),
    TermFamily("Ti", "cerebellum", "UBERON_0002037", "uberon",
               ("corpus cerebellare", "regio cerebellaris",
                "lobus cerebellaris", "vermis cerebellaris")),
    TermFamily("Ti", "substantia nigra", "UBERON_0002038", "uberon",
               ("pars nigralis", "regio nigralis", "zona nigralis",
                "nucleus nigralis")),
    TermFamily("Ti", "spinal cord", "UBERON_0002240", "uberon",
               ("medulla spinalis", "regio medullaris", "funiculus medullaris",
                "canalis medullaris")),
    TermFamily("Ti", "striatum", "UBERON_0002435", "uberon",
               ("corpus striatale", "regio striatalis", "nucleus striatalis",
                "zona striatalis")),
    TermFamily("Ti", "frontal lobe", "D016273", "mesh",
               ("lobus frontalis", "regio frontalis", "gyrus frontalis",
                "area frontalis")),
    TermFamily("Ti", "superior temporal gyrus", "C0152307", "umls",
               ("gyrus temporalis", "regio temporalis", "lamina temporalis",
                "area temporalis")),
)

# concepts listed in a LATER table of the same route, to exercise the
# first-hit-wins lookup order
SHADOWED = (
    TermFamily("Ph", "alzheimer disease", "D000544", "mesh",
               ("presenile dementia", "alzheimer sclerosis")),
    TermFamily("Ti", "hippocampus", "C0019564", "umls",
               ("ammon horn", "hippocampus major")),
)

JUNK_VALUES = {
    "Po": ("unsorted donor pool 7",),
    "As": ("custom benchtop workflow",),
    "Ph": ("not provided",),
    "Ti": ("flash frozen block 12", "mixed embryo batch"),
}

_OPENERS = (
    "This SuperSeries is composed of the SubSeries listed below.",
    "This dataset is part of a multi-site collection effort.",
    "Samples were deposited as part of a consortium release.",
)
_CLOSERS = (
    "Please refer to individual Series for further details.",
    "Raw files are available from the archive on request.",
    "Processed matrices accompany this submission.",
)
_TITLE_VERBS = (
    "Transcriptome analysis", "Expression profiling", "Molecular profiling",
    "Genome-wide survey", "Regulatory landscape mapping",
)


def families(dimension: str | None = None) -> list[TermFamily]:
    if dimension is None:
        return list(FAMILIES)
    return [f for f in FAMILIES if f.dimension == dimension]


def vocabulary_term_count() -> int:
    return sum(1 + len(f.synonyms) for f in FAMILIES)


# --- ontology fixture documents ---------------------------------------------

_OWL_HEADER = (
    '<?xml version="1.0"?>\n'
    '<rdf:RDF xmlns:rdf="http://www.w3.org/1999/02/22-rdf-syntax-ns#"\n'
    '         xmlns:rdfs="http://www.w3.org/2000/01/rdf-schema#"\n'
    '         xmlns:owl="http://www.w3.org/2002/07/owl#"\n'
    '         xmlns:oboInOwl="http://www.geneontology.org/formats/oboInOwl#">\n'
)


def _owl_document(entries: list[TermFamily]) -> str:
    parts = [_OWL_HEADER]
    for family in entries:
        parts.append(
            f'  <owl:Class rdf:about='
            f'"http://purl.obolibrary.org/obo/{family.concept_id}">\n')
        parts.append(f"    <rdfs:label>{escape(family.canonical)}</rdfs:label>\n")
        for synonym in family.synonyms:
            parts.append(
                f"    <oboInOwl:hasExactSynonym>{escape(synonym)}"
                f"</oboInOwl:hasExactSynonym>\n")
        parts.append("  </owl:Class>\n")
    parts.append("</rdf:RDF>\n")
    return "".join(parts)


def _mesh_document(entries: list[TermFamily]) -> str:
    parts = ['<?xml version="1.0"?>\n<DescriptorRecordSet>\n']
    for family in entries:
        parts.append("  <DescriptorRecord>\n")
        parts.append(f"    <DescriptorUI>{family.concept_id}</DescriptorUI>\n")
        parts.append(f"    <DescriptorName><String>{escape(family.canonical)}"
                     "</String></DescriptorName>\n")
        parts.append("    <ConceptList>\n      <Concept>\n        <TermList>\n")
        for term in (family.canonical, *family.synonyms):
            parts.append(f"          <Term><String>{escape(term)}"
                         "</String></Term>\n")
        parts.append("        </TermList>\n      </Concept>\n    </ConceptList>\n")
        parts.append("  </DescriptorRecord>\n")
    parts.append("</DescriptorRecordSet>\n")
    return "".join(parts)


def _umls_document(entries: list[TermFamily]) -> str:
    lines = []
    for family in entries:
        for term in (family.canonical, *family.synonyms):
            lines.append(f"{family.concept_id}\t{family.canonical}\t{term}\n")
    return "".join(lines)


def ontology_documents() -> dict[str, str]:
    """Fixture file name -> content; names follow the loader convention."""
    pool = list(FAMILIES) + list(SHADOWED)
    by_source = {name: [f for f in pool if f.ontology == name]
                 for name in ("efo", "uberon", "ncbi_taxon", "mesh", "umls")}
    return {
        "efo.owl": _owl_document(by_source["efo"]),
        "uberon.owl": _owl_document(by_source["uberon"]),
        "ncbi_taxon.owl": _owl_document(by_source["ncbi_taxon"]),
        "mesh.xml": _mesh_document(by_source["mesh"]),
        "umls.tsv": _umls_document(by_source["umls"]),
    }


def disease_term_sets() -> dict[str, list[str]]:
    """Canonical disease -> search terms for the text filter (canonical plus
    the first two synonyms)."""
    return {f.canonical: [f.canonical, *f.synonyms[:2]]
            for f in families("Ph")}


# --- raw catalogue -----------------------------------------------------------

def _messy(term: str, rng: random.Random) -> str:
    """A raw metadata variant that still resolves to the term's concept."""
    roll = rng.random()
    if roll < 0.45:
        return term
    if roll < 0.65:
        return term.title()
    if roll < 0.75:
        return f'"{term}"'
    if roll < 0.85:
        return term.upper()
    if roll < 0.95 and len(term) >= 10:
        cut = rng.randrange(1, len(term))
        return (term[:cut] + term[cut + 1:]).strip()  # one-char deletion
    return "  " + term.replace(" ", "  ", 1)


def _raw_value(family: TermFamily, rng: random.Random) -> str:
    if rng.random() < 0.18:
        return _messy(rng.choice(family.synonyms), rng)
    return _messy(family.canonical, rng)


def _pick(pool: list[TermFamily], i: int, rng: random.Random) -> TermFamily:
    if rng.random() < 0.5:
        return pool[i % len(pool)]
    return rng.choice(pool)


def build_raw_records(seed: int = DEFAULT_SEED,
                      count: int = RAW_RECORD_COUNT) -> list[CohortRecord]:
    """Synthetic submissions. Most mention their disease in the title or the
    middle of the summary and survive the filter; a deterministic minority
    only mention it in boilerplate (or carry an unknown/blank disease) and
    get dropped."""
    rng = random.Random(f"{seed}:demo:catalog")
    po_pool, as_pool = families("Po"), families("As")
    ph_pool, ti_pool = families("Ph"), families("Ti")
    term_sets = disease_term_sets()
    records = []
    for i in range(count):
        accession = f"GSE{900000 + i}"
        ph = _pick(ph_pool, i, rng)
        ti = _pick(ti_pool, i // len(ph_pool), rng)
        po = _pick(po_pool, i // (len(ph_pool) * len(ti_pool)), rng)
        as_ = _pick(as_pool, i, rng)
        if i % 40 == 7:  # guaranteed coverage for the showcase query
            ph = next(f for f in ph_pool if f.canonical == "parkinson disease")
            ti = next(f for f in ti_pool if f.canonical == "substantia nigra")
            as_ = next(f for f in as_pool
                       if f.canonical == "rna sequencing assay")

        disease_term = (ph.canonical if rng.random() < 0.85
                        else rng.choice(term_sets[ph.canonical][1:]))
        kind = i % 30
        if kind == 11:  # disease named only in boilerplate: filtered out
            title = f"{rng.choice(_TITLE_VERBS)} of {ti.canonical} samples"
            summary = " ".join([
                f"Series collected by the {disease_term} working group.",
                f"We assayed {ti.canonical} material across conditions.",
                "Technical replicates were averaged per donor.",
                rng.choice(_CLOSERS),
            ])
            disease = ph.canonical
        elif kind == 17:  # disease mentioned nowhere: filtered out
            title = f"{rng.choice(_TITLE_VERBS)} of {ti.canonical} samples"
            summary = " ".join([
                rng.choice(_OPENERS),
                f"Baseline atlas of {po.canonical} {ti.canonical}.",
                rng.choice(_CLOSERS),
            ])
            disease = ph.canonical
        elif kind == 23:  # disease label outside the configured sets
            title = f"{rng.choice(_TITLE_VERBS)} in an unclassified cohort"
            summary = " ".join([
                rng.choice(_OPENERS),
                "Case series with heterogeneous presentation.",
                rng.choice(_CLOSERS),
            ])
            disease = "unclassified syndrome" if i % 60 == 23 else ""
        elif kind == 29:  # disease only in mid-summary, neutral title
            title = f"{rng.choice(_TITLE_VERBS)} of {ti.canonical}"
            summary = " ".join([
                rng.choice(_OPENERS),
                f"Donors with {disease_term} were compared against controls.",
                f"Material was sampled from {ti.canonical}.",
                rng.choice(_CLOSERS),
            ])
            disease = ph.canonical
        else:
            title = (f"{rng.choice(_TITLE_VERBS)} of {ti.canonical} "
                     f"in {disease_term}")
            summary = " ".join([
                rng.choice(_OPENERS),
                f"We profiled {po.canonical} {ti.canonical} tissue from "
                f"{rng.randrange(6, 60)} donors with {disease_term}.",
                f"Libraries were prepared with a {as_.canonical} protocol.",
                rng.choice(_CLOSERS),
            ])
            disease = ph.canonical

        ti_values = [_raw_value(ti, rng)]
        if rng.random() < 0.2:
            other = rng.choice([f for f in ti_pool if f is not ti])
            ti_values.append(_raw_value(other, rng))
        as_values = [_raw_value(as_, rng)]
        if rng.random() < 0.15:
            other = rng.choice([f for f in as_pool if f is not as_])
            as_values.append(_raw_value(other, rng))
        ph_values = [_raw_value(ph, rng)]
        if rng.random() < 0.08:
            other = rng.choice([f for f in ph_pool if f is not ph])
            ph_values.append(_raw_value(other, rng))
        if rng.random() < 0.06:
            ti_values.append(rng.choice(JUNK_VALUES["Ti"]))
        if rng.random() < 0.04:
            as_values.append(rng.choice(JUNK_VALUES["As"]))

        pmid = str(30_000_000 + i) if rng.random() < 0.6 else None
        records.append(CohortRecord(
            accession=accession,
            title=title,
            summary=summary,
            pmid=pmid,
            publication_title=(f"{title}: a resource" if pmid else None),
            disease=disease,
            po=tuple([_raw_value(po, rng)]),
            as_=tuple(as_values),
            ph=tuple(ph_values),
            ti=tuple(ti_values),
        ))
    return records


def write_demo_inputs(out_dir: Path, seed: int = DEFAULT_SEED) -> dict[str, Path]:
    """Materialize the raw fixture tree: catalogue, ontologies, term sets."""
    out_dir = Path(out_dir)
    ontology_dir = out_dir / "ontologies"
    ontology_dir.mkdir(parents=True, exist_ok=True)
    paths = {}
    for name, content in ontology_documents().items():
        path = ontology_dir / name
        path.write_text(content, encoding="utf-8")
        paths[name] = path

    catalog_path = out_dir / "catalog.jsonl"
    from .catalog import write_catalog

    with catalog_path.open("w", encoding="utf-8") as sink:
        write_catalog(build_raw_records(seed), sink)
    paths["catalog.jsonl"] = catalog_path

    terms_path = out_dir / "disease_terms.json"
    with terms_path.open("w", encoding="utf-8") as sink:
        json.dump(disease_term_sets(), sink, indent=2, sort_keys=True)
        sink.write("\n")
    paths["disease_terms.json"] = terms_path
    paths["ontologies"] = ontology_dir
    return paths
