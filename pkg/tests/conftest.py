"""Shared fixtures: a small on-disk serving snapshot built from hand-written
records, used by the snapshot and service tests."""

from dataclasses import replace

import pytest

from neuroembed.augment import AugmentationStats, AugmentedVocabulary
from neuroembed.catalog import CohortCatalog, CohortRecord
from neuroembed.embed import HashedTokenProvider, LossConfig, ProjectionHead
from neuroembed.evaluation import build_cohort_index
from neuroembed.ontology import EFO, MESH, NCBI_TAXON, UBERON
from neuroembed.snapshot import save_snapshot

MINI_DIM = 192


def mini_records(tag: str = "") -> tuple[list[CohortRecord], list[CohortRecord]]:
    """Three raw cohorts plus their normalized rewrites. 'microarray' is
    deliberately absent from the vocabulary to exercise unmapped values."""
    raw = [
        CohortRecord(
            accession=f"GSE{tag}100", title="Nigral transcriptome atlas",
            summary=("Dopaminergic neuron loss in midbrain sections. "
                     "Tissue was dissected from postmortem donors. "
                     "Libraries were sequenced in bulk."),
            pmid="30000001",
            publication_title="Nigral transcriptome atlas: a resource",
            disease="parkinson disease",
            po=("Human",), as_=("RNA-Seq",),
            ph=("Parkinson's Disease",), ti=("Substantia Nigra",)),
        CohortRecord(
            accession=f"GSE{tag}200", title="Cerebellar prion study",
            summary="Granule cell expression after prion exposure.",
            disease="scrapie",
            po=("Mouse",), as_=("microarray",),
            ph=("Scrapie",), ti=("Cerebellum",)),
        CohortRecord(
            accession=f"GSE{tag}300", title="Spinal cord methylation survey",
            summary="CpG methylation along the cord.",
            disease="amyotrophic lateral sclerosis",
            po=("Human",), as_=("Methylation Profiling",),
            ph=("amyotrophic lateral sclerosis",), ti=("Spinal Cord",)),
    ]
    normalized = [
        replace(raw[0], po=("homo sapiens",), as_=("rna sequencing assay",),
                ph=("parkinson disease",), ti=("substantia nigra",)),
        replace(raw[1], po=("mus musculus",), as_=("microarray",),
                ph=("scrapie",), ti=("cerebellum",)),
        replace(raw[2], po=("homo sapiens",), as_=("methylation profiling",),
                ph=("amyotrophic lateral sclerosis",), ti=("spinal cord",)),
    ]
    return raw, normalized


def mini_vocabulary() -> AugmentedVocabulary:
    vocab = AugmentedVocabulary()
    vocab.add("Po", "homo sapiens", ["human"], NCBI_TAXON, "exact")
    vocab.add("Po", "mus musculus", ["mouse"], NCBI_TAXON, "exact")
    vocab.add("As", "rna sequencing assay", ["rna seq"], EFO, "exact")
    vocab.add("As", "methylation profiling", [], EFO, "exact")
    vocab.add("Ph", "parkinson disease", ["paralysis agitans"], EFO, "exact")
    vocab.add("Ph", "scrapie", [], MESH, "exact")
    vocab.add("Ph", "amyotrophic lateral sclerosis", [], MESH, "fuzzy")
    vocab.add("Ti", "substantia nigra", [], UBERON, "exact")
    vocab.add("Ti", "cerebellum", [], UBERON, "exact")
    vocab.add("Ti", "spinal cord", [], UBERON, "exact")
    return vocab


def build_mini_snapshot(directory, tag: str = "") -> CohortCatalog:
    """Write a complete snapshot into `directory`; returns the normalized
    catalogue for reference."""
    raw, normalized = mini_records(tag)
    catalog = CohortCatalog(records=raw, source_digest=f"mini{tag}")
    norm_catalog = CohortCatalog(records=normalized, source_digest=f"mini{tag}")
    provider = HashedTokenProvider(dimension=MINI_DIM)
    head = ProjectionHead.initialize(MINI_DIM, noise=0.0)
    index = build_cohort_index(norm_catalog, head, provider)
    save_snapshot(directory, catalog, norm_catalog, mini_vocabulary(),
                  AugmentationStats(), head, provider, LossConfig(), index)
    return norm_catalog


@pytest.fixture(scope="session")
def snapshot_dir(tmp_path_factory):
    directory = tmp_path_factory.mktemp("snapshot")
    build_mini_snapshot(directory)
    return directory
