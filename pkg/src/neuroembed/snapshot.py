"""Serving snapshot: one directory holding everything the query path needs.

Layout (all files required):
    catalog.jsonl     filtered catalogue with raw metadata values
    normalized.jsonl  same records with values rewritten to canonical forms
    vocab.json        augmented vocabulary
    stats.json        augmentation statistics
    model.json        projection head + provider/loss metadata
    index.bin         cohort vector index

A snapshot is immutable once loaded; the service swaps whole snapshots."""

from __future__ import annotations

import os
import tempfile
from dataclasses import dataclass
from pathlib import Path

from .augment import (AugmentationStats, AugmentedVocabulary, load_vocabulary,
                      write_vocabulary)
from .catalog import CohortCatalog, parse_catalog, write_catalog
from .embed import (HashedTokenProvider, LossConfig, ProjectionHead, load_model,
                    provider_from_id, save_model)
from .index import VectorIndex

CATALOG_FILE = "catalog.jsonl"
NORMALIZED_FILE = "normalized.jsonl"
VOCAB_FILE = "vocab.json"
STATS_FILE = "stats.json"
MODEL_FILE = "model.json"
INDEX_FILE = "index.bin"


class SnapshotError(RuntimeError):
    pass


@dataclass(frozen=True)
class Snapshot:
    directory: str
    catalog: CohortCatalog
    normalized: CohortCatalog
    vocabulary: AugmentedVocabulary
    stats: AugmentationStats
    head: ProjectionHead
    provider: HashedTokenProvider
    model_meta: dict
    index: VectorIndex


def atomic_write_text(path: Path, content: str) -> None:
    """Write via a sibling temp file and rename, so readers never observe a
    partial file."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as sink:
            sink.write(content)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def atomic_write_bytes(path: Path, content: bytes) -> None:
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "wb") as sink:
            sink.write(content)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def save_snapshot(directory: Path, catalog: CohortCatalog,
                  normalized: CohortCatalog, vocabulary: AugmentedVocabulary,
                  stats: AugmentationStats, head: ProjectionHead,
                  provider: HashedTokenProvider, loss_config: LossConfig,
                  index: VectorIndex) -> None:
    import io

    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)

    buf = io.StringIO()
    write_catalog(catalog.records, buf)
    atomic_write_text(directory / CATALOG_FILE, buf.getvalue())

    buf = io.StringIO()
    write_catalog(normalized.records, buf)
    atomic_write_text(directory / NORMALIZED_FILE, buf.getvalue())

    buf = io.StringIO()
    write_vocabulary(vocabulary, buf)
    atomic_write_text(directory / VOCAB_FILE, buf.getvalue())

    import json

    atomic_write_text(directory / STATS_FILE,
                      json.dumps(stats.to_mapping(), indent=2) + "\n")

    buf = io.StringIO()
    save_model(head, provider.provider_id, loss_config, buf)
    atomic_write_text(directory / MODEL_FILE, buf.getvalue())

    buf_b = io.BytesIO()
    index.save(buf_b)
    atomic_write_bytes(directory / INDEX_FILE, buf_b.getvalue())


def load_snapshot(directory: Path) -> Snapshot:
    import json

    directory = Path(directory)
    if not directory.is_dir():
        raise SnapshotError(f"snapshot directory not found: {directory}")
    required = (CATALOG_FILE, NORMALIZED_FILE, VOCAB_FILE, STATS_FILE,
                MODEL_FILE, INDEX_FILE)
    for name in required:
        if not (directory / name).is_file():
            raise SnapshotError(f"snapshot file missing: {directory / name}")

    with (directory / CATALOG_FILE).open(encoding="utf-8") as source:
        catalog = parse_catalog(source)
    with (directory / NORMALIZED_FILE).open(encoding="utf-8") as source:
        normalized = parse_catalog(source)
    with (directory / VOCAB_FILE).open(encoding="utf-8") as source:
        vocabulary = load_vocabulary(source)
    with (directory / STATS_FILE).open(encoding="utf-8") as source:
        stats = AugmentationStats.from_mapping(json.load(source))
    with (directory / MODEL_FILE).open(encoding="utf-8") as source:
        head, model_meta = load_model(source)
    with (directory / INDEX_FILE).open("rb") as source:
        index = VectorIndex.load(source)

    if set(normalized.by_accession) != set(catalog.by_accession):
        raise SnapshotError("catalog and normalized accessions differ")
    if index.dim != head.d_out:
        raise SnapshotError(
            f"index dimension {index.dim} != head output {head.d_out}")
    provider = provider_from_id(model_meta["provider_id"])
    if provider.dimension != head.d_in:
        raise SnapshotError(
            f"provider dimension {provider.dimension} != head input {head.d_in}")
    return Snapshot(directory=str(directory), catalog=catalog,
                    normalized=normalized, vocabulary=vocabulary, stats=stats,
                    head=head, provider=provider, model_meta=model_meta,
                    index=index)
