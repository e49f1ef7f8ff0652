"""HTTP serving layer over an immutable snapshot.

All request handlers read one shared snapshot reference; POST /v1/reload
builds a complete replacement first and swaps it in a single assignment, so
no request ever observes a half-loaded state."""

from __future__ import annotations

import os

from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel

from .catalog import DIMENSIONS, CohortRecord
from .snapshot import Snapshot, SnapshotError, load_snapshot

DEFAULT_SOURCE_URL = "https://www.ncbi.nlm.nih.gov/geo/query/acc.cgi?acc={accession}"
DEFAULT_K = 10
MAX_K = 1000

SNAPSHOT_ENV = "NEUROEMBED_SNAPSHOT"
SOURCE_URL_ENV = "NEUROEMBED_SOURCE_URL"


class QueryRequest(BaseModel):
    text: str
    k: int = DEFAULT_K


class ReloadRequest(BaseModel):
    snapshot_dir: str


class SnapshotHolder:
    def __init__(self, snapshot: Snapshot | None = None):
        self.current = snapshot

    def swap(self, snapshot: Snapshot) -> None:
        self.current = snapshot  # single reference assignment: atomic

    def get_or_503(self) -> Snapshot:
        snapshot = self.current
        if snapshot is None:
            raise HTTPException(status_code=503, detail="no snapshot loaded")
        return snapshot


def _dimension_view(raw: CohortRecord, normalized: CohortRecord,
                    vocabulary) -> dict:
    view = {}
    for dimension in DIMENSIONS:
        canonicals = set(vocabulary.dims.get(dimension, {}))
        view[dimension] = {
            "raw": list(raw.values(dimension)),
            "normalized": [
                {"value": value, "mapped": value in canonicals}
                for value in normalized.values(dimension)
            ],
        }
    return view


def create_app(snapshot_dir: str | None = None,
               source_url_pattern: str | None = None) -> FastAPI:
    app = FastAPI(title="neuroembed")
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"],
        allow_headers=["*"])

    pattern = (source_url_pattern or os.environ.get(SOURCE_URL_ENV)
               or DEFAULT_SOURCE_URL)
    holder = SnapshotHolder()
    app.state.holder = holder
    app.state.source_url_pattern = pattern

    snapshot_dir = snapshot_dir or os.environ.get(SNAPSHOT_ENV)
    if snapshot_dir:
        holder.swap(load_snapshot(snapshot_dir))

    def source_url(accession: str) -> str:
        return pattern.format(accession=accession)

    @app.get("/v1/health")
    def health():
        return {"status": "ok", "loaded": holder.current is not None}

    @app.post("/v1/query")
    def query(request: QueryRequest):
        snapshot = holder.get_or_503()
        text = request.text.strip()
        if not text:
            raise HTTPException(status_code=400, detail="query text is empty")
        if not 1 <= request.k <= MAX_K:
            raise HTTPException(status_code=400,
                                detail=f"k must be in [1, {MAX_K}]")
        vector = snapshot.head.project(snapshot.provider.embed(text))
        hits = snapshot.index.search(vector, request.k)
        payload = []
        for hit in hits:
            raw = snapshot.catalog.by_accession[hit.accession]
            normalized = snapshot.normalized.by_accession[hit.accession]
            payload.append({
                "rank": hit.rank,
                "accession": hit.accession,
                "title": raw.title,
                "similarity": hit.similarity,
                "source_url": source_url(hit.accession),
                "metadata": {
                    dimension: list(normalized.values(dimension))
                    for dimension in DIMENSIONS
                },
            })
        return {"query": text, "k": request.k, "hits": payload}

    @app.get("/v1/cohorts/{accession}")
    def cohort(accession: str):
        snapshot = holder.get_or_503()
        raw = snapshot.catalog.by_accession.get(accession)
        if raw is None:
            raise HTTPException(status_code=404,
                                detail=f"unknown accession {accession}")
        normalized = snapshot.normalized.by_accession[accession]
        return {
            "accession": accession,
            "title": raw.title,
            "summary": raw.summary,
            "pmid": raw.pmid,
            "publication_title": raw.publication_title,
            "disease": raw.disease,
            "source_url": source_url(accession),
            "dimensions": _dimension_view(raw, normalized, snapshot.vocabulary),
        }

    @app.get("/v1/stats")
    def stats():
        snapshot = holder.get_or_503()
        return {
            "snapshot_dir": snapshot.directory,
            "cohorts": len(snapshot.catalog),
            "vectors": len(snapshot.index),
            "dimension": snapshot.index.dim,
            "model": snapshot.model_meta,
            "vocabulary": {
                dimension: len(snapshot.vocabulary.terms(dimension))
                for dimension in DIMENSIONS
            },
            "augmentation": snapshot.stats.to_mapping(),
        }

    @app.post("/v1/reload")
    def reload(request: ReloadRequest):
        try:
            snapshot = load_snapshot(request.snapshot_dir)
        except (SnapshotError, OSError, ValueError) as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        holder.swap(snapshot)
        return {"status": "ok", "cohorts": len(snapshot.catalog)}

    return app
