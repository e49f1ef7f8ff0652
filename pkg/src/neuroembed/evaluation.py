"""Retrieval metrics over generated question/answer pairs.

Two numbers per query, both computed on the full descending-similarity
ranking of the catalogue:

* R-precision: with R = number of matching cohorts, the fraction of the
  top-R ranks occupied by matching cohorts.
* Mean percentile rank: a cohort at 1-based rank r out of Total scores
  1 - (r - 1) / (Total - 1) (defined as 1.0 when Total == 1); MPR averages
  this over the matching set, so 1.0 means every match sits at the top.

Both depend only on rank order, never on similarity magnitudes. Report
aggregates are plain means over queries, overall and grouped by the number
of terms in the query, with histogram bins of width 0.05 per group.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .catalog import CohortCatalog
from .embed import HashedTokenProvider, ProjectionHead, serialize_record
from .index import VectorIndex, build_index

HISTOGRAM_BIN_WIDTH = 0.05
HISTOGRAM_BINS = 20


class RankingIntegrityError(ValueError):
    pass


def _positions(ranking: Sequence[str], relevant: Iterable[str]) -> list[int]:
    index_of = {accession: i for i, accession in enumerate(ranking)}
    ranks = []
    for accession in relevant:
        if accession not in index_of:
            raise RankingIntegrityError(f"{accession!r} missing from ranking")
        ranks.append(index_of[accession] + 1)
    return ranks


def retrieval_precision(ranking: Sequence[str], relevant: Iterable[str]) -> float:
    """|top-R of ranking ∩ relevant| / R with R = |relevant|."""
    relevant = set(relevant)
    if not relevant:
        raise ValueError("relevant set must be non-empty")
    _positions(ranking, relevant)
    r = len(relevant)
    return len(set(ranking[:r]) & relevant) / r


def percentile_rank(ranking: Sequence[str], accession: str) -> float:
    (rank,) = _positions(ranking, [accession])
    total = len(ranking)
    if total == 1:
        return 1.0
    return 1.0 - (rank - 1) / (total - 1)


def mean_percentile_rank(ranking: Sequence[str], relevant: Iterable[str]) -> float:
    relevant = set(relevant)
    if not relevant:
        raise ValueError("relevant set must be non-empty")
    return sum(percentile_rank(ranking, a) for a in relevant) / len(relevant)


def _bin_of(value: float) -> int:
    return min(HISTOGRAM_BINS - 1, int(value / HISTOGRAM_BIN_WIDTH))


@dataclass(frozen=True)
class QueryEvaluation:
    nlq: str
    n_terms: int
    relevant: tuple[str, ...]
    precision: float
    mpr: float


@dataclass
class GroupStats:
    pairs: int = 0
    precision_sum: float = 0.0
    mpr_sum: float = 0.0
    precision_histogram: list[int] = field(
        default_factory=lambda: [0] * HISTOGRAM_BINS)
    mpr_histogram: list[int] = field(default_factory=lambda: [0] * HISTOGRAM_BINS)

    def record(self, precision: float, mpr: float) -> None:
        self.pairs += 1
        self.precision_sum += precision
        self.mpr_sum += mpr
        self.precision_histogram[_bin_of(precision)] += 1
        self.mpr_histogram[_bin_of(mpr)] += 1

    @property
    def precision_mean(self) -> float:
        return self.precision_sum / self.pairs if self.pairs else float("nan")

    @property
    def mpr_mean(self) -> float:
        return self.mpr_sum / self.pairs if self.pairs else float("nan")

    def to_mapping(self) -> dict:
        return {
            "pairs": self.pairs,
            "r_precision": self.precision_mean,
            "mpr": self.mpr_mean,
            "r_precision_histogram": self.precision_histogram,
            "mpr_histogram": self.mpr_histogram,
        }


@dataclass
class EvalReport:
    evaluations: list[QueryEvaluation]
    overall: GroupStats
    by_n_terms: dict[int, GroupStats]

    @property
    def pairs(self) -> int:
        return self.overall.pairs

    @property
    def precision_mean(self) -> float:
        return self.overall.precision_mean

    @property
    def mpr_mean(self) -> float:
        return self.overall.mpr_mean

    def to_mapping(self) -> dict:
        return {
            "pairs": self.pairs,
            "histogram_bin_width": HISTOGRAM_BIN_WIDTH,
            "overall": self.overall.to_mapping(),
            "by_n_terms": {str(n): g.to_mapping()
                           for n, g in sorted(self.by_n_terms.items())},
            "queries": [
                {
                    "nlq": e.nlq,
                    "n_terms": e.n_terms,
                    "relevant": list(e.relevant),
                    "r_precision": e.precision,
                    "mpr": e.mpr,
                }
                for e in self.evaluations
            ],
        }


def evaluate(head: ProjectionHead, provider: HashedTokenProvider,
             index: VectorIndex, test_set) -> EvalReport:
    """Score every pair: embed the query, project it, rank the whole
    catalogue, then compute both metrics against the pair's matching set."""
    if not test_set:
        raise ValueError("no pairs to evaluate")
    if len(index) == 0:
        raise ValueError("cannot evaluate against an empty index")

    query_cache: dict[str, np.ndarray] = {}
    evaluations = []
    overall = GroupStats()
    by_n: dict[int, GroupStats] = {}

    for pair in test_set:
        if pair.nlq not in query_cache:
            query_cache[pair.nlq] = head.project(provider.embed(pair.nlq))
        ranking = [hit.accession
                   for hit in index.search(query_cache[pair.nlq], len(index))]
        relevant = tuple(pair.all_matching)
        precision = retrieval_precision(ranking, relevant)
        mpr = mean_percentile_rank(ranking, relevant)
        evaluations.append(QueryEvaluation(
            nlq=pair.nlq, n_terms=pair.n_terms, relevant=relevant,
            precision=precision, mpr=mpr))
        overall.record(precision, mpr)
        by_n.setdefault(pair.n_terms, GroupStats()).record(precision, mpr)

    return EvalReport(evaluations=evaluations, overall=overall, by_n_terms=by_n)


def build_cohort_index(catalog: CohortCatalog, head: ProjectionHead,
                       provider: HashedTokenProvider) -> VectorIndex:
    """One row per cohort: the serialized record embedded and projected."""
    accessions = [r.accession for r in catalog.records]
    rows = [head.project(provider.embed(serialize_record(r)))
            for r in catalog.records]
    return build_index(accessions, np.stack(rows))


def write_report(report: EvalReport, sink) -> None:
    json.dump(report.to_mapping(), sink, indent=2)
    sink.write("\n")


def load_report(source) -> dict:
    return json.load(source)


def write_summary_tsv(report: EvalReport, sink) -> None:
    sink.write("group\tpairs\tr_precision\tmpr\n")
    sink.write(f"all\t{report.pairs}\t{report.precision_mean:.4f}"
               f"\t{report.mpr_mean:.4f}\n")
    for n, group in sorted(report.by_n_terms.items()):
        sink.write(f"n={n}\t{group.pairs}\t{group.precision_mean:.4f}"
                   f"\t{group.mpr_mean:.4f}\n")
