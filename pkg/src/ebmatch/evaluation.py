"""Retrieval-quality evaluation: pruning loss versus exhaustive search.

For every test sentence the pruned search (favourite clusters only) and an
exhaustive scan of the whole corpus are both run.  A query is MISSED when
the exhaustive best strictly beats the pruned result (beyond a small float
tolerance); MISSED-BY averages, over the missed queries only, the relative
score deviation ``100 * (best - found) / best``.  Comparison counts for
both strategies are tracked so the pruning saving is visible next to its
cost in retrieval quality.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .learn import ClusterModel
from .metric import MetricWeights, similarity_score
from .pattern import SentencePattern, encode_sentence
from .retrieve import QueryConfig, QueryStats, _scan_best, select_clusters

#: Score differences at or below this are treated as equal.
MISS_TOLERANCE = 1e-9


def exhaustive_best(
    entries, pattern: SentencePattern, weights: MetricWeights
) -> tuple[str, float]:
    """Best-scoring entry over the whole corpus (ties: smallest entry id)."""
    best_id, best_score = None, -1.0
    for entry in entries:
        s = similarity_score(pattern, entry.pattern, weights)
        if s > best_score or (s == best_score and entry.id < best_id):
            best_id, best_score = entry.id, s
    if best_id is None:
        raise ValueError("cannot search an empty corpus")
    return best_id, best_score


@dataclass(frozen=True)
class QueryRecord:
    """Per-query outcome of pruned search versus the exhaustive scan."""

    index: int
    text: str
    found_id: str
    found_score: float
    best_id: str
    best_score: float
    missed: bool
    comparisons_pruned: int
    comparisons_exhaustive: int

    def to_dict(self) -> dict:
        return {
            "index": self.index,
            "text": self.text,
            "found_id": self.found_id,
            "found_score": self.found_score,
            "best_id": self.best_id,
            "best_score": self.best_score,
            "missed": self.missed,
            "comparisons_pruned": self.comparisons_pruned,
            "comparisons_exhaustive": self.comparisons_exhaustive,
        }


@dataclass
class EvalReport:
    """Aggregate retrieval-quality figures plus the per-query records."""

    queries: int
    missed_count: int
    missed_pct: float
    missed_by_pct: float | None
    avg_comparisons_pruned: float
    avg_comparisons_exhaustive: float
    clusters_searched: int
    cluster_count: int
    records: list[QueryRecord]

    def to_dict(self) -> dict:
        return {
            "queries": self.queries,
            "missed_count": self.missed_count,
            "missed_pct": self.missed_pct,
            "missed_by_pct": self.missed_by_pct,
            "avg_comparisons_pruned": self.avg_comparisons_pruned,
            "avg_comparisons_exhaustive": self.avg_comparisons_exhaustive,
            "clusters_searched": self.clusters_searched,
            "cluster_count": self.cluster_count,
            "records": [r.to_dict() for r in self.records],
        }


def aggregate_records(
    records: Sequence[QueryRecord], clusters_searched: int, cluster_count: int
) -> EvalReport:
    """Fold per-query records into a report.

    ``missed_by_pct`` is defined only over missed queries and reported as
    None when nothing was missed.
    """
    records = list(records)
    if not records:
        raise ValueError("cannot aggregate an empty record list")
    n = len(records)
    missed = [r for r in records if r.missed]
    missed_by = None
    if missed:
        missed_by = sum(
            100.0 * (r.best_score - r.found_score) / r.best_score for r in missed
        ) / len(missed)
    return EvalReport(
        queries=n,
        missed_count=len(missed),
        missed_pct=100.0 * len(missed) / n,
        missed_by_pct=missed_by,
        avg_comparisons_pruned=sum(r.comparisons_pruned for r in records) / n,
        avg_comparisons_exhaustive=sum(r.comparisons_exhaustive for r in records) / n,
        clusters_searched=clusters_searched,
        cluster_count=cluster_count,
        records=records,
    )


def evaluate_retrieval(
    model: ClusterModel,
    sentences: Sequence[str],
    fwlex,
    taglex,
    config: QueryConfig | None = None,
) -> EvalReport:
    """Run pruned retrieval and the exhaustive oracle over a test set."""
    config = config or QueryConfig()
    corpus = list(model.entries.values())
    records = []
    for index, text in enumerate(sentences):
        pattern = encode_sentence(text, fwlex, taglex)
        stats = QueryStats()
        order = select_clusters(model, pattern, config.clusters_to_search, stats)
        found_id, found_score = _scan_best(model, pattern, order, stats)
        best_id, best_score = exhaustive_best(corpus, pattern, model.weights)
        records.append(
            QueryRecord(
                index=index,
                text=text,
                found_id=found_id,
                found_score=found_score,
                best_id=best_id,
                best_score=best_score,
                missed=best_score - found_score > MISS_TOLERANCE,
                comparisons_pruned=stats.comparisons,
                comparisons_exhaustive=len(corpus),
            )
        )
    return aggregate_records(records, config.clusters_to_search, len(model.clusters))


def format_report_table(rows: Sequence[tuple[str, EvalReport]]) -> str:
    """Human-readable table: one row per configuration, MISSED / MISSED BY columns."""
    header = f"{'':24}  {'MISSED':>8}  {'MISSED BY':>10}  {'AVG CMP':>9}  {'EXH CMP':>9}"
    lines = [header]
    for label, report in rows:
        missed_by = (
            f"{report.missed_by_pct:.2f}%" if report.missed_by_pct is not None else "-"
        )
        lines.append(
            f"{label:24}  {report.missed_pct:>7.2f}%  {missed_by:>10}  "
            f"{report.avg_comparisons_pruned:>9.1f}  {report.avg_comparisons_exhaustive:>9.1f}"
        )
    return "\n".join(lines)
