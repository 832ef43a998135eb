"""Recognition phase: cluster-pruned search and input coverage.

A query is encoded like an archive sentence, compared against the cluster
centers, and then searched only inside the best-ranked cluster(s).  The
matched entry's target text is the translation proposal.

An input sentence rarely matches a single stored example end to end, so
coverage proceeds recursively: when the best match clears the cover
threshold but its contributing span is only part of the fragment, that span
is treated as a discovered seam: the covered piece and the uncovered
remainders are each re-encoded and retrieved independently, so every
emitted proposal carries the score of a match against its own fragment.  A
best score below the cover threshold but at or above the floor is emitted
as a partial proposal and ends that fragment; below the floor the fragment
stays uncovered.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Sequence

from .errors import ConfigError
from .learn import ClusterModel
from .metric import similarity, similarity_score
from .pattern import Provenance, SentencePattern, encode_tokens, tokenize


@dataclass(frozen=True)
class QueryConfig:
    """Retrieval knobs: how many clusters to search and emission thresholds."""

    clusters_to_search: int = 1
    cover_threshold: float = 0.8
    score_floor: float = 0.3
    max_cover_rounds: int = 32

    def __post_init__(self):
        if self.clusters_to_search < 1:
            raise ConfigError(
                f"clusters_to_search must be >= 1, got {self.clusters_to_search}"
            )
        if not 0.0 < self.cover_threshold <= 1.0:
            raise ConfigError(
                f"cover_threshold must be in (0, 1], got {self.cover_threshold}"
            )
        if not 0.0 <= self.score_floor <= self.cover_threshold:
            raise ConfigError(
                "score_floor must be in [0, cover_threshold], "
                f"got {self.score_floor} vs {self.cover_threshold}"
            )
        if self.max_cover_rounds < 1:
            raise ConfigError(
                f"max_cover_rounds must be >= 1, got {self.max_cover_rounds}"
            )


@dataclass(frozen=True)
class Proposal:
    """One translation proposal: a matched entry and the spans involved."""

    entry_id: str
    score: float
    input_span: tuple[int, int]
    entry_span: tuple[int, int]
    target_text: str
    provenance: Provenance | None = None
    partial: bool = False

    def to_dict(self) -> dict:
        prov = None
        if self.provenance is not None:
            prov = {
                "origin": self.provenance.origin_id,
                "range": list(self.provenance.origin_range),
            }
        return {
            "entry_id": self.entry_id,
            "score": self.score,
            "input_span": list(self.input_span),
            "entry_span": list(self.entry_span),
            "target": self.target_text,
            "provenance": prov,
            "partial": self.partial,
        }


@dataclass
class QueryStats:
    """Comparison accounting for one retrieval."""

    center_comparisons: int = 0
    member_comparisons: int = 0
    clusters_searched: set = field(default_factory=set)

    @property
    def comparisons(self) -> int:
        return self.center_comparisons + self.member_comparisons


@dataclass(frozen=True)
class CoverSummary:
    """Trailing record of a coverage run."""

    comparisons: int
    center_comparisons: int
    member_comparisons: int
    rounds: int
    clusters_searched: tuple[int, ...]
    uncovered_spans: tuple[tuple[int, int], ...]

    def to_dict(self) -> dict:
        return {
            "comparisons": self.comparisons,
            "center_comparisons": self.center_comparisons,
            "member_comparisons": self.member_comparisons,
            "rounds": self.rounds,
            "clusters_searched": list(self.clusters_searched),
            "uncovered_spans": [list(span) for span in self.uncovered_spans],
        }


def select_clusters(
    model: ClusterModel,
    pattern: SentencePattern,
    count: int,
    stats: QueryStats | None = None,
) -> list[int]:
    """Rank clusters by center similarity to the input; return the top ones.

    Ties break toward the smaller cluster index; ``count`` is clamped to the
    number of clusters.
    """
    scores = []
    for cluster in model.clusters:
        center = model.entries[cluster.center]
        scores.append(similarity_score(pattern, center.pattern, model.weights))
    if stats is not None:
        stats.center_comparisons += len(model.clusters)
    order = sorted(range(len(model.clusters)), key=lambda ci: (-scores[ci], ci))
    return order[: min(count, len(order))]


def _scan_best(
    model: ClusterModel,
    pattern: SentencePattern,
    cluster_indices: Sequence[int],
    stats: QueryStats | None = None,
) -> tuple[str, float] | None:
    """Raw best (entry_id, score) over the listed clusters' members.

    Ties break toward the smaller entry id; returns None when the listed
    clusters hold no entries.
    """
    best_id, best_score = None, -1.0
    scanned = 0
    for ci in cluster_indices:
        if stats is not None:
            stats.clusters_searched.add(ci)
        for member_id in model.clusters[ci].members:
            s = similarity_score(pattern, model.entries[member_id].pattern, model.weights)
            scanned += 1
            if s > best_score or (s == best_score and member_id < best_id):
                best_id, best_score = member_id, s
    if stats is not None:
        stats.member_comparisons += scanned
    if best_id is None:
        return None
    return best_id, best_score


def best_match_in_clusters(
    model: ClusterModel,
    pattern: SentencePattern,
    cluster_indices: Sequence[int],
    score_floor: float = 0.0,
    stats: QueryStats | None = None,
) -> Proposal | None:
    """Best proposal among the listed clusters, or None below the floor."""
    found = _scan_best(model, pattern, cluster_indices, stats)
    if found is None:
        return None
    entry_id, score = found
    if score < score_floor:
        return None
    entry = model.entries[entry_id]
    result = similarity(pattern, entry.pattern, model.weights)
    return Proposal(
        entry_id=entry_id,
        score=result.score,
        input_span=result.a_span,
        entry_span=result.b_span,
        target_text=entry.target_text,
        provenance=entry.provenance,
    )


def cover_input(
    model: ClusterModel,
    text: str,
    fwlex,
    taglex,
    config: QueryConfig | None = None,
) -> tuple[list[Proposal], CoverSummary]:
    """Cover an input sentence with archive segments.

    Returns proposals sorted by input span plus a summary with comparison
    counts and any token ranges left uncovered.
    """
    config = config or QueryConfig()
    surfaces = tokenize(text)
    pattern_cache: dict[tuple[int, int], SentencePattern] = {}

    def fragment_pattern(s: int, e: int) -> SentencePattern:
        key = (s, e)
        if key not in pattern_cache:
            pattern_cache[key] = encode_tokens(surfaces[s:e], fwlex, taglex)
        return pattern_cache[key]

    # Raises EmptySentenceError for inputs with no tokens.
    fragment_pattern(0, len(surfaces))

    stats = QueryStats()
    proposals: list[Proposal] = []
    fragments = [(0, len(surfaces))]
    rounds = 0
    while fragments and rounds < config.max_cover_rounds:
        rounds += 1
        s, e = fragments.pop(0)
        pattern = fragment_pattern(s, e)
        order = select_clusters(model, pattern, config.clusters_to_search, stats)
        proposal = best_match_in_clusters(model, pattern, order, 0.0, stats)
        if proposal is None or proposal.score < config.score_floor:
            continue
        span = proposal.input_span
        if span[0] == span[1]:
            continue
        if proposal.score >= config.cover_threshold:
            if span == (0, e - s):
                proposals.append(replace(proposal, input_span=(s, e)))
            else:
                pieces = [(s, s + span[0]), (s + span[0], s + span[1]), (s + span[1], e)]
                fragments.extend(p for p in pieces if p[0] < p[1])
        else:
            proposals.append(
                replace(proposal, input_span=(s + span[0], s + span[1]), partial=True)
            )

    proposals.sort(key=lambda p: p.input_span)
    covered = sorted(p.input_span for p in proposals)
    uncovered = []
    cursor = 0
    for a, b in covered:
        if a > cursor:
            uncovered.append((cursor, a))
        cursor = max(cursor, b)
    if cursor < len(surfaces):
        uncovered.append((cursor, len(surfaces)))
    summary = CoverSummary(
        comparisons=stats.comparisons,
        center_comparisons=stats.center_comparisons,
        member_comparisons=stats.member_comparisons,
        rounds=rounds,
        clusters_searched=tuple(sorted(stats.clusters_searched)),
        uncovered_spans=tuple(uncovered),
    )
    return proposals, summary
