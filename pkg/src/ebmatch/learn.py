"""Learning phase: cluster the archive, segment across clusters, repeat.

Clustering is a split-and-reassign variant of k-means adapted to a
similarity (not distance) measure: start from one cluster holding the whole
corpus, alternate minmax-center recomputation with reassignment until
stable, and while the stopping rule is unmet split the worst cluster by
seeding two provisional centers at its most dissimilar member pair.  A
cluster center is always a real corpus entry (a medoid): the member whose
worst similarity to any other member is best.

After each clustering pass, every entry is compared against the centers of
the other clusters.  A good-enough match (score at or above the
segmentation threshold) whose contributing span covers only part of the
entry marks that part as independently useful: the span is widened to the
enclosing marker-bounded unit and the entry is split there, once per entry
per pass.  The corpus is then reclustered, and the loop ends when a pass
creates no new segments.

Everything is deterministic: ties break toward smaller entry ids or smaller
cluster indices, and no randomness is involved anywhere.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import ConfigError
from .metric import MetricWeights, similarity, similarity_score
from .pattern import ArchiveEntry, expand_span_to_markers, split_entry


@dataclass(frozen=True)
class Cluster:
    """A cluster of entry ids represented by its medoid center."""

    center: str
    members: tuple[str, ...]


@dataclass(frozen=True)
class LearnConfig:
    """Stopping rules and safety bounds for the learning phase.

    At least one of ``k_target`` (grow to this many clusters) and
    ``min_intra_sim`` (split until every cluster's worst internal pair
    reaches this similarity) must be set.
    """

    k_target: int | None = None
    min_intra_sim: float | None = None
    seg_threshold: float = 0.8
    max_outer_iterations: int = 10
    max_reassign_rounds: int = 50

    def __post_init__(self):
        if self.k_target is None and self.min_intra_sim is None:
            raise ConfigError("set k_target and/or min_intra_sim")
        if self.k_target is not None and self.k_target < 1:
            raise ConfigError(f"k_target must be >= 1, got {self.k_target}")
        if self.min_intra_sim is not None and not 0.0 <= self.min_intra_sim <= 1.0:
            raise ConfigError(f"min_intra_sim must be in [0, 1], got {self.min_intra_sim}")
        if not 0.0 < self.seg_threshold <= 1.0:
            raise ConfigError(f"seg_threshold must be in (0, 1], got {self.seg_threshold}")
        if self.max_outer_iterations < 1 or self.max_reassign_rounds < 1:
            raise ConfigError("iteration bounds must be >= 1")


@dataclass
class LearnStats:
    """Outer-loop history: entry count and segments created per iteration."""

    outer_iterations: int = 0
    entry_counts: list[int] = field(default_factory=list)
    segments_created: list[int] = field(default_factory=list)


@dataclass
class ClusterModel:
    """Product of the learning phase: a clustered, segmented archive."""

    clusters: list[Cluster]
    entries: dict[str, ArchiveEntry]
    weights: MetricWeights
    config: LearnConfig
    stats: LearnStats = field(default_factory=LearnStats)

    @property
    def entry_count(self) -> int:
        return len(self.entries)


class SimilarityCache:
    """Memoizes pairwise scores keyed by pattern content signatures.

    Template corpora repeat both whole sentences and sub-units heavily, so
    keying by content instead of entry id collapses duplicate comparisons;
    segmentation can add entries without invalidating anything.  Scores are
    computed in one canonical orientation per signature pair (the metric is
    symmetric).
    """

    def __init__(self, entries, weights: MetricWeights):
        self.weights = weights
        self._sig_index: dict = {}
        self._repr_pattern: list = []
        self._idx_of_id: dict[str, int] = {}
        self._scores: dict[tuple[int, int], float] = {}
        self.add_entries(entries)

    def add_entries(self, entries):
        for entry in entries:
            sig = entry.pattern.signature
            idx = self._sig_index.get(sig)
            if idx is None:
                idx = len(self._repr_pattern)
                self._sig_index[sig] = idx
                self._repr_pattern.append(entry.pattern)
            self._idx_of_id[entry.id] = idx

    def score(self, id_a: str, id_b: str) -> float:
        ia, ib = self._idx_of_id[id_a], self._idx_of_id[id_b]
        if ia > ib:
            ia, ib = ib, ia
        key = (ia, ib)
        hit = self._scores.get(key)
        if hit is None:
            hit = similarity_score(
                self._repr_pattern[ia], self._repr_pattern[ib], self.weights
            )
            self._scores[key] = hit
        return hit


def minmax_center(members, cache: SimilarityCache) -> str:
    """Medoid of a member set: maximizes the minimum similarity to the rest.

    Ties break toward the smallest entry id; a singleton is its own center.
    """
    ids = sorted(members)
    if not ids:
        raise ValueError("cannot pick a center of an empty member set")
    if len(ids) == 1:
        return ids[0]
    best_id, best_worst = None, -1.0
    for candidate in ids:
        worst = min(
            cache.score(candidate, other) for other in ids if other != candidate
        )
        if worst > best_worst:
            best_id, best_worst = candidate, worst
    return best_id


def _intra_quality(members, cache: SimilarityCache) -> float:
    """Minimum pairwise similarity inside a cluster (1.0 for singletons)."""
    ids = sorted(members)
    if len(ids) < 2:
        return 1.0
    return min(
        cache.score(ids[i], ids[j])
        for i in range(len(ids))
        for j in range(i + 1, len(ids))
    )


def _assign(ids, centers, cache: SimilarityCache):
    """Assign every id to its most similar center (ties: smallest index)."""
    members: list[list[str]] = [[] for _ in centers]
    for entry_id in ids:
        best_ci, best_score = 0, -1.0
        for ci, center in enumerate(centers):
            s = cache.score(entry_id, center)
            if s > best_score:
                best_ci, best_score = ci, s
        members[best_ci].append(entry_id)
    return [m for m in members if m]


def _worst_pair(members, cache: SimilarityCache) -> tuple[str, str]:
    """Most dissimilar member pair (ties: lexicographically smallest pair)."""
    ids = sorted(members)
    worst, worst_score = None, 2.0
    for i in range(len(ids)):
        for j in range(i + 1, len(ids)):
            s = cache.score(ids[i], ids[j])
            if s < worst_score:
                worst, worst_score = (ids[i], ids[j]), s
    return worst


def cluster_corpus(
    entries,
    weights: MetricWeights,
    config: LearnConfig,
    cache: SimilarityCache | None = None,
) -> ClusterModel:
    """Partition the corpus into clusters with minmax medoid centers."""
    entries = list(entries)
    if not entries:
        raise ValueError("cannot cluster an empty corpus")
    if len({e.id for e in entries}) != len(entries):
        raise ValueError("duplicate entry ids in corpus")
    if config.k_target is not None and config.k_target > len(entries):
        raise ValueError(
            f"k_target {config.k_target} exceeds corpus size {len(entries)}"
        )
    if cache is None:
        cache = SimilarityCache(entries, weights)
    ids = [e.id for e in entries]
    members = [list(ids)]
    centers = [minmax_center(members[0], cache)]

    # A cluster of effectively identical patterns cannot be split: the two
    # seeds tie against every member, so reassignment (ties to the smaller
    # cluster index) immediately re-merges the halves.
    def splittable(member_ids) -> bool:
        return len(member_ids) >= 2 and _intra_quality(member_ids, cache) < 1.0 - 1e-9

    for _ in range(len(entries)):  # split budget; one split per pass
        for _ in range(config.max_reassign_rounds):
            centers = [minmax_center(m, cache) for m in members]
            reassigned = _assign(ids, centers, cache)
            if reassigned == members:
                break
            members = reassigned
        else:
            centers = [minmax_center(m, cache) for m in members]

        need_split = False
        if config.k_target is not None and len(members) < config.k_target:
            need_split = True
        if config.min_intra_sim is not None and any(
            _intra_quality(m, cache) < config.min_intra_sim for m in members
        ):
            need_split = True
        if not need_split:
            break
        candidates = [ci for ci, m in enumerate(members) if splittable(m)]
        if not candidates:
            break
        worst_ci = min(candidates, key=lambda ci: (_intra_quality(members[ci], cache), ci))
        seed_a, seed_b = _worst_pair(members[worst_ci], cache)
        group_a, group_b = [], []
        for entry_id in members[worst_ci]:
            if entry_id == seed_b:
                group_b.append(entry_id)
            elif cache.score(entry_id, seed_a) >= cache.score(entry_id, seed_b):
                group_a.append(entry_id)
            else:
                group_b.append(entry_id)
        members[worst_ci] = group_a
        members.append(group_b)

    clusters = [
        Cluster(center=c, members=tuple(m)) for c, m in zip(centers, members)
    ]
    return ClusterModel(
        clusters=clusters,
        entries={e.id: e for e in entries},
        weights=weights,
        config=config,
    )


def cross_cluster_segmentation(
    model: ClusterModel,
    seg_threshold: float,
    fwlex,
    taglex,
    cache: SimilarityCache | None = None,
) -> tuple[list[ArchiveEntry], int]:
    """Split entries whose part matches another cluster's center well enough.

    For each entry, the centers of the other clusters are tried from the
    highest-scoring qualifying one down.  A match at or above the threshold
    whose contributing span is a proper, non-empty part of the entry is
    widened to the enclosing marker-bounded unit; if that unit is itself a
    proper part, the entry is split at its boundary.  Each entry splits at
    most once per invocation.  Returns the updated corpus (children replace
    their parent in place) and the number of splits performed.
    """
    if cache is None:
        cache = SimilarityCache(model.entries.values(), model.weights)
    centers = [c.center for c in model.clusters]
    own: dict[str, int] = {}
    for ci, cluster in enumerate(model.clusters):
        for entry_id in cluster.members:
            own[entry_id] = ci

    out: list[ArchiveEntry] = []
    created = 0
    for entry in model.entries.values():
        if not entry.internal_markers:
            out.append(entry)
            continue
        candidates = []
        for ci, center_id in enumerate(centers):
            if own.get(entry.id) == ci or center_id == entry.id:
                continue
            s = cache.score(entry.id, center_id)
            if s >= seg_threshold:
                candidates.append((-s, ci, center_id))
        candidates.sort()

        split_children = None
        n = entry.token_count
        for _, ci, center_id in candidates:
            result = similarity(
                entry.pattern, model.entries[center_id].pattern, model.weights
            )
            span = result.a_span
            if span[0] == span[1] or span == (0, n):
                continue
            (lo, hi), _tgt = expand_span_to_markers(entry, span)
            if (lo, hi) == (0, n):
                continue
            boundary = lo if lo > 0 else hi
            split_children = split_entry(entry, boundary, fwlex, taglex)
            break
        if split_children is None:
            out.append(entry)
        else:
            out.extend(split_children)
            cache.add_entries(split_children)
            created += 1
    return out, created


def learn(
    entries,
    fwlex,
    taglex,
    weights: MetricWeights | None = None,
    config: LearnConfig | None = None,
) -> ClusterModel:
    """Alternate clustering and segmentation until no new segments appear.

    The returned model clusters the final (segmented) corpus; its stats
    record the entry count and segments created per outer iteration.
    """
    weights = weights or MetricWeights()
    config = config or LearnConfig(k_target=1)
    current = list(entries)
    cache = SimilarityCache(current, weights)
    counts: list[int] = []
    created_history: list[int] = []
    model = None
    for _ in range(config.max_outer_iterations):
        model = cluster_corpus(current, weights, config, cache=cache)
        current, created = cross_cluster_segmentation(
            model, config.seg_threshold, fwlex, taglex, cache=cache
        )
        counts.append(len(current))
        created_history.append(created)
        if created == 0:
            break
    else:
        # Safety bound hit with segments still appearing: recluster the
        # segmented corpus so the model matches the final entries.
        model = cluster_corpus(current, weights, config, cache=cache)
    model.stats = LearnStats(
        outer_iterations=len(counts),
        entry_counts=counts,
        segments_created=created_history,
    )
    return model
