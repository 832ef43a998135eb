import pytest

from ebmatch import (
    ConfigError,
    LearnConfig,
    MetricWeights,
    SimilarityCache,
    cluster_corpus,
    cross_cluster_segmentation,
    learn,
    make_entry,
    minmax_center,
    similarity_score,
)

from conftest import FW_TSV, TAG_TSV
from ebmatch import load_function_word_lexicon, load_tag_lexicon

_FWLEX = load_function_word_lexicon(FW_TSV)
_TAGLEX = load_tag_lexicon(TAG_TSV)
_W = MetricWeights()


def _entry(entry_id, source, markers=()):
    target = " ".join("x" + tok for tok in source.split())
    return make_entry(entry_id, source, target, list(markers), _FWLEX, _TAGLEX)


class _FakeCache:
    """Dict-backed similarity source for center-selection unit tests."""

    def __init__(self, scores):
        self._scores = scores

    def score(self, a, b):
        return self._scores[frozenset((a, b))]


# Two families that share no function words, lemmas or tags, so
# cross-family similarity is exactly zero.
_FAMILY_A = [
    "the export refund for cereals",
    "the export refund for rice",
    "the export refund for sugar",
    "the export refund for wheat",
]
_FAMILY_B = [
    "out slowly red",
    "out slowly green",
    "out quickly red",
]


class TestMinmaxCenter:
    def test_singleton(self):
        cache = _FakeCache({})
        assert minmax_center(["e1"], cache) == "e1"

    def test_three_member_case(self):
        cache = _FakeCache({
            frozenset(("a", "b")): 0.9,
            frozenset(("a", "c")): 0.8,
            frozenset(("b", "c")): 0.5,
        })
        # worst similarity: a -> 0.8, b -> 0.5, c -> 0.5
        assert minmax_center(["a", "b", "c"], cache) == "a"

    def test_all_equal_breaks_to_smallest_id(self):
        cache = _FakeCache({
            frozenset(("x", "y")): 0.7,
            frozenset(("x", "z")): 0.7,
            frozenset(("y", "z")): 0.7,
        })
        assert minmax_center(["z", "y", "x"], cache) == "x"

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            minmax_center([], _FakeCache({}))


class TestLearnConfig:
    def test_needs_a_stopping_rule(self):
        with pytest.raises(ConfigError):
            LearnConfig()

    def test_threshold_range(self):
        with pytest.raises(ConfigError):
            LearnConfig(k_target=1, seg_threshold=0.0)
        with pytest.raises(ConfigError):
            LearnConfig(k_target=1, seg_threshold=1.2)


class TestClusterCorpus:
    def test_single_entry(self):
        entries = [_entry("e0", _FAMILY_A[0])]
        model = cluster_corpus(entries, _W, LearnConfig(k_target=1))
        assert len(model.clusters) == 1
        assert model.clusters[0].center == "e0"
        assert model.clusters[0].members == ("e0",)

    def test_two_separated_families(self):
        entries = [
            _entry(f"a{i}", s) for i, s in enumerate(_FAMILY_A)
        ] + [
            _entry(f"b{i}", s) for i, s in enumerate(_FAMILY_B)
        ]
        model = cluster_corpus(entries, _W, LearnConfig(k_target=2))
        groups = [set(c.members) for c in model.clusters]
        assert {frozenset(g) for g in groups} == {
            frozenset({"a0", "a1", "a2", "a3"}),
            frozenset({"b0", "b1", "b2"}),
        }

    def test_k_equals_entry_count_gives_singletons(self):
        entries = [_entry(f"a{i}", s) for i, s in enumerate(_FAMILY_A)]
        model = cluster_corpus(entries, _W, LearnConfig(k_target=4))
        assert sorted(len(c.members) for c in model.clusters) == [1, 1, 1, 1]

    def test_k_above_entry_count_rejected(self):
        entries = [_entry("e0", _FAMILY_A[0])]
        with pytest.raises(ValueError):
            cluster_corpus(entries, _W, LearnConfig(k_target=2))

    def test_duplicate_ids_rejected(self):
        entries = [_entry("same", _FAMILY_A[0]), _entry("same", _FAMILY_A[1])]
        with pytest.raises(ValueError):
            cluster_corpus(entries, _W, LearnConfig(k_target=1))

    def test_identical_patterns_stop_splitting(self):
        # identical entries can never be torn apart by reassignment, so a
        # k_target above the distinct-pattern count stops early instead of
        # looping or crashing
        entries = [_entry(f"e{i}", _FAMILY_A[0]) for i in range(4)]
        model = cluster_corpus(entries, _W, LearnConfig(k_target=3))
        assert len(model.clusters) == 1
        assert model.clusters[0].members == ("e0", "e1", "e2", "e3")

    def test_duplicate_groups_partition_by_pattern(self):
        entries = [_entry(f"a{i}", _FAMILY_A[0]) for i in range(3)] + [
            _entry(f"b{i}", _FAMILY_B[0]) for i in range(3)
        ]
        model = cluster_corpus(entries, _W, LearnConfig(k_target=4))
        groups = sorted(tuple(c.members) for c in model.clusters)
        assert groups == [("a0", "a1", "a2"), ("b0", "b1", "b2")]

    def test_partition_invariant(self):
        entries = [_entry(f"a{i}", s) for i, s in enumerate(_FAMILY_A)] + [
            _entry(f"b{i}", s) for i, s in enumerate(_FAMILY_B)
        ]
        model = cluster_corpus(entries, _W, LearnConfig(k_target=3))
        seen = [m for c in model.clusters for m in c.members]
        assert sorted(seen) == sorted(e.id for e in entries)
        for cluster in model.clusters:
            assert cluster.center in cluster.members

    def test_assignment_stability_at_convergence(self):
        entries = [_entry(f"a{i}", s) for i, s in enumerate(_FAMILY_A)] + [
            _entry(f"b{i}", s) for i, s in enumerate(_FAMILY_B)
        ]
        cache = SimilarityCache(entries, _W)
        model = cluster_corpus(entries, _W, LearnConfig(k_target=3), cache=cache)
        centers = [c.center for c in model.clusters]
        for ci, cluster in enumerate(model.clusters):
            for member in cluster.members:
                own = cache.score(member, centers[ci])
                best = max(cache.score(member, center) for center in centers)
                assert own == best


class TestSegmentation:
    def _two_cluster_model(self):
        # ab: two marker-delimited units; the "the export refund..." unit
        # also exists on its own in another cluster
        ab = _entry(
            "ab",
            "the export refund for cereals out slowly red",
            markers=[[5, 5]],
        )
        single = _entry("single", "the export refund for cereals")
        other = _entry("other", "the export refund for rice")
        entries = [ab, single, other]
        model = cluster_corpus(entries, _W, LearnConfig(k_target=2))
        return model, ab

    def test_split_at_marker(self):
        model, ab = self._two_cluster_model()
        updated, created = cross_cluster_segmentation(model, 0.35, _FWLEX, _TAGLEX)
        assert created == 1
        by_id = {e.id for e in updated}
        assert "ab" not in by_id
        children = [e for e in updated if e.provenance is not None]
        assert len(children) == 2
        assert {c.provenance.origin_range for c in children} == {(0, 5), (5, 8)}
        assert {c.source_text for c in children} == {
            "the export refund for cereals",
            "out slowly red",
        }

    def test_threshold_respected(self):
        model, _ = self._two_cluster_model()
        _, created = cross_cluster_segmentation(model, 0.99, _FWLEX, _TAGLEX)
        assert created == 0

    def test_whole_entry_match_never_splits(self):
        # "single" matches "other"'s cluster center across its whole span
        entries = [
            _entry("single", "the export refund for cereals", markers=[[2, 2]]),
            _entry("other", "the export refund for cereals"),
            _entry("junk", "out slowly red"),
        ]
        model = cluster_corpus(entries, _W, LearnConfig(k_target=2))
        updated, created = cross_cluster_segmentation(model, 0.35, _FWLEX, _TAGLEX)
        assert created == 0
        assert [e.id for e in updated] == ["single", "other", "junk"]

    def test_entries_without_markers_never_split(self):
        model, _ = self._two_cluster_model()
        no_marker_entries = [e for e in model.entries.values() if not e.internal_markers]
        assert no_marker_entries
        updated, _ = cross_cluster_segmentation(model, 0.01, _FWLEX, _TAGLEX)
        for entry in no_marker_entries:
            assert entry.id in {e.id for e in updated}


class TestLearn:
    def test_no_markers_converges_immediately(self):
        entries = [_entry(f"a{i}", s) for i, s in enumerate(_FAMILY_A)]
        model = learn(entries, _FWLEX, _TAGLEX, _W, LearnConfig(k_target=2))
        assert model.stats.outer_iterations == 1
        assert model.stats.segments_created == [0]
        assert model.entry_count == len(entries)

    def test_segmenting_corpus_converges_and_grows(self):
        pool = _FAMILY_A + ["out slowly red", "out quickly green"]
        entries = []
        idx = 0
        for first in pool:
            for second in pool:
                if first == second:
                    continue
                boundary = len(first.split())
                entries.append(
                    _entry(f"e{idx:03d}", f"{first} {second}", markers=[[boundary, boundary]])
                )
                idx += 1
        config = LearnConfig(min_intra_sim=0.55, seg_threshold=0.33, max_outer_iterations=8)
        model = learn(entries, _FWLEX, _TAGLEX, _W, config)
        assert model.stats.segments_created[-1] == 0
        assert model.entry_count > len(entries)
        counts = model.stats.entry_counts
        assert all(b >= a for a, b in zip(counts, counts[1:]))
        # final model clusters exactly the final corpus
        clustered = sorted(m for c in model.clusters for m in c.members)
        assert clustered == sorted(model.entries)

    def test_deterministic(self):
        entries = [_entry(f"a{i}", s) for i, s in enumerate(_FAMILY_A)] + [
            _entry(f"b{i}", s) for i, s in enumerate(_FAMILY_B)
        ]
        config = LearnConfig(k_target=3)
        one = learn(entries, _FWLEX, _TAGLEX, _W, config)
        two = learn(entries, _FWLEX, _TAGLEX, _W, config)
        assert [(c.center, c.members) for c in one.clusters] == [
            (c.center, c.members) for c in two.clusters
        ]
        assert list(one.entries) == list(two.entries)


class TestSimilarityCache:
    def test_matches_direct_computation(self):
        entries = [_entry(f"a{i}", s) for i, s in enumerate(_FAMILY_A)]
        cache = SimilarityCache(entries, _W)
        direct = similarity_score(entries[0].pattern, entries[1].pattern, _W)
        assert cache.score("a0", "a1") == direct
        assert cache.score("a1", "a0") == direct

    def test_duplicate_patterns_share_one_slot(self):
        entries = [
            _entry("x1", _FAMILY_A[0]),
            _entry("x2", _FAMILY_A[0]),
            _entry("y", _FAMILY_A[1]),
        ]
        cache = SimilarityCache(entries, _W)
        assert cache.score("x1", "y") == cache.score("x2", "y")
        assert len(cache._scores) == 1
