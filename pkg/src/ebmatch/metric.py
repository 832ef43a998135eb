"""Two-level dynamic-programming similarity between sentence patterns.

The first level aligns the sentinel-extended function-word sequences of the
two sentences.  Moving diagonally matches a pair of slots (scoring the full
match value for identical function words, the weaker group value for
distinct words sharing a group, zero for the sentinel pair) and, in the
same step, runs the second-level DP over the content blocks immediately
preceding the matched slots.  Horizontal and vertical moves skip one slot
and charge a penalty.  Every cell is floored at zero, so a path whose
accumulated score is exhausted by penalties simply restarts: how many
insertions or deletions an alignment can absorb depends on the score it has
accumulated so far.  The overall score is the best cell anywhere in the
matrix, which lets the tail of one sentence align with the head of the
other.

The second level runs the same floored local DP over the content tokens of
a block pair: a diagonal needs overlapping lemma sets (full content match
value) or, failing that, overlapping ambiguity classes (the weaker tag
value); skips charge the content penalty.

All six scores are derived per sentence pair so that identical sentences
total exactly 1.0: the function-word level shares ``w_f`` between the
max(m_a, m_b) slots, and the remaining weight is split across the m+1 block
pairs; within a block pair the budget is divided by the longer block
length.  A pair of empty blocks counts as fully matched, which the identity
total requires.  Backtracking from the best cell to the nearest floored
cell recovers the matched slot pairs, the scored block pairs and the token
spans that produced the score.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from functools import lru_cache

from .errors import ConfigError, EmptySentenceError
from .pattern import FwSlot, SentencePattern

_NONE, _DIAG, _UP, _LEFT = 0, 1, 2, 3


@dataclass(frozen=True)
class MetricWeights:
    """User-level knobs the per-pair scores are derived from.

    ``w_f`` is the fraction of the total score carried by the function-word
    level; the ratios tie the group match, skip penalties and tag match to
    their stronger counterparts.
    """

    w_f: float = 0.5
    g_ratio: float = 0.5
    p_ratio: float = 0.5
    t_ratio: float = 0.5
    pt_ratio: float = 0.5

    def __post_init__(self):
        if not 0.0 <= self.w_f <= 1.0:
            raise ConfigError(f"w_f must be in [0, 1], got {self.w_f}")
        if not 0.0 < self.g_ratio < 1.0:
            raise ConfigError(f"g_ratio must be in (0, 1), got {self.g_ratio}")
        if self.p_ratio <= 0.0:
            raise ConfigError(f"p_ratio must be positive, got {self.p_ratio}")
        if not 0.0 < self.t_ratio < 1.0:
            raise ConfigError(f"t_ratio must be in (0, 1), got {self.t_ratio}")
        if self.pt_ratio <= 0.0:
            raise ConfigError(f"pt_ratio must be positive, got {self.pt_ratio}")


@dataclass(frozen=True)
class ParamSet:
    """Concrete scores for one sentence pair.

    ``fw_match`` / ``fw_group`` / ``fw_gap`` drive the slot-level DP;
    ``block_budget`` is the score a fully matched block pair is worth, and
    the two ratios derive the per-token tag score and content penalty from
    the per-token match score inside each block pair.
    """

    fw_match: float
    fw_group: float
    fw_gap: float
    block_budget: float
    tag_ratio: float
    content_gap_ratio: float


class MatchLevel(Enum):
    IDENTICAL = "I"
    SAME_GROUP = "G"
    NO_MATCH = "none"


@dataclass(frozen=True)
class MatchResult:
    """Similarity score plus the parts of both sentences that produced it.

    ``fw_alignment`` lists matched real slot pairs (a_slot, b_slot, level)
    with level "I" or "G"; ``block_pairs`` lists the block index pairs
    scored along the alignment, including the ones anchored to sentinels.
    Spans are half-open token ranges; a zero score carries empty spans.
    """

    score: float
    a_span: tuple[int, int]
    b_span: tuple[int, int]
    fw_alignment: tuple[tuple[int, int, str], ...]
    block_pairs: tuple[tuple[int, int], ...]


def derive_params(a: SentencePattern, b: SentencePattern, weights: MetricWeights) -> ParamSet:
    """Derive the six scores for a sentence pair from lengths and weights.

    Normalizing by the larger slot count and the larger block length makes
    the full diagonal of an identical pair total exactly 1.0.  With no
    function words on either side, all weight shifts to the single content
    block comparison.
    """
    m = max(a.fw_count, b.fw_count)
    if m == 0:
        return ParamSet(
            fw_match=0.0,
            fw_group=0.0,
            fw_gap=0.0,
            block_budget=1.0,
            tag_ratio=weights.t_ratio,
            content_gap_ratio=weights.pt_ratio,
        )
    fw_match = weights.w_f / m
    return ParamSet(
        fw_match=fw_match,
        fw_group=weights.g_ratio * fw_match,
        fw_gap=weights.p_ratio * fw_match,
        block_budget=(1.0 - weights.w_f) / (m + 1),
        tag_ratio=weights.t_ratio,
        content_gap_ratio=weights.pt_ratio,
    )


def fw_match_level(a: FwSlot, b: FwSlot) -> MatchLevel:
    """Identical beats same-group; group sets must intersect for the latter."""
    if a.fw_id == b.fw_id:
        return MatchLevel.IDENTICAL
    if a.groups & b.groups:
        return MatchLevel.SAME_GROUP
    return MatchLevel.NO_MATCH


def _block_dp(sig_a, sig_b, tag_ratio: float, content_gap_ratio: float):
    """Floored local DP over two block signatures, scores normalized so a
    full match totals 1.0.  Returns (best, moves, best_cell)."""
    la, lb = len(sig_a), len(sig_b)
    if la == 0 and lb == 0:
        return 1.0, None, (0, 0)
    if la == 0 or lb == 0:
        return 0.0, None, (0, 0)
    match = 1.0 / max(la, lb)
    tag = tag_ratio * match
    gap = content_gap_ratio * match
    lemmas_a = [frozenset(lem) for lem, _ in sig_a]
    tags_a = [frozenset(tg) for _, tg in sig_a]
    lemmas_b = [frozenset(lem) for lem, _ in sig_b]
    tags_b = [frozenset(tg) for _, tg in sig_b]

    score = [[0.0] * (lb + 1) for _ in range(la + 1)]
    moves = [[_NONE] * (lb + 1) for _ in range(la + 1)]
    best, best_cell = 0.0, (0, 0)
    for i in range(1, la + 1):
        row, above = score[i], score[i - 1]
        move_row = moves[i]
        for j in range(1, lb + 1):
            cell, move = 0.0, _NONE
            if lemmas_a[i - 1] & lemmas_b[j - 1]:
                cand = above[j - 1] + match
                if cand > cell:
                    cell, move = cand, _DIAG
            elif tags_a[i - 1] & tags_b[j - 1]:
                cand = above[j - 1] + tag
                if cand > cell:
                    cell, move = cand, _DIAG
            cand = above[j] - gap
            if cand > cell:
                cell, move = cand, _UP
            cand = row[j - 1] - gap
            if cand > cell:
                cell, move = cand, _LEFT
            row[j] = cell
            move_row[j] = move
            if cell >= best:
                best, best_cell = cell, (i, j)
    return best, moves, best_cell


@lru_cache(maxsize=262144)
def _block_score(sig_a, sig_b, tag_ratio: float, content_gap_ratio: float) -> float:
    return _block_dp(sig_a, sig_b, tag_ratio, content_gap_ratio)[0]


def _block_matched_positions(sig_a, sig_b, tag_ratio, content_gap_ratio):
    """Matched (i, j) token positions along the block-level backtrack."""
    _, moves, cell = _block_dp(sig_a, sig_b, tag_ratio, content_gap_ratio)
    pairs = []
    if moves is None:
        return pairs
    i, j = cell
    while moves[i][j] != _NONE:
        mv = moves[i][j]
        if mv == _DIAG:
            pairs.append((i - 1, j - 1))
            i, j = i - 1, j - 1
        elif mv == _UP:
            i -= 1
        else:
            j -= 1
    pairs.reverse()
    return pairs


def block_similarity(block_a, block_b, params: ParamSet) -> float:
    """Similarity contribution of one block pair (either block may be empty).

    A pair of empty blocks is worth the full block budget; one-sided empty
    blocks contribute nothing.
    """
    sig_a = tuple(
        (tuple(sorted(t.lemmas)), tuple(sorted(t.ambiguity_class))) for t in block_a
    )
    sig_b = tuple(
        (tuple(sorted(t.lemmas)), tuple(sorted(t.ambiguity_class))) for t in block_b
    )
    return params.block_budget * _block_score(
        sig_a, sig_b, params.tag_ratio, params.content_gap_ratio
    )


def _pair_dp(a: SentencePattern, b: SentencePattern, params: ParamSet):
    """Slot-level DP over sentinel-extended sequences.

    Extended index i covers 0 (start sentinel), 1..m (real slots) and m+1
    (end sentinel).  A diagonal into (i, j) consumes extended slots i and j
    plus the blocks preceding them; sentinels only match sentinels, which
    confines sentinel diagonals to the end-end cell.  Returns (score
    matrix, move matrix, best, best_cell).
    """
    ma, mb = a.fw_count, b.fw_count
    slots_a, slots_b = a.fw_slots, b.fw_slots
    bsig_a, bsig_b = a.signature[1], b.signature[1]
    fw_match, fw_group, gap = params.fw_match, params.fw_group, params.fw_gap
    budget = params.block_budget
    tag_ratio, content_gap_ratio = params.tag_ratio, params.content_gap_ratio

    rows, cols = ma + 2, mb + 2
    score = [[0.0] * cols for _ in range(rows)]
    moves = [[_NONE] * cols for _ in range(rows)]
    best, best_cell = 0.0, (0, 0)
    for i in range(1, rows):
        a_real = i <= ma
        row, above = score[i], score[i - 1]
        move_row = moves[i]
        for j in range(1, cols):
            b_real = j <= mb
            cell, move = 0.0, _NONE
            if a_real and b_real:
                level = fw_match_level(slots_a[i - 1], slots_b[j - 1])
                fw_gain = (
                    fw_match
                    if level is MatchLevel.IDENTICAL
                    else fw_group
                    if level is MatchLevel.SAME_GROUP
                    else None
                )
            elif not a_real and not b_real:
                fw_gain = 0.0
            else:
                fw_gain = None
            if fw_gain is not None:
                block = budget * _block_score(
                    bsig_a[i - 1], bsig_b[j - 1], tag_ratio, content_gap_ratio
                )
                cand = above[j - 1] + fw_gain + block
                if cand > cell:
                    cell, move = cand, _DIAG
            cand = above[j] - gap
            if cand > cell:
                cell, move = cand, _UP
            cand = row[j - 1] - gap
            if cand > cell:
                cell, move = cand, _LEFT
            row[j] = cell
            move_row[j] = move
            if cell >= best:
                best, best_cell = cell, (i, j)
    return score, moves, best, best_cell


def _require_nonempty(a: SentencePattern, b: SentencePattern):
    if not a.tokens or not b.tokens:
        raise EmptySentenceError("similarity requires two non-empty patterns")


def similarity_score(a: SentencePattern, b: SentencePattern, weights: MetricWeights) -> float:
    """Similarity score only; cheaper than ``similarity`` (no backtracking)."""
    _require_nonempty(a, b)
    params = derive_params(a, b, weights)
    return _pair_dp(a, b, params)[2]


def similarity(a: SentencePattern, b: SentencePattern, weights: MetricWeights) -> MatchResult:
    """Score a pattern pair and backtrack the contributing parts.

    The backtrack walks from the best cell to the nearest floored cell.
    The reported spans are the hulls of the matched slot tokens together
    with the token pairs matched inside the scored blocks.
    """
    _require_nonempty(a, b)
    params = derive_params(a, b, weights)
    _, moves, best, best_cell = _pair_dp(a, b, params)
    if best <= 0.0:
        return MatchResult(0.0, (0, 0), (0, 0), (), ())

    path = []
    i, j = best_cell
    while moves[i][j] != _NONE:
        mv = moves[i][j]
        if mv == _DIAG:
            path.append((i, j))
            i, j = i - 1, j - 1
        elif mv == _UP:
            i -= 1
        else:
            j -= 1
    path.reverse()

    ma, mb = a.fw_count, b.fw_count
    bsig_a, bsig_b = a.signature[1], b.signature[1]
    fw_alignment = []
    block_pairs = []
    a_tokens: list[int] = []
    b_tokens: list[int] = []
    for i, j in path:
        block_pairs.append((i - 1, j - 1))
        if i <= ma and j <= mb:
            slot_a, slot_b = a.fw_slots[i - 1], b.fw_slots[j - 1]
            level = fw_match_level(slot_a, slot_b)
            fw_alignment.append((i - 1, j - 1, level.value))
            a_tokens.append(slot_a.index)
            b_tokens.append(slot_b.index)
        for p, q in _block_matched_positions(
            bsig_a[i - 1], bsig_b[j - 1], params.tag_ratio, params.content_gap_ratio
        ):
            a_tokens.append(a.blocks[i - 1][p])
            b_tokens.append(b.blocks[j - 1][q])

    a_span = (min(a_tokens), max(a_tokens) + 1) if a_tokens else (0, 0)
    b_span = (min(b_tokens), max(b_tokens) + 1) if b_tokens else (0, 0)
    return MatchResult(
        score=best,
        a_span=a_span,
        b_span=b_span,
        fw_alignment=tuple(fw_alignment),
        block_pairs=tuple(block_pairs),
    )
