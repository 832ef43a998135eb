"""Sentence patterns, archive entries and marker-constrained segmentation.

A sentence is encoded as an alternation of function-word slots and content
blocks: with m function words there are m+1 blocks, ``blocks[k]`` holding
the content tokens strictly between slot k-1 and slot k in sentinel-extended
order (virtual sentinels sit before the first and after the last token).
Interleaving blocks and slots reconstructs the token sequence exactly.

Archive entries pair a source pattern with its target text plus aligned
segmentation markers: token-boundary pairs, one per language, at which the
entry may be split into independently translatable units.  Marker pairs are
strictly increasing on both sides and always include both sentence ends.
"""

from __future__ import annotations

import unicodedata
from dataclasses import dataclass
from functools import cached_property
from typing import NamedTuple

from .errors import ArchiveFormatError, EmptySentenceError
from .lexicon import FunctionWord, FunctionWordLexicon, TagLexicon, Token, classify_token


def _is_punct(ch: str) -> bool:
    return unicodedata.category(ch).startswith("P")


def tokenize_spans(text: str) -> list[tuple[str, int, int]]:
    """Tokenize keeping character offsets; returns (surface, start, end) triples.

    Whitespace separates chunks; leading and trailing punctuation is stripped
    off each chunk, and chunks that were pure punctuation are dropped.
    Punctuation inside a token ("well-known") is kept.
    """
    out = []
    pos = 0
    n = len(text)
    while pos < n:
        while pos < n and text[pos].isspace():
            pos += 1
        if pos >= n:
            break
        end = pos
        while end < n and not text[end].isspace():
            end += 1
        b, e = pos, end
        while b < e and _is_punct(text[b]):
            b += 1
        while e > b and _is_punct(text[e - 1]):
            e -= 1
        if e > b:
            out.append((text[b:e], b, e))
        pos = end
    return out


def tokenize(text: str) -> list[str]:
    """Surface tokens of ``text`` with punctuation-only tokens dropped."""
    return [surface for surface, _, _ in tokenize_spans(text)]


class FwSlot(NamedTuple):
    """A real function-word occurrence: token position, identity, groups."""

    index: int
    fw_id: str
    groups: frozenset[str]


@dataclass(frozen=True)
class SentencePattern:
    """Ordered alternation of content blocks and function-word slots.

    ``blocks`` has ``len(fw_slots) + 1`` elements of token indices; blocks
    may be empty.  The pattern never holds zero tokens (encoding rejects
    empty sentences).
    """

    tokens: tuple[Token, ...]
    fw_slots: tuple[FwSlot, ...]
    blocks: tuple[tuple[int, ...], ...]

    @property
    def fw_count(self) -> int:
        return len(self.fw_slots)

    def block_tokens(self, k: int) -> tuple[Token, ...]:
        return tuple(self.tokens[i] for i in self.blocks[k])

    @cached_property
    def signature(self):
        """Content-only key: two patterns with equal signatures score alike.

        Token positions and raw surfaces are excluded; only the features the
        similarity metric reads (fw identities/groups, block lemma/tag sets)
        participate.  Built from sorted tuples so signatures are hashable
        and totally ordered.
        """
        fw_sig = tuple((s.fw_id, tuple(sorted(s.groups))) for s in self.fw_slots)
        block_sigs = tuple(
            tuple(
                (tuple(sorted(tok.lemmas)), tuple(sorted(tok.ambiguity_class)))
                for tok in self.block_tokens(k)
            )
            for k in range(len(self.blocks))
        )
        return (fw_sig, block_sigs)


def encode_tokens(surfaces, fwlex: FunctionWordLexicon, taglex: TagLexicon) -> SentencePattern:
    """Encode an already-tokenized sentence into a pattern."""
    surfaces = list(surfaces)
    if not surfaces:
        raise EmptySentenceError("cannot encode an empty sentence")
    tokens = tuple(classify_token(s, fwlex, taglex) for s in surfaces)
    fw_slots = tuple(
        FwSlot(index=i, fw_id=tok.fw_id, groups=tok.groups)
        for i, tok in enumerate(tokens)
        if isinstance(tok, FunctionWord)
    )
    bounds = [-1] + [slot.index for slot in fw_slots] + [len(tokens)]
    blocks = tuple(
        tuple(range(bounds[k] + 1, bounds[k + 1])) for k in range(len(bounds) - 1)
    )
    return SentencePattern(tokens=tokens, fw_slots=fw_slots, blocks=blocks)


def encode_sentence(text: str, fwlex: FunctionWordLexicon, taglex: TagLexicon) -> SentencePattern:
    """Tokenize and encode a raw sentence."""
    return encode_tokens(tokenize(text), fwlex, taglex)


@dataclass(frozen=True)
class Provenance:
    """Where a segment came from: original entry id and token range in it."""

    origin_id: str
    origin_range: tuple[int, int]


@dataclass(frozen=True)
class ArchiveEntry:
    """A stored translation example: source pattern, target, markers."""

    id: str
    source_text: str
    target_text: str
    pattern: SentencePattern
    markers: tuple[tuple[int, int], ...]
    provenance: Provenance | None = None

    @property
    def token_count(self) -> int:
        return len(self.pattern.tokens)

    @property
    def internal_markers(self) -> tuple[tuple[int, int], ...]:
        return self.markers[1:-1]


def _validate_markers(markers, src_count: int, tgt_count: int) -> tuple[tuple[int, int], ...]:
    pairs = [(int(s), int(t)) for s, t in markers]
    if (0, 0) not in pairs:
        pairs.insert(0, (0, 0))
    if (src_count, tgt_count) not in pairs:
        pairs.append((src_count, tgt_count))
    prev_s, prev_t = -1, -1
    for s, t in pairs:
        if not (0 <= s <= src_count) or not (0 <= t <= tgt_count):
            raise ArchiveFormatError(
                f"marker ({s},{t}) outside token bounds ({src_count},{tgt_count})"
            )
        if s <= prev_s or t <= prev_t:
            raise ArchiveFormatError(
                f"markers must be strictly increasing on both sides, got ({s},{t}) after ({prev_s},{prev_t})"
            )
        prev_s, prev_t = s, t
    return tuple(pairs)


def make_entry(
    entry_id: str,
    source_text: str,
    target_text: str,
    markers,
    fwlex: FunctionWordLexicon,
    taglex: TagLexicon,
    provenance: Provenance | None = None,
) -> ArchiveEntry:
    """Build a validated archive entry, encoding the source pattern.

    ``markers`` lists (source_boundary, target_boundary) pairs in token
    coordinates; the implicit end markers are added when missing.
    """
    pattern = encode_sentence(source_text, fwlex, taglex)
    tgt_count = len(tokenize(target_text))
    if tgt_count == 0:
        raise ArchiveFormatError("entry has an empty target text")
    validated = _validate_markers(markers, len(pattern.tokens), tgt_count)
    return ArchiveEntry(
        id=entry_id,
        source_text=source_text,
        target_text=target_text,
        pattern=pattern,
        markers=validated,
        provenance=provenance,
    )


def expand_span_to_markers(entry: ArchiveEntry, span: tuple[int, int]) -> tuple[tuple[int, int], tuple[int, int]]:
    """Smallest marker-bounded source range containing ``span``, with the
    target range between the same marker pair.

    Idempotent: expanding an already marker-aligned range returns it
    unchanged.
    """
    start, end = span
    n = entry.token_count
    if not (0 <= start <= end <= n):
        raise ValueError(f"span {span} out of bounds for entry of {n} tokens")
    lo_s, lo_t = max((pair for pair in entry.markers if pair[0] <= start), key=lambda p: p[0])
    hi_s, hi_t = min((pair for pair in entry.markers if pair[0] >= end), key=lambda p: p[0])
    return (lo_s, hi_s), (lo_t, hi_t)


def _cut_text(text: str, boundary: int) -> tuple[str, str]:
    """Split raw text at a token boundary, keeping seam characters left."""
    spans = tokenize_spans(text)
    cut = spans[boundary][1]
    return text[:cut].rstrip(), text[cut:].rstrip()


def split_entry(
    entry: ArchiveEntry,
    boundary: int,
    fwlex: FunctionWordLexicon,
    taglex: TagLexicon,
) -> tuple[ArchiveEntry, ArchiveEntry]:
    """Split an entry at an internal marker whose source boundary is ``boundary``.

    Source and target texts, markers and provenance are partitioned at the
    aligned marker pair; child patterns are re-encoded from the split texts.
    Child ids are derived from the origin id and origin token range, so they
    are stable across runs.
    """
    match = [pair for pair in entry.internal_markers if pair[0] == boundary]
    if not match:
        raise ValueError(
            f"boundary {boundary} is not an internal marker of entry {entry.id!r}"
        )
    sb, tb = match[0]
    n = entry.token_count
    left_src, right_src = _cut_text(entry.source_text, sb)
    left_tgt, right_tgt = _cut_text(entry.target_text, tb)
    left_markers = [(s, t) for s, t in entry.markers if s <= sb]
    right_markers = [(s - sb, t - tb) for s, t in entry.markers if s >= sb]

    origin = entry.provenance or Provenance(origin_id=entry.id, origin_range=(0, n))
    base = origin.origin_range[0]
    left_prov = Provenance(origin.origin_id, (base, base + sb))
    right_prov = Provenance(origin.origin_id, (base + sb, origin.origin_range[1]))

    left = make_entry(
        f"{origin.origin_id}@{left_prov.origin_range[0]}-{left_prov.origin_range[1]}",
        left_src,
        left_tgt,
        left_markers,
        fwlex,
        taglex,
        provenance=left_prov,
    )
    right = make_entry(
        f"{origin.origin_id}@{right_prov.origin_range[0]}-{right_prov.origin_range[1]}",
        right_src,
        right_tgt,
        right_markers,
        fwlex,
        taglex,
        provenance=right_prov,
    )
    if left.token_count != sb or right.token_count != n - sb:
        raise ArchiveFormatError(
            f"split of entry {entry.id!r} at {boundary} did not preserve tokenization"
        )
    return left, right
