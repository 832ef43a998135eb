"""Function-word and tag lexicons, and token classification.

Two lexicons drive sentence encoding.  The function-word lexicon lists the
closed-class words (prepositions, determiners, conjunctions, pronouns,
certain adverbials...) together with the interchangeability groups they
belong to; a word may sit in several groups.  The tag lexicon maps every
remaining surface form to its ambiguity class (the set of all its possible
part-of-speech tags, kept undisambiguated) and its possible lemmas.

Both lexicons are immutable after loading and safe to share across threads.
Lookups are case-folded; a surface form found in the function-word lexicon
is always classified as a function word, everything else is a content word.
Unknown words never fail: they receive the open-class default ambiguity
class and their own (folded) surface form as lemma.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping

from .errors import LexiconFormatError

#: Ambiguity class assigned to words missing from the tag lexicon.
DEFAULT_OPEN_CLASS_TAGS = frozenset({"noun", "verb", "adj", "adv"})


def _fold(surface: str) -> str:
    return surface.lower()


def _iter_lines(source) -> Iterable[tuple[int, str]]:
    """Yield (line_no, stripped_line) for payload lines of a TSV source.

    Accepts a string (split on newlines), an open text file, or any iterable
    of lines.  Blank lines and ``#``-prefixed comment lines are skipped.
    """
    if isinstance(source, str):
        lines = source.splitlines()
    else:
        lines = source
    for no, raw in enumerate(lines, start=1):
        line = raw.rstrip("\n").rstrip("\r")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        yield no, line


@dataclass(frozen=True)
class FwEntry:
    """One function word: its identity and the groups it belongs to."""

    fw_id: str
    groups: frozenset[str]


@dataclass(frozen=True)
class FunctionWordLexicon:
    """Case-folded surface form -> function-word entry."""

    entries: Mapping[str, FwEntry]

    @property
    def groups(self) -> frozenset[str]:
        out: set[str] = set()
        for entry in self.entries.values():
            out |= entry.groups
        return frozenset(out)

    def lookup(self, surface: str) -> FwEntry | None:
        return self.entries.get(_fold(surface))

    def __len__(self) -> int:
        return len(self.entries)


@dataclass(frozen=True)
class TagEntry:
    """Ambiguity class (set of possible pos tags) and lemma set of a word."""

    ambiguity_class: frozenset[str]
    lemmas: frozenset[str]


@dataclass(frozen=True)
class TagLexicon:
    """Case-folded surface form -> tags/lemmas, with an open-class default.

    ``lookup`` is total: unknown words fall back to ``open_class_default``
    with the folded surface form as their only lemma.
    """

    entries: Mapping[str, TagEntry]
    open_class_default: frozenset[str] = DEFAULT_OPEN_CLASS_TAGS

    def lookup(self, surface: str) -> TagEntry:
        folded = _fold(surface)
        entry = self.entries.get(folded)
        if entry is None:
            return TagEntry(self.open_class_default, frozenset({folded}))
        return entry

    def ambiguity_classes(self) -> set[frozenset[str]]:
        """Distinct ambiguity classes observed in the lexicon."""
        return {entry.ambiguity_class for entry in self.entries.values()}

    def __len__(self) -> int:
        return len(self.entries)


@dataclass(frozen=True)
class FunctionWord:
    """Token classified as a function word."""

    surface: str
    fw_id: str
    groups: frozenset[str]


@dataclass(frozen=True)
class ContentWord:
    """Token classified as a content word (non-function word)."""

    surface: str
    ambiguity_class: frozenset[str]
    lemmas: frozenset[str]


Token = FunctionWord | ContentWord


def load_function_word_lexicon(source, declared_groups: Iterable[str] | None = None) -> FunctionWordLexicon:
    """Parse a function-word lexicon from TSV lines.

    Line format: ``surface<TAB>group_id[,group_id...]``.  Duplicate surface
    forms merge their group sets.  When ``declared_groups`` is given, any
    line referencing a group outside it raises ``LexiconFormatError``.
    """
    allowed = frozenset(declared_groups) if declared_groups is not None else None
    groups_by_surface: dict[str, set[str]] = {}
    for no, line in _iter_lines(source):
        fields = line.split("\t")
        if len(fields) != 2:
            raise LexiconFormatError(
                f"expected 2 tab-separated fields, got {len(fields)}", line_no=no
            )
        surface, group_field = fields
        folded = _fold(surface.strip())
        if not folded:
            raise LexiconFormatError("empty surface form", line_no=no)
        groups = {g.strip() for g in group_field.split(",") if g.strip()}
        if not groups:
            raise LexiconFormatError(f"no groups listed for {surface!r}", line_no=no)
        if allowed is not None:
            unknown = groups - allowed
            if unknown:
                raise LexiconFormatError(
                    f"{surface!r} references undeclared group(s) {sorted(unknown)}",
                    line_no=no,
                )
        groups_by_surface.setdefault(folded, set()).update(groups)
    entries = {
        surface: FwEntry(fw_id=surface, groups=frozenset(groups))
        for surface, groups in groups_by_surface.items()
    }
    return FunctionWordLexicon(entries=entries)


def load_tag_lexicon(source, open_class_default: Iterable[str] = DEFAULT_OPEN_CLASS_TAGS) -> TagLexicon:
    """Parse a tag lexicon from TSV lines.

    Line format: ``surface<TAB>tag[,tag...]<TAB>lemma[,lemma...]``.
    Duplicate surface forms union their tag and lemma sets.
    """
    default = frozenset(open_class_default)
    if not default:
        raise LexiconFormatError("open-class default ambiguity class must be non-empty")
    tags_by_surface: dict[str, set[str]] = {}
    lemmas_by_surface: dict[str, set[str]] = {}
    for no, line in _iter_lines(source):
        fields = line.split("\t")
        if len(fields) != 3:
            raise LexiconFormatError(
                f"expected 3 tab-separated fields, got {len(fields)}", line_no=no
            )
        surface, tag_field, lemma_field = fields
        folded = _fold(surface.strip())
        if not folded:
            raise LexiconFormatError("empty surface form", line_no=no)
        tags = {t.strip() for t in tag_field.split(",") if t.strip()}
        lemmas = {_fold(l.strip()) for l in lemma_field.split(",") if l.strip()}
        if not tags:
            raise LexiconFormatError(f"empty tag set for {surface!r}", line_no=no)
        if not lemmas:
            raise LexiconFormatError(f"empty lemma set for {surface!r}", line_no=no)
        tags_by_surface.setdefault(folded, set()).update(tags)
        lemmas_by_surface.setdefault(folded, set()).update(lemmas)
    entries = {
        surface: TagEntry(
            ambiguity_class=frozenset(tags_by_surface[surface]),
            lemmas=frozenset(lemmas_by_surface[surface]),
        )
        for surface in tags_by_surface
    }
    return TagLexicon(entries=entries, open_class_default=default)


def classify_token(surface: str, fwlex: FunctionWordLexicon, taglex: TagLexicon) -> Token:
    """Classify one surface token; function-word lookup takes precedence."""
    fw = fwlex.lookup(surface)
    if fw is not None:
        return FunctionWord(surface=surface, fw_id=fw.fw_id, groups=fw.groups)
    tag = taglex.lookup(surface)
    return ContentWord(
        surface=surface, ambiguity_class=tag.ambiguity_class, lemmas=tag.lemmas
    )
