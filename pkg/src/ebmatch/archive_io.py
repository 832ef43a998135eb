"""Archive and model files: loading, validation, persistence, statistics.

Archives are UTF-8 JSON-lines (one entry per line with ``source``,
``target``, optional ``id`` and optional ``markers``) with a TSV fallback
(``source<TAB>target``, no internal markers).  Models persist as a single
JSON document; patterns are not serialized but re-derived from the source
texts on load, so the model records a content hash of both lexicon files
and refuses to load against changed ones.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

from .errors import ArchiveFormatError, EngineError, LexiconMismatchError, ModelFormatError, ModelVersionError
from .learn import Cluster, ClusterModel, LearnConfig, LearnStats
from .lexicon import (
    ContentWord,
    FunctionWordLexicon,
    TagLexicon,
    load_function_word_lexicon,
    load_tag_lexicon,
)
from .metric import MetricWeights
from .pattern import ArchiveEntry, Provenance, make_entry

MODEL_SCHEMA_VERSION = 1

_ENTRY_FIELDS = {"id", "source", "target", "markers"}


def _file_sha256(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def load_lexicons(fw_path, tag_path) -> tuple[FunctionWordLexicon, TagLexicon]:
    fwlex = load_function_word_lexicon(Path(fw_path).read_text(encoding="utf-8"))
    taglex = load_tag_lexicon(Path(tag_path).read_text(encoding="utf-8"))
    return fwlex, taglex


def _parse_jsonl_line(no: int, line: str) -> tuple[str | None, str, str, list]:
    try:
        raw = json.loads(line)
    except json.JSONDecodeError as exc:
        raise ArchiveFormatError(f"invalid JSON: {exc}", line_no=no) from exc
    if not isinstance(raw, dict):
        raise ArchiveFormatError("entry line must be a JSON object", line_no=no)
    unknown = set(raw) - _ENTRY_FIELDS
    if unknown:
        raise ArchiveFormatError(f"unknown field(s) {sorted(unknown)}", line_no=no)
    for required in ("source", "target"):
        if not isinstance(raw.get(required), str):
            raise ArchiveFormatError(f"missing or non-string {required!r}", line_no=no)
    markers = raw.get("markers", [])
    if not isinstance(markers, list) or any(
        not isinstance(p, list) or len(p) != 2 for p in markers
    ):
        raise ArchiveFormatError("markers must be a list of [src, tgt] pairs", line_no=no)
    entry_id = raw.get("id")
    if entry_id is not None and not isinstance(entry_id, str):
        raise ArchiveFormatError("id must be a string", line_no=no)
    return entry_id, raw["source"], raw["target"], markers


def load_archive(path, fwlex: FunctionWordLexicon, taglex: TagLexicon) -> list[ArchiveEntry]:
    """Load and validate an archive file (JSONL, or TSV fallback).

    Entry ids default to ``e{index:06d}`` in file order when absent; any
    format or marker violation is reported with its line number.
    """
    text = Path(path).read_text(encoding="utf-8")
    payload = [
        (no, line)
        for no, line in enumerate(text.splitlines(), start=1)
        if line.strip()
    ]
    if not payload:
        return []
    jsonl = payload[0][1].lstrip().startswith("{")

    entries: list[ArchiveEntry] = []
    seen: set[str] = set()
    for position, (no, line) in enumerate(payload):
        if jsonl:
            entry_id, source, target, markers = _parse_jsonl_line(no, line)
        else:
            fields = line.split("\t")
            if len(fields) != 2:
                raise ArchiveFormatError(
                    f"expected 2 tab-separated fields, got {len(fields)}", line_no=no
                )
            entry_id, source, target, markers = None, fields[0], fields[1], []
        if entry_id is None:
            entry_id = f"e{position:06d}"
        if entry_id in seen:
            raise ArchiveFormatError(f"duplicate entry id {entry_id!r}", line_no=no)
        seen.add(entry_id)
        try:
            entries.append(make_entry(entry_id, source, target, markers, fwlex, taglex))
        except EngineError as exc:
            raise ArchiveFormatError(str(exc), line_no=no) from exc
    return entries


@dataclass
class CorpusStats:
    """Descriptive statistics of a corpus (and its clusters when modeled).

    ``entries`` counts all current units; ``segments`` the subset produced
    by splitting.  Distributions map a value to how many items carry it.
    """

    entries: int
    segments: int
    fw_count_distribution: dict[int, int]
    block_length_distribution: dict[int, int]
    ambiguity_class_count: int
    cluster_size_distribution: dict[int, int] | None = None

    def to_dict(self) -> dict:
        def _keyed(dist):
            return {str(k): v for k, v in sorted(dist.items())}

        out = {
            "entries": self.entries,
            "segments": self.segments,
            "fw_count_distribution": _keyed(self.fw_count_distribution),
            "block_length_distribution": _keyed(self.block_length_distribution),
            "ambiguity_class_count": self.ambiguity_class_count,
        }
        out["cluster_size_distribution"] = (
            _keyed(self.cluster_size_distribution)
            if self.cluster_size_distribution is not None
            else None
        )
        return out


def corpus_stats(entries, model: ClusterModel | None = None) -> CorpusStats:
    entries = list(entries)
    fw_dist: dict[int, int] = {}
    block_dist: dict[int, int] = {}
    classes: set[frozenset] = set()
    segments = 0
    for entry in entries:
        pattern = entry.pattern
        fw_dist[pattern.fw_count] = fw_dist.get(pattern.fw_count, 0) + 1
        for block in pattern.blocks:
            block_dist[len(block)] = block_dist.get(len(block), 0) + 1
        for token in pattern.tokens:
            if isinstance(token, ContentWord):
                classes.add(token.ambiguity_class)
        if entry.provenance is not None:
            segments += 1
    cluster_dist = None
    if model is not None:
        cluster_dist = {}
        for cluster in model.clusters:
            size = len(cluster.members)
            cluster_dist[size] = cluster_dist.get(size, 0) + 1
    return CorpusStats(
        entries=len(entries),
        segments=segments,
        fw_count_distribution=fw_dist,
        block_length_distribution=block_dist,
        ambiguity_class_count=len(classes),
        cluster_size_distribution=cluster_dist,
    )


def save_model(model: ClusterModel, path, fw_path, tag_path) -> None:
    """Persist a learned model as one JSON document.

    The lexicon files are referenced by path and content hash; loading
    verifies the hashes so a model never silently runs against lexicons it
    was not built with.
    """
    config = model.config
    doc = {
        "schema_version": MODEL_SCHEMA_VERSION,
        "weights": {
            "w_f": model.weights.w_f,
            "g_ratio": model.weights.g_ratio,
            "p_ratio": model.weights.p_ratio,
            "t_ratio": model.weights.t_ratio,
            "pt_ratio": model.weights.pt_ratio,
        },
        "config": {
            "k_target": config.k_target,
            "min_intra_sim": config.min_intra_sim,
            "seg_threshold": config.seg_threshold,
            "max_outer_iterations": config.max_outer_iterations,
            "max_reassign_rounds": config.max_reassign_rounds,
        },
        "stats": {
            "outer_iterations": model.stats.outer_iterations,
            "entry_counts": model.stats.entry_counts,
            "segments_created": model.stats.segments_created,
        },
        "lexicons": {
            "function_words": {"path": str(fw_path), "sha256": _file_sha256(fw_path)},
            "tags": {"path": str(tag_path), "sha256": _file_sha256(tag_path)},
        },
        "clusters": [
            {"center": c.center, "members": list(c.members)} for c in model.clusters
        ],
        "entries": [
            {
                "id": e.id,
                "source": e.source_text,
                "target": e.target_text,
                "markers": [list(pair) for pair in e.markers],
                "provenance": (
                    None
                    if e.provenance is None
                    else {
                        "origin": e.provenance.origin_id,
                        "range": list(e.provenance.origin_range),
                    }
                ),
            }
            for e in model.entries.values()
        ],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, ensure_ascii=False, sort_keys=True, indent=2)
        fh.write("\n")


@dataclass
class LoadedModel:
    """A model plus the lexicons it must be queried with."""

    model: ClusterModel
    fwlex: FunctionWordLexicon
    taglex: TagLexicon
    fw_path: str
    tag_path: str


def _resolve_lexicon_path(recorded: str, override, model_dir: Path) -> Path:
    if override is not None:
        return Path(override)
    candidate = Path(recorded)
    if candidate.exists():
        return candidate
    relative = model_dir / candidate
    if relative.exists():
        return relative
    raise ModelFormatError(
        f"lexicon file {recorded!r} not found (looked beside the model too)"
    )


def load_model(path, fw_path=None, tag_path=None) -> LoadedModel:
    """Load a saved model, verifying schema version and lexicon hashes.

    Explicit lexicon paths override the recorded ones; recorded relative
    paths are also tried relative to the model file's directory.  Patterns
    are re-encoded from the stored source texts, so a loaded model answers
    queries exactly like the one that was saved.
    """
    model_path = Path(path)
    try:
        doc = json.loads(model_path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ModelFormatError(f"model file is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict) or "schema_version" not in doc:
        raise ModelFormatError("model file missing schema_version")
    if doc["schema_version"] != MODEL_SCHEMA_VERSION:
        raise ModelVersionError(
            f"unsupported model schema version {doc['schema_version']!r} "
            f"(expected {MODEL_SCHEMA_VERSION})"
        )
    try:
        lex = doc["lexicons"]
        fw_ref, tag_ref = lex["function_words"], lex["tags"]
        weights = MetricWeights(**doc["weights"])
        config = LearnConfig(**doc["config"])
        stats = LearnStats(**doc["stats"])
        cluster_docs = doc["clusters"]
        entry_docs = doc["entries"]
    except (KeyError, TypeError) as exc:
        raise ModelFormatError(f"model file missing or malformed field: {exc}") from exc

    fw_file = _resolve_lexicon_path(fw_ref["path"], fw_path, model_path.parent)
    tag_file = _resolve_lexicon_path(tag_ref["path"], tag_path, model_path.parent)
    for ref, actual in ((fw_ref, fw_file), (tag_ref, tag_file)):
        digest = _file_sha256(actual)
        if digest != ref["sha256"]:
            raise LexiconMismatchError(
                f"lexicon {str(actual)!r} hash {digest[:12]}... does not match "
                f"the model's recorded {ref['sha256'][:12]}..."
            )
    fwlex, taglex = load_lexicons(fw_file, tag_file)

    entries: dict[str, ArchiveEntry] = {}
    for raw in entry_docs:
        prov = None
        if raw.get("provenance") is not None:
            prov = Provenance(
                origin_id=raw["provenance"]["origin"],
                origin_range=tuple(raw["provenance"]["range"]),
            )
        entry = make_entry(
            raw["id"], raw["source"], raw["target"], raw["markers"], fwlex, taglex,
            provenance=prov,
        )
        if entry.id in entries:
            raise ModelFormatError(f"duplicate entry id {entry.id!r} in model")
        entries[entry.id] = entry

    clusters = []
    assigned: set[str] = set()
    for raw in cluster_docs:
        members = tuple(raw["members"])
        if raw["center"] not in members:
            raise ModelFormatError(f"cluster center {raw['center']!r} not in members")
        for member in members:
            if member not in entries:
                raise ModelFormatError(f"cluster member {member!r} not in entries")
            if member in assigned:
                raise ModelFormatError(f"entry {member!r} appears in two clusters")
            assigned.add(member)
        clusters.append(Cluster(center=raw["center"], members=members))
    if assigned != set(entries):
        raise ModelFormatError("clusters do not partition the entry set")

    model = ClusterModel(
        clusters=clusters, entries=entries, weights=weights, config=config, stats=stats
    )
    return LoadedModel(
        model=model,
        fwlex=fwlex,
        taglex=taglex,
        fw_path=str(fw_file),
        tag_path=str(tag_file),
    )
