"""Example-based translation matching engine.

Encodes sentences into function-word / ambiguity-class patterns, scores
them with a two-level local-alignment DP, organizes a translation archive
into clusters of translatable units, and retrieves translation proposals
for new input with cluster-pruned search.
"""

__version__ = "0.1.0"

from .errors import (
    ArchiveFormatError,
    ConfigError,
    EmptySentenceError,
    EngineError,
    LexiconFormatError,
    LexiconMismatchError,
    ModelFormatError,
    ModelVersionError,
)
from .lexicon import (
    ContentWord,
    FunctionWord,
    FunctionWordLexicon,
    TagLexicon,
    classify_token,
    load_function_word_lexicon,
    load_tag_lexicon,
)
from .pattern import (
    ArchiveEntry,
    Provenance,
    SentencePattern,
    encode_sentence,
    encode_tokens,
    expand_span_to_markers,
    make_entry,
    split_entry,
    tokenize,
)
from .metric import (
    MatchLevel,
    MatchResult,
    MetricWeights,
    ParamSet,
    block_similarity,
    derive_params,
    fw_match_level,
    similarity,
    similarity_score,
)
from .learn import (
    Cluster,
    ClusterModel,
    LearnConfig,
    LearnStats,
    SimilarityCache,
    cluster_corpus,
    cross_cluster_segmentation,
    learn,
    minmax_center,
)
from .retrieve import (
    CoverSummary,
    Proposal,
    QueryConfig,
    best_match_in_clusters,
    cover_input,
    select_clusters,
)
from .evaluation import (
    EvalReport,
    QueryRecord,
    aggregate_records,
    evaluate_retrieval,
    exhaustive_best,
    format_report_table,
)
from .archive_io import (
    CorpusStats,
    LoadedModel,
    corpus_stats,
    load_archive,
    load_lexicons,
    load_model,
    save_model,
)

__all__ = [name for name in dir() if not name.startswith("_")]
