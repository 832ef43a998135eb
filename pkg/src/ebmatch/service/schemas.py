"""Request/response models of the HTTP API.

File paths in requests are interpreted on the machine the service runs on;
the CLI defaults to an in-process service, where they are just local paths.
"""

from __future__ import annotations

from pydantic import BaseModel, ConfigDict, Field, model_validator

from ..learn import LearnConfig
from ..metric import MetricWeights
from ..retrieve import QueryConfig


class WeightsParams(BaseModel):
    model_config = ConfigDict(extra="forbid")

    w_f: float = Field(default=0.5, ge=0.0, le=1.0)
    g_ratio: float = Field(default=0.5, gt=0.0, lt=1.0)
    p_ratio: float = Field(default=0.5, gt=0.0)
    t_ratio: float = Field(default=0.5, gt=0.0, lt=1.0)
    pt_ratio: float = Field(default=0.5, gt=0.0)

    def to_weights(self) -> MetricWeights:
        return MetricWeights(**self.model_dump())


class LearnParams(BaseModel):
    model_config = ConfigDict(extra="forbid")

    k_target: int | None = Field(default=None, ge=1)
    min_intra_sim: float | None = Field(default=None, ge=0.0, le=1.0)
    seg_threshold: float = Field(default=0.8, gt=0.0, le=1.0)
    max_outer_iterations: int = Field(default=10, ge=1)
    max_reassign_rounds: int = Field(default=50, ge=1)

    @model_validator(mode="after")
    def _at_least_one_rule(self):
        if self.k_target is None and self.min_intra_sim is None:
            raise ValueError("set k_target and/or min_intra_sim")
        return self

    def to_config(self) -> LearnConfig:
        return LearnConfig(**self.model_dump())


class QueryParams(BaseModel):
    model_config = ConfigDict(extra="forbid")

    clusters_to_search: int = Field(default=1, ge=1)
    cover_threshold: float = Field(default=0.8, gt=0.0, le=1.0)
    score_floor: float = Field(default=0.3, ge=0.0)
    max_cover_rounds: int = Field(default=32, ge=1)

    @model_validator(mode="after")
    def _floor_below_threshold(self):
        if self.score_floor > self.cover_threshold:
            raise ValueError("score_floor must not exceed cover_threshold")
        return self

    def to_config(self) -> QueryConfig:
        return QueryConfig(**self.model_dump())


class EncodeRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    text: str
    fw_path: str
    tag_path: str


class TokenView(BaseModel):
    surface: str
    kind: str
    fw_id: str | None = None
    groups: list[str] | None = None
    ambiguity_class: list[str] | None = None
    lemmas: list[str] | None = None


class FwSlotView(BaseModel):
    index: int
    fw_id: str
    groups: list[str]


class PatternView(BaseModel):
    tokens: list[TokenView]
    fw_slots: list[FwSlotView]
    blocks: list[list[int]]


class LearnRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    archive_path: str
    fw_path: str
    tag_path: str
    out_path: str
    weights: WeightsParams = WeightsParams()
    learn: LearnParams = LearnParams(k_target=1)


class LearnResponse(BaseModel):
    model_path: str
    clusters: int
    entries: int
    outer_iterations: int
    entry_counts: list[int]
    segments_created: list[int]


class QueryRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    model_path: str
    sentences: list[str]
    fw_path: str | None = None
    tag_path: str | None = None
    query: QueryParams = QueryParams()


class ProposalView(BaseModel):
    entry_id: str
    score: float
    input_span: list[int]
    entry_span: list[int]
    target: str
    provenance: dict | None = None
    partial: bool = False


class CoverSummaryView(BaseModel):
    comparisons: int
    center_comparisons: int
    member_comparisons: int
    rounds: int
    clusters_searched: list[int]
    uncovered_spans: list[list[int]]


class SentenceResult(BaseModel):
    sentence_index: int
    proposals: list[ProposalView]
    summary: CoverSummaryView


class QueryResponse(BaseModel):
    results: list[SentenceResult]


class EvaluateRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    model_path: str
    sentences: list[str]
    fw_path: str | None = None
    tag_path: str | None = None
    query: QueryParams = QueryParams()


class EvaluateResponse(BaseModel):
    queries: int
    missed_count: int
    missed_pct: float
    missed_by_pct: float | None
    avg_comparisons_pruned: float
    avg_comparisons_exhaustive: float
    clusters_searched: int
    cluster_count: int
    records: list[dict]
    table: str


class StatsRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    archive_path: str | None = None
    model_path: str | None = None
    fw_path: str | None = None
    tag_path: str | None = None

    @model_validator(mode="after")
    def _one_source(self):
        if (self.archive_path is None) == (self.model_path is None):
            raise ValueError("set exactly one of archive_path / model_path")
        if self.archive_path is not None and (
            self.fw_path is None or self.tag_path is None
        ):
            raise ValueError("archive stats need fw_path and tag_path")
        return self


class StatsResponse(BaseModel):
    entries: int
    segments: int
    fw_count_distribution: dict[str, int]
    block_length_distribution: dict[str, int]
    ambiguity_class_count: int
    cluster_size_distribution: dict[str, int] | None = None


class HealthResponse(BaseModel):
    status: str
    version: str
