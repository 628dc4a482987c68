"""Pydantic request/response models for the HTTP service."""

from __future__ import annotations

from pydantic import BaseModel, Field


class HealthResponse(BaseModel):
    status: str
    version: str


class PortraitInfo(BaseModel):
    name: str
    width: int
    stride: int
    target_fpr: float
    bit_count: int
    hash_count: int
    element_count: int
    corpus_digest: str
    fpr_degraded: bool


class LoadPortraitRequest(BaseModel):
    name: str
    path: str


class QueryDocument(BaseModel):
    """A text to query; when a snippet span is given, the snippet is
    padded with the surrounding text before querying."""

    text: str
    snippet_start: int | None = None
    snippet_end: int | None = None


class QueryRequest(BaseModel):
    documents: list[QueryDocument]
    threshold: float = Field(default=0.9, gt=0)


class ExposureReportModel(BaseModel):
    hits: int
    expected: int
    score: float
    coverage: float
    seen: bool
    unsound: bool


class QueryResponse(BaseModel):
    reports: list[ExposureReportModel]


class PairModel(BaseModel):
    pair_id: str
    bug_text: str
    fix_text: str
    context_before: str = ""
    bug_category: str = "OTHER"
    commits_until_fix: int = 0
    source_file_bug: str | None = None
    source_file_fix: str | None = None


class ClassifyRequest(BaseModel):
    pairs: list[PairModel]
    threshold: float = Field(default=0.9, gt=0)


class PairClassification(BaseModel):
    pair_id: str
    bug: ExposureReportModel
    fix: ExposureReportModel
    category: str


class ClassifyResponse(BaseModel):
    results: list[PairClassification]


class TokenProbRecord(BaseModel):
    pair_id: str
    variant: str
    tokens: list[str]
    probs: list[float] | None = None
    logprobs: list[float] | None = None


class MetricRecord(BaseModel):
    pair_id: str
    variant: str
    length: int
    perplexity: float
    min_prob: float
    max_prob: float
    gini: float
    geometric_mean: float
    arithmetic_mean: float


class ScoreRequest(BaseModel):
    records: list[TokenProbRecord]


class ScoreResponse(BaseModel):
    metrics: list[MetricRecord]


class PreferRequest(BaseModel):
    bug: TokenProbRecord
    fix: TokenProbRecord


class VerdictModel(BaseModel):
    pair_id: str
    metric: str
    preferred: str


class PreferResponse(BaseModel):
    verdicts: list[VerdictModel]


class MatchRequest(BaseModel):
    pair_id: str
    bug_text: str
    fix_text: str
    completions: list[str]
    mode: str = "line"


class MatchResponse(BaseModel):
    pair_id: str
    any_bug: bool
    any_fix: bool
    category: str
