"""FastAPI application wrapping the core package.

Portraits are loaded once into process memory and then serve any number
of concurrent read-only membership queries; scoring and matching
endpoints are stateless conveniences over the same code paths the batch
CLI uses.
"""

from __future__ import annotations

from fastapi import FastAPI, HTTPException

from .. import __version__
from ..dataset import BugFixPair, normalize_category_label
from ..genmatch import classify_outcome, GenerationRecord
from ..membership import classify_pair, pad_query, query_exposure
from ..metrics import METRIC_NAMES, metric_vector, prefer, sequence_from_record
from ..portrait import Portrait, PortraitFormatError, canonicalize, read_portrait
from . import schemas


def _portrait_info(name: str, portrait: Portrait) -> schemas.PortraitInfo:
    params = portrait.params
    return schemas.PortraitInfo(
        name=name,
        width=params.width,
        stride=params.stride,
        target_fpr=params.target_fpr,
        bit_count=params.bit_count,
        hash_count=params.hash_count,
        element_count=portrait.element_count,
        corpus_digest=f"{portrait.corpus_digest:064x}",
        fpr_degraded=portrait.fpr_degraded,
    )


def _report_model(report) -> schemas.ExposureReportModel:
    return schemas.ExposureReportModel(
        hits=report.hit_window_count,
        expected=report.expected_aligned_count,
        score=report.exposure_score,
        coverage=report.coverage_fraction,
        seen=report.seen,
        unsound=report.unsound,
    )


def _pair_from_model(model: schemas.PairModel) -> BugFixPair:
    return BugFixPair(
        pair_id=model.pair_id,
        bug_text=model.bug_text,
        fix_text=model.fix_text,
        context_before=model.context_before,
        bug_category=normalize_category_label(model.bug_category),
        commits_until_fix=model.commits_until_fix,
        source_file_bug=model.source_file_bug,
        source_file_fix=model.source_file_fix,
    )


def create_app(portraits: dict[str, str] | None = None) -> FastAPI:
    """Build the service; ``portraits`` maps names to files to preload."""
    app = FastAPI(title="exposure-probe", version=__version__)
    loaded: dict[str, Portrait] = {}
    for name, path in (portraits or {}).items():
        loaded[name] = read_portrait(path)
    app.state.portraits = loaded

    def _get_portrait(name: str) -> Portrait:
        portrait = app.state.portraits.get(name)
        if portrait is None:
            raise HTTPException(status_code=404, detail=f"no portrait named {name!r} is loaded")
        return portrait

    @app.get("/health", response_model=schemas.HealthResponse)
    def health() -> schemas.HealthResponse:
        return schemas.HealthResponse(status="ok", version=__version__)

    @app.get("/portraits", response_model=list[schemas.PortraitInfo])
    def list_portraits() -> list[schemas.PortraitInfo]:
        return [_portrait_info(name, p) for name, p in sorted(app.state.portraits.items())]

    @app.post("/portraits/load", response_model=schemas.PortraitInfo)
    def load_portrait_endpoint(request: schemas.LoadPortraitRequest) -> schemas.PortraitInfo:
        try:
            portrait = read_portrait(request.path)
        except FileNotFoundError:
            raise HTTPException(status_code=400, detail=f"portrait file not found: {request.path}")
        except PortraitFormatError as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        app.state.portraits[request.name] = portrait
        return _portrait_info(request.name, portrait)

    @app.get("/portraits/{name}", response_model=schemas.PortraitInfo)
    def portrait_info(name: str) -> schemas.PortraitInfo:
        return _portrait_info(name, _get_portrait(name))

    @app.post("/portraits/{name}/query", response_model=schemas.QueryResponse)
    def query(name: str, request: schemas.QueryRequest) -> schemas.QueryResponse:
        portrait = _get_portrait(name)
        reports = []
        for document in request.documents:
            stream = canonicalize(document.text)
            span = (
                (document.snippet_start, document.snippet_end)
                if document.snippet_start is not None and document.snippet_end is not None
                else (0, len(stream))
            )
            try:
                padded = pad_query(stream, span, portrait.params)
            except ValueError as exc:
                raise HTTPException(status_code=422, detail=str(exc))
            reports.append(_report_model(query_exposure(portrait, padded, request.threshold)))
        return schemas.QueryResponse(reports=reports)

    @app.post("/portraits/{name}/classify", response_model=schemas.ClassifyResponse)
    def classify(name: str, request: schemas.ClassifyRequest) -> schemas.ClassifyResponse:
        portrait = _get_portrait(name)
        results = []
        for pair_model in request.pairs:
            pair = _pair_from_model(pair_model)
            try:
                bug_report, fix_report, category = classify_pair(
                    portrait, pair, request.threshold
                )
            except ValueError as exc:
                raise HTTPException(
                    status_code=422, detail=f"pair {pair.pair_id!r}: {exc}"
                )
            results.append(
                schemas.PairClassification(
                    pair_id=pair.pair_id,
                    bug=_report_model(bug_report),
                    fix=_report_model(fix_report),
                    category=category.value,
                )
            )
        return schemas.ClassifyResponse(results=results)

    @app.post("/metrics/score", response_model=schemas.ScoreResponse)
    def score(request: schemas.ScoreRequest) -> schemas.ScoreResponse:
        out = []
        for record in request.records:
            try:
                seq = sequence_from_record(record.model_dump(exclude_none=True))
                vector = metric_vector(seq)
            except ValueError as exc:
                raise HTTPException(status_code=422, detail=str(exc))
            out.append(schemas.MetricRecord(**vector.to_record(seq.pair_id, seq.variant)))
        return schemas.ScoreResponse(metrics=out)

    @app.post("/metrics/prefer", response_model=schemas.PreferResponse)
    def prefer_endpoint(request: schemas.PreferRequest) -> schemas.PreferResponse:
        try:
            bug_seq = sequence_from_record(request.bug.model_dump(exclude_none=True))
            fix_seq = sequence_from_record(request.fix.model_dump(exclude_none=True))
            bug_vec = metric_vector(bug_seq)
            fix_vec = metric_vector(fix_seq)
        except ValueError as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        verdicts = [
            prefer(bug_vec, fix_vec, metric, bug_seq.pair_id) for metric in METRIC_NAMES
        ]
        return schemas.PreferResponse(
            verdicts=[
                schemas.VerdictModel(
                    pair_id=v.pair_id, metric=v.metric, preferred=v.preferred.value
                )
                for v in verdicts
            ]
        )

    @app.post("/match", response_model=schemas.MatchResponse)
    def match(request: schemas.MatchRequest) -> schemas.MatchResponse:
        pair = BugFixPair(
            pair_id=request.pair_id,
            bug_text=request.bug_text,
            fix_text=request.fix_text,
            context_before="",
            bug_category="OTHER",
            commits_until_fix=0,
        )
        record = GenerationRecord(
            pair_id=request.pair_id,
            completions=tuple(request.completions),
            decoding={},
        )
        try:
            outcome = classify_outcome(record, pair, request.mode)
        except ValueError as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        return schemas.MatchResponse(
            pair_id=outcome.pair_id,
            any_bug=outcome.any_bug,
            any_fix=outcome.any_fix,
            category=outcome.category.value,
        )

    return app
