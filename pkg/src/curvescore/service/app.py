"""FastAPI application wrapping the evaluation engine.

Every endpoint returns the canonical JSON report text, so service
responses are byte-identical to what the engine serializes. Errors map to
a stable body {"error": {"kind", "message"}}: kind "usage" for bad
configuration, "data" for corpus problems, "internal" otherwise.
"""

from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse, Response

from ..engine import (
    ConfigError,
    EngineConfig,
    agreement_report,
    downstream_report,
    evaluate_report,
    sweep_report,
)
from ..reporting import report_json
from ..tables import Corpus, CorpusError, apply_metadata, corpus_from_texts, load_metadata
from ..version import __version__
from .schemas import (
    AgreementRequest,
    CorpusPayload,
    CorpusRequest,
    DecomposeRequest,
    DownstreamRequest,
    EvaluateRequest,
    MetadataPayload,
    ParamsModel,
    SweepRequest,
)

__all__ = ["create_app"]


def _config(
    params: ParamsModel,
    metrics: tuple[str, ...] | list[str] | None,
    group_by: list[str],
    jobs: int = 1,
    fixed_clock: bool = False,
) -> EngineConfig:
    kwargs = dict(
        theta=params.theta,
        gap_penalty=params.gap_penalty,
        nls_threshold=params.nls_threshold,
        group_by=tuple(group_by),
        jobs=jobs,
        fixed_clock=fixed_clock,
    )
    if metrics is not None:
        kwargs["metrics"] = tuple(metrics)
    return EngineConfig(**kwargs)


def _build_corpus(payload: CorpusPayload, role: str) -> Corpus:
    return corpus_from_texts(payload.name, payload.files, payload.fmt, role)


def _attach_metadata(corpus: Corpus, metadata: MetadataPayload | None) -> None:
    if metadata is None:
        return
    try:
        meta_map = load_metadata(metadata.text, metadata.fmt)
    except ValueError as exc:
        raise CorpusError(f"metadata sidecar: {exc}") from exc
    corpus.warnings.extend(apply_metadata(corpus, meta_map))


def _corpora(req: CorpusRequest) -> tuple[Corpus, list[Corpus]]:
    gt = _build_corpus(req.ground_truth, "ground_truth")
    _attach_metadata(gt, req.metadata)
    preds = [_build_corpus(p, "prediction") for p in req.predictions]
    return gt, preds


def _report_response(report: dict) -> Response:
    return Response(content=report_json(report), media_type="application/json")


def create_app() -> FastAPI:
    app = FastAPI(title="curvescore", version=__version__)

    @app.exception_handler(ConfigError)
    async def _usage_error(request: Request, exc: ConfigError) -> JSONResponse:
        return JSONResponse(
            status_code=400,
            content={"error": {"kind": "usage", "message": str(exc)}},
        )

    @app.exception_handler(CorpusError)
    async def _data_error(request: Request, exc: CorpusError) -> JSONResponse:
        return JSONResponse(
            status_code=400,
            content={"error": {"kind": "data", "message": str(exc)}},
        )

    @app.exception_handler(Exception)
    async def _internal_error(request: Request, exc: Exception) -> JSONResponse:
        return JSONResponse(
            status_code=500,
            content={
                "error": {
                    "kind": "internal",
                    "message": f"{type(exc).__name__}: {exc}",
                }
            },
        )

    @app.get("/health")
    def health() -> dict:
        return {"status": "ok", "name": "curvescore", "version": __version__}

    @app.post("/evaluate")
    def evaluate(req: EvaluateRequest) -> Response:
        cfg = _config(req.params, req.metrics, req.group_by, req.jobs, req.fixed_clock)
        gt, preds = _corpora(req)
        return _report_response(evaluate_report(gt, preds, cfg))

    @app.post("/decompose")
    def decompose(req: DecomposeRequest) -> Response:
        cfg = _config(req.params, None, req.group_by, req.jobs, req.fixed_clock)
        gt, preds = _corpora(req)
        return _report_response(evaluate_report(gt, preds, cfg, mode="decompose"))

    @app.post("/sweep")
    def sweep(req: SweepRequest) -> Response:
        cfg = _config(req.params, None, req.group_by, req.jobs, req.fixed_clock)
        gt, preds = _corpora(req)
        return _report_response(sweep_report(gt, preds, cfg))

    @app.post("/downstream")
    def downstream(req: DownstreamRequest) -> Response:
        cfg = _config(req.params, None, req.group_by, req.jobs, req.fixed_clock)
        gt, preds = _corpora(req)
        return _report_response(downstream_report(gt, preds, cfg))

    @app.post("/agreement")
    def agreement(req: AgreementRequest) -> Response:
        cfg = _config(
            req.params, None, req.group_by, fixed_clock=req.fixed_clock
        )
        reference = _build_corpus(req.reference, "prediction")
        _attach_metadata(reference, req.metadata)
        candidate = _build_corpus(req.candidate, "prediction")
        return _report_response(agreement_report(reference, candidate, cfg))

    return app
