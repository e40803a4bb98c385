"""Request models for the evaluation service.

Corpora travel as {file name: file text} maps, so the service never reads
the client's file system; all parsing and validation happen server-side.
The gap penalty is accepted under its conventional JSON name "lambda".
"""

from __future__ import annotations

from typing import Literal

from pydantic import BaseModel, ConfigDict, Field

from ..engine import ALL_METRICS, DEFAULT_GROUP_BY

__all__ = [
    "ParamsModel",
    "CorpusPayload",
    "MetadataPayload",
    "EvaluateRequest",
    "SweepRequest",
    "DownstreamRequest",
    "DecomposeRequest",
    "AgreementRequest",
]


class ParamsModel(BaseModel):
    """Alignment and matching hyperparameters."""

    model_config = ConfigDict(populate_by_name=True)

    theta: float = 0.01
    gap_penalty: float = Field(default=1.0, alias="lambda")
    nls_threshold: float = 0.5


class CorpusPayload(BaseModel):
    """One corpus shipped inline: chart id comes from each file name."""

    name: str = Field(min_length=1)
    files: dict[str, str]
    fmt: Literal["tsv", "csv"] = "tsv"


class MetadataPayload(BaseModel):
    """Raw sidecar text; parsed server-side in the declared format."""

    text: str
    fmt: Literal["json", "csv"] = "json"


class CorpusRequest(BaseModel):
    """Shared shape for modes that score predictions against ground truth."""

    ground_truth: CorpusPayload
    predictions: list[CorpusPayload] = Field(min_length=1)
    params: ParamsModel = ParamsModel()
    group_by: list[str] = list(DEFAULT_GROUP_BY)
    metadata: MetadataPayload | None = None
    jobs: int = Field(default=1, ge=1)
    fixed_clock: bool = False


class EvaluateRequest(CorpusRequest):
    metrics: list[str] = list(ALL_METRICS)


class SweepRequest(CorpusRequest):
    pass


class DownstreamRequest(CorpusRequest):
    pass


class DecomposeRequest(CorpusRequest):
    pass


class AgreementRequest(BaseModel):
    """Two extraction outputs over the same charts; reference is scored
    against as if it were ground truth."""

    reference: CorpusPayload
    candidate: CorpusPayload
    params: ParamsModel = ParamsModel()
    group_by: list[str] = list(DEFAULT_GROUP_BY)
    metadata: MetadataPayload | None = None
    fixed_clock: bool = False
