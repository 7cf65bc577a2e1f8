"""Pydantic request/response models for the HTTP API."""

from __future__ import annotations

from pydantic import BaseModel, Field


class HealthOut(BaseModel):
    status: str
    version: str


class PathInfo(BaseModel):
    id: str
    name: str
    length_mm: float
    z_extent_mm: float
    n_segments: int
    wire_radius_mm: float


class PathDetail(PathInfo):
    ring_inner_radius_mm: float
    start: list[float]
    end: list[float]
    polyline: list[list[float]]


class DatasetSampleIn(BaseModel):
    t: float
    label: str | None = None
    f: list[float] = Field(min_length=8, max_length=8)


class DatasetIn(BaseModel):
    samples: list[DatasetSampleIn]


class ValidationReportOut(BaseModel):
    complete: bool
    counts: dict[str, int]
    missing: list[str]
    short_hold: list[dict]
    summary: str


class SolveRequest(BaseModel):
    dataset: DatasetIn
    rng_seed: int = 0
    v_max: list[float] = Field(default=[6.0, 6.0, 6.0, 10.0], min_length=4, max_length=4)


class MapOut(BaseModel):
    w: list[list[float]]
    dead_zone: list[float]
    gain: list[float]
    checksum: str


class SolveQualityOut(BaseModel):
    iterations: int
    axis_correlation: list[float]


class SolveResponse(BaseModel):
    map: MapOut
    quality: SolveQualityOut


class SyntheticRequest(BaseModel):
    seed: int = 0
    noise_sigma: float = 0.01


class SyntheticResponse(BaseModel):
    dataset: DatasetIn
    mixing: list[list[float]]


class ExperimentRequest(BaseModel):
    interface: str
    path_id: str
    trials: int = Field(default=10, ge=1, le=50)
    seed: int = 1


class LearningEntryOut(BaseModel):
    first3: float
    last3: float
    reduction_pct: float


class TrialMetricsOut(BaseModel):
    trial_id: str
    error_rate: float
    completion_time: float
    sal_trans: float
    sal_rot: float | None


class ExperimentTrialOut(BaseModel):
    trial_id: str
    direction: str
    completed: bool
    metrics: TrialMetricsOut | None


class ExperimentResponse(BaseModel):
    spec: dict
    trials: list[ExperimentTrialOut]
    learning: dict[str, LearningEntryOut] | None


class ReplayRequest(BaseModel):
    jsonl: str


class ReplayResponse(BaseModel):
    metrics: TrialMetricsOut
    samples: int
