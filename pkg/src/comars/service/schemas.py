"""Request and response models for the design-construction service."""

from __future__ import annotations

from typing import Literal

from pydantic import BaseModel, Field

Matrix = list[list[int]]


class GenerateRequest(BaseModel):
    """Source a conference design: a prime order, or explicit entries.

    Exactly one of `order` and `entries` must be given; `factors` keeps the
    leading columns of the result.
    """

    order: int | None = None
    entries: Matrix | None = None
    factors: int | None = None


class DesignPayload(BaseModel):
    entries: Matrix
    runs: int
    factors: int


class FrequencyEntry(BaseModel):
    value: float
    count: int


class SpectrumEntry(BaseModel):
    value: int
    count: int


class Quartiles(BaseModel):
    q2: float
    q3: float
    max: float


class AliasReportPayload(BaseModel):
    m: int
    n: int | None
    n0: int
    runs: int
    ssq_2fi: float
    ssq_all_so: float
    f_vector: list[FrequencyEntry]
    quartiles: Quartiles
    j4_spectrum: list[SpectrumEntry]
    d_criterion: float


class OptimizeRequest(BaseModel):
    conference: Matrix
    conference2: Matrix | None = None
    n0: int = Field(default=1, ge=0)
    objective: Literal["ssq", "f"] = "ssq"
    restarts: int = Field(default=100, ge=1)
    seed: int = 0
    max_cc_passes: int = Field(default=500, ge=1)


class LowerStatePayload(BaseModel):
    perm: list[int]
    signs: list[int]


class ObjectivePayload(BaseModel):
    kind: Literal["ssq", "f"]
    ssq: float
    f_counts: list[int]  # counts at `grid` values, most severe correlation first
    grid: list[float]


class OptimizeResponse(BaseModel):
    design: DesignPayload
    state: LowerStatePayload
    pairing: list[int]
    objective: ObjectivePayload
    cc_bound_hit: bool
    report: AliasReportPayload


class EvaluateRequest(BaseModel):
    entries: Matrix
    n: int | None = None
    n0: int | None = None
    check_theory: bool = False


class EvaluateResponse(BaseModel):
    report: AliasReportPayload
    n_inferred: bool
    violations: list[str]


class CompareRequest(BaseModel):
    design_a: Matrix
    design_b: Matrix
    n0_a: int = Field(ge=0)
    n0_b: int = Field(ge=0)


class DesignSummary(BaseModel):
    runs: int
    m: int
    n0: int
    ssq_2fi: float
    ssq_all_so: float
    quartiles: Quartiles
    qq_max_abs: float
    d_criterion: float
    quadratic_ds: float


class CompareResponse(BaseModel):
    a: DesignSummary
    b: DesignSummary
    d_ratio: float
    relative_d_efficiency: float


class ErrorBody(BaseModel):
    error: str  # exception class name, e.g. NonOrthogonalColumns
    message: str
