"""JSON payload models and the typed application error."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field


class ErrorBody(BaseModel):
    code: str
    message: str
    details: dict[str, Any] = Field(default_factory=dict)


class ErrorResponse(BaseModel):
    error: ErrorBody


class AlgebraDocument(BaseModel):
    """On-disk structure-constant presentation of a finite-dimensional algebra."""

    model_config = ConfigDict(extra="forbid")

    name: str
    scalars: dict[str, Any]
    dim: int = Field(..., ge=1)
    basis: list[str]
    unit: list[str]
    structure: list[list[list[str]]]


class AxiomResultPayload(BaseModel):
    name: str
    passed: bool
    witness: Optional[Any] = None


class DegeneracyPayload(BaseModel):
    kind: Literal["singular", "non_unit_determinant"]
    det: str
    kernel_vector: Optional[list[str]] = None


class FrobeniusPayload(BaseModel):
    comultiplication: list[list[list[str]]]
    counit: list[str]


class SeparabilityReportPayload(BaseModel):
    algebra: str
    scalars: dict[str, Any]
    dim: int
    is_commutative: bool
    trace_map: list[str]
    trace_form: list[list[str]]
    det: str
    verdict: Literal["StronglySeparable", "Degenerate"]
    degeneracy: Optional[DegeneracyPayload] = None
    kappa: Optional[list[list[str]]] = None
    frobenius: Optional[FrobeniusPayload] = None
    axiom_results: list[AxiomResultPayload] = Field(default_factory=list)


class EquationResultPayload(BaseModel):
    name: str
    status: Literal["pass", "fail", "skipped"]
    anchor: str
    witness: Optional[dict[str, Any]] = None


class VerifyPayload(BaseModel):
    algebra: str
    verdict: Literal["StronglySeparable", "Degenerate"]
    results: list[EquationResultPayload]
    all_passed: bool


class CorpusEntryPayload(BaseModel):
    name: str
    lhs: str
    rhs: str
    anchor: str
    requires_separable: bool
    domain: list[str]
    codomain: list[str]


class FiberRowPayload(BaseModel):
    index: int
    fiber: list[int]
    cardinality: int


class CompositionRowPayload(BaseModel):
    m: int
    iterated: int
    direct: int
    agrees: bool


class SpectrumPayload(BaseModel):
    degree: int
    max_index: int
    rows: list[FiberRowPayload]
    composition: Optional[list[CompositionRowPayload]] = None


@dataclass
class AppError(Exception):
    code: str
    message: str
    exit_code: int = 2
    details: dict[str, Any] = field(default_factory=dict)

    def __str__(self) -> str:
        return f"{self.code}: {self.message}"

    def to_payload(self) -> ErrorResponse:
        return ErrorResponse(error=ErrorBody(code=self.code, message=self.message, details=self.details))
