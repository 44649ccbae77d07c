"""Points of the circle spectrum and the map induced by the degree-n self-map.

A finite point is labelled by the index m of a cyclic subgroup C_m and an
opaque chromatic tag; the degree-n map sends C_m to C_{lcm(m, n) / n} and
fixes the full circle.
"""

from __future__ import annotations

import logging
import math
import re
from dataclasses import dataclass
from typing import Optional

from sympy import divisors, factorint

from app import config
from app.models import AppError, CompositionRowPayload, FiberRowPayload, SpectrumPayload


logger = logging.getLogger(__name__)

LABEL_RE = re.compile(r"^\s*(?:C_(?P<m>\d+)|(?P<circle>S1))(?:@(?P<tag>\S*))?\s*$")


@dataclass(frozen=True)
class PrimeLabel:
    """m is None for the full circle."""

    m: Optional[int]
    tag: str = ""

    def __post_init__(self) -> None:
        if self.m is not None and self.m < 1:
            raise AppError(code="INVALID_ARGUMENT", message="Cyclic index must be positive.", details={"m": self.m})

    @property
    def is_circle(self) -> bool:
        return self.m is None


def _require_positive(**values: int) -> None:
    for name, value in values.items():
        if not isinstance(value, int) or value < 1:
            raise AppError(
                code="INVALID_ARGUMENT",
                message=f"{name} must be a positive integer.",
                details={name: value},
            )


def phi_index(n: int, m: int) -> int:
    _require_positive(n=n, m=m)
    return math.lcm(m, n) // n


def phi(n: int, label: PrimeLabel) -> PrimeLabel:
    _require_positive(n=n)
    if label.is_circle:
        return label
    return PrimeLabel(phi_index(n, label.m), label.tag)  # type: ignore[arg-type]


def fiber(n: int, N: int) -> list[int]:
    """All m with lcm(m, n) = n * N, in increasing order."""
    _require_positive(n=n, N=N)
    target = n * N
    return [m for m in divisors(target) if math.lcm(m, n) == target]


def fiber_cardinality(n: int, N: int) -> int:
    """Product of v_q(n) + 1 over primes q dividing n but not N."""
    _require_positive(n=n, N=N)
    count = 1
    for q, exponent in factorint(n).items():
        if N % q:
            count *= exponent + 1
    return count


@dataclass(frozen=True)
class FiberRow:
    index: int
    fiber: tuple[int, ...]

    @property
    def cardinality(self) -> int:
        return len(self.fiber)

    def to_payload(self) -> FiberRowPayload:
        return FiberRowPayload(index=self.index, fiber=list(self.fiber), cardinality=self.cardinality)


@dataclass(frozen=True)
class CompositionRow:
    m: int
    iterated: int
    direct: int

    @property
    def agrees(self) -> bool:
        return self.iterated == self.direct

    def to_payload(self) -> CompositionRowPayload:
        return CompositionRowPayload(m=self.m, iterated=self.iterated, direct=self.direct, agrees=self.agrees)


def _check_limits(n: int, N_max: int) -> None:
    _require_positive(degree=n, max_index=N_max)
    if n > config.SPECTRUM_MAX_DEGREE or N_max > config.SPECTRUM_MAX_INDEX:
        raise AppError(
            code="INVALID_ARGUMENT",
            message="Spectrum request exceeds the configured limits.",
            details={
                "degree": n,
                "max_index": N_max,
                "degree_limit": config.SPECTRUM_MAX_DEGREE,
                "index_limit": config.SPECTRUM_MAX_INDEX,
            },
        )


def fiber_table(n: int, N_max: int) -> list[FiberRow]:
    _check_limits(n, N_max)
    rows = [FiberRow(N, tuple(fiber(n, N))) for N in range(1, N_max + 1)]
    logger.info("Fiber table for degree %d up to %d: %d rows", n, N_max, len(rows))
    return rows


def composition_report(n1: int, n2: int, m_max: int) -> list[CompositionRow]:
    """phi(n2, phi(n1, m)) against phi(n1 * n2, m); agreement is reported, not required."""
    _check_limits(n1 * n2, m_max)
    rows = [CompositionRow(m, phi_index(n2, phi_index(n1, m)), phi_index(n1 * n2, m)) for m in range(1, m_max + 1)]
    disagreements = sum(not row.agrees for row in rows)
    if disagreements:
        logger.info("Degrees %d and %d: %d of %d indices do not compose", n1, n2, disagreements, len(rows))
    return rows


def spectrum_payload(n: int, N_max: int, compose_with: Optional[int] = None) -> SpectrumPayload:
    composition = None
    if compose_with is not None:
        composition = [row.to_payload() for row in composition_report(n, compose_with, N_max)]
    return SpectrumPayload(
        degree=n,
        max_index=N_max,
        rows=[row.to_payload() for row in fiber_table(n, N_max)],
        composition=composition,
    )


def parse_label(text: str) -> PrimeLabel:
    """``C_6@tag`` or ``S1@tag``; the tag is optional."""
    match = LABEL_RE.match(text)
    if not match:
        raise AppError(
            code="INVALID_ARGUMENT",
            message="Labels look like 'C_m@tag' or 'S1@tag'.",
            details={"label": text},
        )
    tag = match.group("tag") or ""
    if match.group("circle"):
        return PrimeLabel(None, tag)
    return PrimeLabel(int(match.group("m")), tag)


def format_label(label: PrimeLabel) -> str:
    head = "S1" if label.is_circle else f"C_{label.m}"
    return f"{head}@{label.tag}" if label.tag else head
