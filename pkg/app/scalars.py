"""Exact scalars over Q, F_p and Z, and the matrix routines every other module uses.

Matrices are thin wrappers around sympy's sparse ``DomainMatrix``; all products,
determinants, inverses and row reductions are exact. Entries are domain elements
of ``ScalarSpec.domain`` (``QQ``, ``GF(p)`` or ``ZZ``).
"""

from __future__ import annotations

import itertools
import logging
import math
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache
from typing import Any, Iterator, Literal, Optional, Sequence

from pydantic import BaseModel, ConfigDict, ValidationError, model_validator
from sympy import GF, QQ, ZZ, isprime
from sympy.polys.matrices import DomainMatrix

from app import config
from app.models import AppError


logger = logging.getLogger(__name__)

# An element of ScalarSpec.domain (PythonMPQ/mpq, ModularInteger, int/mpz).
Scalar = Any

SCALAR_RE = re.compile(r"^\s*(?P<num>[+-]?\d+)\s*(?:/\s*(?P<den>[+-]?\d+)\s*)?$")


@lru_cache(maxsize=None)
def _domain_for(kind: str, p: Optional[int]) -> Any:
    if kind == "Q":
        return QQ
    if kind == "Z":
        return ZZ
    return GF(p)


class ScalarSpec(BaseModel):
    """Names the base ring: the rationals, a prime field, or the integers."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: Literal["Q", "Fp", "Z"]
    p: Optional[int] = None

    @model_validator(mode="after")
    def _check_modulus(self) -> "ScalarSpec":
        if self.kind == "Fp":
            if self.p is None or self.p < 2 or not isprime(self.p):
                raise ValueError(f"Fp requires a prime modulus p >= 2, got {self.p!r}")
        elif self.p is not None:
            raise ValueError(f"modulus p is only allowed for kind 'Fp', got kind {self.kind!r}")
        return self

    @classmethod
    def from_json(cls, payload: Any) -> "ScalarSpec":
        try:
            return cls.model_validate(payload)
        except ValidationError as exc:
            raise AppError(
                code="INVALID_SCALAR_SPEC",
                message="Invalid scalar kind or characteristic.",
                details={"scalars": payload, "errors": exc.errors(include_url=False, include_context=False)},
            ) from exc

    def to_json(self) -> dict[str, Any]:
        return self.model_dump(exclude_none=True)

    @property
    def domain(self) -> Any:
        return _domain_for(self.kind, self.p)

    @property
    def is_field(self) -> bool:
        return self.kind != "Z"

    @property
    def is_finite(self) -> bool:
        return self.kind == "Fp"

    @property
    def label(self) -> str:
        if self.kind == "Fp":
            return f"F{self.p}"
        return self.kind

    @property
    def zero(self) -> Scalar:
        return self.domain.zero

    @property
    def one(self) -> Scalar:
        return self.domain.one

    def convert(self, value: Any) -> Scalar:
        """Coerce an int, Fraction, scalar string or domain element into this ring."""
        if isinstance(value, str):
            return parse_scalar(self, value)
        if isinstance(value, Fraction):
            return _from_fraction(self, value)
        if isinstance(value, bool):
            value = int(value)
        if isinstance(value, int):
            return self.domain(value)
        return self.domain.convert(value)

    def elements(self) -> list[Scalar]:
        """All elements of a finite field, in the order 0, 1, ..., p-1."""
        if not self.is_finite:
            raise AppError(
                code="INVALID_ARGUMENT",
                message="Only finite fields can be enumerated.",
                details={"scalars": self.to_json()},
            )
        return [self.domain(value) for value in range(self.p or 0)]


def rationals() -> ScalarSpec:
    return ScalarSpec(kind="Q")


def integers() -> ScalarSpec:
    return ScalarSpec(kind="Z")


def prime_field(p: int) -> ScalarSpec:
    return ScalarSpec.from_json({"kind": "Fp", "p": p})


def _from_fraction(spec: ScalarSpec, value: Fraction) -> Scalar:
    K = spec.domain
    if spec.kind == "Q":
        return K(value.numerator, value.denominator)
    if spec.kind == "Z":
        if value.denominator != 1:
            raise AppError(
                code="INVALID_SCALAR",
                message="Integer scalars cannot have a denominator.",
                details={"value": str(value)},
            )
        return K(value.numerator)
    denominator = K(value.denominator)
    if denominator == K.zero:
        raise AppError(
            code="INVALID_SCALAR",
            message="Denominator is not invertible in the prime field.",
            details={"value": str(value), "p": spec.p},
        )
    return K(value.numerator) / denominator


def parse_scalar(spec: ScalarSpec, text: str) -> Scalar:
    """Parse ``"a"`` or ``"a/b"``; prime-field values are reduced mod p."""
    match = SCALAR_RE.match(text) if isinstance(text, str) else None
    if not match:
        raise AppError(
            code="INVALID_SCALAR",
            message="Scalars must be written as 'a' or 'a/b' with integer a, b.",
            details={"value": text},
        )
    numerator = int(match.group("num"))
    denominator = int(match.group("den")) if match.group("den") is not None else 1
    if denominator == 0:
        raise AppError(code="INVALID_SCALAR", message="Zero denominator.", details={"value": text})
    return _from_fraction(spec, Fraction(numerator, denominator))


def format_scalar(spec: ScalarSpec, value: Scalar) -> str:
    if spec.kind == "Q":
        numerator = int(QQ.numer(value))
        denominator = int(QQ.denom(value))
        return str(numerator) if denominator == 1 else f"{numerator}/{denominator}"
    if spec.kind == "Fp":
        return str(int(value) % (spec.p or 1))
    return str(int(value))


@dataclass(frozen=True, eq=False)
class Matrix:
    """Exact matrix over a ScalarSpec, stored sparsely."""

    spec: ScalarSpec
    dm: DomainMatrix

    @property
    def shape(self) -> tuple[int, int]:
        return tuple(self.dm.shape)  # type: ignore[return-value]

    @property
    def rows(self) -> int:
        return self.dm.shape[0]

    @property
    def cols(self) -> int:
        return self.dm.shape[1]

    @property
    def is_square(self) -> bool:
        return self.rows == self.cols

    @cached_property
    def entries(self) -> dict[int, dict[int, Scalar]]:
        """Nonzero entries as a read-only dict of dicts ``{row: {col: value}}``."""
        zero = self.spec.zero
        out: dict[int, dict[int, Scalar]] = {}
        for i, row in self.dm.to_sparse().rep.items():
            kept = {j: value for j, value in row.items() if value != zero}
            if kept:
                out[i] = kept
        return out

    def entry(self, i: int, j: int) -> Scalar:
        row = self.entries.get(i)
        if not row:
            return self.spec.zero
        return row.get(j, self.spec.zero)

    def to_rows(self) -> list[list[Scalar]]:
        return [[self.entry(i, j) for j in range(self.cols)] for i in range(self.rows)]

    def to_strings(self) -> list[list[str]]:
        return [[format_scalar(self.spec, value) for value in row] for row in self.to_rows()]

    def column_values(self, j: int = 0) -> list[Scalar]:
        return [self.entry(i, j) for i in range(self.rows)]

    def row_values(self, i: int = 0) -> list[Scalar]:
        return [self.entry(i, j) for j in range(self.cols)]

    def is_zero(self) -> bool:
        return not self.entries

    def is_symmetric(self) -> bool:
        return self.is_square and first_difference(self, transpose(self)) is None

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Matrix):
            return NotImplemented
        return self.spec == other.spec and self.shape == other.shape and self.entries == other.entries

    __hash__ = None  # type: ignore[assignment]

    def __matmul__(self, other: "Matrix") -> "Matrix":
        return mat_mul(self, other)

    def __add__(self, other: "Matrix") -> "Matrix":
        return mat_add(self, other)

    def __sub__(self, other: "Matrix") -> "Matrix":
        return mat_add(self, scale(other, -1))

    def __repr__(self) -> str:
        return f"Matrix({self.spec.label}, {self.rows}x{self.cols}, {self.to_strings()})"


def from_entries(spec: ScalarSpec, rows: int, cols: int, entries: dict[int, dict[int, Scalar]]) -> Matrix:
    """Build a sparse matrix from a dict of dicts, dropping explicit zeros."""
    K = spec.domain
    clean: dict[int, dict[int, Scalar]] = {}
    for i, row in entries.items():
        kept = {j: value for j, value in row.items() if value != K.zero}
        if kept:
            clean[i] = kept
    return Matrix(spec, DomainMatrix(clean, (rows, cols), K))


def matrix_from_rows(spec: ScalarSpec, values: Sequence[Sequence[Any]]) -> Matrix:
    rows = len(values)
    cols = len(values[0]) if rows else 0
    entries: dict[int, dict[int, Scalar]] = {}
    for i, row in enumerate(values):
        if len(row) != cols:
            raise AppError(
                code="DIMENSION_MISMATCH",
                message="Ragged matrix rows.",
                details={"row": i, "expected": cols, "actual": len(row)},
            )
        entries[i] = {j: spec.convert(value) for j, value in enumerate(row)}
    return from_entries(spec, rows, cols, entries)


def column(spec: ScalarSpec, values: Sequence[Any]) -> Matrix:
    return matrix_from_rows(spec, [[value] for value in values])


def row(spec: ScalarSpec, values: Sequence[Any]) -> Matrix:
    return matrix_from_rows(spec, [list(values)])


def zeros(spec: ScalarSpec, rows: int, cols: int) -> Matrix:
    return from_entries(spec, rows, cols, {})


def identity(spec: ScalarSpec, n: int) -> Matrix:
    return from_entries(spec, n, n, {i: {i: spec.one} for i in range(n)})


def with_spec(m: Matrix, spec: ScalarSpec) -> Matrix:
    """Reinterpret a matrix over another base ring (Z -> Q, Z -> F_p)."""
    if spec == m.spec:
        return m
    converted = {
        i: {j: spec.convert(int(value)) if m.spec.kind == "Z" else spec.domain.convert_from(value, m.spec.domain)
            for j, value in entries_row.items()}
        for i, entries_row in m.entries.items()
    }
    return from_entries(spec, m.rows, m.cols, converted)


def _check_same_spec(a: Matrix, b: Matrix, operation: str) -> None:
    if a.spec != b.spec:
        raise AppError(
            code="SCALAR_SPEC_MISMATCH",
            message=f"Cannot {operation} matrices over different base rings.",
            details={"left": a.spec.to_json(), "right": b.spec.to_json()},
        )


def mat_mul(a: Matrix, b: Matrix) -> Matrix:
    _check_same_spec(a, b, "multiply")
    if a.cols != b.rows:
        raise AppError(
            code="DIMENSION_MISMATCH",
            message="Inner dimensions differ.",
            details={"left_shape": list(a.shape), "right_shape": list(b.shape)},
        )
    return Matrix(a.spec, a.dm.to_sparse().matmul(b.dm.to_sparse()))


def mat_add(a: Matrix, b: Matrix) -> Matrix:
    _check_same_spec(a, b, "add")
    if a.shape != b.shape:
        raise AppError(
            code="DIMENSION_MISMATCH",
            message="Shapes differ.",
            details={"left_shape": list(a.shape), "right_shape": list(b.shape)},
        )
    total: dict[int, dict[int, Scalar]] = {i: dict(r) for i, r in a.entries.items()}
    zero = a.spec.zero
    for i, entries_row in b.entries.items():
        target = total.setdefault(i, {})
        for j, value in entries_row.items():
            target[j] = target.get(j, zero) + value
    return from_entries(a.spec, a.rows, a.cols, total)


def scale(m: Matrix, factor: Any) -> Matrix:
    c = m.spec.convert(factor)
    return from_entries(
        m.spec, m.rows, m.cols, {i: {j: c * v for j, v in r.items()} for i, r in m.entries.items()}
    )


def transpose(m: Matrix) -> Matrix:
    flipped: dict[int, dict[int, Scalar]] = {}
    for i, entries_row in m.entries.items():
        for j, value in entries_row.items():
            flipped.setdefault(j, {})[i] = value
    return from_entries(m.spec, m.cols, m.rows, flipped)


def kron(a: Matrix, b: Matrix) -> Matrix:
    """Kronecker product; index (i, k) of a (x) b is i * b.rows + k (row-major)."""
    _check_same_spec(a, b, "tensor")
    out: dict[int, dict[int, Scalar]] = {}
    for i, a_row in a.entries.items():
        for k, b_row in b.entries.items():
            target = out.setdefault(i * b.rows + k, {})
            for j, a_value in a_row.items():
                for l, b_value in b_row.items():
                    target[j * b.cols + l] = a_value * b_value
    return from_entries(a.spec, a.rows * b.rows, a.cols * b.cols, out)


def first_difference(a: Matrix, b: Matrix) -> Optional[tuple[int, int]]:
    """First (row, col) in row-major order where a and b disagree, or None."""
    if a.shape != b.shape:
        raise AppError(
            code="DIMENSION_MISMATCH",
            message="Cannot compare matrices of different shapes.",
            details={"left_shape": list(a.shape), "right_shape": list(b.shape)},
        )
    for i in sorted(set(a.entries) | set(b.entries)):
        a_row = a.entries.get(i, {})
        b_row = b.entries.get(i, {})
        for j in sorted(set(a_row) | set(b_row)):
            if a.entry(i, j) != b.entry(i, j):
                return i, j
    return None


def _require_square(m: Matrix) -> None:
    if not m.is_square:
        raise AppError(code="NON_SQUARE", message="Matrix must be square.", details={"shape": list(m.shape)})


def determinant(m: Matrix) -> Scalar:
    _require_square(m)
    if m.rows == 0:
        return m.spec.one
    return m.dm.to_dense().det()


def is_unit(spec: ScalarSpec, value: Scalar) -> bool:
    if spec.is_field:
        return value != spec.zero
    return abs(int(value)) == 1


def try_invert(m: Matrix) -> Matrix:
    """Exact two-sided inverse; over Z only unit determinants are invertible."""
    _require_square(m)
    det = determinant(m)
    if not is_unit(m.spec, det):
        raise AppError(
            code="NOT_INVERTIBLE",
            message="Matrix is not invertible over the base ring.",
            exit_code=1,
            details={"det": format_scalar(m.spec, det)},
        )
    if m.spec.is_field:
        inverse = m.dm.to_dense().inv()
        return Matrix(m.spec, inverse.to_sparse())
    inverse = m.dm.convert_to(QQ).to_dense().inv().convert_to(ZZ)
    return Matrix(m.spec, inverse.to_sparse())


@dataclass(frozen=True)
class SolutionSet:
    """All solutions of an affine system: empty, one point, or particular + span(kernel)."""

    spec: ScalarSpec
    kind: Literal["empty", "unique", "affine"]
    unknowns: int
    particular: Optional[tuple[Scalar, ...]] = None
    kernel: tuple[tuple[Scalar, ...], ...] = ()

    @property
    def is_empty(self) -> bool:
        return self.kind == "empty"

    @property
    def dimension(self) -> Optional[int]:
        return None if self.is_empty else len(self.kernel)

    def count(self) -> Optional[int]:
        """Number of points over a finite field; None over Q (infinite unless unique)."""
        if self.is_empty:
            return 0
        if self.kind == "unique":
            return 1
        if self.spec.is_finite:
            return (self.spec.p or 0) ** len(self.kernel)
        return None

    def particular_column(self) -> Optional[Matrix]:
        if self.particular is None:
            return None
        return column(self.spec, list(self.particular))


def _require_field(spec: ScalarSpec, operation: str) -> None:
    if not spec.is_field:
        raise AppError(
            code="INTEGER_SPEC_UNSUPPORTED",
            message=f"{operation} needs a field; integer solution sets are not supported.",
            details={"scalars": spec.to_json()},
        )


def solve_affine(system: Matrix, rhs: Matrix) -> SolutionSet:
    """Describe every exact solution x of ``system @ x == rhs`` over a field."""
    _require_field(system.spec, "solve_affine")
    _check_same_spec(system, rhs, "solve")
    if rhs.cols != 1 or rhs.rows != system.rows:
        raise AppError(
            code="DIMENSION_MISMATCH",
            message="Right-hand side must be a column with one entry per equation.",
            details={"system_shape": list(system.shape), "rhs_shape": list(rhs.shape)},
        )

    spec = system.spec
    zero, one = spec.zero, spec.one
    n = system.cols

    if system.rows == 0:
        kernel = tuple(tuple(one if k == f else zero for k in range(n)) for f in range(n))
        return SolutionSet(spec, "affine" if n else "unique", n, tuple([zero] * n), kernel)

    augmented = {i: dict(r) for i, r in system.entries.items()}
    for i, value in ((i, r[0]) for i, r in rhs.entries.items()):
        augmented.setdefault(i, {})[n] = value
    aug = from_entries(spec, system.rows, n + 1, augmented)

    reduced_dm, pivots = aug.dm.rref()
    reduced = Matrix(spec, reduced_dm.to_sparse())
    pivots = tuple(pivots)
    logger.debug("solve_affine: %dx%d system, rank %d", system.rows, n, len(pivots))

    if n in pivots:
        return SolutionSet(spec, "empty", n)

    particular = [zero] * n
    for r, c in enumerate(pivots):
        particular[c] = reduced.entry(r, n)

    pivot_set = set(pivots)
    kernel: list[tuple[Scalar, ...]] = []
    for free in range(n):
        if free in pivot_set:
            continue
        vector = [zero] * n
        vector[free] = one
        for r, c in enumerate(pivots):
            vector[c] = -reduced.entry(r, free)
        kernel.append(tuple(vector))

    kind: Literal["unique", "affine"] = "unique" if not kernel else "affine"
    return SolutionSet(spec, kind, n, tuple(particular), tuple(kernel))


def enumerate_solutions(solution: SolutionSet, limit: Optional[int] = None) -> Iterator[tuple[Scalar, ...]]:
    """Yield every point of a solution set over a finite field."""
    if solution.is_empty:
        return
    if solution.kind == "unique":
        yield solution.particular  # type: ignore[misc]
        return
    if not solution.spec.is_finite:
        raise AppError(
            code="INVALID_ARGUMENT",
            message="Only solution sets over finite fields can be enumerated.",
            details={"scalars": solution.spec.to_json()},
        )
    cap = config.ENUMERATION_LIMIT if limit is None else limit
    total = solution.count() or 0
    if total > cap:
        raise AppError(
            code="ENUMERATION_TOO_LARGE",
            message="Solution set is larger than the enumeration limit.",
            details={"points": total, "limit": cap},
        )
    elements = solution.spec.elements()
    base = solution.particular or ()
    for coefficients in itertools.product(elements, repeat=len(solution.kernel)):
        point = list(base)
        for c, vector in zip(coefficients, solution.kernel):
            if c == solution.spec.zero:
                continue
            point = [x + c * v for x, v in zip(point, vector)]
        yield tuple(point)


def kernel_vector(m: Matrix) -> Optional[list[Scalar]]:
    """One nonzero vector v with m @ v == 0 (primitive integer vector over Z), or None."""
    if m.spec.is_field:
        solution = solve_affine(m, zeros(m.spec, m.rows, 1))
        return list(solution.kernel[0]) if solution.kernel else None

    rational = rationals()
    solution = solve_affine(with_spec(m, rational), zeros(rational, m.rows, 1))
    if not solution.kernel:
        return None
    vector = solution.kernel[0]
    denominators = [int(QQ.denom(value)) for value in vector]
    common = math.lcm(*denominators)
    scaled = [int(QQ.numer(value)) * (common // int(QQ.denom(value))) for value in vector]
    divisor = math.gcd(*scaled) or 1
    return [m.spec.convert(value // divisor) for value in scaled]
