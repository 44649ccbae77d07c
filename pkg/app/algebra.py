"""Finite-dimensional unital algebras given by structure constants.

Convention: e_i * e_j = sum_k c[i][j][k] e_k, and the tensor square uses the
row-major ordering e_i (x) e_j -> i * d + j everywhere in the package.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Any, Optional, Sequence

from pydantic import ValidationError

from app import config
from app.models import AlgebraDocument, AppError
from app.scalars import (
    Matrix,
    Scalar,
    ScalarSpec,
    determinant,
    format_scalar,
    from_entries,
    parse_scalar,
    row,
)


logger = logging.getLogger(__name__)

Structure = tuple[tuple[tuple[Scalar, ...], ...], ...]


@dataclass(frozen=True, eq=False)
class FinAlgebra:
    name: str
    spec: ScalarSpec
    basis: tuple[str, ...]
    structure: Structure
    unit: tuple[Scalar, ...]

    @property
    def dim(self) -> int:
        return len(self.basis)

    def product(self, i: int, j: int) -> tuple[Scalar, ...]:
        """Coordinates of e_i * e_j."""
        return self.structure[i][j]

    @cached_property
    def _nonzero(self) -> tuple[tuple[tuple[tuple[int, Scalar], ...], ...], ...]:
        zero = self.spec.zero
        return tuple(
            tuple(tuple((k, value) for k, value in enumerate(self.structure[i][j]) if value != zero) for j in range(self.dim))
            for i in range(self.dim)
        )

    def nonzero_product(self, i: int, j: int) -> tuple[tuple[int, Scalar], ...]:
        return self._nonzero[i][j]

    @cached_property
    def mu_matrix(self) -> Matrix:
        """The d x d^2 matrix of multiplication A (x) A -> A."""
        d = self.dim
        entries: dict[int, dict[int, Scalar]] = {}
        for i in range(d):
            for j in range(d):
                for k, value in self.nonzero_product(i, j):
                    entries.setdefault(k, {})[i * d + j] = value
        return from_entries(self.spec, d, d * d, entries)

    @cached_property
    def unit_column(self) -> Matrix:
        """The d x 1 matrix of the unit map 1 -> A."""
        return from_entries(self.spec, self.dim, 1, {k: {0: value} for k, value in enumerate(self.unit)})

    def basis_vector(self, i: int) -> list[Scalar]:
        return [self.spec.one if k == i else self.spec.zero for k in range(self.dim)]

    def validate(self) -> None:
        """Check associativity and unitality on every basis triple; raise on the first failure."""
        witness = associativity_witness(self)
        if witness is not None:
            raise AppError(
                code="NOT_ASSOCIATIVE",
                message=f"Algebra '{self.name}' is not associative.",
                details={"witness": list(witness), "labels": [self.basis[index] for index in witness]},
            )
        missing = unitality_witness(self)
        if missing is not None:
            raise AppError(
                code="NOT_UNITAL",
                message=f"Unit vector of '{self.name}' is not a two-sided unit.",
                details={"witness": missing, "label": self.basis[missing]},
            )


@dataclass(frozen=True)
class TensorSquareElement:
    """An element sum_ij coeffs[i][j] e_i (x) e_j of A (x) A."""

    coeffs: Matrix

    @property
    def spec(self) -> ScalarSpec:
        return self.coeffs.spec

    @property
    def dim(self) -> int:
        return self.coeffs.rows

    def coefficient(self, i: int, j: int) -> Scalar:
        return self.coeffs.entry(i, j)

    def as_column(self) -> Matrix:
        d = self.dim
        return from_entries(
            self.spec,
            d * d,
            1,
            {i * d + j: {0: value} for i, r in self.coeffs.entries.items() for j, value in r.items()},
        )

    @classmethod
    def from_column(cls, column_matrix: Matrix, dim: int) -> "TensorSquareElement":
        if column_matrix.shape != (dim * dim, 1):
            raise AppError(
                code="DIMENSION_MISMATCH",
                message="Column does not have d^2 entries.",
                details={"shape": list(column_matrix.shape), "dim": dim},
            )
        entries: dict[int, dict[int, Scalar]] = {}
        for flat, r in column_matrix.entries.items():
            entries.setdefault(flat // dim, {})[flat % dim] = r[0]
        return cls(from_entries(column_matrix.spec, dim, dim, entries))

    def is_symmetric(self) -> bool:
        return self.coeffs.is_symmetric()

    def to_strings(self) -> list[list[str]]:
        return self.coeffs.to_strings()


@dataclass(frozen=True)
class BilinearFormMatrix:
    """Gram matrix T[i][j] = form(e_i, e_j)."""

    entries: Matrix

    @property
    def spec(self) -> ScalarSpec:
        return self.entries.spec

    @property
    def dim(self) -> int:
        return self.entries.rows

    def value(self, i: int, j: int) -> Scalar:
        return self.entries.entry(i, j)

    def evaluate(self, a: Sequence[Scalar], b: Sequence[Scalar]) -> Scalar:
        total = self.spec.zero
        for i, r in self.entries.entries.items():
            for j, value in r.items():
                total += a[i] * value * b[j]
        return total

    def determinant(self) -> Scalar:
        return determinant(self.entries)

    def to_strings(self) -> list[list[str]]:
        return self.entries.to_strings()


def build_algebra(
    name: str,
    spec: ScalarSpec,
    basis: Sequence[str],
    structure: Sequence[Sequence[Sequence[Any]]],
    unit: Sequence[Any],
    *,
    validate: bool = True,
) -> FinAlgebra:
    d = len(basis)
    _check_shape(d, structure, unit)
    algebra = FinAlgebra(
        name=name,
        spec=spec,
        basis=tuple(basis),
        structure=tuple(
            tuple(tuple(spec.convert(value) for value in structure[i][j]) for j in range(d)) for i in range(d)
        ),
        unit=tuple(spec.convert(value) for value in unit),
    )
    if validate:
        algebra.validate()
    return algebra


def _check_shape(d: int, structure: Sequence[Sequence[Sequence[Any]]], unit: Sequence[Any]) -> None:
    if len(unit) != d:
        raise AppError(
            code="SCHEMA_ERROR",
            message="Unit vector length differs from the dimension.",
            details={"dim": d, "unit_length": len(unit)},
        )
    if len(structure) != d or any(len(plane) != d for plane in structure):
        raise AppError(
            code="SCHEMA_ERROR",
            message="Structure constants must form a d x d x d array.",
            details={"dim": d},
        )
    for i, plane in enumerate(structure):
        for j, coords in enumerate(plane):
            if len(coords) != d:
                raise AppError(
                    code="SCHEMA_ERROR",
                    message="Structure constants must form a d x d x d array.",
                    details={"dim": d, "at": [i, j], "length": len(coords)},
                )


def associativity_witness(A: FinAlgebra) -> Optional[tuple[int, int, int]]:
    """First basis triple (i, j, k) with (e_i e_j) e_k != e_i (e_j e_k), or None."""
    d = A.dim
    zero = A.spec.zero
    for i in range(d):
        for j in range(d):
            for k in range(d):
                left = [zero] * d
                for m, c_ijm in A.nonzero_product(i, j):
                    for l, value in A.nonzero_product(m, k):
                        left[l] += c_ijm * value
                right = [zero] * d
                for m, c_jkm in A.nonzero_product(j, k):
                    for l, value in A.nonzero_product(i, m):
                        right[l] += c_jkm * value
                if left != right:
                    return i, j, k
    return None


def unitality_witness(A: FinAlgebra) -> Optional[int]:
    """First basis index j with u e_j != e_j or e_j u != e_j, or None."""
    for j in range(A.dim):
        expected = A.basis_vector(j)
        if multiply(A, A.unit, expected) != expected or multiply(A, expected, A.unit) != expected:
            return j
    return None


def load_algebra(document: Any) -> FinAlgebra:
    """Validate an algebra document and return the algebra it presents."""
    try:
        parsed = document if isinstance(document, AlgebraDocument) else AlgebraDocument.model_validate(document)
    except ValidationError as exc:
        raise AppError(
            code="SCHEMA_ERROR",
            message="Algebra document does not match the schema.",
            details={"errors": exc.errors(include_url=False, include_context=False)},
        ) from exc

    spec = ScalarSpec.from_json(parsed.scalars)
    d = parsed.dim
    if d > config.MAX_ALGEBRA_DIM:
        raise AppError(
            code="SCHEMA_ERROR",
            message="Algebra dimension exceeds the configured limit.",
            details={"dim": d, "limit": config.MAX_ALGEBRA_DIM},
        )
    if len(parsed.basis) != d:
        raise AppError(
            code="SCHEMA_ERROR",
            message="Basis length differs from the dimension.",
            details={"dim": d, "basis_length": len(parsed.basis)},
        )
    duplicates = sorted({label for label in parsed.basis if parsed.basis.count(label) > 1})
    if duplicates:
        raise AppError(
            code="SCHEMA_ERROR",
            message="Basis labels must be distinct.",
            details={"duplicates": duplicates},
        )
    _check_shape(d, parsed.structure, parsed.unit)

    structure = [[[parse_scalar(spec, text) for text in coords] for coords in plane] for plane in parsed.structure]
    unit = [parse_scalar(spec, text) for text in parsed.unit]
    algebra = build_algebra(parsed.name, spec, parsed.basis, structure, unit)
    logger.info("Loaded algebra %s: dim %d over %s", algebra.name, d, spec.label)
    return algebra


def load_algebra_file(path: str | Path) -> FinAlgebra:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError as exc:
        raise AppError(code="FILE_NOT_FOUND", message="Algebra file not found.", details={"path": str(path)}) from exc
    try:
        document = json.loads(text)
    except json.JSONDecodeError as exc:
        raise AppError(
            code="SCHEMA_ERROR",
            message="Algebra file is not valid JSON.",
            details={"path": str(path), "line": exc.lineno, "column": exc.colno},
        ) from exc
    return load_algebra(document)


def dump_algebra(A: FinAlgebra) -> dict[str, Any]:
    document = AlgebraDocument(
        name=A.name,
        scalars=A.spec.to_json(),
        dim=A.dim,
        basis=list(A.basis),
        unit=[format_scalar(A.spec, value) for value in A.unit],
        structure=[[[format_scalar(A.spec, value) for value in coords] for coords in plane] for plane in A.structure],
    )
    return document.model_dump()


def _coerce_vector(A: FinAlgebra, a: Sequence[Any], what: str = "vector") -> list[Scalar]:
    if len(a) != A.dim:
        raise AppError(
            code="DIMENSION_MISMATCH",
            message=f"The {what} must have one coordinate per basis element.",
            details={"dim": A.dim, "length": len(a)},
        )
    return [A.spec.convert(value) for value in a]


def multiply(A: FinAlgebra, a: Sequence[Any], b: Sequence[Any]) -> list[Scalar]:
    a = _coerce_vector(A, a)
    b = _coerce_vector(A, b)
    zero = A.spec.zero
    out = [zero] * A.dim
    for i, a_i in enumerate(a):
        if a_i == zero:
            continue
        for j, b_j in enumerate(b):
            if b_j == zero:
                continue
            for k, value in A.nonzero_product(i, j):
                out[k] += a_i * b_j * value
    return out


def left_mult_matrix(A: FinAlgebra, a: Sequence[Any]) -> Matrix:
    """L_a with (L_a)[k][j] = sum_i a_i c[i][j][k]."""
    a = _coerce_vector(A, a)
    zero = A.spec.zero
    entries: dict[int, dict[int, Scalar]] = {}
    for i, a_i in enumerate(a):
        if a_i == zero:
            continue
        for j in range(A.dim):
            for k, value in A.nonzero_product(i, j):
                target = entries.setdefault(k, {})
                target[j] = target.get(j, zero) + a_i * value
    return from_entries(A.spec, A.dim, A.dim, entries)


def endomorphism_trace(f: Matrix) -> Scalar:
    if not f.is_square:
        raise AppError(code="NON_SQUARE", message="Trace needs a square matrix.", details={"shape": list(f.shape)})
    total = f.spec.zero
    for i in range(f.rows):
        total += f.entry(i, i)
    return total


def trace_map(A: FinAlgebra) -> Matrix:
    """1 x d row with tr(e_i) = sum_j c[i][j][j]."""
    values = []
    for i in range(A.dim):
        total = A.spec.zero
        for j in range(A.dim):
            total += A.structure[i][j][j]
        values.append(total)
    return row(A.spec, values)


def invariant_form_from_functional(A: FinAlgebra, theta: Matrix) -> BilinearFormMatrix:
    """The form (a, b) -> theta(ab)."""
    if theta.shape != (1, A.dim):
        raise AppError(
            code="DIMENSION_MISMATCH",
            message="Functional must be a 1 x d row.",
            details={"shape": list(theta.shape), "dim": A.dim},
        )
    zero = A.spec.zero
    entries: dict[int, dict[int, Scalar]] = {}
    for i in range(A.dim):
        for j in range(A.dim):
            total = zero
            for k, value in A.nonzero_product(i, j):
                total += value * theta.entry(0, k)
            if total != zero:
                entries.setdefault(i, {})[j] = total
    return BilinearFormMatrix(from_entries(A.spec, A.dim, A.dim, entries))


def functional_from_invariant_form(A: FinAlgebra, form: BilinearFormMatrix) -> Matrix:
    """The functional b -> form(1, b)."""
    return row(A.spec, [form.evaluate(A.unit, A.basis_vector(j)) for j in range(A.dim)])


def trace_form(A: FinAlgebra) -> BilinearFormMatrix:
    return invariant_form_from_functional(A, trace_map(A))


def is_symmetric_form(form: BilinearFormMatrix) -> bool:
    return form.entries.is_symmetric()


def invariance_witness(A: FinAlgebra, form: BilinearFormMatrix) -> Optional[tuple[int, int, int]]:
    """First (i, j, k) with form(e_i e_j, e_k) != form(e_i, e_j e_k), or None."""
    d = A.dim
    for i in range(d):
        for j in range(d):
            for k in range(d):
                left = form.evaluate(A.product(i, j), A.basis_vector(k))
                right = form.evaluate(A.basis_vector(i), A.product(j, k))
                if left != right:
                    return i, j, k
    return None


def is_invariant_form(A: FinAlgebra, form: BilinearFormMatrix) -> bool:
    return invariance_witness(A, form) is None


def commutativity_witness(A: FinAlgebra) -> Optional[tuple[int, int]]:
    for i in range(A.dim):
        for j in range(i + 1, A.dim):
            if A.product(i, j) != A.product(j, i):
                return i, j
    return None


def is_commutative(A: FinAlgebra) -> bool:
    return commutativity_witness(A) is None


# Corpus constructors.


def _structure_from_rule(spec: ScalarSpec, d: int, rule) -> list[list[list[Scalar]]]:
    """Structure constants for bases whose products are basis elements or zero."""
    structure = [[[spec.zero] * d for _ in range(d)] for _ in range(d)]
    for i in range(d):
        for j in range(d):
            k = rule(i, j)
            if k is not None:
                structure[i][j][k] = spec.one
    return structure


def cyclic_cayley(n: int) -> list[list[int]]:
    if n < 1:
        raise AppError(code="INVALID_ARGUMENT", message="Group order must be positive.", details={"n": n})
    return [[(i + j) % n for j in range(n)] for i in range(n)]


def _group_identity(cayley: Sequence[Sequence[int]]) -> Optional[int]:
    n = len(cayley)
    for e in range(n):
        if all(cayley[e][j] == j and cayley[j][e] == j for j in range(n)):
            return e
    return None


def _not_a_group(reason: str, witness: Any) -> AppError:
    return AppError(code="NOT_A_GROUP", message=f"Table is not a group: {reason}.", details={"witness": witness})


def make_group_algebra(
    spec: ScalarSpec,
    cayley: Sequence[Sequence[int]],
    *,
    name: Optional[str] = None,
    labels: Optional[Sequence[str]] = None,
) -> FinAlgebra:
    n = len(cayley)
    if n == 0:
        raise _not_a_group("empty table", None)
    for i, r in enumerate(cayley):
        if len(r) != n:
            raise _not_a_group("table is not square", [i])
        for j, value in enumerate(r):
            if not isinstance(value, int) or not 0 <= value < n:
                raise _not_a_group("entry outside the index range", [i, j])
    for i in range(n):
        for j in range(n):
            for k in range(n):
                if cayley[cayley[i][j]][k] != cayley[i][cayley[j][k]]:
                    raise _not_a_group("multiplication is not associative", [i, j, k])
    e = _group_identity(cayley)
    if e is None:
        raise _not_a_group("no identity element", None)
    for i in range(n):
        if not any(cayley[i][j] == e and cayley[j][i] == e for j in range(n)):
            raise _not_a_group("element without an inverse", [i])

    basis = list(labels) if labels is not None else [f"g{i}" for i in range(n)]
    structure = _structure_from_rule(spec, n, lambda i, j: cayley[i][j])
    unit = [spec.one if k == e else spec.zero for k in range(n)]
    return build_algebra(name or f"group_algebra_{n}_{spec.label}", spec, basis, structure, unit, validate=False)


def cyclic_group_algebra(spec: ScalarSpec, n: int, *, name: Optional[str] = None) -> FinAlgebra:
    labels = ["e"] + ["g" if k == 1 else f"g^{k}" for k in range(1, n)]
    return make_group_algebra(spec, cyclic_cayley(n), name=name or f"{spec.label}[C{n}]", labels=labels)


def make_matrix_algebra(spec: ScalarSpec, n: int, *, name: Optional[str] = None) -> FinAlgebra:
    if n < 1:
        raise AppError(code="INVALID_ARGUMENT", message="Matrix size must be positive.", details={"n": n})
    sep = "" if n < 10 else "_"
    basis = [f"e{i + 1}{sep}{j + 1}" for i in range(n) for j in range(n)]

    def rule(a: int, b: int) -> Optional[int]:
        i, j = divmod(a, n)
        k, l = divmod(b, n)
        return i * n + l if j == k else None

    structure = _structure_from_rule(spec, n * n, rule)
    unit = [spec.one if a // n == a % n else spec.zero for a in range(n * n)]
    return build_algebra(name or f"M{n}({spec.label})", spec, basis, structure, unit, validate=False)


def make_upper_triangular_algebra(spec: ScalarSpec, n: int, *, name: Optional[str] = None) -> FinAlgebra:
    if n < 1:
        raise AppError(code="INVALID_ARGUMENT", message="Matrix size must be positive.", details={"n": n})
    pairs = [(i, j) for i in range(n) for j in range(i, n)]
    index = {pair: position for position, pair in enumerate(pairs)}
    basis = [f"e{i + 1}{j + 1}" for i, j in pairs]

    def rule(a: int, b: int) -> Optional[int]:
        (i, j), (k, l) = pairs[a], pairs[b]
        return index[(i, l)] if j == k else None

    structure = _structure_from_rule(spec, len(pairs), rule)
    unit = [spec.one if i == j else spec.zero for i, j in pairs]
    return build_algebra(name or f"T{n}({spec.label})", spec, basis, structure, unit, validate=False)


def make_truncated_polynomial_algebra(spec: ScalarSpec, n: int, *, name: Optional[str] = None) -> FinAlgebra:
    """k[x]/(x^n) on the monomial basis."""
    if n < 1:
        raise AppError(code="INVALID_ARGUMENT", message="Truncation degree must be positive.", details={"n": n})
    basis = ["1"] + ["x" if k == 1 else f"x^{k}" for k in range(1, n)]
    structure = _structure_from_rule(spec, n, lambda i, j: i + j if i + j < n else None)
    unit = [spec.one] + [spec.zero] * (n - 1)
    return build_algebra(name or f"{spec.label}[x]/(x^{n})", spec, basis, structure, unit, validate=False)


def dual_numbers(spec: ScalarSpec) -> FinAlgebra:
    return make_truncated_polynomial_algebra(spec, 2, name=f"dual_numbers_{spec.label}")


def base_algebra(spec: ScalarSpec) -> FinAlgebra:
    return build_algebra(spec.label, spec, ["1"], [[[spec.one]]], [spec.one], validate=False)


def product_algebra(A: FinAlgebra, B: FinAlgebra, *, name: Optional[str] = None) -> FinAlgebra:
    if A.spec != B.spec:
        raise AppError(
            code="SCALAR_SPEC_MISMATCH",
            message="Product factors must share a base ring.",
            details={"left": A.spec.to_json(), "right": B.spec.to_json()},
        )
    spec = A.spec
    d = A.dim + B.dim
    structure = [[[spec.zero] * d for _ in range(d)] for _ in range(d)]
    for i in range(A.dim):
        for j in range(A.dim):
            for k, value in A.nonzero_product(i, j):
                structure[i][j][k] = value
    offset = A.dim
    for i in range(B.dim):
        for j in range(B.dim):
            for k, value in B.nonzero_product(i, j):
                structure[offset + i][offset + j][offset + k] = value
    basis = [f"({label},0)" for label in A.basis] + [f"(0,{label})" for label in B.basis]
    unit = list(A.unit) + list(B.unit)
    return build_algebra(name or f"{A.name}x{B.name}", spec, basis, structure, unit, validate=False)
