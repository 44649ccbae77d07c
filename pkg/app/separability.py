"""Strong separability via the trace form, the symmetric separability idempotent
and the special symmetric Frobenius structure it induces, plus linear-algebra
oracles that decide the same questions independently.

Matrices of maps follow the row-major tensor ordering of ``app.algebra``:
kappa is a d^2 x 1 column, sigma and delta are d^2 x d, and the trace form
as a map A (x) A -> 1 is the 1 x d^2 row of T flattened.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from typing import Any, Iterable, Literal, Optional, Sequence

from app import config
from app.algebra import (
    BilinearFormMatrix,
    FinAlgebra,
    TensorSquareElement,
    is_commutative,
    left_mult_matrix,
    trace_form,
    trace_map,
)
from app.models import (
    AppError,
    AxiomResultPayload,
    DegeneracyPayload,
    FrobeniusPayload,
    SeparabilityReportPayload,
)
from app.scalars import (
    Matrix,
    Scalar,
    ScalarSpec,
    SolutionSet,
    first_difference,
    format_scalar,
    from_entries,
    identity,
    is_unit,
    kernel_vector,
    kron,
    mat_mul,
    solve_affine,
    try_invert,
)


logger = logging.getLogger(__name__)

KAPPA_AXIOMS = ("k1", "k2", "k3", "k4")
SIGMA_AXIOMS = ("sigma1", "sigma2")
FROBENIUS_CHECKS = ("coassoc", "counital", "frobenius_law", "special", "symmetric_form")

Verdict = Literal["StronglySeparable", "Degenerate"]


@dataclass(frozen=True)
class AxiomResult:
    name: str
    passed: bool
    witness: Optional[Any] = None

    def to_payload(self) -> AxiomResultPayload:
        return AxiomResultPayload(name=self.name, passed=self.passed, witness=self.witness)


@dataclass(frozen=True)
class FrobeniusStructure:
    """Comultiplication as a d^2 x d matrix and the counit as a 1 x d row."""

    comultiplication: Matrix
    counit: Matrix

    @property
    def dim(self) -> int:
        return self.counit.cols

    def coproduct_of(self, a: int) -> TensorSquareElement:
        return TensorSquareElement.from_column(column_of(self.comultiplication, a), self.dim)

    def to_payload(self) -> FrobeniusPayload:
        return FrobeniusPayload(
            comultiplication=[self.coproduct_of(a).to_strings() for a in range(self.dim)],
            counit=self.counit.to_strings()[0],
        )


@dataclass(frozen=True)
class Degeneracy:
    kind: Literal["singular", "non_unit_determinant"]
    det: Scalar
    kernel_vector: Optional[list[Scalar]] = None


@dataclass(frozen=True)
class SeparabilityReport:
    algebra: FinAlgebra
    is_commutative: bool
    trace_map: Matrix
    trace_form: BilinearFormMatrix
    det: Scalar
    verdict: Verdict
    degeneracy: Optional[Degeneracy] = None
    kappa: Optional[TensorSquareElement] = None
    frobenius: Optional[FrobeniusStructure] = None
    axiom_results: dict[str, AxiomResult] = field(default_factory=dict)

    @property
    def is_strongly_separable(self) -> bool:
        return self.verdict == "StronglySeparable"

    @property
    def all_axioms_pass(self) -> bool:
        return all(result.passed for result in self.axiom_results.values())

    def to_payload(self) -> SeparabilityReportPayload:
        spec = self.algebra.spec
        degeneracy = None
        if self.degeneracy is not None:
            vector = self.degeneracy.kernel_vector
            degeneracy = DegeneracyPayload(
                kind=self.degeneracy.kind,
                det=format_scalar(spec, self.degeneracy.det),
                kernel_vector=[format_scalar(spec, value) for value in vector] if vector is not None else None,
            )
        return SeparabilityReportPayload(
            algebra=self.algebra.name,
            scalars=spec.to_json(),
            dim=self.algebra.dim,
            is_commutative=self.is_commutative,
            trace_map=self.trace_map.to_strings()[0],
            trace_form=self.trace_form.to_strings(),
            det=format_scalar(spec, self.det),
            verdict=self.verdict,
            degeneracy=degeneracy,
            kappa=self.kappa.to_strings() if self.kappa is not None else None,
            frobenius=self.frobenius.to_payload() if self.frobenius is not None else None,
            axiom_results=[result.to_payload() for result in self.axiom_results.values()],
        )


# Linear systems in the coordinates of kappa or sigma.


@dataclass(frozen=True)
class LinearConstraint:
    axiom: str
    witness: Any
    coefficients: dict[int, Scalar]
    rhs: Scalar


@dataclass(frozen=True)
class LinearSystem:
    spec: ScalarSpec
    unknowns: int
    constraints: tuple[LinearConstraint, ...]

    def matrices(self) -> tuple[Matrix, Matrix]:
        rows = len(self.constraints)
        system = from_entries(
            self.spec, rows, self.unknowns, {r: dict(c.coefficients) for r, c in enumerate(self.constraints)}
        )
        rhs = from_entries(self.spec, rows, 1, {r: {0: c.rhs} for r, c in enumerate(self.constraints)})
        return system, rhs

    def solve(self) -> SolutionSet:
        system, rhs = self.matrices()
        return solve_affine(system, rhs)

    def violation(self, x: Sequence[Scalar], *, homogeneous: bool = False) -> Optional[LinearConstraint]:
        """First constraint that x does not satisfy (with zero right-hand sides if homogeneous)."""
        zero = self.spec.zero
        for constraint in self.constraints:
            total = zero
            for index, coefficient in constraint.coefficients.items():
                total += coefficient * x[index]
            if total != (zero if homogeneous else constraint.rhs):
                return constraint
        return None

    def restricted(self, axioms: Iterable[str]) -> "LinearSystem":
        wanted = set(axioms)
        return LinearSystem(self.spec, self.unknowns, tuple(c for c in self.constraints if c.axiom in wanted))


def _accumulate(target: dict[int, Scalar], index: int, value: Scalar) -> None:
    existing = target.get(index)
    target[index] = value if existing is None else existing + value


def _constraint(spec: ScalarSpec, axiom: str, witness: Any, coefficients: dict[int, Scalar], rhs: Scalar):
    kept = {index: value for index, value in coefficients.items() if value != spec.zero}
    if not kept and rhs == spec.zero:
        return None
    return LinearConstraint(axiom, witness, kept, rhs)


def kappa_linear_system(A: FinAlgebra, axioms: Iterable[str] = KAPPA_AXIOMS) -> LinearSystem:
    """Affine constraints on kappa = sum x[i*d+j] e_i (x) e_j for any subset of k1..k4."""
    axioms = tuple(axioms)
    unknown = [name for name in axioms if name not in KAPPA_AXIOMS]
    if unknown:
        raise AppError(
            code="INVALID_ARGUMENT",
            message="Unknown separability idempotent axiom.",
            details={"axioms": unknown, "allowed": list(KAPPA_AXIOMS)},
        )
    spec, d, c = A.spec, A.dim, A.structure
    constraints: list[LinearConstraint] = []

    def add(axiom: str, witness: Any, coefficients: dict[int, Scalar], rhs: Scalar) -> None:
        built = _constraint(spec, axiom, witness, coefficients, rhs)
        if built is not None:
            constraints.append(built)

    if "k1" in axioms:
        for k in range(d):
            add("k1", k, {i * d + j: c[i][j][k] for i in range(d) for j in range(d)}, A.unit[k])
    if "k2" in axioms:
        for a in range(d):
            for r1 in range(d):
                for r2 in range(d):
                    coefficients: dict[int, Scalar] = {}
                    for q in range(d):
                        _accumulate(coefficients, r1 * d + q, c[q][a][r2])
                    for p in range(d):
                        _accumulate(coefficients, p * d + r2, -c[a][p][r1])
                    add("k2", [a, r1, r2], coefficients, spec.zero)
    if "k3" in axioms:
        for i in range(d):
            for j in range(i + 1, d):
                add("k3", [i, j], {i * d + j: spec.one, j * d + i: -spec.one}, spec.zero)
    if "k4" in axioms:
        for k in range(d):
            add("k4", k, {i * d + j: c[j][i][k] for i in range(d) for j in range(d)}, A.unit[k])

    logger.debug("kappa system for %s (%s): %d constraints", A.name, ",".join(axioms), len(constraints))
    return LinearSystem(spec, d * d, tuple(constraints))


def _flatten(kappa: TensorSquareElement) -> list[Scalar]:
    d = kappa.dim
    return [kappa.coefficient(i, j) for i in range(d) for j in range(d)]


def _check_kappa(A: FinAlgebra, kappa: TensorSquareElement) -> None:
    if kappa.dim != A.dim or kappa.spec != A.spec:
        raise AppError(
            code="DIMENSION_MISMATCH",
            message="Tensor-square element does not belong to this algebra.",
            details={"dim": A.dim, "kappa_dim": kappa.dim},
        )


def verify_kappa_axioms(A: FinAlgebra, kappa: TensorSquareElement) -> dict[str, AxiomResult]:
    _check_kappa(A, kappa)
    system = kappa_linear_system(A)
    x = _flatten(kappa)
    results: dict[str, AxiomResult] = {}
    for axiom in KAPPA_AXIOMS:
        failed = system.restricted([axiom]).violation(x)
        results[axiom] = AxiomResult(axiom, failed is None, None if failed is None else failed.witness)
    return results


# The decision and the structures it produces.


def compute_kappa(A: FinAlgebra, T: BilinearFormMatrix) -> TensorSquareElement:
    """kappa = sum_ij (T^-1)[i][j] e_i (x) e_j."""
    return TensorSquareElement(try_invert(T.entries))


def column_of(m: Matrix, j: int) -> Matrix:
    return from_entries(m.spec, m.rows, 1, {i: {0: r[j]} for i, r in m.entries.items() if j in r})


def right_mult_matrix(A: FinAlgebra, b: int) -> Matrix:
    """R_b with (R_b)[k][j] = c[j][b][k]."""
    entries: dict[int, dict[int, Scalar]] = {}
    for j in range(A.dim):
        for k, value in A.nonzero_product(j, b):
            entries.setdefault(k, {})[j] = value
    return from_entries(A.spec, A.dim, A.dim, entries)


def sigma_from_kappa(A: FinAlgebra, kappa: TensorSquareElement) -> Matrix:
    """sigma(e_a) = sum_ij kappa_ij e_i (x) (e_j e_a), as a d^2 x d matrix."""
    _check_kappa(A, kappa)
    d = A.dim
    entries: dict[int, dict[int, Scalar]] = {}
    for i, r in kappa.coeffs.entries.items():
        for j, kappa_ij in r.items():
            for a in range(d):
                for k, value in A.nonzero_product(j, a):
                    target = entries.setdefault(i * d + k, {})
                    _accumulate(target, a, kappa_ij * value)
    return from_entries(A.spec, d * d, d, entries)


def verify_sigma_axioms(A: FinAlgebra, sigma: Matrix) -> dict[str, AxiomResult]:
    d = A.dim
    ident = identity(A.spec, d)
    diff = first_difference(mat_mul(A.mu_matrix, sigma), ident)
    results = {"sigma1": AxiomResult("sigma1", diff is None, None if diff is None else list(diff))}

    witness = None
    for a in range(d):
        left = left_mult_matrix(A, A.basis_vector(a))
        diff = first_difference(mat_mul(sigma, left), mat_mul(kron(left, ident), sigma))
        if diff is not None:
            witness = {"side": "left", "basis": a, "entry": list(diff)}
            break
        right = right_mult_matrix(A, a)
        diff = first_difference(mat_mul(sigma, right), mat_mul(kron(ident, right), sigma))
        if diff is not None:
            witness = {"side": "right", "basis": a, "entry": list(diff)}
            break
    results["sigma2"] = AxiomResult("sigma2", witness is None, witness)
    return results


def frobenius_structure(A: FinAlgebra, kappa: TensorSquareElement) -> FrobeniusStructure:
    """Delta(e_a) = sum_ij kappa_ij (e_a e_i) (x) e_j with the trace map as counit."""
    _check_kappa(A, kappa)
    d = A.dim
    entries: dict[int, dict[int, Scalar]] = {}
    for i, r in kappa.coeffs.entries.items():
        for j, kappa_ij in r.items():
            for a in range(d):
                for k, value in A.nonzero_product(a, i):
                    target = entries.setdefault(k * d + j, {})
                    _accumulate(target, a, kappa_ij * value)
    return FrobeniusStructure(comultiplication=from_entries(A.spec, d * d, d, entries), counit=trace_map(A))


def _swap(spec: ScalarSpec, d: int) -> Matrix:
    return from_entries(spec, d * d, d * d, {j * d + i: {i * d + j: spec.one} for i in range(d) for j in range(d)})


def _result(name: str, left: Matrix, right: Matrix, label: Optional[str] = None) -> AxiomResult:
    diff = first_difference(left, right)
    if diff is None:
        return AxiomResult(name, True)
    witness: dict[str, Any] = {"entry": list(diff)}
    if label:
        witness["identity"] = label
    return AxiomResult(name, False, witness)


def _first_failure(name: str, checks: Sequence[tuple[str, Matrix, Matrix]]) -> AxiomResult:
    for label, left, right in checks:
        result = _result(name, left, right, label)
        if not result.passed:
            return result
    return AxiomResult(name, True)


def verify_frobenius(A: FinAlgebra, F: FrobeniusStructure) -> dict[str, AxiomResult]:
    d = A.dim
    ident = identity(A.spec, d)
    mu, delta, counit = A.mu_matrix, F.comultiplication, F.counit
    delta_mu = mat_mul(delta, mu)
    form = mat_mul(counit, mu)
    return {
        "coassoc": _result("coassoc", mat_mul(kron(delta, ident), delta), mat_mul(kron(ident, delta), delta)),
        "counital": _first_failure(
            "counital",
            [
                ("left", mat_mul(kron(counit, ident), delta), ident),
                ("right", mat_mul(kron(ident, counit), delta), ident),
            ],
        ),
        "frobenius_law": _first_failure(
            "frobenius_law",
            [
                ("left", mat_mul(kron(ident, mu), kron(delta, ident)), delta_mu),
                ("right", mat_mul(kron(mu, ident), kron(ident, delta)), delta_mu),
            ],
        ),
        "special": _result("special", mat_mul(mu, delta), ident),
        "symmetric_form": _result("symmetric_form", form, mat_mul(form, _swap(A.spec, d))),
    }


def _self_duality(A: FinAlgebra, copairing: Matrix, pairing: Matrix, prefix: str) -> dict[str, AxiomResult]:
    """(1 (x) pairing)(copairing (x) 1) = id = (pairing (x) 1)(1 (x) copairing)."""
    ident = identity(A.spec, A.dim)
    left = mat_mul(kron(ident, pairing), kron(copairing, ident))
    right = mat_mul(kron(pairing, ident), kron(ident, copairing))
    return {
        f"{prefix}_left": _result(f"{prefix}_left", left, ident),
        f"{prefix}_right": _result(f"{prefix}_right", right, ident),
    }


def form_row(T: BilinearFormMatrix) -> Matrix:
    """The form as a map A (x) A -> 1, i.e. T flattened row-major."""
    d = T.dim
    return from_entries(T.spec, 1, d * d, {0: {i * d + j: v for i, r in T.entries.entries.items() for j, v in r.items()}})


def verify_self_duality(A: FinAlgebra, kappa: TensorSquareElement, T: BilinearFormMatrix) -> dict[str, AxiomResult]:
    _check_kappa(A, kappa)
    return _self_duality(A, kappa.as_column(), form_row(T), "self_dual")


def frobenius_self_duality(A: FinAlgebra, F: FrobeniusStructure) -> dict[str, AxiomResult]:
    """counit o mu and delta o u are mutually inverse pairing and copairing."""
    pairing = mat_mul(F.counit, A.mu_matrix)
    copairing = mat_mul(F.comultiplication, A.unit_column)
    return _self_duality(A, copairing, pairing, "frobenius_self_dual")


def decide_strong_separability(A: FinAlgebra) -> SeparabilityReport:
    T = trace_form(A)
    det = T.determinant()
    commutative = is_commutative(A)
    tr = trace_map(A)

    if not is_unit(A.spec, det):
        if det == A.spec.zero:
            degeneracy = Degeneracy("singular", det, kernel_vector(T.entries))
        else:
            degeneracy = Degeneracy("non_unit_determinant", det)
        logger.info("%s: Degenerate (%s, det=%s)", A.name, degeneracy.kind, format_scalar(A.spec, det))
        return SeparabilityReport(
            algebra=A,
            is_commutative=commutative,
            trace_map=tr,
            trace_form=T,
            det=det,
            verdict="Degenerate",
            degeneracy=degeneracy,
        )

    kappa = compute_kappa(A, T)
    frobenius = frobenius_structure(A, kappa)
    results: dict[str, AxiomResult] = {}
    results.update(verify_kappa_axioms(A, kappa))
    results.update(verify_sigma_axioms(A, sigma_from_kappa(A, kappa)))
    results.update(verify_self_duality(A, kappa, T))
    results.update(verify_frobenius(A, frobenius))

    failed = [name for name, result in results.items() if not result.passed]
    if failed:
        logger.warning("%s: constructed structure fails %s", A.name, ", ".join(failed))
    logger.info("%s: StronglySeparable (det=%s)", A.name, format_scalar(A.spec, det))
    return SeparabilityReport(
        algebra=A,
        is_commutative=commutative,
        trace_map=tr,
        trace_form=T,
        det=det,
        verdict="StronglySeparable",
        kappa=kappa,
        frobenius=frobenius,
        axiom_results=results,
    )


# Oracles.


def _require_field(A: FinAlgebra, operation: str) -> None:
    if not A.spec.is_field:
        raise AppError(
            code="INTEGER_SPEC_UNSUPPORTED",
            message=f"{operation} needs a field base ring.",
            details={"algebra": A.name, "scalars": A.spec.to_json()},
        )


def sigma_linear_system(A: FinAlgebra) -> LinearSystem:
    """Constraints on sigma[r][s] (unknown r*d+s) for mu o sigma = id and bimodule linearity."""
    spec, d = A.spec, A.dim
    mu = A.mu_matrix
    ident = identity(spec, d)
    constraints: list[LinearConstraint] = []

    def add(axiom: str, witness: Any, coefficients: dict[int, Scalar], rhs: Scalar) -> None:
        built = _constraint(spec, axiom, witness, coefficients, rhs)
        if built is not None:
            constraints.append(built)

    for k in range(d):
        mu_row = mu.entries.get(k, {})
        for s in range(d):
            add("sigma1", [k, s], {r * d + s: value for r, value in mu_row.items()}, spec.one if k == s else spec.zero)

    # sigma M - K sigma = 0 for each multiplication operator M on A and its extension K to A (x) A.
    operators: list[tuple[str, int, Matrix, Matrix]] = []
    for a in range(d):
        left = left_mult_matrix(A, A.basis_vector(a))
        operators.append(("left", a, left, kron(left, ident)))
        right = right_mult_matrix(A, a)
        operators.append(("right", a, right, kron(ident, right)))

    for side, a, M, K in operators:
        by_column: dict[int, dict[int, Scalar]] = {}
        for t, r in M.entries.items():
            for s, value in r.items():
                by_column.setdefault(s, {})[t] = value
        for r in range(d * d):
            K_row = K.entries.get(r, {})
            for s in range(d):
                coefficients: dict[int, Scalar] = {}
                for t, value in by_column.get(s, {}).items():
                    _accumulate(coefficients, r * d + t, value)
                for t, value in K_row.items():
                    _accumulate(coefficients, t * d + s, -value)
                add("sigma2", {"side": side, "basis": a, "entry": [r, s]}, coefficients, spec.zero)

    logger.debug("sigma system for %s: %d constraints in %d unknowns", A.name, len(constraints), d ** 3)
    return LinearSystem(spec, d ** 3, tuple(constraints))


def oracle_sigma_exists(A: FinAlgebra) -> bool:
    """Whether mu admits a bimodule section, decided by solving for sigma directly."""
    _require_field(A, "oracle_sigma_exists")
    exists = not sigma_linear_system(A).solve().is_empty
    logger.info("%s: bimodule section %s", A.name, "exists" if exists else "does not exist")
    return exists


def oracle_symmetric_kappa_unique(A: FinAlgebra) -> SolutionSet:
    """All kappa satisfying k1, k2 and k3."""
    _require_field(A, "oracle_symmetric_kappa_unique")
    return kappa_linear_system(A, ("k1", "k2", "k3")).solve()


def solution_to_kappa(A: FinAlgebra, point: Sequence[Scalar]) -> TensorSquareElement:
    d = A.dim
    return TensorSquareElement(
        from_entries(A.spec, d, d, {i: {j: point[i * d + j] for j in range(d)} for i in range(d)})
    )


def enumerate_kappa_candidates(
    A: FinAlgebra, axioms: Iterable[str] = ("k1", "k2", "k3"), limit: Optional[int] = None
) -> list[TensorSquareElement]:
    """Every kappa in A (x) A satisfying the axioms, found by exhaustive search over a finite field."""
    if not A.spec.is_finite:
        raise AppError(
            code="INTEGER_SPEC_UNSUPPORTED" if not A.spec.is_field else "INVALID_ARGUMENT",
            message="Exhaustive search needs a finite field.",
            details={"algebra": A.name, "scalars": A.spec.to_json()},
        )
    cap = config.ENUMERATION_LIMIT if limit is None else limit
    total = (A.spec.p or 0) ** (A.dim * A.dim)
    if total > cap:
        raise AppError(
            code="ENUMERATION_TOO_LARGE",
            message="Tensor square is larger than the enumeration limit.",
            details={"points": total, "limit": cap},
        )
    system = kappa_linear_system(A, axioms)
    found = [
        solution_to_kappa(A, point)
        for point in itertools.product(A.spec.elements(), repeat=A.dim * A.dim)
        if system.violation(point) is None
    ]
    logger.debug("%s: %d of %d candidates satisfy %s", A.name, len(found), total, ",".join(axioms))
    return found


def alternate_axioms_hold(A: FinAlgebra, *, exhaustive: bool = False) -> AxiomResult:
    """Every kappa satisfying k2 and k4 also satisfies k1 and k3.

    The default check is exact over any field: the solution set is p + span(K), so
    the consequences hold everywhere iff they hold at p and, homogeneously, on K.
    ``exhaustive=True`` instead visits every point over a finite field.
    """
    _require_field(A, "alternate_axioms_hold")
    consequences = kappa_linear_system(A, ("k1", "k3"))
    if exhaustive:
        for kappa in enumerate_kappa_candidates(A, ("k2", "k4")):
            failed = consequences.violation(_flatten(kappa))
            if failed is not None:
                return AxiomResult("alternate_axioms", False, {"axiom": failed.axiom, "kappa": kappa.to_strings()})
        return AxiomResult("alternate_axioms", True)

    solution = kappa_linear_system(A, ("k2", "k4")).solve()
    if solution.is_empty:
        return AxiomResult("alternate_axioms", True)
    failed = consequences.violation(solution.particular or ())
    if failed is None:
        for vector in solution.kernel:
            failed = consequences.violation(vector, homogeneous=True)
            if failed is not None:
                break
    if failed is not None:
        return AxiomResult("alternate_axioms", False, {"axiom": failed.axiom, "witness": failed.witness})
    return AxiomResult("alternate_axioms", True)
