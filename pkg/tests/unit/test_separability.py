import pytest

from app.algebra import (
    TensorSquareElement,
    base_algebra,
    cyclic_group_algebra,
    dual_numbers,
    make_matrix_algebra,
    make_upper_triangular_algebra,
    product_algebra,
    trace_form,
)
from app.models import AppError, SeparabilityReportPayload
from app.scalars import enumerate_solutions, format_scalar, from_entries, identity, integers, matrix_from_rows, prime_field, rationals
from app.separability import (
    FrobeniusStructure,
    alternate_axioms_hold,
    compute_kappa,
    decide_strong_separability,
    enumerate_kappa_candidates,
    frobenius_self_duality,
    frobenius_structure,
    kappa_linear_system,
    oracle_sigma_exists,
    oracle_symmetric_kappa_unique,
    sigma_from_kappa,
    verify_frobenius,
    verify_kappa_axioms,
    verify_self_duality,
    verify_sigma_axioms,
)


Q = rationals()
Z = integers()
F2 = prime_field(2)
F3 = prime_field(3)


def _kappa(spec, rows):
    return TensorSquareElement(matrix_from_rows(spec, rows))


def test_decide_positive_on_rational_c3():
    report = decide_strong_separability(cyclic_group_algebra(Q, 3))
    assert report.verdict == "StronglySeparable"
    assert format_scalar(Q, report.det) == "-27"
    assert report.kappa is not None and report.frobenius is not None
    assert report.all_axioms_pass
    assert set(report.axiom_results) >= {"k1", "k2", "k3", "k4", "sigma1", "sigma2", "coassoc", "special"}


def test_decide_degenerate_mod_three():
    report = decide_strong_separability(cyclic_group_algebra(F3, 3))
    assert report.verdict == "Degenerate"
    assert report.kappa is None and report.frobenius is None
    assert report.degeneracy.kind == "singular"
    assert report.trace_form.entries.is_zero()


def test_decide_dual_numbers_reports_kernel_vector():
    report = decide_strong_separability(dual_numbers(Q))
    assert report.verdict == "Degenerate"
    assert [format_scalar(Q, x) for x in report.degeneracy.kernel_vector] == ["0", "1"]


def test_integer_base_ring():
    z_x_z = decide_strong_separability(product_algebra(base_algebra(Z), base_algebra(Z)))
    assert z_x_z.verdict == "StronglySeparable"
    assert z_x_z.trace_form.entries == identity(Z, 2)
    assert z_x_z.kappa.to_strings() == [["1", "0"], ["0", "1"]]
    assert z_x_z.all_axioms_pass

    z_c2 = decide_strong_separability(cyclic_group_algebra(Z, 2))
    assert z_c2.verdict == "Degenerate"
    assert z_c2.degeneracy.kind == "non_unit_determinant"
    assert format_scalar(Z, z_c2.degeneracy.det) == "4"
    assert z_c2.degeneracy.kernel_vector is None


def test_compute_kappa_examples():
    c2 = cyclic_group_algebra(Q, 2)
    assert compute_kappa(c2, trace_form(c2)).to_strings() == [["1/2", "0"], ["0", "1/2"]]

    m2 = make_matrix_algebra(Q, 2)
    kappa = compute_kappa(m2, trace_form(m2))
    for a in range(4):
        for b in range(4):
            i, j = divmod(a, 2)
            k, l = divmod(b, 2)
            expected = "1/2" if j == k and i == l else "0"
            assert format_scalar(Q, kappa.coefficient(a, b)) == expected
    assert kappa.is_symmetric()


def test_compute_kappa_needs_invertible_form():
    A = dual_numbers(Q)
    with pytest.raises(AppError) as exc:
        compute_kappa(A, trace_form(A))
    assert exc.value.code == "NOT_INVERTIBLE"


def test_kappa_axioms_pass_on_computed_kappa():
    A = cyclic_group_algebra(Q, 3)
    results = verify_kappa_axioms(A, compute_kappa(A, trace_form(A)))
    assert all(result.passed for result in results.values())


def test_kappa_axioms_detect_wrong_candidates():
    c2 = cyclic_group_algebra(Q, 2)
    # mu(e(x)e + g(x)g) = 2e
    results = verify_kappa_axioms(c2, _kappa(Q, [[1, 0], [0, 1]]))
    assert not results["k1"].passed
    assert results["k1"].witness == 0

    results = verify_kappa_axioms(c2, _kappa(Q, [[0, 1], [0, 0]]))
    assert not results["k3"].passed
    assert results["k3"].witness == [0, 1]


def test_kappa_axioms_check_dimensions():
    with pytest.raises(AppError) as exc:
        verify_kappa_axioms(cyclic_group_algebra(Q, 3), _kappa(Q, [[1, 0], [0, 1]]))
    assert exc.value.code == "DIMENSION_MISMATCH"


def test_sigma_from_kappa():
    c2 = cyclic_group_algebra(Q, 2)
    kappa = compute_kappa(c2, trace_form(c2))
    sigma = sigma_from_kappa(c2, kappa)
    assert sigma.shape == (4, 2)
    assert sigma @ c2.unit_column == kappa.as_column()
    assert all(result.passed for result in verify_sigma_axioms(c2, sigma).values())


def test_sigma_section_fails_on_dual_numbers():
    A = dual_numbers(Q)
    sigma = sigma_from_kappa(A, _kappa(Q, [[0, 1], [1, 0]]))
    results = verify_sigma_axioms(A, sigma)
    assert not results["sigma1"].passed
    assert oracle_sigma_exists(A) is False


def test_frobenius_structure_examples():
    c2 = cyclic_group_algebra(Q, 2)
    kappa = compute_kappa(c2, trace_form(c2))
    F = frobenius_structure(c2, kappa)
    assert F.coproduct_of(0) == kappa
    assert F.coproduct_of(1).to_strings() == [["0", "1/2"], ["1/2", "0"]]
    assert F.counit.to_strings() == [["2", "0"]]
    assert F.comultiplication @ c2.unit_column == kappa.as_column()

    z_x_z = product_algebra(base_algebra(Z), base_algebra(Z))
    F = frobenius_structure(z_x_z, compute_kappa(z_x_z, trace_form(z_x_z)))
    assert F.coproduct_of(0).to_strings() == [["1", "0"], ["0", "0"]]


@pytest.mark.parametrize("A", [cyclic_group_algebra(Q, 3), make_matrix_algebra(Q, 2)], ids=lambda A: A.name)
def test_frobenius_laws_hold(A):
    F = frobenius_structure(A, compute_kappa(A, trace_form(A)))
    results = verify_frobenius(A, F)
    assert set(results) == {"coassoc", "counital", "frobenius_law", "special", "symmetric_form"}
    assert all(result.passed for result in results.values())
    assert all(result.passed for result in frobenius_self_duality(A, F).values())


def test_perturbed_comultiplication_breaks_frobenius_law():
    c2 = cyclic_group_algebra(Q, 2)
    F = frobenius_structure(c2, compute_kappa(c2, trace_form(c2)))
    bump = from_entries(Q, 4, 2, {0: {1: Q.one}})
    perturbed = FrobeniusStructure(F.comultiplication + bump, F.counit)
    results = verify_frobenius(c2, perturbed)
    assert not results["frobenius_law"].passed
    assert results["frobenius_law"].witness["entry"]


def test_self_duality_pair():
    A = make_matrix_algebra(Q, 2)
    T = trace_form(A)
    results = verify_self_duality(A, compute_kappa(A, T), T)
    assert results["self_dual_left"].passed and results["self_dual_right"].passed


def test_oracle_sigma_exists_examples():
    assert oracle_sigma_exists(cyclic_group_algebra(F2, 2)) is False
    assert oracle_sigma_exists(cyclic_group_algebra(F3, 2)) is True


def test_oracles_refuse_integers():
    A = cyclic_group_algebra(Z, 2)
    for oracle in (oracle_sigma_exists, oracle_symmetric_kappa_unique):
        with pytest.raises(AppError) as exc:
            oracle(A)
        assert exc.value.code == "INTEGER_SPEC_UNSUPPORTED"


def test_symmetric_kappa_is_unique():
    A = product_algebra(base_algebra(F3), base_algebra(F3))
    solution = oracle_symmetric_kappa_unique(A)
    assert solution.kind == "unique"
    assert [format_scalar(F3, x) for x in solution.particular] == ["1", "0", "0", "1"]

    c2 = cyclic_group_algebra(Q, 2)
    solution = oracle_symmetric_kappa_unique(c2)
    assert solution.kind == "unique"
    assert [format_scalar(Q, x) for x in solution.particular] == ["1/2", "0", "0", "1/2"]

    assert oracle_symmetric_kappa_unique(dual_numbers(Q)).is_empty


def test_exhaustive_enumeration_agrees_with_solver():
    A = product_algebra(base_algebra(F3), base_algebra(F3))
    candidates = enumerate_kappa_candidates(A)
    assert len(candidates) == 1
    assert candidates[0].coeffs == identity(F3, 2)

    assert enumerate_kappa_candidates(cyclic_group_algebra(F2, 2)) == []


def test_enumeration_limit():
    with pytest.raises(AppError) as exc:
        enumerate_kappa_candidates(cyclic_group_algebra(F3, 3), limit=100)
    assert exc.value.code == "ENUMERATION_TOO_LARGE"


def test_kappa_linear_system_rejects_unknown_axiom():
    with pytest.raises(AppError) as exc:
        kappa_linear_system(cyclic_group_algebra(Q, 2), ("k5",))
    assert exc.value.code == "INVALID_ARGUMENT"


@pytest.mark.parametrize(
    "A",
    [
        cyclic_group_algebra(F2, 2),
        cyclic_group_algebra(F3, 2),
        dual_numbers(F3),
        make_upper_triangular_algebra(F2, 2),
        cyclic_group_algebra(Q, 3),
    ],
    ids=lambda A: A.name,
)
def test_alternate_axioms_imply_symmetry_and_unit(A):
    assert alternate_axioms_hold(A).passed


def test_alternate_axioms_exhaustively_over_small_field():
    A = cyclic_group_algebra(F3, 2)
    assert alternate_axioms_hold(A, exhaustive=True).passed
    solution = kappa_linear_system(A, ("k2", "k4")).solve()
    assert len(list(enumerate_solutions(solution))) == len(enumerate_kappa_candidates(A, ("k2", "k4")))


def test_report_payload_round_trips():
    report = decide_strong_separability(make_matrix_algebra(Q, 2))
    payload = report.to_payload()
    again = SeparabilityReportPayload.model_validate_json(payload.model_dump_json())
    assert again == payload
    assert again.verdict == "StronglySeparable"
    assert again.is_commutative is False
    assert len(again.frobenius.comultiplication) == 4


def test_degenerate_payload_has_no_structure():
    payload = decide_strong_separability(dual_numbers(Q)).to_payload()
    assert payload.kappa is None
    assert payload.frobenius is None
    assert payload.degeneracy.kernel_vector == ["0", "1"]
