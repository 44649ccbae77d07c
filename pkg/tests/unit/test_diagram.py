import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from app.algebra import cyclic_group_algebra, dual_numbers, make_matrix_algebra, trace_form, trace_map
from app.diagram import (
    Compose,
    DiagramExtras,
    Generator,
    Identity,
    Tensor,
    WireType,
    builtin_corpus,
    check_corpus,
    check_equation,
    evaluate,
    extended_corpus,
    extras_for,
    load_corpus_file,
    make_entry,
    parse_corpus_text,
    parse_term,
    render_term,
)
from app.models import AppError
from app.scalars import identity, kron, mat_mul, matrix_from_rows, prime_field, rationals
from app.separability import decide_strong_separability, form_row


Q = rationals()
A_, D_ = WireType.A, WireType.D


def _extras(A):
    return extras_for(decide_strong_separability(A))


def test_parse_two_generator_composite():
    term = parse_term("mu o kappa")
    assert isinstance(term, Compose)
    assert term.domain == ()
    assert term.codomain == (A_,)
    assert term.f == Generator("kappa", (), (A_, A_))


def test_parse_k2_left_side():
    term = parse_term("(idA * mu) o (kappa * idA)")
    assert term.domain == (A_,)
    assert term.codomain == (A_, A_)


def test_wire_mismatch_is_a_type_error():
    with pytest.raises(AppError) as exc:
        parse_term("mu o eta")
    assert exc.value.code == "WIRE_TYPE_ERROR"
    assert exc.value.details["expected"] == ["A", "A"]
    assert exc.value.details["actual"] == ["D", "A"]


def test_tensor_binds_tighter_and_both_associate_left():
    assert parse_term("mu o idA * idA") == parse_term("mu o (idA * idA)")
    assert parse_term("tr o mu o mu * idA") == parse_term("(tr o mu) o (mu * idA)")
    assert parse_term("idA * idA * idD") == Tensor(Tensor(Identity((A_,)), Identity((A_,))), Identity((D_,)))


def test_identity_spellings_agree():
    assert parse_term("idA") == parse_term("id[A]")
    assert parse_term("id[A,D]").domain == (A_, D_)
    assert parse_term("tau[D,A]").codomain == (A_, D_)


@pytest.mark.parametrize(
    "text,code",
    [
        ("mu o", "PARSE_ERROR"),
        ("mu )", "PARSE_ERROR"),
        ("", "PARSE_ERROR"),
        ("tau", "PARSE_ERROR"),
        ("tau[A]", "PARSE_ERROR"),
        ("tau[A,X]", "PARSE_ERROR"),
        ("mu[A]", "PARSE_ERROR"),
        ("nu o kappa", "UNKNOWN_GENERATOR"),
        ("idA o idD", "WIRE_TYPE_ERROR"),
    ],
)
def test_parse_errors(text, code):
    with pytest.raises(AppError) as exc:
        parse_term(text)
    assert exc.value.code == code


def test_parse_error_reports_position():
    with pytest.raises(AppError) as exc:
        parse_term("mu o ) kappa")
    assert exc.value.details["line"] == 1
    assert exc.value.details["column"] == 6


def test_render_round_trips_corpus():
    for entry in extended_corpus():
        assert parse_term(render_term(entry.lhs)) == entry.lhs
        assert parse_term(render_term(entry.rhs)) == entry.rhs


_leaves = st.sampled_from(["mu", "u", "eta", "eps", "kappa", "tr", "t", "delta", "theta", "idA", "idD", "tau[A,D]"])


def _terms():
    return st.recursive(
        _leaves.map(parse_term),
        lambda inner: st.tuples(inner, inner).map(lambda pair: Tensor(*pair)),
        max_leaves=6,
    )


@settings(deadline=None, max_examples=80)
@given(_terms())
def test_render_round_trips_random_tensors(term):
    wrapped = Compose(term, Identity(term.codomain)) if term.codomain else term
    assert parse_term(render_term(wrapped)) == wrapped


def test_snake_identities_evaluate_to_identity():
    for A in (cyclic_group_algebra(Q, 3), make_matrix_algebra(Q, 2), dual_numbers(prime_field(2))):
        assert evaluate(parse_term("(eps * idA) o (idA * eta)"), A) == identity(A.spec, A.dim)
        assert evaluate(parse_term("(idD * eps) o (eta * idD)"), A) == identity(A.spec, A.dim)


def test_trace_form_as_composite():
    c2 = cyclic_group_algebra(Q, 2)
    assert evaluate(parse_term("counit o mu"), c2).to_strings() == [["2", "0", "0", "2"]]
    assert evaluate(parse_term("counit o mu"), c2) == form_row(trace_form(c2))
    assert evaluate(parse_term("tr"), c2) == trace_map(c2)


def test_specialness_on_rational_c3():
    A = cyclic_group_algebra(Q, 3)
    assert evaluate(parse_term("mu o delta"), A, _extras(A)) == identity(Q, 3)


def test_theta_evaluates_to_trace_form():
    A = make_matrix_algebra(Q, 2)
    T = trace_form(A).entries
    assert evaluate(parse_term("theta"), A) == T
    assert mat_mul(evaluate(parse_term("theta_inv"), A), T) == identity(Q, 4)


def test_theta_inverse_on_degenerate_algebra():
    with pytest.raises(AppError) as exc:
        evaluate(parse_term("theta_inv"), dual_numbers(Q))
    assert exc.value.code == "NOT_INVERTIBLE"


def test_evaluator_is_functorial():
    A = make_matrix_algebra(Q, 2)
    extras = _extras(A)
    f, g = parse_term("delta"), parse_term("mu * idA")
    left = parse_term("mu o tau[A,A]")
    assert evaluate(Tensor(f, left), A, extras) == kron(evaluate(f, A, extras), evaluate(left, A))
    inner = parse_term("idA * delta")
    assert evaluate(parse_term("(mu * idA) o (idA * delta)"), A, extras) == mat_mul(
        evaluate(g, A), evaluate(inner, A, extras)
    )


def test_missing_extra():
    with pytest.raises(AppError) as exc:
        evaluate(parse_term("mu o kappa"), cyclic_group_algebra(Q, 2))
    assert exc.value.code == "MISSING_EXTRA"
    assert exc.value.details["extra"] == "kappa"


def test_check_equation_passes_and_fails():
    m2 = make_matrix_algebra(Q, 2)
    corpus = {entry.name: entry for entry in builtin_corpus()}
    assert check_equation(corpus["trace_symmetric"], m2).status == "pass"

    c3 = cyclic_group_algebra(Q, 3)
    assert check_equation(corpus["k2"], c3, _extras(c3)).status == "pass"

    commutes = make_entry("mu_commutes", parse_term("mu"), parse_term("mu o tau[A,A]"))
    result = check_equation(commutes, m2)
    assert result.status == "fail"
    # e12 e21 = e11 but e21 e12 = e22
    assert result.witness == {"entry": [0, 6], "lhs": "1", "rhs": "0"}


def test_negative_control_wrong_kappa_fails_k1():
    c2 = cyclic_group_algebra(Q, 2)
    k1 = builtin_corpus()[0]
    wrong = DiagramExtras(kappa=matrix_from_rows(Q, [[1], [0], [0], [1]]))
    result = check_equation(k1, c2, wrong)
    assert result.status == "fail"
    assert result.witness == {"entry": [0, 0], "lhs": "2", "rhs": "1"}


@pytest.mark.parametrize(
    "index,witness",
    [
        # e (x) g is not central: e (x) g.g = e (x) e but g.e (x) g = g (x) g
        (1, {"entry": [0, 1], "lhs": "1", "rhs": "0"}),
        (2, {"entry": [1, 0], "lhs": "1", "rhs": "0"}),
        (3, {"entry": [0, 0], "lhs": "0", "rhs": "1"}),
    ],
    ids=["k2", "k3", "k4"],
)
def test_negative_control_non_symmetric_kappa(index, witness):
    c2 = cyclic_group_algebra(Q, 2)
    entry = builtin_corpus()[index]
    e_tensor_g = DiagramExtras(kappa=matrix_from_rows(Q, [[0], [1], [0], [0]]))
    result = check_equation(entry, c2, e_tensor_g)
    assert result.status == "fail"
    assert result.witness == witness


def test_builtin_corpus_shape():
    corpus = builtin_corpus()
    assert len(corpus) == 16
    assert [entry.name for entry in corpus][:4] == ["k1", "k2", "k3", "k4"]
    separable = {entry.name for entry in corpus if entry.requires_separable}
    assert {"trace_symmetric", "invariance", "theta_is_tstar"}.isdisjoint(separable)
    assert {"k1", "self_dual_1", "composite_identity", "coassoc", "special"} <= separable
    for entry in corpus:
        assert entry.lhs.domain == entry.rhs.domain
        assert entry.lhs.codomain == entry.rhs.codomain
        assert entry.anchor


def test_all_separable_entries_pass_on_rational_c2():
    c2 = cyclic_group_algebra(Q, 2)
    results = check_corpus(builtin_corpus(), c2, _extras(c2))
    assert [r.name for r in results if r.status != "pass"] == []


def test_extended_corpus_passes_on_matrix_algebra():
    m2 = make_matrix_algebra(Q, 2)
    results = check_corpus(extended_corpus(), m2, _extras(m2))
    assert all(result.status == "pass" for result in results)


def test_degenerate_algebra_skips_separable_entries():
    A = dual_numbers(Q)
    assert extras_for(decide_strong_separability(A)) is None
    results = {r.name: r.status for r in check_corpus(extended_corpus(), A, None)}
    assert results["k1"] == "skipped"
    assert results["kdef"] == "skipped"
    assert results["trace_symmetric"] == "pass"
    assert results["snake_1"] == "pass"
    assert results["trace_map_composite"] == "pass"


def test_corpus_text_format():
    text = "\n".join(
        [
            "# user corpus",
            "",
            "sym : t == t o tau[A,A]  # symmetry",
            "unit_law: mu o (u * idA) == idA",
        ]
    )
    entries = parse_corpus_text(text)
    assert [entry.name for entry in entries] == ["sym", "unit_law"]
    assert entries[0].anchor == "symmetry"
    assert entries[1].anchor == ""


@pytest.mark.parametrize(
    "text,line",
    [
        ("a : mu o kappa == u\nb : mu o == u", 2),
        ("a : mu == u", 1),
        ("a : mu o kappa", 1),
        ("a : u == u\na : u == u", 2),
    ],
)
def test_corpus_text_errors_carry_line(text, line):
    with pytest.raises(AppError) as exc:
        parse_corpus_text(text)
    assert exc.value.details["line"] == line


def test_corpus_side_error_column_is_offset_into_line():
    with pytest.raises(AppError) as exc:
        parse_corpus_text("bad : mu == nu")
    assert exc.value.code == "UNKNOWN_GENERATOR"
    assert exc.value.details["column"] == 13


def test_load_corpus_file(tmp_path):
    path = tmp_path / "mine.corpus"
    path.write_text("special_again : mu o delta == idA  # specialness\n", encoding="utf-8")
    entries = load_corpus_file(path)
    assert entries[0].requires_separable

    with pytest.raises(AppError) as exc:
        load_corpus_file(tmp_path / "missing.corpus")
    assert exc.value.code == "FILE_NOT_FOUND"


def test_entry_payload():
    payload = builtin_corpus()[1].to_payload()
    assert payload.lhs == "idA * mu o kappa * idA"
    assert payload.domain == ["A"]
    assert payload.codomain == ["A", "A"]
