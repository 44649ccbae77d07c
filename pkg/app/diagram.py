"""Typed string-diagram terms: grammar, type checking, and evaluation to exact matrices.

Concrete syntax::

    g o f        composite, apply f first
    f * g        tensor product (binds tighter than ``o``; both left-associative)
    idA idD      identities; id[A,D,...] for a list of wires
    tau[X,Y]     swap of two adjacent wires, annotation required

Wires are ``A`` (the algebra) and ``D`` (its dual, with the dual basis).
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from pathlib import Path
from typing import Literal, Optional, Union

from lark import Lark, Token, Transformer, v_args
from lark.exceptions import UnexpectedEOF, UnexpectedInput, VisitError

from app.algebra import BilinearFormMatrix, FinAlgebra, trace_form, trace_map
from app.models import AppError, CorpusEntryPayload, EquationResultPayload
from app.scalars import Matrix, first_difference, format_scalar, from_entries, identity, kron, mat_mul, try_invert
from app.separability import SeparabilityReport, form_row


logger = logging.getLogger(__name__)


class WireType(str, Enum):
    A = "A"
    D = "D"


Wires = tuple[WireType, ...]

_A, _D = WireType.A, WireType.D

# name -> (domain, codomain); tau is typed from its annotation.
SIGNATURES: dict[str, tuple[Wires, Wires]] = {
    "mu": ((_A, _A), (_A,)),
    "u": ((), (_A,)),
    "eta": ((), (_D, _A)),
    "eps": ((_A, _D), ()),
    "kappa": ((), (_A, _A)),
    "tr": ((_A,), ()),
    "t": ((_A, _A), ()),
    "delta": ((_A,), (_A, _A)),
    "counit": ((_A,), ()),
    "theta": ((_A,), (_D,)),
    "theta_inv": ((_D,), (_A,)),
}

# Generators whose value only exists for a strongly separable algebra.
SEPARABLE_GENERATORS = frozenset({"kappa", "delta", "theta_inv"})


@dataclass(frozen=True)
class Generator:
    name: str
    domain: Wires
    codomain: Wires
    column: Optional[int] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Identity:
    wires: Wires
    column: Optional[int] = field(default=None, compare=False, repr=False)

    @property
    def domain(self) -> Wires:
        return self.wires

    @property
    def codomain(self) -> Wires:
        return self.wires


@dataclass(frozen=True)
class Compose:
    """g o f: apply f, then g."""

    f: "Term"
    g: "Term"
    column: Optional[int] = field(default=None, compare=False, repr=False)

    @property
    def domain(self) -> Wires:
        return self.f.domain

    @property
    def codomain(self) -> Wires:
        return self.g.codomain


@dataclass(frozen=True)
class Tensor:
    left: "Term"
    right: "Term"
    column: Optional[int] = field(default=None, compare=False, repr=False)

    @property
    def domain(self) -> Wires:
        return self.left.domain + self.right.domain

    @property
    def codomain(self) -> Wires:
        return self.left.codomain + self.right.codomain


Term = Union[Generator, Identity, Compose, Tensor]


def _wire_names(wires: Wires) -> list[str]:
    return [wire.value for wire in wires]


def compose(f: Term, g: Term, column: Optional[int] = None) -> Compose:
    """Type-checked g o f."""
    if f.codomain != g.domain:
        raise AppError(
            code="WIRE_TYPE_ERROR",
            message="Composite does not type-check: codomain of the first map differs from domain of the second.",
            details={"expected": _wire_names(g.domain), "actual": _wire_names(f.codomain), "column": column},
        )
    return Compose(f, g, column)


def generator(name: str, wires: Optional[Wires] = None, column: Optional[int] = None) -> Term:
    if name in ("idA", "idD"):
        if wires is not None:
            raise _annotation_error(name, column)
        return Identity((WireType(name[-1]),), column)
    if name == "id":
        if not wires:
            raise AppError(
                code="PARSE_ERROR",
                message="'id' needs a wire list such as id[A,D].",
                details={"line": 1, "column": column},
            )
        return Identity(wires, column)
    if name == "tau":
        if wires is None or len(wires) != 2:
            raise AppError(
                code="PARSE_ERROR",
                message="'tau' needs exactly two annotated wires, e.g. tau[A,A].",
                details={"line": 1, "column": column},
            )
        x, y = wires
        return Generator("tau", (x, y), (y, x), column)
    if name not in SIGNATURES:
        raise AppError(
            code="UNKNOWN_GENERATOR",
            message=f"Unknown generator '{name}'.",
            details={"name": name, "column": column, "known": sorted([*SIGNATURES, "idA", "idD", "id", "tau"])},
        )
    if wires is not None:
        raise _annotation_error(name, column)
    domain, codomain = SIGNATURES[name]
    return Generator(name, domain, codomain, column)


def _annotation_error(name: str, column: Optional[int]) -> AppError:
    return AppError(
        code="PARSE_ERROR",
        message=f"Generator '{name}' takes no wire annotation.",
        details={"line": 1, "column": column},
    )


# Parsing.

TERM_GRAMMAR = r"""
    ?start: term

    ?term: term "o" tensor -> compose
         | tensor

    ?tensor: tensor "*" atom -> tensor_product
           | atom

    ?atom: "(" term ")"
         | NAME wire_list? -> generator

    wire_list: "[" NAME ("," NAME)* "]"

    NAME: /[A-Za-z_][A-Za-z0-9_]*/

    %import common.WS
    %ignore WS
"""

term_parser = Lark(TERM_GRAMMAR, parser="lalr", propagate_positions=True)


class TermBuilder(Transformer):
    """Builds type-checked terms bottom-up from the parse tree."""

    def wire_list(self, names: list[Token]) -> Wires:
        wires = []
        for name in names:
            if name.value not in ("A", "D"):
                raise AppError(
                    code="PARSE_ERROR",
                    message=f"Unknown wire type '{name.value}'; expected A or D.",
                    details={"line": name.line, "column": name.column},
                )
            wires.append(WireType(name.value))
        return tuple(wires)

    def generator(self, children: list) -> Term:
        token = children[0]
        wires = children[1] if len(children) > 1 else None
        return generator(token.value, wires, token.column)

    @v_args(meta=True)
    def compose(self, meta, children: list) -> Term:
        g, f = children
        return compose(f, g, None if meta.empty else meta.column)

    @v_args(meta=True)
    def tensor_product(self, meta, children: list) -> Term:
        left, right = children
        return Tensor(left, right, None if meta.empty else meta.column)


def parse_term(text: str) -> Term:
    try:
        tree = term_parser.parse(text)
    except UnexpectedEOF as exc:
        raise AppError(
            code="PARSE_ERROR",
            message="Unexpected end of term.",
            details={"line": 1, "column": len(text) + 1, "expected": sorted(exc.expected)},
        ) from exc
    except UnexpectedInput as exc:
        raise AppError(
            code="PARSE_ERROR",
            message="Term does not match the diagram grammar.",
            details={"line": exc.line, "column": exc.column},
        ) from exc
    try:
        return TermBuilder().transform(tree)
    except VisitError as exc:
        if isinstance(exc.orig_exc, AppError):
            raise exc.orig_exc from None
        raise


def _render(term: Term, level: int) -> str:
    # level: 0 composite position, 1 tensor position, 2 atom position.
    if isinstance(term, Identity):
        if len(term.wires) == 1:
            return f"id{term.wires[0].value}"
        return f"id[{','.join(_wire_names(term.wires))}]"
    if isinstance(term, Generator):
        if term.name == "tau":
            return f"tau[{','.join(_wire_names(term.domain))}]"
        return term.name
    if isinstance(term, Tensor):
        text = f"{_render(term.left, 1)} * {_render(term.right, 2)}"
        return text if level <= 1 else f"({text})"
    text = f"{_render(term.g, 0)} o {_render(term.f, 1)}"
    return text if level == 0 else f"({text})"


def render_term(term: Term) -> str:
    """Concrete syntax for a term; parse_term(render_term(t)) == t."""
    return _render(term, 0)


def generators_of(term: Term) -> set[str]:
    if isinstance(term, Identity):
        return set()
    if isinstance(term, Generator):
        return {term.name}
    if isinstance(term, Tensor):
        return generators_of(term.left) | generators_of(term.right)
    return generators_of(term.f) | generators_of(term.g)


# Evaluation.


@dataclass(frozen=True)
class DiagramExtras:
    """Values of the generators that exist only for strongly separable algebras."""

    kappa: Optional[Matrix] = None
    delta: Optional[Matrix] = None
    counit: Optional[Matrix] = None


def extras_for(report: SeparabilityReport) -> Optional[DiagramExtras]:
    if not report.is_strongly_separable or report.kappa is None or report.frobenius is None:
        return None
    return DiagramExtras(
        kappa=report.kappa.as_column(),
        delta=report.frobenius.comultiplication,
        counit=report.frobenius.counit,
    )


class Evaluator:
    """Evaluates terms for one algebra; generator matrices are computed once."""

    def __init__(self, algebra: FinAlgebra, extras: Optional[DiagramExtras] = None):
        self.algebra = algebra
        self.extras = extras or DiagramExtras()

    @property
    def d(self) -> int:
        return self.algebra.dim

    @cached_property
    def _trace_form(self) -> BilinearFormMatrix:
        return trace_form(self.algebra)

    @property
    def _form(self) -> Matrix:
        return self._trace_form.entries

    @cached_property
    def _swap(self) -> Matrix:
        d, spec = self.d, self.algebra.spec
        return from_entries(spec, d * d, d * d, {j * d + i: {i * d + j: spec.one} for i in range(d) for j in range(d)})

    @cached_property
    def _pairing_diagonal(self) -> dict[int, object]:
        d = self.d
        return {i * d + i: self.algebra.spec.one for i in range(d)}

    def _size(self, wires: Wires) -> int:
        return self.d ** len(wires)

    def _extra(self, name: Literal["kappa", "delta"]) -> Matrix:
        value = getattr(self.extras, name)
        if value is None:
            raise AppError(
                code="MISSING_EXTRA",
                message=f"Generator '{name}' needs a value; the algebra has no computed {name}.",
                details={"extra": name, "algebra": self.algebra.name},
            )
        return value

    def generator_matrix(self, term: Generator) -> Matrix:
        A, spec, d = self.algebra, self.algebra.spec, self.d
        name = term.name
        if name == "mu":
            return A.mu_matrix
        if name == "u":
            return A.unit_column
        if name == "tau":
            return self._swap
        if name == "eta":
            return from_entries(spec, d * d, 1, {index: {0: one} for index, one in self._pairing_diagonal.items()})
        if name == "eps":
            return from_entries(spec, 1, d * d, {0: dict(self._pairing_diagonal)})
        if name in ("kappa", "delta"):
            return self._extra(name)
        if name == "tr":
            return trace_map(A)
        if name == "counit":
            return self.extras.counit if self.extras.counit is not None else trace_map(A)
        if name == "t":
            return form_row(self._trace_form)
        if name == "theta":
            return self._form
        if name == "theta_inv":
            return try_invert(self._form)
        raise AppError(code="UNKNOWN_GENERATOR", message=f"Unknown generator '{name}'.", details={"name": name})

    def evaluate(self, term: Term) -> Matrix:
        if isinstance(term, Identity):
            return identity(self.algebra.spec, self._size(term.wires))
        if isinstance(term, Generator):
            return self.generator_matrix(term)
        if isinstance(term, Tensor):
            return kron(self.evaluate(term.left), self.evaluate(term.right))
        return mat_mul(self.evaluate(term.g), self.evaluate(term.f))


def evaluate(term: Term, algebra: FinAlgebra, extras: Optional[DiagramExtras] = None) -> Matrix:
    """Matrix of size d^len(codomain) x d^len(domain) in the row-major tensor ordering."""
    return Evaluator(algebra, extras).evaluate(term)


# Equations and corpora.


@dataclass(frozen=True)
class EquationCorpusEntry:
    name: str
    lhs: Term
    rhs: Term
    anchor: str = ""

    @property
    def requires_separable(self) -> bool:
        return bool((generators_of(self.lhs) | generators_of(self.rhs)) & SEPARABLE_GENERATORS)

    def to_payload(self) -> CorpusEntryPayload:
        return CorpusEntryPayload(
            name=self.name,
            lhs=render_term(self.lhs),
            rhs=render_term(self.rhs),
            anchor=self.anchor,
            requires_separable=self.requires_separable,
            domain=_wire_names(self.lhs.domain),
            codomain=_wire_names(self.lhs.codomain),
        )


@dataclass(frozen=True)
class EquationResult:
    name: str
    status: Literal["pass", "fail", "skipped"]
    anchor: str = ""
    witness: Optional[dict] = None

    @property
    def passed(self) -> bool:
        return self.status == "pass"

    def to_payload(self) -> EquationResultPayload:
        return EquationResultPayload(name=self.name, status=self.status, anchor=self.anchor, witness=self.witness)


def make_entry(name: str, lhs: Term, rhs: Term, anchor: str = "") -> EquationCorpusEntry:
    if lhs.domain != rhs.domain or lhs.codomain != rhs.codomain:
        raise AppError(
            code="WIRE_TYPE_ERROR",
            message=f"Sides of equation '{name}' have different types.",
            details={
                "expected": [_wire_names(lhs.domain), _wire_names(lhs.codomain)],
                "actual": [_wire_names(rhs.domain), _wire_names(rhs.codomain)],
                "column": None,
            },
        )
    return EquationCorpusEntry(name, lhs, rhs, anchor)


LINE_RE = re.compile(r"^\s*(?P<name>[A-Za-z_][A-Za-z0-9_]*)\s*:(?P<body>[^#]*?)\s*(?:#\s*(?P<anchor>.*?)\s*)?$")


def _parse_side(text: str, line: int, offset: int) -> Term:
    try:
        return parse_term(text)
    except AppError as err:
        if "column" in err.details:
            column = err.details.get("column")
            err.details = {**err.details, "line": line, "column": None if column is None else column + offset}
        raise


def parse_corpus_text(text: str) -> list[EquationCorpusEntry]:
    """One equation per line: ``name : lhs == rhs  # anchor``; blank and '#' lines are skipped."""
    entries: list[EquationCorpusEntry] = []
    seen: set[str] = set()
    for number, line in enumerate(text.splitlines(), start=1):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        match = LINE_RE.match(line)
        body = match.group("body") if match else ""
        if not match or body.count("==") != 1:
            raise AppError(
                code="PARSE_ERROR",
                message="Corpus lines look like 'name : lhs == rhs  # anchor'.",
                details={"line": number, "column": 1},
            )
        name = match.group("name")
        if name in seen:
            raise AppError(
                code="PARSE_ERROR",
                message=f"Duplicate equation name '{name}'.",
                details={"line": number, "column": match.start("name") + 1},
            )
        seen.add(name)
        lhs_text, rhs_text = body.split("==")
        body_start = match.start("body")
        lhs = _parse_side(lhs_text, number, body_start)
        rhs = _parse_side(rhs_text, number, body_start + len(lhs_text) + 2)
        try:
            entries.append(make_entry(name, lhs, rhs, match.group("anchor") or ""))
        except AppError as err:
            err.details = {**err.details, "line": number}
            raise
    return entries


def load_corpus_file(path: str | Path) -> list[EquationCorpusEntry]:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError as exc:
        raise AppError(code="FILE_NOT_FOUND", message="Corpus file not found.", details={"path": str(path)}) from exc
    return parse_corpus_text(text)


BUILTIN_CORPUS_TEXT = """\
k1 : mu o kappa == u  # separability idempotent is a preimage of the unit
k2 : (idA * mu) o (kappa * idA) == (mu * idA) o (idA * kappa)  # separability idempotent commutes with the algebra
k3 : kappa == tau[A,A] o kappa  # separability idempotent is symmetric
k4 : mu o tau[A,A] o kappa == u  # alternate unit axiom through the swap
trace_symmetric : t == t o tau[A,A]  # trace form is symmetric
invariance : t o (mu * idA) == t o (idA * mu)  # trace form is invariant
self_dual_1 : (idA * t) o (kappa * idA) == idA  # trace form and idempotent form a self-duality, first zigzag
self_dual_2 : (t * idA) o (idA * kappa) == idA  # trace form and idempotent form a self-duality, second zigzag
composite_identity : (idA * eps) o (kappa * idD) o theta == idA  # idempotent inverts the map to the dual
theta_is_tstar : theta == (idD * t) o (eta * idA)  # map to the dual induced by the trace form
coassoc : (delta * idA) o delta == (idA * delta) o delta  # comultiplication is coassociative
counital_left : (counit * idA) o delta == idA  # trace map is a left counit
counital_right : (idA * counit) o delta == idA  # trace map is a right counit
frobenius_left : (idA * mu) o (delta * idA) == delta o mu  # Frobenius law, left form
frobenius_right : (mu * idA) o (idA * delta) == delta o mu  # Frobenius law, right form
special : mu o delta == idA  # Frobenius structure is special
"""

EXTENDED_CORPUS_TEXT = """\
snake_1 : (eps * idA) o (idA * eta) == idA  # first unit-counit relation of the dual
snake_2 : (idD * eps) o (eta * idD) == idD  # second unit-counit relation of the dual
trace_map_composite : tr == eps o (mu * idD) o (idA * tau[D,A]) o (idA * eta)  # trace of left multiplication
trace_form_composite : t == tr o mu  # trace form factors through multiplication
counit_is_trace : counit == tr  # counit of the Frobenius structure is the trace map
kappa_inverts_theta : (idA * eps) o (kappa * idD) == theta_inv  # idempotent read as a map from the dual
kdef : kappa == (theta_inv * idA) o eta  # idempotent forced by the inverse of the map to the dual
k4_matches_k1 : mu o tau[A,A] o kappa == mu o kappa  # swap does not change the product of the idempotent
delta_unit_is_kappa : delta o u == kappa  # comultiplication of the unit is the idempotent
delta_from_kappa : delta == (mu * idA) o (idA * kappa)  # comultiplication is determined by the idempotent
frobenius_self_dual : (idA * (counit o mu)) o ((delta o u) * idA) == idA  # Frobenius pairing and copairing are dual
"""


def builtin_corpus() -> list[EquationCorpusEntry]:
    return parse_corpus_text(BUILTIN_CORPUS_TEXT)


def extended_corpus() -> list[EquationCorpusEntry]:
    return builtin_corpus() + parse_corpus_text(EXTENDED_CORPUS_TEXT)


def check_equation(
    entry: EquationCorpusEntry,
    algebra: FinAlgebra,
    extras: Optional[DiagramExtras] = None,
    *,
    evaluator: Optional[Evaluator] = None,
) -> EquationResult:
    evaluator = evaluator or Evaluator(algebra, extras)
    left = evaluator.evaluate(entry.lhs)
    right = evaluator.evaluate(entry.rhs)
    diff = first_difference(left, right)
    if diff is None:
        return EquationResult(entry.name, "pass", entry.anchor)
    i, j = diff
    spec = algebra.spec
    witness = {
        "entry": [i, j],
        "lhs": format_scalar(spec, left.entry(i, j)),
        "rhs": format_scalar(spec, right.entry(i, j)),
    }
    return EquationResult(entry.name, "fail", entry.anchor, witness)


def check_corpus(
    entries: list[EquationCorpusEntry],
    algebra: FinAlgebra,
    extras: Optional[DiagramExtras] = None,
) -> list[EquationResult]:
    """Run every entry; entries needing separable data are skipped when none is supplied."""
    evaluator = Evaluator(algebra, extras)
    results = []
    for entry in entries:
        if entry.requires_separable and extras is None:
            results.append(EquationResult(entry.name, "skipped", entry.anchor))
            continue
        results.append(check_equation(entry, algebra, extras, evaluator=evaluator))
    passed = sum(result.passed for result in results)
    logger.info("%s: %d/%d corpus equations pass", algebra.name, passed, len(results))
    return results
