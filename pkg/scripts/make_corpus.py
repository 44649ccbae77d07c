"""Regenerate the bundled algebra documents under algebras/ from the constructors."""

from __future__ import annotations

import json
import sys
from pathlib import Path
from typing import Any, Callable

ROOT = Path(__file__).resolve().parents[1]
if str(ROOT) not in sys.path:
    sys.path.insert(0, str(ROOT))

from app import config
from app.algebra import (
    FinAlgebra,
    base_algebra,
    cyclic_group_algebra,
    dual_numbers,
    dump_algebra,
    make_matrix_algebra,
    make_upper_triangular_algebra,
    product_algebra,
)
from app.scalars import ScalarSpec, integers, prime_field, rationals


FIELD_PREFIXES: dict[str, Callable[[], ScalarSpec]] = {
    "q": rationals,
    "f2": lambda: prime_field(2),
    "f3": lambda: prime_field(3),
    "f5": lambda: prime_field(5),
}


def corpus_builders() -> dict[str, Callable[[str], FinAlgebra]]:
    builders: dict[str, Callable[[str], FinAlgebra]] = {}
    for prefix, spec in FIELD_PREFIXES.items():
        for n in range(2, 9):
            builders[f"{prefix}_c{n}"] = lambda name, spec=spec, n=n: cyclic_group_algebra(spec(), n, name=name)
    builders["m2_q"] = lambda name: make_matrix_algebra(rationals(), 2, name=name)
    builders["m2_f2"] = lambda name: make_matrix_algebra(prime_field(2), 2, name=name)
    builders["t2_q"] = lambda name: make_upper_triangular_algebra(rationals(), 2, name=name)
    builders["dual_numbers"] = lambda name: _renamed(dual_numbers(rationals()), name)
    builders["z_x_z"] = lambda name: product_algebra(base_algebra(integers()), base_algebra(integers()), name=name)
    builders["f2_x_f2"] = lambda name: product_algebra(
        base_algebra(prime_field(2)), base_algebra(prime_field(2)), name=name
    )
    builders["z_c2"] = lambda name: cyclic_group_algebra(integers(), 2, name=name)
    return builders


def _renamed(algebra: FinAlgebra, name: str) -> FinAlgebra:
    return FinAlgebra(name, algebra.spec, algebra.basis, algebra.structure, algebra.unit)


def render_document(document: dict[str, Any]) -> str:
    """One key per line and one structure plane per line, so diffs stay readable."""
    planes = ",\n".join(f"    {json.dumps(plane)}" for plane in document["structure"])
    return "\n".join(
        [
            "{",
            f'  "name": {json.dumps(document["name"])},',
            f'  "scalars": {json.dumps(document["scalars"])},',
            f'  "dim": {document["dim"]},',
            f'  "basis": {json.dumps(document["basis"])},',
            f'  "unit": {json.dumps(document["unit"])},',
            '  "structure": [',
            planes,
            "  ]",
            "}",
            "",
        ]
    )


def make_corpus(out_dir: Path | None = None) -> list[Path]:
    out_dir = out_dir or config.get_corpus_dir()
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for name, build in corpus_builders().items():
        path = out_dir / f"{name}.json"
        path.write_text(render_document(dump_algebra(build(name))), encoding="utf-8")
        written.append(path)
    return written


if __name__ == "__main__":
    for written_path in make_corpus(Path(sys.argv[1]) if len(sys.argv) > 1 else None):
        print(written_path)
