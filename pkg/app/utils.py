"""Plain-text rendering helpers for command output."""

from __future__ import annotations

from typing import Any, Sequence


def format_table(headers: Sequence[str], rows: Sequence[Sequence[Any]]) -> str:
    """Left-aligned columns separated by two spaces."""
    cells = [[str(value) for value in headers]] + [[str(value) for value in row] for row in rows]
    widths = [max(len(row[i]) for row in cells) for i in range(len(headers))]
    lines = ["  ".join(value.ljust(width) for value, width in zip(row, widths)).rstrip() for row in cells]
    lines.insert(1, "  ".join("-" * width for width in widths))
    return "\n".join(lines)


def format_matrix(rows: Sequence[Sequence[str]], indent: str = "  ") -> str:
    if not rows:
        return f"{indent}[]"
    width = max((len(value) for row in rows for value in row), default=1)
    return "\n".join(indent + "[" + " ".join(value.rjust(width) for value in row) + "]" for row in rows)


def format_vector(values: Sequence[str]) -> str:
    return "(" + ", ".join(values) + ")"


def format_witness(witness: Any) -> str:
    if witness is None:
        return ""
    if isinstance(witness, dict):
        return ", ".join(f"{key}={value}" for key, value in witness.items())
    return str(witness)
