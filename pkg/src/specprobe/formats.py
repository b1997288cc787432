"""Deterministic text formatting for exports.

Floats are written with 17 significant digits, enough to round-trip IEEE
doubles exactly, so repeated runs with identical inputs produce
byte-identical files.
"""

from __future__ import annotations

from pathlib import Path
from typing import Iterable, Sequence

__all__ = ["fmt", "write_csv"]


def fmt(x: float) -> str:
    return format(float(x), ".17g")


def write_csv(path, header: Sequence[str], rows: Iterable[Sequence[str]]) -> Path:
    path = Path(path)
    lines = [",".join(header)]
    lines.extend(",".join(row) for row in rows)
    path.write_text("\n".join(lines) + "\n", encoding="ascii")
    return path
