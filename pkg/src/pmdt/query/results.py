"""Solution tables and their text renderings."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Iterable, Sequence

from ..terms import PrefixMap, Term, term_key
from ..turtle import format_term, parse_term


def row_key(row: Sequence[Term | None]) -> tuple:
    return tuple((0,) if t is None else (1, term_key(t)) for t in row)


@dataclass(frozen=True)
class BindingSet:
    columns: tuple
    rows: tuple

    def __post_init__(self):
        object.__setattr__(self, "columns", tuple(self.columns))
        object.__setattr__(self, "rows", tuple(tuple(r) for r in self.rows))
        for r in self.rows:
            if len(r) != len(self.columns):
                raise ValueError(f"row arity {len(r)} != column count {len(self.columns)}")

    @classmethod
    def canonical(cls, columns: Sequence[str], rows: Iterable[Sequence[Term]]) -> "BindingSet":
        """De-duplicated rows in canonical order."""
        return cls(tuple(columns), tuple(sorted(set(map(tuple, rows)), key=row_key)))

    def __len__(self) -> int:
        return len(self.rows)

    def as_set(self) -> set[tuple]:
        return set(self.rows)

    def to_csv(self, prefixes: PrefixMap | None = None) -> str:
        pm = prefixes or PrefixMap()
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.columns)
        for row in self.rows:
            writer.writerow(["" if t is None else format_term(t, pm) for t in row])
        return buf.getvalue()

    def to_table(self, prefixes: PrefixMap | None = None) -> str:
        pm = prefixes or PrefixMap()
        cells = [list(self.columns)] + [["" if t is None else format_term(t, pm) for t in r]
                                        for r in self.rows]
        widths = [max(len(row[i]) for row in cells) for i in range(len(self.columns))]

        def fmt(row):
            return " | ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip()

        lines = [fmt(cells[0]), "-+-".join("-" * w for w in widths)]
        lines.extend(fmt(r) for r in cells[1:])
        return "\n".join(lines) + "\n"


def parse_csv(text: str, prefixes: PrefixMap | None = None) -> BindingSet:
    """Inverse of :meth:`BindingSet.to_csv` (row order is kept)."""
    pm = prefixes or PrefixMap()
    reader = csv.reader(io.StringIO(text))
    rows = list(reader)
    if not rows:
        raise ValueError("empty CSV: expected a header row")
    header, body = rows[0], rows[1:]
    return BindingSet(tuple(header),
                      tuple(tuple(parse_term(c, pm) if c else None for c in r) for r in body))
