from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

from ..terms import Iri, Literal, Term

OPERATORS = ("=", "!=", "<", "<=", ">", ">=")


@dataclass(frozen=True, order=True)
class Var:
    name: str

    def __str__(self) -> str:
        return "?" + self.name


Slot = Union[Var, Iri, Literal]


@dataclass(frozen=True)
class TriplePattern:
    subject: Slot
    predicate: Slot
    object: Slot
    # set by rewrite_with_subsumption on (?x a C) patterns: the classes
    # whose type assertions satisfy the pattern
    type_set: Optional[frozenset] = field(default=None, compare=False)

    def vars(self) -> list[Var]:
        out = []
        for slot in (self.subject, self.predicate, self.object):
            if isinstance(slot, Var) and slot not in out:
                out.append(slot)
        return out

    def is_concrete(self) -> bool:
        return not self.vars()


@dataclass(frozen=True)
class FilterExpr:
    left: Var
    op: str
    right: Union[Var, Term]

    def vars(self) -> list[Var]:
        return [self.left] + ([self.right] if isinstance(self.right, Var) and self.right != self.left else [])


@dataclass(frozen=True)
class QueryAst:
    select_vars: tuple
    patterns: tuple
    filters: tuple = ()
    distinct: bool = True
    order_by: tuple = ()
    limit: Optional[int] = None

    def pattern_vars(self) -> list[Var]:
        seen: list[Var] = []
        for p in self.patterns:
            for v in p.vars():
                if v not in seen:
                    seen.append(v)
        return seen
