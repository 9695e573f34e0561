"""Capability index and decomposition of a query into per-site groups."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping

from ..errors import FederationError
from ..query.ast import FilterExpr, QueryAst, TriplePattern, Var
from ..query.engine import describe_filter, format_pattern, rewrite_with_subsumption
from ..reasoner import SubsumptionClosure
from ..terms import RDF_TYPE, Iri, Literal, PrefixMap
from .mapping import TableMapping


class CapabilityIndex:
    """Which (site, table) pairs can supply each class or property.

    A class entry lists every table whose row class is that class or one of
    its subclasses. The ``rdf:type`` entry lists every table. Row counts are
    kept for plan estimates; nothing else about a site is shared.
    """

    def __init__(self):
        self.entries: dict[Iri, set[tuple[str, str]]] = {}
        self.row_counts: dict[tuple[str, str], int] = {}

    def add_table(self, site_id: str, mapping: TableMapping, rows: int, closure: SubsumptionClosure) -> None:
        key = (site_id, mapping.table_name)
        self.row_counts[key] = rows
        self.entries.setdefault(RDF_TYPE, set()).add(key)
        for cls in closure.ancestors(mapping.row_class):
            self.entries.setdefault(cls, set()).add(key)
        for col in mapping.columns:
            self.entries.setdefault(col.property, set()).add(key)

    def copy(self) -> "CapabilityIndex":
        out = CapabilityIndex()
        out.entries = {k: set(v) for k, v in self.entries.items()}
        out.row_counts = dict(self.row_counts)
        return out

    def __getitem__(self, iri: Iri) -> frozenset:
        return frozenset(self.entries.get(iri, ()))

    def sources(self, p: TriplePattern) -> frozenset:
        """(site, table) pairs that may hold assertions matching ``p``."""
        if isinstance(p.predicate, Var):
            return frozenset(self.row_counts)
        if p.predicate == RDF_TYPE:
            if isinstance(p.object, Var):
                return self[RDF_TYPE]
            if isinstance(p.object, Literal):
                return frozenset()
            return self[p.object]
        return self[p.predicate]

    def sites_for(self, p: TriplePattern) -> tuple[str, ...]:
        return tuple(sorted({site for site, _ in self.sources(p)}))

    def estimate(self, p: TriplePattern) -> int:
        return sum(self.row_counts[k] for k in self.sources(p))


@dataclass(frozen=True)
class Group:
    sites: tuple
    patterns: tuple  # indices into the query's patterns
    filters: tuple
    broadcast: bool


@dataclass(frozen=True)
class FederatedPlan:
    ast: QueryAst
    groups: tuple
    requested: tuple  # per group: variables the sites return
    coordinator_joins: tuple  # group indices in estimated join order
    residual_filters: tuple

    def group_patterns(self, g: int) -> tuple:
        return tuple(self.ast.patterns[i] for i in self.groups[g].patterns)

    def describe(self, prefixes: PrefixMap | None = None) -> str:
        pm = prefixes or PrefixMap()
        lines = []
        for g, group in enumerate(self.groups):
            kind = "broadcast" if group.broadcast else "exclusive"
            lines.append(f"group {g} [{kind}] at {', '.join(group.sites)} -> "
                         f"{' '.join(str(v) for v in self.requested[g]) or '(existence)'}")
            for i in group.patterns:
                lines.append(f"  {format_pattern(self.ast.patterns[i], pm)}")
            for f in group.filters:
                lines.append("  " + describe_filter(f, pm))
        lines.append("join order: " + " ".join(str(g) for g in self.coordinator_joins))
        for f in self.residual_filters:
            lines.append("residual " + describe_filter(f, pm))
        return "\n".join(lines) + "\n"


def _vars_of(patterns: Iterable[TriplePattern]) -> list[Var]:
    out: list[Var] = []
    for p in patterns:
        for v in p.vars():
            if v not in out:
                out.append(v)
    return out


def _describe_unanswerable(p: TriplePattern) -> str:
    text = format_pattern(p, PrefixMap())
    if p.predicate == RDF_TYPE and isinstance(p.object, Iri):
        return f"no site can answer pattern {text}: class {p.object} is not mapped"
    return f"no site can answer pattern {text}: predicate {p.predicate} is not mapped"


def decompose(ast: QueryAst, cap: CapabilityIndex, closure: SubsumptionClosure | None = None) -> FederatedPlan:
    """Split ``ast`` into site groups.

    Patterns only one site can answer are grouped per site. Every pattern
    several sites can answer becomes its own broadcast group whose answers
    are unioned. ``ast`` should already be rewritten with the subsumption
    closure; ``closure`` is accepted for callers that have not done so.
    """
    if closure is not None and any(p.predicate == RDF_TYPE and isinstance(p.object, Iri)
                                   and p.type_set is None for p in ast.patterns):
        ast = rewrite_with_subsumption(ast, closure)
    exclusive: dict[str, list[int]] = {}
    broadcast: list[tuple[tuple, int]] = []
    for i, p in enumerate(ast.patterns):
        sites = cap.sites_for(p)
        if not sites:
            raise FederationError(_describe_unanswerable(p), "unanswerable-pattern")
        if len(sites) == 1:
            exclusive.setdefault(sites[0], []).append(i)
        else:
            broadcast.append((sites, i))
    groups: list[Group] = []
    for site in sorted(exclusive):
        groups.append(Group((site,), tuple(exclusive[site]), (), False))
    for sites, i in broadcast:
        groups.append(Group(sites, (i,), (), True))

    group_vars = [_vars_of(ast.patterns[i] for i in g.patterns) for g in groups]
    residual = []
    pushed: list[list[FilterExpr]] = [[] for _ in groups]
    for f in ast.filters:
        homes = [g for g, vs in enumerate(group_vars) if set(f.vars()) <= set(vs)]
        for g in homes:
            pushed[g].append(f)
        if not homes:
            residual.append(f)
    groups = [Group(g.sites, g.patterns, tuple(pushed[k]), g.broadcast) for k, g in enumerate(groups)]

    needed = set(ast.select_vars) | set(ast.order_by) | {v for f in residual for v in f.vars()}
    requested = []
    for k, vs in enumerate(group_vars):
        others = {v for j, ws in enumerate(group_vars) if j != k for v in ws}
        requested.append(tuple(v for v in vs if v in needed or v in others))

    def estimate(k: int) -> int:
        return min(cap.estimate(ast.patterns[i]) for i in groups[k].patterns)

    order = sorted(range(len(groups)), key=lambda k: (estimate(k), _first_var(requested[k]), k))
    return FederatedPlan(ast, tuple(groups), tuple(requested), tuple(order), tuple(residual))


def _first_var(vs: Iterable[Var]) -> str:
    names = sorted(v.name for v in vs)
    return names[0] if names else ""


def join_order(sizes: Mapping[int, int], requested: tuple) -> list[int]:
    """Ascending exact result size, ties broken on the smallest variable name."""
    return sorted(sizes, key=lambda k: (sizes[k], _first_var(requested[k]), k))
