"""Subsumption closure, materialisation and closed-world validation."""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .errors import EvaluationError, TemporalCycleError
from .schema import OBJECT, SchemaGraph
from .store import Assertion, Dataset, Pattern
from .terms import PMDT, RDF_TYPE, Iri, Literal, PrefixMap
from .vocabulary import FOLLOWUP_RULES

PRECEDES = Iri(PMDT + "precedes")
STATE = Iri(PMDT + "State")
ADVERSE_EVENT = Iri(PMDT + "AdverseEvent")
HIGH_GRADE = Iri(PMDT + "HighGradeAdverseEvent")
LOW_GRADE = Iri(PMDT + "LowGradeAdverseEvent")
HAS_SEVERITY_GRADE = Iri(PMDT + "hasSeverityGrade")
GRADE_VALUE = Iri(PMDT + "gradeValue")
TIMESTAMP_VALUE = Iri(PMDT + "timestampValue")
INTERVAL_START = Iri(PMDT + "intervalStart")
INTERVAL_END = Iri(PMDT + "intervalEnd")

# CTCAE: grades 1-2 mild/moderate, 3 and above severe or worse.
HIGH_GRADE_THRESHOLD = 3

VIOLATION_KINDS = ("min-cardinality", "max-cardinality", "domain", "range", "disjointness",
                   "temporal-cycle", "datatype-range")


class SubsumptionClosure(Mapping):
    """Maps every declared class to its reflexive-transitive ancestor set."""

    def __init__(self, ancestors: Mapping[Iri, frozenset]):
        self._anc = dict(ancestors)
        desc: dict[Iri, set[Iri]] = defaultdict(set)
        for cls, ups in self._anc.items():
            for up in ups:
                desc[up].add(cls)
        self._desc = {c: frozenset(d) for c, d in desc.items()}

    def __getitem__(self, cls: Iri) -> frozenset:
        return self._anc[cls]

    def __iter__(self):
        return iter(self._anc)

    def __len__(self) -> int:
        return len(self._anc)

    def ancestors(self, cls: Iri) -> frozenset:
        return self._anc.get(cls, frozenset({cls}))

    def descendants(self, cls: Iri) -> frozenset:
        return self._desc.get(cls, frozenset({cls}))

    def is_subclass(self, sub: Iri, sup: Iri) -> bool:
        return sup in self.ancestors(sub)

    def type_closure(self, types: Iterable[Iri]) -> set[Iri]:
        out: set[Iri] = set()
        for t in types:
            out |= self.ancestors(t)
        return out


def classify(schema: SchemaGraph) -> SubsumptionClosure:
    """Reflexive-transitive closure of the direct-subclass relation."""
    parents = {iri: cdef.parents for iri, cdef in schema.classes.items()}
    memo: dict[Iri, frozenset] = {}

    def visit(root: Iri) -> frozenset:
        # iterative post-order so deep hierarchies do not hit the recursion limit
        stack = [(root, False)]
        while stack:
            node, expanded = stack.pop()
            if node in memo:
                continue
            if expanded:
                acc = {node}
                for p in parents.get(node, ()):
                    acc |= memo[p]
                memo[node] = frozenset(acc)
            else:
                stack.append((node, True))
                stack.extend((p, False) for p in parents.get(node, ()) if p not in memo)
        return memo[root]

    for cls in parents:
        visit(cls)
    return SubsumptionClosure(memo)


@dataclass(frozen=True)
class MaterializeConfig:
    types: bool = True
    inverses: bool = True
    temporal: bool = True
    severity: bool = True


def _transitive_pairs(edges: Mapping[Iri, set[Iri]]) -> dict[Iri, set[Iri]]:
    reach: dict[Iri, set[Iri]] = {}
    for start in edges:
        seen: set[Iri] = set()
        todo = list(edges[start])
        while todo:
            n = todo.pop()
            if n in seen:
                continue
            seen.add(n)
            todo.extend(edges.get(n, ()))
        reach[start] = seen
    return reach


def precedes_cycles(ds: Dataset) -> list[Iri]:
    """States that (transitively) precede themselves."""
    edges: dict[Iri, set[Iri]] = defaultdict(set)
    for a in ds.iter_match(Pattern(None, PRECEDES)):
        if isinstance(a.object, Iri):
            edges[a.subject].add(a.object)
    reach = _transitive_pairs(edges)
    return sorted(s for s, targets in reach.items() if s in targets)


def materialize(schema: SchemaGraph, closure: SubsumptionClosure, ds: Dataset,
                config: MaterializeConfig | None = None) -> Dataset:
    """Return a new dataset with derived assertions added, up to fixpoint.

    Raises TemporalCycleError when the precedes closure is reflexive.
    """
    config = config or MaterializeConfig()
    out = ds.copy()
    inverses = {p.iri: p.inverse for p in schema.properties.values()
                if p.kind == OBJECT and p.inverse is not None}
    while True:
        derived: set[Assertion] = set()
        if config.types:
            for a in out.iter_match(Pattern(None, RDF_TYPE)):
                if a.object in closure:
                    for sup in closure[a.object]:
                        derived.add(Assertion(a.subject, RDF_TYPE, sup))
        if config.inverses:
            for prop, inv in inverses.items():
                for a in out.iter_match(Pattern(None, prop)):
                    if isinstance(a.object, Iri):
                        derived.add(Assertion(a.object, inv, a.subject))
        if config.temporal:
            edges: dict[Iri, set[Iri]] = defaultdict(set)
            for a in out.iter_match(Pattern(None, PRECEDES)):
                if isinstance(a.object, Iri):
                    edges[a.subject].add(a.object)
            reach = _transitive_pairs(edges)
            cyclic = sorted(s for s, targets in reach.items() if s in targets)
            if cyclic:
                raise TemporalCycleError(cyclic)
            for s, targets in reach.items():
                derived.update(Assertion(s, PRECEDES, t) for t in targets)
        if config.severity:
            for a in out.iter_match(Pattern(None, RDF_TYPE, ADVERSE_EVENT)):
                for g in out.objects(a.subject, HAS_SEVERITY_GRADE):
                    if not isinstance(g, Iri):
                        continue
                    for v in out.objects(g, GRADE_VALUE):
                        if isinstance(v, Literal) and v.datatype == "integer":
                            cls = HIGH_GRADE if v.value >= HIGH_GRADE_THRESHOLD else LOW_GRADE
                            derived.add(Assertion(a.subject, RDF_TYPE, cls))
        added = 0
        for a in sorted(derived, key=Assertion.sort_key):
            if out.add(a):
                added += 1
        if not added:
            return out


# -- validation -------------------------------------------------------------


@dataclass(frozen=True)
class Violation:
    kind: str
    focus: Iri
    constraint: str
    detail: str
    evidence: tuple = field(default=(), compare=False)

    def sort_key(self):
        return (self.focus.value, self.kind, self.constraint, self.detail)


@dataclass(frozen=True)
class Advisory:
    kind: str
    focus: Iri
    expected_class: Iri

    def sort_key(self):
        return (self.focus.value, self.kind, self.expected_class.value)


def render_assertion(a: Assertion, prefixes: PrefixMap | None = None) -> str:
    from .turtle import format_term

    pm = prefixes or PrefixMap()
    pred = "a" if a.predicate == RDF_TYPE else pm.compact(a.predicate)
    return f"{pm.compact(a.subject)} {pred} {format_term(a.object, pm)}"


def _evidence_text(evidence: Iterable[Assertion], prefixes: PrefixMap) -> str:
    return "; ".join(render_assertion(a, prefixes) for a in evidence)


def _asserted_type_of(ds: Dataset, x: Iri, closure: SubsumptionClosure, target: Iri) -> Assertion:
    """A type assertion on ``x`` that entails membership in ``target``."""
    for t in sorted(ds.types_of(x)):
        if target in closure.ancestors(t):
            return Assertion(x, RDF_TYPE, t)
    return Assertion(x, RDF_TYPE, target)


def validate(schema: SchemaGraph, closure: SubsumptionClosure, ds: Dataset,
             prefixes: PrefixMap | None = None) -> list[Violation]:
    """Closed-world check of cardinality, domain, range, value-range,
    disjointness and temporal-order constraints."""
    pm = prefixes or PrefixMap(dict(schema.prefixes))
    out: set[Violation] = set()

    types: dict[Iri, set[Iri]] = defaultdict(set)
    for a in ds.iter_match(Pattern(None, RDF_TYPE)):
        types[a.subject] |= closure.ancestors(a.object)

    def add(kind, focus, constraint, evidence):
        evidence = tuple(sorted(set(evidence), key=Assertion.sort_key))
        out.add(Violation(kind, focus, constraint, _evidence_text(evidence, pm), evidence))

    for r in schema.restrictions:
        members = sorted(x for x, ts in types.items() if r.on_class in ts)
        for x in members:
            values = ds.match(Pattern(x, r.on_property))
            n = len(values)
            witness = _asserted_type_of(ds, x, closure, r.on_class)
            if n < r.min:
                add("min-cardinality", x,
                    f"{pm.compact(r.on_class)} {pm.compact(r.on_property)} min {r.min} (found {n})",
                    [witness, *values])
            if r.max is not None and n > r.max:
                add("max-cardinality", x,
                    f"{pm.compact(r.on_class)} {pm.compact(r.on_property)} max {r.max} (found {n})",
                    [witness, *values])

    for pdef in schema.properties.values():
        for a in ds.iter_match(Pattern(None, pdef.iri)):
            if pdef.domain and not (types.get(a.subject, set()) & pdef.domain):
                names = " | ".join(sorted(pm.compact(d) for d in pdef.domain))
                add("domain", a.subject, f"{pm.compact(pdef.iri)} domain {names}", [a])
            if pdef.kind == OBJECT:
                if not isinstance(a.object, Iri):
                    add("range", a.subject, f"{pm.compact(pdef.iri)} expects an IRI object", [a])
                elif pdef.range and not (types.get(a.object, set()) & pdef.range):
                    names = " | ".join(sorted(pm.compact(r) for r in pdef.range))
                    add("range", a.subject, f"{pm.compact(pdef.iri)} range {names}", [a])
            else:
                if not isinstance(a.object, Literal):
                    add("range", a.subject, f"{pm.compact(pdef.iri)} expects a literal", [a])
                    continue
                allowed = pdef.datatypes
                dt = a.object.datatype
                if allowed and dt not in allowed and not (dt == "integer" and "decimal" in allowed):
                    add("range", a.subject,
                        f"{pm.compact(pdef.iri)} range {'|'.join(sorted(allowed))}", [a])
                    continue
                if a.object.family == "numeric":
                    v = a.object.value
                    lo, hi = pdef.min_value, pdef.max_value
                    if (lo is not None and v < lo) or (hi is not None and v > hi):
                        bounds = f"[{'' if lo is None else lo}, {'' if hi is None else hi}]"
                        add("datatype-range", a.subject, f"{pm.compact(pdef.iri)} in {bounds}", [a])

    for a_cls, b_cls in sorted(schema.disjoint_pairs):
        for x, ts in types.items():
            if a_cls in ts and b_cls in ts:
                add("disjointness", x, f"{pm.compact(a_cls)} disjoint with {pm.compact(b_cls)}",
                    [_asserted_type_of(ds, x, closure, a_cls), _asserted_type_of(ds, x, closure, b_cls)])

    for s in precedes_cycles(ds):
        chain = ds.match(Pattern(s, PRECEDES))
        add("temporal-cycle", s, f"{pm.compact(PRECEDES)} is irreflexive", chain)

    return sorted(out, key=Violation.sort_key)


def advise_followups(schema: SchemaGraph, closure: SubsumptionClosure, ds: Dataset) -> list[Advisory]:
    """Treatments lacking the follow-up their type calls for. Advisories,
    not violations: an absent follow-up may simply be unrecorded."""
    out: set[Advisory] = set()
    types: dict[Iri, set[Iri]] = defaultdict(set)
    for a in ds.iter_match(Pattern(None, RDF_TYPE)):
        types[a.subject] |= closure.ancestors(a.object)
    for treatment, followup, link in FOLLOWUP_RULES:
        t_cls, f_cls, l_prop = Iri(PMDT + treatment), Iri(PMDT + followup), Iri(PMDT + link)
        for x, ts in types.items():
            if t_cls in ts and not ds.count(Pattern(None, l_prop, x)):
                out.add(Advisory("missing-followup", x, f_cls))
    return sorted(out, key=Advisory.sort_key)


# -- temporal comparison ----------------------------------------------------


def _time_bounds(ds: Dataset, t: Iri):
    stamps = ds.objects(t, TIMESTAMP_VALUE)
    if stamps:
        v = stamps[0].value
        return v, v
    starts, ends = ds.objects(t, INTERVAL_START), ds.objects(t, INTERVAL_END)
    if starts and ends:
        return starts[0].value, ends[0].value
    raise EvaluationError(f"{t} has neither a timestamp nor interval bounds")


def temporal_before(ds: Dataset, a: Iri, b: Iri) -> bool:
    """Strict 'before' over time instants and intervals.

    Instants compare by timestamp; an instant is before an interval when it
    precedes the interval start; an interval is before anything that starts
    after its end.
    """
    _, a_end = _time_bounds(ds, a)
    b_start, _ = _time_bounds(ds, b)
    return a_end < b_start
