"""Ontology meta-model: classes, properties, cardinality restrictions.

A :class:`SchemaGraph` is treated as immutable; :func:`define_class` and
:func:`define_property` return new graphs.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from decimal import Decimal
from types import MappingProxyType
from typing import Iterable, Mapping

from .errors import SchemaError
from .terms import DATATYPES, DEFAULT_PREFIXES, Iri, datatype_from_iri

OBJECT = "object"
DATA = "data"


@dataclass(frozen=True)
class ClassDef:
    iri: Iri
    parents: frozenset = frozenset()
    annotations: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "parents", frozenset(self.parents))
        object.__setattr__(self, "annotations", dict(sorted(self.annotations.items())))

    def __hash__(self):
        return hash((self.iri, self.parents))


@dataclass(frozen=True)
class PropertyDef:
    """``range`` holds class IRIs for object properties and XSD datatype
    IRIs for data properties. Several domain (range) entries mean the union.
    ``min_value``/``max_value`` bound the values of numeric data properties."""

    iri: Iri
    kind: str
    domain: frozenset = frozenset()
    range: frozenset = frozenset()
    inverse: Iri | None = None
    min_value: Decimal | None = None
    max_value: Decimal | None = None
    annotations: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in (OBJECT, DATA):
            raise SchemaError(f"property kind must be object or data, got {self.kind!r}",
                              "invalid-property-kind")
        object.__setattr__(self, "domain", frozenset(self.domain))
        object.__setattr__(self, "range", frozenset(self.range))
        for name in ("min_value", "max_value"):
            v = getattr(self, name)
            if v is not None and not isinstance(v, Decimal):
                object.__setattr__(self, name, Decimal(str(v)))
        object.__setattr__(self, "annotations", dict(sorted(self.annotations.items())))

    def __hash__(self):
        return hash((self.iri, self.kind))

    @property
    def datatypes(self) -> frozenset[str]:
        return frozenset(filter(None, (datatype_from_iri(r) for r in self.range)))


@dataclass(frozen=True, order=True)
class CardinalityRestriction:
    on_class: Iri
    on_property: Iri
    min: int = 0
    max: int | None = None  # None = unbounded

    def __post_init__(self):
        if self.min < 0 or (self.max is not None and self.max < 0):
            raise SchemaError("cardinalities must be non-negative", "invalid-restriction")
        if self.max is not None and self.min > self.max:
            raise SchemaError(
                f"restriction on {self.on_class} {self.on_property}: min {self.min} > max {self.max}",
                "invalid-restriction",
            )

    def sort_key(self):
        return (self.on_class.value, self.on_property.value, self.min,
                -1 if self.max is None else self.max)

    def describe(self) -> str:
        hi = "*" if self.max is None else str(self.max)
        return f"{self.on_property.value} [{self.min}..{hi}] on {self.on_class.value}"


def _pair(a: Iri, b: Iri) -> tuple[Iri, Iri]:
    return (a, b) if a.value <= b.value else (b, a)


@dataclass(frozen=True)
class SchemaGraph:
    classes: Mapping[Iri, ClassDef] = field(default_factory=dict)
    properties: Mapping[Iri, PropertyDef] = field(default_factory=dict)
    restrictions: tuple = ()
    prefixes: Mapping[str, str] = field(default_factory=lambda: dict(DEFAULT_PREFIXES))
    disjoint_pairs: frozenset = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "classes", MappingProxyType(dict(self.classes)))
        object.__setattr__(self, "properties", MappingProxyType(dict(self.properties)))
        object.__setattr__(self, "restrictions", tuple(
            sorted(set(self.restrictions), key=CardinalityRestriction.sort_key)))
        object.__setattr__(self, "prefixes", MappingProxyType(dict(self.prefixes)))
        object.__setattr__(self, "disjoint_pairs",
                           frozenset(_pair(*p) for p in self.disjoint_pairs))

    def __eq__(self, other):
        if not isinstance(other, SchemaGraph):
            return NotImplemented
        return (dict(self.classes) == dict(other.classes)
                and dict(self.properties) == dict(other.properties)
                and self.restrictions == other.restrictions
                and dict(self.prefixes) == dict(other.prefixes)
                and self.disjoint_pairs == other.disjoint_pairs)

    __hash__ = None

    # -- lookups -----------------------------------------------------------

    def has_class(self, iri: Iri) -> bool:
        return iri in self.classes

    def prop(self, iri: Iri) -> PropertyDef | None:
        return self.properties.get(iri)

    def restrictions_on(self, cls: Iri) -> list[CardinalityRestriction]:
        return [r for r in self.restrictions if r.on_class == cls]

    def subclass_edges(self) -> list[tuple[Iri, Iri]]:
        return sorted(((c.iri, p) for c in self.classes.values() for p in c.parents),
                      key=lambda e: (e[0].value, e[1].value))

    def is_empty(self) -> bool:
        return not (self.classes or self.properties or self.restrictions or self.disjoint_pairs)

    # -- validation --------------------------------------------------------

    def check(self) -> "SchemaGraph":
        """Raise SchemaError unless every cross-reference resolves and the
        subclass graph is acyclic. Returns self for chaining."""
        for cdef in self.classes.values():
            for parent in cdef.parents:
                if parent not in self.classes:
                    raise SchemaError(f"{cdef.iri} has undeclared parent {parent}", "unknown-parent")
        cycle = find_cycle({c.iri: c.parents for c in self.classes.values()})
        if cycle:
            raise SchemaError("subclass cycle: " + " -> ".join(str(c) for c in cycle),
                              "cycle-introduced")
        for pdef in self.properties.values():
            _check_property_refs(self, pdef)
        for pdef in self.properties.values():
            _check_inverse(self, pdef)
        for r in self.restrictions:
            if r.on_class not in self.classes:
                raise SchemaError(f"restriction on undeclared class {r.on_class}", "unresolved-reference")
            if r.on_property not in self.properties:
                raise SchemaError(f"restriction on undeclared property {r.on_property}",
                                  "unresolved-reference")
        for a, b in self.disjoint_pairs:
            if a not in self.classes or b not in self.classes:
                raise SchemaError(f"disjoint pair references undeclared class: {a}, {b}",
                                  "unresolved-reference")
        return self


def find_cycle(parents: Mapping[Iri, Iterable[Iri]]) -> list[Iri] | None:
    """Return one directed cycle in the child->parent graph, or None."""
    WHITE, GREY, BLACK = 0, 1, 2
    color: dict[Iri, int] = {}
    for root in sorted(parents, key=lambda i: i.value):
        if color.get(root, WHITE) != WHITE:
            continue
        stack: list[tuple[Iri, list[Iri]]] = [
            (root, sorted(parents.get(root, ()), key=lambda i: i.value))]
        path = [root]
        color[root] = GREY
        while stack:
            node, todo = stack[-1]
            if not todo:
                color[node] = BLACK
                stack.pop()
                path.pop()
                continue
            nxt = todo.pop(0)
            state = color.get(nxt, WHITE)
            if state == GREY:
                return path[path.index(nxt):] + [nxt]
            if state == WHITE:
                color[nxt] = GREY
                path.append(nxt)
                stack.append((nxt, sorted(parents.get(nxt, ()), key=lambda i: i.value)))
    return None


def _check_property_refs(schema: SchemaGraph, pdef: PropertyDef) -> None:
    for d in pdef.domain:
        if d not in schema.classes:
            raise SchemaError(f"{pdef.iri}: unknown domain {d}", "unknown-domain-or-range")
    for r in pdef.range:
        if pdef.kind == OBJECT:
            if r not in schema.classes:
                raise SchemaError(f"{pdef.iri}: unknown range class {r}", "unknown-domain-or-range")
        elif datatype_from_iri(r) is None:
            raise SchemaError(f"{pdef.iri}: unsupported datatype {r} (supported: {', '.join(DATATYPES)})",
                              "unknown-domain-or-range")


def _check_inverse(schema: SchemaGraph, pdef: PropertyDef) -> None:
    if pdef.inverse is None:
        return
    other = schema.properties.get(pdef.inverse)
    if other is None:
        raise SchemaError(f"{pdef.iri}: inverse {pdef.inverse} is not declared", "inverse-mismatch")
    if other.inverse is not None and other.inverse != pdef.iri:
        raise SchemaError(f"{pdef.iri} declares inverse {other.iri}, which names inverse {other.inverse}",
                          "inverse-mismatch")
    if pdef.kind != OBJECT or other.kind != OBJECT:
        raise SchemaError(f"{pdef.iri}: inverses must be object properties", "inverse-mismatch")


def define_class(schema: SchemaGraph, cdef: ClassDef) -> SchemaGraph:
    for parent in sorted(cdef.parents):
        if parent not in schema.classes:
            raise SchemaError(f"{cdef.iri}: unknown parent {parent}", "unknown-parent")
    if cdef.iri in schema.classes:
        # Re-declaring an existing class with new parents would add
        # subclass edges; report a cycle when that is what it amounts to.
        graph = {c.iri: set(c.parents) for c in schema.classes.values()}
        graph[cdef.iri] |= set(cdef.parents)
        if find_cycle(graph):
            raise SchemaError(f"{cdef.iri}: subclass edge would introduce a cycle", "cycle-introduced")
        raise SchemaError(f"class {cdef.iri} already declared", "duplicate-class")
    if cdef.iri in cdef.parents:
        raise SchemaError(f"{cdef.iri} cannot be its own parent", "cycle-introduced")
    classes = dict(schema.classes)
    classes[cdef.iri] = cdef
    return replace(schema, classes=classes)


def define_property(schema: SchemaGraph, pdef: PropertyDef) -> SchemaGraph:
    if pdef.iri in schema.properties:
        raise SchemaError(f"property {pdef.iri} already declared", "duplicate-property")
    _check_property_refs(schema, pdef)
    properties = dict(schema.properties)
    if pdef.inverse is not None:
        other = properties.get(pdef.inverse)
        if other is None and pdef.inverse != pdef.iri:
            raise SchemaError(f"{pdef.iri}: inverse {pdef.inverse} is not declared", "inverse-mismatch")
        if other is not None:
            if other.inverse is not None and other.inverse != pdef.iri:
                raise SchemaError(
                    f"{pdef.iri} declares inverse {other.iri}, which names inverse {other.inverse}",
                    "inverse-mismatch")
            if other.kind != OBJECT or pdef.kind != OBJECT:
                raise SchemaError(f"{pdef.iri}: inverses must be object properties", "inverse-mismatch")
            properties[other.iri] = replace(other, inverse=pdef.iri)
    properties[pdef.iri] = pdef
    return replace(schema, properties=properties)


def add_restriction(schema: SchemaGraph, r: CardinalityRestriction) -> SchemaGraph:
    if r.on_class not in schema.classes or r.on_property not in schema.properties:
        raise SchemaError(f"restriction references undeclared term: {r.describe()}", "unresolved-reference")
    return replace(schema, restrictions=schema.restrictions + (r,))


def add_disjoint(schema: SchemaGraph, a: Iri, b: Iri) -> SchemaGraph:
    if a not in schema.classes or b not in schema.classes:
        raise SchemaError(f"disjoint pair references undeclared class: {a}, {b}", "unresolved-reference")
    return replace(schema, disjoint_pairs=schema.disjoint_pairs | {_pair(a, b)})


def merge(base: SchemaGraph, delta: SchemaGraph) -> SchemaGraph:
    """Union of two schema graphs; class parents and annotations are merged,
    a property declared in both must agree on kind."""
    classes = dict(base.classes)
    for iri, cdef in delta.classes.items():
        old = classes.get(iri)
        if old is None:
            classes[iri] = cdef
        else:
            classes[iri] = ClassDef(iri, old.parents | cdef.parents,
                                    {**old.annotations, **cdef.annotations})
    properties = dict(base.properties)
    for iri, pdef in delta.properties.items():
        old = properties.get(iri)
        if old is None:
            properties[iri] = pdef
        elif old != pdef:
            if old.kind != pdef.kind:
                raise SchemaError(f"{iri} declared both as {old.kind} and {pdef.kind} property",
                                  "duplicate-property")
            properties[iri] = replace(
                old,
                domain=old.domain | pdef.domain,
                range=old.range | pdef.range,
                inverse=pdef.inverse or old.inverse,
                min_value=pdef.min_value if pdef.min_value is not None else old.min_value,
                max_value=pdef.max_value if pdef.max_value is not None else old.max_value,
                annotations={**old.annotations, **pdef.annotations},
            )
    return SchemaGraph(
        classes=classes,
        properties=properties,
        restrictions=base.restrictions + delta.restrictions,
        prefixes={**base.prefixes, **delta.prefixes},
        disjoint_pairs=base.disjoint_pairs | delta.disjoint_pairs,
    )
