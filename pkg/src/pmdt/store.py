"""Indexed assertion store (the ABox)."""

from __future__ import annotations

import threading
from collections import defaultdict
from dataclasses import dataclass
from typing import Iterable, Iterator, NamedTuple, Optional

from .errors import StoreError
from .schema import DATA, OBJECT, SchemaGraph
from .terms import RDF_TYPE, Iri, Literal, Term, term_key


class Assertion(NamedTuple):
    subject: Iri
    predicate: Iri
    object: Term

    def sort_key(self):
        return (self.subject.value, self.predicate.value, term_key(self.object))


@dataclass(frozen=True)
class Pattern:
    """A triple pattern; ``None`` in a position is a wildcard."""

    subject: Optional[Iri] = None
    predicate: Optional[Iri] = None
    object: Optional[Term] = None

    def matches(self, a: Assertion) -> bool:
        return ((self.subject is None or self.subject == a.subject)
                and (self.predicate is None or self.predicate == a.predicate)
                and (self.object is None or self.object == a.object))


def check_assertion(schema: SchemaGraph | None, a: Assertion, strict: bool = False) -> None:
    """Raise StoreError when ``a`` contradicts the kind of its predicate."""
    if not isinstance(a.subject, Iri) or not isinstance(a.predicate, Iri):
        raise StoreError("subject and predicate must be IRIs", "kind-mismatch")
    if not isinstance(a.object, (Iri, Literal)):
        raise StoreError(f"object must be an IRI or literal, got {type(a.object).__name__}",
                         "kind-mismatch")
    if a.predicate == RDF_TYPE:
        if not isinstance(a.object, Iri):
            raise StoreError(f"type assertion on {a.subject} needs a class IRI", "kind-mismatch")
        return
    if schema is None:
        return
    pdef = schema.prop(a.predicate)
    if pdef is None:
        if strict:
            raise StoreError(f"unknown predicate {a.predicate}", "unknown-predicate")
        return
    if pdef.kind == OBJECT and not isinstance(a.object, Iri):
        raise StoreError(f"{a.predicate} is an object property; got literal {a.object.lexical!r}",
                         "kind-mismatch")
    if pdef.kind == DATA:
        if not isinstance(a.object, Literal):
            raise StoreError(f"{a.predicate} is a data property; got IRI {a.object}", "kind-mismatch")
        allowed = pdef.datatypes
        ok = a.object.datatype in allowed or (a.object.datatype == "integer" and "decimal" in allowed)
        if allowed and not ok:
            raise StoreError(
                f"{a.predicate} expects {'/'.join(sorted(allowed))}; "
                f"got {a.object.datatype} {a.object.lexical!r}",
                "kind-mismatch")


class Dataset:
    """Set of assertions with subject, predicate and (predicate, object)
    indexes. With a schema attached, assertions are kind-checked; with
    ``strict`` also unknown predicates are rejected."""

    def __init__(self, assertions: Iterable[Assertion] = (), *,
                 schema: SchemaGraph | None = None, strict: bool = False):
        self.schema = schema
        self.strict = strict
        self._all: set[Assertion] = set()
        self._by_s: dict[Iri, set[Assertion]] = defaultdict(set)
        self._by_p: dict[Iri, set[Assertion]] = defaultdict(set)
        self._by_po: dict[tuple[Iri, Term], set[Assertion]] = defaultdict(set)
        self._lock = threading.RLock()
        for a in assertions:
            self.add(a)

    # -- mutation ----------------------------------------------------------

    def add(self, a: Assertion) -> bool:
        """Insert ``a``; returns False when it was already present."""
        a = Assertion(*a)
        check_assertion(self.schema, a, self.strict)
        with self._lock:
            if a in self._all:
                return False
            self._all.add(a)
            self._by_s[a.subject].add(a)
            self._by_p[a.predicate].add(a)
            self._by_po[(a.predicate, a.object)].add(a)
            return True

    def update(self, assertions: Iterable[Assertion]) -> int:
        return sum(1 for a in assertions if self.add(a))

    def retract(self, a: Assertion) -> bool:
        a = Assertion(*a)
        with self._lock:
            if a not in self._all:
                return False
            self._all.discard(a)
            for index, key in ((self._by_s, a.subject), (self._by_p, a.predicate),
                               (self._by_po, (a.predicate, a.object))):
                bucket = index[key]
                bucket.discard(a)
                if not bucket:
                    del index[key]
            return True

    def copy(self) -> "Dataset":
        with self._lock:
            return Dataset(self._all, schema=self.schema, strict=self.strict)

    # -- access ------------------------------------------------------------

    def __len__(self) -> int:
        return len(self._all)

    def __contains__(self, a) -> bool:
        return Assertion(*a) in self._all

    def __iter__(self) -> Iterator[Assertion]:
        return iter(self.sorted())

    def __eq__(self, other) -> bool:
        if not isinstance(other, Dataset):
            return NotImplemented
        return self._all == other._all

    __hash__ = None

    def __repr__(self) -> str:
        return f"Dataset({len(self)} assertions)"

    def assertions(self) -> frozenset[Assertion]:
        with self._lock:
            return frozenset(self._all)

    def sorted(self) -> list[Assertion]:
        with self._lock:
            return sorted(self._all, key=Assertion.sort_key)

    def _candidates(self, p: Pattern) -> Iterable[Assertion]:
        if p.subject is not None:
            return self._by_s.get(p.subject, ())
        if p.predicate is not None and p.object is not None:
            return self._by_po.get((p.predicate, p.object), ())
        if p.predicate is not None:
            return self._by_p.get(p.predicate, ())
        return self._all

    def count(self, p: Pattern) -> int:
        """Exact number of assertions unifying with ``p``."""
        with self._lock:
            if p.subject is None and p.object is None and p.predicate is not None:
                return len(self._by_p.get(p.predicate, ()))
            if p.subject is None and p.predicate is not None:
                return len(self._by_po.get((p.predicate, p.object), ()))
            if p.subject is None and p.predicate is None and p.object is None:
                return len(self._all)
            return sum(1 for a in self._candidates(p) if p.matches(a))

    def iter_match(self, p: Pattern) -> Iterator[Assertion]:
        """Unordered matches; cheaper than :meth:`match` for inner loops."""
        with self._lock:
            found = [a for a in self._candidates(p) if p.matches(a)]
        return iter(found)

    def match(self, p: Pattern) -> list[Assertion]:
        """Assertions unifying with ``p`` in canonical order."""
        return sorted(self.iter_match(p), key=Assertion.sort_key)

    def objects(self, subject: Iri, predicate: Iri) -> list[Term]:
        return [a.object for a in self.match(Pattern(subject, predicate))]

    def subjects(self, predicate: Iri, obj: Term) -> list[Iri]:
        return [a.subject for a in self.match(Pattern(None, predicate, obj))]

    def types_of(self, subject: Iri) -> set[Iri]:
        return {a.object for a in self.iter_match(Pattern(subject, RDF_TYPE))}

    def individuals(self) -> list[Iri]:
        """Every IRI occurring as subject or as object of a non-type assertion."""
        seen: set[Iri] = set(self._by_s)
        for a in self._all:
            if a.predicate != RDF_TYPE and isinstance(a.object, Iri):
                seen.add(a.object)
        return sorted(seen)


def match(ds: Dataset, p: Pattern) -> list[Assertion]:
    return ds.match(p)


def load_dataset(path, *, schema: SchemaGraph | None = None, strict: bool = False) -> Dataset:
    """Read a Turtle-subset file. Schema statements found in the file are
    ignored here; use :func:`pmdt.turtle.parse_turtle` to obtain them."""
    from .turtle import parse_turtle

    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    _, ds = parse_turtle(text, source=str(path), schema=schema, strict=strict)
    return ds


def export_dataset(ds: Dataset, path, *, prefixes=None) -> None:
    from .turtle import serialize_turtle

    text = serialize_turtle(None, ds, prefixes=prefixes)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
