"""Reader and canonical writer for a Turtle subset.

Supported: ``@prefix`` lines, the ``a`` keyword, absolute and prefixed
IRIs, quoted literals with an optional ``^^`` datatype, bare integers,
decimals and booleans, ``;`` and ``,`` continuations. Blank nodes,
collections and language tags are rejected.

Schema statements (``owl:Class``, ``rdfs:subClassOf``, ``rdfs:domain`` ...)
are split off into a :class:`SchemaGraph` delta; cardinality restrictions
are written as named ``pmdtm:CardinalityRestriction`` individuals so that
no blank nodes are needed.
"""

from __future__ import annotations

import hashlib
import re
from collections import defaultdict
from dataclasses import dataclass
from decimal import Decimal
from typing import Iterable, Mapping

from .errors import LiteralError, StoreError, TurtleSyntaxError, UnknownPrefixError
from .schema import DATA, OBJECT, CardinalityRestriction, ClassDef, PropertyDef, SchemaGraph
from .store import Assertion, Dataset
from .terms import (
    DEFAULT_PREFIXES,
    META,
    OWL,
    RDF_TYPE,
    RDFS,
    XSD,
    Iri,
    Literal,
    PrefixMap,
    Term,
    datatype_from_iri,
    term_key,
)

OWL_CLASS = Iri(OWL + "Class")
OWL_OBJECT_PROPERTY = Iri(OWL + "ObjectProperty")
OWL_DATATYPE_PROPERTY = Iri(OWL + "DatatypeProperty")
OWL_INVERSE_OF = Iri(OWL + "inverseOf")
OWL_DISJOINT_WITH = Iri(OWL + "disjointWith")
RDFS_SUBCLASS_OF = Iri(RDFS + "subClassOf")
RDFS_DOMAIN = Iri(RDFS + "domain")
RDFS_RANGE = Iri(RDFS + "range")
META_RESTRICTION = Iri(META + "CardinalityRestriction")
META_ON_CLASS = Iri(META + "onClass")
META_ON_PROPERTY = Iri(META + "onProperty")
META_MIN_CARD = Iri(META + "minCardinality")
META_MAX_CARD = Iri(META + "maxCardinality")
META_MIN_VALUE = Iri(META + "minValue")
META_MAX_VALUE = Iri(META + "maxValue")

_SCHEMA_TYPES = {OWL_CLASS, OWL_OBJECT_PROPERTY, OWL_DATATYPE_PROPERTY, META_RESTRICTION}

# -- lexer ------------------------------------------------------------------

_TOKEN_SPEC = [
    ("WS", r"[ \t\r]+"),
    ("NL", r"\n"),
    ("COMMENT", r"#[^\n]*"),
    ("PREFIX", r"@prefix\b"),
    ("LANGTAG", r"@[A-Za-z][A-Za-z0-9\-]*"),
    ("IRIREF", r"<[^<>\"{}|^`\\\s]*>"),
    ("STRING", r'"(?:[^"\\\n]|\\.)*"'),
    ("DTYPE", r"\^\^"),
    ("DECIMAL", r"[+-]?\d*\.\d+(?![A-Za-z0-9_:])"),
    ("INTEGER", r"[+-]?\d+(?![A-Za-z0-9_:]|\.\d)"),
    ("BOOLEAN", r"(?:true|false)(?![A-Za-z0-9_:\-])"),
    ("A", r"a(?![A-Za-z0-9_:\-])"),
    ("PNAME", r"(?:[A-Za-z][A-Za-z0-9_\-]*)?:(?:[A-Za-z0-9_](?:[A-Za-z0-9_\-./]*[A-Za-z0-9_\-/])?)?"),
    ("BNODE", r"_:|\[|\(|\]|\)"),
    ("PUNCT", r"[.;,]"),
]
_LEXER = re.compile("|".join(f"(?P<{name}>{rx})" for name, rx in _TOKEN_SPEC))

_ESCAPES = {"t": "\t", "n": "\n", "r": "\r", '"': '"', "\\": "\\", "'": "'", "b": "\b", "f": "\f"}


@dataclass
class Token:
    kind: str
    text: str
    line: int
    col: int


def unescape(body: str) -> str:
    out = []
    i = 0
    while i < len(body):
        ch = body[i]
        if ch != "\\":
            out.append(ch)
            i += 1
            continue
        nxt = body[i + 1]
        if nxt in _ESCAPES:
            out.append(_ESCAPES[nxt])
            i += 2
        elif nxt == "u":
            out.append(chr(int(body[i + 2:i + 6], 16)))
            i += 6
        elif nxt == "U":
            out.append(chr(int(body[i + 2:i + 10], 16)))
            i += 10
        else:
            raise ValueError(f"unknown escape \\{nxt}")
    return "".join(out)


def escape(text: str) -> str:
    return (text.replace("\\", "\\\\").replace('"', '\\"')
            .replace("\n", "\\n").replace("\r", "\\r").replace("\t", "\\t"))


def tokenize(text: str, source: str | None = None) -> list[Token]:
    tokens: list[Token] = []
    line, line_start, pos = 1, 0, 0
    while pos < len(text):
        m = _LEXER.match(text, pos)
        col = pos - line_start + 1
        if m is None:
            raise TurtleSyntaxError(f"unexpected character {text[pos]!r}", line, col, source)
        kind = m.lastgroup
        if kind == "NL":
            line += 1
            line_start = m.end()
        elif kind == "BNODE":
            raise TurtleSyntaxError("blank nodes and collections are not supported", line, col, source)
        elif kind == "LANGTAG":
            raise TurtleSyntaxError("language tags are not supported", line, col, source)
        elif kind not in ("WS", "COMMENT"):
            tokens.append(Token(kind, m.group(), line, col))
        pos = m.end()
    return tokens


# -- terms ------------------------------------------------------------------


def format_term(term: Term, prefixes: PrefixMap) -> str:
    """Turtle-subset text for a single term."""
    if isinstance(term, Iri):
        return prefixes.compact(term)
    dt = term.datatype
    if dt in ("integer", "decimal", "boolean"):
        return term.lexical
    quoted = f'"{escape(term.lexical)}"'
    if dt == "string":
        return quoted
    return f"{quoted}^^{prefixes.compact(Iri(XSD + dt))}"


def parse_term(text: str, prefixes: PrefixMap | None = None) -> Term:
    """Parse the text of a single term as written by :func:`format_term`."""
    prefixes = prefixes or PrefixMap()
    tokens = tokenize(text)
    parser = _Parser(tokens, prefixes, None)
    term = parser.object_term()
    if parser.i != len(tokens):
        tok = tokens[parser.i]
        raise TurtleSyntaxError(f"trailing input {tok.text!r}", tok.line, tok.col)
    return term


class _Parser:
    def __init__(self, tokens: list[Token], prefixes: PrefixMap, source: str | None):
        self.tokens = tokens
        self.i = 0
        self.prefixes = prefixes
        self.source = source

    def peek(self) -> Token | None:
        return self.tokens[self.i] if self.i < len(self.tokens) else None

    def error(self, message: str, tok: Token | None = None):
        tok = tok or self.peek() or (self.tokens[-1] if self.tokens else Token("EOF", "", 1, 1))
        return TurtleSyntaxError(message, tok.line, tok.col, self.source)

    def next(self, expected: str | None = None) -> Token:
        tok = self.peek()
        if tok is None:
            raise self.error("unexpected end of input" + (f", expected {expected}" if expected else ""))
        self.i += 1
        return tok

    def expect_punct(self, ch: str) -> Token:
        tok = self.next(f"'{ch}'")
        if tok.kind != "PUNCT" or tok.text != ch:
            raise self.error(f"expected '{ch}', found {tok.text!r}", tok)
        return tok

    def iri(self, tok: Token) -> Iri:
        try:
            if tok.kind == "IRIREF":
                return Iri(tok.text[1:-1])
            if tok.kind == "PNAME":
                return self.prefixes.resolve(tok.text)
        except UnknownPrefixError as exc:
            raise UnknownPrefixError(exc.prefix, tok.line, tok.col) from None
        except Exception as exc:
            raise self.error(str(exc), tok) from None
        raise self.error(f"expected an IRI, found {tok.text!r}", tok)

    def object_term(self) -> Term:
        tok = self.next("object")
        try:
            if tok.kind in ("IRIREF", "PNAME"):
                return self.iri(tok)
            if tok.kind == "INTEGER":
                return Literal(tok.text, "integer")
            if tok.kind == "DECIMAL":
                return Literal(tok.text, "decimal")
            if tok.kind == "BOOLEAN":
                return Literal(tok.text, "boolean")
            if tok.kind == "STRING":
                lexical = unescape(tok.text[1:-1])
                nxt = self.peek()
                if nxt is not None and nxt.kind == "DTYPE":
                    self.i += 1
                    dtok = self.next("datatype IRI")
                    dt = datatype_from_iri(self.iri(dtok))
                    if dt is None:
                        raise self.error(f"unsupported datatype {dtok.text}", dtok)
                    return Literal(lexical, dt)
                return Literal(lexical, "string")
        except LiteralError as exc:
            raise self.error(str(exc), tok) from None
        except ValueError as exc:
            raise self.error(str(exc), tok) from None
        raise self.error(f"expected an object term, found {tok.text!r}", tok)

    def document(self) -> tuple[list[tuple[Assertion, Token]], dict[str, str]]:
        triples: list[tuple[Assertion, Token]] = []
        declared: dict[str, str] = {}
        while self.peek() is not None:
            tok = self.peek()
            if tok.kind == "PREFIX":
                self.i += 1
                ptok = self.next("prefix label")
                if ptok.kind != "PNAME" or not ptok.text.endswith(":") or ptok.text.count(":") != 1:
                    raise self.error(f"expected 'prefix:' after @prefix, found {ptok.text!r}", ptok)
                itok = self.next("namespace IRI")
                if itok.kind != "IRIREF":
                    raise self.error("expected <namespace> in @prefix", itok)
                label = ptok.text[:-1]
                self.prefixes.bind(label, itok.text[1:-1])
                declared[label] = itok.text[1:-1]
                self.expect_punct(".")
                continue
            stok = self.next("subject")
            if stok.kind not in ("IRIREF", "PNAME"):
                raise self.error(f"expected a subject IRI, found {stok.text!r}", stok)
            subject = self.iri(stok)
            while True:
                vtok = self.next("predicate")
                if vtok.kind == "A":
                    predicate = RDF_TYPE
                elif vtok.kind in ("IRIREF", "PNAME"):
                    predicate = self.iri(vtok)
                else:
                    raise self.error(f"expected a predicate, found {vtok.text!r}", vtok)
                while True:
                    otok = self.peek()
                    obj = self.object_term()
                    triples.append((Assertion(subject, predicate, obj), otok))
                    sep = self.peek()
                    if sep is not None and sep.kind == "PUNCT" and sep.text == ",":
                        self.i += 1
                        continue
                    break
                sep = self.next("'.' or ';'")
                if sep.kind == "PUNCT" and sep.text == ";":
                    nxt = self.peek()
                    if nxt is not None and nxt.kind == "PUNCT" and nxt.text == ".":
                        self.i += 1
                        break
                    continue
                if sep.kind == "PUNCT" and sep.text == ".":
                    break
                raise self.error(f"expected '.', ';' or ',', found {sep.text!r}", sep)
        return triples, declared


# -- schema extraction ------------------------------------------------------


def _split_schema(triples, source):
    """Partition parsed triples into schema statements and instance data."""
    types_by_subject: dict[Iri, set[Iri]] = defaultdict(set)
    for a, _ in triples:
        if a.predicate == RDF_TYPE and a.object in _SCHEMA_TYPES:
            types_by_subject[a.subject].add(a.object)
    schema_predicates = {RDFS_SUBCLASS_OF, RDFS_DOMAIN, RDFS_RANGE, OWL_INVERSE_OF, OWL_DISJOINT_WITH,
                         META_ON_CLASS, META_ON_PROPERTY, META_MIN_CARD, META_MAX_CARD,
                         META_MIN_VALUE, META_MAX_VALUE}
    schema_subjects = set(types_by_subject)
    for a, _ in triples:
        if a.predicate in schema_predicates:
            schema_subjects.add(a.subject)
    schema_triples = [(a, t) for a, t in triples if a.subject in schema_subjects]
    data_triples = [(a, t) for a, t in triples if a.subject not in schema_subjects]
    return types_by_subject, schema_triples, data_triples


def _build_schema(types_by_subject, schema_triples, declared, source) -> SchemaGraph:
    classes: dict[Iri, dict] = {}
    props: dict[Iri, dict] = {}
    restrictions: dict[Iri, dict] = {}
    disjoint: set[tuple[Iri, Iri]] = set()

    def err(msg, tok):
        return TurtleSyntaxError(msg, tok.line, tok.col, source)

    for subj, kinds in types_by_subject.items():
        if len(kinds) > 1:
            raise TurtleSyntaxError(f"{subj} has conflicting schema types", 1, 1, source)
        kind = next(iter(kinds))
        if kind == OWL_CLASS:
            classes[subj] = {"parents": set(), "ann": {}}
        elif kind == META_RESTRICTION:
            restrictions[subj] = {}
        else:
            props[subj] = {"kind": OBJECT if kind == OWL_OBJECT_PROPERTY else DATA,
                           "domain": set(), "range": set(), "inverse": None,
                           "min": None, "max": None, "ann": {}}

    def need_iri(a, tok) -> Iri:
        if not isinstance(a.object, Iri):
            raise err(f"{a.predicate} expects an IRI object", tok)
        return a.object

    def need_number(a, tok):
        if not isinstance(a.object, Literal) or a.object.family != "numeric":
            raise err(f"{a.predicate} expects a number", tok)
        return a.object.value

    for a, tok in schema_triples:
        s, p = a.subject, a.predicate
        if p == RDF_TYPE and a.object in _SCHEMA_TYPES:
            continue
        if p == RDFS_SUBCLASS_OF:
            parent = need_iri(a, tok)
            classes.setdefault(s, {"parents": set(), "ann": {}})["parents"].add(parent)
            classes.setdefault(parent, {"parents": set(), "ann": {}})
        elif p == OWL_DISJOINT_WITH:
            other = need_iri(a, tok)
            disjoint.add((s, other))
            classes.setdefault(s, {"parents": set(), "ann": {}})
            classes.setdefault(other, {"parents": set(), "ann": {}})
        elif s in restrictions:
            r = restrictions[s]
            if p == META_ON_CLASS:
                r["on_class"] = need_iri(a, tok)
            elif p == META_ON_PROPERTY:
                r["on_property"] = need_iri(a, tok)
            elif p == META_MIN_CARD:
                r["min"] = int(need_number(a, tok))
            elif p == META_MAX_CARD:
                r["max"] = int(need_number(a, tok))
            else:
                raise err(f"unexpected predicate {p} on restriction {s}", tok)
        elif p in (RDFS_DOMAIN, RDFS_RANGE, OWL_INVERSE_OF, META_MIN_VALUE, META_MAX_VALUE):
            if s not in props:
                raise err(f"{s} uses {p} but is not declared as a property", tok)
            entry = props[s]
            if p == RDFS_DOMAIN:
                entry["domain"].add(need_iri(a, tok))
            elif p == RDFS_RANGE:
                entry["range"].add(need_iri(a, tok))
            elif p == OWL_INVERSE_OF:
                entry["inverse"] = need_iri(a, tok)
            elif p == META_MIN_VALUE:
                entry["min"] = Decimal(need_number(a, tok))
            else:
                entry["max"] = Decimal(need_number(a, tok))
        else:
            if not isinstance(a.object, Literal) or a.object.datatype != "string":
                raise err(f"unsupported schema statement {p} on {s}", tok)
            target = classes.get(s) or props.get(s)
            if target is None:
                raise err(f"annotation on unknown schema term {s}", tok)
            if p.value in target["ann"]:
                raise err(f"duplicate annotation {p} on {s}", tok)
            target["ann"][p.value] = a.object.lexical

    cdefs = {iri: ClassDef(iri, frozenset(c["parents"]), c["ann"]) for iri, c in classes.items()}
    pdefs = {}
    for iri, e in props.items():
        pdefs[iri] = PropertyDef(iri, e["kind"], frozenset(e["domain"]), frozenset(e["range"]),
                                 e["inverse"], e["min"], e["max"], e["ann"])
    rlist = []
    for iri, r in restrictions.items():
        if "on_class" not in r or "on_property" not in r:
            raise TurtleSyntaxError(f"restriction {iri} lacks onClass/onProperty", 1, 1, source)
        rlist.append(CardinalityRestriction(r["on_class"], r["on_property"], r.get("min", 0), r.get("max")))
    return SchemaGraph(cdefs, pdefs, tuple(rlist), dict(declared), frozenset(disjoint))


def parse_turtle(text: str, *, source: str | None = None, schema: SchemaGraph | None = None,
                 strict: bool = False, prefixes: Mapping[str, str] | None = None
                 ) -> tuple[SchemaGraph, Dataset]:
    """Parse Turtle-subset text into (schema delta, dataset).

    ``schema`` (if given) is attached to the dataset for kind checking.
    """
    pm = PrefixMap(prefixes)
    parser = _Parser(tokenize(text, source), pm, source)
    triples, declared = parser.document()
    types_by_subject, schema_triples, data_triples = _split_schema(triples, source)
    delta = _build_schema(types_by_subject, schema_triples, declared, source)
    ds = Dataset(schema=schema, strict=strict)
    for a, tok in data_triples:
        try:
            ds.add(a)
        except StoreError as exc:
            where = f"{source}:" if source else ""
            raise StoreError(f"{where}{tok.line}:{tok.col}: {exc}", exc.code) from None
    return delta, ds


# -- serialization ----------------------------------------------------------


def restriction_iri(r: CardinalityRestriction) -> Iri:
    key = f"{r.on_class.value} {r.on_property.value} {r.min} {r.max}"
    digest = hashlib.sha1(key.encode("utf-8")).hexdigest()[:12]
    return Iri(f"{META}restriction-{r.on_property.local_name}-{digest}")


def schema_assertions(schema: SchemaGraph) -> list[tuple[int, Assertion]]:
    """Schema content as (section, assertion) pairs; sections order output."""
    out: list[tuple[int, Assertion]] = []
    for cdef in schema.classes.values():
        out.append((0, Assertion(cdef.iri, RDF_TYPE, OWL_CLASS)))
        for parent in cdef.parents:
            out.append((0, Assertion(cdef.iri, RDFS_SUBCLASS_OF, parent)))
        for key, value in cdef.annotations.items():
            out.append((0, Assertion(cdef.iri, Iri(key), Literal(value))))
    for a, b in schema.disjoint_pairs:
        out.append((0, Assertion(a, OWL_DISJOINT_WITH, b)))
    for pdef in schema.properties.values():
        kind = OWL_OBJECT_PROPERTY if pdef.kind == OBJECT else OWL_DATATYPE_PROPERTY
        out.append((1, Assertion(pdef.iri, RDF_TYPE, kind)))
        out.extend((1, Assertion(pdef.iri, RDFS_DOMAIN, d)) for d in pdef.domain)
        out.extend((1, Assertion(pdef.iri, RDFS_RANGE, r)) for r in pdef.range)
        if pdef.inverse is not None:
            out.append((1, Assertion(pdef.iri, OWL_INVERSE_OF, pdef.inverse)))
        if pdef.min_value is not None:
            out.append((1, Assertion(pdef.iri, META_MIN_VALUE, _number(pdef.min_value))))
        if pdef.max_value is not None:
            out.append((1, Assertion(pdef.iri, META_MAX_VALUE, _number(pdef.max_value))))
        for key, value in pdef.annotations.items():
            out.append((1, Assertion(pdef.iri, Iri(key), Literal(value))))
    for r in schema.restrictions:
        node = restriction_iri(r)
        out.append((2, Assertion(node, RDF_TYPE, META_RESTRICTION)))
        out.append((2, Assertion(node, META_ON_CLASS, r.on_class)))
        out.append((2, Assertion(node, META_ON_PROPERTY, r.on_property)))
        out.append((2, Assertion(node, META_MIN_CARD, Literal(str(r.min), "integer"))))
        if r.max is not None:
            out.append((2, Assertion(node, META_MAX_CARD, Literal(str(r.max), "integer"))))
    return out


def _number(value: Decimal) -> Literal:
    if value == value.to_integral_value():
        return Literal(str(int(value)), "integer")
    return Literal(str(value), "decimal")


def _statement_key(a: Assertion):
    # rdf:type first, then predicates by resolved IRI, then objects canonically
    return (a.subject.value, a.predicate != RDF_TYPE, a.predicate.value, term_key(a.object))


def serialize_turtle(schema: SchemaGraph | None, instances: Dataset | Iterable[Assertion] | None = None,
                     *, prefixes: Mapping[str, str] | None = None) -> str:
    """Canonical text: sorted prefixes, then schema classes, properties and
    restrictions, then instance data; one statement per line, subjects and
    predicates sorted."""
    if prefixes is None:
        prefixes = dict(schema.prefixes) if schema is not None else dict(DEFAULT_PREFIXES)
    pm = PrefixMap(prefixes, defaults=False)
    lines = [f"@prefix {label}: <{ns}> ." for label, ns in pm.items()]
    sections: list[list[Assertion]] = [[], [], [], []]
    if schema is not None:
        for section, a in schema_assertions(schema):
            sections[section].append(a)
    if instances is not None:
        sections[3].extend(instances)
    for body in sections:
        if not body:
            continue
        lines.append("")
        for a in sorted(body, key=_statement_key):
            pred = "a" if a.predicate == RDF_TYPE else pm.compact(a.predicate)
            lines.append(f"{pm.compact(a.subject)} {pred} {format_term(a.object, pm)} .")
    return "\n".join(lines) + "\n"
