"""Site descriptors, table-to-ontology mappings and CSV lifting."""

from __future__ import annotations

import csv
import json
import os
import re
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Mapping, Sequence
from urllib.parse import quote, unquote

from ..errors import FederationError, LiteralError, PmdtError
from ..schema import DATA, OBJECT, SchemaGraph
from ..store import Assertion, Dataset
from ..terms import DATATYPES, RDF_TYPE, Iri, Literal, PrefixMap

_PLACEHOLDER = re.compile(r"\{([^{}]+)\}")
_IRI_SAFE = "/:#-._~!$&'()*+,;=@%"


@dataclass(frozen=True)
class Template:
    """IRI template such as ``https://.../patient/{patient_id}``."""

    text: str

    @cached_property
    def placeholders(self) -> tuple[str, ...]:
        return tuple(_PLACEHOLDER.findall(self.text))

    def expand(self, row: Mapping[str, str]) -> Iri | None:
        """The IRI for ``row``; None when a placeholder value is empty."""
        values = {}
        for name in self.placeholders:
            value = row.get(name)
            if value is None or value == "":
                return None
            values[name] = quote(value, safe=_IRI_SAFE)
        return Iri(_PLACEHOLDER.sub(lambda m: values[m.group(1)], self.text))

    def invert(self, iri: Iri) -> dict[str, str] | None:
        """Placeholder values that expand to ``iri``, or None."""
        pattern = "^"
        pos = 0
        seen = set()
        for m in _PLACEHOLDER.finditer(self.text):
            pattern += re.escape(self.text[pos:m.start()])
            name = m.group(1)
            if name in seen:
                pattern += f"(?P={_group(name, self.placeholders)})"
            else:
                pattern += f"(?P<{_group(name, self.placeholders)}>.+?)"
                seen.add(name)
            pos = m.end()
        pattern += re.escape(self.text[pos:]) + "$"
        m = re.match(pattern, iri.value)
        if m is None:
            return None
        out = {name: unquote(m.group(_group(name, self.placeholders))) for name in seen}
        if self.expand(out) != iri:
            return None
        return out


def _group(name: str, names: Sequence[str]) -> str:
    return f"g{list(dict.fromkeys(names)).index(name)}"


@dataclass(frozen=True)
class ColumnMapping:
    column: str
    property: Iri
    datatype: str | None = None
    template: Template | None = None

    def __post_init__(self):
        if (self.datatype is None) == (self.template is None):
            raise FederationError(f"column {self.column!r} needs exactly one of datatype or iriTemplate",
                                  "mapping-schema-mismatch")
        if self.datatype is not None and self.datatype not in DATATYPES:
            raise FederationError(f"column {self.column!r}: unsupported datatype {self.datatype!r}",
                                  "mapping-schema-mismatch")


@dataclass(frozen=True)
class TableMapping:
    table_name: str
    csv_path: str
    row_class: Iri
    iri_template: Template
    columns: tuple = ()
    # owning patient of each row, used only for consent checks; never lifted
    patient_template: Template | None = None


@dataclass(frozen=True)
class ConsentRecord:
    patient: Iri
    data_category: Iri
    granted: bool


@dataclass(frozen=True)
class AccessPolicyRule:
    role: str
    effect: str
    scope: frozenset

    def __post_init__(self):
        if self.effect not in ("allow", "deny"):
            raise FederationError(f"policy effect must be allow or deny, got {self.effect!r}",
                                  "mapping-schema-mismatch")
        object.__setattr__(self, "scope", frozenset(self.scope))


@dataclass(frozen=True)
class SiteDescriptor:
    site_id: str
    tables: tuple = ()
    policies: tuple = ()
    consents: tuple = ()
    available: bool = True
    latency_ms: int = 0
    base_dir: str = "."

    def csv_file(self, table: TableMapping) -> Path:
        return Path(self.base_dir, table.csv_path)

    def table(self, name: str) -> TableMapping:
        for t in self.tables:
            if t.table_name == name:
                return t
        raise KeyError(name)


# -- JSON -------------------------------------------------------------------


def _resolve_template(text: str, pm: PrefixMap) -> Template:
    if text.startswith("<") and text.endswith(">"):
        return Template(text[1:-1])
    prefix, sep, rest = text.partition(":")
    if sep and prefix in pm and not rest.startswith("//"):
        return Template(pm[prefix] + rest)
    return Template(text)


def descriptor_from_dict(data: Mapping, *, base_dir: str = ".", prefixes: PrefixMap | None = None
                         ) -> SiteDescriptor:
    pm = prefixes or PrefixMap()
    try:
        tables = []
        for t in data.get("tables", []):
            cols = []
            for c in t.get("columns", []):
                tmpl = c.get("iriTemplate")
                cols.append(ColumnMapping(
                    c["column"], pm.resolve(c["property"]), c.get("datatype"),
                    _resolve_template(tmpl, pm) if tmpl is not None else None))
            ptmpl = t.get("patientTemplate")
            tables.append(TableMapping(
                t["tableName"], t["csvPath"], pm.resolve(t["rowClass"]),
                _resolve_template(t["iriTemplate"], pm), tuple(cols),
                _resolve_template(ptmpl, pm) if ptmpl else None))
        policies = tuple(
            AccessPolicyRule(p["role"], p["effect"], frozenset(pm.resolve(s) for s in p["scope"]))
            for p in data.get("policies", []))
        consents = tuple(
            ConsentRecord(pm.resolve(c["patient"]), pm.resolve(c["dataCategory"]), bool(c["granted"]))
            for c in data.get("consents", []))
        sim = data.get("simulation", {})
        return SiteDescriptor(data["siteId"], tuple(tables), policies, consents,
                              bool(sim.get("available", True)), int(sim.get("latencyMs", 0)), base_dir)
    except KeyError as exc:
        raise FederationError(f"site descriptor lacks field {exc.args[0]!r}", "mapping-schema-mismatch") from None
    except FederationError:
        raise
    except PmdtError as exc:
        raise FederationError(str(exc), "mapping-schema-mismatch") from None


def load_site_descriptor(path, prefixes: PrefixMap | None = None) -> SiteDescriptor:
    path = Path(path)
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    return descriptor_from_dict(data, base_dir=str(path.parent), prefixes=prefixes)


def descriptor_to_dict(desc: SiteDescriptor, prefixes: PrefixMap | None = None) -> dict:
    pm = prefixes or PrefixMap()

    def tmpl(t: Template) -> str:
        for label, ns in pm.items():
            if t.text.startswith(ns):
                return f"{label}:{t.text[len(ns):]}"
        return f"<{t.text}>"

    out = {
        "siteId": desc.site_id,
        "tables": [],
        "policies": [{"role": p.role, "effect": p.effect,
                      "scope": sorted(pm.compact(s) for s in p.scope)} for p in desc.policies],
        "consents": [{"patient": pm.compact(c.patient), "dataCategory": pm.compact(c.data_category),
                      "granted": c.granted} for c in desc.consents],
    }
    for t in desc.tables:
        entry = {"tableName": t.table_name, "csvPath": t.csv_path, "rowClass": pm.compact(t.row_class),
                 "iriTemplate": tmpl(t.iri_template)}
        if t.patient_template is not None:
            entry["patientTemplate"] = tmpl(t.patient_template)
        entry["columns"] = []
        for c in t.columns:
            col = {"column": c.column, "property": pm.compact(c.property)}
            if c.datatype is not None:
                col["datatype"] = c.datatype
            else:
                col["iriTemplate"] = tmpl(c.template)
            entry["columns"].append(col)
        out["tables"].append(entry)
    if not desc.available or desc.latency_ms:
        out["simulation"] = {"available": desc.available, "latencyMs": desc.latency_ms}
    return out


# -- CSV ----------------------------------------------------------------------


@dataclass
class Table:
    """A loaded CSV table: raw string cells plus typed literals for
    datatype-mapped columns."""

    mapping: TableMapping
    header: tuple
    rows: list = field(default_factory=list)  # list[dict[str, str]]
    typed: list = field(default_factory=list)  # list[dict[str, Literal]]

    def __len__(self) -> int:
        return len(self.rows)

    @cached_property
    def subject_is_key(self) -> bool:
        template = self.mapping.iri_template
        subjects = [template.expand(r) for r in self.rows]
        return len(set(subjects)) == len(subjects)


def check_mapping(mapping: TableMapping, schema: SchemaGraph) -> None:
    if mapping.row_class not in schema.classes:
        raise FederationError(f"table {mapping.table_name}: row class {mapping.row_class} is not in the schema",
                              "mapping-schema-mismatch")
    for c in mapping.columns:
        pdef = schema.prop(c.property)
        if pdef is None:
            raise FederationError(f"table {mapping.table_name}, column {c.column}: property {c.property} "
                                  "is not in the schema", "mapping-schema-mismatch")
        if c.datatype is not None:
            allowed = pdef.datatypes
            if pdef.kind != DATA or (allowed and c.datatype not in allowed
                                     and not (c.datatype == "integer" and "decimal" in allowed)):
                raise FederationError(
                    f"table {mapping.table_name}, column {c.column}: {c.property} is not a "
                    f"{c.datatype} data property", "mapping-schema-mismatch")
        elif pdef.kind != OBJECT:
            raise FederationError(f"table {mapping.table_name}, column {c.column}: {c.property} is a data "
                                  "property but the column maps to IRIs", "mapping-schema-mismatch")


def load_table(desc: SiteDescriptor, mapping: TableMapping) -> Table:
    path = desc.csv_file(mapping)
    try:
        with open(path, encoding="utf-8", newline="") as fh:
            reader = csv.reader(fh)
            records = list(reader)
    except OSError as exc:
        raise FederationError(f"table {mapping.table_name}: cannot read {path}: {exc}", "csv-type-error") from None
    header = tuple(records[0]) if records else ()
    table = Table(mapping, header)
    needed = set(mapping.iri_template.placeholders)
    if mapping.patient_template is not None:
        needed |= set(mapping.patient_template.placeholders)
    for c in mapping.columns:
        needed.add(c.column)
        if c.template is not None:
            needed |= set(c.template.placeholders)
    missing = sorted(n for n in needed if n not in header)
    if missing and records:
        raise FederationError(f"table {mapping.table_name}: template or mapping names missing column(s) "
                              f"{', '.join(missing)}", "template-placeholder-missing")
    for line_no, rec in enumerate(records[1:], start=2):
        if len(rec) != len(header):
            raise FederationError(f"{path}: line {line_no} has {len(rec)} fields, header has {len(header)}",
                                  "csv-type-error")
        row = dict(zip(header, rec))
        typed = {}
        for c in mapping.columns:
            cell = row[c.column]
            if c.datatype is not None and cell != "":
                try:
                    typed[c.column] = Literal(cell, c.datatype)
                except LiteralError:
                    raise FederationError(
                        f"{path}: line {line_no}, column {c.column!r}: {cell!r} is not a valid {c.datatype}",
                        "csv-type-error") from None
        if mapping.iri_template.expand(row) is None:
            raise FederationError(f"{path}: line {line_no}: subject template {mapping.iri_template.text} "
                                  "has an empty placeholder", "template-placeholder-missing")
        table.rows.append(row)
        table.typed.append(typed)
    return table


def lift_table(table: Table) -> list[Assertion]:
    m = table.mapping
    out = []
    for row, typed in zip(table.rows, table.typed):
        subject = m.iri_template.expand(row)
        out.append(Assertion(subject, RDF_TYPE, m.row_class))
        for c in m.columns:
            if c.datatype is not None:
                lit = typed.get(c.column)
                if lit is not None:
                    out.append(Assertion(subject, c.property, lit))
            else:
                obj = c.template.expand(row)
                if obj is not None and row.get(c.column, "") != "":
                    out.append(Assertion(subject, c.property, obj))
    return out


def lift_site(desc: SiteDescriptor, schema: SchemaGraph | None = None) -> Dataset:
    """Every row as a typed individual plus one assertion per mapped cell."""
    ds = Dataset(schema=schema)
    for mapping in desc.tables:
        ds.update(lift_table(load_table(desc, mapping)))
    return ds


def write_csv(path, header: Sequence[str], rows: Sequence[Sequence[str]]) -> None:
    os.makedirs(os.path.dirname(os.fspath(path)) or ".", exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\r\n")
        writer.writerow(header)
        writer.writerows(rows)
