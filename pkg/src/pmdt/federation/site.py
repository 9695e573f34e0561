"""A simulated hospital site: local tables behind a message boundary.

The site receives encoded sub-queries, applies its own access policies and
patient consents, runs the sub-query as a relational plan over its tables
and answers with an encoded binding set. Nothing else leaves the site.
"""

from __future__ import annotations

import datetime as _dt
import threading
import time
from dataclasses import dataclass
from typing import Iterable

from ..errors import FederationError
from ..query.ast import TriplePattern, Var
from ..reasoner import SubsumptionClosure
from ..schema import OBJECT, SchemaGraph
from ..terms import RDF_TYPE, Iri, PrefixMap, pmdt
from .localplan import LocalPlan, execute_plan, translate_to_local_plan
from .mapping import SiteDescriptor, Table, check_mapping, load_table
from .wire import decode_request, encode_response

PATIENT_DATA = pmdt("PatientData")
AUDIT_EPOCH = _dt.datetime(2025, 1, 1, tzinfo=_dt.timezone.utc)
ACTIONS = ("subquery", "consent-exclusion", "policy-denial")


@dataclass(frozen=True)
class AuditEntry:
    timestamp: str
    site_id: str
    role: str
    action: str
    detail: str

    def line(self) -> str:
        return "\t".join((self.timestamp, self.site_id, self.role, self.action, self.detail))


def pattern_scope(p: TriplePattern, schema: SchemaGraph, closure: SubsumptionClosure) -> frozenset | None:
    """Classes and properties a pattern can reveal; None means any term."""
    if isinstance(p.predicate, Var):
        return None
    if p.predicate == RDF_TYPE:
        if not isinstance(p.object, Iri):
            return None
        classes = p.type_set or {p.object}
        out = set()
        for c in classes:
            if c in closure:
                out |= closure.ancestors(c) | closure.descendants(c)
            else:
                out.add(c)
        return frozenset(out)
    out = {p.predicate}
    pdef = schema.prop(p.predicate)
    if pdef is not None:
        ends = set(pdef.domain) | (set(pdef.range) if pdef.kind == OBJECT else set())
        for c in ends:
            if c in closure:
                out |= closure.ancestors(c) | closure.descendants(c)
    return frozenset(out)


class Site:
    def __init__(self, desc: SiteDescriptor, schema: SchemaGraph, closure: SubsumptionClosure):
        names = [t.table_name for t in desc.tables]
        dupes = sorted({n for n in names if names.count(n) > 1})
        if dupes:
            raise FederationError(f"site {desc.site_id}: duplicate table name(s) {', '.join(dupes)}",
                                  "mapping-schema-mismatch")
        for mapping in desc.tables:
            check_mapping(mapping, schema)
        for rule in desc.policies:
            for term in rule.scope:
                if term not in schema.classes and term not in schema.properties:
                    raise FederationError(f"site {desc.site_id}: policy scope {term} is not a schema term",
                                          "mapping-schema-mismatch")
        for c in desc.consents:
            if c.data_category not in closure or not closure.is_subclass(c.data_category, PATIENT_DATA):
                raise FederationError(f"site {desc.site_id}: consent category {c.data_category} is not "
                                      "a kind of PatientData", "mapping-schema-mismatch")
        self.desc = desc
        self.schema = schema
        self.closure = closure
        self.tables: dict[str, Table] = {m.table_name: load_table(desc, m) for m in desc.tables}
        self.keyed = frozenset(n for n, t in self.tables.items() if t.subject_is_key)
        self.audit: list[AuditEntry] = []
        self._lock = threading.Lock()
        self._clock = 0
        self._visible, self._excluded, self._hidden_by_category = self._consent_view()
        # categories whose hidden individuals each table names, as subject or object
        self._mentions: dict[str, set[Iri]] = {}
        for name, table in self.tables.items():
            cats = self._mentions.setdefault(name, set())
            for category, hidden in self._hidden_by_category.items():
                if table.mapping.row_class == category or self._scan_mentions(table, hidden):
                    cats.add(category)
        self._logged: set[tuple[int, Iri]] = set()

    @property
    def site_id(self) -> str:
        return self.desc.site_id

    @property
    def roles(self) -> set[str]:
        return {r.role for r in self.desc.policies}

    # -- consent ------------------------------------------------------------

    def _consent_view(self):
        """Visible row indices per table, excluded individuals, and the
        excluded individuals per data category."""
        visible: dict[str, list[int]] = {}
        excluded: set[Iri] = set()
        by_category: dict[Iri, set[Iri]] = {}
        for name, table in self.tables.items():
            m = table.mapping
            is_patient_data = self.closure.is_subclass(m.row_class, PATIENT_DATA)
            if not is_patient_data:
                visible[name] = list(range(len(table.rows)))
                continue
            covering = self.closure.ancestors(m.row_class)
            keep = []
            for i, row in enumerate(table.rows):
                owner = m.patient_template.expand(row) if m.patient_template is not None else None
                records = [c for c in self.desc.consents
                           if c.patient == owner and c.data_category in covering]
                if owner is not None and records and all(c.granted for c in records):
                    keep.append(i)
                else:
                    subject = m.iri_template.expand(row)
                    excluded.add(subject)
                    by_category.setdefault(m.row_class, set()).add(subject)
            visible[name] = keep
        # an individual hidden through one table is hidden everywhere at this site
        for name, table in self.tables.items():
            template = table.mapping.iri_template
            visible[name] = [i for i in visible[name] if template.expand(table.rows[i]) not in excluded]
        return visible, frozenset(excluded), by_category

    # -- policy ---------------------------------------------------------------

    def denying_rules(self, role: str, patterns: Iterable[TriplePattern]):
        denies = [r for r in self.desc.policies if r.role == role and r.effect == "deny"]
        hits = []
        for rule in denies:
            for p in patterns:
                scope = pattern_scope(p, self.schema, self.closure)
                if scope is None or scope & rule.scope:
                    hits.append(rule)
                    break
        return hits

    # -- audit ----------------------------------------------------------------

    def _log(self, role: str, action: str, detail: str) -> None:
        # caller holds the lock; timestamps are a per-site logical clock
        stamp = AUDIT_EPOCH + _dt.timedelta(seconds=self._clock)
        self._clock += 1
        self.audit.append(AuditEntry(stamp.strftime("%Y-%m-%dT%H:%M:%SZ"), self.site_id, role, action, detail))

    # -- request handling -------------------------------------------------------

    def local_plan(self, patterns, filters, project) -> LocalPlan:
        return translate_to_local_plan(patterns, filters, project, self.desc.tables, self.keyed)

    def handle(self, request: bytes) -> bytes:
        """Answer one encoded sub-query with one encoded response."""
        site_id, q = decode_request(request)
        if site_id != self.site_id:
            raise FederationError(f"request for {site_id} delivered to {self.site_id}", "site-unavailable")
        if not self.desc.available:
            raise FederationError(f"site {self.site_id} is unavailable", "site-unavailable")
        if self.desc.latency_ms:
            time.sleep(self.desc.latency_ms / 1000.0)
        columns = [v.name for v in q.vars]
        with self._lock:
            denied = self.denying_rules(q.role, q.patterns)
            if denied:
                pm = PrefixMap()
                scope = sorted({pm.compact(t) for r in denied for t in r.scope})
                self._log(q.role, "policy-denial", f"group {q.group} denied by scope {' '.join(scope)}")
                return encode_response(self.site_id, q.group, "denied", columns, []).bytes
            plan = self.local_plan(q.patterns, q.filters, q.vars)
            rows = execute_plan(plan, self.tables, self._visible, self._excluded)
            touched = {s.table for s in plan.scans()}
            self._log_exclusions(q, touched)
            self._log(q.role, "subquery",
                      f"group {q.group}: {len(q.patterns)} pattern(s), {len(rows)} row(s) returned")
            return encode_response(self.site_id, q.group, "ok", columns, rows).bytes

    def _log_exclusions(self, q, touched: set[str]) -> None:
        pm = PrefixMap()
        relevant = set().union(*(self._mentions[t] for t in touched)) if touched else set()
        for category in sorted(relevant):
            key = (q.execution, category)
            if key not in self._logged:
                self._logged.add(key)
                hidden = self._hidden_by_category[category]
                self._log(q.role, "consent-exclusion",
                          f"{pm.compact(category)}: {len(hidden)} individual(s) withheld")

    @staticmethod
    def _scan_mentions(table: Table, hidden: frozenset) -> bool:
        m = table.mapping
        for row in table.rows:
            for col in m.columns:
                if col.template is not None and col.template.expand(row) in hidden:
                    return True
        return False
