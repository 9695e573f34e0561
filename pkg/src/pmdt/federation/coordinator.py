"""The federation coordinator: site registry, routing and aggregation."""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Sequence

from ..errors import FederationError
from ..query.ast import QueryAst, Var
from ..query.engine import filter_holds, finalize, rewrite_with_subsumption
from ..query.results import BindingSet, row_key
from ..reasoner import SubsumptionClosure, classify
from ..schema import SchemaGraph
from ..terms import PrefixMap
from ..vocabulary import bootstrap_pmdt_schema
from .mapping import SiteDescriptor, load_site_descriptor
from .planner import CapabilityIndex, FederatedPlan, decompose, join_order
from .site import AuditEntry, Site
from .wire import SubQuery, WireMessage, decode_response, encode_request

# (group, site id, request message, response bytes)
Exchange = tuple


@dataclass(frozen=True)
class FederatedResult:
    bindings: BindingSet
    audit: tuple
    wire: tuple
    plan: FederatedPlan
    join_order: tuple


class Federation:
    """Sites registered against one global schema."""

    def __init__(self, schema: SchemaGraph | None = None, closure: SubsumptionClosure | None = None):
        self.schema = schema if schema is not None else bootstrap_pmdt_schema()
        self.closure = closure if closure is not None else classify(self.schema)
        self.sites: dict[str, Site] = {}
        self.capabilities = CapabilityIndex()
        self._executions = 0

    def register_site(self, desc: SiteDescriptor) -> "Federation":
        if desc.site_id in self.sites:
            raise FederationError(f"site {desc.site_id} is already registered", "duplicate-site")
        site = Site(desc, self.schema, self.closure)
        self.sites[desc.site_id] = site
        for mapping in desc.tables:
            self.capabilities.add_table(desc.site_id, mapping, len(site.tables[mapping.table_name]), self.closure)
        return self

    @property
    def roles(self) -> set[str]:
        return set().union(*(s.roles for s in self.sites.values())) if self.sites else set()

    @property
    def audit_log(self) -> list[AuditEntry]:
        return [e for sid in sorted(self.sites) for e in self.sites[sid].audit]

    def plan(self, ast: QueryAst) -> FederatedPlan:
        return decompose(rewrite_with_subsumption(ast, self.closure), self.capabilities)

    def execute(self, ast: QueryAst, role: str, *,
                response_order: Callable[[list], list] | None = None) -> FederatedResult:
        """Run ``ast`` across the sites on behalf of ``role``.

        ``response_order`` may permute the responses as they arrive; the
        result does not depend on it.
        """
        roles = self.roles
        if roles and role not in roles:
            raise FederationError(f"unknown requester role {role!r}; known roles: {', '.join(sorted(roles))}",
                                  "unknown-role")
        plan = self.plan(ast)
        self._executions += 1
        marks = {sid: len(s.audit) for sid, s in self.sites.items()}

        by_site: dict[str, list[WireMessage]] = {}
        for g, group in enumerate(plan.groups):
            q = SubQuery(g, role, plan.group_patterns(g), group.filters, plan.requested[g], self._executions)
            for sid in group.sites:
                by_site.setdefault(sid, []).append(encode_request(sid, q))

        exchanges = self._dispatch(by_site)
        if response_order is not None:
            exchanges = list(response_order(list(exchanges)))
        exchanges.sort(key=lambda e: (e[0], e[1]))

        wire: list[WireMessage] = []
        partial: dict[int, set] = {g: set() for g in range(len(plan.groups))}
        answered: dict[int, int] = {g: 0 for g in range(len(plan.groups))}
        for g, sid, request, response in exchanges:
            site_id, result = decode_response(response)
            wire.append(request)
            wire.append(WireMessage("response", site_id, result, response))
            if result.status == "ok":
                answered[g] += 1
                partial[g] |= set(result.bindings.rows)
        for g in range(len(plan.groups)):
            if not answered[g]:
                raise FederationError(
                    f"policy-denied: every site holding group {g} ({len(plan.groups[g].patterns)} pattern(s)) "
                    f"refused role {role!r}; the query cannot be answered", "policy-denied")

        sizes = {g: len(rows) for g, rows in partial.items()}
        order = join_order(sizes, plan.requested)
        solutions = self._join(plan, partial, order)
        if plan.residual_filters:
            solutions = [b for b in solutions if all(filter_holds(f, b) for f in plan.residual_filters)]
        bindings = finalize(plan.ast, solutions)
        audit = tuple(e for sid in sorted(self.sites) for e in self.sites[sid].audit[marks[sid]:])
        return FederatedResult(bindings, audit, tuple(wire), plan, tuple(order))

    def _dispatch(self, by_site: dict[str, list[WireMessage]]) -> list[Exchange]:
        """Send each site its requests. Sites run concurrently; one site
        handles its requests in group order."""
        for sid in sorted(by_site):
            if sid not in self.sites:
                raise FederationError(f"site {sid} is not registered", "site-unavailable")

        def run(sid: str):
            site = self.sites[sid]
            return [(msg.payload.group, sid, msg, site.handle(msg.bytes)) for msg in by_site[sid]]

        out: list[Exchange] = []
        errors: list[tuple[str, Exception]] = []
        if not by_site:
            return out
        with ThreadPoolExecutor(max_workers=len(by_site)) as pool:
            futures = {pool.submit(run, sid): sid for sid in sorted(by_site)}
            for fut in as_completed(futures):
                try:
                    out.extend(fut.result())
                except FederationError as exc:
                    errors.append((futures[fut], exc))
        if errors:
            raise sorted(errors, key=lambda e: e[0])[0][1]
        return out

    @staticmethod
    def _join(plan: FederatedPlan, partial: dict[int, set], order: Sequence[int]) -> list[dict]:
        cols: list[Var] = []
        rows: list[tuple] = [()]
        for g in order:
            gvars = list(plan.requested[g])
            shared = [v for v in gvars if v in cols]
            extra = [v for v in gvars if v not in cols]
            li = [cols.index(v) for v in shared]
            ri = [gvars.index(v) for v in shared]
            ei = [gvars.index(v) for v in extra]
            index: dict[tuple, list[tuple]] = {}
            for r in sorted(partial[g], key=row_key):
                index.setdefault(tuple(r[i] for i in ri), []).append(r)
            rows = [l + tuple(r[i] for i in ei) for l in rows for r in index.get(tuple(l[i] for i in li), ())]
            cols += extra
            if not rows:
                break
        return [dict(zip(cols, r)) for r in rows]


def execute_federated(fed: Federation, ast: QueryAst, role: str, **kwargs):
    """(BindingSet, audit entries, wire messages) for ``ast``."""
    res = fed.execute(ast, role, **kwargs)
    return res.bindings, list(res.audit), list(res.wire)


def load_federation(config_path, *, schema: SchemaGraph | None = None,
                    prefixes: PrefixMap | None = None) -> Federation:
    """Build a federation from a JSON config ``{"sites": [descriptor paths]}``."""
    path = Path(config_path)
    try:
        with open(path, encoding="utf-8") as fh:
            config = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise FederationError(f"cannot read federation config {path}: {exc}", "mapping-schema-mismatch") from None
    fed = Federation(schema)
    for entry in config.get("sites", []):
        fed.register_site(load_site_descriptor(path.parent / entry, prefixes))
    return fed


def format_audit(entries) -> str:
    return "".join(e.line() + "\n" for e in entries)


def format_wire(messages) -> str:
    """One line per message: direction, site, byte length, body."""
    lines = []
    for m in messages:
        body = m.bytes[4:].decode("utf-8")
        lines.append(f"{m.direction}\t{m.site_id}\t{len(m.bytes)}\t{body}")
    return "\n".join(lines) + ("\n" if lines else "")
