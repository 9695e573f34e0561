"""Canonical encoding of messages between the coordinator and sites.

Byte layout of one message::

    +----------------------+------------------------------------------+
    | length: uint32 (BE)  | body: UTF-8 JSON, ``length`` bytes        |
    +----------------------+------------------------------------------+

The body is serialized with sorted keys, no insignificant whitespace and
non-ASCII characters kept as UTF-8. Terms are written in N-Triples form
(``<iri>``, ``"lexical"^^<datatype>``, bare numbers and booleans);
variables are written ``?name``.

Request body::

    {"direction": "request", "site": S, "group": G, "role": R, "execution": N,
     "patterns": [[s, p, o, [class, ...] | null], ...],
     "filters": [[left, op, right], ...], "vars": [name, ...]}

Response body::

    {"direction": "response", "site": S, "group": G, "status": "ok" | "denied",
     "vars": [name, ...], "rows": [[term, ...], ...]}

Response rows are sorted canonically, so equal binding sets have equal bytes.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from typing import Sequence

from ..query.ast import FilterExpr, TriplePattern, Var
from ..query.results import BindingSet, row_key
from ..terms import Iri, PrefixMap, Term
from ..turtle import format_term, parse_term

_BARE = PrefixMap(defaults=False)
_HEADER = struct.Struct(">I")


def encode_slot(slot) -> str:
    if isinstance(slot, Var):
        return str(slot)
    return format_term(slot, _BARE)


def decode_slot(text: str):
    if text.startswith("?"):
        return Var(text[1:])
    return parse_term(text, _BARE)


def frame(body: dict) -> bytes:
    data = json.dumps(body, sort_keys=True, separators=(",", ":"), ensure_ascii=False).encode("utf-8")
    return _HEADER.pack(len(data)) + data


def unframe(data: bytes) -> dict:
    if len(data) < _HEADER.size:
        raise ValueError("truncated message header")
    (length,) = _HEADER.unpack_from(data)
    body = data[_HEADER.size:]
    if len(body) != length:
        raise ValueError(f"message length {len(body)} does not match header {length}")
    return json.loads(body.decode("utf-8"))


@dataclass(frozen=True)
class SubQuery:
    group: int
    role: str
    patterns: tuple
    filters: tuple
    vars: tuple  # Var, in the order the coordinator wants them
    execution: int = 0


@dataclass(frozen=True)
class SubResult:
    group: int
    status: str
    bindings: BindingSet


@dataclass(frozen=True)
class WireMessage:
    direction: str
    site_id: str
    payload: object  # SubQuery | SubResult
    bytes: bytes

    def body(self) -> dict:
        return unframe(self.bytes)


def encode_request(site_id: str, q: SubQuery) -> WireMessage:
    body = {
        "direction": "request", "site": site_id, "group": q.group, "role": q.role,
        "patterns": [[encode_slot(p.subject), encode_slot(p.predicate), encode_slot(p.object),
                      None if p.type_set is None else sorted(encode_slot(c) for c in p.type_set)]
                     for p in q.patterns],
        "filters": [[encode_slot(f.left), f.op, encode_slot(f.right)] for f in q.filters],
        "vars": [v.name for v in q.vars], "execution": q.execution,
    }
    return WireMessage("request", site_id, q, frame(body))


def decode_request(data: bytes) -> tuple[str, SubQuery]:
    body = unframe(data)
    if body.get("direction") != "request":
        raise ValueError("not a request message")
    patterns = []
    for s, p, o, ts in body["patterns"]:
        patterns.append(TriplePattern(decode_slot(s), decode_slot(p), decode_slot(o),
                                      None if ts is None else frozenset(Iri(c[1:-1]) for c in ts)))
    filters = tuple(FilterExpr(decode_slot(l), op, decode_slot(r)) for l, op, r in body["filters"])
    return body["site"], SubQuery(body["group"], body["role"], tuple(patterns), filters,
                                  tuple(Var(v) for v in body["vars"]), body.get("execution", 0))


def encode_response(site_id: str, group: int, status: str, columns: Sequence[str],
                    rows: Sequence[Sequence[Term]]) -> WireMessage:
    rows = sorted({tuple(r) for r in rows}, key=row_key)
    body = {
        "direction": "response", "site": site_id, "group": group, "status": status,
        "vars": list(columns), "rows": [[encode_slot(t) for t in r] for r in rows],
    }
    return WireMessage("response", site_id, SubResult(group, status, BindingSet(columns, rows)), frame(body))


def decode_response(data: bytes) -> tuple[str, SubResult]:
    body = unframe(data)
    if body.get("direction") != "response":
        raise ValueError("not a response message")
    rows = tuple(tuple(decode_slot(t) for t in r) for r in body["rows"])
    return body["site"], SubResult(body["group"], body["status"], BindingSet(tuple(body["vars"]), rows))
