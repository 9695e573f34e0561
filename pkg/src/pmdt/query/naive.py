"""Reference evaluator: nested loops over full scans, filters at the end.

Deliberately shares no matching, planning or comparison code with
:mod:`pmdt.query.engine`; it is the oracle the engine, the federation and
the golden query results are checked against.
"""

from __future__ import annotations

from decimal import Decimal

from ..errors import EvaluationError
from ..schema import SchemaGraph
from ..store import Dataset
from ..terms import RDF_TYPE, Iri, Literal, term_key
from .ast import QueryAst, Var
from .results import BindingSet

_NUMERIC = {"integer", "decimal"}


def _ancestors_bfs(schema: SchemaGraph) -> dict[Iri, set[Iri]]:
    out: dict[Iri, set[Iri]] = {}
    for cls in schema.classes:
        seen = {cls}
        frontier = [cls]
        while frontier:
            nxt = []
            for c in frontier:
                cdef = schema.classes.get(c)
                for p in (cdef.parents if cdef else ()):
                    if p not in seen:
                        seen.add(p)
                        nxt.append(p)
            frontier = nxt
        out[cls] = seen
    return out


def _value(lit: Literal):
    if lit.datatype in _NUMERIC:
        return ("n", Decimal(lit.lexical))
    return (lit.datatype, lit.value)


def _compare(op, a, b) -> bool:
    if isinstance(a, Literal) and isinstance(b, Literal):
        (ka, va), (kb, vb) = _value(a), _value(b)
        if ka == kb:
            if op == "=":
                return va == vb
            if op == "!=":
                return va != vb
            if op == "<":
                return va < vb
            if op == "<=":
                return va <= vb
            if op == ">":
                return va > vb
            return va >= vb
    if op == "=":
        return a == b
    if op == "!=":
        return a != b
    raise EvaluationError(f"incomparable operands for {op}: {a!r}, {b!r}")


def naive_evaluate(ast: QueryAst, ds: Dataset, schema: SchemaGraph | None = None) -> BindingSet:
    """Evaluate ``ast`` by brute force. With a schema, ``(?x a C)`` also
    matches individuals typed with any subclass of C."""
    ancestors = _ancestors_bfs(schema) if schema is not None else None
    everything = list(ds.assertions())

    def pattern_matches(p, a, binding):
        out = dict(binding)
        for slot, value, pos in ((p.subject, a.subject, "s"), (p.predicate, a.predicate, "p"),
                                 (p.object, a.object, "o")):
            if isinstance(slot, Var):
                if slot in out and out[slot] != value:
                    return None
                out[slot] = value
            elif pos == "o" and ancestors is not None and p.predicate == RDF_TYPE:
                if not (isinstance(value, Iri) and slot in ancestors.get(value, {value})):
                    return None
            elif slot != value:
                return None
        return out

    solutions = [{}]
    for p in ast.patterns:
        solutions = [b2 for b in solutions for a in everything
                     if (b2 := pattern_matches(p, a, b)) is not None]

    kept = []
    for b in solutions:
        ok = True
        for f in ast.filters:
            right = b[f.right] if isinstance(f.right, Var) else f.right
            if not _compare(f.op, b[f.left], right):
                ok = False
                break
        if ok:
            kept.append(b)

    rows = {tuple(b[v] for v in ast.select_vars) for b in kept}
    def rkey(r):
        return tuple(term_key(t) for t in r)

    if ast.order_by:
        best = {}
        for b in kept:
            r = tuple(b[v] for v in ast.select_vars)
            k = tuple(term_key(b[v]) for v in ast.order_by)
            if r not in best or k < best[r]:
                best[r] = k
        ordered = sorted(rows, key=lambda r: (best[r], rkey(r)))
    else:
        ordered = sorted(rows, key=rkey)
    if ast.limit is not None:
        ordered = ordered[: ast.limit]
    return BindingSet(tuple(v.name for v in ast.select_vars), tuple(ordered))
