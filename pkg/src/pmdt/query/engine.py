"""Single-store evaluation of basic graph patterns with filters."""

from __future__ import annotations

from dataclasses import replace
from typing import Iterable, Iterator, Sequence

from ..errors import EvaluationError, UnknownClassError
from ..reasoner import SubsumptionClosure
from ..store import Assertion, Dataset, Pattern
from ..terms import RDF_TYPE, Iri, Literal, PrefixMap, Term, term_key
from ..turtle import format_term
from .ast import FilterExpr, QueryAst, TriplePattern, Var
from .results import BindingSet, row_key

Binding = dict


def rewrite_with_subsumption(ast: QueryAst, closure: SubsumptionClosure) -> QueryAst:
    """Mark each ``(?x a C)`` pattern to match any subclass of C."""
    patterns = []
    for p in ast.patterns:
        if p.predicate == RDF_TYPE and isinstance(p.object, Iri):
            if p.object not in closure:
                raise UnknownClassError(f"unknown class {p.object}")
            p = replace(p, type_set=closure.descendants(p.object))
        patterns.append(p)
    return replace(ast, patterns=tuple(patterns))


# -- filters ----------------------------------------------------------------


def describe_filter(f: FilterExpr, prefixes: PrefixMap | None = None) -> str:
    pm = prefixes or PrefixMap()
    right = str(f.right) if isinstance(f.right, Var) else format_term(f.right, pm)
    return f"FILTER({f.left} {f.op} {right})"


def compare(op: str, a: Term, b: Term, f: FilterExpr) -> bool:
    """Evaluate ``a op b``. Equality is defined on every pair of terms
    (numeric literals compare by value); ordering needs both operands to be
    literals of the same comparison family."""
    if isinstance(a, Literal) and isinstance(b, Literal) and a.family == b.family:
        x, y = a.value, b.value
        try:
            return {"=": x == y, "!=": x != y, "<": x < y, "<=": x <= y,
                    ">": x > y, ">=": x >= y}[op]
        except TypeError as exc:
            raise EvaluationError(f"{describe_filter(f)}: {exc}") from None
    if op == "=":
        return a == b
    if op == "!=":
        return a != b
    raise EvaluationError(
        f"{describe_filter(f)}: cannot order {_kind(a)} against {_kind(b)}")


def _kind(t: Term) -> str:
    return "IRI" if isinstance(t, Iri) else f"{t.datatype} literal"


def filter_holds(f: FilterExpr, binding: Binding) -> bool:
    left = binding[f.left]
    right = binding[f.right] if isinstance(f.right, Var) else f.right
    return compare(f.op, left, right, f)


# -- matching ---------------------------------------------------------------


def _resolve(slot, binding: Binding):
    if isinstance(slot, Var):
        return binding.get(slot)
    return slot


def candidate_count(p: TriplePattern, ds: Dataset) -> int:
    """Index candidate count for ``p`` considering only its concrete terms."""
    s = None if isinstance(p.subject, Var) else p.subject
    pr = None if isinstance(p.predicate, Var) else p.predicate
    o = None if isinstance(p.object, Var) else p.object
    if p.type_set is not None:
        return sum(ds.count(Pattern(s, RDF_TYPE, c)) for c in p.type_set)
    return ds.count(Pattern(s, pr, o))


def index_choice(p: TriplePattern) -> str:
    if p.type_set is not None:
        return f"type index over {len(p.type_set)} class(es)"
    if not isinstance(p.subject, Var):
        return "subject index"
    if not isinstance(p.predicate, Var) and not isinstance(p.object, Var):
        return "predicate-object index"
    if not isinstance(p.predicate, Var):
        return "predicate index"
    return "full scan"


def match_pattern(p: TriplePattern, ds: Dataset, binding: Binding) -> Iterator[Binding]:
    """Extensions of ``binding`` satisfying pattern ``p``."""
    s = _resolve(p.subject, binding)
    pr = _resolve(p.predicate, binding)
    o = _resolve(p.object, binding)
    if (s is not None and not isinstance(s, Iri)) or (pr is not None and not isinstance(pr, Iri)):
        return
    if p.type_set is not None:
        for cls in sorted(p.type_set):
            for a in ds.iter_match(Pattern(s, RDF_TYPE, cls)):
                out = _unify(p, a, binding, skip_object=True)
                if out is not None:
                    yield out
        return
    for a in ds.iter_match(Pattern(s, pr, o)):
        out = _unify(p, a, binding)
        if out is not None:
            yield out


def _unify(p: TriplePattern, a: Assertion, binding: Binding, skip_object: bool = False):
    out = dict(binding)
    slots = ((p.subject, a.subject), (p.predicate, a.predicate))
    if not skip_object:
        slots += ((p.object, a.object),)
    for slot, value in slots:
        if isinstance(slot, Var):
            prev = out.get(slot)
            if prev is None:
                out[slot] = value
            elif prev != value:
                return None
    return out


# -- planning ---------------------------------------------------------------


def plan_order(ast: QueryAst, ds: Dataset) -> list[tuple[int, int]]:
    """(pattern index, estimate) in ascending estimate order; ties keep
    textual order."""
    est = [(candidate_count(p, ds), i) for i, p in enumerate(ast.patterns)]
    return [(i, n) for n, i in sorted(est)]


def _filter_schedule(ast: QueryAst, order: Sequence[int]) -> list[list[FilterExpr]]:
    """filters[k] = filters that become fully bound after step k."""
    bound: set[Var] = set()
    pending = list(ast.filters)
    schedule = []
    for idx in order:
        bound |= set(ast.patterns[idx].vars())
        ready = [f for f in pending if set(f.vars()) <= bound]
        pending = [f for f in pending if f not in ready]
        schedule.append(ready)
    return schedule


def solve(ast: QueryAst, ds: Dataset, order: Sequence[int] | None = None) -> list[Binding]:
    """All solutions of the BGP with filters applied (before projection)."""
    if order is None:
        order = [i for i, _ in plan_order(ast, ds)]
    if sorted(order) != list(range(len(ast.patterns))):
        raise ValueError(f"join order {order} is not a permutation of the patterns")
    schedule = _filter_schedule(ast, order)
    solutions: list[Binding] = [{}]
    for step, idx in enumerate(order):
        p = ast.patterns[idx]
        nxt = []
        for b in solutions:
            for ext in match_pattern(p, ds, b):
                if all(filter_holds(f, ext) for f in schedule[step]):
                    nxt.append(ext)
        solutions = nxt
        if not solutions:
            break
    return solutions


def finalize(ast: QueryAst, solutions: Iterable[Binding]) -> BindingSet:
    """Projection, DISTINCT, ORDER BY, LIMIT."""
    columns = tuple(v.name for v in ast.select_vars)
    if ast.order_by:
        # ORDER BY variables need not be projected; order each projected row
        # by the least sort key among the solutions producing it.
        keyed: dict[tuple, tuple] = {}
        for b in solutions:
            row = tuple(b[v] for v in ast.select_vars)
            key = tuple(term_key(b[v]) for v in ast.order_by)
            if row not in keyed or key < keyed[row]:
                keyed[row] = key
        rows_list = sorted(keyed, key=lambda r: (keyed[r], row_key(r)))
    else:
        rows_list = sorted({tuple(b[v] for v in ast.select_vars) for b in solutions}, key=row_key)
    if ast.limit is not None:
        rows_list = rows_list[: ast.limit]
    return BindingSet(columns, tuple(rows_list))


def evaluate_local(ast: QueryAst, ds: Dataset, *, order: Sequence[int] | None = None) -> BindingSet:
    """Evaluate ``ast`` over ``ds``. Pass ``order`` to force a join order."""
    solutions = solve(ast, ds, order)
    return finalize(ast, solutions)


def format_pattern(p: TriplePattern, prefixes: PrefixMap) -> str:
    def slot(x, pred=False):
        if isinstance(x, Var):
            return str(x)
        if pred and x == RDF_TYPE:
            return "a"
        return format_term(x, prefixes)

    text = f"{slot(p.subject)} {slot(p.predicate, True)} {slot(p.object)}"
    if p.type_set is not None and len(p.type_set) > 1:
        text += f"  (+{len(p.type_set) - 1} subclass(es))"
    return text


def explain_plan(ast: QueryAst, ds: Dataset, prefixes: PrefixMap | None = None) -> str:
    pm = prefixes or PrefixMap()
    order = plan_order(ast, ds)
    schedule = _filter_schedule(ast, [i for i, _ in order])
    lines = []
    for step, (idx, est) in enumerate(order):
        p = ast.patterns[idx]
        lines.append(f"{step + 1}. [{idx + 1}] {format_pattern(p, pm)} -- {index_choice(p)}, estimate {est}")
        for f in schedule[step]:
            lines.append(f"   then {describe_filter(f, pm)}")
    return "\n".join(lines) + "\n"
