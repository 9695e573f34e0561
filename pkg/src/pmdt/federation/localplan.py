"""Translation of a sub-query into a relational plan over one site's tables.

A plan is a natural join of unions of table scans, followed by filters and
a distinct projection. Each scan reads one table, applies equality
selections derived from concrete query terms (IRIs are matched by inverting
the column's IRI template) and computes one output per variable. Two
patterns over the same table and the same subject collapse into one scan.

The SQL-style text produced by :func:`render_sql` is for display, and
:func:`parse_sql` reads it back into an equal plan.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache
from typing import Collection, Iterable, Mapping, Sequence

from ..query.ast import FilterExpr, TriplePattern, Var
from ..query.engine import filter_holds
from ..query.results import row_key
from ..terms import RDF_TYPE, Iri, Literal, PrefixMap, Term
from ..turtle import format_term, parse_term
from .mapping import Table, TableMapping, Template

_BARE = PrefixMap(defaults=False)


# -- plan nodes ---------------------------------------------------------------


@dataclass(frozen=True)
class IriOf:
    template: str


@dataclass(frozen=True)
class LitOf:
    column: str
    datatype: str


@dataclass(frozen=True)
class Const:
    term: Term


@dataclass(frozen=True)
class NotNull:
    column: str


@dataclass(frozen=True)
class RawEq:
    column: str
    value: str


@dataclass(frozen=True)
class TypedEq:
    column: str
    literal: Literal


@dataclass(frozen=True)
class Scan:
    table: str
    outputs: tuple  # ((var name, IriOf | LitOf | Const), ...)
    conditions: tuple = ()

    @property
    def vars(self) -> tuple:
        return tuple(sorted({v for v, _ in self.outputs}))


@dataclass(frozen=True)
class Union:
    vars: tuple
    scans: tuple


@dataclass(frozen=True)
class LocalPlan:
    inputs: tuple  # Union per join input
    filters: tuple = ()
    project: tuple = ()

    def scans(self) -> list[Scan]:
        return [s for u in self.inputs for s in u.scans]


# -- translation --------------------------------------------------------------


def _dedup(items: Iterable) -> tuple:
    return tuple(dict.fromkeys(items))


def _subject_part(slot, mapping: TableMapping):
    """(outputs, conditions) placing the row subject in ``slot``, or None."""
    if isinstance(slot, Var):
        return [(slot.name, IriOf(mapping.iri_template.text))], []
    if isinstance(slot, Iri):
        values = mapping.iri_template.invert(slot)
        if values is None:
            return None
        return [], [RawEq(c, values[c]) for c in sorted(values)]
    return None


def _alternatives(p: TriplePattern, mapping: TableMapping) -> list[Scan]:
    subj = _subject_part(p.subject, mapping)
    if subj is None:
        return []
    s_out, s_cond = subj
    pred_is_var = isinstance(p.predicate, Var)
    out: list[Scan] = []

    def emit(predicate: Iri, outputs, conditions):
        if pred_is_var:
            outputs = outputs + [(p.predicate.name, Const(predicate))]
        outputs = tuple(sorted(s_out + outputs, key=lambda o: o[0]))
        out.append(Scan(mapping.table_name, outputs, _dedup(s_cond + conditions)))

    if pred_is_var or p.predicate == RDF_TYPE:
        o = p.object
        if isinstance(o, Var):
            emit(RDF_TYPE, [(o.name, Const(mapping.row_class))], [])
        elif isinstance(o, Iri):
            accepted = p.type_set if p.type_set is not None and not pred_is_var else {o}
            if mapping.row_class in accepted:
                emit(RDF_TYPE, [], [])
    if pred_is_var or p.predicate != RDF_TYPE:
        for col in mapping.columns:
            if not pred_is_var and col.property != p.predicate:
                continue
            o = p.object
            if col.datatype is not None:
                if isinstance(o, Var):
                    emit(col.property, [(o.name, LitOf(col.column, col.datatype))], [NotNull(col.column)])
                elif isinstance(o, Literal):
                    emit(col.property, [], [TypedEq(col.column, o)])
            else:
                if isinstance(o, Var):
                    emit(col.property, [(o.name, IriOf(col.template.text))],
                         [NotNull(col.column)])
                elif isinstance(o, Iri):
                    values = col.template.invert(o)
                    if values is not None:
                        emit(col.property, [],
                             [NotNull(col.column)] + [RawEq(c, values[c]) for c in sorted(values)])
    return out


def _merge_key(p: TriplePattern, alts: list[Scan], keyed: Collection[str]):
    # merging is only sound when each subject names at most one row
    if len(alts) != 1 or alts[0].table not in keyed:
        return None
    return (alts[0].table, p.subject)


def translate_to_local_plan(patterns: Sequence[TriplePattern], filters: Sequence[FilterExpr],
                            project: Sequence[Var], tables: Sequence[TableMapping],
                            keyed: Collection[str] = ()) -> LocalPlan:
    """Relational plan answering ``patterns`` over ``tables``. ``keyed``
    names the tables whose subject template is a row key."""
    units: list[list] = []  # [merge key, scans, variable names]
    for p in patterns:
        alts = [s for m in tables for s in _alternatives(p, m)]
        key = _merge_key(p, alts, keyed)
        names = {v.name for v in p.vars()}
        for unit in units:
            if key is not None and unit[0] == key:
                a, b = unit[1][0], alts[0]
                outputs = tuple(sorted(_dedup(a.outputs + b.outputs), key=lambda o: o[0]))
                unit[1] = [Scan(a.table, outputs, _dedup(a.conditions + b.conditions))]
                unit[2] |= names
                break
        else:
            units.append([key, alts, names])
    inputs = tuple(Union(tuple(sorted(names)), tuple(scans)) for _, scans, names in units)
    return LocalPlan(inputs, tuple(filters), tuple(v.name for v in project))


# -- execution ------------------------------------------------------------------


@lru_cache(maxsize=1024)
def _template(text: str) -> Template:
    return Template(text)


def _eval_output(expr, row: Mapping[str, str], typed: Mapping[str, Literal]):
    if isinstance(expr, IriOf):
        return _template(expr.template).expand(row)
    if isinstance(expr, LitOf):
        return typed.get(expr.column)
    return expr.term


def _holds(cond, row, typed) -> bool:
    if isinstance(cond, NotNull):
        return row.get(cond.column, "") != ""
    if isinstance(cond, RawEq):
        return row.get(cond.column) == cond.value
    return typed.get(cond.column) == cond.literal


def run_scan(scan: Scan, table: Table, visible: Iterable[int] | None = None) -> set[tuple]:
    names = scan.vars
    rows = set()
    indices = range(len(table.rows)) if visible is None else visible
    for i in indices:
        row, typed = table.rows[i], table.typed[i]
        if not all(_holds(c, row, typed) for c in scan.conditions):
            continue
        binding: dict[str, Term] = {}
        ok = True
        for var, expr in scan.outputs:
            value = _eval_output(expr, row, typed)
            if value is None or binding.setdefault(var, value) != value:
                ok = False
                break
        if ok:
            rows.add(tuple(binding[v] for v in names))
    return rows


def _hash_join(left_vars, left_rows, right_vars, right_rows):
    shared = [v for v in left_vars if v in right_vars]
    extra = [v for v in right_vars if v not in left_vars]
    li = [left_vars.index(v) for v in shared]
    ri = [right_vars.index(v) for v in shared]
    ei = [right_vars.index(v) for v in extra]
    index: dict[tuple, list[tuple]] = {}
    for r in right_rows:
        index.setdefault(tuple(r[i] for i in ri), []).append(r)
    out = set()
    for l in left_rows:
        for r in index.get(tuple(l[i] for i in li), ()):
            out.add(l + tuple(r[i] for i in ei))
    return tuple(left_vars) + tuple(extra), out


def _join_order(inputs) -> list[int]:
    """Smallest input first, then repeatedly the smallest one sharing a
    variable with what is already joined, so no cross product is built
    while a connected input remains. Ties keep plan order."""
    left = list(range(len(inputs)))
    bound: set[str] = set()
    order = []
    while left:
        connected = [i for i in left if bound & set(inputs[i][0])] or left
        i = min(connected, key=lambda k: (len(inputs[k][1]), k))
        order.append(i)
        left.remove(i)
        bound |= set(inputs[i][0])
    return order


def execute_plan(plan: LocalPlan, tables: Mapping[str, Table],
                 visible: Mapping[str, Sequence[int]] | None = None,
                 excluded: frozenset = frozenset()) -> list[tuple]:
    """Rows of ``plan.project`` in canonical order. Bindings mentioning an
    individual in ``excluded`` are dropped."""
    inputs = []
    for u in plan.inputs:
        rows = set()
        for scan in u.scans:
            vis = None if visible is None else visible.get(scan.table, ())
            rows |= run_scan(scan, tables[scan.table], vis)
        if excluded:
            rows = {r for r in rows if not any(t in excluded for t in r)}
        inputs.append((u.vars, rows))
    vars_, rows = (), {()}
    for i in _join_order(inputs):
        vars_, rows = _hash_join(list(vars_), rows, list(inputs[i][0]), inputs[i][1])
        if not rows:
            break
    vars_ = list(vars_)
    if plan.filters:
        named = [Var(v) for v in vars_]
        rows = {r for r in rows if all(filter_holds(f, dict(zip(named, r))) for f in plan.filters)}
    idx = [vars_.index(v) for v in plan.project] if rows else []
    projected = {tuple(r[i] for i in idx) for r in rows}
    return sorted(projected, key=row_key)


# -- SQL-style rendering --------------------------------------------------------


def _sql_str(text: str) -> str:
    return "'" + text.replace("'", "''") + "'"


def _col(column: str) -> str:
    return 't."' + column.replace('"', '""') + '"'


def _term_sql(term: Term) -> str:
    return f"TERM({_sql_str(format_term(term, _BARE))})"


def _expr_sql(expr) -> str:
    if isinstance(expr, IriOf):
        cols = "".join(", " + _col(c) for c in dict.fromkeys(Template(expr.template).placeholders))
        return f"IRI({_sql_str(expr.template)}{cols})"
    if isinstance(expr, LitOf):
        return f"LIT({_col(expr.column)}, {_sql_str(expr.datatype)})"
    return _term_sql(expr.term)


def _cond_sql(cond) -> str:
    if isinstance(cond, NotNull):
        return f"{_col(cond.column)} IS NOT NULL"
    if isinstance(cond, RawEq):
        return f"{_col(cond.column)} = {_sql_str(cond.value)}"
    return f"LIT({_col(cond.column)}, {_sql_str(cond.literal.datatype)}) = {_term_sql(cond.literal)}"


def _scan_sql(scan: Scan) -> str:
    outs = ", ".join(f"{_expr_sql(e)} AS ?{v}" for v, e in scan.outputs) or "1"
    text = f"SELECT {outs} FROM \"{scan.table.replace(chr(34), chr(34) * 2)}\" t"
    if scan.conditions:
        text += " WHERE " + " AND ".join(_cond_sql(c) for c in scan.conditions)
    return text


def render_sql(plan: LocalPlan) -> str:
    proj = ", ".join(f"?{v}" for v in plan.project) or "1"
    lines = [f"SELECT DISTINCT {proj}"]
    for k, u in enumerate(plan.inputs):
        lead = "FROM (" if k == 0 else "NATURAL JOIN ("
        lines.append(lead)
        if not u.scans:
            lines.append("  EMPTY(" + ", ".join(f"?{v}" for v in u.vars) + ")")
        for j, scan in enumerate(u.scans):
            if j:
                lines.append("  UNION")
            lines.append("  " + _scan_sql(scan))
        lines.append(")")
    if plan.filters:
        conds = []
        for f in plan.filters:
            right = f"?{f.right.name}" if isinstance(f.right, Var) else _term_sql(f.right)
            conds.append(f"?{f.left.name} {f.op} {right}")
        lines.append("WHERE " + " AND ".join(conds))
    return "\n".join(lines) + "\n"


_SQL_TOKENS = re.compile(r"""
    (?P<WS>\s+)
  | (?P<STR>'(?:[^']|'')*')
  | (?P<QID>"(?:[^"]|"")*")
  | (?P<VAR>\?[A-Za-z_][A-Za-z0-9_]*)
  | (?P<OP>!=|<=|>=|=|<|>)
  | (?P<WORD>[A-Za-z_][A-Za-z0-9_]*|1)
  | (?P<PUNCT>[(),.])
""", re.VERBOSE)


class _SqlParser:
    def __init__(self, text: str):
        self.toks = []
        pos = 0
        while pos < len(text):
            m = _SQL_TOKENS.match(text, pos)
            if m is None:
                raise ValueError(f"unexpected character {text[pos]!r} at {pos}")
            if m.lastgroup != "WS":
                self.toks.append((m.lastgroup, m.group()))
            pos = m.end()
        self.i = 0

    def peek(self, k: int = 0):
        j = self.i + k
        return self.toks[j] if j < len(self.toks) else (None, None)

    def take(self, kind=None, value=None):
        tok = self.peek()
        if tok[0] is None or (kind and tok[0] != kind) or (value and tok[1] != value):
            raise ValueError(f"expected {value or kind}, found {tok[1]!r}")
        self.i += 1
        return tok[1]

    def at(self, value) -> bool:
        return self.peek()[1] == value

    def string(self) -> str:
        return self.take("STR")[1:-1].replace("''", "'")

    def qid(self) -> str:
        return self.take("QID")[1:-1].replace('""', '"')

    def column(self) -> str:
        self.take("WORD", "t")
        self.take("PUNCT", ".")
        return self.qid()

    def term(self) -> Term:
        self.take("WORD", "TERM")
        self.take("PUNCT", "(")
        text = self.string()
        self.take("PUNCT", ")")
        return parse_term(text, _BARE)

    def var(self) -> str:
        return self.take("VAR")[1:]

    def plan(self) -> LocalPlan:
        self.take("WORD", "SELECT")
        self.take("WORD", "DISTINCT")
        project = self.var_list()
        inputs = []
        self.take("WORD", "FROM")
        inputs.append(self.union())
        while self.at("NATURAL"):
            self.take()
            self.take("WORD", "JOIN")
            inputs.append(self.union())
        filters = []
        if self.at("WHERE"):
            self.take()
            filters.append(self.filter())
            while self.at("AND"):
                self.take()
                filters.append(self.filter())
        if self.peek()[0] is not None:
            raise ValueError(f"trailing input {self.peek()[1]!r}")
        return LocalPlan(tuple(inputs), tuple(filters), tuple(project))

    def var_list(self) -> list[str]:
        if self.at("1"):
            self.take()
            return []
        out = [self.var()]
        while self.at(","):
            self.take()
            out.append(self.var())
        return out

    def union(self) -> Union:
        self.take("PUNCT", "(")
        if self.at("EMPTY"):
            self.take()
            self.take("PUNCT", "(")
            names = [] if self.at(")") else self.var_list()
            self.take("PUNCT", ")")
            self.take("PUNCT", ")")
            return Union(tuple(names), ())
        scans = [self.scan()]
        while self.at("UNION"):
            self.take()
            scans.append(self.scan())
        self.take("PUNCT", ")")
        return Union(scans[0].vars, tuple(scans))

    def scan(self) -> Scan:
        self.take("WORD", "SELECT")
        outputs = []
        if self.at("1"):
            self.take()
        else:
            outputs.append(self.output())
            while self.at(","):
                self.take()
                outputs.append(self.output())
        self.take("WORD", "FROM")
        table = self.qid()
        self.take("WORD", "t")
        conds = []
        if self.at("WHERE"):
            self.take()
            conds.append(self.condition())
            while self.at("AND"):
                self.take()
                conds.append(self.condition())
        return Scan(table, tuple(outputs), tuple(conds))

    def output(self):
        kind = self.peek()[1]
        if kind == "IRI":
            self.take()
            self.take("PUNCT", "(")
            template = self.string()
            while self.at(","):
                self.take()
                self.column()
            self.take("PUNCT", ")")
            expr = IriOf(template)
        elif kind == "LIT":
            col, dt = self.lit()
            expr = LitOf(col, dt)
        else:
            expr = Const(self.term())
        self.take("WORD", "AS")
        return (self.var(), expr)

    def lit(self):
        self.take("WORD", "LIT")
        self.take("PUNCT", "(")
        col = self.column()
        self.take("PUNCT", ",")
        dt = self.string()
        self.take("PUNCT", ")")
        return col, dt

    def condition(self):
        if self.at("LIT"):
            col, _ = self.lit()
            self.take("OP", "=")
            return TypedEq(col, self.term())
        col = self.column()
        if self.at("IS"):
            self.take()
            self.take("WORD", "NOT")
            self.take("WORD", "NULL")
            return NotNull(col)
        self.take("OP", "=")
        return RawEq(col, self.string())

    def filter(self) -> FilterExpr:
        left = Var(self.var())
        op = self.take("OP")
        right = Var(self.var()) if self.peek()[0] == "VAR" else self.term()
        return FilterExpr(left, op, right)


def parse_sql(text: str) -> LocalPlan:
    """Inverse of :func:`render_sql`."""
    return _SqlParser(text).plan()
