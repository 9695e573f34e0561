"""Parser for the SELECT / basic-graph-pattern query subset.

Grammar::

    query   := prefix* SELECT [DISTINCT] var+ WHERE '{' pattern ('.' pattern)* '.'?
               filter* '}' [ORDER BY var+] [LIMIT int]
    prefix  := PREFIX pname: <iri>
    pattern := term term term        (predicate may be 'a')
    filter  := FILTER '(' var op (var | term) ')'     op in = != < <= > >=
"""

from __future__ import annotations

import re
from typing import Mapping

from ..errors import LiteralError, QuerySyntaxError, UnboundSelectVariable, UnknownPrefixError
from ..terms import RDF_TYPE, Iri, Literal, PrefixMap, datatype_from_iri
from ..turtle import format_term, unescape
from .ast import FilterExpr, QueryAst, TriplePattern, Var

_KEYWORDS = {"SELECT", "DISTINCT", "WHERE", "FILTER", "ORDER", "BY", "LIMIT", "PREFIX"}

_SPEC = [
    ("WS", r"\s+"),
    ("COMMENT", r"#[^\n]*"),
    ("VAR", r"[?$][A-Za-z_][A-Za-z0-9_]*"),
    ("IRIREF", r"<[^<>\"{}|^`\\\s]*>"),
    ("STRING", r'"(?:[^"\\\n]|\\.)*"'),
    ("DTYPE", r"\^\^"),
    ("OP", r"!=|<=|>=|=|<|>"),
    ("DECIMAL", r"[+-]?\d*\.\d+(?![A-Za-z0-9_:])"),
    ("INTEGER", r"[+-]?\d+(?![A-Za-z0-9_:]|\.\d)"),
    ("PNAME", r"(?:[A-Za-z][A-Za-z0-9_\-]*)?:(?:[A-Za-z0-9_](?:[A-Za-z0-9_\-./]*[A-Za-z0-9_\-/])?)?"),
    ("WORD", r"[A-Za-z]+"),
    ("PUNCT", r"[{}().]"),
]
_LEXER = re.compile("|".join(f"(?P<{n}>{rx})" for n, rx in _SPEC))


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    out = []
    pos = 0
    while pos < len(text):
        m = _LEXER.match(text, pos)
        if m is None:
            raise QuerySyntaxError(f"unexpected character {text[pos]!r}", pos)
        if m.lastgroup not in ("WS", "COMMENT"):
            out.append((m.lastgroup, m.group(), pos))
        pos = m.end()
    return out


class _QueryParser:
    def __init__(self, text: str, prefixes: PrefixMap):
        self.text = text
        self.toks = _tokenize(text)
        self.i = 0
        self.pm = prefixes

    def peek(self, offset: int = 0):
        j = self.i + offset
        return self.toks[j] if j < len(self.toks) else None

    def pos(self) -> int:
        tok = self.peek()
        return tok[2] if tok else len(self.text)

    def take(self):
        tok = self.peek()
        if tok is None:
            raise QuerySyntaxError("unexpected end of query", len(self.text))
        self.i += 1
        return tok

    def is_word(self, word: str, offset: int = 0) -> bool:
        tok = self.peek(offset)
        return tok is not None and tok[0] == "WORD" and tok[1].upper() == word

    def expect_word(self, word: str):
        tok = self.take()
        if tok[0] != "WORD" or tok[1].upper() != word:
            raise QuerySyntaxError(f"expected {word}, found {tok[1]!r}", tok[2])

    def expect_punct(self, ch: str):
        tok = self.take()
        if tok[0] != "PUNCT" or tok[1] != ch:
            raise QuerySyntaxError(f"expected '{ch}', found {tok[1]!r}", tok[2])

    def resolve(self, tok) -> Iri:
        kind, text, pos = tok
        try:
            if kind == "IRIREF":
                return Iri(text[1:-1])
            return self.pm.resolve(text)
        except UnknownPrefixError as exc:
            raise QuerySyntaxError(f"unknown prefix '{exc.prefix}:'", pos) from None
        except Exception as exc:
            raise QuerySyntaxError(str(exc), pos) from None

    def term(self, *, allow_var: bool = True, allow_a: bool = False):
        tok = self.take()
        kind, text, pos = tok
        try:
            if kind == "VAR" and allow_var:
                return Var(text[1:])
            if kind in ("IRIREF", "PNAME"):
                return self.resolve(tok)
            if kind == "WORD" and text == "a" and allow_a:
                return RDF_TYPE
            if kind == "WORD" and text in ("true", "false"):
                return Literal(text, "boolean")
            if kind == "INTEGER":
                return Literal(text, "integer")
            if kind == "DECIMAL":
                return Literal(text, "decimal")
            if kind == "STRING":
                lexical = unescape(text[1:-1])
                nxt = self.peek()
                if nxt is not None and nxt[0] == "DTYPE":
                    self.i += 1
                    dtok = self.take()
                    if dtok[0] not in ("IRIREF", "PNAME"):
                        raise QuerySyntaxError("expected datatype IRI after ^^", dtok[2])
                    dt = datatype_from_iri(self.resolve(dtok))
                    if dt is None:
                        raise QuerySyntaxError(f"unsupported datatype {dtok[1]}", dtok[2])
                    return Literal(lexical, dt)
                return Literal(lexical, "string")
        except (LiteralError, ValueError) as exc:
            raise QuerySyntaxError(str(exc), pos) from None
        raise QuerySyntaxError(f"expected a term, found {text!r}", pos)

    def query(self) -> QueryAst:
        while self.is_word("PREFIX"):
            self.i += 1
            ptok = self.take()
            if ptok[0] != "PNAME" or not ptok[1].endswith(":") or ptok[1].count(":") != 1:
                raise QuerySyntaxError("expected 'prefix:' after PREFIX", ptok[2])
            itok = self.take()
            if itok[0] != "IRIREF":
                raise QuerySyntaxError("expected <namespace> after PREFIX label", itok[2])
            self.pm.bind(ptok[1][:-1], itok[1][1:-1])

        self.expect_word("SELECT")
        distinct = True
        if self.is_word("DISTINCT"):
            self.i += 1
        select: list[Var] = []
        while self.peek() is not None and self.peek()[0] == "VAR":
            v = Var(self.take()[1][1:])
            if v not in select:
                select.append(v)
        if not select:
            raise QuerySyntaxError("SELECT needs at least one variable", self.pos())
        self.expect_word("WHERE")
        self.expect_punct("{")

        patterns: list[TriplePattern] = []
        filters: list[FilterExpr] = []
        while True:
            tok = self.peek()
            if tok is None:
                raise QuerySyntaxError("unterminated group pattern", len(self.text))
            if tok[0] == "PUNCT" and tok[1] == "}":
                self.i += 1
                break
            if self.is_word("FILTER"):
                filters.append(self.filter())
                continue
            if filters:
                raise QuerySyntaxError("triple patterns must precede FILTER clauses", tok[2])
            start = tok[2]
            s = self.term()
            p = self.term(allow_a=True)
            o = self.term()
            if isinstance(s, Literal) or isinstance(p, Literal):
                raise QuerySyntaxError("literals may only appear in object position", start)
            patterns.append(TriplePattern(s, p, o))
            nxt = self.peek()
            if nxt is not None and nxt[0] == "PUNCT" and nxt[1] == ".":
                self.i += 1
            elif not (nxt is not None and ((nxt[0] == "PUNCT" and nxt[1] == "}") or self.is_word("FILTER"))):
                raise QuerySyntaxError("expected '.', FILTER or '}' after triple pattern", self.pos())
        if not patterns:
            raise QuerySyntaxError("empty basic graph pattern", self.pos())

        order_by: list[Var] = []
        limit = None
        if self.is_word("ORDER"):
            self.i += 1
            self.expect_word("BY")
            while self.peek() is not None and self.peek()[0] == "VAR":
                order_by.append(Var(self.take()[1][1:]))
            if not order_by:
                raise QuerySyntaxError("ORDER BY needs at least one variable", self.pos())
        if self.is_word("LIMIT"):
            self.i += 1
            tok = self.take()
            if tok[0] != "INTEGER" or int(tok[1]) <= 0:
                raise QuerySyntaxError("LIMIT expects a positive integer", tok[2])
            limit = int(tok[1])
        if self.peek() is not None:
            raise QuerySyntaxError(f"unexpected trailing input {self.peek()[1]!r}", self.pos())

        ast = QueryAst(tuple(select), tuple(patterns), tuple(filters), distinct, tuple(order_by), limit)
        check_ast(ast)
        return ast

    def filter(self) -> FilterExpr:
        self.i += 1
        self.expect_punct("(")
        tok = self.take()
        if tok[0] != "VAR":
            raise QuerySyntaxError("filter must start with a variable", tok[2])
        left = Var(tok[1][1:])
        op_tok = self.take()
        if op_tok[0] != "OP":
            raise QuerySyntaxError(f"expected a comparison operator, found {op_tok[1]!r}", op_tok[2])
        right = self.term()
        self.expect_punct(")")
        return FilterExpr(left, op_tok[1], right)


def check_ast(ast: QueryAst) -> None:
    bound = set(ast.pattern_vars())
    for v in ast.select_vars:
        if v not in bound:
            raise UnboundSelectVariable(f"select variable {v} does not occur in any pattern")
    for f in ast.filters:
        for v in f.vars():
            if v not in bound:
                raise UnboundSelectVariable(f"filter variable {v} does not occur in any pattern")
    for v in ast.order_by:
        if v not in bound:
            raise UnboundSelectVariable(f"ORDER BY variable {v} does not occur in any pattern")
    for i, p in enumerate(ast.patterns):
        if all(isinstance(x, Var) for x in (p.subject, p.predicate, p.object)):
            others = {v for j, q in enumerate(ast.patterns) if j != i for v in q.vars()}
            if not others & set(p.vars()):
                raise QuerySyntaxError(f"pattern {i + 1} is all variables and shares none with "
                                       "another pattern", 0)


def parse_query(text: str, prefixes: Mapping[str, str] | None = None) -> QueryAst:
    return _QueryParser(text, PrefixMap(prefixes)).query()


def format_query(ast: QueryAst, prefixes: PrefixMap | None = None) -> str:
    """Canonical query text; ``parse_query(format_query(q)) == q``."""
    pm = prefixes or PrefixMap()

    def slot(x, predicate=False) -> str:
        if isinstance(x, Var):
            return str(x)
        if predicate and x == RDF_TYPE:
            return "a"
        return format_term(x, pm)

    lines = ["SELECT " + " ".join(str(v) for v in ast.select_vars) + " WHERE {"]
    for p in ast.patterns:
        lines.append(f"  {slot(p.subject)} {slot(p.predicate, True)} {slot(p.object)} .")
    for f in ast.filters:
        lines.append(f"  FILTER({f.left} {f.op} {slot(f.right)})")
    lines.append("}")
    if ast.order_by:
        lines.append("ORDER BY " + " ".join(str(v) for v in ast.order_by))
    if ast.limit is not None:
        lines.append(f"LIMIT {ast.limit}")
    return "\n".join(lines) + "\n"
