from .ast import FilterExpr, QueryAst, TriplePattern, Var
from .engine import evaluate_local, explain_plan, rewrite_with_subsumption
from .naive import naive_evaluate
from .parser import format_query, parse_query
from .results import BindingSet, parse_csv

__all__ = [
    "BindingSet", "FilterExpr", "QueryAst", "TriplePattern", "Var",
    "evaluate_local", "explain_plan", "format_query", "naive_evaluate",
    "parse_csv", "parse_query", "rewrite_with_subsumption",
]
