"""Command-line interface.

Exit codes: 0 success, 1 violations or advisories found, 2 usage or parse
error, 3 execution error. Results go to standard output, diagnostics to
standard error.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path
from typing import Sequence

from .errors import (EvaluationError, FederationError, PmdtError, QuerySyntaxError, SchemaError, StoreError,
                     TurtleSyntaxError, UnboundSelectVariable, UnknownClassError, UnknownPrefixError)
from .federation import format_audit, format_wire, load_federation
from .query import evaluate_local, parse_query, rewrite_with_subsumption
from .reasoner import advise_followups, classify, validate
from .schema import SchemaGraph, merge
from .store import Dataset
from .terms import PrefixMap
from .turtle import parse_turtle, serialize_turtle
from .vocabulary import bootstrap_pmdt_schema

OK, FINDINGS, USAGE, EXECUTION = 0, 1, 2, 3


class _Exit(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def _read(path: str) -> str:
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise _Exit(USAGE, f"cannot read {path}: {exc.strerror}") from None


def _parse_file(path: str, schema: SchemaGraph | None, strict: bool):
    try:
        return parse_turtle(_read(path), source=path, schema=schema, strict=strict)
    except UnknownPrefixError as exc:
        raise _Exit(USAGE, f"{path}:{exc}") from None
    except (TurtleSyntaxError, StoreError, SchemaError) as exc:
        raise _Exit(USAGE, str(exc)) from None
    except PmdtError as exc:
        raise _Exit(USAGE, f"{path}: {exc}") from None


def load_inputs(data_files: Sequence[str], schema_file: str | None = None, strict: bool = False
                ) -> tuple[SchemaGraph, Dataset, PrefixMap]:
    """Schema (bootstrap or ``schema_file``, plus any schema statements in
    the data files), the union of instance data, and the declared prefixes."""
    pm = PrefixMap()
    if schema_file is not None:
        schema, _ = _parse_file(schema_file, None, False)
    else:
        schema = bootstrap_pmdt_schema()
    for label, ns in schema.prefixes.items():
        pm.bind(label, ns)
    # first pass collects schema statements so kind checks see all of them
    for path in data_files:
        delta, _ = _parse_file(path, None, False)
        try:
            schema = merge(schema, delta)
        except SchemaError as exc:
            raise _Exit(USAGE, f"{path}: {exc}") from None
        for label, ns in delta.prefixes.items():
            pm.bind(label, ns)
    ds = Dataset()
    for path in data_files:
        _, part = _parse_file(path, schema, strict)
        ds.update(part)
    return schema, ds, pm


def _query_text(arg: str) -> str:
    if os.path.isfile(arg):
        return _read(arg)
    return arg


def _parse_query(arg: str, pm: PrefixMap):
    text = _query_text(arg)
    try:
        return parse_query(text, pm.as_dict())
    except (QuerySyntaxError, UnboundSelectVariable) as exc:
        raise _Exit(USAGE, f"{exc.code}: {exc}") from None


def _render(bindings, fmt: str, pm: PrefixMap) -> str:
    return bindings.to_csv(pm) if fmt == "csv" else bindings.to_table(pm)


# -- commands -----------------------------------------------------------------


def cmd_validate(args, out) -> int:
    schema, ds, pm = load_inputs(args.data, args.schema, args.strict)
    closure = classify(schema)
    violations = validate(schema, closure, ds, pm)
    advisories = advise_followups(schema, closure, ds)
    for v in violations:
        out.write(f"VIOLATION\t{v.kind}\t{pm.compact(v.focus)}\t{v.constraint}\t{v.detail}\n")
    for a in advisories:
        out.write(f"ADVISORY\t{a.kind}\t{pm.compact(a.focus)}\t{pm.compact(a.expected_class)}\n")
    return FINDINGS if violations or advisories else OK


def cmd_query(args, out) -> int:
    schema, ds, pm = load_inputs(args.data, args.schema)
    ast = _parse_query(args.query, pm)
    try:
        result = evaluate_local(rewrite_with_subsumption(ast, classify(schema)), ds)
    except (EvaluationError, UnknownClassError) as exc:
        raise _Exit(EXECUTION, f"{exc.code}: {exc}") from None
    out.write(_render(result, args.format, pm))
    return OK


def cmd_fedquery(args, out) -> int:
    pm = PrefixMap()
    try:
        fed = load_federation(args.config, prefixes=pm)
    except FederationError as exc:
        raise _Exit(USAGE, f"{exc.code}: {exc}") from None
    except PmdtError as exc:
        raise _Exit(USAGE, f"{args.config}: {exc}") from None
    ast = _parse_query(args.query, pm)
    try:
        res = fed.execute(ast, args.role)
    except FederationError as exc:
        raise _Exit(EXECUTION, f"{exc.code}: {exc}") from None
    except (EvaluationError, UnknownClassError) as exc:
        raise _Exit(EXECUTION, f"{exc.code}: {exc}") from None
    out.write(_render(res.bindings, args.format, pm))
    if args.show_audit:
        out.write("\n# audit\n")
        out.write(format_audit(res.audit))
    if args.show_wire:
        out.write("\n# wire\n")
        out.write(format_wire(res.wire))
    return OK


def cmd_export(args, out) -> int:
    schema, ds, pm = load_inputs(args.data, args.schema)
    prefixes = pm.as_dict()
    if args.what == "schema":
        text = serialize_turtle(schema, None, prefixes=prefixes)
    elif args.what == "instances":
        text = serialize_turtle(None, ds, prefixes=prefixes)
    else:
        text = serialize_turtle(schema, ds, prefixes=prefixes)
    try:
        Path(args.out).parent.mkdir(parents=True, exist_ok=True)
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise _Exit(EXECUTION, f"cannot write {args.out}: {exc.strerror}") from None
    out.write(f"wrote {args.what} ({text.count(chr(10))} lines) to {args.out}\n")
    return OK


def cmd_fixtures(args, out) -> int:
    from .fixtures import write_bundle

    try:
        bundle = write_bundle(args.out)
    except OSError as exc:
        raise _Exit(EXECUTION, f"cannot write fixtures to {args.out}: {exc.strerror}") from None
    out.write(f"wrote {len(bundle.monolithic)} persona assertions, {len(bundle.sites)} sites, "
              f"{len(bundle.query_suite)} suite queries to {args.out}\n")
    return OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pmdt", description="Patient digital twin ontology toolkit.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check data against the schema restrictions")
    p.add_argument("--schema", help="schema file (default: the built-in ontology)")
    p.add_argument("data", nargs="+", help="Turtle data files")
    p.add_argument("--strict", action="store_true", help="reject predicates missing from the schema")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("query", help="evaluate a query over local data files")
    p.add_argument("data", nargs="*", help="Turtle data files")
    p.add_argument("--query", required=True, help="query file or query text")
    p.add_argument("--format", choices=("table", "csv"), default="table")
    p.add_argument("--schema", help="schema file (default: the built-in ontology)")
    p.set_defaults(func=cmd_query)

    p = sub.add_parser("fedquery", help="evaluate a query across federated sites")
    p.add_argument("config", help="federation config JSON")
    p.add_argument("--query", required=True, help="query file or query text")
    p.add_argument("--role", required=True, help="requester role")
    p.add_argument("--format", choices=("table", "csv"), default="table")
    p.add_argument("--show-audit", action="store_true", help="append the audit entries")
    p.add_argument("--show-wire", action="store_true", help="append the captured site messages")
    p.set_defaults(func=cmd_fedquery)

    p = sub.add_parser("export", help="write schema and/or instances as canonical Turtle")
    p.add_argument("--what", required=True, choices=("schema", "instances", "merged"))
    p.add_argument("--out", required=True, help="output file")
    p.add_argument("--schema", help="schema file (default: the built-in ontology)")
    p.add_argument("data", nargs="*", help="Turtle data files")
    p.set_defaults(func=cmd_export)

    p = sub.add_parser("fixtures", help="regenerate the persona fixture bundle")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_fixtures)
    return parser


def main(argv: Sequence[str] | None = None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args, out)
    except _Exit as exc:
        err.write(f"pmdt {args.command}: {exc}\n")
        return exc.code
    except PmdtError as exc:
        err.write(f"pmdt {args.command}: {exc.code}: {exc}\n")
        return EXECUTION


__all__ = ["main", "build_parser", "load_inputs"]
