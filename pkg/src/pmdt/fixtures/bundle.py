"""The reproducible fixture bundle and its on-disk golden files."""

from __future__ import annotations

import os
from dataclasses import dataclass
from pathlib import Path

from ..query.results import BindingSet, parse_csv
from ..reasoner import classify
from ..store import Dataset
from ..terms import DEFAULT_PREFIXES, PrefixMap
from ..turtle import serialize_turtle
from ..vocabulary import bootstrap_pmdt_schema
from .personas import generate_personas, inference_variants, violation_variants
from .suite import generate_query_suite
from .tables import consent_records, decompose_dataset, default_assignment, write_sites

DATA_DIR = Path(__file__).with_name("data")


@dataclass
class FixtureBundle:
    monolithic: Dataset
    sites: list  # SiteDescriptor
    violation_variants: dict  # name -> (kind, Dataset)
    inference_variants: dict  # name -> Dataset
    query_suite: list  # (name, text, BindingSet)


def _write(path: Path, text: str) -> None:
    os.makedirs(path.parent, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def write_bundle(out_dir) -> FixtureBundle:
    """Regenerate every fixture file under ``out_dir``. Output is
    byte-identical across runs."""
    out = Path(out_dir)
    schema = bootstrap_pmdt_schema()
    closure = classify(schema)
    # built-in prefixes only, so a PMDT_PREFIXES file cannot change the goldens
    pm = PrefixMap(DEFAULT_PREFIXES, defaults=False)
    ds = generate_personas()
    _write(out / "personas.ttl", serialize_turtle(None, ds, prefixes=pm))

    tables = decompose_dataset(ds, closure)
    sites = write_sites(out, tables, default_assignment(tables),
                        consents=consent_records(ds, closure), prefixes=pm)

    violations = violation_variants()
    for name, (_, vds) in violations.items():
        _write(out / "violations" / f"{name}.ttl", serialize_turtle(None, vds, prefixes=pm))
    inferences = inference_variants()
    for name, vds in inferences.items():
        _write(out / "variants" / f"{name}.ttl", serialize_turtle(None, vds, prefixes=pm))

    suite = generate_query_suite(schema)
    for name, text, expected in suite:
        _write(out / "suite" / f"{name}.rq", text)
        _write(out / "suite" / f"{name}.expected.csv", expected.to_csv(pm))
    _write(out / "suite" / "empty.ttl", serialize_turtle(None, Dataset(), prefixes=pm))
    return FixtureBundle(ds, sites, violations, inferences, suite)


def golden_path(*parts: str) -> Path:
    return DATA_DIR.joinpath(*parts)


def load_golden_expected(name: str) -> BindingSet:
    return parse_csv(golden_path("suite", f"{name}.expected.csv").read_text(encoding="utf-8"))
