"""Persona fixtures: instance data, site split, seeded variants and the query suite."""

from .bundle import DATA_DIR, FixtureBundle, golden_path, load_golden_expected, write_bundle
from .personas import (PATIENTS, generate_personas, inference_variants, scaled_personas,
                       violation_variants)
from .suite import SUITE, SuiteQuery, generate_query_suite, suite_dataset
from .tables import decompose_dataset, default_assignment, write_sites

__all__ = [
    "DATA_DIR", "FixtureBundle", "PATIENTS", "SUITE", "SuiteQuery", "decompose_dataset",
    "default_assignment", "generate_personas", "generate_query_suite", "golden_path",
    "inference_variants", "load_golden_expected", "scaled_personas", "suite_dataset",
    "violation_variants", "write_bundle", "write_sites",
]
