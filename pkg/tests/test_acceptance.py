"""One test per acceptance criterion, each timed against its stated limit.

Every test prints a ``criterion N: PASS|FAIL`` line as it finishes and the
lines are repeated in the terminal summary.
"""

import io
import random
import time

from pmdt.cli import main
from pmdt.federation import AccessPolicyRule, ConsentRecord
from pmdt.fixtures import (DATA_DIR, SUITE, decompose_dataset, default_assignment, inference_variants,
                           load_golden_expected, scaled_personas, suite_dataset, violation_variants)
from pmdt.fixtures.tables import consent_records, permissive_policies
from pmdt.errors import FederationError, TemporalCycleError
from pmdt.query import evaluate_local, naive_evaluate, parse_query, rewrite_with_subsumption
from pmdt.reasoner import MaterializeConfig, advise_followups, classify, materialize, validate
from pmdt.schema import OBJECT, ClassDef, SchemaGraph
from pmdt.store import Assertion, Dataset, Pattern, load_dataset
from pmdt.terms import DEFAULT_PREFIXES, PrefixMap, pmdt
from pmdt.turtle import parse_turtle, serialize_turtle
from pmdt.vocabulary import bootstrap_pmdt_schema

from federation_cases import (PERSONA_QUERIES, centralized, federation_from, oracle_result, output_bytes,
                              random_assignment, shuffled, wire_leaks)
from named_vocabulary import CLASSES, OBJECT_PROPERTIES, SUBCLASS
from oracles import iri, random_dag, strict_closure, warshall
from test_query import random_queries

PRECEDES = pmdt("precedes")


def test_criterion_1_schema_coverage(criterion):
    with criterion(1, "schema coverage and ancestor chains", limit=1.0):
        schema = bootstrap_pmdt_schema()
        closure = classify(schema)
        assert len(schema.classes) >= 60
        assert sum(p.kind == OBJECT for p in schema.properties.values()) >= 45
        assert all(schema.has_class(pmdt(c)) for c in CLASSES)
        assert all(pmdt(p) in schema.classes[pmdt(c)].parents for c, p in SUBCLASS.items())
        assert all(schema.prop(pmdt(p)) is not None for p in OBJECT_PROPERTIES)
        for chain in (("Immunotherapy", "CancerTherapy", "Treatment"),
                      ("Colitis", "OrganSpecificIrAE", "AdverseEventCategory"),
                      ("AccessPolicy", "MedicalSafetyRule")):
            for lower, upper in zip(chain, chain[1:]):
                assert closure.is_subclass(pmdt(lower), pmdt(upper)), (lower, upper)


def test_criterion_2_restriction_enforcement(criterion, personas):
    with criterion(2, "seeded violations found, clean personas pass", limit=1.0):
        schema = bootstrap_pmdt_schema()
        closure = classify(schema)
        variants = violation_variants()
        expected = {"diagnosis-two-patients": "max-cardinality", "diagnosis-no-disease": "min-cardinality",
                    "patient-no-data": "min-cardinality"}
        assert set(variants) == set(expected)
        for name, kind in expected.items():
            found = validate(schema, closure, variants[name][1])
            assert [v.kind for v in found] == [kind], name
        assert validate(schema, closure, personas) == []


def _dag_schema(names, edges):
    return SchemaGraph({pmdt(c): ClassDef(pmdt(c), {pmdt(p) for ch, p in edges if ch == c}) for c in names})


def test_criterion_3_reasoner_oracles(criterion):
    temporal = MaterializeConfig(types=False, inverses=False, severity=False)
    empty = SchemaGraph()
    with criterion(3, "classification and precedes closure match brute force", limit=30.0):
        rng = random.Random(31)
        for _ in range(200):
            names, edges = random_dag(rng, rng.randint(1, 50), rng.choice([0.05, 0.1, 0.3]))
            closure = classify(_dag_schema(names, edges))
            oracle = warshall([pmdt(c) for c in names], [(pmdt(a), pmdt(b)) for a, b in edges])
            assert {c: set(closure.ancestors(c)) for c in closure} == oracle
        for _ in range(100):
            n = rng.randint(2, 25)
            order = [iri(f"s{i}") for i in range(n)]
            rng.shuffle(order)
            edges = [(order[i], order[i + 1]) for i in range(n - 1)]
            for _ in range(rng.randint(0, 4)):
                i, j = sorted(rng.sample(range(n), 2))
                edges.append((order[i], order[j]))
            ds = Dataset(Assertion(a, PRECEDES, b) for a, b in edges)
            out = materialize(empty, classify(empty), ds, temporal)
            assert {(a.subject, a.object) for a in out.match(Pattern(None, PRECEDES))} == strict_closure(order, edges)
            a, b = rng.choice(edges)
            ds.add(Assertion(b, PRECEDES, a))
            try:
                materialize(empty, classify(empty), ds, temporal)
            except TemporalCycleError:
                pass
            else:
                raise AssertionError("cycle went unreported")


def test_criterion_4_query_oracles(criterion, schema, closure):
    with criterion(4, "suite goldens and 500 random queries match the naive evaluator", limit=60.0):
        assert len(SUITE) >= 8
        for q in SUITE:
            ds = suite_dataset(q.dataset)
            ast = parse_query(q.text)
            golden = load_golden_expected(q.name)
            assert evaluate_local(rewrite_with_subsumption(ast, closure), ds) == golden, q.name
            assert naive_evaluate(ast, ds, schema) == golden, q.name
        count = 0
        for ast, ds in random_queries(4004, 500, 500):
            assert len(ast.patterns) <= 3 and len(ds) <= 500
            assert evaluate_local(rewrite_with_subsumption(ast, closure), ds) == naive_evaluate(ast, ds, schema)
            count += 1
        assert count == 500


def test_criterion_5_federated_equals_centralized(criterion, tmp_path, schema, closure, personas, fixture_tables):
    with criterion(5, "20 random partitions match the centralized oracle, order-invariant; 10k fixture"):
        rng = random.Random(505)
        for k in range(20):
            assignment = random_assignment(rng, fixture_tables, rng.randint(2, 4))
            fed, descs = federation_from(tmp_path / f"part{k}", fixture_tables, assignment, schema, closure,
                                         personas, policies=permissive_policies())
            central = centralized(descs, schema)
            for q in PERSONA_QUERIES:
                ast = parse_query(q.text)
                outputs = set()
                for s in range(3):
                    res = fed.execute(ast, "researcher", response_order=shuffled(1000 * k + s))
                    assert res.bindings == oracle_result(q.text, central, closure), (k, q.name)
                    outputs.add(output_bytes(res.bindings))
                assert len(outputs) == 1, (k, q.name)

        scaled = scaled_personas(37)
        assert len(scaled) >= 10_000
        tables = decompose_dataset(scaled, closure)
        fed, _ = federation_from(tmp_path / "scaled", tables, default_assignment(tables), schema, closure, scaled)
        for q in PERSONA_QUERIES:
            start = time.perf_counter()
            res = fed.execute(parse_query(q.text), "clinician")
            elapsed = time.perf_counter() - start
            assert elapsed < 5.0, f"{q.name} took {elapsed:.2f} s on the scaled fixture"
            assert res.bindings == oracle_result(q.text, scaled, closure), q.name


def test_criterion_6_privacy(criterion, tmp_path, schema, closure, personas, fixture_tables):
    layout = default_assignment(fixture_tables)
    with criterion(6, "consent revocation, deny policy and wire minimization", limit=5.0):
        markus = iri("markus")
        genomic = pmdt("GenomicData")
        hidden = {d for d in personas.objects(markus, pmdt("hasPatientData")) if genomic in personas.types_of(d)}
        records = tuple(ConsentRecord(c.patient, c.data_category, False) if (c.patient, c.data_category) == (markus, genomic) else c
                        for c in consent_records(personas, closure))
        granted, descs = federation_from(tmp_path / "granted", fixture_tables, layout, schema, closure, personas)
        revoked, _ = federation_from(tmp_path / "revoked", fixture_tables, layout, schema, closure, personas,
                                     consents=records)
        reduced = Dataset(a for a in personas if a.subject not in hidden and a.object not in hidden)
        affected = 0
        for q in PERSONA_QUERIES:
            ast = parse_query(q.text)
            before = granted.execute(ast, "clinician")
            after = revoked.execute(ast, "clinician")
            assert before.bindings == oracle_result(q.text, personas, closure), q.name
            assert after.bindings == oracle_result(q.text, reduced, closure), q.name
            if before.bindings != after.bindings:
                affected += 1
                assert any(e.action == "consent-exclusion" for e in after.audit), q.name
            assert wire_leaks(ast, before.wire, descs) == [], q.name
            assert wire_leaks(ast, after.wire, descs) == [], q.name
        assert affected >= 1

        deny = permissive_policies() + (AccessPolicyRule("researcher", "deny", frozenset({genomic})),)
        guarded, _ = federation_from(tmp_path / "deny", fixture_tables, layout, schema, closure, personas,
                                     policies=deny)
        text = next(q.text for q in PERSONA_QUERIES if q.name == "genomic-holders")
        try:
            guarded.execute(parse_query(text), "researcher")
        except FederationError as exc:
            assert exc.code == "policy-denied"
        else:
            raise AssertionError("deny policy on the required class was not enforced")


def _run_cli(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = main(list(argv), out=out, err=err)
    return code, out.getvalue(), err.getvalue()


def test_criterion_7_round_trip_and_determinism(criterion, tmp_path, schema):
    personas_ttl = str(DATA_DIR / "personas.ttl")
    federation = str(DATA_DIR / "federation.json")
    with criterion(7, "serialize/parse identity and byte-stable CLI output"):
        text = serialize_turtle(schema)
        delta, rest = parse_turtle(text)
        assert delta == schema and len(rest) == 0 and serialize_turtle(delta) == text
        pm = PrefixMap(DEFAULT_PREFIXES, defaults=False)
        for path in [DATA_DIR / "personas.ttl", *sorted((DATA_DIR / "violations").glob("*.ttl")),
                     *sorted((DATA_DIR / "variants").glob("*.ttl"))]:
            ds = load_dataset(path)
            assert serialize_turtle(None, ds, prefixes=pm).encode("utf-8") == path.read_bytes(), path.name
        suite_rq = str(DATA_DIR / "suite" / "irae-after-immunotherapy.rq")
        commands = [
            ("validate", personas_ttl),
            ("validate", str(DATA_DIR / "violations" / "diagnosis-two-patients.ttl")),
            ("query", personas_ttl, "--query", suite_rq),
            ("query", personas_ttl, "--query", suite_rq, "--format", "csv"),
            ("fedquery", federation, "--query", suite_rq, "--role", "clinician", "--show-audit", "--show-wire"),
        ]
        for argv in commands:
            assert _run_cli(*argv) == _run_cli(*argv), argv[0]
        files = {}
        for k in ("a", "b"):
            for what in ("schema", "instances", "merged"):
                out = tmp_path / f"{what}-{k}.ttl"
                assert _run_cli("export", "--what", what, "--out", str(out), personas_ttl)[0] == 0
                files.setdefault(what, set()).add(out.read_bytes())
            assert _run_cli("fixtures", "--out", str(tmp_path / k))[0] == 0
        assert all(len(v) == 1 for v in files.values())
        for path in (tmp_path / "a").rglob("*"):
            if path.is_file():
                twin = tmp_path / "b" / path.relative_to(tmp_path / "a")
                assert path.read_bytes() == twin.read_bytes(), path.name


def test_criterion_8_inference_rules(criterion, schema, closure, personas):
    with criterion(8, "severity grading and missing-followup advisory"):
        ae = iri("markus-ae-colitis")
        low = materialize(schema, closure, personas).types_of(ae)
        assert pmdt("LowGradeAdverseEvent") in low and pmdt("HighGradeAdverseEvent") not in low
        high = materialize(schema, closure, inference_variants()["ae-grade-3"]).types_of(ae)
        assert pmdt("HighGradeAdverseEvent") in high and pmdt("LowGradeAdverseEvent") not in high
        ds = inference_variants()["missing-surgery-followup"]
        advisories = advise_followups(schema, closure, ds)
        assert [(a.kind, a.focus) for a in advisories] == [("missing-followup", iri("elena-surgery"))]
        assert validate(schema, closure, ds) == []
