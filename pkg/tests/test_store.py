import random
import threading

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pmdt.errors import StoreError, TurtleSyntaxError, UnknownPrefixError
from pmdt.store import Assertion, Dataset, Pattern, export_dataset, load_dataset
from pmdt.terms import RDF_TYPE, Literal, pmdt
from pmdt.turtle import parse_turtle, serialize_turtle

from oracles import iri

PFX = "@prefix pmdt: <https://w3id.org/pmdt/ontology#> .\n@prefix ex: <https://w3id.org/pmdt/example/> .\n"


def _random_assertions(rng, n):
    subjects = [iri(f"s{i}") for i in range(8)]
    preds = [pmdt("treatedWith"), pmdt("hasDiagnosis"), pmdt("ageYears"), pmdt("personName")]
    out = []
    for _ in range(n):
        s = rng.choice(subjects)
        p = rng.choice(preds + [RDF_TYPE])
        if p == RDF_TYPE:
            o = pmdt(rng.choice(["Patient", "Surgery", "Diagnosis"]))
        elif p == pmdt("ageYears"):
            o = Literal.of(rng.randint(0, 99))
        elif p == pmdt("personName"):
            o = Literal(rng.choice(["Ann", "Bo", 'quote"d', "tab\tbed", "日本"]))
        else:
            o = rng.choice(subjects)
        out.append(Assertion(s, p, o))
    return out


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(0, 60))
def test_match_agrees_with_linear_scan(seed, n):
    rng = random.Random(seed)
    facts = _random_assertions(rng, n)
    ds = Dataset(facts)
    assert ds.assertions() == set(facts)
    terms_s = [None] + [iri(f"s{i}") for i in range(3)]
    terms_p = [None, RDF_TYPE, pmdt("treatedWith")]
    terms_o = [None, pmdt("Patient"), iri("s1")]
    for s in terms_s:
        for p in terms_p:
            for o in terms_o:
                pat = Pattern(s, p, o)
                expected = sorted((a for a in set(facts) if pat.matches(a)), key=Assertion.sort_key)
                assert ds.match(pat) == expected
                assert ds.count(pat) == len(expected)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(0, 60))
def test_turtle_round_trip(seed, n):
    ds = Dataset(_random_assertions(random.Random(seed), n))
    text = serialize_turtle(None, ds)
    _, back = parse_turtle(text)
    assert back == ds
    assert serialize_turtle(None, back) == text


def test_add_retract_copy():
    ds = Dataset()
    a = Assertion(iri("x"), RDF_TYPE, pmdt("Patient"))
    assert ds.add(a) and not ds.add(a)
    c = ds.copy()
    assert ds.retract(a) and not ds.retract(a)
    assert len(ds) == 0 and a in c
    assert ds.match(Pattern(iri("x"))) == []


def test_kind_checks(schema):
    ds = Dataset(schema=schema)
    with pytest.raises(StoreError) as e:
        ds.add(Assertion(iri("p"), pmdt("treatedWith"), Literal("surgery")))
    assert e.value.code == "kind-mismatch"
    with pytest.raises(StoreError):
        ds.add(Assertion(iri("p"), pmdt("ageYears"), iri("fifty")))
    with pytest.raises(StoreError):
        ds.add(Assertion(iri("p"), pmdt("ageYears"), Literal("fifty")))
    ds.add(Assertion(iri("q"), pmdt("qolScore"), Literal.of(70)))  # integer accepted for decimal
    ds.add(Assertion(iri("p"), pmdt("madeUp"), Literal("x")))
    strict = Dataset(schema=schema, strict=True)
    with pytest.raises(StoreError) as e:
        strict.add(Assertion(iri("p"), pmdt("madeUp"), Literal("x")))
    assert e.value.code == "unknown-predicate"


def test_individuals_and_lookups(personas):
    assert iri("elena") in personas.individuals()
    assert personas.types_of(iri("markus-ae-colitis")) == {pmdt("AdverseEvent")}
    assert personas.objects(iri("markus-ae-grade"), pmdt("gradeValue")) == [Literal.of(2)]
    assert set(personas.subjects(pmdt("hasDiagnosis"), iri("elena-dx-diabetes"))) == {iri("elena")}


def test_concurrent_writers_lose_nothing():
    ds = Dataset()

    def writer(k):
        for i in range(200):
            ds.add(Assertion(iri(f"w{k}-{i}"), RDF_TYPE, pmdt("Patient")))

    threads = [threading.Thread(target=writer, args=(k,)) for k in range(4)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert len(ds) == 800 and ds.count(Pattern(None, RDF_TYPE, pmdt("Patient"))) == 800


def test_persona_round_trip(personas, tmp_path):
    path = tmp_path / "p.ttl"
    export_dataset(personas, path)
    assert load_dataset(path) == personas
    first = path.read_bytes()
    export_dataset(load_dataset(path), path)
    assert path.read_bytes() == first


def test_continuations_and_literal_forms():
    text = PFX + ('ex:m a pmdt:Patient ; pmdt:ageYears 62 ; pmdt:personName "Markus" , "M." .\n'
                  'ex:q pmdt:qolScore 58.50 .\n'
                  'ex:t pmdt:timestampValue "2024-04-10T09:00:00Z"^^<http://www.w3.org/2001/XMLSchema#dateTime> .\n'
                  'ex:c pmdt:consentGranted false .  # trailing comment\n')
    _, ds = parse_turtle(text)
    assert len(ds) == 7
    assert ds.objects(iri("q"), pmdt("qolScore")) == [Literal("58.5", "decimal")]
    assert ds.objects(iri("c"), pmdt("consentGranted")) == [Literal.of(False)]


@pytest.mark.parametrize("body,line,col", [
    ("ex:a pmdt:treatedWith .\n", 3, 23),
    ("ex:a pmdt:treatedWith ex:b\n", 3, 23),
    ('ex:a pmdt:personName "open .\n', 3, 22),
    ("\n\nex:a pmdt:treatedWith _:b .\n", 5, 23),
])
def test_syntax_errors_carry_location(body, line, col):
    with pytest.raises(TurtleSyntaxError) as e:
        parse_turtle(PFX + body, source="f.ttl")
    assert (e.value.line, e.value.column) == (line, col)
    assert str(e.value).startswith(f"f.ttl:{line}:{col}:")


def test_unknown_prefix_and_kind_error_locations(schema):
    with pytest.raises(UnknownPrefixError) as e:
        parse_turtle(PFX + "ex:a foo:b ex:c .\n")
    assert e.value.prefix == "foo" and e.value.line == 3
    with pytest.raises(StoreError) as e:
        parse_turtle(PFX + 'ex:a a pmdt:Patient .\nex:a pmdt:treatedWith "x" .\n', source="d.ttl", schema=schema)
    assert str(e.value).startswith("d.ttl:4:")


def test_schema_statements_are_split_off():
    text = PFX + ("@prefix owl: <http://www.w3.org/2002/07/owl#> .\n"
                  "@prefix rdfs: <http://www.w3.org/2000/01/rdf-schema#> .\n"
                  "pmdt:CellTherapy a owl:Class ; rdfs:subClassOf pmdt:CancerTherapy .\n"
                  "ex:car-t a pmdt:CellTherapy .\n")
    delta, ds = parse_turtle(text)
    assert pmdt("CancerTherapy") in delta.classes[pmdt("CellTherapy")].parents
    assert list(ds) == [Assertion(iri("car-t"), RDF_TYPE, pmdt("CellTherapy"))]
