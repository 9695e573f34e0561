import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pmdt.errors import SchemaError
from pmdt.reasoner import classify
from pmdt.schema import (DATA, OBJECT, CardinalityRestriction, ClassDef, PropertyDef, SchemaGraph, add_disjoint,
                         add_restriction, define_class, define_property, merge)
from pmdt.terms import PMDT, Iri, pmdt, xsd_iri
from pmdt.turtle import parse_turtle, serialize_turtle
from pmdt.vocabulary import bootstrap_pmdt_schema

from named_vocabulary import CLASSES, DATA_PROPERTIES, OBJECT_PROPERTIES, SUBCLASS
from oracles import random_dag, warshall


def test_named_classes_and_parents(schema):
    for name in CLASSES:
        assert schema.has_class(pmdt(name)), name
    for child, parent in SUBCLASS.items():
        assert pmdt(parent) in schema.classes[pmdt(child)].parents, child
    assert len(schema.classes) >= 60


def test_named_object_properties(schema):
    for name, (dom, rng) in OBJECT_PROPERTIES.items():
        p = schema.prop(pmdt(name))
        assert p is not None and p.kind == OBJECT, name
        assert {pmdt(d) for d in dom.split()} <= p.domain, name
        assert p.range == {pmdt(r) for r in rng.split()}, name
    assert sum(p.kind == OBJECT for p in schema.properties.values()) >= 45


def test_named_data_properties(schema):
    for name, datatype in DATA_PROPERTIES.items():
        p = schema.prop(pmdt(name))
        assert p is not None and p.kind == DATA, name
        assert datatype in p.datatypes, name
    grade = schema.prop(pmdt("gradeValue"))
    assert (grade.min_value, grade.max_value) == (1, 5)
    qol = schema.prop(pmdt("qolScore"))
    assert (qol.min_value, qol.max_value) == (0, 100)


def test_inverse_pairs(schema):
    assert schema.prop(pmdt("follows")).inverse == pmdt("precedes")
    assert schema.prop(pmdt("precedes")).inverse == pmdt("follows")
    assert schema.prop(pmdt("stepFollows")).inverse == pmdt("stepPrecedes")


@pytest.mark.parametrize("cls,prop,lo,hi", [
    ("Diagnosis", "concernsPatient", 1, 1), ("Diagnosis", "concernsDisease", 1, None),
    ("Patient", "hasPatientData", 1, None), ("AdverseEvent", "recordedAt", 1, 1),
    ("AdverseEvent", "hasSeverityGrade", 0, 1), ("SurgeryFollowup", "followUpOfSurgery", 1, 1),
    ("MedicationFollowup", "followUpOfMedication", 1, 1),
    ("CancerTherapyFollowup", "followUpOfCancerTherapy", 1, 1), ("SeverityGrade", "gradeValue", 1, 1),
    ("ConsentStatement", "coversData", 1, None),
])
def test_restrictions(schema, cls, prop, lo, hi):
    assert CardinalityRestriction(pmdt(cls), pmdt(prop), lo, hi) in schema.restrictions


def test_disjoint_pairs(schema):
    assert len(schema.disjoint_pairs) == 2
    assert (pmdt("MedicalStakeholder"), pmdt("Patient")) in schema.disjoint_pairs
    assert (pmdt("TimeInstant"), pmdt("TimeInterval")) in schema.disjoint_pairs


def test_ancestor_chains(closure):
    assert closure.ancestors(pmdt("Immunotherapy")) >= {pmdt("CancerTherapy"), pmdt("Treatment")}
    assert closure.ancestors(pmdt("Colitis")) >= {pmdt("OrganSpecificIrAE"), pmdt("AdverseEventCategory")}
    assert pmdt("MedicalSafetyRule") in closure.ancestors(pmdt("AccessPolicy"))


def test_bootstrap_is_deterministic_and_valid():
    a, b = bootstrap_pmdt_schema(), bootstrap_pmdt_schema()
    assert a == b
    a.check()
    assert serialize_turtle(a) == serialize_turtle(b)


def test_define_class(schema):
    grown = define_class(schema, ClassDef(pmdt("CellTherapy"), {pmdt("CancerTherapy")}))
    assert pmdt("CellTherapy") in grown.classes and pmdt("CellTherapy") not in schema.classes
    with pytest.raises(SchemaError) as e:
        define_class(schema, ClassDef(pmdt("X"), {pmdt("Nonexistent")}))
    assert e.value.code == "unknown-parent"
    with pytest.raises(SchemaError) as e:
        define_class(grown, ClassDef(pmdt("CellTherapy"), {pmdt("Patient")}))
    assert e.value.code == "duplicate-class"


def test_define_class_cycle():
    s = define_class(SchemaGraph(), ClassDef(pmdt("Y")))
    s = define_class(s, ClassDef(pmdt("X"), {pmdt("Y")}))
    with pytest.raises(SchemaError) as e:
        define_class(s, ClassDef(pmdt("Y"), {pmdt("X")}))
    assert e.value.code == "cycle-introduced"


def test_define_property_errors(schema):
    with pytest.raises(SchemaError) as e:
        define_property(schema, PropertyDef(pmdt("hasDiagnosis"), OBJECT))
    assert e.value.code == "duplicate-property"
    with pytest.raises(SchemaError) as e:
        define_property(schema, PropertyDef(pmdt("p"), OBJECT, {pmdt("Nope")}))
    assert e.value.code == "unknown-domain-or-range"
    with pytest.raises(SchemaError) as e:
        define_property(schema, PropertyDef(pmdt("p"), OBJECT, inverse=pmdt("nothing")))
    assert e.value.code == "inverse-mismatch"
    with pytest.raises(SchemaError):
        PropertyDef(pmdt("p"), "annotation")


def test_define_property_links_inverse(schema):
    s = define_property(schema, PropertyDef(pmdt("diagnosisOf"), OBJECT, {pmdt("Diagnosis")}, {pmdt("Patient")},
                                            inverse=pmdt("hasDiagnosis")))
    assert s.prop(pmdt("hasDiagnosis")).inverse == pmdt("diagnosisOf")
    s.check()


def test_restriction_and_disjoint_need_declared_terms(schema):
    with pytest.raises(SchemaError):
        add_restriction(schema, CardinalityRestriction(pmdt("Nope"), pmdt("hasDiagnosis"), 1))
    with pytest.raises(SchemaError):
        add_disjoint(schema, pmdt("Patient"), pmdt("Nope"))
    with pytest.raises(SchemaError):
        CardinalityRestriction(pmdt("Patient"), pmdt("hasDiagnosis"), 2, 1)


def test_merge_is_idempotent_and_unions_parents(schema):
    assert merge(schema, schema) == schema
    delta = SchemaGraph({pmdt("Colitis"): ClassDef(pmdt("Colitis"), {pmdt("Disease")})})
    merged = merge(schema, delta)
    assert merged.classes[pmdt("Colitis")].parents == {pmdt("OrganSpecificIrAE"), pmdt("Disease")}
    clash = SchemaGraph(properties={pmdt("ageYears"): PropertyDef(pmdt("ageYears"), OBJECT)})
    with pytest.raises(SchemaError):
        merge(schema, clash)


def test_schema_turtle_round_trip(schema):
    text = serialize_turtle(schema)
    delta, ds = parse_turtle(text)
    assert len(ds) == 0
    assert delta == schema
    assert serialize_turtle(delta) == text


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 30))
def test_random_schema_round_trip(seed, n):
    rng = random.Random(seed)
    names, edges = random_dag(rng, n)
    classes = {pmdt(c): ClassDef(pmdt(c), {pmdt(p) for ch, p in edges if ch == c}) for c in names}
    props = {}
    for i in range(rng.randint(0, 5)):
        d = pmdt(rng.choice(names))
        if rng.random() < 0.5:
            props[pmdt(f"p{i}")] = PropertyDef(pmdt(f"p{i}"), OBJECT, {d}, {pmdt(rng.choice(names))})
        else:
            props[pmdt(f"p{i}")] = PropertyDef(pmdt(f"p{i}"), DATA, {d}, {xsd_iri("integer")},
                                               min_value=rng.choice([None, 0]))
    restrictions = tuple(CardinalityRestriction(pdef.domain and min(pdef.domain) or pmdt(names[0]), p,
                                                rng.randint(0, 1), rng.choice([None, 1, 2]))
                         for p, pdef in props.items() if rng.random() < 0.5)
    s = SchemaGraph(classes, props, restrictions, {"pmdt": PMDT}).check()
    delta, _ = parse_turtle(serialize_turtle(s))
    assert delta == s
    closure = classify(s)
    oracle = warshall([pmdt(c) for c in names], [(pmdt(a), pmdt(b)) for a, b in edges])
    assert {c: set(closure.ancestors(c)) for c in closure} == oracle


def test_annotations_survive_round_trip(schema):
    colitis = schema.classes[pmdt("Colitis")]
    assert colitis.annotations
    delta, _ = parse_turtle(serialize_turtle(schema))
    assert delta.classes[pmdt("Colitis")].annotations == colitis.annotations
    assert isinstance(next(iter(delta.classes)), Iri)
