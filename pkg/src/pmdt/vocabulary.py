"""The PMDT ontology: classes, properties and restrictions of all views."""

from __future__ import annotations

from functools import lru_cache

from .schema import (
    DATA,
    OBJECT,
    CardinalityRestriction,
    ClassDef,
    PropertyDef,
    SchemaGraph,
)
from .terms import DEFAULT_PREFIXES, PMDT, RDFS, Iri, xsd_iri

ALIGNED_WITH = PMDT + "alignedWith"
LABEL = RDFS + "label"

# (class, parents); order only matters for readability.
_CLASSES: list[tuple[str, tuple[str, ...]]] = [
    # Main view
    ("Patient", ()),
    ("MedicalStakeholder", ()),
    ("Diagnosis", ()),
    ("Disease", ()),
    ("PatientCancerDisease", ("Disease",)),
    # Treatment, performance and follow-up view
    ("Treatment", ()),
    ("Surgery", ("Treatment",)),
    ("Medication", ("Treatment",)),
    ("Vaccination", ("Treatment",)),
    ("CancerTherapy", ("Treatment",)),
    ("Immunotherapy", ("CancerTherapy",)),
    ("Chemotherapy", ("CancerTherapy",)),
    ("RadiationTherapy", ("CancerTherapy",)),
    ("TreatmentFollowup", ()),
    ("SurgeryFollowup", ("TreatmentFollowup",)),
    ("MedicationFollowup", ("TreatmentFollowup",)),
    ("CancerTherapyFollowup", ("TreatmentFollowup",)),
    ("TreatmentPerformance", ()),
    ("Metric", ()),
    ("EfficiencyMetric", ("Metric",)),
    ("EffectivenessMetric", ("Metric",)),
    ("PatientCentredOutcome", ("Metric",)),
    # Patient data hierarchy
    ("PatientData", ()),
    ("LifestyleData", ("PatientData",)),
    ("NutritionData", ("PatientData",)),
    ("PsychosocialData", ("PatientData",)),
    ("PsychologicalData", ("PatientData",)),
    ("MedicalHistory", ("PatientData",)),
    ("TestData", ("PatientData",)),
    ("GenomicData", ("PatientData",)),
    ("QualityOfLifeInfo", ("PatientData",)),
    # Trajectory view
    ("Trajectory", ()),
    ("PatientCancerDiseaseTrajectory", ("Trajectory",)),
    ("TreatmentTrajectory", ("Trajectory",)),
    ("QoLTrajectory", ("Trajectory",)),
    ("State", ()),
    ("TreatmentState", ("State",)),
    ("PatientCancerDiseaseState", ("State",)),
    ("QoLMeasurementState", ("State",)),
    ("TimeInstant", ()),
    ("TimeInterval", ()),
    # Medical safety view
    ("MedicalSafetyRule", ()),
    ("ClinicalGuideline", ("MedicalSafetyRule",)),
    ("SafetyProcedure", ("MedicalSafetyRule",)),
    ("PrivacyRegulation", ("MedicalSafetyRule",)),
    ("DataSecurityPolicy", ("MedicalSafetyRule",)),
    ("AccessPolicy", ("MedicalSafetyRule",)),
    ("SafetyEvent", ()),
    ("DataSource", ()),
    ("ConsentStatement", ()),
    # Medical pathways view
    ("MedicalPathway", ()),
    ("PathwayStep", ()),
    ("TreatmentAction", ()),
    ("ClinicalGoal", ()),
    # Adverse events view
    ("AdverseEvent", ()),
    ("HighGradeAdverseEvent", ("AdverseEvent",)),
    ("LowGradeAdverseEvent", ("AdverseEvent",)),
    ("AdverseEventCategory", ()),
    ("OrganSpecificIrAE", ("AdverseEventCategory",)),
    ("SystemicSyndrome", ("AdverseEventCategory",)),
    ("Pneumonitis", ("OrganSpecificIrAE",)),
    ("Colitis", ("OrganSpecificIrAE",)),
    ("Endocrinopathy", ("OrganSpecificIrAE",)),
    ("Hepatitis", ("OrganSpecificIrAE",)),
    ("Myocarditis", ("OrganSpecificIrAE",)),
    ("CytokineReleaseSyndrome", ("SystemicSyndrome",)),
    ("ICANS", ("SystemicSyndrome",)),
    ("SeverityGrade", ()),
    ("Test", ()),
]

# Stub alignment codes for external vocabularies (no imports).
_ALIGNMENTS = {
    "Patient": "FHIR:Patient",
    "Diagnosis": "FHIR:Condition",
    "Disease": "DOID:4",
    "PatientCancerDisease": "DOID:162",
    "Treatment": "FHIR:Procedure",
    "Medication": "FHIR:MedicationStatement",
    "Surgery": "OMOP:ProcedureOccurrence",
    "Immunotherapy": "OMOP:DrugExposure",
    "TestData": "FHIR:Observation",
    "Test": "OMOP:Measurement",
    "MedicalStakeholder": "FHIR:Practitioner",
    "ConsentStatement": "FHIR:Consent",
    "TimeInstant": "time:Instant",
    "TimeInterval": "time:Interval",
    "AdverseEvent": "FHIR:AdverseEvent",
    "SeverityGrade": "CTCAE:Grade",
    "Colitis": "CTCAE:Colitis",
    "Pneumonitis": "CTCAE:Pneumonitis",
    "Hepatitis": "CTCAE:Hepatic failure",
    "Myocarditis": "CTCAE:Myocarditis",
    "CytokineReleaseSyndrome": "CTCAE:Cytokine release syndrome",
    "ICANS": "CTCAE:ICANS",
}

_TIME = ("TimeInstant", "TimeInterval")

# (property, domain, range, inverse)
_OBJECT_PROPERTIES: list[tuple[str, tuple[str, ...], tuple[str, ...], str | None]] = [
    ("hasDiagnosis", ("Patient",), ("Diagnosis",), None),
    ("concernsDisease", ("Diagnosis",), ("Disease",), None),
    ("concernsPatient", ("Diagnosis",), ("Patient",), None),
    ("treatedWith", ("Patient",), ("Treatment",), None),
    ("hasPatientData", ("Patient",), ("PatientData",), None),
    ("evaluatesTreatment", ("TreatmentPerformance",), ("Treatment",), None),
    ("associatedWithDisease", ("TreatmentPerformance",), ("Disease",), None),
    ("hasMetric", ("TreatmentPerformance",), ("Metric",), None),
    ("basedOnQoL", ("PatientCentredOutcome",), ("QualityOfLifeInfo",), None),
    ("measuredAt", ("TreatmentPerformance",), _TIME, None),
    ("partOfTrajectory", ("TreatmentPerformance",), ("Trajectory",), None),
    ("followUpOfSurgery", ("SurgeryFollowup",), ("Surgery",), None),
    ("followUpOfMedication", ("MedicationFollowup",), ("Medication",), None),
    ("followUpOfCancerTherapy", ("CancerTherapyFollowup",), ("CancerTherapy",), None),
    ("hasPerformanceEvaluation", ("TreatmentFollowup",), ("TreatmentPerformance",), None),
    ("reportsOutcome", ("TreatmentFollowup",), ("PatientCentredOutcome",), None),
    ("hasState", ("Trajectory",), ("State",), None),
    ("atTime", ("State",), _TIME, None),
    ("precedes", ("State",), ("State",), "follows"),
    ("follows", ("State",), ("State",), "precedes"),
    ("recordsQoL", ("QoLMeasurementState",), ("QualityOfLifeInfo",), None),
    ("causedBy", ("AdverseEvent",), ("Treatment",), None),
    ("associatedWith", ("AdverseEvent",), ("PatientCancerDisease",), None),
    ("recordedAt", ("AdverseEvent",), _TIME, None),
    ("hasSeverityGrade", ("AdverseEvent",), ("SeverityGrade",), None),
    ("hasCategory", ("AdverseEvent",), ("AdverseEventCategory",), None),
    ("confirmedBy", ("AdverseEvent",), ("Test",), None),
    ("reportedBy", ("AdverseEvent",), ("Patient", "MedicalStakeholder"), None),
    ("managedByStakeholder", ("AdverseEvent",), ("MedicalStakeholder",), None),
    ("managedByTreatment", ("AdverseEvent",), ("Treatment",), None),
    ("followUpReports", ("TreatmentFollowup",), ("AdverseEvent",), None),
    ("violates", ("SafetyEvent",), ("MedicalSafetyRule",), None),
    ("mitigatedBy", ("SafetyEvent",), ("MedicalSafetyRule",), None),
    ("involvesPatient", ("SafetyEvent",), ("Patient",), None),
    ("triggeredBy", ("SafetyEvent",), ("Treatment", "PathwayStep"), None),
    ("restrictedBy", ("PatientData",), ("PrivacyRegulation",), None),
    ("securedBy", ("PatientData",), ("DataSecurityPolicy",), None),
    ("hasSource", ("PatientData",), ("DataSource",), None),
    ("governedBy", ("PatientData",), ("AccessPolicy",), None),
    ("consentsTo", ("Patient",), ("ConsentStatement",), None),
    ("coversData", ("ConsentStatement",), ("PatientData",), None),
    ("accessesData", ("MedicalStakeholder",), ("PatientData",), None),
    ("hasStep", ("MedicalPathway",), ("PathwayStep",), None),
    ("hasTreatmentAction", ("PathwayStep",), ("TreatmentAction",), None),
    ("executedBy", ("PathwayStep",), ("MedicalStakeholder",), None),
    ("stepPrecedes", ("PathwayStep",), ("PathwayStep",), "stepFollows"),
    ("stepFollows", ("PathwayStep",), ("PathwayStep",), "stepPrecedes"),
    ("achievesGoal", ("MedicalPathway",), ("ClinicalGoal",), None),
    ("groundedIn", ("MedicalPathway",), ("ClinicalGuideline",), None),
    ("monitoredBy", ("PathwayStep",), ("SafetyProcedure",), None),
    ("yieldsPerformance", ("PathwayStep",), ("TreatmentPerformance",), None),
]

# (property, domain, datatype, min, max)
_DATA_PROPERTIES: list[tuple[str, tuple[str, ...], str, int | None, int | None]] = [
    ("ageYears", ("Patient",), "integer", None, None),
    ("personName", ("Patient", "MedicalStakeholder"), "string", None, None),
    ("roleName", ("MedicalStakeholder",), "string", None, None),
    ("gradeValue", ("SeverityGrade",), "integer", 1, 5),
    ("qolScore", ("QualityOfLifeInfo",), "decimal", 0, 100),
    ("timestampValue", ("TimeInstant",), "dateTime", None, None),
    ("intervalStart", ("TimeInterval",), "dateTime", None, None),
    ("intervalEnd", ("TimeInterval",), "dateTime", None, None),
    ("consentGranted", ("ConsentStatement",), "boolean", None, None),
    ("alignedWith", (), "string", None, None),
]

# (class, property, min, max)
_RESTRICTIONS: list[tuple[str, str, int, int | None]] = [
    ("Diagnosis", "concernsPatient", 1, 1),
    ("Diagnosis", "concernsDisease", 1, None),
    ("Patient", "hasPatientData", 1, None),
    ("AdverseEvent", "recordedAt", 1, 1),
    ("AdverseEvent", "hasSeverityGrade", 0, 1),
    ("SurgeryFollowup", "followUpOfSurgery", 1, 1),
    ("MedicationFollowup", "followUpOfMedication", 1, 1),
    ("CancerTherapyFollowup", "followUpOfCancerTherapy", 1, 1),
    ("SeverityGrade", "gradeValue", 1, 1),
    ("ConsentStatement", "coversData", 1, None),
]

_DISJOINT = [("TimeInstant", "TimeInterval"), ("Patient", "MedicalStakeholder")]

# Treatment class -> (expected follow-up class, linking property).
FOLLOWUP_RULES: tuple[tuple[str, str, str], ...] = (
    ("Surgery", "SurgeryFollowup", "followUpOfSurgery"),
    ("Medication", "MedicationFollowup", "followUpOfMedication"),
    ("CancerTherapy", "CancerTherapyFollowup", "followUpOfCancerTherapy"),
)

CLASS_NAMES = tuple(name for name, _ in _CLASSES)
OBJECT_PROPERTY_NAMES = tuple(name for name, *_ in _OBJECT_PROPERTIES)
DATA_PROPERTY_NAMES = tuple(name for name, *_ in _DATA_PROPERTIES)


def _p(name: str) -> Iri:
    return Iri(PMDT + name)


@lru_cache(maxsize=1)
def bootstrap_pmdt_schema() -> SchemaGraph:
    classes = {}
    for name, parents in _CLASSES:
        annotations = {}
        if name in _ALIGNMENTS:
            annotations[ALIGNED_WITH] = _ALIGNMENTS[name]
        classes[_p(name)] = ClassDef(_p(name), frozenset(_p(x) for x in parents), annotations)

    properties = {}
    for name, dom, rng, inv in _OBJECT_PROPERTIES:
        properties[_p(name)] = PropertyDef(
            _p(name), OBJECT,
            frozenset(_p(d) for d in dom), frozenset(_p(r) for r in rng),
            _p(inv) if inv else None,
        )
    for name, dom, dtype, lo, hi in _DATA_PROPERTIES:
        properties[_p(name)] = PropertyDef(
            _p(name), DATA, frozenset(_p(d) for d in dom), frozenset({xsd_iri(dtype)}),
            min_value=lo, max_value=hi,
        )

    restrictions = [CardinalityRestriction(_p(c), _p(p), lo, hi) for c, p, lo, hi in _RESTRICTIONS]
    disjoint = frozenset((_p(a), _p(b)) for a, b in _DISJOINT)
    return SchemaGraph(classes, properties, tuple(restrictions), dict(DEFAULT_PREFIXES), disjoint).check()
