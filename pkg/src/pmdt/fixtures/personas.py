"""Persona instance data for Elena, Markus and Aisha, plus seeded variants.

Ages, diagnoses, the grade-2 colitis three months into immunotherapy and
the 3/6/12/18-month QoL follow-ups come from the persona narratives. All
other values (names of clinicians, timestamps, QoL scores, codes) are
fixture-defined: invented once and frozen here.
"""

from __future__ import annotations

from decimal import Decimal

from ..store import Assertion, Dataset
from ..terms import EX, RDF_TYPE, Iri, Literal, pmdt


def E(local: str) -> Iri:
    return Iri(EX + local)


def _obj(value):
    if isinstance(value, (Iri, Literal)):
        return value
    if isinstance(value, bool):
        return Literal("true" if value else "false", "boolean")
    if isinstance(value, int):
        return Literal(str(value), "integer")
    if isinstance(value, (float, Decimal)):
        return Literal(str(value), "decimal")
    return Literal(value, "string")


def when(text: str) -> Literal:
    return Literal(text, "dateTime")


class _Builder:
    def __init__(self):
        self.out: list[Assertion] = []

    def node(self, name: str, cls: str, *facts):
        """One individual with exactly one asserted class and the given
        (property local name, value) facts; values that are Iri objects
        stay IRIs, Python values become literals."""
        s = E(name)
        self.out.append(Assertion(s, RDF_TYPE, pmdt(cls)))
        for prop, value in facts:
            values = value if isinstance(value, list) else [value]
            for v in values:
                self.out.append(Assertion(s, pmdt(prop), _obj(v)))
        return s


def _shared(b: _Builder) -> None:
    """Diseases, categories, rules and staff referenced by several personas."""
    b.node("melanoma-early", "PatientCancerDisease", ("alignedWith", "DOID:8923"))
    b.node("melanoma-metastatic", "PatientCancerDisease", ("alignedWith", "DOID:1909"))
    b.node("type2-diabetes", "Disease", ("alignedWith", "DOID:9352"))
    b.node("hypertension", "Disease", ("alignedWith", "DOID:10763"))
    b.node("melanoma-susceptibility", "Disease")
    b.node("colitis", "Colitis", ("alignedWith", "CTCAE:colitis"))

    b.node("dr-weber", "MedicalStakeholder", ("personName", "Dr. Anna Weber"), ("roleName", "surgical oncologist"))
    b.node("dr-okafor", "MedicalStakeholder", ("personName", "Dr. Chidi Okafor"), ("roleName", "endocrinologist"))
    b.node("nurse-lind", "MedicalStakeholder", ("personName", "Maja Lind"), ("roleName", "diabetes nurse"))
    b.node("dr-schmidt", "MedicalStakeholder", ("personName", "Dr. Jonas Schmidt"), ("roleName", "medical oncologist"),
           ("accessesData", [E("markus-history"), E("markus-genomic")]))
    b.node("dr-haddad", "MedicalStakeholder", ("personName", "Dr. Leila Haddad"), ("roleName", "clinical geneticist"),
           ("accessesData", E("aisha-genomic")))

    b.node("gdpr-art9", "PrivacyRegulation", ("alignedWith", "GDPR Art. 9"))
    b.node("genomic-access-policy", "AccessPolicy")
    b.node("hospital-security", "DataSecurityPolicy")
    b.node("melanoma-guideline", "ClinicalGuideline")
    b.node("irae-guideline", "ClinicalGuideline")
    b.node("irae-monitoring", "SafetyProcedure")
    b.node("genomics-lab", "DataSource")
    b.node("hospital-ehr", "DataSource")


def _elena(b: _Builder) -> None:
    b.node("elena", "Patient",
           ("personName", "Elena"), ("ageYears", 54),
           ("hasDiagnosis", [E("elena-dx-melanoma"), E("elena-dx-diabetes")]),
           ("treatedWith", [E("elena-surgery"), E("elena-metformin")]),
           ("hasPatientData", [E("elena-history"), E("elena-lifestyle"), E("elena-qol-postop"),
                               E("elena-qol-3m")]),
           ("consentsTo", E("elena-consent")))
    b.node("elena-dx-melanoma", "Diagnosis", ("concernsPatient", E("elena")),
           ("concernsDisease", E("melanoma-early")))
    b.node("elena-dx-diabetes", "Diagnosis", ("concernsPatient", E("elena")),
           ("concernsDisease", E("type2-diabetes")))
    b.node("elena-history", "MedicalHistory", ("hasSource", E("hospital-ehr")))
    b.node("elena-lifestyle", "LifestyleData")
    b.node("elena-qol-postop", "QualityOfLifeInfo", ("qolScore", Decimal("78.0")))
    b.node("elena-qol-3m", "QualityOfLifeInfo", ("qolScore", Decimal("81.5")))
    b.node("elena-consent", "ConsentStatement", ("consentGranted", True),
           ("coversData", [E("elena-history"), E("elena-lifestyle"), E("elena-qol-postop"), E("elena-qol-3m")]))

    b.node("elena-surgery", "Surgery")
    b.node("elena-metformin", "Medication")
    b.node("elena-t-postop", "TimeInstant", ("timestampValue", when("2024-03-15T10:00:00Z")))
    b.node("elena-t-3m", "TimeInstant", ("timestampValue", when("2024-06-14T10:00:00Z")))

    b.node("elena-surgery-fu", "SurgeryFollowup", ("followUpOfSurgery", E("elena-surgery")),
           ("hasPerformanceEvaluation", E("elena-surgery-perf")), ("reportsOutcome", E("elena-surgery-pco")))
    b.node("elena-surgery-perf", "TreatmentPerformance", ("evaluatesTreatment", E("elena-surgery")),
           ("associatedWithDisease", E("melanoma-early")), ("measuredAt", E("elena-t-postop")),
           ("hasMetric", E("elena-surgery-pco")))
    b.node("elena-surgery-pco", "PatientCentredOutcome", ("basedOnQoL", E("elena-qol-postop")))

    b.node("elena-medication-fu", "MedicationFollowup", ("followUpOfMedication", E("elena-metformin")),
           ("hasPerformanceEvaluation", E("elena-metformin-perf")), ("reportsOutcome", E("elena-metformin-pco")))
    b.node("elena-metformin-perf", "TreatmentPerformance", ("evaluatesTreatment", E("elena-metformin")),
           ("associatedWithDisease", E("type2-diabetes")), ("measuredAt", E("elena-t-3m")),
           ("hasMetric", E("elena-metformin-pco")))
    b.node("elena-metformin-pco", "PatientCentredOutcome", ("basedOnQoL", E("elena-qol-3m")))

    b.node("elena-pathway", "MedicalPathway",
           ("hasStep", [E(f"elena-step-{i}") for i in range(1, 5)]),
           ("achievesGoal", E("elena-goal")), ("groundedIn", E("melanoma-guideline")))
    b.node("elena-goal", "ClinicalGoal")
    staff = {1: "dr-weber", 2: "dr-okafor", 3: "nurse-lind", 4: "dr-weber"}
    actions = {1: "elena-action-excision", 2: "elena-action-glycaemic-review",
               3: "elena-action-education", 4: "elena-action-skin-check"}
    for i in range(1, 5):
        facts = [("executedBy", E(staff[i])), ("hasTreatmentAction", E(actions[i]))]
        if i < 4:
            facts.append(("stepPrecedes", E(f"elena-step-{i + 1}")))
        b.node(f"elena-step-{i}", "PathwayStep", *facts)
        b.node(actions[i], "TreatmentAction")


_QOL = (("baseline", "2024-01-10T09:00:00Z", "72.0"),
        ("m3", "2024-04-10T09:00:00Z", "58.5"),
        ("m6", "2024-07-10T09:00:00Z", "66.0"),
        ("m12", "2025-01-10T09:00:00Z", "74.5"),
        ("m18", "2025-07-10T09:00:00Z", "79.0"))


def _markus(b: _Builder) -> None:
    qol_data = [E(f"markus-qol-{k}") for k, _, _ in _QOL]
    b.node("markus", "Patient",
           ("personName", "Markus"), ("ageYears", 62),
           ("hasDiagnosis", [E("markus-dx-melanoma"), E("markus-dx-hypertension")]),
           ("treatedWith", [E("markus-immunotherapy"), E("markus-corticosteroid")]),
           ("hasPatientData", [E("markus-history"), E("markus-genomic")] + qol_data),
           ("consentsTo", E("markus-consent")))
    b.node("markus-dx-melanoma", "Diagnosis", ("concernsPatient", E("markus")),
           ("concernsDisease", E("melanoma-metastatic")))
    b.node("markus-dx-hypertension", "Diagnosis", ("concernsPatient", E("markus")),
           ("concernsDisease", E("hypertension")))
    b.node("markus-history", "MedicalHistory", ("hasSource", E("hospital-ehr")))
    b.node("markus-genomic", "GenomicData", ("restrictedBy", E("gdpr-art9")),
           ("governedBy", E("genomic-access-policy")), ("securedBy", E("hospital-security")),
           ("hasSource", E("genomics-lab")))
    b.node("markus-consent", "ConsentStatement", ("consentGranted", True),
           ("coversData", [E("markus-history"), E("markus-genomic")] + qol_data))

    for key, stamp, _ in _QOL:
        b.node(f"markus-t-{key}", "TimeInstant", ("timestampValue", when(stamp)))

    b.node("markus-immunotherapy", "Immunotherapy")
    b.node("markus-corticosteroid", "Medication", ("alignedWith", "ATC:H02AB06"))
    b.node("markus-immuno-fu", "CancerTherapyFollowup", ("followUpOfCancerTherapy", E("markus-immunotherapy")),
           ("followUpReports", E("markus-ae-colitis")), ("hasPerformanceEvaluation", E("markus-immuno-perf")))
    b.node("markus-immuno-perf", "TreatmentPerformance", ("evaluatesTreatment", E("markus-immunotherapy")),
           ("associatedWithDisease", E("melanoma-metastatic")), ("measuredAt", E("markus-t-m3")),
           ("partOfTrajectory", E("markus-treatment-trajectory")))
    b.node("markus-steroid-fu", "MedicationFollowup", ("followUpOfMedication", E("markus-corticosteroid")))

    states = ("start", "colitis", "resumed")
    times = ("baseline", "m3", "m6")
    b.node("markus-treatment-trajectory", "TreatmentTrajectory",
           ("hasState", [E(f"markus-ts-{s}") for s in states]))
    for i, s in enumerate(states):
        facts = [("atTime", E(f"markus-t-{times[i]}"))]
        if i + 1 < len(states):
            facts.append(("precedes", E(f"markus-ts-{states[i + 1]}")))
        b.node(f"markus-ts-{s}", "TreatmentState", *facts)

    b.node("markus-qol-trajectory", "QoLTrajectory",
           ("hasState", [E(f"markus-qs-{k}") for k, _, _ in _QOL]))
    for i, (key, _, score) in enumerate(_QOL):
        facts = [("atTime", E(f"markus-t-{key}")), ("recordsQoL", E(f"markus-qol-{key}"))]
        if i + 1 < len(_QOL):
            facts.append(("precedes", E(f"markus-qs-{_QOL[i + 1][0]}")))
        b.node(f"markus-qs-{key}", "QoLMeasurementState", *facts)
        b.node(f"markus-qol-{key}", "QualityOfLifeInfo", ("qolScore", Decimal(score)))

    b.node("markus-ae-colitis", "AdverseEvent",
           ("hasCategory", E("colitis")), ("hasSeverityGrade", E("markus-ae-grade")),
           ("recordedAt", E("markus-t-m3")),
           ("confirmedBy", [E("markus-test-colonoscopy"), E("markus-test-calprotectin")]),
           ("managedByTreatment", E("markus-corticosteroid")), ("causedBy", E("markus-immunotherapy")),
           ("associatedWith", E("melanoma-metastatic")), ("reportedBy", E("dr-schmidt")),
           ("managedByStakeholder", E("dr-schmidt")))
    b.node("markus-ae-grade", "SeverityGrade", ("gradeValue", 2))
    b.node("markus-test-colonoscopy", "Test")
    b.node("markus-test-calprotectin", "Test")

    b.node("markus-safety-event", "SafetyEvent", ("involvesPatient", E("markus")),
           ("triggeredBy", E("markus-immunotherapy")),
           ("mitigatedBy", [E("irae-guideline"), E("irae-monitoring")]))


def _aisha(b: _Builder) -> None:
    b.node("aisha", "Patient",
           ("personName", "Aisha"), ("ageYears", 39),
           ("hasDiagnosis", E("aisha-dx-susceptibility")),
           ("hasPatientData", [E("aisha-genomic"), E("aisha-lifestyle"), E("aisha-psychosocial")]),
           ("consentsTo", [E("aisha-consent-genomic"), E("aisha-consent-general")]))
    b.node("aisha-dx-susceptibility", "Diagnosis", ("concernsPatient", E("aisha")),
           ("concernsDisease", E("melanoma-susceptibility")))
    # germline marker, fixture-defined
    b.node("aisha-genomic", "GenomicData", ("alignedWith", "germline CDKN2A pathogenic variant"),
           ("restrictedBy", E("gdpr-art9")), ("hasSource", E("genomics-lab")))
    b.node("aisha-lifestyle", "LifestyleData")
    b.node("aisha-psychosocial", "PsychosocialData")
    # revocable: the site consent record for this statement may be withdrawn
    b.node("aisha-consent-genomic", "ConsentStatement", ("consentGranted", True),
           ("coversData", E("aisha-genomic")))
    b.node("aisha-consent-general", "ConsentStatement", ("consentGranted", True),
           ("coversData", [E("aisha-lifestyle"), E("aisha-psychosocial")]))


def persona_assertions() -> list[Assertion]:
    b = _Builder()
    _shared(b)
    _elena(b)
    _markus(b)
    _aisha(b)
    return b.out


def generate_personas() -> Dataset:
    return Dataset(persona_assertions())


PATIENTS = (E("elena"), E("markus"), E("aisha"))


# -- seeded variants ----------------------------------------------------------


def _variant(add=(), drop=lambda a: False) -> Dataset:
    return Dataset([a for a in persona_assertions() if not drop(a)] + list(add))


def violation_variants() -> dict[str, tuple[str, Dataset]]:
    """name -> (expected violation kind, dataset with that one violation)."""
    return {
        "diagnosis-two-patients": (
            "max-cardinality",
            _variant(add=[Assertion(E("elena-dx-melanoma"), pmdt("concernsPatient"), E("markus"))])),
        "diagnosis-no-disease": (
            "min-cardinality",
            _variant(drop=lambda a: a.subject == E("elena-dx-diabetes") and a.predicate == pmdt("concernsDisease"))),
        "patient-no-data": (
            "min-cardinality",
            _variant(add=[Assertion(E("jonas"), RDF_TYPE, pmdt("Patient")),
                          Assertion(E("jonas"), pmdt("personName"), Literal("Jonas")),
                          Assertion(E("jonas"), pmdt("ageYears"), Literal("47", "integer"))])),
    }


def inference_variants() -> dict[str, Dataset]:
    """Variants exercising the severity rule and the follow-up advisory."""
    grade = pmdt("gradeValue")
    return {
        "ae-grade-3": _variant(
            add=[Assertion(E("markus-ae-grade"), grade, Literal("3", "integer"))],
            drop=lambda a: a.subject == E("markus-ae-grade") and a.predicate == grade),
        "missing-surgery-followup": _variant(
            drop=lambda a: E("elena-surgery-fu") in (a.subject, a.object)),
    }


# -- scaled corpus ------------------------------------------------------------


def _rename(term, suffix: str):
    if isinstance(term, Iri) and term.value.startswith(EX):
        return Iri(term.value + suffix)
    return term


def scaled_personas(copies: int) -> Dataset:
    """``copies`` disjoint renamed copies of the persona dataset; copy 0
    keeps the original IRIs."""
    base = persona_assertions()
    ds = Dataset()
    for i in range(copies):
        suffix = "" if i == 0 else f"-c{i}"
        ds.update(Assertion(_rename(a.subject, suffix), a.predicate, _rename(a.object, suffix)) for a in base)
    return ds
