"""Competency-question query suite over the persona dataset.

Query texts are fixture-defined translations of the competency questions.
Expected results are never written by hand: they come from the naive
evaluator over the dataset each query targets.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..query.naive import naive_evaluate
from ..query.parser import parse_query
from ..query.results import BindingSet
from ..schema import SchemaGraph
from ..store import Dataset
from ..vocabulary import bootstrap_pmdt_schema
from .personas import generate_personas

PROLOGUE = ("PREFIX pmdt: <https://w3id.org/pmdt/ontology#>\n"
            "PREFIX ex: <https://w3id.org/pmdt/example/>\n")


@dataclass(frozen=True)
class SuiteQuery:
    name: str
    view: str
    question: str
    body: str
    dataset: str = "personas"  # or "empty"

    @property
    def text(self) -> str:
        return f"# {self.question}\n{PROLOGUE}{self.body.strip()}\n"


SUITE = (
    SuiteQuery("patients", "main", "Which patients does the twin describe?", """
SELECT ?p ?name ?age WHERE {
  ?p a pmdt:Patient .
  ?p pmdt:personName ?name .
  ?p pmdt:ageYears ?age .
}"""),
    SuiteQuery("patients-over-50", "main", "Which patients are older than 50?", """
SELECT ?p ?age WHERE {
  ?p pmdt:ageYears ?age .
  FILTER(?age > 50)
}"""),
    SuiteQuery("comorbidity", "main", "Which comorbid diagnoses accompany each patient's cancer?", """
SELECT ?p ?dx ?comorbidity WHERE {
  ?p pmdt:hasDiagnosis ?cancerDx .
  ?cancerDx pmdt:concernsDisease ?cancer .
  ?cancer a pmdt:PatientCancerDisease .
  ?p pmdt:hasDiagnosis ?dx .
  ?dx pmdt:concernsDisease ?comorbidity .
  FILTER(?dx != ?cancerDx)
}"""),
    SuiteQuery("surgery-followup-outcomes", "treatment", "Which patient-centred outcomes were reported after surgery?", """
SELECT ?p ?surgery ?outcome ?score WHERE {
  ?p pmdt:treatedWith ?surgery .
  ?surgery a pmdt:Surgery .
  ?fu pmdt:followUpOfSurgery ?surgery .
  ?fu pmdt:reportsOutcome ?outcome .
  ?outcome pmdt:basedOnQoL ?qol .
  ?qol pmdt:qolScore ?score .
}"""),
    SuiteQuery("treatment-followups", "treatment", "Which follow-up covers each treatment?", """
SELECT ?p ?treatment ?kind ?fu WHERE {
  ?p pmdt:treatedWith ?treatment .
  ?fu pmdt:hasPerformanceEvaluation ?perf .
  ?perf pmdt:evaluatesTreatment ?treatment .
  ?fu a ?kind .
}"""),
    SuiteQuery("qol-trajectory", "trajectory", "How did Markus's quality of life evolve after immunotherapy?", """
SELECT ?state ?time ?score WHERE {
  ex:markus-qol-trajectory pmdt:hasState ?state .
  ?state pmdt:atTime ?t .
  ?t pmdt:timestampValue ?time .
  ?state pmdt:recordsQoL ?qol .
  ?qol pmdt:qolScore ?score .
}
ORDER BY ?time"""),
    SuiteQuery("qol-before-after", "trajectory", "What was the QoL before treatment and 3 months after?", """
SELECT ?before ?after WHERE {
  ?s1 pmdt:precedes ?s2 .
  ?s1 pmdt:atTime ex:markus-t-baseline .
  ?s2 pmdt:atTime ex:markus-t-m3 .
  ?s1 pmdt:recordsQoL ?q1 .
  ?q1 pmdt:qolScore ?before .
  ?s2 pmdt:recordsQoL ?q2 .
  ?q2 pmdt:qolScore ?after .
}"""),
    SuiteQuery("treatment-states", "trajectory", "In which order did Markus's treatment states occur?", """
SELECT ?s1 ?s2 ?time WHERE {
  ?traj a pmdt:TreatmentTrajectory .
  ?traj pmdt:hasState ?s1 .
  ?s1 pmdt:precedes ?s2 .
  ?s1 pmdt:atTime ?t .
  ?t pmdt:timestampValue ?time .
}
ORDER BY ?time"""),
    SuiteQuery("privacy-genomic", "safety", "Which privacy regulations restrict access to Markus's genomic data?", """
SELECT ?data ?regulation WHERE {
  ex:markus pmdt:hasPatientData ?data .
  ?data a pmdt:GenomicData .
  ?data pmdt:restrictedBy ?regulation .
}"""),
    SuiteQuery("genomic-holders", "safety", "Whose genomic data is held, and under which regulation?", """
SELECT ?p ?data ?regulation WHERE {
  ?p pmdt:hasPatientData ?data .
  ?data a pmdt:GenomicData .
  ?data pmdt:restrictedBy ?regulation .
}"""),
    SuiteQuery("safety-rules", "safety", "Which safety rules mitigate events involving Markus?", """
SELECT ?event ?rule ?kind WHERE {
  ?event pmdt:involvesPatient ex:markus .
  ?event pmdt:mitigatedBy ?rule .
  ?rule a pmdt:MedicalSafetyRule .
  ?rule a ?kind .
}"""),
    SuiteQuery("pathway-responsibility", "pathways", "Which stakeholder is responsible for executing each step of Elena's pathway?", """
SELECT ?step ?who ?role WHERE {
  ex:elena-pathway pmdt:hasStep ?step .
  ?step pmdt:executedBy ?who .
  ?who pmdt:roleName ?role .
}
ORDER BY ?step"""),
    SuiteQuery("irae-after-immunotherapy", "adverse-events", "Which immune-related adverse events were reported after immunotherapy, with grade and time?", """
SELECT ?p ?ae ?category ?grade ?time WHERE {
  ?p pmdt:treatedWith ?therapy .
  ?therapy a pmdt:Immunotherapy .
  ?ae pmdt:causedBy ?therapy .
  ?ae pmdt:hasCategory ?category .
  ?category a pmdt:OrganSpecificIrAE .
  ?ae pmdt:hasSeverityGrade ?g .
  ?g pmdt:gradeValue ?grade .
  ?ae pmdt:recordedAt ?at .
  ?at pmdt:timestampValue ?time .
}"""),
    SuiteQuery("ae-management", "adverse-events", "How was each adverse event confirmed and managed?", """
SELECT ?ae ?medication ?test WHERE {
  ?ae pmdt:managedByTreatment ?medication .
  ?medication a pmdt:Medication .
  ?ae pmdt:confirmedBy ?test .
}"""),
    SuiteQuery("ae-profile", "adverse-events", "What is recorded about Markus's colitis event?", """
SELECT ?property ?value WHERE {
  ex:markus-ae-colitis ?property ?value .
}"""),
    SuiteQuery("empty-store", "main", "Which patients exist in an empty twin?", """
SELECT ?p ?name WHERE {
  ?p a pmdt:Patient .
  ?p pmdt:personName ?name .
}""", dataset="empty"),
)


def suite_dataset(name: str) -> Dataset:
    if name == "empty":
        return Dataset()
    return generate_personas()


def generate_query_suite(schema: SchemaGraph | None = None) -> list[tuple[str, str, BindingSet]]:
    """(name, query text, expected bindings) per suite query."""
    schema = schema if schema is not None else bootstrap_pmdt_schema()
    datasets = {"personas": generate_personas(), "empty": Dataset()}
    out = []
    for q in SUITE:
        expected = naive_evaluate(parse_query(q.text), datasets[q.dataset], schema)
        out.append((q.name, q.text, expected))
    return out
