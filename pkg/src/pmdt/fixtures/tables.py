"""Relational decomposition of an instance dataset into CSV-backed sites.

Each class gets a main table keyed by individual (one column per
single-valued property) and one two-column link table per multi-valued
property. Tables about PatientData carry an unmapped ``patient`` column
naming the owning patient, which sites use for consent checks. Lifting
every table and taking the union gives back the dataset exactly.
"""

from __future__ import annotations

import json
import os
import re
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

from ..reasoner import SubsumptionClosure
from ..store import Dataset, Pattern
from ..terms import EX, RDF_TYPE, Iri, Literal, PrefixMap, pmdt
from ..federation.mapping import (AccessPolicyRule, ColumnMapping, ConsentRecord, SiteDescriptor, TableMapping,
                                  Template, descriptor_to_dict, write_csv)

PATIENT_DATA = pmdt("PatientData")
HAS_PATIENT_DATA = pmdt("hasPatientData")


@dataclass
class TableData:
    mapping: TableMapping
    header: tuple
    rows: list = field(default_factory=list)


def snake(name: str) -> str:
    return re.sub(r"(?<=[a-z0-9])([A-Z])", r"_\1", name).lower()


def _local(term: Iri) -> str:
    if not term.value.startswith(EX):
        raise ValueError(f"{term} is outside the example namespace; fixture tables cannot template it")
    return term.value[len(EX):]


def _cell(term) -> str:
    if isinstance(term, Iri):
        return _local(term)
    if term.lexical == "":
        raise ValueError("empty string literals cannot be stored in a CSV cell")
    return term.lexical


def decompose_dataset(ds: Dataset, closure: SubsumptionClosure) -> list[TableData]:
    """Tables whose lifted union equals ``ds``. Every individual must have
    exactly one asserted type."""
    by_class: dict[Iri, list[Iri]] = defaultdict(list)
    for s in ds.individuals():
        types = sorted(ds.types_of(s))
        if len(types) != 1:
            raise ValueError(f"{s} has {len(types)} asserted types; fixture tables need exactly one")
        by_class[types[0]].append(s)

    tables: list[TableData] = []
    for cls in sorted(by_class, key=lambda c: c.local_name):
        subjects = sorted(by_class[cls])
        owned = closure.is_subclass(cls, PATIENT_DATA)
        owner: dict[Iri, str] = {}
        if owned:
            for s in subjects:
                owners = ds.subjects(HAS_PATIENT_DATA, s)
                if len(owners) != 1:
                    raise ValueError(f"{s} needs exactly one owning patient, found {len(owners)}")
                owner[s] = _local(owners[0])

        values: dict[Iri, dict[Iri, list]] = {s: defaultdict(list) for s in subjects}
        props: set[Iri] = set()
        for s in subjects:
            for a in ds.match(Pattern(s)):
                if a.predicate == RDF_TYPE:
                    continue
                props.add(a.predicate)
                values[s][a.predicate].append(a.object)
        props_sorted = sorted(props, key=lambda p: p.local_name)
        functional = [p for p in props_sorted if all(len(values[s].get(p, ())) <= 1 for s in subjects)]
        multi = [p for p in props_sorted if p not in functional]

        def column_for(p: Iri, col: str) -> ColumnMapping:
            objs = [o for s in subjects for o in values[s].get(p, ())]
            if all(isinstance(o, Iri) for o in objs):
                return ColumnMapping(col, p, template=Template(EX + "{" + col + "}"))
            dts = {o.datatype for o in objs if isinstance(o, Literal)}
            if len(dts) != 1 or any(isinstance(o, Iri) for o in objs):
                raise ValueError(f"{cls.local_name}.{p.local_name} mixes value kinds")
            return ColumnMapping(col, p, datatype=dts.pop())

        patient_template = Template(EX + "{patient}") if owned else None
        extra = ("patient",) if owned else ()
        cols = [column_for(p, snake(p.local_name)) for p in functional]
        main = TableData(
            TableMapping(cls.local_name, "", cls, Template(EX + "{id}"), tuple(cols), patient_template),
            ("id",) + tuple(c.column for c in cols) + extra)
        for s in subjects:
            row = [_local(s)]
            for p in functional:
                vs = values[s].get(p, ())
                row.append(_cell(vs[0]) if vs else "")
            main.rows.append(tuple(row) + ((owner[s],) if owned else ()))
        tables.append(main)

        for p in multi:
            col = column_for(p, snake(p.local_name))
            link = TableData(
                TableMapping(f"{cls.local_name}_{p.local_name}", "", cls, Template(EX + "{id}"), (col,),
                             patient_template),
                ("id", col.column) + extra)
            for s in subjects:
                for o in sorted(values[s].get(p, ()), key=_cell):
                    link.rows.append((_local(s), _cell(o)) + ((owner[s],) if owned else ()))
            tables.append(link)
    return tables


# -- site layout ----------------------------------------------------------------

# general hospital, oncology centre, genomics and research centre
SITE_OF_CLASS = {
    "site-b": ("Immunotherapy", "CancerTherapyFollowup", "AdverseEvent", "SeverityGrade", "Colitis", "Test",
               "TreatmentTrajectory", "TreatmentState", "TimeInstant", "TreatmentPerformance",
               "PatientCentredOutcome", "SafetyEvent", "ClinicalGuideline", "SafetyProcedure",
               "QoLTrajectory", "QoLMeasurementState", "QualityOfLifeInfo"),
    "site-c": ("GenomicData", "LifestyleData", "PsychosocialData", "PrivacyRegulation", "AccessPolicy",
               "DataSecurityPolicy"),
}
SITE_IDS = ("site-a", "site-b", "site-c")
ROLES = ("clinician", "researcher")


def default_assignment(tables: Sequence[TableData]) -> dict[str, str]:
    """table name -> site id for the three-site fixture split."""
    home = {c: site for site, classes in SITE_OF_CLASS.items() for c in classes}
    return {t.mapping.table_name: home.get(t.mapping.row_class.local_name, "site-a") for t in tables}


def permissive_policies() -> tuple:
    return tuple(AccessPolicyRule(role, "allow", frozenset({pmdt("Patient"), PATIENT_DATA})) for role in ROLES)


def consent_records(ds: Dataset, closure: SubsumptionClosure) -> tuple:
    """A blanket PatientData grant per patient, plus an explicit GenomicData
    grant for every patient with genomic data (the revocable one)."""
    out = []
    for p in sorted(ds.subjects(RDF_TYPE, pmdt("Patient"))):
        out.append(ConsentRecord(p, PATIENT_DATA, True))
        if any(pmdt("GenomicData") in ds.types_of(d) for d in ds.objects(p, HAS_PATIENT_DATA)):
            out.append(ConsentRecord(p, pmdt("GenomicData"), True))
    return tuple(out)


def write_sites(out_dir, tables: Sequence[TableData], assignment: Mapping[str, str], *,
                consents: Sequence[ConsentRecord] = (), policies: Sequence[AccessPolicyRule] | None = None,
                site_ids: Sequence[str] | None = None, prefixes: PrefixMap | None = None
                ) -> list[SiteDescriptor]:
    """Write one JSON descriptor and a CSV directory per site; return the
    descriptors. Sites without tables are still written."""
    out_dir = Path(out_dir)
    policies = permissive_policies() if policies is None else tuple(policies)
    ids = sorted(set(site_ids or ()) | set(assignment.values()))
    descs = []
    for sid in ids:
        mappings = []
        for t in tables:
            if assignment[t.mapping.table_name] != sid:
                continue
            rel = f"{sid}/{t.mapping.table_name}.csv"
            write_csv(out_dir / rel, t.header, t.rows)
            m = t.mapping
            mappings.append(TableMapping(m.table_name, rel, m.row_class, m.iri_template, m.columns,
                                         m.patient_template))
        desc = SiteDescriptor(sid, tuple(mappings), policies, tuple(consents), base_dir=str(out_dir))
        os.makedirs(out_dir, exist_ok=True)
        with open(out_dir / f"{sid}.json", "w", encoding="utf-8") as fh:
            json.dump(descriptor_to_dict(desc, prefixes), fh, indent=2, sort_keys=False)
            fh.write("\n")
        descs.append(desc)
    with open(out_dir / "federation.json", "w", encoding="utf-8") as fh:
        json.dump({"sites": [f"{sid}.json" for sid in ids]}, fh, indent=2)
        fh.write("\n")
    return descs
