import io
import subprocess
import sys

import pytest

from pmdt.cli import main
from pmdt.fixtures import DATA_DIR, SUITE, load_golden_expected
from pmdt.query import parse_csv
from pmdt.store import load_dataset
from pmdt.turtle import parse_turtle

PERSONAS = str(DATA_DIR / "personas.ttl")
FEDERATION = str(DATA_DIR / "federation.json")


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = main(list(argv), out=out, err=err)
    return code, out.getvalue(), err.getvalue()


def test_validate_exit_codes():
    assert run("validate", PERSONAS)[0] == 0
    for name in ("patient-no-data", "diagnosis-two-patients", "diagnosis-no-disease"):
        code, out, _ = run("validate", str(DATA_DIR / "violations" / f"{name}.ttl"))
        assert code == 1
        (line,) = out.splitlines()
        assert line.startswith("VIOLATION\t")
    code, out, _ = run("validate", str(DATA_DIR / "variants" / "missing-surgery-followup.ttl"))
    assert code == 1 and out.startswith("ADVISORY\tmissing-followup\t")


def test_usage_and_input_errors(tmp_path):
    assert run()[0] == 2
    assert run("validate")[0] == 2
    bad = tmp_path / "bad.ttl"
    bad.write_text("@prefix ex: <https://w3id.org/pmdt/example/> .\nex:a ex:b\n", encoding="utf-8")
    code, _, err = run("validate", str(bad))
    assert code == 2 and err.startswith("pmdt validate:") and "bad.ttl:" in err
    code, _, err = run("validate", str(tmp_path / "missing.ttl"))
    assert code == 2
    code, _, err = run("query", PERSONAS, "--query", "SELECT ?x WHERE { ?x a }")
    assert code == 2


def test_query_matches_golden_csv():
    for q in SUITE:
        if q.dataset != "personas":
            continue
        code, out, _ = run("query", PERSONAS, "--query", str(DATA_DIR / "suite" / f"{q.name}.rq"), "--format", "csv")
        assert code == 0
        assert parse_csv(out) == load_golden_expected(q.name), q.name


def test_query_on_empty_store_prints_header():
    q = next(q for q in SUITE if q.dataset == "empty")
    code, out, _ = run("query", "--query", q.text, "--format", "csv")
    assert code == 0 and out == (DATA_DIR / "suite" / f"{q.name}.expected.csv").read_text(encoding="utf-8")


def test_query_evaluation_error_exits_3():
    text = "PREFIX pmdt: <https://w3id.org/pmdt/ontology#>\nSELECT ?n WHERE { ?p pmdt:personName ?n FILTER(?n > 3) }"
    assert run("query", PERSONAS, "--query", text)[0] == 3
    text = "PREFIX pmdt: <https://w3id.org/pmdt/ontology#>\nSELECT ?n WHERE { ?n a pmdt:Nothing }"
    assert run("query", PERSONAS, "--query", text)[0] == 3


def test_fedquery_matches_local_query():
    for q in SUITE[:6]:
        if q.dataset != "personas":
            continue
        rq = str(DATA_DIR / "suite" / f"{q.name}.rq")
        local = run("query", PERSONAS, "--query", rq, "--format", "csv")
        fed = run("fedquery", FEDERATION, "--query", rq, "--role", "clinician", "--format", "csv")
        assert fed[0] == 0 and fed[1] == local[1], q.name


def test_fedquery_audit_wire_and_errors():
    rq = str(DATA_DIR / "suite" / "patients.rq")
    code, out, _ = run("fedquery", FEDERATION, "--query", rq, "--role", "clinician", "--show-audit", "--show-wire")
    assert code == 0
    assert "\n# audit\n" in out and "\n# wire\n" in out
    code, _, err = run("fedquery", FEDERATION, "--query", rq, "--role", "nobody")
    assert code == 3 and "unknown-role" in err
    assert run("fedquery", "/nonexistent.json", "--query", rq, "--role", "clinician")[0] == 2


def test_export_reloads_to_the_same_data(tmp_path):
    inst = tmp_path / "inst.ttl"
    schema = tmp_path / "schema.ttl"
    merged = tmp_path / "merged.ttl"
    assert run("export", "--what", "instances", "--out", str(inst), PERSONAS)[0] == 0
    assert run("export", "--what", "schema", "--out", str(schema))[0] == 0
    assert run("export", "--what", "merged", "--out", str(merged), PERSONAS)[0] == 0
    assert load_dataset(inst) == load_dataset(PERSONAS)
    delta, ds = parse_turtle(merged.read_text(encoding="utf-8"))
    assert ds == load_dataset(PERSONAS)
    schema_delta, _ = parse_turtle(schema.read_text(encoding="utf-8"))
    assert delta == schema_delta
    # the exported schema is itself a valid --schema argument
    assert run("validate", "--schema", str(schema), PERSONAS)[0] == 0
    assert run("export", "--what", "everything", "--out", str(inst))[0] == 2


COMMANDS = [
    ("validate", PERSONAS),
    ("validate", str(DATA_DIR / "violations" / "patient-no-data.ttl")),
    ("query", PERSONAS, "--query", str(DATA_DIR / "suite" / "irae-after-immunotherapy.rq")),
    ("query", PERSONAS, "--query", str(DATA_DIR / "suite" / "qol-trajectory.rq"), "--format", "csv"),
    ("fedquery", FEDERATION, "--query", str(DATA_DIR / "suite" / "comorbidity.rq"), "--role", "researcher",
     "--show-audit", "--show-wire"),
]


@pytest.mark.parametrize("argv", COMMANDS, ids=lambda a: a[0])
def test_commands_are_byte_stable(argv):
    first = run(*argv)
    assert run(*argv) == first


def test_file_outputs_are_byte_stable(tmp_path):
    for k in ("a", "b"):
        assert run("export", "--what", "merged", "--out", str(tmp_path / f"{k}.ttl"), PERSONAS)[0] == 0
        assert run("fixtures", "--out", str(tmp_path / k))[0] == 0
    assert (tmp_path / "a.ttl").read_bytes() == (tmp_path / "b.ttl").read_bytes()
    files_a = sorted(p.relative_to(tmp_path / "a") for p in (tmp_path / "a").rglob("*") if p.is_file())
    assert files_a
    for rel in files_a:
        assert (tmp_path / "a" / rel).read_bytes() == (tmp_path / "b" / rel).read_bytes(), rel


def test_module_entry_point_runs_in_a_fresh_process():
    """Byte stability across interpreter runs, where hash seeds differ."""
    argv = [sys.executable, "-m", "pmdt", "fedquery", FEDERATION, "--query",
            str(DATA_DIR / "suite" / "irae-after-immunotherapy.rq"), "--role", "clinician", "--show-wire"]
    outs = {subprocess.run(argv, capture_output=True, env={"PYTHONHASHSEED": seed}, check=True).stdout
            for seed in ("1", "2")}
    assert len(outs) == 1
