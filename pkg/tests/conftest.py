import sys
import time
from contextlib import contextmanager
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from pmdt.fixtures import decompose_dataset, generate_personas, write_bundle  # noqa: E402
from pmdt.reasoner import classify  # noqa: E402
from pmdt.vocabulary import bootstrap_pmdt_schema  # noqa: E402


@pytest.fixture(scope="session")
def schema():
    return bootstrap_pmdt_schema()


@pytest.fixture(scope="session")
def closure(schema):
    return classify(schema)


@pytest.fixture(scope="session")
def personas():
    return generate_personas()


@pytest.fixture(scope="session")
def fixture_tables(personas, closure):
    return decompose_dataset(personas, closure)


@pytest.fixture(scope="session")
def bundle_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("bundle")
    write_bundle(out)
    return out


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture()
def criterion(capsys):
    """Context manager that times one acceptance criterion, checks its time
    limit and records a PASS/FAIL line for the end-of-run summary."""

    @contextmanager
    def run(number, title, limit=None):
        start = time.perf_counter()
        failure = None
        try:
            yield
        except BaseException as exc:  # recorded, then re-raised
            failure = exc
        elapsed = time.perf_counter() - start
        over = limit is not None and elapsed >= limit
        bound = f" (limit {limit:g} s)" if limit is not None else ""
        status = "FAIL" if failure is not None or over else "PASS"
        line = f"criterion {number}: {status} {title} [{elapsed:.2f} s{bound}]"
        ACCEPTANCE_LINES.append(line)
        with capsys.disabled():
            print("\n" + line)
        if failure is not None:
            raise failure
        assert not over, f"criterion {number} took {elapsed:.2f} s, limit {limit:g} s"

    return run


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
