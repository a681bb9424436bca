import os
from pathlib import Path

import hypothesis
import pytest

from stream_triage.corpus import ingest

hypothesis.settings.register_profile("fast", max_examples=20)
hypothesis.settings.register_profile("default", max_examples=100, deadline=None)
hypothesis.settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

JIRA_ENV = "STREAM_TRIAGE_JIRA"

_criteria = {}


@pytest.fixture(scope="session")
def jira_ingest():
    path = os.environ.get(JIRA_ENV)
    if not path or not Path(path).exists():
        pytest.skip(f"Apache Jira export not available (set {JIRA_ENV} to a JSONL/CSV export)")
    return ingest(path)


def pytest_runtest_logreport(report):
    if "test_acceptance.py" not in report.nodeid:
        return
    name = report.nodeid.split("::")[-1]
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        outcome = {"passed": "PASS", "failed": "FAIL", "skipped": "SKIP"}[report.outcome]
        if _criteria.get(name) != "FAIL":
            _criteria[name] = outcome


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for name, outcome in sorted(_criteria.items()):
        terminalreporter.write_line(f"{outcome:<4}  {name}")
