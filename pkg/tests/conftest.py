from __future__ import annotations

from importlib.resources import files

import pytest

from pargraph.rewrite import MatchSet
from pargraph.syntax import parse_document

SAMPLES = files("pargraph.samples")

_criteria: dict[int, tuple[str, str]] = {}


def sample_path(name: str) -> str:
    return str(SAMPLES.joinpath(name + ".pg"))


def load_sample(name: str):
    return parse_document(SAMPLES.joinpath(name + ".pg").read_text(), name + ".pg")


def all_matches(name: str) -> MatchSet:
    doc = load_sample(name)
    return MatchSet.all(doc.graphs["G"], doc.rules.values())


@pytest.fixture
def sample():
    return load_sample


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title): acceptance criterion number and title")


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.outcome != "passed"):
        return
    marker = report.user_properties and dict(report.user_properties).get("criterion")
    if marker:
        n, title = marker
        _criteria[n] = (title, "PASS" if report.passed else "FAIL")


@pytest.hookimpl(tryfirst=True)
def pytest_runtest_setup(item):
    m = item.get_closest_marker("criterion")
    if m is not None:
        item.user_properties.append(("criterion", tuple(m.args)))


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_criteria):
        title, outcome = _criteria[n]
        terminalreporter.write_line(f"criterion {n:2d}: {outcome}  {title}")
