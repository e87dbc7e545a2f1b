from __future__ import annotations

import pytest

from vcmmap.anchors import load_anchors
from vcmmap.cli import data_path
from vcmmap.terminology import load_terminology
from vcmmap.vcm import load_vcm_ontology

from tests.helpers import ACCEPTANCE


@pytest.fixture(scope="session")
def graph():
    return load_terminology(data_path("concepts.tsv"), data_path("relationships.tsv"))


@pytest.fixture(scope="session")
def ont():
    return load_vcm_ontology(data_path("vcm_ontology.txt"))


@pytest.fixture(scope="session")
def table(graph, ont):
    return load_anchors([data_path("anchors.tsv"), data_path("overrides.tsv")], graph, ont)


@pytest.fixture(scope="session")
def base_table(graph, ont):
    """Anchor table with no override rows installed."""
    return load_anchors(data_path("anchors.tsv"), graph, ont)


@pytest.fixture
def write(tmp_path):
    def _write(name: str, text: str):
        path = tmp_path / name
        path.write_text(text, encoding="utf-8")
        return path

    return _write


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE, key=lambda k: int(k[2:])):
        desc, ok = ACCEPTANCE[key]
        terminalreporter.write_line(f"{key} {'PASS' if ok else 'FAIL'}  {desc}")
