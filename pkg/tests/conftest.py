from __future__ import annotations

import pytest

from garden.corpus import Document


def make_doc(text: str, doc_id: str = "d1", source: str = "t") -> Document:
    return Document(id=doc_id, text=text, source=source)


def make_docs(texts) -> list[Document]:
    return [Document(id=f"t#{i}", text=t, source="t") for i, t in enumerate(texts, start=1)]


@pytest.fixture
def docs_factory():
    return make_docs


def pytest_runtest_logreport(report):
    # One visible pass/fail line per acceptance criterion.
    if report.when != "call" or "test_acceptance" not in report.nodeid:
        return
    status = "PASS" if report.passed else "FAIL"
    name = report.nodeid.split("::")[-1]
    print(f"\n[{status}] {name}", flush=True)
