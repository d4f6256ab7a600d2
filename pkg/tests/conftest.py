from __future__ import annotations

from pathlib import Path

import pytest

from wfreach.formats import parse_native

FIXTURES = Path(__file__).parent / "fixtures"


def load_fixture(name, validate=True):
    return parse_native((FIXTURES / name).read_text(), validate=validate)


@pytest.fixture(scope="session")
def fig1():
    return load_fixture("fig1.wfnet")


@pytest.fixture(scope="session")
def fig5():
    return load_fixture("fig5.wfnet")


@pytest.fixture(scope="session")
def fig12():
    return load_fixture("fig12.wfnet")


@pytest.fixture(scope="session")
def fig2():
    return load_fixture("fig2.wfnet", validate=False)
