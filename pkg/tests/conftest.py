from pathlib import Path

import pytest

from composediag.parser import parse_compose

ROOT = Path(__file__).resolve().parent.parent
FIXTURES = ROOT / "fixtures"
GOLDEN = Path(__file__).resolve().parent / "golden"

# cycle.yaml is the deliberately invalid member of the corpus
VALID_FIXTURES = sorted(p for p in FIXTURES.glob("*.yaml") if p.name != "cycle.yaml")


def fixture_text(name: str) -> str:
    return (FIXTURES / name).read_text(encoding="utf-8")


def golden_text(name: str) -> str:
    return (GOLDEN / name).read_text(encoding="utf-8")


@pytest.fixture
def dblog():
    descriptor, _ = parse_compose(fixture_text("dblog.yaml"))
    return descriptor


@pytest.fixture
def db():
    descriptor, _ = parse_compose(fixture_text("db.yaml"))
    return descriptor
