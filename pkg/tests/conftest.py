from pathlib import Path

import pytest

from famvar import parse_family_model, parse_model_document

DATA = Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def hall_xml() -> bytes:
    return (DATA / "hall_model.xml").read_bytes()


@pytest.fixture(scope="session")
def hall_model(hall_xml):
    return parse_family_model(hall_xml)


@pytest.fixture(scope="session")
def academic_requirements_xml() -> bytes:
    return (DATA / "academic_requirements.xml").read_bytes()


@pytest.fixture(scope="session")
def reserve_hall_doc():
    return parse_model_document((DATA / "reserve_hall_doc.xml").read_bytes())


@pytest.fixture(scope="session")
def golden_reduced_model() -> bytes:
    return (DATA / "golden" / "academic_reduced_model.xml").read_bytes()


@pytest.fixture(scope="session")
def golden_open_decisions() -> str:
    return (DATA / "golden" / "academic_open_decisions.txt").read_text(encoding="utf-8")
