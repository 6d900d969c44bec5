"""
Shared fixtures: the golden corpus
"""

from pathlib import Path

import pytest

from src.mpst.syntax import SourceModule, parse_module

CORPUS = Path(__file__).resolve().parent.parent / "corpus"


def load_corpus(name: str) -> SourceModule:
    return parse_module((CORPUS / f"{name}.mps").read_text(encoding="utf-8"))


@pytest.fixture(scope="session")
def social() -> SourceModule:
    return load_corpus("social_media")


@pytest.fixture(scope="session")
def exb() -> SourceModule:
    return load_corpus("boundedness")


@pytest.fixture(scope="session")
def unread() -> SourceModule:
    return load_corpus("unread")


@pytest.fixture(scope="session")
def small() -> SourceModule:
    return load_corpus("small")


@pytest.fixture
def corpus_path():
    return lambda name: str(CORPUS / name)
