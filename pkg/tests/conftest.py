from pathlib import Path

import pytest

from paperdeck import CorpusStats, HashedEmbedder, parse_paper, parse_slides

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture(scope="session")
def sample_paper_xml() -> str:
    return (FIXTURES / "sample.paper.xml").read_text(encoding="utf-8")


@pytest.fixture(scope="session")
def sample_paper(sample_paper_xml):
    return parse_paper(sample_paper_xml)


@pytest.fixture(scope="session")
def sample_slides_text() -> str:
    return (FIXTURES / "sample.slides.txt").read_text(encoding="utf-8")


@pytest.fixture(scope="session")
def sample_slides(sample_slides_text):
    return parse_slides(sample_slides_text)


@pytest.fixture(scope="session")
def embedder():
    return HashedEmbedder(dim=64)


@pytest.fixture(scope="session")
def default_stats():
    return CorpusStats.default()
