from __future__ import annotations

import json
from pathlib import Path

import pytest

from docstitch.evaluation import GoldAnnotations
from docstitch.model import CanonicalDocument

FIXTURES = Path(__file__).parent / "fixtures"
CORPUS_DIR = FIXTURES / "corpus"
GOLD_DIR = FIXTURES / "gold"
GOLDEN_DIR = FIXTURES / "golden"

CORPUS_IDS = sorted(p.stem for p in CORPUS_DIR.glob("*.json"))


def load_corpus_doc(doc_id: str) -> CanonicalDocument:
    return CanonicalDocument.from_json((CORPUS_DIR / f"{doc_id}.json").read_text())


def load_gold(doc_id: str) -> GoldAnnotations:
    return GoldAnnotations.from_dict(
        json.loads((GOLD_DIR / f"{doc_id}.gold.json").read_text())
    )


@pytest.fixture(scope="session")
def corpus() -> dict[str, CanonicalDocument]:
    return {doc_id: load_corpus_doc(doc_id) for doc_id in CORPUS_IDS}


@pytest.fixture(scope="session")
def field_manual() -> CanonicalDocument:
    return load_corpus_doc("field_manual")
