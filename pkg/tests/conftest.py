import sys
from pathlib import Path

import pytest

REPO_ROOT = Path(__file__).resolve().parents[1]
TOY_DIR = REPO_ROOT / "data" / "toy"

sys.path.insert(0, str(REPO_ROOT))  # for tests.brute_force_reference

from qppfuse.corpus import build_index, ingest, load_lexicon, load_qrels, load_queries


@pytest.fixture(scope="session")
def toy_dir():
    return TOY_DIR


@pytest.fixture(scope="session")
def toy_docs():
    return ingest(TOY_DIR / "docs.jsonl", "jsonl")


@pytest.fixture(scope="session")
def toy_index(toy_docs):
    return build_index(toy_docs)


@pytest.fixture(scope="session")
def toy_queries():
    return load_queries(TOY_DIR / "queries.tsv")


@pytest.fixture(scope="session")
def toy_qrels():
    return load_qrels(TOY_DIR / "qrels.txt")


@pytest.fixture(scope="session")
def toy_lexicon():
    return load_lexicon(TOY_DIR / "lexicon.tsv")
