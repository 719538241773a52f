from pathlib import Path

import pytest

from moviesent import load_vocab

REPO_ROOT = Path(__file__).resolve().parent.parent
DATA_DIR = REPO_ROOT / "data"
FIXTURE_DIR = Path(__file__).resolve().parent / "fixtures"


@pytest.fixture(scope="session")
def toy_vocab_path() -> Path:
    return DATA_DIR / "toy_vocab.txt"


@pytest.fixture(scope="session")
def toy_vocab(toy_vocab_path):
    return load_vocab(toy_vocab_path)


@pytest.fixture(scope="session")
def tokenizer_cases_path() -> Path:
    return FIXTURE_DIR / "tokenizer_cases.tsv"
