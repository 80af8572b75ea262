"""Shared fixtures: one session-scoped corpus, vocabulary, and trained model.

Everything is generated into a temp directory so the suite never depends
on (or mutates) files checked into the repository.
"""

import pathlib

import pytest
from hypothesis import HealthCheck, settings

from clsec.channel_sim import ebn0_db_from_noise_std
from clsec.corpusgen import write_corpus_files
from clsec.eval_harness import calibrate_noise_std
from clsec.masker import Vocabulary, load_vocabulary
from clsec.semantic_prior import train_ngram

settings.register_profile(
    "suite", deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("suite")

CORPUS_WORDS = 60000
CORPUS_SEED = 0
CORRUPTION_TARGET = 0.15
TRAIN_FRACTION = 0.8
SEMANTIC_WEIGHT = 2.0


@pytest.fixture(scope="session")
def data_dir(tmp_path_factory) -> pathlib.Path:
    d = tmp_path_factory.mktemp("data")
    write_corpus_files(
        str(d / "corpus.txt"),
        str(d / "vocab.txt"),
        n_words=CORPUS_WORDS,
        seed=CORPUS_SEED,
    )
    return d


@pytest.fixture(scope="session")
def corpus_path(data_dir) -> str:
    return str(data_dir / "corpus.txt")


@pytest.fixture(scope="session")
def vocab_path(data_dir) -> str:
    return str(data_dir / "vocab.txt")


@pytest.fixture(scope="session")
def corpus_words(corpus_path) -> list[str]:
    return pathlib.Path(corpus_path).read_text(encoding="utf-8").split()


@pytest.fixture(scope="session")
def vocab(vocab_path) -> Vocabulary:
    return load_vocabulary(vocab_path)


@pytest.fixture(scope="session")
def ngram_model(corpus_path, vocab):
    return train_ngram(corpus_path, vocab, fraction=TRAIN_FRACTION)


@pytest.fixture(scope="session")
def operating_noise_std(corpus_words) -> float:
    return calibrate_noise_std(corpus_words, CORRUPTION_TARGET)


@pytest.fixture(scope="session")
def operating_snr_db(operating_noise_std) -> float:
    return ebn0_db_from_noise_std(operating_noise_std)
