import os

import pytest

from smarttutor import context_store as cs
from smarttutor.event_log import EventLog

FIXTURES = os.path.join(os.path.dirname(__file__), "fixtures")
HW1_CORPUS_PATH = os.path.join(FIXTURES, "hw1_corpus.txt")


@pytest.fixture(scope="session")
def hw1_corpus():
    return cs.load_corpus(HW1_CORPUS_PATH)


@pytest.fixture
def embedder():
    return cs.LocalHashEmbedder(dim=64)


@pytest.fixture
def log(tmp_path):
    store = EventLog(str(tmp_path / "events.log"))
    yield store
    store.close()
