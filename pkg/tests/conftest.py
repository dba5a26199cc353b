import numpy as np
import pytest

from topicbridge.corpus import documents_from_records
from topicbridge.runner import default_params
from topicbridge.synth import generate_corpus
from topicbridge.textpipe import (ENGLISH_STOPWORDS, Source, build_vocabulary,
                                  interleave_schedule)

_ACCEPTANCE_LINES = []


def record_criterion(number, passed, detail):
    _ACCEPTANCE_LINES.append(f"criterion {number:>2}: {'PASS' if passed else 'FAIL'}  {detail}")


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE_LINES, key=lambda s: int(s.split(":")[0].split()[1])):
            terminalreporter.write_line(line)


def build_stream(corpus, fields="title", cap=None):
    docs = documents_from_records(corpus.records, fields)
    vocab = build_vocabulary(docs, min_df=2, max_df_ratio=0.95, stopwords=ENGLISH_STOPWORDS)
    online = [d for d in docs if d.source is Source.ONLINE]
    offline = [d for d in docs if d.source is Source.OFFLINE]
    schedule = interleave_schedule(online, offline, corpus.months[0], corpus.months[-1], cap=cap)
    return schedule, vocab


def cosine_matrix(A, B):
    A = A / np.linalg.norm(A, axis=1, keepdims=True)
    B = B / np.linalg.norm(B, axis=1, keepdims=True)
    return A @ B.T


@pytest.fixture(scope="session")
def small_corpus():
    return generate_corpus(months=2, docs_per_month=40, vocab_size=200, seed=3)


@pytest.fixture(scope="session")
def small_stream(small_corpus):
    return build_stream(small_corpus)


@pytest.fixture
def params():
    return default_params()
