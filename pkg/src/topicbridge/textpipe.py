"""Tokenization, global vocabulary, TF-IDF features and the monthly two-source schedule."""

import datetime as dt
import enum
import logging
import re
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .errors import ParameterError

log = logging.getLogger(__name__)


class Source(str, enum.Enum):
    ONLINE = "online"
    OFFLINE = "offline"


@dataclass(frozen=True)
class Document:
    id: str
    source: Source
    timestamp: dt.datetime
    text: str

    def __post_init__(self):
        if not self.id:
            raise ParameterError("document id must be non-empty")
        object.__setattr__(self, "source", Source(self.source))
        object.__setattr__(self, "timestamp", parse_timestamp(self.timestamp))


def parse_timestamp(value):
    """ISO-8601 date or datetime (or a date/datetime object) -> naive UTC datetime."""
    if isinstance(value, dt.datetime):
        ts = value
    elif isinstance(value, dt.date):
        ts = dt.datetime(value.year, value.month, value.day)
    else:
        text = str(value).strip()
        if text.endswith("Z"):
            text = text[:-1] + "+00:00"
        try:
            ts = dt.datetime.fromisoformat(text)
        except ValueError as exc:
            raise ParameterError(f"unparseable timestamp {value!r}") from exc
    if ts.tzinfo is not None:
        ts = ts.astimezone(dt.timezone.utc).replace(tzinfo=None)
    return ts


_URL = re.compile(r"(?:https?://|www\.)\S+", re.IGNORECASE)
_MENTION = re.compile(r"@\w+")
_WORD = re.compile(r"[^\W_]+")

# A compact English function-word list; no stemming is applied.
ENGLISH_STOPWORDS = frozenset("""
a about above after again against all am an and any are as at be because been
before being below between both but by can could did do does doing down during
each few for from further had has have having he her here hers herself him
himself his how if in into is it its itself just me more most my myself no nor
not now of off on once only or other our ours ourselves out over own same she
should so some such than that the their theirs them themselves then there these
they this those through to too under until up very was we were what when where
which while who whom why will with would you your yours yourself yourselves rt
amp via
""".split())


def tokenize(text):
    """Lowercase word tokens with URLs and @mentions removed.

    Hashtags keep their word ("#Vaxxed" -> "vaxxed"). Tokens are maximal runs
    of letters/digits, so "covid-19" gives "covid", "19"; single-character
    tokens are dropped.
    """
    text = _URL.sub(" ", text)
    text = _MENTION.sub(" ", text)
    return [tok for tok in _WORD.findall(text.lower()) if len(tok) >= 2]


@dataclass(frozen=True)
class Vocabulary:
    terms: tuple
    doc_freq: tuple
    num_docs: int
    index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "index", {t: i for i, t in enumerate(self.terms)})
        if len(self.index) != len(self.terms):
            raise ParameterError("vocabulary terms must be unique")

    def __len__(self):
        return len(self.terms)

    def idf(self):
        """Smoothed idf, ``ln((1 + N) / (1 + df)) + 1``."""
        df = np.asarray(self.doc_freq, dtype=np.float64)
        return np.log((1.0 + self.num_docs) / (1.0 + df)) + 1.0


def build_vocabulary(corpus, min_df=1, max_df_ratio=1.0, stopwords=None):
    """Global vocabulary over the whole corpus, sorted lexicographically.

    A token is kept when ``min_df <= df`` and ``df / N <= max_df_ratio`` and
    it is not a stopword.
    """
    corpus = list(corpus)
    if not corpus:
        raise ParameterError("cannot build a vocabulary from an empty corpus")
    if int(min_df) != min_df or min_df < 1:
        raise ParameterError(f"min_df must be an integer >= 1, got {min_df}")
    if not 0 < max_df_ratio <= 1:
        raise ParameterError(f"max_df_ratio must be in (0, 1], got {max_df_ratio}")
    stopwords = frozenset(stopwords or ())

    df = Counter()
    for doc in corpus:
        df.update(set(tokenize(doc.text)))
    n_docs = len(corpus)
    kept = sorted(
        t for t, c in df.items()
        if c >= min_df and c / n_docs <= max_df_ratio and t not in stopwords
    )
    return Vocabulary(tuple(kept), tuple(df[t] for t in kept), n_docs)


def tfidf_matrix(batch, vocab):
    """Documents-by-terms TF-IDF matrix for ``batch`` over a fixed vocabulary.

    ``tf`` is the term count divided by the number of in-vocabulary tokens in
    the document; out-of-vocabulary tokens are ignored and a document with
    none left becomes a zero row.
    """
    X = np.zeros((len(batch), len(vocab)))
    idf = vocab.idf()
    for r, doc in enumerate(batch):
        ids = [vocab.index[t] for t in tokenize(doc.text) if t in vocab.index]
        if not ids:
            continue
        counts = np.bincount(ids, minlength=len(vocab)).astype(np.float64)
        X[r] = counts / len(ids) * idf
    return X


def month_start(value):
    """First day of the month containing ``value``; ``"YYYY-MM"`` is accepted."""
    if isinstance(value, str) and re.fullmatch(r"\s*\d{4}-\d{2}\s*", value):
        value = value.strip() + "-01"
    ts = parse_timestamp(value)
    return dt.date(ts.year, ts.month, 1)


def month_range(start, end):
    start, end = month_start(start), month_start(end)
    if start > end:
        raise ParameterError(f"start month {start:%Y-%m} is after end month {end:%Y-%m}")
    months = []
    y, m = start.year, start.month
    while (y, m) <= (end.year, end.month):
        months.append(dt.date(y, m, 1))
        y, m = (y + 1, 1) if m == 12 else (y, m + 1)
    return months


@dataclass(frozen=True)
class ScheduleStep:
    time_index: int
    month: dt.date
    source: Source
    documents: tuple

    @property
    def empty(self):
        return not self.documents


@dataclass(frozen=True)
class StreamSchedule:
    steps: tuple

    def __len__(self):
        return len(self.steps)

    def __iter__(self):
        return iter(self.steps)

    @property
    def months(self):
        return sorted({s.month for s in self.steps})


def interleave_schedule(online, offline, start_month, end_month, cap=None, seed=0):
    """Alternate online and offline monthly batches along the timeline.

    Every calendar month in ``[start_month, end_month]`` contributes exactly
    two steps, online first, even if a batch is empty. ``cap`` keeps at most
    that many documents per source per month by seeded uniform sampling
    (original order preserved).
    """
    months = month_range(start_month, end_month)
    if cap is not None and (int(cap) != cap or cap < 1):
        raise ParameterError(f"cap must be a positive integer, got {cap}")
    rng = np.random.default_rng(seed)

    buckets = {}
    for expected, docs in ((Source.ONLINE, online), (Source.OFFLINE, offline)):
        for doc in docs:
            if doc.source is not expected:
                raise ParameterError(f"document {doc.id!r} is {doc.source.value}, expected {expected.value}")
            key = month_start(doc.timestamp)
            if not months[0] <= key <= months[-1]:
                raise ParameterError(
                    f"document {doc.id!r} dated {doc.timestamp:%Y-%m-%d} is outside "
                    f"{months[0]:%Y-%m}..{months[-1]:%Y-%m}")
            buckets.setdefault((key, expected), []).append(doc)

    steps = []
    for month in months:
        for source in (Source.ONLINE, Source.OFFLINE):
            docs = buckets.get((month, source), [])
            if cap is not None and len(docs) > cap:
                keep = np.sort(rng.choice(len(docs), size=int(cap), replace=False))
                docs = [docs[i] for i in keep]
            if not docs:
                log.info("no %s documents in %s", source.value, f"{month:%Y-%m}")
            steps.append(ScheduleStep(len(steps), month, source, tuple(docs)))
    return StreamSchedule(tuple(steps))
