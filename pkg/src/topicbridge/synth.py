"""Seeded synthetic two-source corpus with planted shared and drifting topics.

Each (month, source) batch mixes two shared topics, identical across all
months and both sources, with three topics private to that source. The
private topics drift month to month: a fraction of each topic's support is
swapped for fresh words from the source's own word pool. Offline documents
carry ``title``/``summary``/``body`` fields of increasing length drawn from
one topic mixture; online documents carry ``text``.
"""

import datetime as dt
import json
from dataclasses import dataclass

import numpy as np

from .textpipe import ENGLISH_STOPWORDS, month_range

_ONSETS = "b c d f g h j k l m n p r s t v z br dr gr kl pl st tr".split()
_VOWELS = "a e i o u".split()
_CODAS = ["", "", "n", "r", "s", "l", "k"]


@dataclass
class SyntheticCorpus:
    records: list
    words: tuple
    shared_topics: np.ndarray
    distinct_topics: dict
    months: list

    def shared_topic_weights(self, vocab):
        """Planted shared topics re-indexed onto ``vocab`` (terms it lacks are dropped)."""
        index = {w: i for i, w in enumerate(self.words)}
        out = np.zeros((self.shared_topics.shape[0], len(vocab)))
        for j, term in enumerate(vocab.terms):
            if term in index:
                out[:, j] = self.shared_topics[:, index[term]]
        return out

    def write_jsonl(self, path):
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            for rec in self.records:
                fh.write(json.dumps(rec, ensure_ascii=False, sort_keys=True) + "\n")


def make_words(n, rng):
    words, seen = [], set()
    while len(words) < n:
        syllables = rng.integers(2, 4)
        w = "".join(rng.choice(_ONSETS) + rng.choice(_VOWELS) for _ in range(syllables))
        w += rng.choice(_CODAS)
        if w not in seen and w not in ENGLISH_STOPWORDS:
            seen.add(w)
            words.append(w)
    return words


def _topic(support, vocab_size, rng, concentration=1.0):
    t = np.zeros(vocab_size)
    t[support] = rng.dirichlet(np.full(len(support), concentration))
    return t


def generate_corpus(months=6, docs_per_month=200, vocab_size=500, n_shared=2,
                    n_distinct=3, support=40, shared_support=10, drift=0.5,
                    start=dt.date(2020, 1, 1), doc_concentration=0.2, shared_weight=2.0,
                    online_length=25, title_length=12, summary_length=30,
                    body_length=120, seed=0):
    """Generate a planted-topic corpus.

    ``docs_per_month`` is per source. Word pools: the shared topics own
    ``n_shared * shared_support`` words and the rest of the vocabulary is split
    evenly between the two sources' drifting topics. Document topic mixtures
    are Dirichlet with ``doc_concentration`` per topic, multiplied by
    ``shared_weight`` for the shared topics.
    """
    rng = np.random.default_rng(seed)
    words = make_words(vocab_size, rng)
    perm = rng.permutation(vocab_size)
    n_shared_words = n_shared * shared_support
    shared_pool = perm[:n_shared_words]
    rest = perm[n_shared_words:]
    pools = {"online": rest[: len(rest) // 2], "offline": rest[len(rest) // 2:]}

    shared = np.vstack([
        _topic(shared_pool[i * shared_support:(i + 1) * shared_support], vocab_size, rng)
        for i in range(n_shared)
    ])

    month_list = month_range(start, _add_months(start, months - 1))
    supports = {
        src: [rng.choice(pool, size=support, replace=False) for _ in range(n_distinct)]
        for src, pool in pools.items()
    }
    distinct = {}
    records = []
    for mi, month in enumerate(month_list):
        for src in ("online", "offline"):
            if mi > 0:
                supports[src] = [_drift(s, pools[src], drift, rng) for s in supports[src]]
            topics = np.vstack([_topic(s, vocab_size, rng) for s in supports[src]])
            distinct[(month, src)] = topics
            all_topics = np.vstack([shared, topics])
            conc = np.full(all_topics.shape[0], doc_concentration)
            conc[:n_shared] *= shared_weight
            for d in range(docs_per_month):
                theta = rng.dirichlet(conc)
                dist = theta @ all_topics
                day = int(rng.integers(1, _days_in_month(month) + 1))
                rec = {
                    "id": f"{src[:3]}-{month:%Y-%m}-{d:04d}",
                    "source": src,
                    "timestamp": f"{month:%Y-%m}-{day:02d}",
                }
                if src == "online":
                    rec["text"] = _sample_text(dist, words, online_length, rng)
                else:
                    rec["title"] = _sample_text(dist, words, title_length, rng)
                    rec["summary"] = _sample_text(dist, words, summary_length, rng)
                    rec["body"] = _sample_text(dist, words, body_length, rng)
                records.append(rec)
    return SyntheticCorpus(records, tuple(words), shared, distinct, month_list)


def _drift(current, pool, fraction, rng):
    n_swap = int(round(fraction * len(current)))
    if n_swap == 0:
        return current
    keep = rng.choice(current, size=len(current) - n_swap, replace=False)
    fresh = rng.choice(np.setdiff1d(pool, current), size=n_swap, replace=False)
    return np.concatenate([keep, fresh])


def _sample_text(dist, words, mean_length, rng):
    length = max(3, int(rng.poisson(mean_length)))
    ids = rng.choice(len(words), size=length, p=dist)
    return " ".join(words[i] for i in ids)


def _add_months(d, n):
    y, m = divmod(d.month - 1 + n, 12)
    return dt.date(d.year + y, m + 1, 1)


def _days_in_month(d):
    return (_add_months(d, 1) - d).days
