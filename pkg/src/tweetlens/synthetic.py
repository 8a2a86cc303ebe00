"""Seeded synthetic data: planted-signal feature matrices, topic corpora and a tweet fixture."""

from __future__ import annotations

import numpy as np

from .corpus import Corpus, Label, TweetRecord, extract_hashtags
from .learn import FEATURE_NAMES, LabeledDataset


def planted_signal(n: int = 1000, informative=(0, 1, 2), shift: float = 1.5, seed: int = 0,
                   names=FEATURE_NAMES) -> LabeledDataset:
    """Balanced two-Gaussian data: informative columns have class means +/-shift, the rest are N(0, 1) noise."""
    rng = np.random.default_rng(seed)
    y = np.zeros(n, dtype=np.int64)
    y[: n // 2] = 1
    y = rng.permutation(y)
    X = rng.normal(size=(n, len(names)))
    sign = np.where(y == 1, 1.0, -1.0)
    for j in informative:
        X[:, j] += shift * sign
    return LabeledDataset(X, y, tuple(names))


def gaussian_clusters(n: int = 400, separation: float = 6.0, seed: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Two well-separated 2-D blobs, balanced."""
    rng = np.random.default_rng(seed)
    y = np.repeat([1, 0], [n // 2, n - n // 2])
    X = rng.normal(size=(n, 2))
    X[y == 1] += separation / 2
    X[y == 0] -= separation / 2
    return X, y


def two_topic_corpus(n_docs: int = 100, doc_len: int = 30, words_per_topic: int = 20,
                     seed: int = 0) -> tuple[list[list[str]], np.ndarray]:
    """Each document draws every token from one of two disjoint vocabularies."""
    rng = np.random.default_rng(seed)
    vocab = [[f"a{i:02d}" for i in range(words_per_topic)], [f"b{i:02d}" for i in range(words_per_topic)]]
    topic = np.arange(n_docs) % 2
    docs = [[vocab[t][j] for j in rng.integers(0, words_per_topic, size=doc_len)] for t in topic]
    return docs, topic


# --------------------------------------------------------------------------- tweet fixture

_BRANDS = ["Pfizer", "Moderna", "AstraZeneca", "Covaxin", "J&J", ""]

_M_OPENERS = [
    "This {b} vaccine is dangerous",
    "WARNING: the {b} jab is dangerous",
    "They will not tell you the {b} shot is dangerous",
    "Why is nobody saying the {b} vaccine is dangerous",
    "My neighbour says the {b} vaccine is dangerous",
]
_M_CLAIMS = [
    "it causes blood clots and they hide the deaths",
    "the trials were a scam and the data is fake",
    "big pharma lied about the risks",
    "people are dying and the media is silent",
    "it changes your DNA forever",
    "doctors are scared to talk about the harm",
    "it was never tested properly",
    "the government wants to control everyone with it",
    "I am terrified of what it does to children",
    "the side effects are a nightmare",
]
_M_CLOSERS = ["Do your research!!!!", "Wake up people.", "Share before they delete this!", "Stay away.",
              "Sooooo suspicious.", ""]
_M_TAGS = ["#nojab", "#plandemic", "#vaccinekills", "#covid19", "#bigpharma", "#medicalfreedom"]

_NM_OPENERS = [
    "Got my {b} shot today",
    "Second dose of {b} done",
    "Just booked my {b} appointment",
    "Proud to have the {b} vaccine",
    "Mum finally got her {b} jab",
]
_NM_CLAIMS = [
    "feeling great and grateful to the nurses",
    "the staff were so kind and it was easy",
    "a sore arm but happy to be protected",
    "thank you to every scientist who made this possible",
    "so relieved and hopeful for the summer",
    "it is safe and effective so please get yours",
    "the clinic was wonderful and well organised",
    "we are one step closer to seeing family again",
]
_NM_CLOSERS = ["Thanks NHS!", "Let's do this.", "Science wins 💉", "", "So happy!!!!", "See you soon, world."]
_NM_TAGS = ["#vaccinated", "#getvaccinated", "#covid19", "#vaccinatedandproud", "#scienceisreal", "#thankyounhs"]


def _compose(rng, openers, claims, closers, tags) -> str:
    brand = _BRANDS[rng.integers(len(_BRANDS))]
    parts = [openers[rng.integers(len(openers))].format(b=brand) + ",", claims[rng.integers(len(claims))] + "."]
    closer = closers[rng.integers(len(closers))]
    if closer:
        parts.append(closer)
    n_tags = int(rng.integers(0, 4))
    if n_tags:
        parts.extend(rng.choice(tags, size=n_tags, replace=False).tolist())
    if rng.random() < 0.3:
        parts.append(f"https://t.co/{rng.integers(10**6, 10**7)}")
    if rng.random() < 0.2:
        parts.insert(0, f"@user{rng.integers(100)}")
    return " ".join(" ".join(parts).split())


def fixture_tweets(n_per_class: int = 100, seed: int = 2021) -> Corpus:
    """A labeled tweet corpus with known class counts.

    Every Misleading tweet contains the word "dangerous"; Non-Misleading tweets
    lean positive. Some like counts are absent to exercise optional fields.
    """
    rng = np.random.default_rng(seed)
    records = []
    for i in range(2 * n_per_class):
        misleading = i % 2 == 0
        if misleading:
            text = _compose(rng, _M_OPENERS, _M_CLAIMS, _M_CLOSERS, _M_TAGS)
            counts = rng.poisson([12, 4, 30])
        else:
            text = _compose(rng, _NM_OPENERS, _NM_CLAIMS, _NM_CLOSERS, _NM_TAGS)
            counts = rng.poisson([5, 2, 45])
        records.append(TweetRecord(
            id=f"t{i:04d}",
            text=text,
            label=Label.MISLEADING if misleading else Label.NON_MISLEADING,
            created_at=f"2021-{1 + i % 12:02d}-{1 + i % 28:02d}T{i % 24:02d}:00:00Z",
            retweet_count=int(counts[0]),
            reply_count=int(counts[1]),
            like_count=None if i % 7 == 3 else int(counts[2]),
            hashtags=tuple(extract_hashtags(text)),
        ))
    return Corpus(tuple(records))
