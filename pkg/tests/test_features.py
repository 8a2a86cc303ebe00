"""Feature pipeline against a hand-assembled 10-tweet matrix.

Each expected row was derived by hand from the tagging cascade, the bundled
stopword, valence and emotion lexicons, and the cleaning rules. Compound
scores are written as the formula S / sqrt(S^2 + 15) with S summed in token
order.
"""

import math

import numpy as np
import pytest

from tweetlens.affect import Emotion, EmotionScores, SentimentScore, Sentiment
from tweetlens.corpus import Corpus, Label, TweetRecord, extract_hashtags
from tweetlens.learn import FEATURE_NAMES, LearnError, build_feature_matrix
from tweetlens.pipeline import extract, to_dataset
from tweetlens.syntax import profile_text

M, NM = Label.MISLEADING, Label.NON_MISLEADING

TWEETS = [
    ("f01", "The vaccine is dangerous #nojab", M),
    ("f02", "I love it", NM),
    ("f03", "Why do they lie and hide deaths?", M),
    ("f04", "Got my shot today! So happy and grateful https://t.co/x #vaccinated #covid19", NM),
    ("f05", "It is not safe, it is not tested", M),
    ("f06", "We trust the science", NM),
    ("f07", "Wow, the shocking truth about Pfizer", M),
    ("f08", "So sad, my family got sick and died", NM),
    ("f09", "Dont get the shot!!!! It kills", M),
    ("f10", "Thanks to everyone who helped #ScienceIsReal @cdc", NM),
]


def c(s):
    return s / math.sqrt(s * s + 15.0)


H, F, A, U, S0 = ([1.0 if i == j else 0.0 for j in range(5)] for i in range(5))
NONE = [0.0] * 5

#         stop pron noun adj  avg_len  wh  adv conj verb det  ttr    compound              emotions  tags
EXPECTED = [
    [2, 0, 2, 1, 26 / 5, 0, 0, 0, 1, 1, 100.0, c(0.0 + -2.1), *F, 1],
    [2, 2, 0, 0, 7 / 3, 0, 0, 0, 1, 0, 100.0, c(0.0 + 3.2), *H, 0],
    [4, 1, 1, 0, 25 / 7, 1, 0, 1, 3, 0, 100.0, c(0.0 + -1.6 + -2.7), *A, 0],
    [3, 1, 3, 2, 49 / 10, 0, 1, 1, 2, 0, 100.0, c(0.0 + 2.7 + 2.9), *H, 2],
    [6, 2, 0, 1, 24 / 8, 0, 2, 0, 3, 0, 62.5, c(0.0 + 1.9 * -0.74), *NONE, 0],
    [2, 1, 1, 0, 17 / 4, 0, 0, 0, 1, 1, 100.0, c(0.0 + 2.3), *NONE, 0],
    [2, 0, 2, 0, 30 / 6, 0, 0, 0, 1, 1, 100.0, c(0.0 + -1.7 + 1.3), *U, 0],
    [3, 1, 2, 2, 27 / 8, 0, 1, 1, 1, 0, 100.0, c(0.0 + -2.1 + -2.3 + -2.6), *S0, 0],
    [2, 1, 1, 0, 21 / 6, 0, 0, 0, 3, 1, 100.0, c(0.0 + -2.5), *NONE, 0],
    [2, 1, 2, 0, 38 / 6, 1, 0, 0, 1, 0, 100.0, c(0.0 + 1.9 + 1.5), *H, 1],
]


def _corpus(extra=()):
    recs = [TweetRecord(i, t, lab, hashtags=tuple(extract_hashtags(t))) for i, t, lab in TWEETS]
    return Corpus(tuple(recs) + tuple(extra))


def test_ten_tweet_fixture_matrix():
    corpus = _corpus()
    feats, skipped = extract(corpus)
    data = to_dataset(corpus, feats)
    assert skipped == [] and data.skipped == []
    assert data.feature_names == FEATURE_NAMES
    assert data.ids == tuple(i for i, _, _ in TWEETS)
    assert data.y.tolist() == [1, 0] * 5
    expected = np.array(EXPECTED, dtype=float)
    for row, (got, want) in enumerate(zip(data.X, expected)):
        assert got.tolist() == want.tolist(), f"row {TWEETS[row][0]}"


def test_fixture_sentiment_categories():
    feats, _ = extract(_corpus())
    cats = [f.sentiment for f in feats]
    assert cats[0] is Sentiment.NEGATIVE and cats[1] is Sentiment.POSITIVE
    assert cats[6] is Sentiment.NEGATIVE  # -0.4 / sqrt(15.16) is below -0.05


def test_unlabeled_and_failed_tweets_skipped():
    extra = (TweetRecord("u1", "maybe it works", Label.UNLABELED), TweetRecord("e1", "@only https://t.co/a", M))
    corpus = _corpus(extra)
    feats, skipped = extract(corpus)
    assert [i for i, _ in skipped] == ["e1"]
    data = to_dataset(corpus, feats)
    assert len(data) == 10
    assert ("u1", "unlabeled") in data.skipped
    assert any(i == "e1" and "missing" in why for i, why in data.skipped)


def test_schema_mapping_of_tail_columns():
    _, _, profile = profile_text("masks work")
    rec = TweetRecord("x", "masks work #a #b", M, hashtags=("a", "b"))
    d = build_feature_matrix(
        Corpus((rec,)), {"x": profile}, {"x": SentimentScore(-0.3, Sentiment.NEGATIVE)},
        {"x": EmotionScores({e: 0.0 for e in Emotion} | {Emotion.FEAR: 1.0}, Emotion.FEAR)},
    )
    assert d.X[0, 11:].tolist() == [-0.3, 0, 1, 0, 0, 0, 2]


def test_zero_usable_rows():
    with pytest.raises(LearnError):
        build_feature_matrix(Corpus((TweetRecord("u", "hi"),)), {}, {}, {})


def test_feature_invariants_on_bundled_fixture():
    from tweetlens.synthetic import fixture_tweets

    corpus = fixture_tweets()
    data = to_dataset(corpus, extract(corpus)[0])
    X = data.X
    counts = [i for i, n in enumerate(FEATURE_NAMES) if n not in ("avg_token_length", "ttr", "sentiment_compound")]
    assert np.all(X[:, counts] >= 0) and np.all(X[:, counts] == np.round(X[:, counts]))
    ttr = X[:, FEATURE_NAMES.index("ttr")]
    assert np.all((ttr > 0) & (ttr <= 100))
    comp = X[:, FEATURE_NAMES.index("sentiment_compound")]
    assert np.all(np.abs(comp) <= 1)
    assert np.all(X[:, 12:17].sum(axis=1) <= 1)
