"""Lexicon sentiment (compound score) and five-way emotion scoring."""

from __future__ import annotations

import enum
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .syntax import Token

ALPHA = 15.0
NEGATION_SCALAR = -0.74
NEGATION_WINDOW = 3
THRESHOLD = 0.05


class Sentiment(enum.Enum):
    POSITIVE = "Positive"
    NEGATIVE = "Negative"
    NEUTRAL = "Neutral"


class Emotion(enum.Enum):
    HAPPINESS = "Happiness"
    FEAR = "Fear"
    ANGER = "Anger"
    SURPRISE = "Surprise"
    SADNESS = "Sadness"


# one-hot column order
EMOTION_COLUMNS = (Emotion.HAPPINESS, Emotion.FEAR, Emotion.ANGER, Emotion.SURPRISE, Emotion.SADNESS)
# earlier wins when scores tie
EMOTION_TIE_ORDER = (Emotion.FEAR, Emotion.SURPRISE, Emotion.SADNESS, Emotion.ANGER, Emotion.HAPPINESS)


def categorize(compound: float) -> Sentiment:
    if compound >= THRESHOLD:
        return Sentiment.POSITIVE
    if compound <= -THRESHOLD:
        return Sentiment.NEGATIVE
    return Sentiment.NEUTRAL


@dataclass(frozen=True)
class SentimentScore:
    compound: float
    category: Sentiment
    raw_sum: float = 0.0
    hits: int = 0


def normalize(total: float, alpha: float = ALPHA) -> float:
    return total / math.sqrt(total * total + alpha)


def _is_negator(word: str, negators) -> bool:
    return word in negators or word.endswith("n't") or word.endswith("n’t")


def sentiment_score(
    tokens: Sequence[Token],
    valence: Mapping[str, float] | None = None,
    negators=None,
) -> SentimentScore:
    """Sum word valences (negated hits scaled by -0.74) and squash with S/sqrt(S^2 + 15)."""
    if valence is None or negators is None:
        from .lexicons import default_lexicons

        lex = default_lexicons()
        valence = lex.valence if valence is None else valence
        negators = lex.negators if negators is None else negators
    words = [t.surface.casefold() for t in tokens if t.is_word]
    total = 0.0
    hits = 0
    for i, w in enumerate(words):
        v = valence.get(w)
        if v is None:
            continue
        hits += 1
        window = words[max(0, i - NEGATION_WINDOW):i]
        if any(_is_negator(p, negators) for p in window):
            v *= NEGATION_SCALAR
        total += v
    compound = normalize(total) if total != 0.0 else 0.0
    return SentimentScore(compound=compound, category=categorize(compound), raw_sum=total, hits=hits)


@dataclass(frozen=True)
class EmotionScores:
    scores: dict[Emotion, float] = field(default_factory=lambda: dict.fromkeys(EMOTION_COLUMNS, 0.0))
    dominant: Emotion | None = None

    def as_dict(self) -> dict[str, float]:
        return {e.value: self.scores[e] for e in EMOTION_COLUMNS}


def emotion_scores(tokens: Sequence[Token], emotion_lexicon: Mapping[str, Sequence[str]] | None = None) -> EmotionScores:
    if emotion_lexicon is None:
        from .lexicons import default_lexicons

        emotion_lexicon = default_lexicons().emotions
    counts: Counter[Emotion] = Counter()
    for t in tokens:
        if not t.is_word:
            continue
        for emo in emotion_lexicon.get(t.surface.casefold(), ()):
            counts[Emotion(emo)] += 1
    total = sum(counts.values())
    if total == 0:
        return EmotionScores()
    scores = {e: counts[e] / total for e in EMOTION_COLUMNS}
    best = max(counts.values())
    dominant = next(e for e in EMOTION_TIE_ORDER if counts[e] == best)
    return EmotionScores(scores=scores, dominant=dominant)


def one_hot_emotion(e: EmotionScores) -> list[float]:
    return [1.0 if e.dominant is col else 0.0 for col in EMOTION_COLUMNS]
