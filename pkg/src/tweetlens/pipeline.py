"""Per-tweet feature extraction shared by the analysis, topic and training stages."""

from __future__ import annotations

import logging
from dataclasses import dataclass

from .affect import Emotion, EmotionScores, Sentiment, SentimentScore, emotion_scores, sentiment_score
from .corpus import Corpus, EmptyTextError, Label, clean_text, count_vaccine_mentions
from .learn import LabeledDataset, build_feature_matrix
from .lexicons import Lexicons, default_lexicons
from .syntax import NoTokensError, PosTag, SyntacticProfile, Token, profile_text

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class TweetFeatures:
    id: str
    label: Label
    cleaned: str
    tokens: tuple[Token, ...]
    tags: tuple[PosTag, ...]
    profile: SyntacticProfile
    sentiment_score: SentimentScore
    emotion_scores: EmotionScores
    hashtags: tuple[str, ...]
    vaccine_mentions: int
    topic_tokens: tuple[str, ...]

    @property
    def sentiment(self) -> Sentiment:
        return self.sentiment_score.category

    @property
    def emotion(self) -> Emotion | None:
        return self.emotion_scores.dominant


def topic_tokens(tokens, stopwords) -> tuple[str, ...]:
    """Casefolded alphabetic words of two or more letters, stopwords removed."""
    out = []
    for t in tokens:
        w = t.surface.casefold()
        if len(w) >= 2 and w.replace("'", "").replace("-", "").isalpha() and w not in stopwords:
            out.append(w)
    return tuple(out)


def extract(corpus: Corpus, lexicons: Lexicons | None = None) -> tuple[list[TweetFeatures], list[tuple[str, str]]]:
    """Run cleaning, tagging and affect scoring over every tweet; failures go to the skip list."""
    lex = lexicons or default_lexicons()
    feats, skipped = [], []
    for rec in corpus:
        try:
            cleaned = clean_text(rec.text)
            tokens, tags, profile = profile_text(cleaned, lex.closed_class, lex.stopwords)
        except (EmptyTextError, NoTokensError) as exc:
            log.info("skipping tweet %s: %s", rec.id, exc)
            skipped.append((rec.id, str(exc)))
            continue
        feats.append(TweetFeatures(
            id=rec.id,
            label=rec.label,
            cleaned=cleaned,
            tokens=tuple(tokens),
            tags=tuple(tags),
            profile=profile,
            sentiment_score=sentiment_score(tokens, lex.valence, lex.negators),
            emotion_scores=emotion_scores(tokens, lex.emotions),
            hashtags=rec.hashtags,
            vaccine_mentions=count_vaccine_mentions(rec.text, lex.vaccines),
            topic_tokens=topic_tokens(tokens, lex.stopwords),
        ))
    return feats, skipped


def to_dataset(corpus: Corpus, feats: list[TweetFeatures]) -> LabeledDataset:
    return build_feature_matrix(
        corpus,
        {f.id: f.profile for f in feats},
        {f.id: f.sentiment_score for f in feats},
        {f.id: f.emotion_scores for f in feats},
    )
