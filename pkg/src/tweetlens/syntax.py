"""Tokenisation, rule-based POS tagging and per-tweet syntactic profiles."""

from __future__ import annotations

import enum
import unicodedata
from dataclasses import dataclass
from typing import Mapping, Sequence

from .lexicons import default_lexicons


class NoTokensError(ValueError):
    """Raised when a text yields no usable word tokens."""


class Bucket(enum.Enum):
    NOUN = "Noun"
    PRONOUN = "Pronoun"
    VERB = "Verb"
    ADJECTIVE = "Adjective"
    ADVERB = "Adverb"
    CONJUNCTION = "Conjunction"
    DETERMINER = "Determiner"
    WH_WORD = "WhWord"
    OTHER = "Other"


_BUCKET_OF = {
    **dict.fromkeys(("NN", "NNS", "NNP", "NNPS"), Bucket.NOUN),
    **dict.fromkeys(("PRP", "PRP$"), Bucket.PRONOUN),
    **dict.fromkeys(("VB", "VBD", "VBG", "VBN", "VBP", "VBZ", "MD"), Bucket.VERB),
    **dict.fromkeys(("JJ", "JJR", "JJS"), Bucket.ADJECTIVE),
    **dict.fromkeys(("RB", "RBR", "RBS"), Bucket.ADVERB),
    "CC": Bucket.CONJUNCTION,
    **dict.fromkeys(("DT", "PDT"), Bucket.DETERMINER),
    **dict.fromkeys(("WDT", "WP", "WP$", "WRB"), Bucket.WH_WORD),
}


def bucket_of(fine: str) -> Bucket:
    return _BUCKET_OF.get(fine, Bucket.OTHER)


@dataclass(frozen=True)
class Token:
    surface: str
    start_offset: int

    @property
    def is_word(self) -> bool:
        return is_word(self.surface)


@dataclass(frozen=True)
class PosTag:
    fine: str

    @property
    def bucket(self) -> Bucket:
        return bucket_of(self.fine)


def is_word(surface: str) -> bool:
    return any(ch.isalnum() for ch in surface)


def _is_punct(ch: str) -> bool:
    return unicodedata.category(ch)[0] in ("P", "S")


def tokenize(text: str) -> list[Token]:
    """Whitespace split, then peel leading/trailing punctuation into one-character tokens.

    Apostrophes and hyphens inside a word stay in it; ``&`` is always its own token.
    """
    tokens: list[Token] = []
    i, n = 0, len(text)
    while i < n:
        if text[i].isspace():
            i += 1
            continue
        j = i
        while j < n and not text[j].isspace():
            j += 1
        _split_chunk(text, i, j, tokens)
        i = j
    if not any(t.is_word for t in tokens):
        raise NoTokensError("no tokens")
    return tokens


def _split_chunk(text: str, start: int, end: int, out: list[Token]) -> None:
    # an '&' inside the chunk splits it into independent pieces
    pieces = []
    s = start
    for k in range(start, end):
        if text[k] == "&":
            pieces.append((s, k))
            pieces.append((k, k + 1))
            s = k + 1
    pieces.append((s, end))
    for a, b in pieces:
        if a >= b:
            continue
        if text[a:b] == "&":
            out.append(Token("&", a))
            continue
        lead = a
        while lead < b and _is_punct(text[lead]):
            lead += 1
        trail = b
        while trail > lead and _is_punct(text[trail - 1]):
            trail -= 1
        for k in range(a, lead):
            out.append(Token(text[k], k))
        if lead < trail:
            out.append(Token(text[lead:trail], lead))
        for k in range(trail, b):
            out.append(Token(text[k], k))


_SENTENCE_END = {".", "!", "?"}
_NUMBER_CHARS = set("0123456789.,:/%-+")
_ADJ_SUFFIXES = ("ous", "ful", "able", "ible", "ive", "less")
_S_KEEP = ("ss", "us", "is")
_PLURAL_OF = {"NN": "NNS", "NNP": "NNPS", "VB": "VBZ", "VBP": "VBZ"}


def _tag_word(word: str, initial: bool, closed: Mapping[str, str], retry: bool = True) -> str:
    key = word.casefold()
    # (1) closed-class lexicon
    if key in closed:
        return closed[key]
    if all(ch in _NUMBER_CHARS for ch in word):
        return "CD"
    # (2) suffix heuristics
    if len(key) >= 5 and key.endswith("ly"):
        return "RB"
    if len(key) >= 5 and key.endswith("ing"):
        return "VBG"
    if len(key) >= 5 and key.endswith("ed"):
        return "VBD"
    for suf in _ADJ_SUFFIXES:
        if len(key) >= len(suf) + 2 and key.endswith(suf):
            return "JJ"
    if retry:
        for poss in ("'s", "’s"):
            if key.endswith(poss) and len(key) > 2:
                return _tag_word(word[:-2], initial, closed, retry=False)
        if key.endswith("s") and len(key) >= 4 and not key.endswith(_S_KEEP):
            stem_tag = _tag_word(word[:-1], initial, closed, retry=False)
            return _PLURAL_OF.get(stem_tag, stem_tag)
    # (3) capitalised, not sentence-initial
    if not initial and word[:1].isupper():
        return "NNP"
    # (4) default
    return "NN"


def _punct_tag(surface: str) -> str:
    if surface in _SENTENCE_END:
        return "."
    if surface in (",", ";", ":"):
        return ","
    return "SYM"


def pos_tag(tokens: Sequence[Token], closed_class: Mapping[str, str] | None = None) -> list[PosTag]:
    """Deterministic cascade tagger: lexicon, suffixes, capitalisation, default noun."""
    if not tokens:
        raise NoTokensError("cannot tag an empty token list")
    closed = closed_class if closed_class is not None else default_lexicons().closed_class
    tags: list[PosTag] = []
    initial = True
    for tok in tokens:
        if not tok.is_word:
            tags.append(PosTag(_punct_tag(tok.surface)))
            if tok.surface in _SENTENCE_END:
                initial = True
            continue
        tags.append(PosTag(_tag_word(tok.surface, initial, closed)))
        initial = False
    return tags


@dataclass(frozen=True)
class SyntacticProfile:
    nouns: int
    pronouns: int
    verbs: int
    adjectives: int
    adverbs: int
    conjunctions: int
    determiners: int
    wh_words: int
    other: int
    stop_words: int
    ttr: float
    avg_token_length: float
    n_tokens: int

    def as_dict(self) -> dict:
        return {
            "nouns": self.nouns, "pronouns": self.pronouns, "verbs": self.verbs,
            "adjectives": self.adjectives, "adverbs": self.adverbs,
            "conjunctions": self.conjunctions, "determiners": self.determiners,
            "wh_words": self.wh_words, "stop_words": self.stop_words, "ttr": self.ttr,
            "avg_token_length": self.avg_token_length, "n_tokens": self.n_tokens,
        }


_FIELD_OF = {
    Bucket.NOUN: "nouns", Bucket.PRONOUN: "pronouns", Bucket.VERB: "verbs",
    Bucket.ADJECTIVE: "adjectives", Bucket.ADVERB: "adverbs",
    Bucket.CONJUNCTION: "conjunctions", Bucket.DETERMINER: "determiners",
    Bucket.WH_WORD: "wh_words", Bucket.OTHER: "other",
}


def syntactic_profile(
    tokens: Sequence[Token],
    tags: Sequence[PosTag],
    stopwords: frozenset[str] | set[str] | None = None,
) -> SyntacticProfile:
    if len(tokens) != len(tags):
        raise ValueError(f"{len(tokens)} tokens but {len(tags)} tags")
    stop = stopwords if stopwords is not None else default_lexicons().stopwords
    counts = dict.fromkeys(_FIELD_OF.values(), 0)
    for tag in tags:
        counts[_FIELD_OF[tag.bucket]] += 1
    words = [t.surface.casefold() for t in tokens if t.is_word]
    if not words:
        raise NoTokensError("no word tokens")
    n = len(words)
    return SyntacticProfile(
        **counts,
        stop_words=sum(1 for w in words if w in stop),
        ttr=100.0 * len(set(words)) / n,
        avg_token_length=sum(len(t.surface) for t in tokens if t.is_word) / n,
        n_tokens=n,
    )


def profile_text(cleaned: str, closed_class=None, stopwords=None) -> tuple[list[Token], list[PosTag], SyntacticProfile]:
    tokens = tokenize(cleaned)
    tags = pos_tag(tokens, closed_class)
    return tokens, tags, syntactic_profile(tokens, tags, stopwords)
