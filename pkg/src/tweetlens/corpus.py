"""Tweet corpus ingestion, cleaning, class balancing and splitting."""

from __future__ import annotations

import csv
import enum
import json
import re
import unicodedata
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .lexicons import default_lexicons


class CorpusError(ValueError):
    """Raised for malformed or inconsistent corpus input."""


class EmptyTextError(ValueError):
    """Raised when a text is empty after cleaning."""


class Label(enum.Enum):
    MISLEADING = "misleading"
    NON_MISLEADING = "non-misleading"
    UNLABELED = "unlabeled"

    @classmethod
    def parse(cls, raw: str | None) -> "Label":
        if raw is None:
            return cls.UNLABELED
        key = re.sub(r"[\s_\-]+", "", str(raw).strip().casefold())
        try:
            return _LABEL_KEYS[key]
        except KeyError:
            raise CorpusError(f"unknown label {raw!r}") from None

    @property
    def short(self) -> str:
        return {"misleading": "M", "non-misleading": "NM", "unlabeled": "U"}[self.value]


_LABEL_KEYS = {
    "misleading": Label.MISLEADING,
    "nonmisleading": Label.NON_MISLEADING,
    "unlabeled": Label.UNLABELED,
    "unlabelled": Label.UNLABELED,
    "": Label.UNLABELED,
}

CLASSES = (Label.MISLEADING, Label.NON_MISLEADING)
COUNT_FIELDS = ("retweet_count", "reply_count", "like_count")


@dataclass(frozen=True)
class TweetRecord:
    id: str
    text: str
    label: Label = Label.UNLABELED
    created_at: str | None = None
    retweet_count: int | None = None
    reply_count: int | None = None
    like_count: int | None = None
    hashtags: tuple[str, ...] = ()

    def to_json(self) -> dict:
        out: dict = {"id": self.id, "text": self.text, "label": self.label.value}
        if self.created_at is not None:
            out["created_at"] = self.created_at
        for name in COUNT_FIELDS:
            value = getattr(self, name)
            if value is not None:
                out[name] = value
        return out


@dataclass(frozen=True)
class Corpus:
    records: tuple[TweetRecord, ...] = ()
    _index: dict = field(default_factory=dict, init=False, repr=False, compare=False)

    def __post_init__(self):
        seen: dict[str, int] = {}
        for i, r in enumerate(self.records):
            if r.id in seen:
                raise CorpusError(f"duplicate id {r.id!r}")
            seen[r.id] = i
        self._index.update(seen)

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def get(self, tweet_id: str) -> TweetRecord:
        return self.records[self._index[tweet_id]]

    @property
    def class_counts(self) -> dict[Label, int]:
        counts = Counter(r.label for r in self.records)
        return {lab: counts.get(lab, 0) for lab in Label}

    def with_label(self, label: Label) -> list[TweetRecord]:
        return [r for r in self.records if r.label is label]

    @property
    def ids(self) -> list[str]:
        return [r.id for r in self.records]


# --------------------------------------------------------------------------- text

_URL_RE = re.compile(r"(?:https?://|www\.)\S+", re.IGNORECASE)
_MENTION_RE = re.compile(r"(?<!\w)@\w+")
_HASH_MARK_RE = re.compile(r"(?<!\w)#+(?=\w)")
_REPEAT_RE = re.compile(r"(.)\1{3,}", re.DOTALL)
_WS_RE = re.compile(r"\s+")
_HASHTAG_RE = re.compile(r"(?<![\w#])#(\w+)")
_INVISIBLE = {"\u200d", "\ufe0f", "\ufe0e", "\u20e3"}


def _strip_emoji(text: str) -> str:
    return "".join(
        ch for ch in text
        if ch not in _INVISIBLE
        and not (ord(ch) > 0x7F and unicodedata.category(ch) in ("So", "Sk", "Cs", "Co"))
    )


def clean_text(raw: str) -> str:
    """Normalise a raw tweet.

    Removes URLs and @-mentions, drops the ``#`` marker but keeps the hashtag
    word, collapses any character run longer than three to three, collapses
    whitespace and NFC-normalises. Emoji are dropped. Letter case is kept.
    """
    text = unicodedata.normalize("NFC", raw)
    text = _strip_emoji(text)
    text = _URL_RE.sub(" ", text)
    text = _MENTION_RE.sub(" ", text)
    text = _HASH_MARK_RE.sub("", text)
    text = _REPEAT_RE.sub(r"\1\1\1", text)
    text = _WS_RE.sub(" ", text).strip()
    text = unicodedata.normalize("NFC", text)
    if not text:
        raise EmptyTextError("empty after cleaning")
    return text


def extract_hashtags(raw: str) -> list[str]:
    seen: dict[str, None] = {}
    for m in _HASHTAG_RE.finditer(unicodedata.normalize("NFC", raw)):
        seen.setdefault(m.group(1).lower(), None)
    return list(seen)


def _alias_pattern(alias: str) -> re.Pattern:
    body = r"\s+".join(re.escape(part) for part in alias.split())
    return re.compile(rf"(?<!\w){body}(?!\w)", re.IGNORECASE)


_VACCINE_CACHE: dict[tuple, list[tuple[str, re.Pattern]]] = {}


def count_vaccine_mentions(text: str, aliases: Sequence[tuple[str, str]] | None = None) -> int:
    """Number of distinct vaccine brands named in ``text`` (aliases fold to their brand)."""
    table = tuple(aliases) if aliases is not None else default_lexicons().vaccines
    patterns = _VACCINE_CACHE.get(table)
    if patterns is None:
        patterns = [(canon, _alias_pattern(alias)) for canon, alias in table]
        _VACCINE_CACHE[table] = patterns
    return len({canon for canon, pat in patterns if pat.search(text)})


# --------------------------------------------------------------------------- I/O

def _parse_count(value, name: str, where: str) -> int | None:
    if value is None or (isinstance(value, str) and not value.strip()):
        return None
    if isinstance(value, bool):
        raise CorpusError(f"{where}: {name} must be a non-negative integer")
    try:
        if isinstance(value, float):
            if not value.is_integer():
                raise ValueError
            n = int(value)
        else:
            n = int(str(value).strip())
    except ValueError:
        raise CorpusError(f"{where}: {name} must be a non-negative integer, got {value!r}") from None
    if n < 0:
        raise CorpusError(f"{where}: {name} must be non-negative, got {n}")
    return n


def record_from_mapping(row: dict, where: str) -> TweetRecord:
    text = row.get("text")
    if not isinstance(text, str) or not text.strip():
        raise CorpusError(f"{where}: missing or empty 'text'")
    raw_id = row.get("id")
    if raw_id is None or str(raw_id).strip() == "":
        raise CorpusError(f"{where}: missing 'id'")
    try:
        label = Label.parse(row.get("label"))
    except CorpusError as exc:
        raise CorpusError(f"{where}: {exc}") from None
    created = row.get("created_at")
    created = str(created).strip() if created not in (None, "") else None
    counts = {name: _parse_count(row.get(name), name, where) for name in COUNT_FIELDS}
    return TweetRecord(
        id=str(raw_id).strip(),
        text=text,
        label=label,
        created_at=created,
        hashtags=tuple(extract_hashtags(text)),
        **counts,
    )


def _check_unique(records: list[TweetRecord], lines: list[int]) -> None:
    seen: dict[str, int] = {}
    for rec, line in zip(records, lines):
        if rec.id in seen:
            raise CorpusError(f"line {line}: duplicate id {rec.id!r} (first seen on line {seen[rec.id]})")
        seen[rec.id] = line


def load_corpus(path: str | Path, format: str | None = None) -> Corpus:
    """Read a JSONL or CSV tweet file. ``format`` defaults to the file suffix."""
    path = Path(path)
    fmt = (format or path.suffix.lstrip(".")).lower()
    if fmt not in ("jsonl", "csv"):
        raise CorpusError(f"unsupported corpus format {fmt!r} (expected jsonl or csv)")
    if not path.is_file():
        raise FileNotFoundError(f"corpus file not found: {path}")

    records: list[TweetRecord] = []
    lines: list[int] = []
    if fmt == "jsonl":
        with path.open(encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                if not line.strip():
                    continue
                try:
                    row = json.loads(line)
                except json.JSONDecodeError as exc:
                    raise CorpusError(f"line {lineno}: malformed JSON ({exc.msg})") from None
                if not isinstance(row, dict):
                    raise CorpusError(f"line {lineno}: expected a JSON object")
                records.append(record_from_mapping(row, f"line {lineno}"))
                lines.append(lineno)
    else:
        with path.open(encoding="utf-8", newline="") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None or "text" not in reader.fieldnames:
                raise CorpusError("line 1: CSV header must contain a 'text' column")
            for row in reader:
                if None in row:
                    raise CorpusError(f"line {reader.line_num}: too many fields")
                records.append(record_from_mapping(row, f"line {reader.line_num}"))
                lines.append(reader.line_num)
    _check_unique(records, lines)
    return Corpus(tuple(records))


def write_corpus(corpus: Corpus | Iterable[TweetRecord], path: str | Path) -> None:
    with Path(path).open("w", encoding="utf-8", newline="\n") as fh:
        for rec in corpus:
            fh.write(json.dumps(rec.to_json(), ensure_ascii=False) + "\n")


# --------------------------------------------------------------------------- sampling

def _labeled_groups(c: Corpus) -> dict[Label, list[int]]:
    groups: dict[Label, list[int]] = {lab: [] for lab in CLASSES}
    for i, rec in enumerate(c.records):
        if rec.label in groups:
            groups[rec.label].append(i)
    return groups


def balance_classes(c: Corpus, seed: int) -> Corpus:
    """Downsample the majority class so both classes have equal counts.

    Unlabeled records are dropped. Retained records keep their input order.
    """
    groups = _labeled_groups(c)
    missing = [lab.value for lab, idx in groups.items() if not idx]
    if missing:
        raise CorpusError(f"cannot balance: no records labeled {', '.join(missing)}")
    n = min(len(idx) for idx in groups.values())
    rng = np.random.default_rng(seed)
    keep: list[int] = []
    for lab in CLASSES:
        idx = groups[lab]
        if len(idx) > n:
            chosen = rng.permutation(len(idx))[:n]
            idx = [idx[j] for j in chosen]
        keep.extend(idx)
    return Corpus(tuple(c.records[i] for i in sorted(keep)))


def split_train_test(c: Corpus, test_fraction: float, seed: int) -> tuple[Corpus, Corpus]:
    """Stratified split; each class contributes round-half-up(test_fraction * size) test records."""
    if not 0.0 < test_fraction < 1.0:
        raise CorpusError(f"test_fraction must lie in (0, 1), got {test_fraction}")
    groups = _labeled_groups(c)
    rng = np.random.default_rng(seed)
    test: set[int] = set()
    for lab in CLASSES:
        idx = groups[lab]
        if len(idx) < 2:
            raise CorpusError(f"class {lab.value} has {len(idx)} record(s); need at least 2 to split")
        n_test = int(np.floor(len(idx) * test_fraction + 0.5))
        n_test = min(max(n_test, 1), len(idx) - 1)
        chosen = rng.permutation(len(idx))[:n_test]
        test.update(idx[j] for j in chosen)
    labeled = sorted(i for idx in groups.values() for i in idx)
    train = tuple(c.records[i] for i in labeled if i not in test)
    held = tuple(c.records[i] for i in labeled if i in test)
    return Corpus(train), Corpus(held)
