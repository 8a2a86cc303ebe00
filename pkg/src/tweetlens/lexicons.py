"""Loading of the bundled word lists, with per-file override from a directory."""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources
from pathlib import Path

# Earlier tags win when a token appears in several closed-class files.
CLOSED_CLASS_PRECEDENCE = (
    "WDT", "WP", "WP$", "WRB",
    "PRP", "PRP$", "DT", "PDT", "CC", "MD",
    "VBZ", "VBP", "VBD", "VBN", "VBG", "VB",
    "RB", "IN", "TO", "UH", "CD",
    "JJR", "JJS", "JJ", "NN",
)


class LexiconError(ValueError):
    pass


def _read_lines(text: str) -> list[str]:
    out = []
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        out.append(line)
    return out


def _read(name: str, override_dir: Path | None) -> str:
    if override_dir is not None:
        candidate = Path(override_dir) / name
        if candidate.is_file():
            return candidate.read_text(encoding="utf-8")
    return resources.files("tweetlens").joinpath("data", name).read_text(encoding="utf-8")


def read_word_list(name: str, override_dir: Path | None = None) -> frozenset[str]:
    return frozenset(w.casefold() for w in _read_lines(_read(name, override_dir)))


def read_tsv(name: str, override_dir: Path | None = None) -> list[tuple[str, str]]:
    rows = []
    for i, line in enumerate(_read_lines(_read(name, override_dir)), start=1):
        parts = line.split("\t")
        if len(parts) != 2:
            raise LexiconError(f"{name}: entry {i} is not two tab-separated fields: {line!r}")
        rows.append((parts[0].strip(), parts[1].strip()))
    return rows


def read_closed_class(override_dir: Path | None = None) -> dict[str, str]:
    """Map case-folded token -> fine POS tag."""
    table: dict[str, str] = {}
    for tag in CLOSED_CLASS_PRECEDENCE:
        for word in read_word_list(f"closed_class/{tag}.txt", override_dir):
            table.setdefault(word, tag)
    return table


@dataclass(frozen=True)
class Lexicons:
    closed_class: dict[str, str]
    stopwords: frozenset[str]
    valence: dict[str, float]
    emotions: dict[str, tuple[str, ...]]
    negators: frozenset[str]
    vaccines: tuple[tuple[str, str], ...]


def load_lexicons(override_dir: str | Path | None = None) -> Lexicons:
    """Load every bundled lexicon; files present in ``override_dir`` replace the bundled copy."""
    d = Path(override_dir) if override_dir is not None else None

    valence: dict[str, float] = {}
    for tok, val in read_tsv("valence.tsv", d):
        try:
            v = float(val)
        except ValueError:
            raise LexiconError(f"valence.tsv: bad valence {val!r} for {tok!r}") from None
        if not -4.0 <= v <= 4.0:
            raise LexiconError(f"valence.tsv: valence {v} for {tok!r} outside [-4, 4]")
        valence[tok.casefold()] = v

    from .affect import Emotion  # local import: affect depends on this module

    emotions: dict[str, list[str]] = {}
    for tok, emo in read_tsv("emotions.tsv", d):
        try:
            Emotion(emo)
        except ValueError:
            raise LexiconError(f"emotions.tsv: unknown emotion {emo!r}") from None
        emotions.setdefault(tok.casefold(), [])
        if emo not in emotions[tok.casefold()]:
            emotions[tok.casefold()].append(emo)

    return Lexicons(
        closed_class=read_closed_class(d),
        stopwords=read_word_list("stopwords.txt", d),
        valence=valence,
        emotions={k: tuple(v) for k, v in emotions.items()},
        negators=read_word_list("negators.txt", d),
        vaccines=tuple((c.casefold(), a.casefold()) for c, a in read_tsv("vaccines.tsv", d)),
    )


_DEFAULT: Lexicons | None = None


def default_lexicons() -> Lexicons:
    global _DEFAULT
    if _DEFAULT is None:
        _DEFAULT = load_lexicons()
    return _DEFAULT
