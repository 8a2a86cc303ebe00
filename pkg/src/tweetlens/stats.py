"""Statistical kernels and per-class corpus analytics."""

from __future__ import annotations

import math
import warnings
from collections import Counter
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Sequence

import numpy as np

from .corpus import CLASSES, COUNT_FIELDS, Corpus, EmptyTextError, Label, clean_text, count_vaccine_mentions
from .syntax import NoTokensError, tokenize


class StatsError(ValueError):
    pass


class DegenerateRankingError(StatsError):
    pass


# --------------------------------------------------------------------------- KS

@dataclass(frozen=True)
class KsResult:
    d: float
    p_value: float
    n1: int
    n2: int


KS_SERIES_TOL = 1e-12


def kolmogorov_q(lam: float) -> float:
    """Survival function of the Kolmogorov distribution, Q(lam) = 2 sum (-1)^(k-1) exp(-2 k^2 lam^2).

    The alternating series is summed until a term drops below 1e-12. Below
    lam = 0.6 that series converges slowly, so the equivalent Jacobi-theta
    form 1 - sqrt(2 pi)/lam * sum exp(-(2k-1)^2 pi^2 / (8 lam^2)) is used.
    """
    if lam <= 0.0:
        return 1.0
    if lam < 0.6:
        s = 0.0
        k = 1
        while True:
            term = math.exp(-((2 * k - 1) ** 2) * math.pi ** 2 / (8.0 * lam * lam))
            s += term
            if term < KS_SERIES_TOL:
                break
            k += 1
        q = 1.0 - math.sqrt(2.0 * math.pi) / lam * s
    else:
        q = 0.0
        k = 1
        while True:
            term = math.exp(-2.0 * k * k * lam * lam)
            q += term if k % 2 else -term
            if term < KS_SERIES_TOL:
                break
            k += 1
        q *= 2.0
    return min(1.0, max(0.0, q))


def ks_two_sample(xs: Sequence[float], ys: Sequence[float]) -> KsResult:
    x = np.sort(np.asarray(xs, dtype=float))
    y = np.sort(np.asarray(ys, dtype=float))
    if x.size == 0 or y.size == 0:
        raise StatsError("KS test needs two non-empty samples")
    n1, n2 = x.size, y.size
    pooled = np.unique(np.concatenate([x, y]))
    # ECDFs evaluated after all values equal to each pooled point
    cdf1 = np.searchsorted(x, pooled, side="right") / n1
    cdf2 = np.searchsorted(y, pooled, side="right") / n2
    d = float(np.max(np.abs(cdf1 - cdf2)))
    ne = n1 * n2 / (n1 + n2)
    p = kolmogorov_q(d * math.sqrt(ne)) if d > 0 else 1.0
    return KsResult(d=d, p_value=p, n1=int(n1), n2=int(n2))


# --------------------------------------------------------------------------- Kendall

def _count_tied_pairs(sorted_values: np.ndarray) -> int:
    _, counts = np.unique(sorted_values, return_counts=True)
    return int(np.sum(counts * (counts - 1) // 2))


def _merge_count(a: list) -> tuple[list, int]:
    """Merge sort returning the number of strict inversions."""
    n = len(a)
    if n <= 1:
        return a, 0
    mid = n // 2
    left, inv_l = _merge_count(a[:mid])
    right, inv_r = _merge_count(a[mid:])
    merged = []
    inv = inv_l + inv_r
    i = j = 0
    while i < len(left) and j < len(right):
        if right[j] < left[i]:
            merged.append(right[j])
            inv += len(left) - i
            j += 1
        else:
            merged.append(left[i])
            i += 1
    merged.extend(left[i:])
    merged.extend(right[j:])
    return merged, inv


def kendall_tau_b(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Kendall tau-b in O(n log n) (Knight's algorithm)."""
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise StatsError("kendall_tau_b needs two equal-length 1-D samples")
    n = x.size
    if n < 2:
        raise StatsError("kendall_tau_b needs at least 2 observations")
    order = np.lexsort((y, x))
    xs_sorted, ys_sorted = x[order], y[order]
    n0 = n * (n - 1) // 2
    tx = _count_tied_pairs(xs_sorted)
    ty = _count_tied_pairs(np.sort(y))
    # pairs tied in both x and y
    txy = 0
    start = 0
    for i in range(1, n + 1):
        if i == n or xs_sorted[i] != xs_sorted[start] or ys_sorted[i] != ys_sorted[start]:
            m = i - start
            txy += m * (m - 1) // 2
            start = i
    _, swaps = _merge_count(ys_sorted.tolist())
    # sorting by (x, y) puts x-tied pairs in y order, so every swap is a discordant pair
    c_minus_d = n0 - tx - ty + txy - 2 * swaps
    if n0 - tx == 0 or n0 - ty == 0:
        raise DegenerateRankingError("degenerate ranking: one side is entirely tied")
    return c_minus_d / math.sqrt((n0 - tx) * (n0 - ty))


# --------------------------------------------------------------------------- Fleiss

@dataclass(frozen=True)
class KappaResult:
    kappa: float
    p_bar: float
    p_e_bar: float


def fleiss_kappa(counts) -> KappaResult:
    """Fleiss' kappa for an N x k matrix of rater counts (rows: subjects, columns: categories)."""
    m = np.asarray(counts)
    if m.ndim != 2 or m.size == 0:
        raise StatsError("fleiss_kappa needs a non-empty N x k matrix")
    if not np.all(np.equal(np.mod(m, 1), 0)) or np.any(m < 0):
        raise StatsError("rater counts must be non-negative integers")
    m = m.astype(np.int64)
    row_sums = m.sum(axis=1)
    if np.any(row_sums != row_sums[0]):
        raise StatsError("every subject must have the same number of ratings")
    n_sub = m.shape[0]
    n = int(row_sums[0])
    if n < 2:
        raise StatsError("need at least 2 raters per subject")
    p_i = (np.sum(m * m, axis=1) - n) / (n * (n - 1))
    p_bar = float(np.mean(p_i))
    p_j = m.sum(axis=0) / (n_sub * n)
    p_e_bar = float(np.sum(p_j * p_j))
    if p_e_bar >= 1.0:
        raise StatsError("no variation: every rating falls in one category")
    return KappaResult(kappa=(p_bar - p_e_bar) / (1.0 - p_e_bar), p_bar=p_bar, p_e_bar=p_e_bar)


# --------------------------------------------------------------------------- Pearson

@dataclass(frozen=True)
class CorrelationMatrix:
    names: tuple[str, ...]
    values: np.ndarray  # NaN marks undefined entries
    undefined: tuple[str, ...] = ()

    def get(self, a: str, b: str) -> float:
        return float(self.values[self.names.index(a), self.names.index(b)])

    def to_json(self) -> dict:
        return {
            "names": list(self.names),
            "values": [[None if math.isnan(v) else float(v) for v in row] for row in self.values],
            "undefined": list(self.undefined),
        }


def pearson_matrix(features, names: Sequence[str] | None = None) -> CorrelationMatrix:
    x = np.asarray(features, dtype=float)
    if x.ndim != 2 or x.shape[0] < 2:
        raise StatsError("pearson_matrix needs an n x p matrix with n >= 2")
    p = x.shape[1]
    names = tuple(names) if names is not None else tuple(f"x{i}" for i in range(p))
    if len(names) != p:
        raise StatsError(f"{len(names)} names for {p} columns")
    centered = x - x.mean(axis=0)
    ss = np.sqrt(np.sum(centered * centered, axis=0))
    constant = ss == 0.0
    with np.errstate(invalid="ignore", divide="ignore"):
        z = centered / ss
        r = z.T @ z
    r = np.clip(r, -1.0, 1.0)
    r = (r + r.T) / 2.0
    r[constant, :] = np.nan
    r[:, constant] = np.nan
    np.fill_diagonal(r, 1.0)
    r[constant, constant] = np.nan
    undefined = tuple(n for n, c in zip(names, constant) if c)
    if undefined:
        warnings.warn(f"constant columns have undefined correlation: {', '.join(undefined)}", stacklevel=2)
    return CorrelationMatrix(names=names, values=r, undefined=undefined)


# --------------------------------------------------------------------------- corpus analytics

def _words(text: str, stopwords) -> list[str]:
    try:
        toks = tokenize(clean_text(text))
    except (EmptyTextError, NoTokensError):
        return []
    return [w for w in (t.surface.casefold() for t in toks if t.is_word) if w not in stopwords]


def word_counts(corpus: Corpus, label: Label, stopwords) -> Counter:
    counts: Counter = Counter()
    for rec in corpus.with_label(label):
        counts.update(_words(rec.text, stopwords))
    return counts


def rank_counts(counts: Counter, k: int | None = None) -> list[tuple[str, int]]:
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    return ranked if k is None else ranked[:k]


def top_words(corpus: Corpus, label: Label, k: int, stopwords) -> list[tuple[str, int]]:
    counts = word_counts(corpus, label, stopwords)
    if not counts:
        raise StatsError(f"no word tokens for class {label.value}")
    return rank_counts(counts, k)


@dataclass(frozen=True)
class WordAgreement:
    union: tuple[str, ...]
    shared: tuple[str, ...]
    counts_misleading: tuple[int, ...]
    counts_non_misleading: tuple[int, ...]
    tau: float | None


def top_word_agreement(corpus: Corpus, k: int, stopwords) -> WordAgreement:
    """Kendall tau-b between class word frequencies over the union of both classes' top-k words."""
    cm = word_counts(corpus, Label.MISLEADING, stopwords)
    cn = word_counts(corpus, Label.NON_MISLEADING, stopwords)
    if not cm or not cn:
        raise StatsError("both classes need word tokens")
    top_m = [w for w, _ in rank_counts(cm, k)]
    top_n = [w for w, _ in rank_counts(cn, k)]
    union = sorted(set(top_m) | set(top_n))
    shared = sorted(set(top_m) & set(top_n))
    vm = [cm.get(w, 0) for w in union]
    vn = [cn.get(w, 0) for w in union]
    try:
        tau = kendall_tau_b(vm, vn) if len(union) >= 2 else None
    except DegenerateRankingError:
        tau = None
    return WordAgreement(tuple(union), tuple(shared), tuple(vm), tuple(vn), tau)


@dataclass
class HashtagReport:
    unique_per_class: dict[Label, list[tuple[str, int]]] = field(default_factory=dict)
    co_hashtags: dict[Label, list[tuple[tuple[str, str], int, bool]]] = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "unique_per_class": {
                lab.value: [{"hashtag": h, "count": c} for h, c in rows]
                for lab, rows in self.unique_per_class.items()
            },
            "co_hashtags": {
                lab.value: {
                    "distinct_pairs": len(rows),
                    "repeated_pairs": sum(1 for *_, rep in rows if rep),
                    "pairs": [{"pair": list(p), "count": c, "repeated": rep} for p, c, rep in rows],
                }
                for lab, rows in self.co_hashtags.items()
            },
        }


def hashtag_report(corpus: Corpus) -> HashtagReport:
    per_class: dict[Label, Counter] = {}
    pairs: dict[Label, Counter] = {}
    for lab in CLASSES:
        tags: Counter = Counter()
        co: Counter = Counter()
        for rec in corpus.with_label(lab):
            tags.update(rec.hashtags)
            co.update(combinations(sorted(set(rec.hashtags)), 2))
        per_class[lab] = tags
        pairs[lab] = co
    report = HashtagReport()
    m, nm = CLASSES
    for lab, other in ((m, nm), (nm, m)):
        unique = Counter({h: c for h, c in per_class[lab].items() if h not in per_class[other]})
        report.unique_per_class[lab] = rank_counts(unique)
        report.co_hashtags[lab] = [
            (pair, c, c > 1) for pair, c in sorted(pairs[lab].items(), key=lambda kv: (-kv[1], kv[0]))
        ]
    return report


def lower_median(values: Sequence[float]) -> float:
    s = sorted(values)
    return s[(len(s) - 1) // 2]


def visibility_summary(corpus: Corpus) -> dict[Label, dict[str, dict[str, float | int] | None]]:
    """Per class and engagement field: lower median, mean and n over records carrying the field."""
    out: dict = {}
    for lab in CLASSES:
        recs = corpus.with_label(lab)
        fields: dict = {}
        for name in COUNT_FIELDS:
            vals = [getattr(r, name) for r in recs if getattr(r, name) is not None]
            fields[name] = (
                {"median": lower_median(vals), "mean": sum(vals) / len(vals), "n": len(vals)} if vals else None
            )
        if all(v is None for v in fields.values()):
            raise StatsError(f"no engagement counts for class {lab.value}")
        out[lab] = fields
    return out


def vaccine_mention_distribution(corpus: Corpus, aliases=None, max_count: int = 5) -> dict[Label, list[float]]:
    """Percentage of each class's tweets naming 0..max_count distinct vaccines."""
    out = {}
    for lab in CLASSES:
        recs = corpus.with_label(lab)
        hist = [0] * (max_count + 1)
        for rec in recs:
            hist[min(count_vaccine_mentions(rec.text, aliases), max_count)] += 1
        out[lab] = [100.0 * h / len(recs) if recs else 0.0 for h in hist]
    return out


def ks_table(samples: dict[str, tuple[Iterable[float], Iterable[float]]]) -> dict[str, KsResult]:
    return {name: ks_two_sample(list(a), list(b)) for name, (a, b) in samples.items()}
