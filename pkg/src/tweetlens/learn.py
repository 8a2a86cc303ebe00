"""Feature matrix assembly, tree ensembles, k-NN and cross-validated evaluation."""

from __future__ import annotations

import csv
import logging
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Mapping, Sequence

import numba
import numpy as np
from scipy.stats import rankdata

from .affect import EmotionScores, SentimentScore, one_hot_emotion
from .corpus import Corpus, Label
from .syntax import SyntacticProfile

log = logging.getLogger(__name__)

FEATURE_NAMES = (
    "stop_words", "pronouns", "nouns", "adjectives", "avg_token_length", "wh_words",
    "adverbs", "conjunctions", "verbs", "determiners", "ttr", "sentiment_compound",
    "emo_happiness", "emo_fear", "emo_anger", "emo_surprise", "emo_sadness", "hashtag_count",
)

DISPLAY_NAMES = {
    "stop_words": "Stop words", "pronouns": "Pronouns", "nouns": "Nouns", "adjectives": "Adjectives",
    "avg_token_length": "Average length", "wh_words": "WH-words", "adverbs": "Adverbs",
    "conjunctions": "Conjunctions", "verbs": "Verbs", "determiners": "Determiners", "ttr": "TTR",
    "sentiment_compound": "Sentiments", "emo_happiness": "Emo: Happiness", "emo_fear": "Emo: Fear",
    "emo_anger": "Emo: Anger", "emo_surprise": "Emo: Surprise", "emo_sadness": "Emo: Sadness",
    "hashtag_count": "Hashtags",
}


class LearnError(ValueError):
    pass


class UndefinedMetricError(LearnError):
    pass


# --------------------------------------------------------------------------- data

@dataclass
class LabeledDataset:
    X: np.ndarray
    y: np.ndarray  # 1 = Misleading
    feature_names: tuple[str, ...] = FEATURE_NAMES
    ids: tuple[str, ...] = ()
    skipped: list[tuple[str, str]] = field(default_factory=list)

    def __post_init__(self):
        self.X = np.ascontiguousarray(self.X, dtype=np.float64)
        self.y = np.asarray(self.y, dtype=np.int64)
        if self.X.ndim != 2 or self.X.shape[0] != self.y.shape[0]:
            raise LearnError(f"X has shape {self.X.shape} but there are {self.y.shape[0]} labels")
        if self.X.shape[1] != len(self.feature_names):
            raise LearnError(f"{self.X.shape[1]} columns but {len(self.feature_names)} feature names")
        if not self.ids:
            self.ids = tuple(str(i) for i in range(self.X.shape[0]))

    def __len__(self) -> int:
        return self.X.shape[0]

    def columns(self, names: Sequence[str]) -> "LabeledDataset":
        idx = [self.feature_names.index(n) for n in names]
        return LabeledDataset(self.X[:, idx], self.y, tuple(names), self.ids)

    def rows(self, index) -> "LabeledDataset":
        index = np.asarray(index)
        return LabeledDataset(self.X[index], self.y[index], self.feature_names, tuple(self.ids[i] for i in index))


def feature_row(profile: SyntacticProfile, sentiment: SentimentScore, emotions: EmotionScores, n_hashtags: int) -> list[float]:
    return [
        float(profile.stop_words), float(profile.pronouns), float(profile.nouns), float(profile.adjectives),
        profile.avg_token_length, float(profile.wh_words), float(profile.adverbs),
        float(profile.conjunctions), float(profile.verbs), float(profile.determiners), profile.ttr,
        sentiment.compound, *one_hot_emotion(emotions), float(n_hashtags),
    ]


def build_feature_matrix(
    corpus: Corpus,
    profiles: Mapping[str, SyntacticProfile],
    sentiments: Mapping[str, SentimentScore],
    emotions: Mapping[str, EmotionScores],
) -> LabeledDataset:
    """Rows in corpus order; unlabeled tweets and tweets missing an artifact are skipped."""
    rows, labels, ids, skipped = [], [], [], []
    for rec in corpus:
        if rec.label is Label.UNLABELED:
            skipped.append((rec.id, "unlabeled"))
            continue
        missing = [name for name, table in (("syntax", profiles), ("sentiment", sentiments), ("emotion", emotions))
                   if rec.id not in table]
        if missing:
            skipped.append((rec.id, "missing " + "/".join(missing)))
            continue
        rows.append(feature_row(profiles[rec.id], sentiments[rec.id], emotions[rec.id], len(rec.hashtags)))
        labels.append(1 if rec.label is Label.MISLEADING else 0)
        ids.append(rec.id)
    for tid, why in skipped:
        log.info("skipping tweet %s: %s", tid, why)
    if not rows:
        raise LearnError("no usable rows for the feature matrix")
    return LabeledDataset(np.array(rows), np.array(labels), FEATURE_NAMES, tuple(ids), skipped)


def write_feature_csv(data: LabeledDataset, path: str | Path) -> None:
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["id", "label", *data.feature_names])
        for tid, label, row in zip(data.ids, data.y, data.X):
            w.writerow([tid, Label.MISLEADING.value if label else Label.NON_MISLEADING.value,
                        *(repr(float(v)) for v in row)])


def read_feature_csv(path: str | Path) -> LabeledDataset:
    with Path(path).open(encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or header[:2] != ["id", "label"]:
            raise LearnError(f"{path}: header must start with id,label")
        names = tuple(header[2:])
        ids, labels, rows = [], [], []
        for line_no, row in enumerate(reader, start=2):
            if len(row) != len(header):
                raise LearnError(f"{path}: line {line_no} has {len(row)} fields, expected {len(header)}")
            ids.append(row[0])
            labels.append(1 if Label.parse(row[1]) is Label.MISLEADING else 0)
            rows.append([float(v) for v in row[2:]])
    if not rows:
        raise LearnError(f"{path}: no rows")
    return LabeledDataset(np.array(rows), np.array(labels), names, tuple(ids))


# --------------------------------------------------------------------------- tree kernel

@numba.njit(cache=True, nogil=True)
def _grow(X, y, sample_idx, max_depth, min_samples_split, max_features, random_thresholds, seed):
    np.random.seed(seed)
    n_features = X.shape[1]
    cap = 2 * sample_idx.shape[0] + 1
    feature = np.full(cap, -1, dtype=np.int64)
    threshold = np.zeros(cap)
    left = np.full(cap, -1, dtype=np.int64)
    right = np.full(cap, -1, dtype=np.int64)
    n_pos = np.zeros(cap, dtype=np.int64)
    n_neg = np.zeros(cap, dtype=np.int64)
    work = sample_idx.copy()

    # stack of (node, start, end, depth)
    st_node = np.empty(cap, dtype=np.int64)
    st_start = np.empty(cap, dtype=np.int64)
    st_end = np.empty(cap, dtype=np.int64)
    st_depth = np.empty(cap, dtype=np.int64)
    top = 0
    st_node[0] = 0
    st_start[0] = 0
    st_end[0] = work.shape[0]
    st_depth[0] = 0
    top = 1
    n_nodes = 1
    candidates = np.empty(n_features, dtype=np.int64)

    while top > 0:
        top -= 1
        node = st_node[top]
        start = st_start[top]
        end = st_end[top]
        depth = st_depth[top]
        cnt = end - start
        pos = 0
        for i in range(start, end):
            pos += y[work[i]]
        n_pos[node] = pos
        n_neg[node] = cnt - pos
        if pos == 0 or pos == cnt or cnt < min_samples_split or (max_depth >= 0 and depth >= max_depth):
            continue

        # candidate features: the first max_features non-constant ones of a random order
        if max_features >= n_features:
            order = np.arange(n_features)
        else:
            order = np.random.permutation(n_features)
        n_cand = 0
        for j in range(n_features):
            f = order[j]
            lo = X[work[start], f]
            hi = lo
            for i in range(start + 1, end):
                v = X[work[i], f]
                if v < lo:
                    lo = v
                if v > hi:
                    hi = v
            if hi > lo:
                candidates[n_cand] = f
                n_cand += 1
                if n_cand >= max_features:
                    break
        if n_cand == 0:
            continue
        cand = np.sort(candidates[:n_cand])

        best_score = -1.0
        best_f = -1
        best_t = 0.0
        vals = np.empty(cnt)
        labs = np.empty(cnt, dtype=np.int64)
        for c in range(n_cand):
            f = cand[c]
            for i in range(cnt):
                vals[i] = X[work[start + i], f]
                labs[i] = y[work[start + i]]
            if random_thresholds:
                lo = vals.min()
                hi = vals.max()
                t = lo + np.random.random() * (hi - lo)
                if t >= hi:
                    t = lo
                pl = 0
                nl = 0
                for i in range(cnt):
                    if vals[i] <= t:
                        nl += 1
                        pl += labs[i]
                nr = cnt - nl
                pr = pos - pl
                ql = nl - pl
                qr = nr - pr
                score = (pl * pl + ql * ql) / nl + (pr * pr + qr * qr) / nr
                if score > best_score:
                    best_score = score
                    best_f = f
                    best_t = t
            else:
                order_v = np.argsort(vals, kind="mergesort")
                pl = 0
                for i in range(cnt - 1):
                    pl += labs[order_v[i]]
                    a = vals[order_v[i]]
                    b = vals[order_v[i + 1]]
                    if a < b:
                        nl = i + 1
                        nr = cnt - nl
                        pr = pos - pl
                        ql = nl - pl
                        qr = nr - pr
                        score = (pl * pl + ql * ql) / nl + (pr * pr + qr * qr) / nr
                        if score > best_score:
                            best_score = score
                            best_f = f
                            t = a + (b - a) / 2.0
                            if t >= b:
                                t = a
                            best_t = t

        # partition work[start:end] into <= threshold | > threshold
        i = start
        j = end - 1
        while i <= j:
            if X[work[i], best_f] <= best_t:
                i += 1
            else:
                tmp = work[i]
                work[i] = work[j]
                work[j] = tmp
                j -= 1
        mid = i
        feature[node] = best_f
        threshold[node] = best_t
        left[node] = n_nodes
        right[node] = n_nodes + 1
        n_nodes += 2
        st_node[top] = right[node]
        st_start[top] = mid
        st_end[top] = end
        st_depth[top] = depth + 1
        top += 1
        st_node[top] = left[node]
        st_start[top] = start
        st_end[top] = mid
        st_depth[top] = depth + 1
        top += 1

    return (feature[:n_nodes], threshold[:n_nodes], left[:n_nodes], right[:n_nodes],
            n_pos[:n_nodes], n_neg[:n_nodes])


@numba.njit(cache=True, nogil=True)
def _apply(feature, threshold, left, right, X):
    out = np.empty(X.shape[0], dtype=np.int64)
    for r in range(X.shape[0]):
        node = 0
        while feature[node] >= 0:
            if X[r, feature[node]] <= threshold[node]:
                node = left[node]
            else:
                node = right[node]
        out[r] = node
    return out


# --------------------------------------------------------------------------- models

@dataclass(frozen=True, eq=False)
class TreeModel:
    """Flat binary tree. Leaves have feature == -1; ``cover`` counts training rows per node."""

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    n_pos: np.ndarray
    n_neg: np.ndarray
    n_features: int
    max_depth: int | None = None
    min_samples_split: int = 2
    seed: int = 0

    @property
    def cover(self) -> np.ndarray:
        return self.n_pos + self.n_neg

    @property
    def value(self) -> np.ndarray:
        """Positive-class fraction at every node."""
        return self.n_pos / self.cover

    @property
    def n_nodes(self) -> int:
        return self.feature.shape[0]

    @property
    def trees(self) -> tuple["TreeModel", ...]:
        return (self,)

    def apply(self, X) -> np.ndarray:
        X = _check_X(X, self.n_features)
        return _apply(self.feature, self.threshold, self.left, self.right, X)

    def predict_proba(self, X) -> np.ndarray | float:
        single = np.ndim(X) == 1
        p = self.value[self.apply(X)]
        return float(p[0]) if single else p

    def to_json(self) -> dict:
        return {
            "seed": int(self.seed),
            "max_depth": self.max_depth,
            "min_samples_split": int(self.min_samples_split),
            "n_features": int(self.n_features),
            "nodes": {
                "feature": self.feature.tolist(),
                "threshold": [float(t) for t in self.threshold],
                "left": self.left.tolist(),
                "right": self.right.tolist(),
                "n_pos": self.n_pos.tolist(),
                "n_neg": self.n_neg.tolist(),
            },
        }

    @classmethod
    def from_json(cls, d: dict) -> "TreeModel":
        nodes = d["nodes"]
        arr = {k: np.asarray(nodes[k], dtype=np.int64) for k in ("feature", "left", "right", "n_pos", "n_neg")}
        return cls(threshold=np.asarray(nodes["threshold"], dtype=np.float64), n_features=int(d["n_features"]),
                   max_depth=d.get("max_depth"), min_samples_split=int(d.get("min_samples_split", 2)),
                   seed=int(d.get("seed", 0)), **arr)


def _check_X(X, n_features: int) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X[None, :]
    if X.ndim != 2 or X.shape[1] != n_features:
        raise LearnError(f"expected {n_features} features, got shape {X.shape}")
    return np.ascontiguousarray(X)


def _xy(data) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(data, LabeledDataset):
        return data.X, data.y
    X, y = data
    return np.ascontiguousarray(X, dtype=np.float64), np.asarray(y, dtype=np.int64)


def grow_tree(X, y, rows=None, max_depth=None, min_samples_split=2, max_features=None,
              random_thresholds=False, seed=0) -> TreeModel:
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    n, p = X.shape
    if n == 0:
        raise LearnError("cannot grow a tree on zero rows")
    if min_samples_split < 2:
        raise LearnError("min_samples_split must be >= 2")
    rows = np.arange(n, dtype=np.int64) if rows is None else np.asarray(rows, dtype=np.int64)
    m = p if max_features is None else max(1, min(int(max_features), p))
    md = -1 if max_depth is None else int(max_depth)
    parts = _grow(X, y, rows, md, int(min_samples_split), m, bool(random_thresholds), int(seed) & 0xFFFFFFFF)
    feature, threshold, left, right, n_pos, n_neg = (np.array(a) for a in parts)
    return TreeModel(feature, threshold, left, right, n_pos, n_neg, n_features=p,
                     max_depth=max_depth, min_samples_split=min_samples_split, seed=int(seed))


def train_tree(data, max_depth: int | None = None, min_samples_split: int = 2, seed: int = 0) -> TreeModel:
    """CART with Gini impurity over every feature; ties go to the lowest feature, then lowest threshold."""
    X, y = _xy(data)
    if X.shape[0] < min_samples_split:
        raise LearnError(f"need at least min_samples_split={min_samples_split} rows, got {X.shape[0]}")
    return grow_tree(X, y, max_depth=max_depth, min_samples_split=min_samples_split, seed=seed)


VARIANTS = ("random_forest", "extra_trees", "bagging")


@dataclass(frozen=True, eq=False)
class ForestModel:
    trees: tuple[TreeModel, ...]
    variant: str
    features_per_split: int
    bootstrap: bool
    master_seed: int
    n_features: int

    @property
    def n_trees(self) -> int:
        return len(self.trees)

    def predict_proba(self, X) -> np.ndarray | float:
        single = np.ndim(X) == 1
        X = _check_X(X, self.n_features)
        p = np.mean([t.value[t.apply(X)] for t in self.trees], axis=0)
        return float(p[0]) if single else p

    def to_json(self) -> dict:
        return {
            "variant": self.variant,
            "features_per_split": self.features_per_split,
            "bootstrap": self.bootstrap,
            "master_seed": self.master_seed,
            "n_features": self.n_features,
            "trees": [t.to_json() for t in self.trees],
        }

    @classmethod
    def from_json(cls, d: dict) -> "ForestModel":
        return cls(trees=tuple(TreeModel.from_json(t) for t in d["trees"]), variant=d["variant"],
                   features_per_split=int(d["features_per_split"]), bootstrap=bool(d["bootstrap"]),
                   master_seed=int(d["master_seed"]), n_features=int(d["n_features"]))


def derive_tree_seeds(master_seed: int, n_trees: int) -> list[np.random.SeedSequence]:
    """Per-tree seed sequences: ``SeedSequence(master_seed).spawn(n_trees)``.

    Tree i uses the first 32-bit word of its child's state as the split RNG seed
    and a ``default_rng(child)`` stream for bootstrap rows.
    """
    return np.random.SeedSequence(int(master_seed)).spawn(n_trees)


def train_forest(
    data,
    variant: str = "random_forest",
    n_trees: int = 100,
    features_per_split: int | None = None,
    master_seed: int = 1,
    max_depth: int | None = None,
    min_samples_split: int = 2,
    bootstrap: bool | None = None,
    threads: int = 1,
) -> ForestModel:
    """Random forest, extra-trees or bagging ensemble of Gini trees.

    Defaults: random forest and extra-trees draw floor(sqrt(p)) features per
    split, bagging uses all of them; random forest and bagging bootstrap rows.
    """
    if variant not in VARIANTS:
        raise LearnError(f"unknown forest variant {variant!r}; expected one of {VARIANTS}")
    if n_trees < 1:
        raise LearnError("n_trees must be >= 1")
    X, y = _xy(data)
    n, p = X.shape
    if n < min_samples_split:
        raise LearnError(f"need at least min_samples_split={min_samples_split} rows, got {n}")
    if features_per_split is None:
        features_per_split = p if variant == "bagging" else max(1, int(math.isqrt(p)))
    features_per_split = max(1, min(int(features_per_split), p))
    if bootstrap is None:
        bootstrap = variant != "extra_trees"
    random_thresholds = variant == "extra_trees"
    seqs = derive_tree_seeds(master_seed, n_trees)

    def build(i: int) -> TreeModel:
        seq = seqs[i]
        tree_seed = int(seq.generate_state(1)[0])
        rows = np.random.default_rng(seq).integers(0, n, size=n) if bootstrap else None
        return grow_tree(X, y, rows=rows, max_depth=max_depth, min_samples_split=min_samples_split,
                         max_features=features_per_split, random_thresholds=random_thresholds, seed=tree_seed)

    if threads > 1 and n_trees > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            trees = list(pool.map(build, range(n_trees)))
    else:
        trees = [build(i) for i in range(n_trees)]
    return ForestModel(tuple(trees), variant, features_per_split, bool(bootstrap), int(master_seed), p)


def predict_proba(model, x):
    return model.predict_proba(x)


def predict(model, X, threshold: float = 0.5) -> np.ndarray:
    return (np.atleast_1d(model.predict_proba(X)) >= threshold).astype(np.int64)


@dataclass(frozen=True, eq=False)
class KnnModel:
    X: np.ndarray
    y: np.ndarray
    k: int
    mean: np.ndarray
    scale: np.ndarray
    active: np.ndarray  # columns used by the metric

    @property
    def n_features(self) -> int:
        return self.X.shape[1]

    def predict_proba(self, X) -> np.ndarray | float:
        single = np.ndim(X) == 1
        Q = _check_X(X, self.n_features)
        a = self.active
        Zt = (self.X[:, a] - self.mean[a]) / self.scale[a]
        Zq = (Q[:, a] - self.mean[a]) / self.scale[a]
        out = np.empty(Q.shape[0])
        for r in range(Q.shape[0]):
            d2 = np.sum((Zt - Zq[r]) ** 2, axis=1)
            nearest = np.argsort(d2, kind="stable")[: self.k]
            out[r] = self.y[nearest].mean()
        return float(out[0]) if single else out


def fit_knn(data, k: int = 5) -> KnnModel:
    X, y = _xy(data)
    n = X.shape[0]
    if not 1 <= k <= n:
        raise LearnError(f"k must be in [1, {n}], got {k}")
    mean = X.mean(axis=0)
    scale = X.std(axis=0)
    active = scale > 0
    if not active.all():
        warnings.warn(f"dropping constant columns {np.flatnonzero(~active).tolist()} from the k-NN metric",
                      stacklevel=2)
    scale = np.where(active, scale, 1.0)
    return KnnModel(X.copy(), y.copy(), int(k), mean, scale, np.flatnonzero(active))


def knn_predict(train, x, k: int):
    return fit_knn(train, k).predict_proba(x)


# --------------------------------------------------------------------------- model specs

@dataclass(frozen=True)
class ModelSpec:
    """A named model configuration. ``kind`` is one of rf, xts, dt, xt, bg, knn."""

    kind: str = "rf"
    n_trees: int = 100
    features_per_split: int | None = None
    max_depth: int | None = None
    min_samples_split: int = 2
    k_neighbors: int = 5
    threads: int = 1

    def fit(self, X, y, seed: int):
        X = np.ascontiguousarray(X, dtype=np.float64)
        kw = dict(max_depth=self.max_depth, min_samples_split=self.min_samples_split)
        if self.kind == "rf":
            return train_forest((X, y), "random_forest", self.n_trees, self.features_per_split, seed,
                                threads=self.threads, **kw)
        if self.kind == "xts":
            return train_forest((X, y), "extra_trees", self.n_trees, self.features_per_split, seed,
                                threads=self.threads, **kw)
        if self.kind == "bg":
            return train_forest((X, y), "bagging", self.n_trees, self.features_per_split, seed,
                                threads=self.threads, **kw)
        if self.kind == "dt":
            return grow_tree(X, y, seed=seed, **kw)
        if self.kind == "xt":
            fps = self.features_per_split or max(1, math.isqrt(X.shape[1]))
            return train_forest((X, y), "extra_trees", 1, fps, seed, **kw)
        if self.kind == "knn":
            return fit_knn((X, y), min(self.k_neighbors, X.shape[0]))
        raise LearnError(f"unknown model kind {self.kind!r}")


# name -> spec, in the row order used for reports
MODEL_SUITE = {
    "RF": ModelSpec("rf"),
    "XTS": ModelSpec("xts"),
    "DT": ModelSpec("dt"),
    "XT": ModelSpec("xt"),
    "BG": ModelSpec("bg"),
    "KNN": ModelSpec("knn"),
}


# --------------------------------------------------------------------------- metrics

@dataclass(frozen=True)
class EvalMetrics:
    accuracy: float
    precision: float
    recall: float
    f1: float
    auc: float

    def as_dict(self) -> dict[str, float]:
        return {"ACC": self.accuracy, "PR": self.precision, "RC": self.recall, "F1": self.f1, "AUC": self.auc}


METRIC_KEYS = ("ACC", "PR", "RC", "F1", "AUC")


def auc_score(y_true, y_prob) -> float:
    """ROC AUC as the Mann-Whitney statistic with midranks for tied scores."""
    y = np.asarray(y_true).astype(bool)
    s = np.asarray(y_prob, dtype=float)
    n_pos = int(y.sum())
    n_neg = y.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise UndefinedMetricError("AUC is undefined when y_true holds a single class")
    ranks = rankdata(s, method="average")
    return float((ranks[y].sum() - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg))


def evaluate(y_true, y_prob, threshold: float = 0.5) -> EvalMetrics:
    """Accuracy, macro precision/recall, F1 = harmonic mean of those, and AUC.

    With a single class in ``y_true`` AUC is NaN and a warning is issued.
    """
    y = np.asarray(y_true, dtype=np.int64)
    prob = np.asarray(y_prob, dtype=float)
    if y.shape != prob.shape:
        raise LearnError("y_true and y_prob differ in length")
    if y.size == 0:
        raise LearnError("cannot evaluate zero predictions")
    pred = (prob >= threshold).astype(np.int64)
    acc = float(np.mean(pred == y))
    precisions, recalls = [], []
    for cls in (1, 0):
        tp = int(np.sum((pred == cls) & (y == cls)))
        n_pred = int(np.sum(pred == cls))
        n_true = int(np.sum(y == cls))
        precisions.append(tp / n_pred if n_pred else 0.0)
        recalls.append(tp / n_true if n_true else 0.0)
    pr = float(np.mean(precisions))
    rc = float(np.mean(recalls))
    f1 = 2 * pr * rc / (pr + rc) if pr + rc > 0 else 0.0
    try:
        auc = auc_score(y, prob)
    except UndefinedMetricError as exc:
        warnings.warn(str(exc), stacklevel=2)
        auc = float("nan")
    return EvalMetrics(acc, pr, rc, f1, auc)


# --------------------------------------------------------------------------- cross-validation

def stratified_folds(y, folds: int, seed: int) -> np.ndarray:
    """Fold index per row: each class is shuffled and dealt round-robin."""
    y = np.asarray(y)
    if folds < 2:
        raise LearnError("folds must be >= 2")
    if folds > y.size:
        raise LearnError(f"{folds} folds for {y.size} rows")
    rng = np.random.default_rng(seed)
    fold_of = np.empty(y.size, dtype=np.int64)
    offset = 0
    for cls in (1, 0):
        idx = np.flatnonzero(y == cls)
        if idx.size < 2:
            raise LearnError(f"class {cls} has {idx.size} row(s); too few to stratify")
        perm = rng.permutation(idx)
        fold_of[perm] = (np.arange(perm.size) + offset) % folds
        offset += perm.size
    return fold_of


@dataclass
class CVResult:
    per_fold: list[EvalMetrics]
    mean: dict[str, float]
    std: dict[str, float]
    pooled: EvalMetrics
    fold_of: np.ndarray
    oof_prob: np.ndarray

    def to_json(self) -> dict:
        return {
            "mean": self.mean,
            "std": self.std,
            "pooled": self.pooled.as_dict(),
            "per_fold": [m.as_dict() for m in self.per_fold],
        }


def _nanstats(values: list[float]) -> tuple[float, float]:
    arr = np.asarray(values, dtype=float)
    arr = arr[~np.isnan(arr)]
    if arr.size == 0:
        return float("nan"), float("nan")
    return float(arr.mean()), float(arr.std())


def cross_validate(data: LabeledDataset, spec: ModelSpec, folds: int = 5, seed: int = 1) -> CVResult:
    """Stratified k-fold CV. Fold f trains with seed ``seed + f``.

    Reports per-fold metrics, their mean and population std (NaN folds
    ignored), and metrics over the pooled out-of-fold predictions.
    """
    fold_of = stratified_folds(data.y, folds, seed)
    oof = np.empty(len(data))
    per_fold = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        for f in range(folds):
            test = fold_of == f
            model = spec.fit(data.X[~test], data.y[~test], seed + f)
            prob = np.atleast_1d(model.predict_proba(data.X[test]))
            oof[test] = prob
            per_fold.append(evaluate(data.y[test], prob))
        pooled = evaluate(data.y, oof)
    mean, std = {}, {}
    for key in METRIC_KEYS:
        mean[key], std[key] = _nanstats([m.as_dict()[key] for m in per_fold])
    return CVResult(per_fold, mean, std, pooled, fold_of, oof)


def spec_with(spec: ModelSpec, **changes) -> ModelSpec:
    return replace(spec, **changes)


def stratified_split(y, test_fraction: float, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Train/test row indices; each class sends round-half-up(test_fraction * size) rows to test."""
    if not 0.0 < test_fraction < 1.0:
        raise LearnError(f"test_fraction must lie in (0, 1), got {test_fraction}")
    y = np.asarray(y)
    rng = np.random.default_rng(seed)
    test = []
    for cls in (1, 0):
        idx = np.flatnonzero(y == cls)
        if idx.size < 2:
            raise LearnError(f"class {cls} has {idx.size} row(s); need at least 2 to split")
        n_test = min(max(int(math.floor(idx.size * test_fraction + 0.5)), 1), idx.size - 1)
        test.extend(rng.permutation(idx)[:n_test].tolist())
    is_test = np.zeros(y.size, dtype=bool)
    is_test[test] = True
    return np.flatnonzero(~is_test), np.flatnonzero(is_test)


def model_to_json(model) -> dict:
    if isinstance(model, ForestModel):
        return {"kind": "forest", **model.to_json()}
    if isinstance(model, TreeModel):
        return {"kind": "tree", "tree": model.to_json()}
    raise LearnError(f"cannot serialize {type(model).__name__}")


def model_from_json(d: dict):
    kind = d.get("kind")
    if kind == "forest":
        return ForestModel.from_json(d)
    if kind == "tree":
        return TreeModel.from_json(d["tree"])
    raise LearnError(f"unknown model kind {kind!r}")
