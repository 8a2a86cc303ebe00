"""Shapley attribution for tree ensembles, SHAP ranking, ablation and correlation analysis."""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numba
import numpy as np

from .learn import (
    DISPLAY_NAMES, FEATURE_NAMES, CVResult, LabeledDataset, ModelSpec, cross_validate,
)
from .stats import CorrelationMatrix, DegenerateRankingError, kendall_tau_b

MAX_EXACT_FEATURES = 20


class ExplainError(ValueError):
    pass


@dataclass(frozen=True)
class ShapAttribution:
    values: np.ndarray
    base_value: float
    prediction: float

    @property
    def efficiency_gap(self) -> float:
        return abs(self.base_value + float(np.sum(self.values)) - self.prediction)


def _trees(model):
    trees = getattr(model, "trees", None)
    if not trees:
        raise ExplainError("model has no trees")
    for t in trees:
        cover = getattr(t, "cover", None)
        if cover is None or len(cover) != len(t.feature) or np.any(np.asarray(cover) <= 0):
            raise ExplainError("model nodes lack positive covers; Shapley attribution needs them")
    return trees


def _instance(model, x) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1 or x.shape[0] != model.n_features:
        raise ExplainError(f"expected a vector of {model.n_features} features, got shape {x.shape}")
    return x


# --------------------------------------------------------------------------- exact oracle

def _subset_values(tree, x: np.ndarray, masks: np.ndarray) -> np.ndarray:
    """v(S) for every subset mask: features in S follow x, others average children by cover."""
    cover = tree.cover.astype(np.float64)
    value = tree.value

    def walk(node: int) -> np.ndarray:
        f = tree.feature[node]
        if f < 0:
            return np.full(masks.shape[0], value[node])
        lo, hi = tree.left[node], tree.right[node]
        lv, rv = walk(lo), walk(hi)
        follow = lv if x[f] <= tree.threshold[node] else rv
        avg = (cover[lo] * lv + cover[hi] * rv) / cover[node]
        return np.where((masks >> f) & 1 == 1, follow, avg)

    return walk(0)


def exact_shapley(model, x) -> ShapAttribution:
    """Shapley values by enumerating all 2^p feature subsets (the definition; p <= 20)."""
    trees = _trees(model)
    x = _instance(model, x)
    p = x.shape[0]
    if p > MAX_EXACT_FEATURES:
        raise ExplainError(f"exact enumeration limited to {MAX_EXACT_FEATURES} features; use tree_shap")
    masks = np.arange(1 << p, dtype=np.int64)
    v = np.mean([_subset_values(t, x, masks) for t in trees], axis=0)
    size = np.array([bin(m).count("1") for m in range(1 << p)])
    weight = np.array([math.factorial(s) * math.factorial(p - s - 1) / math.factorial(p) if s < p else 0.0
                       for s in range(p + 1)])
    phi = np.empty(p)
    for i in range(p):
        without = masks[(masks >> i) & 1 == 0]
        phi[i] = np.sum(weight[size[without]] * (v[without | (1 << i)] - v[without]))
    return ShapAttribution(phi, float(v[0]), float(v[-1]))


# --------------------------------------------------------------------------- path-dependent TreeSHAP

@numba.njit(cache=True, nogil=True)
def _extend(pd, pz, po, pw, off, ud, zero, one, feat):
    pd[off + ud] = feat
    pz[off + ud] = zero
    po[off + ud] = one
    pw[off + ud] = 1.0 if ud == 0 else 0.0
    for i in range(ud - 1, -1, -1):
        pw[off + i + 1] += one * pw[off + i] * (i + 1) / (ud + 1)
        pw[off + i] = zero * pw[off + i] * (ud - i) / (ud + 1)


@numba.njit(cache=True, nogil=True)
def _unwind(pd, pz, po, pw, off, ud, idx):
    one = po[off + idx]
    zero = pz[off + idx]
    nxt = pw[off + ud]
    for i in range(ud - 1, -1, -1):
        if one != 0.0:
            tmp = pw[off + i]
            pw[off + i] = nxt * (ud + 1) / ((i + 1) * one)
            nxt = tmp - pw[off + i] * zero * (ud - i) / (ud + 1)
        else:
            pw[off + i] = pw[off + i] * (ud + 1) / (zero * (ud - i))
    for i in range(idx, ud):
        pd[off + i] = pd[off + i + 1]
        pz[off + i] = pz[off + i + 1]
        po[off + i] = po[off + i + 1]


@numba.njit(cache=True, nogil=True)
def _unwound_sum(pz, po, pw, off, ud, idx):
    one = po[off + idx]
    zero = pz[off + idx]
    nxt = pw[off + ud]
    total = 0.0
    if one != 0.0:
        for i in range(ud - 1, -1, -1):
            tmp = nxt / ((i + 1) * one)
            total += tmp
            nxt = pw[off + i] - tmp * zero * (ud - i)
    else:
        for i in range(ud - 1, -1, -1):
            total += pw[off + i] / (zero * (ud - i))
    return total * (ud + 1)


@numba.njit(cache=True, nogil=True)
def _tree_shap(feature, threshold, left, right, cover, value, X, phi):
    """Accumulate one tree's path-dependent Shapley values for every row of X into phi."""
    n_nodes = feature.shape[0]
    # depth of the deepest node bounds the path length
    depth = np.zeros(n_nodes, dtype=np.int64)
    max_depth = 0
    for j in range(n_nodes):
        if feature[j] >= 0:
            depth[left[j]] = depth[j] + 1
            depth[right[j]] = depth[j] + 1
            if depth[j] + 1 > max_depth:
                max_depth = depth[j] + 1
    size = (max_depth + 3) * (max_depth + 4)
    pd = np.zeros(size, dtype=np.int64)
    pz = np.zeros(size)
    po = np.zeros(size)
    pw = np.zeros(size)
    st_node = np.empty(n_nodes, dtype=np.int64)
    st_ud = np.empty(n_nodes, dtype=np.int64)
    st_off = np.empty(n_nodes, dtype=np.int64)
    st_zero = np.empty(n_nodes)
    st_one = np.empty(n_nodes)
    st_feat = np.empty(n_nodes, dtype=np.int64)

    for r in range(X.shape[0]):
        top = 0
        st_node[0] = 0
        st_ud[0] = 0
        st_off[0] = 0
        st_zero[0] = 1.0
        st_one[0] = 1.0
        st_feat[0] = -1
        top = 1
        while top > 0:
            top -= 1
            node = st_node[top]
            ud = st_ud[top]
            parent = st_off[top]
            off = parent + ud + 1
            for i in range(ud + 1):
                pd[off + i] = pd[parent + i]
                pz[off + i] = pz[parent + i]
                po[off + i] = po[parent + i]
                pw[off + i] = pw[parent + i]
            _extend(pd, pz, po, pw, off, ud, st_zero[top], st_one[top], st_feat[top])
            f = feature[node]
            if f < 0:
                for i in range(1, ud + 1):
                    w = _unwound_sum(pz, po, pw, off, ud, i)
                    phi[r, pd[off + i]] += w * (po[off + i] - pz[off + i]) * value[node]
                continue
            if X[r, f] <= threshold[node]:
                hot = left[node]
                cold = right[node]
            else:
                hot = right[node]
                cold = left[node]
            in_zero = 1.0
            in_one = 1.0
            k = 0
            while k <= ud:
                if pd[off + k] == f:
                    break
                k += 1
            if k <= ud:
                in_zero = pz[off + k]
                in_one = po[off + k]
                _unwind(pd, pz, po, pw, off, ud, k)
                ud -= 1
            # cold first on the stack so the hot branch is walked first
            st_node[top] = cold
            st_ud[top] = ud + 1
            st_off[top] = off
            st_zero[top] = cover[cold] / cover[node] * in_zero
            st_one[top] = 0.0
            st_feat[top] = f
            top += 1
            st_node[top] = hot
            st_ud[top] = ud + 1
            st_off[top] = off
            st_zero[top] = cover[hot] / cover[node] * in_zero
            st_one[top] = in_one
            st_feat[top] = f
            top += 1


def _check_matrix(model, X) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X[None, :]
    if X.ndim != 2 or X.shape[1] != model.n_features:
        raise ExplainError(f"expected {model.n_features} features, got shape {X.shape}")
    return np.ascontiguousarray(X)


def shap_values(model, X) -> tuple[np.ndarray, float]:
    """Path-dependent TreeSHAP for every row of X; returns (n x p values, base value)."""
    trees = _trees(model)
    X = _check_matrix(model, X)
    total = np.zeros(X.shape)
    base = 0.0
    for t in trees:
        phi = np.zeros(X.shape)
        _tree_shap(t.feature, t.threshold, t.left, t.right, t.cover.astype(np.float64), t.value, X, phi)
        total += phi
        base += float(t.value[0])
    return total / len(trees), base / len(trees)


def tree_shap(model, x) -> ShapAttribution:
    x = _instance(model, x)
    _trees(model)
    phi, base = shap_values(model, x)
    return ShapAttribution(phi[0], base, float(np.atleast_1d(model.predict_proba(x))[0]))


# --------------------------------------------------------------------------- ranking

@dataclass(frozen=True)
class ShapRanking:
    names: tuple[str, ...]  # descending mean |phi|
    magnitudes: tuple[float, ...]

    def rank_of(self, name: str) -> int:
        return self.names.index(name)

    def to_json(self) -> dict:
        return {"features": [{"name": n, "mean_abs_shap": m} for n, m in zip(self.names, self.magnitudes)]}

    @classmethod
    def from_json(cls, d: dict) -> "ShapRanking":
        rows = d["features"]
        return cls(tuple(r["name"] for r in rows), tuple(float(r["mean_abs_shap"]) for r in rows))


def rank_magnitudes(values: np.ndarray, names: Sequence[str]) -> ShapRanking:
    mags = np.mean(np.abs(np.atleast_2d(values)), axis=0)
    order = sorted(range(len(names)), key=lambda i: (-mags[i], i))
    return ShapRanking(tuple(names[i] for i in order), tuple(float(mags[i]) for i in order))


def shap_ranking(model, data, names: Sequence[str] | None = None) -> ShapRanking:
    """Features by mean |SHAP| over the rows of ``data``; ties keep schema order."""
    if isinstance(data, LabeledDataset):
        names = data.feature_names if names is None else names
        X = data.X
    else:
        X = data
    names = tuple(names) if names is not None else FEATURE_NAMES
    values, _ = shap_values(model, X)
    if values.shape[0] == 0:
        raise ExplainError("ranking needs at least one instance")
    if len(names) != values.shape[1]:
        raise ExplainError(f"{len(names)} names for {values.shape[1]} features")
    return rank_magnitudes(values, names)


def write_shap_csv(path: str | Path, ids: Sequence[str], X: np.ndarray, values: np.ndarray,
                   names: Sequence[str]) -> None:
    """Long-format export: one row per (instance, feature) with the Shapley value and the feature value."""
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["id", "feature", "shap", "value"])
        for tid, row, phi in zip(ids, X, values):
            for name, v, s in zip(names, row, phi):
                w.writerow([tid, name, repr(float(s)), repr(float(v))])


# --------------------------------------------------------------------------- ablation

@dataclass
class AblationRow:
    label: str
    kept: tuple[str, ...]
    dropped: tuple[str, ...]
    result: CVResult | None
    note: str = ""

    def to_json(self) -> dict:
        out = {"label": self.label, "kept": list(self.kept), "dropped": list(self.dropped)}
        if self.result is None:
            out["skipped"] = self.note
        else:
            out["metrics"] = self.result.mean
            out["std"] = self.result.std
        return out


def _display(name: str) -> str:
    return DISPLAY_NAMES.get(name, name)


def ablation_run(data: LabeledDataset, ranking: ShapRanking, spec: ModelSpec, folds: int = 5,
                 seed: int = 1) -> list[AblationRow]:
    """Retrain without each ranked feature and everything ranked below it.

    Rows run from the deepest cut (only the top feature kept) to dropping the
    last feature alone, then the all-features row. Cutting at the top feature
    leaves nothing to train on and is reported as skipped.
    """
    if set(ranking.names) != set(data.feature_names) or len(ranking.names) != len(data.feature_names):
        raise ExplainError("ranking does not cover the dataset's features")
    order = ranking.names
    p = len(order)
    rows = []
    for cut in range(p):
        kept, dropped = order[:cut], order[cut:]
        label = f"w/o {_display(order[cut])}" + (" & BF" if cut < p - 1 else "")
        if not kept:
            rows.append(AblationRow(label, kept, dropped, None, "no features left"))
            continue
        keep_schema = tuple(n for n in data.feature_names if n in kept)
        rows.append(AblationRow(label, keep_schema, dropped, cross_validate(data.columns(keep_schema), spec, folds, seed)))
    rows.append(AblationRow("All features", data.feature_names, (), cross_validate(data, spec, folds, seed)))
    return rows


# --------------------------------------------------------------------------- correlation vs ranking

@dataclass(frozen=True)
class PairRecord:
    a: str
    b: str
    abs_correlation: float
    rank_distance: int


@dataclass
class CorrelationRankingReport:
    pairs: list[PairRecord]
    tau_b: float

    def to_json(self) -> dict:
        return {
            "tau_b": None if math.isnan(self.tau_b) else self.tau_b,
            "pairs": [{"a": r.a, "b": r.b,
                       "abs_correlation": None if math.isnan(r.abs_correlation) else r.abs_correlation,
                       "rank_distance": r.rank_distance} for r in self.pairs],
        }


def correlation_vs_ranking(corr: CorrelationMatrix, ranking: ShapRanking) -> CorrelationRankingReport:
    """Every feature pair with |correlation| and SHAP rank distance, most correlated first.

    ``tau_b`` is Kendall's tau-b between |correlation| and -rank_distance over
    pairs with a defined correlation (NaN when degenerate).
    """
    names = tuple(corr.names)
    if set(names) != set(ranking.names) or len(names) != len(ranking.names):
        raise ExplainError("correlation matrix and ranking name different features")
    rank = {n: i for i, n in enumerate(ranking.names)}
    pairs = []
    for i in range(len(names)):
        for j in range(i + 1, len(names)):
            c = float(corr.values[i, j])
            pairs.append(PairRecord(names[i], names[j], abs(c), abs(rank[names[i]] - rank[names[j]])))
    pairs.sort(key=lambda r: (math.isnan(r.abs_correlation), -r.abs_correlation if not math.isnan(r.abs_correlation) else 0.0))
    defined = [r for r in pairs if not math.isnan(r.abs_correlation)]
    tau = float("nan")
    if len(defined) >= 2:
        try:
            tau = kendall_tau_b([r.abs_correlation for r in defined], [-r.rank_distance for r in defined])
        except DegenerateRankingError:
            warnings.warn("tau-b undefined: correlations or rank distances are constant", stacklevel=2)
    return CorrelationRankingReport(pairs, tau)
