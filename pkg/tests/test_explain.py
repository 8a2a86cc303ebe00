import csv
import math

import numpy as np
import pytest

from tweetlens.explain import (
    ExplainError,
    ShapRanking,
    ablation_run,
    correlation_vs_ranking,
    exact_shapley,
    shap_ranking,
    shap_values,
    tree_shap,
    write_shap_csv,
)
from tweetlens.learn import LabeledDataset, ModelSpec, TreeModel, cross_validate, train_forest, train_tree
from tweetlens.stats import CorrelationMatrix, pearson_matrix
from tweetlens.synthetic import planted_signal


def _stump(f, t, left_counts, right_counts, n_features):
    (lp, ln), (rp, rn) = left_counts, right_counts
    return TreeModel(
        feature=np.array([f, -1, -1]), threshold=np.array([t, 0.0, 0.0]),
        left=np.array([1, -1, -1]), right=np.array([2, -1, -1]),
        n_pos=np.array([lp + rp, lp, rp]), n_neg=np.array([ln + rn, ln, rn]),
        n_features=n_features,
    )


def _small(n=300, p=6, seed=0):
    rng = np.random.default_rng(seed)
    X = rng.integers(0, 4, size=(n, p)).astype(float)
    y = ((X[:, 0] + X[:, 1] * X[:, 2] / 3 + rng.normal(0, 1, n)) > 3).astype(np.int64)
    return LabeledDataset(X, y, tuple(f"f{i}" for i in range(p)))


def test_stump_attribution():
    t = _stump(3, 0.5, (1, 4), (5, 0), n_features=5)
    x = np.array([0.0, 0.0, 0.0, 1.0, 0.0])
    a = tree_shap(t, x)
    assert a.base_value == pytest.approx(0.6)
    assert a.prediction == 1.0
    assert a.values == pytest.approx([0.0, 0.0, 0.0, 0.4, 0.0])
    assert np.allclose(exact_shapley(t, x).values, a.values, atol=1e-15)


def test_single_leaf_has_zero_attribution():
    t = train_tree((np.zeros((4, 3)), np.array([1, 0, 1, 1])))
    a = tree_shap(t, np.ones(3))
    assert np.all(a.values == 0.0)
    assert a.base_value == a.prediction == 0.75


def test_symmetric_features_share_credit():
    grid = np.array([[a, b] for a in (0.0, 1.0) for b in (0.0, 1.0)] * 5)
    y = (grid[:, 0] * grid[:, 1]).astype(np.int64)
    t = train_tree((grid, y))
    a = tree_shap(t, np.array([1.0, 1.0]))
    assert a.values[0] == pytest.approx(a.values[1], abs=1e-12)
    assert a.values.sum() == pytest.approx(0.75)


def test_unused_feature_is_null():
    d = _small()
    X = d.X.copy()
    X[:, 5] = 0.0
    t = train_tree((X, d.y))
    assert not np.any(t.feature == 5)
    values, _ = shap_values(t, d.X[:30])
    assert np.all(values[:, 5] == 0.0)


def test_efficiency_on_full_schema_forest():
    d = planted_signal(300, seed=2)
    f = train_forest(d, n_trees=20, master_seed=3)
    values, base = shap_values(f, d.X)
    gap = np.max(np.abs(values.sum(axis=1) + base - f.predict_proba(d.X)))
    assert gap <= 1e-12
    assert tree_shap(f, d.X[0]).efficiency_gap <= 1e-12


@pytest.mark.parametrize("variant", ["random_forest", "extra_trees", "bagging"])
def test_tree_shap_matches_exact_enumeration(variant):
    d = _small(seed=1)
    f = train_forest(d, variant, n_trees=5, master_seed=4, max_depth=6)
    for x in d.X[:10]:
        assert np.allclose(tree_shap(f, x).values, exact_shapley(f, x).values, atol=1e-12, rtol=0)


def test_forest_shap_is_mean_of_tree_shap():
    d = _small(seed=2)
    f = train_forest(d, n_trees=7, master_seed=5)
    values, base = shap_values(f, d.X[:20])
    per_tree = [shap_values(t, d.X[:20]) for t in f.trees]
    assert np.max(np.abs(values - np.mean([v for v, _ in per_tree], axis=0))) <= 1e-12
    assert base == pytest.approx(np.mean([b for _, b in per_tree]), abs=1e-12)


def test_exact_enumeration_limit():
    d = planted_signal(100, seed=0, names=tuple(f"g{i}" for i in range(21)))
    t = train_tree(d, max_depth=2)
    with pytest.raises(ExplainError):
        exact_shapley(t, d.X[0])


def test_ranking_puts_planted_feature_first():
    d = planted_signal(600, informative=(0,), shift=2.0, seed=3)
    f = train_forest(d, n_trees=30, master_seed=1)
    r = shap_ranking(f, d)
    assert r.names[0] == "stop_words"
    assert list(r.magnitudes) == sorted(r.magnitudes, reverse=True)
    assert ShapRanking.from_json(r.to_json()) == r


def test_ranking_ties_keep_schema_order():
    t = _stump(2, 0.5, (0, 2), (2, 0), n_features=4)
    r = shap_ranking(t, np.array([[0, 0, 1.0, 0]]), ["a", "b", "c", "d"])
    assert r.names == ("c", "a", "b", "d")
    assert r.rank_of("a") == 1


def test_shap_csv_long_format(tmp_path):
    t = _stump(0, 0.5, (1, 1), (2, 0), n_features=2)
    X = np.array([[0.0, 3.0], [1.0, 4.0]])
    values, _ = shap_values(t, X)
    path = tmp_path / "shap.csv"
    write_shap_csv(path, ["x", "y"], X, values, ["a", "b"])
    rows = list(csv.reader(path.open()))
    assert rows[0] == ["id", "feature", "shap", "value"]
    assert len(rows) == 1 + 4
    assert rows[4][:2] == ["y", "b"] and float(rows[4][3]) == 4.0


# ---------------------------------------------------------------- ablation

def test_ablation_boundaries_and_identity():
    d = _small(n=120, p=4, seed=4)
    spec = ModelSpec("rf", n_trees=5)
    ranking = ShapRanking(("f2", "f0", "f3", "f1"), (0.4, 0.3, 0.2, 0.1))
    rows = ablation_run(d, ranking, spec, folds=3, seed=7)
    assert [r.label for r in rows] == ["w/o f2 & BF", "w/o f0 & BF", "w/o f3 & BF", "w/o f1", "All features"]
    assert rows[0].result is None and rows[0].note == "no features left"
    assert rows[1].kept == ("f2",)
    assert rows[2].kept == ("f0", "f2")
    assert rows[3].dropped == ("f1",)
    for r in rows[:-1]:
        assert set(r.kept) | set(r.dropped) == set(d.feature_names)
        assert not set(r.kept) & set(r.dropped)
    direct = cross_validate(d, spec, folds=3, seed=7)
    assert rows[-1].result.mean == direct.mean
    assert rows[-1].to_json()["metrics"] == direct.mean
    assert rows[0].to_json()["skipped"] == "no features left"


def test_ablation_rejects_foreign_ranking():
    d = _small(n=60, p=3)
    with pytest.raises(ExplainError):
        ablation_run(d, ShapRanking(("f0", "f1", "zz"), (3, 2, 1)), ModelSpec("dt"))


# ---------------------------------------------------------------- correlation vs ranking

def test_two_features_single_pair():
    corr = pearson_matrix(np.array([[1.0, 2.0], [2.0, 1.0], [3.0, 3.5]]), ["a", "b"])
    rep = correlation_vs_ranking(corr, ShapRanking(("b", "a"), (2.0, 1.0)))
    assert len(rep.pairs) == 1
    assert rep.pairs[0].rank_distance == 1
    assert math.isnan(rep.tau_b)
    assert rep.to_json()["tau_b"] is None


def test_duplicated_column_comes_first():
    rng = np.random.default_rng(0)
    X = rng.normal(size=(50, 3))
    X[:, 2] = X[:, 0]
    corr = pearson_matrix(X, ["a", "b", "c"])
    rep = correlation_vs_ranking(corr, ShapRanking(("a", "b", "c"), (3, 2, 1)))
    assert (rep.pairs[0].a, rep.pairs[0].b) == ("a", "c")
    assert rep.pairs[0].abs_correlation == pytest.approx(1.0)
    assert rep.pairs[0].rank_distance == 2


def test_five_feature_hand_fixture():
    names = ("a", "b", "c", "d", "e")
    vals = np.eye(5)
    for i in range(5):
        for j in range(5):
            if i != j:
                vals[i, j] = (-1) ** (i + j) / (1 + abs(i - j))
    corr = CorrelationMatrix(names, vals)
    rep = correlation_vs_ranking(corr, ShapRanking(names, (5, 4, 3, 2, 1)))
    assert len(rep.pairs) == 10
    # |r| falls strictly with rank distance, so the two orders agree up to shared ties
    assert rep.tau_b == pytest.approx(1.0)
    assert [p.rank_distance for p in rep.pairs] == [1, 1, 1, 1, 2, 2, 2, 3, 3, 4]
    reversed_rank = correlation_vs_ranking(corr, ShapRanking(("a", "c", "e", "b", "d"), (5, 4, 3, 2, 1)))
    assert reversed_rank.tau_b < 1.0


def test_correlation_names_must_match_ranking():
    corr = CorrelationMatrix(("a", "b"), np.eye(2))
    with pytest.raises(ExplainError):
        correlation_vs_ranking(corr, ShapRanking(("a", "z"), (1, 0)))
