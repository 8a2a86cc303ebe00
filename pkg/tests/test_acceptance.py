"""Acceptance criteria. Each test records one PASS/FAIL line, shown in the pytest summary."""

import os
import time
from pathlib import Path

import numpy as np
import pytest

from conftest import run_pipeline
from test_learn import _check_every_node
from test_stats import WORKED, _ks_brute, _tau_b_brute
from test_topics import _purity
from tweetlens.corpus import load_corpus
from tweetlens.explain import ablation_run, exact_shapley, shap_ranking, shap_values
from tweetlens.learn import MODEL_SUITE, LabeledDataset, cross_validate, train_forest, train_tree
from tweetlens.pipeline import extract, to_dataset
from tweetlens.stats import fleiss_kappa, kendall_tau_b, kolmogorov_q, ks_two_sample
from tweetlens.synthetic import planted_signal, two_topic_corpus
from tweetlens.topics import lda_fit, select_k

INFORMATIVE = ("stop_words", "pronouns", "nouns")


def _random_model(rng):
    p = int(rng.integers(2, 13))
    n = int(rng.integers(30, 200))
    X = np.where(rng.random((n, p)) < 0.5, rng.integers(0, 4, (n, p)), rng.normal(size=(n, p)))
    w = rng.normal(size=p)
    y = (X @ w + rng.normal(0, 1, n) > 0).astype(np.int64)
    depth = int(rng.integers(1, 7))
    kind = rng.choice(["tree", "random_forest", "extra_trees", "bagging"])
    if kind == "tree":
        model = train_tree((X, y), max_depth=depth)
    else:
        model = train_forest((X, y), str(kind), n_trees=int(rng.integers(1, 5)),
                             master_seed=int(rng.integers(1 << 30)), max_depth=depth)
    queries = np.vstack([X[rng.choice(n, 5, replace=False)], rng.normal(size=(5, p)) * 2])
    return model, queries


def test_criterion_1_shap_oracle(criterion):
    rng = np.random.default_rng(2024)
    start = time.perf_counter()
    worst_diff = worst_gap = 0.0
    n_models = n_attr = 0
    for _ in range(200):
        model, Q = _random_model(rng)
        values, base = shap_values(model, Q)
        pred = np.atleast_1d(model.predict_proba(Q))
        for row, x in enumerate(Q):
            oracle = exact_shapley(model, x)
            worst_diff = max(worst_diff, float(np.max(np.abs(values[row] - oracle.values))))
            worst_gap = max(worst_gap, abs(values[row].sum() + base - pred[row]), oracle.efficiency_gap)
            n_attr += 1
        n_models += 1
    seconds = time.perf_counter() - start
    ok = worst_diff <= 1e-9 and worst_gap <= 1e-9 and seconds < 120
    criterion(1, ok, f"{n_models} models, {n_attr} attributions, max |diff| {worst_diff:.2e}, "
                     f"max efficiency gap {worst_gap:.2e}, {seconds:.1f}s (limit 120s)")
    assert ok


def test_criterion_2_statistical_kernels(criterion):
    rng = np.random.default_rng(7)
    ks_exact = 0
    for _ in range(100):
        x = rng.integers(0, 10, int(rng.integers(1, 40))).tolist()
        y = rng.integers(0, 10, int(rng.integers(1, 40))).tolist()
        ks_exact += ks_two_sample(x, y).d == _ks_brute(x, y)
    tau_exact = tau_trials = 0
    while tau_trials < 100:
        n = int(rng.integers(2, 40))
        x = rng.integers(0, 5, n).tolist()
        y = rng.integers(0, 5, n).tolist()
        if len(set(x)) < 2 or len(set(y)) < 2:
            continue
        tau_trials += 1
        tau_exact += kendall_tau_b(x, y) == _tau_b_brute(x, y)
    q = kolmogorov_q(1.36)
    kappa = fleiss_kappa(WORKED).kappa
    ok = ks_exact == 100 and tau_exact == 100 and 0.048 <= q <= 0.051 and abs(kappa - 0.210) <= 1e-3
    criterion(2, ok, f"KS exact {ks_exact}/100, tau-b exact {tau_exact}/100, Q(1.36)={q:.5f}, "
                     f"Fleiss kappa={kappa:.4f} (want 0.210 +/- 1e-3)")
    assert ok


def test_criterion_3_classifier_sanity(criterion):
    start = time.perf_counter()
    data = planted_signal(1000, informative=(0, 1, 2), seed=0)
    cv = cross_validate(data, MODEL_SUITE["RF"], folds=5, seed=1)
    acc, auc = cv.mean["ACC"], cv.mean["AUC"]
    checked = 0
    rng = np.random.default_rng(3)
    for i in range(10):
        n = int(rng.integers(20, 201))
        p = int(rng.integers(1, 7))
        X = rng.integers(0, 6, (n, p)).astype(float) if i % 2 else rng.normal(size=(n, p)).round(1)
        y = (X.sum(axis=1) + rng.normal(0, 1.5, n) > X.sum(axis=1).mean()).astype(np.int64)
        tree = train_tree((X, y))
        _check_every_node(tree, X, y)
        checked += tree.n_nodes
    seconds = time.perf_counter() - start
    ok = acc >= 0.95 and auc >= 0.97 and seconds < 60
    criterion(3, ok, f"RF 5-fold ACC {acc:.4f} (>= 0.95), AUC {auc:.4f} (>= 0.97), "
                     f"Gini-optimal at all {checked} nodes of 10 trees, {seconds:.1f}s (limit 60s)")
    assert ok


def test_criterion_4_ablation(criterion):
    data = planted_signal(1000, informative=(0, 1, 2), seed=0)
    spec = MODEL_SUITE["RF"]
    ranking = shap_ranking(spec.fit(data.X, data.y, seed=1), data)
    rows = ablation_run(data, ranking, spec, folds=5, seed=1)
    full = rows[-1].result.mean["ACC"]
    noise = tuple(n for n in data.feature_names if n not in INFORMATIVE)
    without_signal = cross_validate(data.columns(noise), spec, folds=5, seed=1).mean["ACC"]
    drop = full - without_signal
    suffix_changes = [abs(r.result.mean["ACC"] - full) for r in rows[:-1]
                      if r.result is not None and set(r.dropped) <= set(noise)]
    worst = max(suffix_changes)
    top3 = set(ranking.names[:3]) == set(INFORMATIVE)
    ok = top3 and drop > 0.05 and worst < 0.02
    criterion(4, ok, f"top-3 SHAP = informative: {top3}; dropping informative features costs {drop:.4f} ACC "
                     f"(> 0.05); worst change over {len(suffix_changes)} noise-only suffixes {worst:.4f} (< 0.02)")
    assert ok


def test_criterion_5_lda_recovery(criterion):
    start = time.perf_counter()
    docs, truth = two_topic_corpus(n_docs=100, seed=0)
    model = lda_fit(docs, 2, seed=0, check_invariants=True)
    purity = _purity(model, truth)
    best = select_k(docs, [2, 5, 10], seed=0)
    seconds = time.perf_counter() - start
    ok = purity >= 0.9 and best == 2 and seconds < 60
    criterion(5, ok, f"purity {purity:.3f} (>= 0.9), select_k -> {best} (want 2), "
                     f"count invariants checked after all {model.iterations} sweeps, {seconds:.1f}s (limit 60s)")
    assert ok


def test_criterion_6_feature_fixtures(criterion):
    import test_affect
    import test_features
    import test_syntax

    checks = [
        test_features.test_ten_tweet_fixture_matrix,
        test_features.test_fixture_sentiment_categories,
        test_affect.test_threshold_boundaries_exact,
        test_affect.test_compound_of_exactly_threshold_via_lexicon,
        test_affect.test_emotion_tie_break_order,
        test_syntax.test_profile_repeated_determiner,
        test_syntax.test_profile_distinct_words,
        test_syntax.test_profile_punctuation_excluded_from_word_stats,
    ]
    failed = []
    for check in checks:
        try:
            check()
        except AssertionError:
            failed.append(check.__name__)
    ok = not failed
    criterion(6, ok, f"{len(checks) - len(failed)}/{len(checks)} bit-exact fixtures "
                     "(10-tweet matrix, compound 0.05 boundary, emotion tie-break, TTR)"
              + (f"; failed: {', '.join(failed)}" if failed else ""))
    assert ok


def test_criterion_7_determinism(criterion, pipeline_run, fixture_path, tmp_path):
    first, _ = pipeline_run
    second = tmp_path / "out"
    seconds = run_pipeline(second, fixture_path)
    names = sorted(p.name for p in first.iterdir())
    differing = [n for n in names if not (second / n).is_file() or (first / n).read_bytes() != (second / n).read_bytes()]
    extra = sorted(set(p.name for p in second.iterdir()) - set(names))
    ok = not differing and not extra and seconds < 60
    criterion(7, ok, f"{len(names) - len(differing)}/{len(names)} artifacts byte-identical across runs, "
                     f"pipeline {seconds:.1f}s (limit 60s)" + (f"; differing: {differing + extra}" if differing or extra else ""))
    assert ok


def test_criterion_8_external_dataset(criterion):
    path = os.environ.get("TWEETLENS_EXTERNAL_DATA")
    if not path or not Path(path).is_file():
        criterion(8, "SKIP", "set TWEETLENS_EXTERNAL_DATA to a labeled tweet file to run the published-corpus check")
        pytest.skip("external dataset not provided")
    corpus = load_corpus(path)
    feats, _ = extract(corpus)
    data: LabeledDataset = to_dataset(corpus, feats)
    acc = cross_validate(data, MODEL_SUITE["RF"], folds=5, seed=1).mean["ACC"]
    within = abs(acc - 0.90) <= 0.05
    # a gap beyond the tolerance is reported, not failed: lexicons and tagger differ from the reference tooling
    criterion(8, "PASS" if within else "REPORT",
              f"RF 5-fold ACC {acc:.4f} on {len(data)} tweets vs reference 0.90 (tolerance 0.05)")
