"""Command-line driver: ingest, analyze, topics, train, explain, ablate, report."""

from __future__ import annotations

import argparse
import dataclasses
import hashlib
import logging
import sys
import warnings
import zlib
from collections import Counter
from pathlib import Path

import numpy as np

from . import __version__
from .affect import EMOTION_COLUMNS, Sentiment
from .corpus import CLASSES, Corpus, CorpusError, Label, balance_classes, load_corpus, write_corpus
from .explain import (
    ExplainError, ShapRanking, ablation_run, correlation_vs_ranking, rank_magnitudes, shap_values,
    write_shap_csv,
)
from .learn import (
    DISPLAY_NAMES, FEATURE_NAMES, LearnError, METRIC_KEYS, MODEL_SUITE, ModelSpec, cross_validate,
    evaluate, model_from_json, model_to_json, read_feature_csv, stratified_split, write_feature_csv,
)
from .lexicons import LexiconError, load_lexicons
from .pipeline import extract, to_dataset
from .plotting import grouped_bars
from .reports import ArtifactError, read_json, text_table, write_json, write_text
from .stats import (
    StatsError, hashtag_report, ks_two_sample, pearson_matrix, top_word_agreement, top_words,
    vaccine_mention_distribution, visibility_summary,
)
from .topics import TopicFilter, TopicModelError, conditional_topics, select_k, top_words_per_topic

log = logging.getLogger("tweetlens")

EXIT_OK, EXIT_INPUT, EXIT_PRECONDITION, EXIT_INTERNAL = 0, 2, 3, 4

# attribute -> display name, in the order of the per-class KS table
KS_ROWS = (
    ("nouns", "Nouns"), ("pronouns", "Pronouns"), ("ttr", "TTR"), ("stop_words", "Stop words"),
    ("verbs", "Verbs"), ("conjunctions", "Conjunctions"), ("adverbs", "Adverbs"),
    ("determiners", "Determiners"), ("adjectives", "Adjectives"), ("wh_words", "WH-words"),
)
TREE_KINDS = ("rf", "xts", "dt", "xt", "bg")


class PreconditionError(RuntimeError):
    pass


class InvariantError(RuntimeError):
    pass


def stage_seed(master: int, stage: str) -> int:
    """Seed for one pipeline stage: first word of SeedSequence([master, crc32(stage)])."""
    return int(np.random.SeedSequence([int(master), zlib.crc32(stage.encode())]).generate_state(1)[0])


# --------------------------------------------------------------------------- helpers

def _out(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _lexicons(args):
    return load_lexicons(args.lexicon_dir)


def _stage_corpus(out: Path) -> Corpus:
    path = out / "corpus.jsonl"
    if not path.is_file():
        raise ArtifactError(f"corpus.jsonl not found in {out}; run `tweetlens ingest` first")
    return load_corpus(path, "jsonl")


def _stage_features(out: Path):
    path = out / "features.csv"
    if not path.is_file():
        raise ArtifactError(f"features.csv not found in {out}; run `tweetlens analyze` first")
    return read_feature_csv(path)


def _pct(counter: Counter, keys, total: int) -> list[float]:
    return [100.0 * counter.get(k, 0) / total if total else 0.0 for k in keys]


def _label_key(lab: Label) -> str:
    return lab.value


# --------------------------------------------------------------------------- ingest

def cmd_ingest(args) -> int:
    out = _out(args)
    corpus = load_corpus(args.input, args.format)
    if args.balance:
        corpus = balance_classes(corpus, stage_seed(args.seed, "balance"))
    write_corpus(corpus, out / "corpus.jsonl")
    _, skipped = extract(corpus, _lexicons(args))
    counts = corpus.class_counts
    n_m, n_nm = counts[Label.MISLEADING], counts[Label.NON_MISLEADING]
    summary = {
        "input": Path(args.input).name,
        "n_records": len(corpus),
        "class_counts": {lab.value: counts[lab] for lab in Label},
        "class_ratio": n_m / n_nm if n_nm else None,
        "balanced": bool(args.balance),
        "skipped": [{"id": i, "reason": r} for i, r in skipped],
    }
    write_json(out / "ingest_summary.json", "ingest_summary", summary)
    rows = [[lab.value, counts[lab]] for lab in Label]
    body = text_table(["label", "records"], rows)
    if skipped:
        body += "\n\nskipped:\n" + "\n".join(f"  {i}: {r}" for i, r in skipped)
    write_text(out / "ingest_summary.txt", [("Ingest", body)])
    print(f"ingested {len(corpus)} records ({', '.join(f'{lab.value} {counts[lab]}' for lab in Label)})")
    return EXIT_OK


# --------------------------------------------------------------------------- analyze

def cmd_analyze(args) -> int:
    out = _out(args)
    corpus = _stage_corpus(out)
    lex = _lexicons(args)
    feats, skipped = extract(corpus, lex)
    by_class = {lab: [f for f in feats if f.label is lab] for lab in CLASSES}
    for lab, rows in by_class.items():
        if not rows:
            raise PreconditionError(f"class {lab.value} has no usable tweets")
    data = to_dataset(corpus, feats)
    write_feature_csv(data, out / "features.csv")

    m, nm = CLASSES
    ks = []
    for attr, name in KS_ROWS:
        res = ks_two_sample([getattr(f.profile, attr) for f in by_class[m]],
                            [getattr(f.profile, attr) for f in by_class[nm]])
        ks.append({"attribute": name, "column": attr, "d": res.d, "p_value": res.p_value,
                   "n_misleading": res.n1, "n_non_misleading": res.n2})

    sent_keys = [s for s in Sentiment]
    emo_keys = [e.value for e in EMOTION_COLUMNS] + ["none"]
    sentiment, emotions, emotion_means = {}, {}, {}
    for lab, rows in by_class.items():
        n = len(rows)
        sc = Counter(f.sentiment for f in rows)
        sentiment[lab.value] = {
            "percent": dict(zip([s.value for s in sent_keys], _pct(sc, sent_keys, n))),
            "mean_compound": float(np.mean([f.sentiment_score.compound for f in rows])),
        }
        ec = Counter(f.emotion.value if f.emotion else "none" for f in rows)
        emotions[lab.value] = dict(zip(emo_keys, _pct(ec, emo_keys, n)))
        emotion_means[lab.value] = {e.value: float(np.mean([f.emotion_scores.scores[e] for f in rows]))
                                    for e in EMOTION_COLUMNS}

    words = {lab.value: [{"word": w, "count": c} for w, c in top_words(corpus, lab, args.top_words, lex.stopwords)]
             for lab in CLASSES}
    agreement = top_word_agreement(corpus, args.agreement_k, lex.stopwords)
    try:
        visibility = {lab.value: v for lab, v in visibility_summary(corpus).items()}
    except StatsError as exc:
        visibility = None
        log.warning("visibility summary unavailable: %s", exc)
    vaccines = {lab.value: v for lab, v in vaccine_mention_distribution(corpus, lex.vaccines).items()}
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        corr = pearson_matrix(data.X, data.feature_names)

    report = {
        "n_features_rows": len(data),
        "class_sizes": {lab.value: len(rows) for lab, rows in by_class.items()},
        "skipped": [{"id": i, "reason": r} for i, r in skipped + data.skipped],
        "ks_table": ks,
        "sentiment": sentiment,
        "dominant_emotion_percent": emotions,
        "mean_emotion_scores": emotion_means,
        "top_words": words,
        "top_word_agreement": {"k": args.agreement_k, "tau_b": agreement.tau, "union_size": len(agreement.union),
                               "shared": list(agreement.shared)},
        "hashtags": hashtag_report(corpus).to_json(),
        "visibility": visibility,
        "vaccine_mentions_percent": vaccines,
        "correlation": corr.to_json(),
    }
    write_json(out / "analysis.json", "analysis", report)

    sections = [
        ("Kolmogorov-Smirnov (misleading vs non-misleading)",
         text_table(["attribute", "D", "p-value"], [[r["attribute"], r["d"], r["p_value"]] for r in ks])),
        ("Sentiment (% of class)",
         text_table(["class", *[s.value for s in sent_keys], "mean compound"],
                    [[k, *v["percent"].values(), v["mean_compound"]] for k, v in sentiment.items()], 2)),
        ("Dominant emotion (% of class)",
         text_table(["class", *emo_keys], [[k, *v.values()] for k, v in emotions.items()], 2)),
        ("Top words", "\n".join(f"{k}: " + ", ".join(f"{r['word']}({r['count']})" for r in v)
                                for k, v in words.items())),
        ("Top-word agreement", f"Kendall tau-b over the union of top-{args.agreement_k} words "
                               f"({len(agreement.union)} words): {agreement.tau}"),
        ("Vaccine names per tweet (% of class)",
         text_table(["class", "0", "1", "2", "3", "4", "5+"], [[k, *v] for k, v in vaccines.items()], 2)),
    ]
    if visibility:
        rows = []
        for k, fields in visibility.items():
            for name, s in fields.items():
                rows.append([k, name, s["median"] if s else None, s["mean"] if s else None, s["n"] if s else 0])
        sections.append(("Visibility", text_table(["class", "field", "median", "mean", "n"], rows, 2)))
    write_text(out / "analysis.txt", sections)

    classes = [lab.value for lab in CLASSES]
    grouped_bars(out / "sentiment.svg", [s.value for s in sent_keys],
                 {c: list(sentiment[c]["percent"].values()) for c in classes}, "Sentiment by class", "% of tweets")
    grouped_bars(out / "emotions.svg", emo_keys, {c: list(emotions[c].values()) for c in classes},
                 "Dominant emotion by class", "% of tweets")
    grouped_bars(out / "emotion_scores.svg", [e.value for e in EMOTION_COLUMNS],
                 {c: list(emotion_means[c].values()) for c in classes}, "Mean emotion scores", "score")
    grouped_bars(out / "vaccines.svg", ["0", "1", "2", "3", "4", "5+"], {c: vaccines[c] for c in classes},
                 "Vaccine names per tweet", "% of tweets")
    if visibility:
        fields = list(visibility[classes[0]])
        grouped_bars(out / "visibility.svg", fields,
                     {c: [(visibility[c][f] or {}).get("median", 0) for f in fields] for c in classes},
                     "Median engagement", "count")
    print(f"analyzed {len(data)} labeled tweets; features.csv and analysis.json written to {out}")
    return EXIT_OK


# --------------------------------------------------------------------------- topics

def _dominant_topic(theta_row: np.ndarray) -> int:
    return int(np.argmax(theta_row))


def cmd_topics(args) -> int:
    out = _out(args)
    corpus = _stage_corpus(out)
    feats, _ = extract(corpus, _lexicons(args))
    labeled = [f for f in feats if f.label in CLASSES]
    if not labeled:
        raise PreconditionError("no labeled tweets to model")
    seed = stage_seed(args.seed, "topics")
    fit_kw = dict(iterations=args.iterations, seed=seed, min_count=args.min_count)

    if args.k is not None:
        k, scores = args.k, None
    else:
        grid = [int(v) for v in args.k_grid.split(",")]
        k, scores = select_k([f.topic_tokens for f in labeled], grid, seed=seed, min_count=args.min_count,
                             iterations=min(args.iterations, 300), return_scores=True)

    filters = []
    for lab in CLASSES:
        filters.append(TopicFilter(label=lab))
        filters.extend(TopicFilter(label=lab, sentiment=s) for s in Sentiment)
        filters.extend(TopicFilter(label=lab, emotion=e) for e in EMOTION_COLUMNS)

    groups, text = [], []
    for filt in filters:
        desc = filt.describe()
        try:
            ct = conditional_topics(labeled, filt, k, **fit_kw)
        except TopicModelError as exc:
            groups.append({"filter": desc, "skipped": str(exc)})
            continue
        tops = top_words_per_topic(ct.model, min(args.top_n, len(ct.model.vocabulary)))
        entry = {"filter": desc, "n_docs": ct.n_docs, "k": k,
                 "topics": [[{"word": w, "prob": p} for w, p in t] for t in tops]}
        if filt.sentiment is None and filt.emotion is None:
            chosen = [f for f in labeled if filt.matches(f.label, f.sentiment, f.emotion)]
            sent_tab = np.zeros((k, len(Sentiment)), dtype=int)
            emo_tab = np.zeros((k, len(EMOTION_COLUMNS) + 1), dtype=int)
            for row, pos in enumerate(ct.model.doc_index):
                f = chosen[pos]
                t = _dominant_topic(ct.model.theta[row])
                sent_tab[t, list(Sentiment).index(f.sentiment)] += 1
                e = EMOTION_COLUMNS.index(f.emotion) if f.emotion else len(EMOTION_COLUMNS)
                emo_tab[t, e] += 1
            entry["topic_by_sentiment"] = {"columns": [s.value for s in Sentiment], "counts": sent_tab.tolist()}
            entry["topic_by_emotion"] = {"columns": [e.value for e in EMOTION_COLUMNS] + ["none"],
                                         "counts": emo_tab.tolist()}
        groups.append(entry)
        lines = [f"T{i + 1}: " + " ".join(w for w, _ in t) for i, t in enumerate(tops)]
        text.append((f"{desc} ({ct.n_docs} tweets)", "\n".join(lines)))

    report = {"k": k, "selection_scores": scores, "iterations": args.iterations, "seed": seed, "groups": groups}
    write_json(out / "topics.json", "topics", report)
    header = f"k = {k}" + (" (chosen by held-out likelihood: " + ", ".join(
        f"{kk}: {v:.4f}" for kk, v in scores.items()) + ")" if scores else "")
    skipped = [g for g in groups if "skipped" in g]
    if skipped:
        header += "\nskipped: " + "; ".join(f"{g['filter']} ({g['skipped']})" for g in skipped)
    write_text(out / "topics.txt", [("Topics", header), *text])
    print(f"topics: k={k}, {len(groups) - len(skipped)} groups fitted, {len(skipped)} skipped")
    return EXIT_OK


# --------------------------------------------------------------------------- train

def _spec_for(name: str, args) -> ModelSpec:
    spec = MODEL_SUITE[name]
    changes = {"threads": args.threads}
    if spec.kind in ("rf", "xts", "bg"):
        changes["n_trees"] = args.n_trees
    return dataclasses.replace(spec, **changes)


def cmd_train(args) -> int:
    out = _out(args)
    data = _stage_features(out)
    if data.feature_names != FEATURE_NAMES:
        log.warning("features.csv columns differ from the standard schema")
    names = [n.strip().upper() for n in args.models.split(",")]
    unknown = [n for n in names if n not in MODEL_SUITE]
    if unknown:
        raise PreconditionError(f"unknown model(s) {unknown}; choose from {list(MODEL_SUITE)}")
    primary = args.model.upper()
    if primary not in MODEL_SUITE or MODEL_SUITE[primary].kind not in TREE_KINDS:
        raise PreconditionError(f"--model must be a tree model, one of "
                                f"{[k for k, s in MODEL_SUITE.items() if s.kind in TREE_KINDS]}")
    if primary not in names:
        names.append(primary)

    split_seed = stage_seed(args.seed, "split")
    cv_seed = stage_seed(args.seed, "cv")
    fit_seed = stage_seed(args.seed, "fit")
    tr, te = stratified_split(data.y, args.test_fraction, split_seed)
    train, test = data.rows(tr), data.rows(te)

    results, saved = [], None
    for name in names:
        spec = _spec_for(name, args)
        cv = cross_validate(train, spec, args.folds, cv_seed)
        model = spec.fit(train.X, train.y, fit_seed)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            held = evaluate(test.y, np.atleast_1d(model.predict_proba(test.X)))
        results.append({"model": name, "cv": cv.to_json(), "test": held.as_dict()})
        if name == primary:
            saved = (spec, model)

    spec, model = saved
    write_json(out / "model.json", "model", {
        "name": primary,
        "spec": dataclasses.asdict(spec),
        "feature_names": list(data.feature_names),
        "train_ids": list(train.ids),
        "seeds": {"split": split_seed, "cv": cv_seed, "fit": fit_seed},
        "folds": args.folds,
        "model": model_to_json(model),
    })
    write_json(out / "metrics.json", "metrics", {
        "folds": args.folds, "test_fraction": args.test_fraction, "n_train": len(train), "n_test": len(test),
        "primary": primary, "results": results,
    })
    cv_rows = [[r["model"], *[r["cv"]["mean"][k] for k in METRIC_KEYS]] for r in results]
    test_rows = [[r["model"], *[r["test"][k] for k in METRIC_KEYS]] for r in results]
    write_text(out / "metrics.txt", [
        (f"{args.folds}-fold cross-validation on the training split (mean)", text_table(["model", *METRIC_KEYS], cv_rows, 2)),
        ("Held-out test split", text_table(["model", *METRIC_KEYS], test_rows, 2)),
    ])
    grouped_bars(out / "metrics.svg", list(METRIC_KEYS),
                 {r["model"]: [r["cv"]["mean"][k] or 0.0 for k in METRIC_KEYS] for r in results},
                 "Cross-validated metrics", "score")
    best = max(results, key=lambda r: r["cv"]["mean"]["ACC"])
    print(f"trained {len(results)} models; best CV accuracy {best['cv']['mean']['ACC']:.3f} ({best['model']}); "
          f"{primary} saved to model.json")
    return EXIT_OK


# --------------------------------------------------------------------------- explain / ablate

def _load_model(out: Path):
    path = out / "model.json"
    if not path.is_file():
        raise ArtifactError(f"model not found: {path}; run `tweetlens train` first")
    doc = read_json(path, "model")
    return doc, model_from_json(doc["model"])


def cmd_explain(args) -> int:
    out = _out(args)
    doc, model = _load_model(out)
    data = _stage_features(out)
    if list(data.feature_names) != doc["feature_names"]:
        raise PreconditionError("features.csv columns do not match the trained model")
    values, base = shap_values(model, data.X)
    pred = np.atleast_1d(model.predict_proba(data.X))
    gap = float(np.max(np.abs(base + values.sum(axis=1) - pred)))
    if gap > 1e-9:
        raise InvariantError(f"Shapley efficiency violated by {gap:.3e}")
    ranking = rank_magnitudes(values, data.feature_names)
    write_shap_csv(out / "shap_values.csv", data.ids, data.X, values, data.feature_names)
    write_json(out / "shap_ranking.json", "shap_ranking",
               {"base_value": base, "n_instances": len(data), "max_efficiency_gap": gap, **ranking.to_json()})
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        corr = pearson_matrix(data.X, data.feature_names)
        cvr = correlation_vs_ranking(corr, ranking)
    write_json(out / "correlation_ranking.json", "correlation_ranking", cvr.to_json())
    write_text(out / "explain.txt", [
        ("SHAP ranking (mean |value|)",
         text_table(["rank", "feature", "mean |SHAP|"],
                    [[i + 1, DISPLAY_NAMES.get(n, n), m] for i, (n, m) in enumerate(zip(ranking.names, ranking.magnitudes))],
                    5)),
        ("Most correlated feature pairs",
         f"Kendall tau-b(|corr|, -rank distance) = {cvr.tau_b}\n" + text_table(
             ["feature a", "feature b", "|corr|", "rank distance"],
             [[p.a, p.b, p.abs_correlation, p.rank_distance] for p in cvr.pairs[: args.pairs]])),
    ])
    grouped_bars(out / "shap_ranking.svg", [DISPLAY_NAMES.get(n, n) for n in ranking.names],
                 {"mean |SHAP|": list(ranking.magnitudes)}, "Feature importance", "mean |SHAP value|",
                 horizontal=True)
    print(f"explained {len(data)} instances; top feature: {ranking.names[0]}")
    return EXIT_OK


def cmd_ablate(args) -> int:
    out = _out(args)
    doc, _ = _load_model(out)
    rank_doc = read_json(out / "shap_ranking.json", "shap_ranking", hint="run `tweetlens explain` first")
    ranking = ShapRanking.from_json(rank_doc)
    data = _stage_features(out)
    wanted = set(doc["train_ids"])
    train = data.rows([i for i, tid in enumerate(data.ids) if tid in wanted])
    spec_fields = dict(doc["spec"])
    spec_fields["threads"] = args.threads
    spec = ModelSpec(**spec_fields)
    rows = ablation_run(train, ranking, spec, doc["folds"], doc["seeds"]["cv"])
    write_json(out / "ablation.json", "ablation", {"model": doc["name"], "rows": [r.to_json() for r in rows]})
    table = [[r.label, *([r.result.mean[k] for k in METRIC_KEYS] if r.result else [None] * 5)] for r in rows]
    notes = [f"{r.label}: skipped ({r.note})" for r in rows if r.result is None]
    write_text(out / "ablation.txt", [("Ablation", text_table(["features", *METRIC_KEYS], table, 2)
                                       + ("\n" + "\n".join(notes) if notes else ""))])
    done = [r for r in rows if r.result]
    grouped_bars(out / "ablation.svg", [r.label for r in done], {"ACC": [r.result.mean["ACC"] for r in done]},
                 "Ablation accuracy", "mean CV accuracy", horizontal=True)
    print(f"ablation: {len(done)} feature sets evaluated")
    return EXIT_OK


# --------------------------------------------------------------------------- report

STAGES = (
    ("ingest_summary", "ingest_summary.txt"), ("analysis", "analysis.txt"), ("topics", "topics.txt"),
    ("metrics", "metrics.txt"), ("shap_ranking", "explain.txt"), ("ablation", "ablation.txt"),
)


def cmd_report(args) -> int:
    out = _out(args)
    present = [(kind, txt) for kind, txt in STAGES if (out / f"{kind}.json").is_file()]
    if not present:
        raise ArtifactError(f"no stage reports found in {out}; run the pipeline first")
    for kind, _ in present:
        read_json(out / f"{kind}.json", kind)
    artifacts = {}
    for path in sorted(out.iterdir()):
        if path.is_file() and path.name not in ("report.json", "report.txt"):
            artifacts[path.name] = hashlib.sha256(path.read_bytes()).hexdigest()
    write_json(out / "report.json", "report", {"stages": [k for k, _ in present], "artifacts": artifacts})
    sections = []
    for kind, txt in present:
        if (out / txt).is_file():
            sections.append((kind, (out / txt).read_text(encoding="utf-8").rstrip()))
    missing = [k for k, _ in STAGES if k not in dict(present)]
    if missing:
        sections.append(("missing stages", ", ".join(missing)))
    write_text(out / "report.txt", sections)
    print(f"report over {len(present)} stages, {len(artifacts)} artifacts")
    return EXIT_OK


# --------------------------------------------------------------------------- entry point

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=1, help="master seed (default 1)")
    common.add_argument("--out", default="out", help="artifact directory (default ./out)")
    common.add_argument("--threads", type=int, default=1, help="worker threads for tree training")
    common.add_argument("--lexicon-dir", default=None, help="directory of lexicon files overriding the bundled ones")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="tweetlens", description=__doc__)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", parents=[common], help="validate and normalize a tweet file")
    p.add_argument("input")
    p.add_argument("--format", choices=("jsonl", "csv"), default=None)
    p.add_argument("--balance", action="store_true", help="downsample the majority class")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("analyze", parents=[common], help="features, KS tests and corpus reports")
    p.add_argument("--top-words", type=int, default=20)
    p.add_argument("--agreement-k", type=int, default=50)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("topics", parents=[common], help="LDA topics per class, sentiment and emotion")
    p.add_argument("--k", type=int, default=None, help="fixed topic count (skips selection)")
    p.add_argument("--k-grid", default="2,5,10")
    p.add_argument("--iterations", type=int, default=1000)
    p.add_argument("--min-count", type=int, default=2)
    p.add_argument("--top-n", type=int, default=10)
    p.set_defaults(func=cmd_topics)

    p = sub.add_parser("train", parents=[common], help="cross-validate the model suite and save one model")
    p.add_argument("--models", default=",".join(MODEL_SUITE))
    p.add_argument("--model", default="RF", help="tree model to save for explain/ablate")
    p.add_argument("--folds", type=int, default=5)
    p.add_argument("--test-fraction", type=float, default=0.2)
    p.add_argument("--n-trees", type=int, default=100)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("explain", parents=[common], help="TreeSHAP values, ranking and correlation pairs")
    p.add_argument("--pairs", type=int, default=15, help="pairs shown in the text report")
    p.set_defaults(func=cmd_explain)

    p = sub.add_parser("ablate", parents=[common], help="retrain without low-ranked features")
    p.set_defaults(func=cmd_ablate)

    p = sub.add_parser("report", parents=[common], help="combine stage reports and hash artifacts")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (CorpusError, LexiconError, FileNotFoundError, UnicodeDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (ArtifactError, PreconditionError, LearnError, StatsError, TopicModelError, ExplainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except (InvariantError, AssertionError) as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
