"""Latent Dirichlet allocation by collapsed Gibbs sampling."""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numba
import numpy as np


class TopicModelError(ValueError):
    pass


@numba.njit(cache=True)
def _gibbs_sweep(words, docs, z, ndt, ntw, nt, alpha, beta, uniforms):
    k = nt.shape[0]
    vbeta = ntw.shape[1] * beta
    p = np.empty(k)
    for i in range(words.shape[0]):
        w = words[i]
        d = docs[i]
        t = z[i]
        ndt[d, t] -= 1
        ntw[t, w] -= 1
        nt[t] -= 1
        total = 0.0
        for s in range(k):
            total += (ndt[d, s] + alpha) * (ntw[s, w] + beta) / (nt[s] + vbeta)
            p[s] = total
        u = uniforms[i] * total
        t = k - 1
        for s in range(k):
            if u < p[s]:
                t = s
                break
        z[i] = t
        ndt[d, t] += 1
        ntw[t, w] += 1
        nt[t] += 1


@numba.njit(cache=True)
def _foldin_sweep(words, docs, z, ndt, phi, alpha, uniforms):
    k = phi.shape[0]
    p = np.empty(k)
    for i in range(words.shape[0]):
        w = words[i]
        d = docs[i]
        t = z[i]
        ndt[d, t] -= 1
        total = 0.0
        for s in range(k):
            total += (ndt[d, s] + alpha) * phi[s, w]
            p[s] = total
        u = uniforms[i] * total
        t = k - 1
        for s in range(k):
            if u < p[s]:
                t = s
                break
        z[i] = t
        ndt[d, t] += 1


@dataclass
class TopicModel:
    k: int
    phi: np.ndarray
    theta: np.ndarray
    vocabulary: tuple[str, ...]
    alpha: float
    beta: float
    seed: int
    iterations: int
    doc_index: tuple[int, ...] = ()  # positions of the fitted docs in the caller's list
    label: str = ""

    @property
    def n_docs(self) -> int:
        return self.theta.shape[0]


def prune_docs(
    docs: Sequence[Sequence[str]], stopwords=frozenset(), min_count: int = 2
) -> tuple[list[list[str]], list[int], list[str]]:
    """Drop stopwords and words seen fewer than ``min_count`` times; drop emptied docs."""
    freq = Counter(w for doc in docs for w in doc if w not in stopwords)
    keep = {w for w, c in freq.items() if c >= min_count}
    pruned, index = [], []
    for i, doc in enumerate(docs):
        kept = [w for w in doc if w in keep]
        if kept:
            pruned.append(kept)
            index.append(i)
    return pruned, index, sorted(keep)


def _flatten(docs: Sequence[Sequence[str]], vocab_index: dict[str, int]):
    words, owner = [], []
    for d, doc in enumerate(docs):
        for w in doc:
            words.append(vocab_index[w])
            owner.append(d)
    return np.asarray(words, dtype=np.int64), np.asarray(owner, dtype=np.int64)


def check_counts(words, docs, z, ndt, ntw, nt) -> None:
    """Assert that the count tables agree exactly with the assignment vector."""
    doc_len = np.bincount(docs, minlength=ndt.shape[0])
    if not np.array_equal(ndt.sum(axis=1), doc_len):
        raise AssertionError("document-topic counts do not sum to document lengths")
    if not np.array_equal(ntw.sum(axis=1), nt):
        raise AssertionError("topic-word counts do not sum to topic totals")
    ref_ndt = np.zeros_like(ndt)
    np.add.at(ref_ndt, (docs, z), 1)
    ref_ntw = np.zeros_like(ntw)
    np.add.at(ref_ntw, (z, words), 1)
    if not (np.array_equal(ref_ndt, ndt) and np.array_equal(ref_ntw, ntw)):
        raise AssertionError("count tables diverged from topic assignments")


def lda_fit(
    docs: Sequence[Sequence[str]],
    k: int,
    alpha: float | None = None,
    beta: float = 0.01,
    iterations: int = 1000,
    seed: int = 0,
    stopwords=frozenset(),
    min_count: int = 2,
    check_invariants: bool = False,
    on_sweep: Callable[[int, np.ndarray, np.ndarray, np.ndarray], None] | None = None,
) -> TopicModel:
    """Fit LDA with collapsed Gibbs sampling.

    ``alpha`` defaults to 50/k. With ``check_invariants`` the count tables are
    verified against the assignments after every sweep.
    """
    if k < 2:
        raise TopicModelError(f"k must be >= 2, got {k}")
    alpha = 50.0 / k if alpha is None else float(alpha)
    if alpha <= 0 or beta <= 0:
        raise TopicModelError("alpha and beta must be positive")
    pruned, index, vocab = prune_docs(docs, stopwords, min_count)
    if not vocab:
        raise TopicModelError("vocabulary empty after pruning")
    if len(pruned) < 2:
        raise TopicModelError(f"need at least 2 non-empty documents after pruning, got {len(pruned)}")
    vocab_index = {w: i for i, w in enumerate(vocab)}
    words, owner = _flatten(pruned, vocab_index)
    if k > words.size:
        raise TopicModelError(f"k={k} exceeds the {words.size} tokens available")

    rng = np.random.default_rng(seed)
    n_docs, n_words = len(pruned), len(vocab)
    z = rng.integers(0, k, size=words.size).astype(np.int64)
    ndt = np.zeros((n_docs, k), dtype=np.int64)
    ntw = np.zeros((k, n_words), dtype=np.int64)
    np.add.at(ndt, (owner, z), 1)
    np.add.at(ntw, (z, words), 1)
    nt = ntw.sum(axis=1)

    for sweep in range(iterations):
        _gibbs_sweep(words, owner, z, ndt, ntw, nt, alpha, beta, rng.random(words.size))
        if check_invariants:
            check_counts(words, owner, z, ndt, ntw, nt)
        if on_sweep is not None:
            on_sweep(sweep, ndt, ntw, nt)

    phi = (ntw + beta) / (nt[:, None] + n_words * beta)
    theta = (ndt + alpha) / (ndt.sum(axis=1)[:, None] + k * alpha)
    return TopicModel(
        k=k, phi=phi, theta=theta, vocabulary=tuple(vocab), alpha=alpha, beta=beta,
        seed=seed, iterations=iterations, doc_index=tuple(index),
    )


def heldout_log_likelihood(model: TopicModel, docs: Sequence[Sequence[str]], sweeps: int = 50, seed: int = 0) -> float:
    """Mean per-token log-likelihood of unseen docs by document completion.

    Each held-out doc's even-position tokens fold in theta (phi frozen, Gibbs
    sweeps); the odd-position tokens are scored. Words outside the model
    vocabulary are ignored.
    """
    vocab_index = {w: i for i, w in enumerate(model.vocabulary)}
    kept = [[w for w in doc if w in vocab_index] for doc in docs]
    kept = [doc for doc in kept if len(doc) >= 2]
    if not kept:
        raise TopicModelError("no held-out documents with two or more in-vocabulary tokens")
    observed = [doc[0::2] for doc in kept]
    scored = [doc[1::2] for doc in kept]
    words, owner = _flatten(observed, vocab_index)
    rng = np.random.default_rng(seed)
    z = rng.integers(0, model.k, size=words.size).astype(np.int64)
    ndt = np.zeros((len(kept), model.k), dtype=np.int64)
    np.add.at(ndt, (owner, z), 1)
    phi = np.ascontiguousarray(model.phi)
    for _ in range(sweeps):
        _foldin_sweep(words, owner, z, ndt, phi, model.alpha, rng.random(words.size))
    theta = (ndt + model.alpha) / (ndt.sum(axis=1)[:, None] + model.k * model.alpha)
    test_words, test_owner = _flatten(scored, vocab_index)
    p = np.einsum("ik,ki->i", theta[test_owner], phi[:, test_words])
    return float(np.mean(np.log(p)))


def select_k(
    docs: Sequence[Sequence[str]],
    candidate_ks: Sequence[int],
    holdout_fraction: float = 0.2,
    seed: int = 0,
    iterations: int = 300,
    stopwords=frozenset(),
    min_count: int = 2,
    alpha: float | None = 0.1,
    return_scores: bool = False,
):
    """Grid-search the topic count by held-out per-token log-likelihood; ties go to the smaller k.

    Every candidate is fitted with the same ``alpha``: under alpha = c/k the
    completion likelihood of a clean split and of its refinements coincide.
    Pass ``alpha=None`` for the 50/k default anyway.
    """
    ks = sorted(set(int(k) for k in candidate_ks))
    if not ks:
        raise TopicModelError("candidate_ks is empty")
    if len(ks) == 1 and not return_scores:
        return ks[0]
    if not 0.0 < holdout_fraction < 1.0:
        raise TopicModelError("holdout_fraction must lie in (0, 1)")
    n = len(docs)
    n_hold = int(math.floor(n * holdout_fraction + 0.5))
    if n_hold < 1 or n - n_hold < 2:
        raise TopicModelError(f"{n} documents are too few for a {holdout_fraction} holdout")
    perm = np.random.default_rng(seed).permutation(n)
    hold = [docs[i] for i in sorted(perm[:n_hold])]
    train = [docs[i] for i in sorted(perm[n_hold:])]
    scores: dict[int, float] = {}
    for k in ks:
        model = lda_fit(
            train, k, alpha=alpha, iterations=iterations, seed=seed, stopwords=stopwords, min_count=min_count
        )
        scores[k] = heldout_log_likelihood(model, hold, seed=seed)
    best = ks[0]
    for k in ks[1:]:
        if scores[k] > scores[best] + 1e-12:
            best = k
    return (best, scores) if return_scores else best


def top_words_per_topic(m: TopicModel, n: int) -> list[list[tuple[str, float]]]:
    if not 1 <= n <= len(m.vocabulary):
        raise TopicModelError(f"n must be in [1, {len(m.vocabulary)}]")
    out = []
    for t in range(m.k):
        order = sorted(range(len(m.vocabulary)), key=lambda w: (-m.phi[t, w], m.vocabulary[w]))
        out.append([(m.vocabulary[w], float(m.phi[t, w])) for w in order[:n]])
    return out


@dataclass(frozen=True)
class TopicFilter:
    """Conjunction of optional constraints on label, sentiment category and dominant emotion."""

    label: object | None = None
    sentiment: object | None = None
    emotion: object | None = None

    def matches(self, label, sentiment, emotion) -> bool:
        return (
            (self.label is None or label == self.label)
            and (self.sentiment is None or sentiment == self.sentiment)
            and (self.emotion is None or emotion == self.emotion)
        )

    def describe(self) -> str:
        parts = []
        if self.label is not None:
            parts.append(getattr(self.label, "short", str(self.label)))
        for v in (self.sentiment, self.emotion):
            if v is not None:
                parts.append(getattr(v, "value", str(v)))
        return " ∧ ".join(parts) if parts else "all"


@dataclass
class ConditionalTopics:
    filter: TopicFilter
    description: str
    n_docs: int
    model: TopicModel
    ids: tuple[str, ...] = field(default_factory=tuple)


def conditional_topics(
    items: Sequence,
    filt: TopicFilter,
    k: int,
    **fit_kwargs,
) -> ConditionalTopics:
    """Fit LDA on the tweets matching ``filt``.

    ``items`` are objects with ``id``, ``label``, ``sentiment``, ``emotion`` and
    ``topic_tokens`` attributes (see :class:`tweetlens.pipeline.TweetFeatures`).
    """
    chosen = [it for it in items if filt.matches(it.label, it.sentiment, it.emotion)]
    desc = filt.describe()
    if not chosen:
        raise TopicModelError(f"filter {desc!r} matches no documents")
    try:
        model = lda_fit([it.topic_tokens for it in chosen], k, **fit_kwargs)
    except TopicModelError as exc:
        raise TopicModelError(f"filter {desc!r}: {exc}") from None
    model.label = desc
    return ConditionalTopics(
        filter=filt, description=desc, n_docs=len(chosen), model=model, ids=tuple(it.id for it in chosen)
    )
