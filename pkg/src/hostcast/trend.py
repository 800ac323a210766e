"""Comment-level hostility posteriors and the trend summaries built on them.

The comment classifier uses unigram, subword-embedding, and lexicon features
of a single comment.  Posteriors are produced under a nested fold scheme:
the caller's fold assignment is grouped into disjoint scoring groups, and
the comments of each group are scored by a model that saw neither their post
nor any other post sharing their fold.  Every (model, scored post) pairing is
recorded so leakage can be audited structurally.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from . import linmodel
from .corpus import Post
from .textfeat import (
    Lexicons,
    Vocabulary,
    build_vocab,
    lexicon_features,
    embed_aggregate,
    make_layout,
    tokenize,
    unigram_counts,
)

logger = logging.getLogger(__name__)

_PROB_EPS = 1e-12


def trend_features(posteriors: Sequence[float], threshold: float = 0.3) -> np.ndarray:
    """Four summaries of a posterior sequence: count above the threshold,
    fraction above it, maximum adjacent increase, and max minus min.

    A single-element sequence has zero slope by convention.
    """
    p = np.asarray(posteriors, dtype=float)
    if p.size == 0:
        raise ValueError("trend_features requires at least one posterior")
    count = int(np.sum(p > threshold))
    frac = count / p.size
    slope = float(np.max(np.diff(p))) if p.size >= 2 else 0.0
    spread = float(p.max() - p.min())
    return np.array([float(count), frac, slope, spread])


@dataclass(frozen=True)
class PosteriorSeries:
    """Per-comment hostility posteriors for one post, with the id of the
    model that produced each probability."""

    post_id: str
    posteriors: tuple[float, ...]
    provenance: tuple[str, ...]

    def __post_init__(self):
        if len(self.posteriors) != len(self.provenance):
            raise ValueError("posteriors and provenance must align")


@dataclass
class CommentModel:
    """A trained comment scorer plus everything needed to reapply it."""

    model_id: str
    model: linmodel.LinearModel
    vocab: Vocabulary
    lexicons: Lexicons
    table: object
    train_post_ids: frozenset[str]


class CommentFeatureCache:
    """Per-comment parts that do not depend on the training fold."""

    def __init__(self, lexicons: Lexicons, table):
        self.lexicons = lexicons
        self.table = table
        self._parts: dict = {}

    def parts(self, post: Post, idx: int):
        key = (post.id, idx)
        got = self._parts.get(key)
        if got is None:
            toks = tokenize(post.comments[idx].text)
            got = (
                unigram_counts(toks),
                lexicon_features(toks, self.lexicons),
                embed_aggregate(toks, self.table),
            )
            self._parts[key] = got
        return got


def _comment_matrix(
    posts: Sequence[Post],
    which: Sequence[tuple[int, int]],
    vocab: Vocabulary,
    cache: CommentFeatureCache,
) -> np.ndarray:
    dim = vocab.size + 9 + 2 * cache.table.dim
    X = np.zeros((len(which), dim))
    for row, (pi, ci) in enumerate(which):
        counts, lex9, agg = cache.parts(posts[pi], ci)
        for tok, c in counts.items():
            col = vocab.index.get(tok)
            if col is not None:
                X[row, col] = float(c)
        X[row, vocab.size : vocab.size + 9] = lex9
        X[row, vocab.size + 9 :] = agg
    return X


def train_comment_model(
    posts: Sequence[Post],
    *,
    lexicons: Lexicons,
    table,
    model_id: str,
    lam: float = 1.0,
    vocab_min_count: int = 2,
    max_train: int | None = None,
    max_iter: int = 200,
    tol: float = 1e-3,
    seed: int = 0,
    cache: CommentFeatureCache | None = None,
    audit=None,
) -> CommentModel:
    """Train a single-comment hostility classifier on the given posts."""
    cache = cache or CommentFeatureCache(lexicons, table)
    locs = [(pi, ci) for pi, p in enumerate(posts) for ci in range(len(p.comments))]
    if max_train is not None and len(locs) > max_train:
        rng = np.random.default_rng(seed)
        keep = np.sort(rng.choice(len(locs), size=max_train, replace=False))
        locs = [locs[i] for i in keep]
    labels = np.asarray(
        [posts[pi].comments[ci].hostile for pi, ci in locs], dtype=float
    )
    if len(labels) < 2 or labels.min() == labels.max():
        raise ValueError(f"{model_id}: training comments contain a single class")

    vocab = build_vocab(
        (tokenize(posts[pi].comments[ci].text) for pi, ci in locs),
        min_count=vocab_min_count,
    )
    layout = make_layout(("U", "lex", "n-w2v"), vocab, embed_dim=cache.table.dim)
    X = _comment_matrix(posts, locs, vocab, cache)
    model = linmodel.train(
        X, labels, lam, layout=layout, max_iter=max_iter, tol=tol
    )
    cm = CommentModel(
        model_id=model_id,
        model=model,
        vocab=vocab,
        lexicons=lexicons,
        table=table,
        train_post_ids=frozenset(posts[pi].id for pi, _ in locs),
    )
    if audit is not None:
        audit.register(model_id, cm.train_post_ids)
    return cm


def score_posts(
    cm: CommentModel,
    posts: Sequence[Post],
    cache: CommentFeatureCache | None = None,
    audit=None,
) -> dict[str, PosteriorSeries]:
    """Score every comment of every post with one model."""
    cache = cache or CommentFeatureCache(cm.lexicons, cm.table)
    out: dict[str, PosteriorSeries] = {}
    for pi, post in enumerate(posts):
        if not post.comments:
            out[post.id] = PosteriorSeries(post.id, (), ())
            continue
        locs = [(pi, ci) for ci in range(len(post.comments))]
        X = _comment_matrix(posts, locs, cm.vocab, cache)
        probs = np.clip(
            linmodel.predict_proba(cm.model, X), _PROB_EPS, 1.0 - _PROB_EPS
        )
        out[post.id] = PosteriorSeries(
            post_id=post.id,
            posteriors=tuple(float(p) for p in probs),
            provenance=(cm.model_id,) * len(probs),
        )
        if audit is not None:
            audit.record_scored(cm.model_id, post.id)
    return out


def score_comments_double_cv(
    posts: Sequence[Post],
    fold_of: Mapping[str, int],
    inner_folds: int = 5,
    seed: int = 0,
    *,
    lexicons: Lexicons,
    table,
    lam: float = 1.0,
    vocab_min_count: int = 2,
    max_train: int | None = None,
    max_iter: int = 200,
    tol: float = 1e-3,
    cache: CommentFeatureCache | None = None,
    audit=None,
    id_prefix: str = "trend",
) -> dict[str, PosteriorSeries]:
    """Posterior for every comment, from a model that excludes the comment's
    post and all posts sharing its fold.

    Folds are grouped into at most `inner_folds` scoring groups; each group's
    comments are scored by a model trained on the complement, so whole folds
    stay on one side of every model.
    """
    missing = [p.id for p in posts if p.id not in fold_of]
    if missing:
        raise ValueError(f"posts without fold assignment: {missing[:3]}")
    cache = cache or CommentFeatureCache(lexicons, table)

    fold_ids = sorted({fold_of[p.id] for p in posts})
    n_groups = min(inner_folds, len(fold_ids))
    if n_groups < 2:
        raise ValueError("need at least two folds to isolate comment scoring")
    rng = np.random.default_rng(seed)
    shuffled = [fold_ids[i] for i in rng.permutation(len(fold_ids))]
    group_of_fold = {f: i % n_groups for i, f in enumerate(shuffled)}

    out: dict[str, PosteriorSeries] = {}
    for g in range(n_groups):
        hold = [p for p in posts if group_of_fold[fold_of[p.id]] == g]
        rest = [p for p in posts if group_of_fold[fold_of[p.id]] != g]
        cm = train_comment_model(
            rest,
            lexicons=lexicons,
            table=table,
            model_id=f"{id_prefix}-inner{g}",
            lam=lam,
            vocab_min_count=vocab_min_count,
            max_train=max_train,
            max_iter=max_iter,
            tol=tol,
            seed=seed + 1 + g,
            cache=cache,
            audit=audit,
        )
        out.update(score_posts(cm, hold, cache=cache, audit=audit))
    return out


def pooled_auc(series_map: Mapping[str, PosteriorSeries], posts: Sequence[Post]) -> float:
    """Cross-validated comment-level AUC pooled over all posteriors."""
    from .evaluation import auc

    scores: list[float] = []
    labels: list[bool] = []
    for post in posts:
        ps = series_map[post.id]
        scores.extend(ps.posteriors)
        labels.extend(c.hostile for c in post.comments)
    return auc(scores, labels)


def write_posteriors(
    series_map: Mapping[str, PosteriorSeries], path: str | Path
) -> None:
    """Audit CSV: post_id,comment_idx,posterior,fold_id."""
    with Path(path).open("w", encoding="utf-8") as fh:
        fh.write("post_id,comment_idx,posterior,fold_id\n")
        for pid in sorted(series_map):
            ps = series_map[pid]
            for i, (p, src) in enumerate(zip(ps.posteriors, ps.provenance)):
                fh.write(f"{pid},{i},{p!r},{src}\n")


def as_posterior_lookup(
    series_map: Mapping[str, PosteriorSeries]
) -> dict[str, tuple[float, ...]]:
    """Adapter for FeatureResources.posteriors."""
    return {pid: ps.posteriors for pid, ps in series_map.items()}


__all__ = [
    "CommentFeatureCache",
    "CommentModel",
    "PosteriorSeries",
    "as_posterior_lookup",
    "pooled_auc",
    "score_comments_double_cv",
    "score_posts",
    "train_comment_model",
    "trend_features",
    "write_posteriors",
]
