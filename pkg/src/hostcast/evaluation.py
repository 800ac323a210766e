"""Ranking metrics, stratified fold plans, and matched negative sampling."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .corpus import Post

logger = logging.getLogger(__name__)


def auc(scores: Sequence[float], labels: Sequence[bool]) -> float:
    """Area under the ROC curve as the pair rank statistic
    (concordant + 0.5 * tied) / (positives * negatives).

    Tied ranks are accumulated in integer arithmetic (doubled ranks), so the
    result matches brute-force pair enumeration exactly.
    """
    s = np.asarray(scores, dtype=float)
    y = np.asarray(labels, dtype=bool)
    if s.shape != y.shape or s.ndim != 1:
        raise ValueError("scores and labels must be 1-d and the same length")
    n_pos = int(y.sum())
    n_neg = len(y) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ValueError("AUC requires both classes")

    order = np.argsort(s, kind="stable")
    s_sorted = s[order]
    y_sorted = y[order]
    doubled = np.empty(len(s), dtype=np.int64)
    i = 0
    while i < len(s):
        j = i
        while j < len(s) and s_sorted[j] == s_sorted[i]:
            j += 1
        # 1-based ranks i+1 .. j share average rank (i+1+j)/2
        doubled[i:j] = i + 1 + j
        i = j
    num2 = int(doubled[y_sorted].sum()) - n_pos * (n_pos + 1)
    return num2 / (2 * n_pos * n_neg)


def prf1(
    scores: Sequence[float], labels: Sequence[bool], threshold: float = 0.5
) -> tuple[float, float, float]:
    """Precision, recall, F1 at a fixed threshold (predict positive when
    score >= threshold); zero denominators yield zeros."""
    s = np.asarray(scores, dtype=float)
    y = np.asarray(labels, dtype=bool)
    pred = s >= threshold
    tp = int(np.sum(pred & y))
    fp = int(np.sum(pred & ~y))
    fn = int(np.sum(~pred & y))
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return precision, recall, f1


@dataclass(frozen=True)
class FoldPlan:
    """Post-level fold assignment; matched pairs always share a fold."""

    k: int
    fold_of: Mapping[str, int]
    seed: int
    pairs: Mapping[str, str]

    def test_ids(self, fold: int) -> list[str]:
        return [pid for pid, f in self.fold_of.items() if f == fold]


def make_folds(instances, k: int = 10, seed: int = 0, pairs: Mapping[str, str] | None = None) -> FoldPlan:
    """Label-stratified, pair-preserving partition of instances into k folds.

    `instances` need `post_id` and `label` attributes.  Pairs are assigned as
    units; remaining instances are distributed round-robin within each label
    stratum.  Deterministic given the seed.
    """
    pairs = dict(pairs or {})
    if k < 2:
        raise ValueError("k must be >= 2")
    if len(instances) < k:
        raise ValueError(f"need at least k={k} instances, got {len(instances)}")

    by_id = {}
    for inst in instances:
        by_id[inst.post_id] = inst
    paired_ids = set()
    pair_items = []
    for pos, neg in sorted(pairs.items()):
        if pos in by_id and neg in by_id:
            pair_items.append((pos, neg))
            paired_ids.update((pos, neg))

    rng = np.random.default_rng(seed)
    fold_of: dict[str, int] = {}
    counter = 0
    perm = rng.permutation(len(pair_items))
    for j in perm:
        pos, neg = pair_items[j]
        fold = counter % k
        fold_of[pos] = fold
        fold_of[neg] = fold
        counter += 1

    for label in (True, False):
        singles = sorted(
            pid
            for pid, inst in by_id.items()
            if inst.label == label and pid not in paired_ids
        )
        perm = rng.permutation(len(singles))
        for offset, j in enumerate(perm):
            fold_of[singles[j]] = offset % k
    return FoldPlan(k=k, fold_of=fold_of, seed=seed, pairs=pairs)


def match_negatives(
    positives: Sequence[tuple[str, int]],
    pool: Sequence[Post],
    seed: int = 0,
) -> dict[str, str]:
    """Pair each positive (post id, observed count k) with a distinct pool
    post having at least k comments; the match is later truncated to its
    first k comments.  Positives that cannot be matched are dropped with a
    warning.  Sampling is without replacement."""
    if not pool:
        raise ValueError("negative pool is empty")
    rng = np.random.default_rng(seed)
    remaining = sorted(pool, key=lambda p: p.id)
    sizes = np.asarray([len(p.comments) for p in remaining])
    used = np.zeros(len(remaining), dtype=bool)
    pairing: dict[str, str] = {}
    dropped = 0
    for pos_id, k in positives:
        eligible = np.flatnonzero((sizes >= k) & ~used)
        if len(eligible) == 0:
            dropped += 1
            continue
        pick = int(eligible[rng.integers(len(eligible))])
        used[pick] = True
        pairing[pos_id] = remaining[pick].id
    if dropped:
        logger.warning(
            "match_negatives: dropped %d positive(s) with no eligible negative",
            dropped,
        )
    return pairing
