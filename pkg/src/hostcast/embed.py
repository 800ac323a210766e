"""Word embeddings: skip-gram with negative sampling, plus a character
n-gram variant whose word vectors are sums of subword vectors.

Training is single-threaded and deterministic given the seed.  Updates are
applied in small batches with exact duplicate-index accumulation, which
keeps the arithmetic vectorizable without changing the objective.
"""

from __future__ import annotations

import logging
import math
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

logger = logging.getLogger(__name__)


def word_ngrams(word: str, lo: int = 3, hi: int = 6) -> list[str]:
    """Character n-grams of the boundary-marked word, lengths lo..hi."""
    marked = f"<{word}>"
    grams = []
    for n in range(lo, hi + 1):
        for i in range(len(marked) - n + 1):
            grams.append(marked[i : i + n])
    return grams


def _components(word: str, lo: int, hi: int) -> list[str]:
    """Subword components: n-grams plus the whole marked word, deduplicated
    and sorted so compositions sum in a reproducible order."""
    return sorted(set(word_ngrams(word, lo, hi)) | {f"<{word}>"})


@dataclass
class EmbeddingTable:
    """Token vectors, optionally backed by a character n-gram table."""

    dim: int
    vectors: dict[str, np.ndarray]
    ngram_vectors: dict[str, np.ndarray] | None = None
    ngram_range: tuple[int, int] = (3, 6)
    meta: dict = field(default_factory=dict)

    def __contains__(self, word: str) -> bool:
        return word in self.vectors

    def compose(self, word: str) -> np.ndarray | None:
        """Sum of the known subword component vectors of `word`."""
        if self.ngram_vectors is None:
            return None
        total = None
        for g in _components(word, *self.ngram_range):
            v = self.ngram_vectors.get(g)
            if v is None:
                continue
            total = v.copy() if total is None else total + v
        return total

    def vector(self, word: str) -> np.ndarray | None:
        """Stored vector, or a subword composition for unknown words."""
        v = self.vectors.get(word)
        if v is not None:
            return v
        return self.compose(word)


# ---------------------------------------------------------------------------
# Loss for a single (center, context, negatives) triple.  Training applies
# exactly this loss in batches; tests check these gradients against finite
# differences.
# ---------------------------------------------------------------------------


def _softplus(x: np.ndarray | float) -> np.ndarray | float:
    return np.logaddexp(0.0, x)


def _sigmoid(x: np.ndarray) -> np.ndarray:
    return 1.0 / (1.0 + np.exp(-np.clip(x, -60.0, 60.0)))


def sgns_pair_loss(center: np.ndarray, context: np.ndarray, negatives: np.ndarray) -> float:
    """-log sigma(c.u) - sum_n log sigma(-c.n)."""
    pos = float(_softplus(-center @ context))
    neg = float(np.sum(_softplus(negatives @ center)))
    return pos + neg


def sgns_pair_grads(center: np.ndarray, context: np.ndarray, negatives: np.ndarray):
    """Gradients of `sgns_pair_loss` w.r.t. (center, context, negatives)."""
    s_pos = float(_sigmoid(np.atleast_1d(center @ context))[0])
    s_neg = _sigmoid(negatives @ center)
    g_center = (s_pos - 1.0) * context + s_neg @ negatives
    g_context = (s_pos - 1.0) * center
    g_negatives = s_neg[:, None] * center[None, :]
    return g_center, g_context, g_negatives


def subword_pair_loss(components: np.ndarray, context: np.ndarray, negatives: np.ndarray) -> float:
    """Same loss with the center vector given as a sum of component rows."""
    return sgns_pair_loss(components.sum(axis=0), context, negatives)


def subword_pair_grads(components: np.ndarray, context: np.ndarray, negatives: np.ndarray):
    g_center, g_context, g_negatives = sgns_pair_grads(
        components.sum(axis=0), context, negatives
    )
    g_components = np.tile(g_center, (components.shape[0], 1))
    return g_components, g_context, g_negatives


# ---------------------------------------------------------------------------
# Training
# ---------------------------------------------------------------------------


def _scatter_add(W: np.ndarray, idx: np.ndarray, G: np.ndarray) -> None:
    """W[idx] += G with exact handling of duplicate indices."""
    order = np.argsort(idx, kind="stable")
    idx_sorted = idx[order]
    G_sorted = G[order]
    boundaries = np.flatnonzero(np.diff(idx_sorted)) + 1
    starts = np.concatenate(([0], boundaries))
    sums = np.add.reduceat(G_sorted, starts, axis=0)
    W[idx_sorted[starts]] += sums


def _build_pairs(
    sentences: Iterable[Sequence[str]], word_id: Mapping[str, int], window: int
):
    centers: list[int] = []
    contexts: list[int] = []
    for sent in sentences:
        ids = [word_id[t] for t in sent if t in word_id]
        n = len(ids)
        for i in range(n):
            lo = max(0, i - window)
            hi = min(n, i + window + 1)
            for j in range(lo, hi):
                if j != i:
                    centers.append(ids[i])
                    contexts.append(ids[j])
    return np.asarray(centers, dtype=np.int64), np.asarray(contexts, dtype=np.int64)


def _train(
    sentences: Sequence[Sequence[str]],
    dim: int,
    window: int,
    negatives: int,
    epochs: int,
    lr: float,
    min_count: int,
    seed: int,
    batch: int,
    subword: bool,
    ngram_range: tuple[int, int],
) -> EmbeddingTable:
    if dim < 1:
        raise ValueError("dim must be >= 1")
    sentences = [s for s in sentences if s]
    if not sentences:
        raise ValueError("no sentences to train on")

    counts: Counter[str] = Counter()
    for s in sentences:
        counts.update(s)
    vocab = sorted(t for t, c in counts.items() if c >= min_count)
    if not vocab:
        raise ValueError("vocabulary empty after min-count filtering")
    word_id = {w: i for i, w in enumerate(vocab)}
    n_words = len(vocab)

    centers, contexts = _build_pairs(sentences, word_id, window)
    if len(centers) == 0:
        raise ValueError("no training pairs (sentences too short?)")

    freq = np.asarray([counts[w] for w in vocab], dtype=float)
    noise = freq**0.75
    noise_cum = np.cumsum(noise / noise.sum())

    rng = np.random.default_rng(seed)

    # Center-word parameter rows.  In subword mode each word's vector is the
    # sum of its component rows (n-grams plus the whole marked word).
    if subword:
        keys: list[str] = []
        key_id: dict[str, int] = {}
        comp_lists = []
        for w in vocab:
            ids = []
            for g in _components(w, *ngram_range):
                gi = key_id.get(g)
                if gi is None:
                    gi = len(keys)
                    key_id[g] = gi
                    keys.append(g)
                ids.append(gi)
            comp_lists.append(np.asarray(ids, dtype=np.int64))
        comp_lens = np.asarray([len(c) for c in comp_lists], dtype=np.int64)
        comp_flat = np.concatenate(comp_lists)
        comp_starts = np.concatenate(([0], np.cumsum(comp_lens)))[:-1]
        n_rows = len(keys)
    else:
        comp_lists = None
        n_rows = n_words

    W = rng.uniform(-0.5 / dim, 0.5 / dim, size=(n_rows, dim))
    U = np.zeros((n_words, dim))

    def center_vecs(c_idx: np.ndarray) -> tuple[np.ndarray, np.ndarray | None]:
        if not subword:
            return W[c_idx], None
        flat = np.concatenate([comp_lists[c] for c in c_idx])
        lens = comp_lens[c_idx]
        starts = np.concatenate(([0], np.cumsum(lens)))[:-1]
        v = np.add.reduceat(W[flat], starts, axis=0)
        return v, (flat, lens)

    def draw_negatives(size: tuple[int, int]) -> np.ndarray:
        return np.searchsorted(noise_cum, rng.random(size), side="right")

    n_pairs = len(centers)
    # Frozen sample for the monotone-objective log.
    sample = rng.choice(n_pairs, size=min(2048, n_pairs), replace=False)
    sample_neg = draw_negatives((len(sample), negatives))

    def eval_frozen() -> float:
        v, _ = center_vecs(centers[sample])
        u = U[contexts[sample]]
        un = U[sample_neg]
        pos = _softplus(-np.sum(v * u, axis=1))
        neg = _softplus(np.einsum("bkd,bd->bk", un, v))
        return float(np.mean(pos + neg.sum(axis=1)))

    eval_log = [eval_frozen()]
    epoch_log = []
    total_updates = n_pairs * epochs
    done = 0

    for epoch in range(epochs):
        order = rng.permutation(n_pairs)
        loss_sum = 0.0
        for start in range(0, n_pairs, batch):
            sel = order[start : start + batch]
            c_idx = centers[sel]
            x_idx = contexts[sel]
            n_idx = draw_negatives((len(sel), negatives))

            step = lr * max(1e-4, 1.0 - done / total_updates)
            done += len(sel)

            v, comp_info = center_vecs(c_idx)
            u = U[x_idx]
            un = U[n_idx]

            score_pos = np.sum(v * u, axis=1)
            score_neg = np.einsum("bkd,bd->bk", un, v)
            s_pos = _sigmoid(score_pos)
            s_neg = _sigmoid(score_neg)
            loss_sum += float(
                np.sum(_softplus(-score_pos)) + np.sum(_softplus(score_neg))
            )

            g_pos = s_pos - 1.0
            gv = g_pos[:, None] * u + np.einsum("bk,bkd->bd", s_neg, un)
            gu = g_pos[:, None] * v
            gn = s_neg[..., None] * v[:, None, :]

            if subword:
                flat, lens = comp_info
                _scatter_add(W, flat, -step * np.repeat(gv, lens, axis=0))
            else:
                _scatter_add(W, c_idx, -step * gv)
            _scatter_add(U, x_idx, -step * gu)
            _scatter_add(U, n_idx.ravel(), -step * gn.reshape(-1, dim))

        if not (np.isfinite(W).all() and np.isfinite(U).all()):
            raise RuntimeError(f"non-finite parameters after epoch {epoch}")
        epoch_log.append(loss_sum / n_pairs)
        eval_log.append(eval_frozen())
        logger.debug(
            "epoch %d: mean pair loss %.4f (frozen sample %.4f)",
            epoch,
            epoch_log[-1],
            eval_log[-1],
        )

    meta = {
        "mode": "subword" if subword else "word",
        "dim": dim,
        "window": window,
        "negatives": negatives,
        "epochs": epochs,
        "lr": lr,
        "min_count": min_count,
        "seed": seed,
        "batch": batch,
        "epoch_loss": epoch_log,
        "eval_loss": eval_log,
    }

    if subword:
        ngram_vectors = {g: W[i].copy() for i, g in enumerate(keys)}
        table = EmbeddingTable(
            dim=dim,
            vectors={},
            ngram_vectors=ngram_vectors,
            ngram_range=ngram_range,
            meta=meta,
        )
        table.vectors = {w: table.compose(w) for w in vocab}
        return table
    return EmbeddingTable(
        dim=dim,
        vectors={w: W[i].copy() for i, w in enumerate(vocab)},
        meta=meta,
    )


def train_sgns(
    sentences: Sequence[Sequence[str]],
    dim: int = 100,
    window: int = 5,
    negatives: int = 5,
    epochs: int = 5,
    lr: float = 0.025,
    min_count: int = 1,
    seed: int = 0,
    batch: int = 1024,
) -> EmbeddingTable:
    """Train word vectors by skip-gram with negative sampling."""
    return _train(
        sentences, dim, window, negatives, epochs, lr, min_count, seed, batch,
        subword=False, ngram_range=(3, 6),
    )


def train_subword_sgns(
    sentences: Sequence[Sequence[str]],
    dim: int = 100,
    window: int = 5,
    negatives: int = 5,
    epochs: int = 5,
    lr: float = 0.025,
    min_count: int = 1,
    seed: int = 0,
    batch: int = 1024,
    ngram_range: tuple[int, int] = (3, 6),
) -> EmbeddingTable:
    """Train the character n-gram variant; unknown words stay composable."""
    return _train(
        sentences, dim, window, negatives, epochs, lr, min_count, seed, batch,
        subword=True, ngram_range=ngram_range,
    )


# ---------------------------------------------------------------------------
# Persistence: "<count> <dim>" header, then "<token> v1 ... v<dim>" rows.
# A subword table stores its n-gram rows in a sibling "<path>.ngrams" file.
# ---------------------------------------------------------------------------


def _write_rows(path: Path, dim: int, rows: Mapping[str, np.ndarray]) -> None:
    with path.open("w", encoding="utf-8") as fh:
        fh.write(f"{len(rows)} {dim}\n")
        for token in sorted(rows):
            vec = rows[token]
            if any(ch.isspace() for ch in token):
                raise ValueError(f"token {token!r} contains whitespace")
            fh.write(token + " " + " ".join(repr(float(x)) for x in vec) + "\n")


def _read_rows(path: Path) -> tuple[int, dict[str, np.ndarray]]:
    with path.open("r", encoding="utf-8") as fh:
        header = fh.readline().split()
        if len(header) != 2:
            raise ValueError(f"{path}: malformed header")
        try:
            count, dim = int(header[0]), int(header[1])
        except ValueError as exc:
            raise ValueError(f"{path}: malformed header") from exc
        rows: dict[str, np.ndarray] = {}
        for lineno, line in enumerate(fh, start=2):
            parts = line.rstrip("\n").split(" ")
            if len(parts) != dim + 1:
                raise ValueError(
                    f"{path}: line {lineno}: expected {dim} values, got {len(parts) - 1}"
                )
            try:
                vec = np.asarray([float(x) for x in parts[1:]])
            except ValueError as exc:
                raise ValueError(f"{path}: line {lineno}: bad float") from exc
            if not np.isfinite(vec).all():
                raise ValueError(f"{path}: line {lineno}: non-finite value")
            rows[parts[0]] = vec
    if len(rows) != count:
        raise ValueError(f"{path}: header count {count} != {len(rows)} rows")
    return dim, rows


def save_table(table: EmbeddingTable, path: str | Path) -> None:
    path = Path(path)
    _write_rows(path, table.dim, table.vectors)
    if table.ngram_vectors is not None:
        _write_rows(Path(str(path) + ".ngrams"), table.dim, table.ngram_vectors)


def load_table(path: str | Path) -> EmbeddingTable:
    path = Path(path)
    dim, vectors = _read_rows(path)
    ngram_path = Path(str(path) + ".ngrams")
    ngram_vectors = None
    if ngram_path.exists():
        ngram_dim, ngram_vectors = _read_rows(ngram_path)
        if ngram_vectors and ngram_dim != dim:
            raise ValueError(
                f"{ngram_path}: dimension {ngram_dim} != word table dimension {dim}"
            )
    return EmbeddingTable(dim=dim, vectors=vectors, ngram_vectors=ngram_vectors)
