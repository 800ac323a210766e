"""L2-regularized logistic regression trained by full-batch gradient descent
with a backtracking line search.

The objective is mean log-loss plus (lam/2)*||w||^2 with the bias left
unpenalized.  Columns flagged by the feature layout (embedding aggregates,
trend, user, lexicon counts) are z-scored with statistics recorded from the
training data; raw unigram counts are left unscaled.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .textfeat import FeatureLayout, FeatureVector


def _sigmoid(z: np.ndarray) -> np.ndarray:
    return 1.0 / (1.0 + np.exp(-np.clip(z, -60.0, 60.0)))


def _logloss_terms(scores: np.ndarray, y: np.ndarray) -> np.ndarray:
    # log(1 + exp(-s)) for y=1, log(1 + exp(s)) for y=0, evaluated stably
    signed = np.where(y > 0.5, -scores, scores)
    return np.logaddexp(0.0, signed)


@dataclass
class LinearModel:
    weights: np.ndarray
    bias: float
    lam: float
    std_cols: np.ndarray
    std_mean: np.ndarray
    std_scale: np.ndarray
    fingerprint: str
    feature_names: tuple[str, ...] | None = None
    history: dict = field(default_factory=dict)

    @property
    def dim(self) -> int:
        return len(self.weights)


def _standardize_stats(X: np.ndarray, cols: np.ndarray):
    if len(cols) == 0:
        return np.empty(0), np.empty(0)
    block = X[:, cols]
    mean = block.mean(axis=0)
    scale = block.std(axis=0)
    scale[scale == 0.0] = 1.0
    return mean, scale


def _apply_standardize(X: np.ndarray, model_or_stats) -> np.ndarray:
    cols, mean, scale = model_or_stats
    if len(cols) == 0:
        return X
    X = X.astype(float, copy=True)
    X[:, cols] = (X[:, cols] - mean) / scale
    return X


def objective_and_grad(
    X: np.ndarray, y: np.ndarray, w: np.ndarray, b: float, lam: float
):
    """Mean log-loss + (lam/2)||w||^2 and its gradient at (w, b)."""
    n = len(y)
    scores = X @ w + b
    obj = float(np.mean(_logloss_terms(scores, y)) + 0.5 * lam * (w @ w))
    r = (_sigmoid(scores) - y) / n
    grad_w = X.T @ r + lam * w
    grad_b = float(r.sum())
    return obj, grad_w, grad_b


def train(
    X: np.ndarray,
    y: Sequence[bool] | np.ndarray,
    lam: float = 1.0,
    *,
    layout: FeatureLayout | None = None,
    standardize_cols: np.ndarray | None = None,
    max_iter: int = 500,
    tol: float = 1e-5,
) -> LinearModel:
    """Fit the model; deterministic (zero init, no randomness).

    Accepts a dense feature matrix.  Standardized columns come from `layout`
    when given, else from `standardize_cols` (default: none).
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float).ravel()
    if X.ndim != 2:
        raise ValueError("X must be a 2-d matrix")
    if X.shape[0] != len(y):
        raise ValueError(f"X has {X.shape[0]} rows but y has {len(y)} labels")
    if len(y) < 2:
        raise ValueError("need at least two training instances")
    if y.min() == y.max():
        raise ValueError("training labels contain a single class")
    if layout is not None and X.shape[1] != layout.dim:
        raise ValueError(f"X has {X.shape[1]} columns, layout expects {layout.dim}")

    if layout is not None:
        std_cols = np.flatnonzero(layout.standardize)
        fingerprint = layout.fingerprint
        names: tuple[str, ...] | None = layout.names
    else:
        std_cols = (
            np.asarray(standardize_cols, dtype=np.int64)
            if standardize_cols is not None
            else np.empty(0, dtype=np.int64)
        )
        fingerprint = f"raw:{X.shape[1]}"
        names = None

    mean, scale = _standardize_stats(X, std_cols)
    Xs = _apply_standardize(X, (std_cols, mean, scale))

    d = X.shape[1]
    w = np.zeros(d)
    b = 0.0
    obj, gw, gb = objective_and_grad(Xs, y, w, b, lam)
    objectives = [obj]
    step = 1.0
    for _ in range(max_iter):
        gnorm_inf = max(float(np.abs(gw).max(initial=0.0)), abs(gb))
        if gnorm_inf < tol:
            break
        g_sq = float(gw @ gw) + gb * gb
        # Backtracking (Armijo) on the steepest-descent direction.
        step = min(step * 2.0, 1e6)
        accepted = False
        while step > 1e-18:
            w_new = w - step * gw
            b_new = b - step * gb
            obj_new, gw_new, gb_new = objective_and_grad(Xs, y, w_new, b_new, lam)
            if obj_new <= obj - 1e-4 * step * g_sq:
                accepted = True
                break
            step *= 0.5
        if not accepted:
            break
        w, b, obj, gw, gb = w_new, b_new, obj_new, gw_new, gb_new
        objectives.append(obj)

    return LinearModel(
        weights=w,
        bias=float(b),
        lam=float(lam),
        std_cols=std_cols,
        std_mean=mean,
        std_scale=scale,
        fingerprint=fingerprint,
        feature_names=tuple(names) if names is not None else None,
        history={"objective": objectives},
    )


def _as_matrix(x, dim: int) -> np.ndarray:
    if isinstance(x, FeatureVector):
        if x.dim != dim:
            raise ValueError(f"feature vector dim {x.dim} != model dim {dim}")
        return x.to_dense()[None, :]
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 1:
        arr = arr[None, :]
    if arr.shape[1] != dim:
        raise ValueError(f"input dim {arr.shape[1]} != model dim {dim}")
    return arr


def predict_proba(
    model: LinearModel, x, layout: FeatureLayout | None = None
) -> np.ndarray:
    """sigmoid(w . standardize(x) + b); scalar input yields a length-1 array."""
    if layout is not None and layout.fingerprint != model.fingerprint:
        raise ValueError(
            f"layout fingerprint {layout.fingerprint} does not match "
            f"model fingerprint {model.fingerprint}"
        )
    X = _as_matrix(x, model.dim)
    Xs = _apply_standardize(X, (model.std_cols, model.std_mean, model.std_scale))
    return _sigmoid(Xs @ model.weights + model.bias)


def top_coefficients(
    model: LinearModel, k: int, sign: str = "positive"
) -> list[tuple[str, float]]:
    """The k largest-magnitude weights of the requested sign, by name.

    Ties in weight break on feature name.  Asking for more than exist
    returns all weights of that sign.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if sign not in ("positive", "negative"):
        raise ValueError("sign must be 'positive' or 'negative'")
    names = model.feature_names or tuple(
        f"f{i:05d}" for i in range(model.dim)
    )
    if sign == "positive":
        items = [(n, float(w)) for n, w in zip(names, model.weights) if w > 0]
        items.sort(key=lambda nw: (-nw[1], nw[0]))
    else:
        items = [(n, float(w)) for n, w in zip(names, model.weights) if w < 0]
        items.sort(key=lambda nw: (nw[1], nw[0]))
    return items[:k]


def lambda_search(
    X: np.ndarray,
    y: np.ndarray,
    grid: Sequence[float] = (0.01, 0.1, 1.0, 10.0),
    folds: int = 3,
    seed: int = 0,
    **train_kwargs,
) -> float:
    """Pick the grid value with the best mean held-out AUC over small folds."""
    from .evaluation import auc

    y = np.asarray(y, dtype=float).ravel()
    rng = np.random.default_rng(seed)
    order = rng.permutation(len(y))
    fold_of = np.arange(len(y)) % folds
    fold_of = fold_of[np.argsort(order, kind="stable")]

    best_lam, best_score = grid[0], -np.inf
    for lam in grid:
        scores = []
        for f in range(folds):
            tr = fold_of != f
            te = ~tr
            if y[te].min() == y[te].max() or y[tr].min() == y[tr].max():
                continue
            model = train(X[tr], y[tr], lam, **train_kwargs)
            p = predict_proba(model, X[te])
            scores.append(auc(p, y[te] > 0.5))
        if scores and float(np.mean(scores)) > best_score:
            best_score = float(np.mean(scores))
            best_lam = lam
    return best_lam


def save_model(model: LinearModel, path: str | Path) -> None:
    obj = {
        "fingerprint": model.fingerprint,
        "lambda": model.lam,
        "bias": model.bias,
        "weights": [float(v) for v in model.weights],
        "std_cols": [int(c) for c in model.std_cols],
        "std_mean": [float(v) for v in model.std_mean],
        "std_scale": [float(v) for v in model.std_scale],
        "feature_names": list(model.feature_names) if model.feature_names else None,
    }
    Path(path).write_text(json.dumps(obj, sort_keys=True), encoding="utf-8")


def load_model(path: str | Path) -> LinearModel:
    obj = json.loads(Path(path).read_text(encoding="utf-8"))
    names = obj.get("feature_names")
    return LinearModel(
        weights=np.asarray(obj["weights"], dtype=float),
        bias=float(obj["bias"]),
        lam=float(obj["lambda"]),
        std_cols=np.asarray(obj["std_cols"], dtype=np.int64),
        std_mean=np.asarray(obj["std_mean"], dtype=float),
        std_scale=np.asarray(obj["std_scale"], dtype=float),
        fingerprint=obj["fingerprint"],
        feature_names=tuple(names) if names else None,
    )
