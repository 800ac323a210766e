"""Hourly hostility series and shift/scale-invariant centroid clustering.

The distance between two series is the residual norm after fitting the best
integer shift (zero-padded, non-circular) and closed-form scale of one onto
the other, normalized by the reference norm.  Centroids are refreshed as the
smallest-eigenvalue eigenvector of the accumulated projection matrix of the
aligned, normalized members, computed by shifted power iteration.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .corpus import HOURS, Post

logger = logging.getLogger(__name__)

SERIES_HOURS = 240  # ten days of hourly bins

_EIG_TOL = 1e-10
_EIG_MAX_ITER = 10_000


@dataclass(frozen=True)
class HostilitySeries:
    """Hourly hostile-comment counts for one post (fixed 240 bins)."""

    post_id: str
    values: np.ndarray
    smoothed: bool = False

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (SERIES_HOURS,):
            raise ValueError(f"series must have exactly {SERIES_HOURS} bins")
        if (v < 0).any():
            raise ValueError("series values must be non-negative")
        object.__setattr__(self, "values", v)


def build_series(post: Post) -> HostilitySeries:
    """Bin hostile comments by hour since post creation; bin h covers
    [3600h, 3600(h+1)).  Requires a hostile comment within the first 10 days."""
    values = np.zeros(SERIES_HOURS)
    qualifying = False
    for c in post.comments:
        if not c.hostile:
            continue
        h = int(c.t // HOURS)
        if h < SERIES_HOURS:
            values[h] += 1.0
            qualifying = True
    if not qualifying:
        raise ValueError(
            f"post {post.id!r} has no hostile comment in the first {SERIES_HOURS} hours"
        )
    return HostilitySeries(post_id=post.id, values=values)


def smooth(series: HostilitySeries, width: int = 5, sigma: float = 1.0) -> HostilitySeries:
    """Gaussian smoothing with a `width`-tap kernel (sigma in bins), with
    truncated-edge renormalization so constants are preserved everywhere."""
    if series.smoothed:
        raise ValueError("series is already smoothed")
    if width < 1 or width % 2 == 0:
        raise ValueError("width must be a positive odd number")
    half = width // 2
    offsets = np.arange(-half, half + 1)
    kernel = np.exp(-0.5 * (offsets / sigma) ** 2)
    kernel /= kernel.sum()

    n = SERIES_HOURS
    out = np.zeros(n)
    norm = np.zeros(n)
    for off, w in zip(offsets, kernel):
        lo = max(0, -off)
        hi = min(n, n - off)
        out[lo:hi] += w * series.values[lo + off : hi + off]
        norm[lo:hi] += w
    out /= norm
    return HostilitySeries(post_id=series.post_id, values=out, smoothed=True)


# ---------------------------------------------------------------------------
# Distance
# ---------------------------------------------------------------------------


def shift_series(y: np.ndarray, q: int) -> np.ndarray:
    """Zero-padded shift; positive q moves the series later in time."""
    out = np.zeros_like(y)
    if q >= 0:
        out[q:] = y[: len(y) - q] if q else y
    else:
        out[:q] = y[-q:]
    return out


def ksc_distance(
    x: np.ndarray, y: np.ndarray, max_shift: int = 24
) -> tuple[float, int, float]:
    """min over integer shift q (|q| <= max_shift) and scale a of
    ||x - a*shift(y, q)|| / ||x||, with the closed-form optimal scale.

    Returns (distance, best shift, best scale).  Exact ties in distance break
    toward the smaller |q|, then the smaller q.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape:
        raise ValueError("series must have equal length")
    norm_x = float(np.linalg.norm(x))
    if norm_x == 0.0:
        raise ValueError("reference series has zero norm")

    best = None
    for q in range(-max_shift, max_shift + 1):
        ys = shift_series(y, q)
        denom = float(ys @ ys)
        if denom == 0.0:
            alpha = 0.0
        else:
            alpha = float(x @ ys) / denom
        d = float(np.linalg.norm(x - alpha * ys)) / norm_x
        key = (d, abs(q), q)
        if best is None or key < best[0]:
            best = (key, q, alpha)
    (_, _, _), q, alpha = best[0], best[1], best[2]
    return best[0][0], q, alpha


def _shift_matrix(mu: np.ndarray, max_shift: int) -> tuple[np.ndarray, np.ndarray]:
    qs = np.arange(-max_shift, max_shift + 1)
    return np.stack([shift_series(mu, int(q)) for q in qs]), qs


def _distances_to_centroid(
    X: np.ndarray, norms2: np.ndarray, mu: np.ndarray, max_shift: int
):
    """Squared distances (N,) and best shifts (N,) of rows of X to mu."""
    shifts, qs = _shift_matrix(mu, max_shift)
    denom = np.einsum("qt,qt->q", shifts, shifts)
    dots = X @ shifts.T
    with np.errstate(divide="ignore", invalid="ignore"):
        alpha = np.where(denom > 0.0, dots / denom, 0.0)
    d2 = 1.0 - np.where(norms2[:, None] > 0, alpha * dots / norms2[:, None], 0.0)
    np.clip(d2, 0.0, None, out=d2)
    best = np.argmin(d2, axis=1)
    return d2[np.arange(len(X)), best], qs[best]


@dataclass
class ClusterResult:
    k: int
    assignments: dict[str, int]
    centroids: np.ndarray
    objective: np.ndarray
    iterations: int
    objective_log: list[float]


def _smallest_eigvec(M_mul, trace: float, dim: int, v0: np.ndarray) -> np.ndarray:
    """Eigenvector of the smallest eigenvalue of PSD M via power iteration on
    trace(M)*I - M."""
    v = v0 / np.linalg.norm(v0)
    for _ in range(_EIG_MAX_ITER):
        w = trace * v - M_mul(v)
        nw = np.linalg.norm(w)
        if nw == 0.0:
            # v is exactly the top eigenvector of M; perturb deterministically.
            w = np.ones(dim)
            nw = np.linalg.norm(w)
        w /= nw
        if min(np.linalg.norm(w - v), np.linalg.norm(w + v)) < _EIG_TOL:
            v = w
            break
        v = w
    return v


def ksc_cluster(
    series: Sequence[HostilitySeries],
    k: int = 4,
    max_shift: int = 24,
    max_iter: int = 100,
    seed: int = 0,
) -> ClusterResult:
    """Alternate assignment, alignment, and eigenvector centroid refinement
    until assignments stabilize.  Deterministic given the seed (used only to
    pick the k initial member series).  Empty clusters are reseeded from the
    point farthest from its assigned centroid.
    """
    X = np.stack([s.values for s in series]).astype(float)
    ids = [s.post_id for s in series]
    norms2 = np.einsum("nt,nt->n", X, X)
    if (norms2 == 0).any():
        bad = ids[int(np.argmax(norms2 == 0))]
        raise ValueError(f"series {bad!r} has zero norm")
    n, dim = X.shape
    if k < 1 or k > n:
        raise ValueError(f"k must lie in [1, {n}]")

    rng = np.random.default_rng(seed)
    init = rng.choice(n, size=k, replace=False)
    centroids = X[init] / np.linalg.norm(X[init], axis=1, keepdims=True)

    assign = np.full(n, -1, dtype=np.int64)
    objective_log: list[float] = []
    iterations = 0
    for _ in range(max_iter):
        iterations += 1
        d2 = np.empty((n, k))
        qbest = np.empty((n, k), dtype=np.int64)
        for c in range(k):
            d2[:, c], qbest[:, c] = _distances_to_centroid(
                X, norms2, centroids[c], max_shift
            )
        new_assign = np.argmin(d2, axis=1)
        obj = float(d2[np.arange(n), new_assign].sum())
        objective_log.append(obj)

        reseeded = False
        for c in range(k):
            if not (new_assign == c).any():
                farthest = int(np.argmax(d2[np.arange(n), new_assign]))
                centroids[c] = X[farthest] / np.linalg.norm(X[farthest])
                logger.debug("reseeding empty cluster %d from %s", c, ids[farthest])
                reseeded = True

        if not reseeded and (new_assign == assign).all():
            assign = new_assign
            break
        assign = new_assign
        if reseeded:
            continue

        for c in range(k):
            members = np.flatnonzero(assign == c)
            aligned = []
            for i in members:
                shifted = shift_series(X[i], -int(qbest[i, c]))
                nrm = np.linalg.norm(shifted)
                if nrm > 0:
                    aligned.append(shifted / nrm)
            if not aligned:
                continue
            B = np.stack(aligned)
            m = len(aligned)
            trace = m * dim - m  # trace of sum(I - b b^T) for unit rows b

            def M_mul(v, B=B, m=m):
                return m * v - B.T @ (B @ v)

            mu = _smallest_eigvec(M_mul, trace, dim, centroids[c])
            if mu.sum() < 0:
                mu = -mu
            centroids[c] = mu

    per_cluster = np.zeros(k)
    d2 = np.empty((n, k))
    for c in range(k):
        d2[:, c], _ = _distances_to_centroid(X, norms2, centroids[c], max_shift)
    for i in range(n):
        per_cluster[assign[i]] += d2[i, assign[i]]

    return ClusterResult(
        k=k,
        assignments={ids[i]: int(assign[i]) for i in range(n)},
        centroids=centroids,
        objective=per_cluster,
        iterations=iterations,
        objective_log=objective_log,
    )


# ---------------------------------------------------------------------------
# Export
# ---------------------------------------------------------------------------


def _onset_hour(values: np.ndarray) -> float:
    nz = np.flatnonzero(values > 1e-9)
    return float(nz[0]) if len(nz) else float(SERIES_HOURS)


def export_clusters(
    result: ClusterResult,
    series: Sequence[HostilitySeries],
    outdir: str | Path,
) -> list[Path]:
    """Per-cluster CSVs of max-normalized member series plus the centroid,
    and a summary of member count, mean hostile volume, and mean onset hour."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    by_id = {s.post_id: s for s in series}
    written: list[Path] = []

    summaries = []
    for c in range(result.k):
        member_ids = sorted(
            pid for pid, cl in result.assignments.items() if cl == c
        )
        path = outdir / f"cluster-{c}.csv"
        with path.open("w", encoding="utf-8") as fh:
            fh.write("series,hour,value\n")
            centroid = result.centroids[c]
            cmax = np.abs(centroid).max()
            scaled = centroid / cmax if cmax > 0 else centroid
            for h in range(SERIES_HOURS):
                fh.write(f"__centroid__,{h},{scaled[h]!r}\n")
            for pid in member_ids:
                v = by_id[pid].values
                vmax = v.max()
                scaled = v / vmax if vmax > 0 else v
                for h in range(SERIES_HOURS):
                    fh.write(f"{pid},{h},{scaled[h]!r}\n")
        written.append(path)

        volumes = [by_id[pid].values.sum() for pid in member_ids]
        onsets = [_onset_hour(by_id[pid].values) for pid in member_ids]
        summaries.append(
            (
                c,
                len(member_ids),
                float(np.mean(volumes)) if volumes else 0.0,
                float(np.mean(onsets)) if onsets else 0.0,
                float(result.objective[c]),
            )
        )

    summary = outdir / "clusters-summary.csv"
    with summary.open("w", encoding="utf-8") as fh:
        fh.write("cluster,n_members,mean_volume,mean_onset_hour,objective\n")
        for row in summaries:
            fh.write(
                f"{row[0]},{row[1]},{row[2]!r},{row[3]!r},{row[4]!r}\n"
            )
    written.append(summary)

    log_path = outdir / "objective-log.csv"
    with log_path.open("w", encoding="utf-8") as fh:
        fh.write("iteration,objective\n")
        for i, obj in enumerate(result.objective_log):
            fh.write(f"{i},{obj!r}\n")
    written.append(log_path)
    return written
