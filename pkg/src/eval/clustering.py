from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass

import numpy as np
import pandas as pd
from scipy.optimize import linear_sum_assignment
from sklearn.cluster import kmeans_plusplus
from sklearn.metrics import confusion_matrix

from src.kernels.operators import as_matrix, pairwise_sq_dists


logger = logging.getLogger(__name__)

# exhaustive permutation search up to this K, assignment solver above
MAX_PERMUTATION_K = 8
INERTIA_RTOL = 1e-10


@dataclass(frozen=True)
class ClusteringResult:
    labels: np.ndarray
    centroids: np.ndarray
    inertia: float
    inertia_history: tuple[float, ...]
    n_iter: int
    empty: np.ndarray          # bool per cluster, True if no point is assigned
    converged: bool

    @property
    def n_clusters(self) -> int:
        return int(self.centroids.shape[0])

    @property
    def sizes(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.n_clusters)


@dataclass(frozen=True)
class ConfusionMatrix:
    counts: np.ndarray         # rows: reference label, columns: matched predicted label
    mapping: tuple[int, ...]   # mapping[i] = predicted label matched to reference label i
    accuracy: float

    @property
    def n(self) -> int:
        return int(self.counts.sum())

    @property
    def row_totals(self) -> np.ndarray:
        return self.counts.sum(axis=1)

    @property
    def col_totals(self) -> np.ndarray:
        return self.counts.sum(axis=0)

    def relabel(self, labels_pred: np.ndarray) -> np.ndarray:
        """Predicted labels rewritten in the reference labelling."""
        inverse = np.empty(len(self.mapping), dtype=int)
        inverse[list(self.mapping)] = np.arange(len(self.mapping))
        return inverse[np.asarray(labels_pred, dtype=int)]

    def to_frame(self) -> pd.DataFrame:
        k = self.counts.shape[0]
        return pd.DataFrame(
            self.counts,
            index=[f"ref_{i}" for i in range(k)],
            columns=[f"pred_{i}" for i in range(k)],
        )


def _assign(X: np.ndarray, centroids: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    D2 = pairwise_sq_dists(X, centroids)
    labels = np.argmin(D2, axis=1)              # first minimum: lowest centroid index wins ties
    return labels, D2[np.arange(X.shape[0]), labels]


def _update(X: np.ndarray, labels: np.ndarray, centroids: np.ndarray, point_d2: np.ndarray) -> np.ndarray:
    k = centroids.shape[0]
    out = centroids.copy()
    counts = np.bincount(labels, minlength=k)
    for c in np.flatnonzero(counts > 0):
        out[c] = X[labels == c].mean(axis=0)

    empty = np.flatnonzero(counts == 0)
    if empty.size:
        d2 = point_d2.copy()
        for c in empty:
            far = int(np.argmax(d2))
            out[c] = X[far]
            d2[far] = -1.0
            logger.warning(f"K-means: cluster {c} empty, re-seeded at point {far}")
    return out


def _lloyd(X: np.ndarray, K: int, seed: int, max_iter: int) -> ClusteringResult:
    centroids, _ = kmeans_plusplus(X, n_clusters=K, random_state=seed)
    centroids = np.asarray(centroids, dtype=float)

    history: list[float] = []
    labels = None
    converged = False

    def record(inertia: float) -> None:
        if history and inertia > history[-1] + INERTIA_RTOL * max(history[-1], 1.0):
            raise RuntimeError(f"K-means inertia increased from {history[-1]:.12g} to {inertia:.12g}")
        history.append(inertia)

    for _ in range(max_iter):
        new_labels, point_d2 = _assign(X, centroids)
        record(float(point_d2.sum()))
        if labels is not None and np.array_equal(new_labels, labels):
            converged = True
            break
        labels = new_labels
        centroids = _update(X, labels, centroids, point_d2)
    else:
        labels, point_d2 = _assign(X, centroids)
        record(float(point_d2.sum()))

    empty = np.bincount(labels, minlength=K) == 0
    return ClusteringResult(
        labels=labels,
        centroids=centroids,
        inertia=history[-1],
        inertia_history=tuple(history),
        n_iter=len(history),
        empty=empty,
        converged=converged,
    )


def kmeans(points: np.ndarray, K: int, seed: int = 0, max_iter: int = 300, n_init: int = 1) -> ClusteringResult:
    """
    Euclidean K-means: k-means++ seeding, Lloyd iterations to an assignment fixpoint or
    max_iter. With n_init > 1 the run with the lowest inertia is kept (seeds seed, seed+1, ...).
    """
    X = as_matrix(points, "points")
    n = X.shape[0]
    if K < 1:
        raise ValueError(f"K must be >= 1, got {K}")
    if K > n:
        raise ValueError(f"K={K} exceeds the number of points N={n}")
    if max_iter < 1 or n_init < 1:
        raise ValueError("max_iter and n_init must be >= 1")
    if not np.all(np.isfinite(X)):
        raise ValueError("points contain non-finite values")

    best: ClusteringResult | None = None
    for r in range(n_init):
        res = _lloyd(X, int(K), int(seed) + r, int(max_iter))
        logger.debug(f"K-means run {r}: inertia={res.inertia:.6g} iters={res.n_iter} converged={res.converged}")
        if best is None or res.inertia < best.inertia:
            best = res
    return best


def _best_mapping(counts: np.ndarray) -> tuple[int, ...]:
    k = counts.shape[0]
    if k <= MAX_PERMUTATION_K:
        best, best_mass = None, -1
        for perm in itertools.permutations(range(k)):
            mass = int(counts[np.arange(k), perm].sum())
            if mass > best_mass:
                best, best_mass = perm, mass
        return tuple(int(p) for p in best)
    _, cols = linear_sum_assignment(counts, maximize=True)
    return tuple(int(c) for c in cols)


def confusion_from_counts(counts: np.ndarray) -> ConfusionMatrix:
    """Label-matched confusion matrix and accuracy from a raw K x K count table."""
    c = np.asarray(counts)
    if c.ndim != 2 or c.shape[0] != c.shape[1] or c.shape[0] == 0:
        raise ValueError(f"counts must be a non-empty square matrix, got shape {c.shape}")
    if np.any(c < 0) or not np.all(c == np.round(c)):
        raise ValueError("counts must be non-negative integers")
    c = c.astype(np.int64)
    total = int(c.sum())
    if total == 0:
        raise ValueError("counts are all zero")

    mapping = _best_mapping(c)
    matched = c[:, list(mapping)]
    return ConfusionMatrix(counts=matched, mapping=mapping, accuracy=float(np.trace(matched)) / total)


def cluster_agreement(labels_ref: np.ndarray, labels_pred: np.ndarray, K: int) -> ConfusionMatrix:
    ref = np.asarray(labels_ref).ravel()
    pred = np.asarray(labels_pred).ravel()
    if ref.shape != pred.shape:
        raise ValueError(f"Label vectors differ in length: {ref.size} vs {pred.size}")
    if ref.size == 0:
        raise ValueError("Empty label vectors")
    for name, lab in (("labels_ref", ref), ("labels_pred", pred)):
        if lab.min() < 0 or lab.max() >= K:
            raise ValueError(f"{name} outside [0, {K})")

    counts = confusion_matrix(ref, pred, labels=list(range(K)))
    cm = confusion_from_counts(counts)
    logger.info(f"Cluster agreement: accuracy={cm.accuracy:.5f} over {cm.n} points, mapping={cm.mapping}")
    return cm
