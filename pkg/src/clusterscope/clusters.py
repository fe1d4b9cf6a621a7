"""Discrete clustering: k-means, agglomerative merging, and cluster profiles.

k-means uses seeded k-means++ initialization and Lloyd iterations so every
fit is reproducible; agglomerative clustering runs the Lance-Williams
recurrence for all four linkages (O(n^3), fine at desk scale). Both fits
accept a cooperative cancellation callback checked once per iteration.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import EngineError, ParameterError, ValidationError
from .projection import pairwise_distances
from .table import TableView, normalize

KMEANS = "kmeans"
AGGLOMERATIVE = "agglomerative"

LINKAGES = ("single", "complete", "average", "ward")


class OperationCancelled(EngineError):
    """Raised when a cancellation callback asks a running fit to stop."""


@dataclass(frozen=True)
class ClusteringModel:
    method: str
    k: int
    distance: str
    labels: np.ndarray  # n ints in [0, k)
    linkage: str | None = None
    centroids: np.ndarray | None = None  # kmeans only, k x d
    merge_history: tuple[tuple[int, int, float], ...] | None = None
    cluster_order: tuple[int, ...] = ()
    seed: int | None = None
    n_iter: int = 0
    # objective after init and after every Lloyd iteration (kmeans only):
    # squared-euclidean WCSS, or total L1 cost under manhattan distance.
    iteration_objectives: tuple[float, ...] = ()
    n_features: int = 0

    def __post_init__(self):
        self.labels.setflags(write=False)
        if self.centroids is not None:
            self.centroids.setflags(write=False)

    @property
    def n_rows(self) -> int:
        return len(self.labels)

    def cluster_sizes(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.k)

    def to_json_dict(self) -> dict:
        return {
            "method": self.method,
            "k": self.k,
            "params": {
                "distance": self.distance,
                "linkage": self.linkage,
                "seed": self.seed,
            },
            "labels": self.labels.tolist(),
            "centroids": None if self.centroids is None else self.centroids.tolist(),
            "merges": (
                None
                if self.merge_history is None
                else [[a, b, h] for a, b, h in self.merge_history]
            ),
            "order": list(self.cluster_order),
        }


@dataclass(frozen=True)
class ClusterProfile:
    """Per-cluster means of minmax-normalized features (the heatmap).

    ``matrix`` is features x clusters; columns follow ``cluster_order``
    (descending size), rows follow the view's feature order.
    """

    matrix: np.ndarray
    feature_names: tuple[str, ...]
    cluster_ids: tuple[int, ...]
    sizes: tuple[int, ...]

    def __post_init__(self):
        self.matrix.setflags(write=False)

    def to_json_dict(self) -> dict:
        return {
            "features": list(self.feature_names),
            "cluster_ids": list(self.cluster_ids),
            "sizes": list(self.sizes),
            "matrix": self.matrix.tolist(),
        }


def _order_by_size(labels: np.ndarray, k: int) -> tuple[int, ...]:
    sizes = np.bincount(labels, minlength=k)
    return tuple(sorted(range(k), key=lambda c: (-sizes[c], c)))


def _point_centroid_distances(
    X: np.ndarray, centroids: np.ndarray, distance: str
) -> np.ndarray:
    """n x k distances between points and centroids."""
    if distance == "euclidean":
        diff = X[:, None, :] - centroids[None, :, :]
        return np.sqrt(np.sum(diff * diff, axis=2))
    if distance == "manhattan":
        return np.abs(X[:, None, :] - centroids[None, :, :]).sum(axis=2)
    raise ParameterError(f"kmeans supports euclidean or manhattan, got {distance!r}")


def _kmeanspp_init(
    X: np.ndarray, k: int, distance: str, rng: np.random.Generator
) -> np.ndarray:
    n = X.shape[0]
    centroids = np.empty((k, X.shape[1]))
    first = int(rng.integers(n))
    centroids[0] = X[first]
    closest = _point_centroid_distances(X, centroids[:1], distance)[:, 0]
    for j in range(1, k):
        weights = closest**2
        total = weights.sum()
        if total <= 0:
            # all remaining points coincide with a centroid: pick uniformly
            idx = int(rng.integers(n))
        else:
            idx = int(rng.choice(n, p=weights / total))
        centroids[j] = X[idx]
        dist_new = _point_centroid_distances(X, centroids[j : j + 1], distance)[:, 0]
        closest = np.minimum(closest, dist_new)
    return centroids


def _update_centroids(
    X: np.ndarray, labels: np.ndarray, k: int, distance: str
) -> np.ndarray:
    centroids = np.empty((k, X.shape[1]))
    for c in range(k):
        members = X[labels == c]
        centroids[c] = (
            np.median(members, axis=0) if distance == "manhattan" else members.mean(axis=0)
        )
    return centroids


def _repair_empty_clusters(
    labels: np.ndarray, dist_to_own: np.ndarray, k: int
) -> np.ndarray:
    """Reassign the farthest-from-centroid point into each empty cluster."""
    labels = labels.copy()
    sizes = np.bincount(labels, minlength=k)
    for c in range(k):
        if sizes[c] > 0:
            continue
        donors = np.flatnonzero(sizes[labels] >= 2)
        stolen = donors[int(np.argmax(dist_to_own[donors]))]
        sizes[labels[stolen]] -= 1
        labels[stolen] = c
        sizes[c] += 1
    return labels


def kmeans(
    X: np.ndarray,
    k: int,
    distance: str = "euclidean",
    seed: int = 0,
    max_iter: int = 300,
    cancel: Callable[[], bool] | None = None,
) -> ClusteringModel:
    """Seeded k-means++ followed by Lloyd iterations to a label fixpoint.

    Manhattan distance uses per-coordinate median centroids; empty clusters
    are repaired by stealing the point farthest from its own centroid.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise ValidationError("kmeans input must be a 2-D matrix")
    n = X.shape[0]
    if k <= 0:
        raise ParameterError(f"k must be positive, got {k}")
    if k > n:
        raise ParameterError(f"k={k} exceeds the {n} available rows")
    if not np.all(np.isfinite(X)):
        raise ValidationError("kmeans input contains non-finite values")

    rng = np.random.default_rng(seed)
    centroids = _kmeanspp_init(X, k, distance, rng)

    def objective(labels: np.ndarray, cents: np.ndarray) -> float:
        dist = _point_centroid_distances(X, cents, distance)
        own = dist[np.arange(n), labels]
        return float(np.sum(own**2) if distance == "euclidean" else np.sum(own))

    dist = _point_centroid_distances(X, centroids, distance)
    labels = np.argmin(dist, axis=1)
    labels = _repair_empty_clusters(labels, dist[np.arange(n), labels], k)
    history = [objective(labels, centroids)]

    n_iter = 0
    for n_iter in range(1, max_iter + 1):
        if cancel is not None and cancel():
            raise OperationCancelled("kmeans cancelled")
        centroids = _update_centroids(X, labels, k, distance)
        dist = _point_centroid_distances(X, centroids, distance)
        new_labels = np.argmin(dist, axis=1)
        new_labels = _repair_empty_clusters(
            new_labels, dist[np.arange(n), new_labels], k
        )
        history.append(objective(new_labels, centroids))
        if np.array_equal(new_labels, labels):
            labels = new_labels
            break
        labels = new_labels

    return ClusteringModel(
        method=KMEANS,
        k=k,
        distance=distance,
        labels=labels,
        centroids=centroids,
        cluster_order=_order_by_size(labels, k),
        seed=seed,
        n_iter=n_iter,
        iteration_objectives=tuple(history),
        n_features=X.shape[1],
    )


def wcss(X: np.ndarray, labels: np.ndarray, centroids: np.ndarray) -> float:
    """Within-cluster sum of squared euclidean distances to own centroid."""
    X = np.asarray(X, dtype=float)
    labels = np.asarray(labels)
    centroids = np.asarray(centroids, dtype=float)
    if X.shape[0] != labels.shape[0] or X.shape[1] != centroids.shape[1]:
        raise ValidationError("wcss: inconsistent shapes")
    if labels.min(initial=0) < 0 or labels.max(initial=0) >= centroids.shape[0]:
        raise ValidationError("wcss: label outside centroid range")
    diff = X - centroids[labels]
    return float(np.sum(diff * diff))


def _lance_williams_update(
    linkage: str, d_ak: float, d_bk: float, d_ab: float, na: int, nb: int, nk: int
) -> float:
    if linkage == "single":
        return min(d_ak, d_bk)
    if linkage == "complete":
        return max(d_ak, d_bk)
    if linkage == "average":
        return (na * d_ak + nb * d_bk) / (na + nb)
    # ward operates on squared distances
    total = na + nb + nk
    return ((na + nk) * d_ak + (nb + nk) * d_bk - nk * d_ab) / total


def agglomerative(
    X: np.ndarray,
    k: int,
    distance: str = "euclidean",
    linkage: str = "single",
    cancel: Callable[[], bool] | None = None,
) -> ClusteringModel:
    """Bottom-up merging via the Lance-Williams recurrence, cut at k clusters.

    Merge history uses scipy-style ids: rows are 0..n-1, the i-th merge
    creates cluster n+i. Labels come from applying the first n-k merges and
    numbering components by first row occurrence.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise ValidationError("agglomerative input must be a 2-D matrix")
    n = X.shape[0]
    if k <= 0:
        raise ParameterError(f"k must be positive, got {k}")
    if k > n:
        raise ParameterError(f"k={k} exceeds the {n} available rows")
    if linkage not in LINKAGES:
        raise ParameterError(f"unknown linkage {linkage!r}")
    if linkage == "ward" and distance != "euclidean":
        raise ParameterError("ward linkage requires euclidean distance")

    D = pairwise_distances(X, distance)
    work = D**2 if linkage == "ward" else D.copy()
    np.fill_diagonal(work, np.inf)

    ids = list(range(n))
    sizes = [1] * n
    active = [True] * n
    merges: list[tuple[int, int, float]] = []
    next_id = n

    for step in range(n - 1):
        if cancel is not None and cancel():
            raise OperationCancelled("agglomerative clustering cancelled")
        flat = int(np.argmin(work))
        i, j = divmod(flat, work.shape[0])
        if i > j:
            i, j = j, i
        height = work[i, j]
        if linkage == "ward":
            height = float(np.sqrt(height))
        merges.append((min(ids[i], ids[j]), max(ids[i], ids[j]), float(height)))

        d_ab = work[i, j]
        for m in range(work.shape[0]):
            if not active[m] or m in (i, j):
                continue
            work[i, m] = work[m, i] = _lance_williams_update(
                linkage, work[i, m], work[j, m], d_ab, sizes[i], sizes[j], sizes[m]
            )
        sizes[i] += sizes[j]
        ids[i] = next_id
        next_id += 1
        active[j] = False
        work[j, :] = np.inf
        work[:, j] = np.inf

    # Cut: apply the first n-k merges with union-find over original rows.
    parent = list(range(2 * n - 1))

    def find(a: int) -> int:
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for step in range(n - k):
        a, b, _ = merges[step]
        new = n + step
        parent[find(a)] = new
        parent[find(b)] = new

    labels = np.empty(n, dtype=int)
    remap: dict[int, int] = {}
    for row in range(n):
        root = find(row)
        if root not in remap:
            remap[root] = len(remap)
        labels[row] = remap[root]

    return ClusteringModel(
        method=AGGLOMERATIVE,
        k=k,
        distance=distance,
        linkage=linkage,
        labels=labels,
        merge_history=tuple(merges),
        cluster_order=_order_by_size(labels, k),
        n_features=X.shape[1],
    )


def cluster_profile(model: ClusteringModel, view: TableView) -> ClusterProfile:
    """Heatmap matrix: per-cluster means of the minmax-normalized view."""
    if model.n_rows != view.n_selected:
        raise ValidationError(
            f"model fitted on {model.n_rows} rows, view selects {view.n_selected}"
        )
    if model.n_features and model.n_features != len(view.feature_subset):
        raise ValidationError(
            f"model fitted on {model.n_features} features, "
            f"view selects {len(view.feature_subset)}"
        )
    N = normalize(view, "minmax")
    order = model.cluster_order or _order_by_size(model.labels, model.k)
    matrix = np.column_stack([N[model.labels == c].mean(axis=0) for c in order])
    sizes = model.cluster_sizes()
    return ClusterProfile(
        matrix=matrix,
        feature_names=tuple(view.feature_subset),
        cluster_ids=tuple(order),
        sizes=tuple(int(sizes[c]) for c in order),
    )
