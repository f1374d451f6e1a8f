"""Mini-batch k-means updates on a :class:`ClusterState`."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .datasets import Dataset
from .errors import ConfigError, DegenerateClusteringError
from .metrics import ClusterState, exact_centroids


@dataclass(frozen=True)
class KmeansStepReport:
    points_moved: int
    batch_size: int


def init_state(ds: Dataset, K: int, rng: np.random.Generator) -> ClusterState:
    """Uniform random labels, repaired until every cluster is nonempty."""
    if K < 2:
        raise ConfigError("K must be >= 2")
    if K > ds.N:
        raise ConfigError(f"K={K} exceeds the number of points N={ds.N}")
    if ds.J < 2:
        raise ConfigError("J must be >= 2")
    labels = rng.integers(0, K, size=ds.N)
    counts = np.bincount(labels, minlength=K)
    for k in np.flatnonzero(counts == 0):
        donors = np.flatnonzero(counts[labels] > 1)
        p = donors[rng.integers(donors.size)]
        counts[labels[p]] -= 1
        labels[p] = k
        counts[k] += 1
    return ClusterState.from_labels(ds, labels, K)


def closest_center(x: np.ndarray, centroids: np.ndarray) -> int:
    """Index of the nearest centroid in squared Euclidean distance; ties -> lowest index."""
    diff = centroids - x
    return int(np.argmin(np.einsum("kd,kd->k", diff, diff)))


def _move(ds: Dataset, state: ClusterState, p: int, new: int) -> None:
    old = state.labels[p]
    g = ds.group_of[p]
    state.counts[old] -= 1
    state.group_counts[old, g] -= 1
    state.counts[new] += 1
    state.group_counts[new, g] += 1
    state.labels[p] = new


def repair_empty(ds: Dataset, state: ClusterState) -> int:
    """Fill each empty cluster with the point farthest from the largest cluster's centroid.

    Returns the number of points moved.
    """
    moved = 0
    for k in np.flatnonzero(state.counts == 0):
        big = int(np.argmax(state.counts))
        members = np.flatnonzero(state.labels == big)
        diff = ds.points[members] - state.centroids[big]
        p = int(members[np.argmax(np.einsum("nd,nd->n", diff, diff))])
        _move(ds, state, p, int(k))
        state.centroids[k] = ds.points[p]
        moved += 1
    return moved


def minibatch_kmeans_step(ds: Dataset, state: ClusterState, n_a: int,
                          rng: np.random.Generator) -> KmeansStepReport:
    """One k-means phase: sample ``n_a`` distinct points, send each to its
    closest center, and pull that center toward it at rate 1/(lifetime count).
    """
    if n_a < 1:
        raise ConfigError("n_a must be >= 1")
    n_a = min(n_a, ds.N)
    batch = rng.choice(ds.N, size=n_a, replace=False)
    moved = 0
    X = ds.points
    for p in batch:
        x = X[p]
        k = closest_center(x, state.centroids)
        if k != state.labels[p]:
            _move(ds, state, p, k)
            moved += 1
        state.seen[k] += 1
        state.centroids[k] += (x - state.centroids[k]) / state.seen[k]
    if np.any(state.counts == 0):
        repair_empty(ds, state)
    return KmeansStepReport(points_moved=moved, batch_size=n_a)


def exact_recenter(ds: Dataset, state: ClusterState) -> ClusterState:
    """Set every centroid to the exact mean of its assigned points (in place)."""
    if np.any(state.counts == 0):
        raise DegenerateClusteringError("cannot recenter an empty cluster")
    state.centroids[:] = exact_centroids(ds.points, state.labels, state.K)
    return state

