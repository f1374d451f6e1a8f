"""Clustering cost, demographic balance and Pareto dominance."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .datasets import Dataset
from .errors import DegenerateClusteringError


@dataclass
class ClusterState:
    """Mutable clustering owned by one update sequence.

    ``counts`` and ``group_counts`` are exact tallies of ``labels``.
    ``centroids`` may drift from the exact means under streaming updates.
    ``seen`` holds the lifetime per-cluster counters of the mini-batch rule.
    """

    labels: np.ndarray
    centroids: np.ndarray
    counts: np.ndarray
    group_counts: np.ndarray
    seen: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.seen is None:
            self.seen = np.zeros(len(self.counts), dtype=np.int64)

    @property
    def K(self) -> int:
        return self.centroids.shape[0]

    def copy(self) -> "ClusterState":
        return ClusterState(self.labels.copy(), self.centroids.copy(), self.counts.copy(),
                            self.group_counts.copy(), self.seen.copy())

    @classmethod
    def from_labels(cls, ds: Dataset, labels, K: int) -> "ClusterState":
        """Tallies and exact centroids for a labeling; lifetime counters start at 0."""
        labels = np.asarray(labels, dtype=np.int64).copy()
        counts = np.bincount(labels, minlength=K).astype(np.int64)
        gc = group_tallies(ds.group_of, labels, K, ds.J)
        sums = _cluster_sums(ds.points, labels, K)
        with np.errstate(invalid="ignore", divide="ignore"):
            centroids = sums / counts[:, None]
        # an empty cluster has no mean; park it at the data mean until repaired
        centroids[counts == 0] = ds.points.mean(axis=0)
        return cls(labels, centroids, counts, gc)

    def check(self, ds: Dataset) -> None:
        """Raise AssertionError if tallies disagree with labels."""
        ref = ClusterState.from_labels(ds, self.labels, self.K)
        assert np.array_equal(ref.counts, self.counts), "counts out of sync"
        assert np.array_equal(ref.group_counts, self.group_counts), "group_counts out of sync"
        assert self.counts.sum() == ds.N


def _cluster_sums(points: np.ndarray, labels: np.ndarray, K: int) -> np.ndarray:
    return np.stack([np.bincount(labels, weights=points[:, i], minlength=K)
                     for i in range(points.shape[1])], axis=1)


def group_tallies(group_of: np.ndarray, labels: np.ndarray, K: int, J: int) -> np.ndarray:
    """K x J matrix of per-cluster group counts."""
    flat = np.asarray(labels, dtype=np.int64) * J + group_of
    return np.bincount(flat, minlength=K * J).reshape(K, J)


def exact_centroids(points: np.ndarray, labels: np.ndarray, K: int) -> np.ndarray:
    counts = np.bincount(labels, minlength=K)
    if np.any(counts == 0):
        empty = np.flatnonzero(counts == 0).tolist()
        raise DegenerateClusteringError(f"empty cluster(s) {empty}: cost and balance undefined")
    return _cluster_sums(points, labels, K) / counts[:, None]


def cost_of_labels(points: np.ndarray, labels: np.ndarray, K: int) -> float:
    """Mean squared distance of each point to the exact mean of its cluster."""
    labels = np.asarray(labels, dtype=np.int64)
    c = exact_centroids(points, labels, K)
    diff = points - c[labels]
    return float(np.einsum("ij,ij->", diff, diff) / points.shape[0])


def clustering_cost(ds: Dataset, state: ClusterState) -> float:
    return cost_of_labels(ds.points, state.labels, state.K)


def _ratio(num: float, den: float) -> float:
    if den == 0:
        return np.inf if num > 0 else np.nan
    return num / den


def cluster_balance(group_row) -> float:
    """Smallest ratio ``row[j] / row[j']`` over ordered pairs ``j != j'``.

    A cluster missing any group has balance 0.
    """
    row = np.asarray(group_row)
    if row.sum() == 0:
        raise DegenerateClusteringError("balance of an empty cluster is undefined")
    if row.size < 2:
        return 0.0
    return float(row.min() / row.max())


def _critical_pair(row: np.ndarray) -> tuple[float, tuple[int, int]]:
    best, pair = np.inf, (0, 1)
    J = row.size
    for j in range(J):
        for jp in range(J):
            if j == jp:
                continue
            r = _ratio(row[j], row[jp])
            # 0/0 carries no information about this pair
            if np.isnan(r):
                continue
            if r < best:
                best, pair = r, (j, jp)
    return best, pair


def overall_balance(state: ClusterState) -> tuple[float, int, tuple[int, int]]:
    """``(b, l, (j, j'))``: minimum cluster balance, the cluster attaining it,
    and the ordered group pair with ``row[j] / row[j']`` equal to it.

    Group ``j`` is under-represented relative to ``j'`` in cluster ``l``.
    Ties go to the lowest cluster index, then the lexicographically smallest pair.
    """
    gc = state.group_counts
    sizes = gc.sum(axis=1)
    if np.any(sizes == 0):
        raise DegenerateClusteringError("balance undefined with an empty cluster")
    bal = gc.min(axis=1) / gc.max(axis=1)
    l = int(np.argmin(bal))
    _, pair = _critical_pair(gc[l])
    return float(bal[l]), l, pair


def balance_of_labels(group_of: np.ndarray, labels: np.ndarray, K: int, J: int) -> float:
    gc = group_tallies(group_of, labels, K, J)
    if np.any(gc.sum(axis=1) == 0):
        raise DegenerateClusteringError("balance undefined with an empty cluster")
    return float((gc.min(axis=1) / gc.max(axis=1)).min())


@dataclass(frozen=True)
class ParetoPoint:
    cost: float
    balance: float
    labels: bytes
    K: int
    seed: int = 0
    n_a: int = 0
    n_b: int = 0
    iteration: int = 0
    uid: int = 0

    def label_array(self) -> np.ndarray:
        dtype = np.uint8 if self.K <= 256 else np.uint16
        return np.frombuffer(self.labels, dtype=dtype).astype(np.int64)

    @staticmethod
    def pack(labels: np.ndarray, K: int) -> bytes:
        dtype = np.uint8 if K <= 256 else np.uint16
        return np.asarray(labels, dtype=dtype).tobytes()

    @classmethod
    def from_labels(cls, ds: Dataset, labels, K: int, **provenance) -> "ParetoPoint":
        labels = np.asarray(labels, dtype=np.int64)
        return cls(
            cost=cost_of_labels(ds.points, labels, K),
            balance=balance_of_labels(ds.group_of, labels, K, ds.J),
            labels=cls.pack(labels, K),
            K=K,
            **provenance,
        )

    @property
    def objectives(self) -> tuple[float, float]:
        return self.cost, self.balance


def dominates(p, q) -> bool:
    """True when ``p`` has strictly lower cost AND strictly higher balance than ``q``.

    Accepts ParetoPoints or plain ``(cost, balance)`` pairs.
    """
    pc, pb = p.objectives if isinstance(p, ParetoPoint) else p
    qc, qb = q.objectives if isinstance(q, ParetoPoint) else q
    return pc < qc and pb > qb
