"""Swap-based balance improvement between the bottleneck cluster and a target cluster."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from .datasets import Dataset
from .errors import ConfigError
from .metrics import ClusterState, overall_balance


@dataclass(frozen=True)
class SwapPolicy:
    """How swaps pick the target cluster and how many candidates they score.

    The candidate pool grows by ``batch_growth`` every ``growth_every``
    iterations, capped by the number of eligible points.
    """

    target_mode: Literal["global", "local"] = "local"
    candidate_batch: int = 4
    batch_growth: int = 1
    growth_every: int = 50

    def __post_init__(self):
        if self.target_mode not in ("global", "local"):
            raise ConfigError(f"target_mode must be 'global' or 'local', got {self.target_mode!r}")
        if self.candidate_batch < 1:
            raise ConfigError("candidate_batch must be >= 1")
        if self.batch_growth < 0 or self.growth_every < 1:
            raise ConfigError("batch_growth must be >= 0 and growth_every >= 1")

    def batch_at(self, iteration: int) -> int:
        return self.candidate_batch + self.batch_growth * (max(iteration, 0) // self.growth_every)


@dataclass(frozen=True)
class SwapReport:
    performed: bool
    p: int = -1
    p_prime: int = -1
    l: int = -1
    h: int = -1
    pair: tuple[int, int] = (-1, -1)
    reason: str = ""


def _extreme_ratio(a: int, b: int) -> float:
    if a == 0 and b == 0:
        return -np.inf
    if a == 0 or b == 0:
        return np.inf
    return max(a / b, b / a)


def select_target_cluster(state: ClusterState, l: int, pair: tuple[int, int],
                          mode: str = "local") -> int:
    """Cluster to trade points with.

    ``global``: the cluster whose (j, j') ratio is most extreme in either
    direction; if that is ``l`` itself, the best other cluster.
    ``local``: the cluster whose centroid is nearest to ``l``'s.
    """
    K = state.K
    if K < 2:
        raise ConfigError("need at least two clusters to swap")
    if mode == "global":
        j, jp = pair
        scores = np.array([_extreme_ratio(int(state.group_counts[k, j]),
                                          int(state.group_counts[k, jp])) for k in range(K)])
        h = int(np.argmax(scores))
        if h == l:
            scores[l] = -np.inf
            h = int(np.argmax(scores))
            if h == l:
                h = 1 if l == 0 else 0
        return h
    if mode == "local":
        diff = state.centroids - state.centroids[l]
        dist = np.einsum("kd,kd->k", diff, diff)
        dist[l] = np.inf
        return int(np.argmin(dist))
    raise ConfigError(f"unknown target mode {mode!r}")


def _closest_candidate(ds: Dataset, pool: np.ndarray, m: int, target: np.ndarray,
                       rng: np.random.Generator) -> int:
    cand = pool if m >= pool.size else np.sort(rng.choice(pool, size=m, replace=False))
    diff = ds.points[cand] - target
    return int(cand[np.argmin(np.einsum("nd,nd->n", diff, diff))])


def swap_step(ds: Dataset, state: ClusterState, policy: SwapPolicy,
              rng: np.random.Generator, iteration: int = 0) -> SwapReport:
    """Trade an over-represented point of the bottleneck cluster for an
    under-represented point of the target cluster.

    Cluster sizes never change. An infeasible swap leaves ``state`` untouched.
    """
    _, l, (j, jp) = overall_balance(state)
    h = select_target_cluster(state, l, (j, jp), policy.target_mode)
    out_pool = np.flatnonzero((state.labels == l) & (ds.group_of == jp))
    in_pool = np.flatnonzero((state.labels == h) & (ds.group_of == j))
    if out_pool.size == 0 or in_pool.size == 0:
        return SwapReport(False, l=l, h=h, pair=(j, jp), reason="infeasible swap")

    m = policy.batch_at(iteration)
    p = _closest_candidate(ds, out_pool, m, state.centroids[h], rng)
    pp = _closest_candidate(ds, in_pool, m, state.centroids[l], rng)

    state.labels[p] = h
    state.labels[pp] = l
    gc = state.group_counts
    gc[l, jp] -= 1
    gc[l, j] += 1
    gc[h, j] -= 1
    gc[h, jp] += 1
    c = state.centroids
    c[l] += (ds.points[pp] - c[l]) / state.counts[l]
    c[h] += (ds.points[p] - c[h]) / state.counts[h]
    return SwapReport(True, p=p, p_prime=pp, l=l, h=h, pair=(j, jp))
