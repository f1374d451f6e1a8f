"""Stochastic alternating fair k-means and the list-based Pareto front driver."""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from .datasets import Dataset
from .errors import ConfigError
from .fair_swap import SwapPolicy, swap_step
from .kmeans_core import init_state, minibatch_kmeans_step
from .metrics import ClusterState, ParetoPoint

log = logging.getLogger(__name__)

DEFAULT_PAIRS = ((4, 0), (3, 1), (1, 3), (0, 4))


@dataclass(frozen=True)
class AlternationConfig:
    n_a: int
    n_b: int
    q: int = 1
    policy: SwapPolicy = SwapPolicy()

    def __post_init__(self):
        if self.n_a < 0 or self.n_b < 0 or self.n_a + self.n_b < 1:
            raise ConfigError("need n_a, n_b >= 0 with n_a + n_b >= 1")
        if self.q < 1:
            raise ConfigError("q must be >= 1")


def safairkm_run(ds: Dataset, state: ClusterState, config: AlternationConfig,
                 rng: np.random.Generator, start_iteration: int = 0,
                 on_iteration: Callable[[int, ClusterState], None] | None = None) -> ClusterState:
    """Advance ``state`` in place by ``config.q`` alternating iterations.

    Each iteration is one mini-batch k-means step over ``n_a`` points
    followed by ``n_b`` single swaps; the bottleneck cluster is re-identified
    before every swap.
    """
    for i in range(config.q):
        it = start_iteration + i
        if config.n_a:
            minibatch_kmeans_step(ds, state, config.n_a, rng)
        for _ in range(config.n_b):
            swap_step(ds, state, config.policy, rng, iteration=it)
        if on_iteration is not None:
            on_iteration(it, state)
    return state


def _key(p):
    return p.objectives if isinstance(p, ParetoPoint) else (float(p[0]), float(p[1]))


def filter_nondominated(points: Sequence, eps: float = 0.0, mode: str = "strict") -> list:
    """Points not dominated by any other point.

    ``mode="strict"`` removes a point only when another has strictly lower
    cost AND strictly higher balance. ``mode="weak"`` is the usual Pareto
    order: no worse in both and better in one. Exact duplicates collapse onto
    their first occurrence. With ``eps > 0``, a survivor within ``eps`` of an
    earlier survivor in both objectives is also dropped. Survivors keep their
    input order.
    """
    if mode not in ("strict", "weak"):
        raise ConfigError(f"dominance mode must be 'strict' or 'weak', got {mode!r}")
    first: dict[tuple[float, float], int] = {}
    for i, p in enumerate(points):
        first.setdefault(_key(p), i)

    keep: list[int] = []
    if mode == "weak":
        best = -np.inf
        for (cost, bal), i in sorted(first.items(), key=lambda kv: (kv[0][0], -kv[0][1])):
            if bal > best:
                keep.append(i)
                best = bal
    else:
        uniq = sorted(first.items(), key=lambda kv: kv[0][0])
        best_lower = -np.inf  # max balance among strictly cheaper points
        i = 0
        while i < len(uniq):
            cost = uniq[i][0][0]
            end = i
            group_max = -np.inf
            while end < len(uniq) and uniq[end][0][0] == cost:
                bal = uniq[end][0][1]
                if not best_lower > bal:
                    keep.append(uniq[end][1])
                group_max = max(group_max, bal)
                end += 1
            best_lower = max(best_lower, group_max)
            i = end
    keep.sort()
    out = [points[k] for k in keep]
    if eps > 0:
        merged: list = []
        for p in out:
            c, b = _key(p)
            if not any(abs(c - mc) <= eps and abs(b - mb) <= eps for mc, mb in map(_key, merged)):
                merged.append(p)
        out = merged
    return out


def child_seed(master_seed: int, *key: int) -> int:
    """Stream seed for one task; depends only on the master seed and the task key."""
    ss = np.random.SeedSequence(master_seed, spawn_key=tuple(int(k) for k in key))
    return int(ss.generate_state(1, np.uint64)[0])


@dataclass
class FrontArchive:
    points: list[ParetoPoint]
    budget: int = 1500
    iteration: int = 0
    master_seed: int = 0
    history: list[dict] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.points)

    def sorted_points(self) -> list[ParetoPoint]:
        return sorted(self.points, key=lambda p: (p.cost, -p.balance, p.uid))

    def front(self) -> list[ParetoPoint]:
        """The Pareto-optimal subset of the list, by ascending cost.

        Under strict pruning the list can hold several points of equal
        balance; only the cheapest of them is on the front.
        """
        return sorted(filter_nondominated(self.points, mode="weak"),
                      key=lambda p: (p.cost, -p.balance, p.uid))


_INIT_TAG = 0
_STEP_TAG = 1


def pareto_front_run(ds: Dataset, K: int, pairs: Iterable[tuple[int, int]] = DEFAULT_PAIRS,
                     n_init: int = 30, q: int = 1, budget: int = 1500, max_iter: int = 400,
                     master_seed: int = 0, policy: SwapPolicy = SwapPolicy(),
                     threads: int = 1, dedupe_eps: float = 0.0, dominance: str = "weak",
                     on_iteration: Callable[[FrontArchive], None] | None = None) -> FrontArchive:
    """Evolve a list of labelings toward the cost/balance trade-off front.

    Every outer iteration advances each archived labeling under every
    ``(n_a, n_b)`` pair for ``q`` iterations, merges the children, and
    prunes dominated points (``dominance`` selects the order, see
    :func:`filter_nondominated`). Stops once the archive exceeds ``budget`` or
    after ``max_iter`` outer iterations. Output is independent of ``threads``.

    ``dominance="strict"`` is the literal pruning rule: it keeps every point
    of tied balance, which explores better on small instances but lets the
    list outgrow the budget within a few iterations on a few hundred points.
    ``"weak"`` keeps only the cheapest point per balance level.
    """
    pairs = [tuple(map(int, p)) for p in pairs]
    if not pairs:
        raise ConfigError("need at least one (n_a, n_b) pair")
    totals = {a + b for a, b in pairs}
    if len(totals) != 1:
        log.warning("pairs do not share one n_a + n_b total: %s", pairs)
    configs = [AlternationConfig(a, b, q, policy) for a, b in pairs]
    if n_init < 1:
        raise ConfigError("initial list size must be >= 1")

    uid = 0
    initial = []
    for i in range(n_init):
        s = child_seed(master_seed, _INIT_TAG, i)
        st = init_state(ds, K, np.random.default_rng(s))
        initial.append(ParetoPoint.from_labels(ds, st.labels, K, seed=s, uid=uid))
        uid += 1
    archive = FrontArchive(filter_nondominated(initial, dedupe_eps, dominance), budget, 0, master_seed)
    archive.history.append({"iteration": 0, "size": len(archive), "added": len(initial),
                            "removed": len(initial) - len(archive)})

    def advance(task):
        parent, pidx, t = task
        s = child_seed(master_seed, _STEP_TAG, parent.uid, pidx, t)
        rng = np.random.default_rng(s)
        state = ClusterState.from_labels(ds, parent.label_array(), K)
        cfg = configs[pidx]
        safairkm_run(ds, state, cfg, rng, start_iteration=t * q)
        return s, cfg, state.labels

    pool = ThreadPoolExecutor(max_workers=threads) if threads > 1 else None
    try:
        while archive.iteration < max_iter and len(archive) <= budget:
            t = archive.iteration
            tasks = [(p, i, t) for p in archive.points for i in range(len(configs))]
            results = pool.map(advance, tasks) if pool else map(advance, tasks)
            children = []
            for s, cfg, labels in results:
                children.append(ParetoPoint.from_labels(ds, labels, K, seed=s, n_a=cfg.n_a,
                                                        n_b=cfg.n_b, iteration=t + 1, uid=uid))
                uid += 1
            merged = archive.points + children
            archive.points = filter_nondominated(merged, dedupe_eps, dominance)
            archive.iteration = t + 1
            archive.history.append({"iteration": t + 1, "size": len(archive),
                                    "added": len(children),
                                    "removed": len(merged) - len(archive)})
            if on_iteration is not None:
                on_iteration(archive)
    finally:
        if pool:
            pool.shutdown()
    return archive
