"""Stochastic alternating bi-objective gradient descent and its rate harness."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import stats

from .errors import ConfigError, DivergenceError

log = logging.getLogger(__name__)

Vector = np.ndarray


@dataclass
class BiObjectiveProblem:
    """Two smooth objectives with unbiased noisy gradients.

    ``sigma`` is the per-coordinate standard deviation of additive Gaussian
    gradient noise, drawn fresh on every call.
    """

    dim: int
    f_a: Callable[[Vector], float]
    f_b: Callable[[Vector], float]
    grad_a: Callable[[Vector], Vector]
    grad_b: Callable[[Vector], Vector]
    sigma: float = 0.0
    curvature: Callable[[float], float] | None = None
    minimizer: Callable[[float], Vector] | None = None
    calls: dict = field(default_factory=lambda: {"a": 0, "b": 0})

    def stochastic_grad(self, which: str, x: Vector, rng: np.random.Generator) -> Vector:
        self.calls[which] += 1
        g = self.grad_a(x) if which == "a" else self.grad_b(x)
        if self.sigma:
            g = g + self.sigma * rng.standard_normal(self.dim)
        return g

    def weighted(self, x: Vector, lam: float) -> float:
        return lam * self.f_a(x) + (1.0 - lam) * self.f_b(x)

    def strong_convexity(self, lam: float) -> float:
        if self.curvature is None:
            raise ConfigError("problem does not define a strong-convexity constant")
        return self.curvature(lam)


def quadratic_pair(a, b, da=None, db=None, sigma: float = 0.0) -> BiObjectiveProblem:
    """``f_i(x) = 1/2 (x - a_i)^T diag(d_i) (x - a_i)`` for i in {a, b}."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    da = np.ones_like(a) if da is None else np.asarray(da, dtype=float)
    db = np.ones_like(b) if db is None else np.asarray(db, dtype=float)
    if a.shape != b.shape or da.shape != a.shape or db.shape != a.shape:
        raise ConfigError("a, b, da, db must share one shape")
    if np.any(da <= 0) or np.any(db <= 0):
        raise ConfigError("curvatures must be positive")

    def minimizer(lam):
        return (lam * da * a + (1 - lam) * db * b) / (lam * da + (1 - lam) * db)

    return BiObjectiveProblem(
        dim=a.size,
        f_a=lambda x: 0.5 * float(np.dot(da * (x - a), x - a)),
        f_b=lambda x: 0.5 * float(np.dot(db * (x - b), x - b)),
        grad_a=lambda x: da * (x - a),
        grad_b=lambda x: db * (x - b),
        sigma=sigma,
        curvature=lambda lam: float(np.min(lam * da + (1 - lam) * db)),
        minimizer=minimizer,
    )


PRESETS = {
    "quadratic": dict(a=[2.0, 1.0], b=[-1.0, -2.0], da=[1.0, 2.0], db=[2.0, 1.0]),
    "isotropic": dict(a=[1.0, 1.0], b=[-1.0, 0.0]),
}
PRESET_X0 = {"quadratic": [5.0, 5.0], "isotropic": [3.0, -3.0]}


def preset_problem(name: str, sigma: float = 0.0) -> BiObjectiveProblem:
    if name not in PRESETS:
        raise ConfigError(f"unknown problem preset {name!r}; valid presets: {', '.join(sorted(PRESETS))}")
    return quadratic_pair(sigma=sigma, **PRESETS[name])


@dataclass(frozen=True)
class StepSchedule:
    """``theorem1``: alpha_t = 2 / (c (t + 1) (n_a + n_b)); ``constant``: alpha_t = value."""

    kind: str = "theorem1"
    c: float = 1.0
    n_total: int = 2
    value: float = 0.0

    def __post_init__(self):
        if self.kind not in ("theorem1", "constant"):
            raise ConfigError(f"unknown schedule kind {self.kind!r}")
        if self.kind == "theorem1" and (self.c <= 0 or self.n_total < 1):
            raise ConfigError("theorem1 schedule needs c > 0 and n_total >= 1")
        if self.kind == "constant" and self.value <= 0:
            raise ConfigError("constant schedule needs value > 0")

    def __call__(self, t: int) -> float:
        if self.kind == "constant":
            return self.value
        return 2.0 / (self.c * (t + 1) * self.n_total)


@dataclass
class Trajectory:
    iterates: np.ndarray
    gaps: np.ndarray | None = None
    calls: tuple[int, int] = (0, 0)

    @property
    def final(self) -> np.ndarray:
        return self.iterates[-1]


def target_weight(n_a: int, n_b: int) -> float:
    return n_a / (n_a + n_b)


def sa2gd_run(problem: BiObjectiveProblem, x0, n_a: int, n_b: int, T: int,
              schedule: StepSchedule | None = None, seed: int = 0,
              record_gaps: bool = True) -> Trajectory:
    """Run ``T`` outer iterations; each takes ``n_a`` noisy steps on f_a then
    ``n_b`` on f_b, all with the step size of that outer iteration.
    """
    if n_a < 0 or n_b < 0 or n_a + n_b < 1:
        raise ConfigError("need n_a, n_b >= 0 with n_a + n_b >= 1")
    if T < 1:
        raise ConfigError("T must be >= 1")
    lam = target_weight(n_a, n_b)
    if schedule is None:
        schedule = StepSchedule("theorem1", problem.strong_convexity(lam), n_a + n_b)
    rng = np.random.default_rng(seed)
    x = np.asarray(x0, dtype=float).copy()
    xs = np.empty((T + 1, x.size))
    xs[0] = x
    start = dict(problem.calls)
    # overflow is reported below as a DivergenceError, not as a numpy warning
    with np.errstate(over="ignore", invalid="ignore"):
        for t in range(T):
            alpha = schedule(t)
            for _ in range(n_a):
                x = x - alpha * problem.stochastic_grad("a", x, rng)
            for _ in range(n_b):
                x = x - alpha * problem.stochastic_grad("b", x, rng)
            if not np.all(np.isfinite(x)):
                raise DivergenceError(f"non-finite iterate at t={t} (alpha={alpha:.3g}); "
                                      "step size too large for the curvature")
            xs[t + 1] = x
    gaps = None
    if record_gaps and problem.minimizer is not None:
        gaps = np.array([weighted_gap(problem, xi, lam) for xi in xs])
    calls = (problem.calls["a"] - start["a"], problem.calls["b"] - start["b"])
    return Trajectory(xs, gaps, calls)


def weighted_gap(problem: BiObjectiveProblem, x, lam: float) -> float:
    """``S(x, lam) - S(x*(lam), lam)`` with ``S = lam f_a + (1 - lam) f_b``, clamped at 0."""
    if problem.minimizer is None:
        raise ConfigError("weighted gap needs the closed-form minimizer x*(lam)")
    xs = problem.minimizer(lam)
    return max(problem.weighted(np.asarray(x, dtype=float), lam) - problem.weighted(xs, lam), 0.0)


def rate_fit(runs: Sequence[tuple[float, float]]) -> float:
    """Least-squares slope of log(min gap) against log(T)."""
    return rate_fit_summary(runs)["slope"]


def rate_fit_summary(runs: Sequence[tuple[float, float]], confidence: float = 0.95) -> dict:
    pts = []
    for T, g in runs:
        if g <= 0:
            log.warning("dropping T=%s: zero gap (exact convergence)", T)
            continue
        pts.append((float(T), float(g)))
    Ts = sorted({T for T, _ in pts})
    if len(Ts) < 4:
        raise ConfigError(f"rate fit needs >= 4 distinct T values with positive gaps, got {len(Ts)}")
    lx = np.log([T for T, _ in pts])
    ly = np.log([g for _, g in pts])
    fit = stats.linregress(lx, ly)
    dof = len(pts) - 2
    half = stats.t.ppf(0.5 + confidence / 2, dof) * fit.stderr if dof > 0 else math.inf
    return {"slope": float(fit.slope), "intercept": float(fit.intercept),
            "stderr": float(fit.stderr), "ci": [float(fit.slope - half), float(fit.slope + half)],
            "confidence": confidence, "n_points": len(pts)}


@dataclass
class RateExperiment:
    Ts: list[int]
    per_seed: list[tuple[int, int, float]]
    averaged: list[tuple[int, float]]
    summary: dict
    final_mean: np.ndarray


def log_spaced_Ts(lo: int = 100, hi: int = 10_000, per_decade: int = 2) -> list[int]:
    decades = math.log10(hi / lo)
    n = int(round(decades * per_decade)) + 1
    return sorted({int(round(v)) for v in np.logspace(math.log10(lo), math.log10(hi), n)})


def rate_experiment(problem: BiObjectiveProblem, n_a: int, n_b: int, Ts: Sequence[int],
                    seeds: Sequence[int], x0=None) -> RateExperiment:
    """Per seed, one run to ``max(Ts)``; gaps at t <= T are prefixes of it.

    The fitted curve is ``min_{1 <= t <= T}`` of the seed-averaged gap.
    """
    Ts = sorted(int(T) for T in Ts)
    Tmax = Ts[-1]
    x0 = np.zeros(problem.dim) if x0 is None else np.asarray(x0, dtype=float)
    gaps = np.empty((len(seeds), Tmax + 1))
    finals = []
    per_seed = []
    for i, s in enumerate(seeds):
        tr = sa2gd_run(problem, x0, n_a, n_b, Tmax, seed=int(s))
        gaps[i] = tr.gaps
        finals.append(tr.final)
        run_min = np.minimum.accumulate(tr.gaps[1:])
        per_seed.extend((T, int(s), float(run_min[T - 1])) for T in Ts)
    avg_min = np.minimum.accumulate(gaps.mean(axis=0)[1:])
    averaged = [(T, float(avg_min[T - 1])) for T in Ts]
    return RateExperiment(Ts, per_seed, averaged, rate_fit_summary(averaged),
                          np.mean(finals, axis=0))
