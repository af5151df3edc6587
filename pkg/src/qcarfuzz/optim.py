"""Seeded population metaheuristics over a box: BBO, PSO and GA.

All three minimize. Every run draws from a single ``numpy`` generator
seeded from the config, and candidates are evaluated in index order, so a
(space, config, objective) triple always reproduces the same result.
Non-finite objective values are treated as ``+inf``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields
from typing import Callable

import numpy as np

from .controller import genome_bounds

ALGORITHMS = ("BBO", "PSO", "GA")

DEFAULTS = {
    "BBO": {"population": 50, "p_mutation": 0.1, "n_elite": 2},
    "PSO": {"population": 30},
    "GA": {"population": 50, "p_mutation": 0.05, "n_elite": 2},
}


@dataclass(frozen=True)
class SearchSpace:
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lo = np.asarray(self.lower, dtype=float).ravel()
        hi = np.asarray(self.upper, dtype=float).ravel()
        if lo.shape != hi.shape or lo.size == 0:
            raise ValueError("lower and upper must be non-empty and the same length")
        if not np.all(lo < hi):
            raise ValueError("lower < upper must hold in every dimension")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @property
    def dim(self) -> int:
        return self.lower.size

    @property
    def width(self) -> np.ndarray:
        return self.upper - self.lower

    def contains(self, x) -> bool:
        x = np.asarray(x)
        return bool(np.all(x >= self.lower) and np.all(x <= self.upper))

    def clip(self, x):
        return np.clip(x, self.lower, self.upper)

    def sample(self, rng, n: int) -> np.ndarray:
        return rng.uniform(self.lower, self.upper, size=(n, self.dim))


def search_space(overrides: dict | None = None) -> SearchSpace:
    """The 7-dimensional controller genome box."""
    return SearchSpace(*genome_bounds(overrides))


@dataclass(frozen=True)
class OptimizerConfig:
    """Optimizer settings. ``None`` fields take the per-algorithm default.

    BBO: pop 50, p_mutation 0.1, n_elite 2, emigration/immigration maxima
    E = I = 1, migration_step 0.9, Gaussian mutation with ``sigma`` 0.02 of
    the box width (``migration_step=1, mutation="uniform"`` gives pure
    feature copying with uniform re-draws). PSO: pop 30, inertia 0.729, c1 = c2 = 1.494. GA: pop 50,
    p_mutation 0.05, n_elite 2.
    """

    algorithm: str = "BBO"
    population: int | None = None
    generations: int = 100
    seed: int = 0
    p_mutation: float | None = None
    n_elite: int | None = None
    E: float = 1.0
    I: float = 1.0
    omega: float = 0.729
    c1: float = 1.494
    c2: float = 1.494
    migration_step: float = 0.9
    mutation: str = "gaussian"
    sigma: float = 0.02

    def __post_init__(self):
        if not 0 < self.migration_step <= 1:
            raise ValueError(f"migration_step must lie in (0, 1], got {self.migration_step!r}")
        if self.mutation not in ("gaussian", "uniform"):
            raise ValueError(f"mutation must be 'gaussian' or 'uniform', got {self.mutation!r}")
        if not self.sigma > 0:
            raise ValueError(f"sigma must be > 0, got {self.sigma!r}")
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"algorithm must be one of {ALGORITHMS}, got {self.algorithm!r}")
        for key, value in DEFAULTS[self.algorithm].items():
            if getattr(self, key) is None:
                object.__setattr__(self, key, value)
        if self.population is None:
            object.__setattr__(self, "population", 50)
        if int(self.population) < 4:
            raise ValueError(f"population must be >= 4, got {self.population!r}")
        if int(self.generations) < 1:
            raise ValueError(f"generations must be >= 1, got {self.generations!r}")
        if self.p_mutation is not None and not 0 <= self.p_mutation <= 1:
            raise ValueError(f"p_mutation must lie in [0, 1], got {self.p_mutation!r}")
        if self.n_elite is not None and not 0 <= self.n_elite < self.population:
            raise ValueError(f"n_elite must lie in [0, population), got {self.n_elite!r}")

    @classmethod
    def option_names(cls) -> tuple[str, ...]:
        return tuple(f.name for f in fields(cls))


@dataclass
class OptResult:
    best_vector: np.ndarray
    best_fitness: float
    history: list
    mean_history: list
    evaluations: int
    algorithm: str
    seed: int
    population: np.ndarray = field(repr=False, default=None)
    fitness: np.ndarray = field(repr=False, default=None)

    def to_dict(self) -> dict:
        return {
            "algorithm": self.algorithm,
            "seed": self.seed,
            "best_vector": [float(v) for v in self.best_vector],
            "best_fitness": _json_float(self.best_fitness),
            "history": [_json_float(v) for v in self.history],
            "mean_history": [_json_float(v) for v in self.mean_history],
            "evaluations": self.evaluations,
        }


def _json_float(v):
    return float(v) if math.isfinite(v) else None


class _Evaluator:
    """Counts calls, enforces feasibility, and maps non-finite values to inf."""

    def __init__(self, objective, space: SearchSpace):
        self.objective = objective
        self.space = space
        self.calls = 0

    def __call__(self, X: np.ndarray) -> np.ndarray:
        out = np.empty(X.shape[0])
        for i, x in enumerate(X):
            if not self.space.contains(x):
                raise AssertionError("candidate left the search box")
            self.calls += 1
            try:
                v = float(self.objective(x.copy()))
            except (ArithmeticError, ValueError):
                v = math.inf
            out[i] = v if math.isfinite(v) else math.inf
        return out


def _mean_finite(f):
    finite = f[np.isfinite(f)]
    return float(finite.mean()) if finite.size else math.inf


def _initial(space, rng, n, initial):
    if initial is None:
        return space.sample(rng, n)
    X = np.array(initial, dtype=float)
    if X.shape != (n, space.dim):
        raise ValueError(f"initial population must have shape {(n, space.dim)}")
    return space.clip(X)


def bbo_optimize(space: SearchSpace, cfg: OptimizerConfig, objective: Callable, callback=None,
                 initial=None) -> OptResult:
    """Biogeography-based optimization with linear migration rates.

    Habitats are ranked best-first; the habitat of rank ``i`` hosts
    ``k = n - i`` species, giving immigration ``I * (1 - k/n)`` and
    emigration ``E * k/n``. For each non-elite habitat and dimension,
    immigration happens with the habitat's immigration probability: a
    source habitat is drawn by emigration-weighted roulette and the value
    moves ``migration_step`` of the way towards the source's value. Each
    dimension then mutates with probability ``p_mutation``, either by a
    Gaussian step (clamped to the box) or by a uniform re-draw.
    The ``n_elite`` best habitats pass through unchanged.
    """
    rng = np.random.default_rng(cfg.seed)
    n, dim = int(cfg.population), space.dim
    evaluate = _Evaluator(objective, space)
    X = _initial(space, rng, n, initial)
    f = evaluate(X)
    k = n - np.arange(n)
    lam = cfg.I * (1.0 - k / n)
    mu = cfg.E * k / n
    step = cfg.migration_step
    sigma = cfg.sigma * space.width
    history, means = [], []
    for gen in range(int(cfg.generations)):
        order = np.argsort(f, kind="stable")
        X, f = X[order], f[order]
        new = X.copy()
        for i in range(cfg.n_elite, n):
            probs = mu.copy()
            probs[i] = 0.0
            cum = np.cumsum(probs / probs.sum())
            immigrate = rng.random(dim) < lam[i]
            draws = rng.random(dim)
            for d in np.nonzero(immigrate)[0]:
                j = min(int(np.searchsorted(cum, draws[d], side="right")), n - 1)
                new[i, d] = X[i, d] + step * (X[j, d] - X[i, d]) if step < 1.0 else X[j, d]
            mutate = rng.random(dim) < cfg.p_mutation
            if mutate.any():
                if cfg.mutation == "gaussian":
                    new[i, mutate] += sigma[mutate] * rng.normal(size=int(mutate.sum()))
                else:
                    new[i, mutate] = rng.uniform(space.lower[mutate], space.upper[mutate])
        new = space.clip(new)
        f_new = f.copy()
        f_new[cfg.n_elite:] = evaluate(new[cfg.n_elite:])
        X, f = new, f_new
        best = float(f.min())
        history.append(best)
        means.append(_mean_finite(f))
        if callback:
            callback(gen + 1, best, means[-1])
    i = int(np.argmin(f))
    return OptResult(X[i].copy(), float(f[i]), history, means, evaluate.calls, "BBO", cfg.seed, X, f)


def pso_optimize(space: SearchSpace, cfg: OptimizerConfig, objective: Callable, callback=None,
                 initial=None) -> OptResult:
    """Global-best particle swarm with velocity and position clamping."""
    rng = np.random.default_rng(cfg.seed)
    n, dim = int(cfg.population), space.dim
    evaluate = _Evaluator(objective, space)
    vmax = 0.5 * space.width
    X = _initial(space, rng, n, initial)
    V = np.zeros((n, dim))
    f = evaluate(X)
    pbest, pbest_f = X.copy(), f.copy()
    g = int(np.argmin(pbest_f))
    history, means = [], []
    for gen in range(int(cfg.generations)):
        r1 = rng.random((n, dim))
        r2 = rng.random((n, dim))
        V = cfg.omega * V + cfg.c1 * r1 * (pbest - X) + cfg.c2 * r2 * (pbest[g] - X)
        V = np.clip(V, -vmax, vmax)
        X = space.clip(X + V)
        f = evaluate(X)
        improved = f < pbest_f
        pbest[improved] = X[improved]
        pbest_f[improved] = f[improved]
        g = int(np.argmin(pbest_f))
        history.append(float(pbest_f[g]))
        means.append(_mean_finite(f))
        if callback:
            callback(gen + 1, history[-1], means[-1])
    return OptResult(pbest[g].copy(), float(pbest_f[g]), history, means, evaluate.calls, "PSO", cfg.seed,
                     X, f)


def ga_optimize(space: SearchSpace, cfg: OptimizerConfig, objective: Callable, callback=None,
                initial=None) -> OptResult:
    """Real-coded GA: binary tournaments, blend crossover, Gaussian mutation, elitism."""
    rng = np.random.default_rng(cfg.seed)
    n, dim = int(cfg.population), space.dim
    evaluate = _Evaluator(objective, space)
    sigma = 0.1 * space.width
    X = _initial(space, rng, n, initial)
    f = evaluate(X)
    history, means = [], []
    n_child = n - cfg.n_elite
    for gen in range(int(cfg.generations)):
        order = np.argsort(f, kind="stable")
        X, f = X[order], f[order]
        cand = rng.integers(0, n, size=(n_child, 2, 2))
        # lower index is the fitter one after sorting
        parents = cand.min(axis=2)
        beta = rng.uniform(-0.25, 1.25, size=(n_child, dim))
        a, b = X[parents[:, 0]], X[parents[:, 1]]
        children = space.clip(beta * a + (1.0 - beta) * b)
        mutate = rng.random((n_child, dim)) < cfg.p_mutation
        noise = rng.normal(0.0, 1.0, size=(n_child, dim)) * sigma
        children = space.clip(np.where(mutate, children + noise, children))
        f_child = evaluate(children)
        X = np.vstack([X[:cfg.n_elite], children])
        f = np.concatenate([f[:cfg.n_elite], f_child])
        best = float(f.min())
        history.append(best)
        means.append(_mean_finite(f))
        if callback:
            callback(gen + 1, best, means[-1])
    i = int(np.argmin(f))
    return OptResult(X[i].copy(), float(f[i]), history, means, evaluate.calls, "GA", cfg.seed, X, f)


_DISPATCH = {"BBO": bbo_optimize, "PSO": pso_optimize, "GA": ga_optimize}


def optimize(space: SearchSpace, cfg: OptimizerConfig, objective: Callable, callback=None,
             initial=None) -> OptResult:
    return _DISPATCH[cfg.algorithm](space, cfg, objective, callback=callback, initial=initial)


def evaluations_per_run(cfg: OptimizerConfig) -> int:
    """Objective calls a run of ``cfg`` makes."""
    n, g = int(cfg.population), int(cfg.generations)
    if cfg.algorithm == "PSO":
        return n * (g + 1)
    return n + g * (n - cfg.n_elite)


def random_search(space: SearchSpace, budget: int, seed: int, objective: Callable) -> float:
    """Best of ``budget`` uniform draws; baseline for the metaheuristics."""
    rng = np.random.default_rng(seed)
    evaluate = _Evaluator(objective, space)
    return float(evaluate(space.sample(rng, budget)).min())
