"""Closed-loop simulation, metrics, the tuning objective and comparison tables."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field, replace

import numpy as np
from numba import njit

from .controller import (DEFAULT_FOU, DEFAULT_INTEG_MAX, ENGINES, ControllerGenome, FuzzyTables,
                         _controller_step)
from .errors import NumericDivergence
from .plant import RoadProfile, SuspensionParams, _derivs, _rk4, _road

SERIES_COLUMNS = ("t", "x1", "x2", "v1", "v2", "a1", "u", "w")
COMPARE_HEADER = ("controller", "step_mse", "sine_mse")
DIVERGED = "diverged"
SETTLING_BAND = 0.02


def default_scenarios(step_amplitude=0.1, step_time=0.0, sine_amplitude=0.05, sine_frequency=1.0):
    return {
        "step": RoadProfile("step", amplitude=step_amplitude, start_time=step_time),
        "sine": RoadProfile("sine", amplitude=sine_amplitude, frequency=sine_frequency),
    }


@dataclass(frozen=True)
class SimConfig:
    params: SuspensionParams = field(default_factory=SuspensionParams)
    profile: RoadProfile = field(default_factory=RoadProfile)
    engine: str = "passive"
    genome: ControllerGenome = field(default_factory=ControllerGenome)
    dt: float = 1e-3
    horizon: float = 10.0
    fou: float = DEFAULT_FOU
    integ_max: float = DEFAULT_INTEG_MAX
    type_reduction: str = "centroid"

    def __post_init__(self):
        if self.engine not in ENGINES:
            raise ValueError(f"engine must be one of {ENGINES}, got {self.engine!r}")
        if not (math.isfinite(self.dt) and self.dt > 0):
            raise ValueError(f"dt must be > 0, got {self.dt!r}")
        if not (math.isfinite(self.horizon) and self.horizon >= 1.0):
            raise ValueError(f"horizon must be >= 1 s, got {self.horizon!r}")
        n = self.horizon / self.dt
        if abs(n - round(n)) > 1e-6 * max(1.0, n):
            raise ValueError(f"horizon/dt must be an integer number of steps, got {n!r}")
        if not self.integ_max > 0:
            raise ValueError(f"integ_max must be > 0, got {self.integ_max!r}")

    @property
    def n_steps(self) -> int:
        return int(round(self.horizon / self.dt))


@dataclass
class SimResult:
    t: np.ndarray
    x1: np.ndarray
    x2: np.ndarray
    v1: np.ndarray
    v2: np.ndarray
    a1: np.ndarray
    u: np.ndarray
    w: np.ndarray
    mse_x1: float = 0.0
    mse_a1: float = 0.0
    peak_x1: float = 0.0
    settling_time_x1: float = 0.0

    def __post_init__(self):
        self.mse_x1 = mse(self.x1)
        self.mse_a1 = mse(self.a1)
        self.peak_x1 = float(np.max(np.abs(self.x1)))
        self.settling_time_x1 = settling_time(self.t, self.x1)

    @property
    def metrics(self) -> dict:
        return {"mse_x1": self.mse_x1, "mse_a1": self.mse_a1, "peak_x1": self.peak_x1,
                "settling_time_x1": self.settling_time_x1}

    def table(self) -> np.ndarray:
        return np.column_stack([getattr(self, c) for c in SERIES_COLUMNS])

    def to_csv(self, path) -> None:
        np.savetxt(path, self.table(), delimiter=",", header=",".join(SERIES_COLUMNS), comments="",
                   fmt="%.17g")


def mse(series, reference: float = 0.0) -> float:
    """Mean squared deviation of ``series`` from a constant reference."""
    x = np.asarray(series, dtype=float)
    if x.size == 0:
        raise ValueError("mse of an empty series")
    return float(np.mean((x - reference) ** 2))


def settling_time(t, x, band: float = SETTLING_BAND) -> float:
    """First time after which ``x`` stays within ``band`` of its final value.

    The band is relative to the final value; when the response returns to
    (near) zero, the peak magnitude is used instead so the band stays finite.
    """
    t = np.asarray(t)
    x = np.asarray(x)
    final = x[-1]
    peak = np.max(np.abs(x))
    scale = abs(final) if abs(final) >= 0.1 * peak else peak
    if scale == 0.0:
        return 0.0
    outside = np.nonzero(np.abs(x - final) > band * scale)[0]
    if outside.size == 0:
        return float(t[0])
    last = outside[-1]
    return float(t[min(last + 1, t.size - 1)])


@njit(cache=True)
def _simulate(p, road, dt, n_steps, gains, integ_max,
              engine, rules, pe_lo, pe_up, pd_lo, pd_up, out_lo, out_up, grid, c_left, c_right, mode, out):
    """Fill ``out`` (n_steps+1, 8) with the closed-loop trajectory.

    Returns the number of completed rows; fewer than n_steps+1 means the
    run diverged.
    """
    f_max = p[6]
    s = np.zeros(4)
    nxt = np.empty(4)
    integ = 0.0
    for k in range(n_steps + 1):
        t = k * dt
        force, integ_next = _controller_step(gains, integ, s[0], s[2], dt, integ_max, f_max, engine, rules,
                                             pe_lo, pe_up, pd_lo, pd_up, out_lo, out_up, grid, c_left,
                                             c_right, mode)
        w, wd = _road(road, t)
        a = _derivs(p, s[0], s[1], s[2], s[3], w, wd, force)
        out[k, 0] = t
        out[k, 1] = s[0]
        out[k, 2] = s[1]
        out[k, 3] = s[2]
        out[k, 4] = s[3]
        out[k, 5] = a[2]
        out[k, 6] = force
        out[k, 7] = w
        if not (np.isfinite(force) and np.isfinite(a[2])):
            return k
        if k == n_steps:
            break
        integ = integ_next
        if not _rk4(p, s, t, dt, force, road, nxt):
            return k + 1
        s[:] = nxt
    return n_steps + 1


def run_closed_loop(cfg: SimConfig) -> SimResult:
    """Simulate ``cfg`` from rest and return the sampled trajectory.

    Row ``k`` holds the state at ``t = k * dt``, the force applied over the
    following step, and the body acceleration under that force.
    """
    n = cfg.n_steps
    out = np.empty((n + 1, len(SERIES_COLUMNS)))
    tables = FuzzyTables(cfg.genome, cfg.engine, fou=cfg.fou, type_reduction=cfg.type_reduction)
    g = cfg.genome
    gains = np.array([g.ke, g.kde, g.ku, g.alpha])
    done = _simulate(cfg.params.as_array(), cfg.profile.as_array(), float(cfg.dt), n, gains,
                     float(cfg.integ_max), *tables.args(), out)
    if done != n + 1:
        raise NumericDivergence(f"numeric divergence at t = {done * cfg.dt:.6g} s")
    return SimResult(*(out[:, i].copy() for i in range(out.shape[1])))


def objective(genome: ControllerGenome | np.ndarray, scenario: SimConfig, engine: str | None = None,
              gamma: float = 0.0) -> float:
    """Tuning fitness: ``mse_x1 + gamma * mse_a1`` of the closed loop.

    ``scenario`` is a template whose genome (and optionally engine) are
    replaced. Divergent or invalid candidates score ``+inf``.
    """
    try:
        if not isinstance(genome, ControllerGenome):
            genome = ControllerGenome.from_vector(genome)
        cfg = replace(scenario, genome=genome, engine=engine or scenario.engine)
        res = run_closed_loop(cfg)
    except (NumericDivergence, ValueError):
        return math.inf
    value = res.mse_x1 + gamma * res.mse_a1 if gamma else res.mse_x1
    return value if math.isfinite(value) else math.inf


# ---------------------------------------------------------------- comparison


@dataclass(frozen=True)
class RowSpec:
    """One controller row: passive, a fixed genome, or a tuned engine."""

    label: str
    engine: str = "passive"
    algorithm: str | None = None
    genome: ControllerGenome | None = None
    optimizer_options: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.engine not in ENGINES:
            raise ValueError(f"engine must be one of {ENGINES}, got {self.engine!r}")
        if self.engine != "passive" and self.algorithm is None and self.genome is None:
            raise ValueError(f"row {self.label!r}: a fuzzy row needs an algorithm or a genome")


@dataclass
class Cell:
    row: str
    scenario: str
    seed: int | None
    genome: ControllerGenome | None
    value: float
    result: SimResult | None = None


@dataclass
class ComparisonTable:
    rows: list
    scenarios: list
    cells: dict  # (row, scenario) -> list[Cell], one per seed

    def value(self, row: str, scenario: str) -> float:
        vals = [c.value for c in self.cells[(row, scenario)]]
        if any(not math.isfinite(v) for v in vals):
            return math.inf
        return float(np.median(vals))

    def median_cell(self, row: str, scenario: str) -> Cell:
        """Cell whose value is the (lower) median over seeds."""
        cells = sorted(self.cells[(row, scenario)], key=lambda c: (c.value, c.seed if c.seed is not None else -1))
        return cells[(len(cells) - 1) // 2]

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(("controller",) + tuple(f"{s}_mse" for s in self.scenarios))
        for row in self.rows:
            cells = []
            for s in self.scenarios:
                v = self.value(row, s)
                cells.append(repr(v) if math.isfinite(v) else DIVERGED)
            writer.writerow([row] + cells)
        return buf.getvalue()


def compare(rows: list[RowSpec], scenarios: dict[str, RoadProfile], template: SimConfig,
            seeds=(0,), tune_on: str = "step", gamma: float = 0.0, keep_results: bool = False,
            progress=None, space=None) -> ComparisonTable:
    """MSE of ``x1`` for every (row, scenario), median over ``seeds`` for tuned rows.

    Tuned rows run their optimizer on the ``tune_on`` scenario
    (``"each"`` tunes separately per scenario) and the best genome is then
    evaluated on every scenario.
    """
    from .optim import OptimizerConfig, optimize, search_space

    if not rows:
        raise ValueError("compare needs at least one row")
    labels = [r.label for r in rows]
    if len(set(labels)) != len(labels):
        raise ValueError("row labels must be unique")
    if tune_on != "each" and tune_on not in scenarios:
        raise ValueError(f"tune_on must be 'each' or one of {sorted(scenarios)}, got {tune_on!r}")
    space = space or search_space()
    cells = {}
    for row in rows:
        for name in scenarios:
            cells[(row.label, name)] = []
        row_seeds = list(seeds) if row.algorithm else [None]
        for seed in row_seeds:
            tuned = {}
            if row.algorithm:
                targets = list(scenarios) if tune_on == "each" else [tune_on]
                for target in targets:
                    scen = replace(template, profile=scenarios[target], engine=row.engine)
                    cfg = OptimizerConfig(row.algorithm, seed=seed, **row.optimizer_options)
                    res = optimize(space, cfg, lambda v, sc=scen: objective(v, sc, gamma=gamma))
                    tuned[target] = ControllerGenome.from_vector(res.best_vector)
                    if progress:
                        progress(row.label, target, seed, res)
            for name, profile in scenarios.items():
                genome = row.genome
                if row.algorithm:
                    genome = tuned[name if tune_on == "each" else tune_on]
                cfg = replace(template, profile=profile, engine=row.engine,
                              genome=genome if genome is not None else template.genome)
                try:
                    res = run_closed_loop(cfg)
                    value = res.mse_x1
                except NumericDivergence:
                    res, value = None, math.inf
                cells[(row.label, name)].append(
                    Cell(row.label, name, seed, genome, value, res if keep_results else None))
    return ComparisonTable(labels, list(scenarios), cells)
