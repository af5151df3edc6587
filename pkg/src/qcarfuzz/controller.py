"""Fuzzy PID force law.

The fuzzy PD surface ``u_f = infer(ke * e, kde * de)`` is blended with its
running integral: ``force = ku * (alpha * u_f + (1 - alpha) * integ)``. The
two blend coefficients always sum to one.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields

import numpy as np
from numba import njit

from .errors import NumericDivergence
from .fuzzy import (OUTPUT_GRID, IT2Partition, RuleBase, T1Partition, _it2_core, _t1_core,
                    it2_output_tables, TYPE_REDUCTIONS)

ENGINES = ("passive", "T1", "IT2")
PASSIVE, T1, IT2 = 0, 1, 2
ENGINE_CODES = {"passive": PASSIVE, "T1": T1, "IT2": IT2}

DEFAULT_INTEG_MAX = 10.0
DEFAULT_FOU = 0.15

# search box for the optimizers; ku's floor keeps near-passive candidates reachable
GENOME_BOUNDS = {
    "ke": (0.1, 100.0),
    "kde": (0.01, 20.0),
    "ku": (1e-3, 5000.0),
    "alpha": (0.0, 1.0),
    "s_e": (0.5, 2.0),
    "s_de": (0.5, 2.0),
    "s_u": (0.5, 2.0),
}


@dataclass(frozen=True)
class ControllerGenome:
    ke: float = 10.0
    kde: float = 1.0
    ku: float = 1000.0
    alpha: float = 0.5
    s_e: float = 1.0
    s_de: float = 1.0
    s_u: float = 1.0

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if not math.isfinite(v):
                raise ValueError(f"{f.name} must be finite, got {v!r}")
        for name in ("ke", "kde", "ku"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be > 0, got {getattr(self, name)!r}")
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha must lie in [0, 1], got {self.alpha!r}")
        for name in ("s_e", "s_de", "s_u"):
            if not 0.5 <= getattr(self, name) <= 2.0:
                raise ValueError(f"{name} must lie in [0.5, 2.0], got {getattr(self, name)!r}")

    @classmethod
    def names(cls) -> tuple[str, ...]:
        return tuple(f.name for f in fields(cls))

    def to_vector(self) -> np.ndarray:
        return np.array([getattr(self, n) for n in self.names()], dtype=float)

    @classmethod
    def from_vector(cls, vec) -> "ControllerGenome":
        vec = np.asarray(vec, dtype=float).ravel()
        if vec.shape[0] != len(cls.names()):
            raise ValueError(f"genome vector must have {len(cls.names())} entries, got {vec.shape[0]}")
        return cls(*(float(v) for v in vec))

    def to_dict(self) -> dict:
        return asdict(self)

    @property
    def blend(self) -> tuple[float, float]:
        return self.alpha, 1.0 - self.alpha


def genome_bounds(overrides: dict | None = None) -> tuple[np.ndarray, np.ndarray]:
    box = dict(GENOME_BOUNDS)
    box.update(overrides or {})
    names = ControllerGenome.names()
    lower = np.array([box[n][0] for n in names], dtype=float)
    upper = np.array([box[n][1] for n in names], dtype=float)
    return lower, upper


@dataclass(frozen=True)
class ControllerState:
    integ: float = 0.0
    prev_error: float = 0.0


class FuzzyTables:
    """Arrays the jitted controller step needs, built once per genome."""

    def __init__(self, genome: ControllerGenome, engine: str, rules: RuleBase | None = None,
                 fou: float = DEFAULT_FOU, type_reduction: str = "centroid"):
        if engine not in ENGINE_CODES:
            raise ValueError(f"engine must be one of {ENGINES}, got {engine!r}")
        rules = rules or RuleBase()
        self.engine = ENGINE_CODES[engine]
        self.rules = rules.matrix
        self.mode = TYPE_REDUCTIONS[type_reduction]
        self.grid = OUTPUT_GRID
        g = genome
        if engine == "IT2":
            pe, pd, pu = (IT2Partition(g.s_e, fou), IT2Partition(g.s_de, fou), IT2Partition(g.s_u, fou))
            self.pe_lo, self.pe_up = pe.lower(), pe.upper()
            self.pd_lo, self.pd_up = pd.lower(), pd.upper()
            self.out_lo, self.out_up, _, self.c_left, self.c_right = it2_output_tables(pu)
        else:
            pe, pd, pu = T1Partition(g.s_e), T1Partition(g.s_de), T1Partition(g.s_u)
            self.pe_lo = self.pe_up = pe.array()
            self.pd_lo = self.pd_up = pd.array()
            self.out_lo = self.out_up = pu.on_grid(OUTPUT_GRID)
            self.c_left = self.c_right = np.zeros(5)

    def args(self):
        return (self.engine, self.rules, self.pe_lo, self.pe_up, self.pd_lo, self.pd_up,
                self.out_lo, self.out_up, self.grid, self.c_left, self.c_right, self.mode)


@njit(cache=True)
def _fuzzy_out(engine, rules, pe_lo, pe_up, pd_lo, pd_up, out_lo, out_up, grid, c_left, c_right, mode, e, de):
    if engine == T1:
        return _t1_core(rules, pe_lo, pd_lo, out_lo, grid, e, de)
    return _it2_core(rules, pe_lo, pe_up, pd_lo, pd_up, out_lo, out_up, grid, c_left, c_right, mode, e, de)


@njit(cache=True)
def _controller_step(gains, integ, x1, v1, dt, integ_max, f_max,
                     engine, rules, pe_lo, pe_up, pd_lo, pd_up, out_lo, out_up, grid, c_left, c_right, mode):
    """Returns (force, new_integ). ``gains`` = (ke, kde, ku, alpha)."""
    if engine == PASSIVE:
        return 0.0, integ
    e = -x1
    de = -v1
    u_f = _fuzzy_out(engine, rules, pe_lo, pe_up, pd_lo, pd_up, out_lo, out_up, grid, c_left, c_right, mode,
                     gains[0] * e, gains[1] * de)
    integ = integ + u_f * dt
    if integ > integ_max:
        integ = integ_max
    elif integ < -integ_max:
        integ = -integ_max
    force = gains[2] * (gains[3] * u_f + (1.0 - gains[3]) * integ)
    if force > f_max:
        force = f_max
    elif force < -f_max:
        force = -f_max
    return force, integ


def compute_force(genome: ControllerGenome, state: ControllerState, x1: float, v1: float, dt: float,
                  engine: str = "T1", f_max: float = 2000.0, integ_max: float = DEFAULT_INTEG_MAX,
                  fou: float = DEFAULT_FOU, type_reduction: str = "centroid",
                  tables: FuzzyTables | None = None) -> tuple[float, ControllerState]:
    """One controller update from the measured body displacement and velocity.

    Regulates the body to zero: ``e = -x1``, ``de = -v1``. Returns the
    saturated force and the successor state.
    """
    if not dt > 0:
        raise ValueError(f"dt must be > 0, got {dt!r}")
    if not all(math.isfinite(v) for v in (x1, v1, state.integ)):
        raise NumericDivergence("numeric divergence: non-finite controller input")
    tables = tables or FuzzyTables(genome, engine, fou=fou, type_reduction=type_reduction)
    gains = np.array([genome.ke, genome.kde, genome.ku, genome.alpha])
    force, integ = _controller_step(gains, float(state.integ), float(x1), float(v1), float(dt),
                                    float(integ_max), float(f_max), *tables.args())
    return float(force), ControllerState(float(integ), -float(x1))
