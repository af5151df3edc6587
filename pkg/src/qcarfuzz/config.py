"""Run configuration: one JSON document with plant/road/controller/optimizer/run
sections (plus ``compare`` for the comparison command).

Unknown keys are rejected and every error names the offending field as
``section.key``. All keys are optional; defaults are listed in ``DEFAULTS``.
"""

from __future__ import annotations

import copy
import json
import math
from dataclasses import dataclass
from pathlib import Path

from .controller import ENGINES, GENOME_BOUNDS, ControllerGenome
from .errors import ConfigError
from .fuzzy import TYPE_REDUCTIONS
from .harness import RowSpec, SimConfig, default_scenarios
from .optim import ALGORITHMS, OptimizerConfig
from .plant import RoadProfile, SuspensionParams

DEFAULTS = {
    "plant": SuspensionParams().to_dict(),
    "road": {"kind": "step", "step_amplitude": 0.1, "step_time": 0.0, "sine_amplitude": 0.05,
             "sine_frequency": 1.0},
    "controller": {"engine": "passive", "genome": ControllerGenome().to_dict(), "fou": 0.15, "integ_max": 10.0,
                   "type_reduction": "centroid", "bounds": {}},
    "optimizer": {"algorithm": "BBO", "population": None, "generations": 100, "p_mutation": None,
                  "n_elite": None, "E": 1.0, "I": 1.0, "omega": 0.729, "c1": 1.494, "c2": 1.494,
                  "migration_step": 0.9, "mutation": "gaussian", "sigma": 0.02},
    "run": {"dt": 1e-3, "horizon": 10.0, "seed": 0, "out": "out", "gamma": 0.0, "tune_on": "step"},
    "compare": {"rows": [], "n_seeds": 1},
}

ROW_KEYS = {"label", "engine", "algorithm", "genome", "optimizer"}
OPTIMIZER_OPTION_KEYS = set(DEFAULTS["optimizer"]) - {"algorithm"}


def _merge(base: dict, doc: dict, where: str = "") -> dict:
    out = copy.deepcopy(base)
    if not isinstance(doc, dict):
        raise ConfigError(where or "<root>", "expected an object")
    for key, value in doc.items():
        path = f"{where}.{key}" if where else key
        if key not in base:
            raise ConfigError(path, "unknown key")
        if isinstance(base[key], dict) and key not in ("bounds",):
            out[key] = _merge(base[key], value, path)
        else:
            out[key] = value
    return out


def _number(value, field, *, positive=False, nonneg=False, integer=False):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(field, f"expected a number, got {value!r}")
    if integer and int(value) != value:
        raise ConfigError(field, f"expected an integer, got {value!r}")
    if not math.isfinite(value):
        raise ConfigError(field, "must be finite")
    if positive and not value > 0:
        raise ConfigError(field, f"must be > 0, got {value!r}")
    if nonneg and value < 0:
        raise ConfigError(field, f"must be >= 0, got {value!r}")
    return int(value) if integer else float(value)


def _choice(value, field, options):
    if value not in options:
        raise ConfigError(field, f"must be one of {sorted(options)}, got {value!r}")
    return value


def _build(field, factory, **kwargs):
    try:
        return factory(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(field, str(exc)) from None


@dataclass(frozen=True)
class RunConfig:
    params: SuspensionParams
    road_kind: str
    scenarios: dict
    engine: str
    genome: ControllerGenome
    fou: float
    integ_max: float
    type_reduction: str
    bounds: dict
    optimizer: dict
    dt: float
    horizon: float
    seed: int
    out: Path
    gamma: float
    tune_on: str
    rows: list
    n_seeds: int

    @property
    def profile(self) -> RoadProfile:
        return self.scenarios[self.road_kind]

    def sim_config(self, profile: RoadProfile | None = None, engine: str | None = None,
                   genome: ControllerGenome | None = None) -> SimConfig:
        return SimConfig(params=self.params, profile=profile or self.profile, engine=engine or self.engine,
                         genome=genome or self.genome, dt=self.dt, horizon=self.horizon, fou=self.fou,
                         integ_max=self.integ_max, type_reduction=self.type_reduction)

    def optimizer_config(self, seed: int | None = None, **overrides) -> OptimizerConfig:
        opts = dict(self.optimizer)
        opts.update(overrides)
        return OptimizerConfig(seed=self.seed if seed is None else seed, **opts)

    @property
    def seeds(self) -> list[int]:
        return [self.seed + i for i in range(self.n_seeds)]


def parse_config(doc: dict | None = None, overrides: dict | None = None) -> RunConfig:
    """Validate a config document; ``overrides`` maps run keys (seed, out, dt, horizon)."""
    cfg = _merge(DEFAULTS, doc or {})
    for key, value in (overrides or {}).items():
        if value is not None:
            cfg["run"][key] = value

    plant = cfg["plant"]
    for key in ("m1", "m2", "k1", "k2", "b1", "b2"):
        _number(plant[key], f"plant.{key}", positive=True)
    _number(plant["f_max"], "plant.f_max", nonneg=True)
    params = _build("plant", SuspensionParams, **plant)

    road = cfg["road"]
    kind = _choice(road["kind"], "road.kind", {"step", "sine"})
    amp_s = _number(road["step_amplitude"], "road.step_amplitude", nonneg=True)
    t0 = _number(road["step_time"], "road.step_time", nonneg=True)
    amp_w = _number(road["sine_amplitude"], "road.sine_amplitude", nonneg=True)
    freq = _number(road["sine_frequency"], "road.sine_frequency", positive=True)
    scenarios = default_scenarios(amp_s, t0, amp_w, freq)

    ctl = cfg["controller"]
    engine = _choice(ctl["engine"], "controller.engine", set(ENGINES))
    genome = _parse_genome(ctl["genome"], "controller.genome")
    fou = _number(ctl["fou"], "controller.fou", nonneg=True)
    if fou > 1:
        raise ConfigError("controller.fou", f"must lie in [0, 1], got {fou!r}")
    integ_max = _number(ctl["integ_max"], "controller.integ_max", positive=True)
    type_reduction = _choice(ctl["type_reduction"], "controller.type_reduction", set(TYPE_REDUCTIONS))
    bounds = _parse_bounds(ctl["bounds"])

    opt = dict(cfg["optimizer"])
    _choice(opt["algorithm"], "optimizer.algorithm", set(ALGORITHMS))
    _build("optimizer", OptimizerConfig, **opt)

    run = cfg["run"]
    dt = _number(run["dt"], "run.dt", positive=True)
    horizon = _number(run["horizon"], "run.horizon", positive=True)
    if horizon < 1.0:
        raise ConfigError("run.horizon", f"must be >= 1 s, got {horizon!r}")
    steps = horizon / dt
    if abs(steps - round(steps)) > 1e-6 * max(1.0, steps):
        raise ConfigError("run.dt", f"horizon/dt must be an integer number of steps, got {steps!r}")
    seed = _number(run["seed"], "run.seed", integer=True)
    if not isinstance(run["out"], str) or not run["out"]:
        raise ConfigError("run.out", "expected a non-empty path string")
    gamma = _number(run["gamma"], "run.gamma", nonneg=True)
    tune_on = _choice(run["tune_on"], "run.tune_on", {"step", "sine", "each"})

    comp = cfg["compare"]
    if not isinstance(comp["rows"], list):
        raise ConfigError("compare.rows", "expected a list")
    rows = [_parse_row(r, f"compare.rows[{i}]", opt) for i, r in enumerate(comp["rows"])]
    n_seeds = _number(comp["n_seeds"], "compare.n_seeds", positive=True, integer=True)

    rc = RunConfig(params, kind, scenarios, engine, genome, fou, integ_max, type_reduction, bounds, opt, dt,
                   horizon, seed, Path(run["out"]), gamma, tune_on, rows, n_seeds)
    _build("run", rc.sim_config)
    return rc


def load_config(path: str | Path | None, overrides: dict | None = None) -> RunConfig:
    doc = {}
    if path is not None:
        try:
            doc = json.loads(Path(path).read_text())
        except OSError as exc:
            raise ConfigError("--config", f"cannot read {path}: {exc.strerror}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError("--config", f"invalid JSON: {exc}") from None
    return parse_config(doc, overrides)


def _parse_genome(doc, field) -> ControllerGenome:
    merged = _merge(ControllerGenome().to_dict(), doc, field)
    for key, value in merged.items():
        _number(value, f"{field}.{key}")
    return _build(field, ControllerGenome, **merged)


def _parse_bounds(doc) -> dict:
    if not isinstance(doc, dict):
        raise ConfigError("controller.bounds", "expected an object")
    out = {}
    for key, pair in doc.items():
        field = f"controller.bounds.{key}"
        if key not in GENOME_BOUNDS:
            raise ConfigError(field, "unknown key")
        if not isinstance(pair, list) or len(pair) != 2:
            raise ConfigError(field, "expected [lower, upper]")
        lo, hi = (_number(v, field) for v in pair)
        if not lo < hi:
            raise ConfigError(field, "lower must be < upper")
        out[key] = (lo, hi)
    return out


def _parse_row(doc, field, optimizer_defaults) -> RowSpec:
    if not isinstance(doc, dict):
        raise ConfigError(field, "expected an object")
    for key in doc:
        if key not in ROW_KEYS:
            raise ConfigError(f"{field}.{key}", "unknown key")
    if "label" not in doc or not isinstance(doc["label"], str):
        raise ConfigError(f"{field}.label", "required string")
    engine = _choice(doc.get("engine", "passive"), f"{field}.engine", set(ENGINES))
    algorithm = doc.get("algorithm")
    if algorithm is not None:
        _choice(algorithm, f"{field}.algorithm", set(ALGORITHMS))
    genome = _parse_genome(doc["genome"], f"{field}.genome") if "genome" in doc else None
    options = {k: v for k, v in optimizer_defaults.items() if k != "algorithm"}
    extra = doc.get("optimizer", {})
    if not isinstance(extra, dict):
        raise ConfigError(f"{field}.optimizer", "expected an object")
    for key, value in extra.items():
        if key not in OPTIMIZER_OPTION_KEYS:
            raise ConfigError(f"{field}.optimizer.{key}", "unknown key")
        options[key] = value
    if algorithm is not None:
        _build(f"{field}.optimizer", OptimizerConfig, algorithm=algorithm, **options)
    return _build(field, RowSpec, label=doc["label"], engine=engine, algorithm=algorithm, genome=genome,
                  optimizer_options=options)
