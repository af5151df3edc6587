"""Command-line entry point: ``qcarfuzz simulate|optimize|compare``.

Exit codes: 0 success, 2 configuration error, 3 numeric divergence.
"""

from __future__ import annotations

import argparse
import json
import re
import sys
from pathlib import Path

from .controller import ControllerGenome
from .config import RunConfig, load_config
from .errors import ConfigError, NumericDivergence
from .harness import compare, objective, run_closed_loop
from .optim import optimize, search_space

EXIT_OK, EXIT_CONFIG, EXIT_DIVERGED = 0, 2, 3


def _write_json(path: Path, data) -> None:
    path.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")


def _slug(text: str) -> str:
    return re.sub(r"[^A-Za-z0-9_.-]+", "_", text)


def cmd_simulate(cfg: RunConfig) -> int:
    res = run_closed_loop(cfg.sim_config())
    cfg.out.mkdir(parents=True, exist_ok=True)
    res.to_csv(cfg.out / "trajectory.csv")
    _write_json(cfg.out / "metrics.json", {
        "engine": cfg.engine,
        "road": cfg.road_kind,
        "genome": cfg.genome.to_dict(),
        "metrics": res.metrics,
    })
    print(f"mse_x1={res.mse_x1:.6g} mse_a1={res.mse_a1:.6g} peak_x1={res.peak_x1:.6g} "
          f"settling_time_x1={res.settling_time_x1:.6g}")
    return EXIT_OK


def cmd_optimize(cfg: RunConfig) -> int:
    if cfg.engine == "passive":
        raise ConfigError("controller.engine", "optimize needs a fuzzy engine (T1 or IT2)")
    target = cfg.road_kind if cfg.tune_on == "each" else cfg.tune_on
    scenario = cfg.sim_config(profile=cfg.scenarios[target])
    opt_cfg = cfg.optimizer_config()

    def report(gen, best, mean):
        print(f"{gen} {best:.10g} {mean:.10g}", flush=True)

    res = optimize(search_space(cfg.bounds), opt_cfg, lambda v: objective(v, scenario, gamma=cfg.gamma),
                   callback=report)
    best = ControllerGenome.from_vector(res.best_vector)
    cfg.out.mkdir(parents=True, exist_ok=True)
    metrics = {}
    for name, profile in cfg.scenarios.items():
        try:
            sim = run_closed_loop(cfg.sim_config(profile=profile, genome=best))
        except NumericDivergence:
            metrics[name] = None
            continue
        sim.to_csv(cfg.out / f"trajectory_{name}.csv")
        metrics[name] = sim.metrics
    data = res.to_dict()
    data.update({"engine": cfg.engine, "tuned_on": target, "best_genome": best.to_dict(), "metrics": metrics,
                 "population": opt_cfg.population, "generations": opt_cfg.generations})
    _write_json(cfg.out / "opt_result.json", data)
    return EXIT_OK


def cmd_compare(cfg: RunConfig) -> int:
    if not cfg.rows:
        raise ConfigError("compare.rows", "at least one row is required")

    def report(label, target, seed, res):
        print(f"{label} tune_on={target} seed={seed} best={res.best_fitness:.10g} evals={res.evaluations}",
              flush=True)

    table = compare(cfg.rows, cfg.scenarios, cfg.sim_config(), seeds=cfg.seeds, tune_on=cfg.tune_on,
                    gamma=cfg.gamma, keep_results=True, progress=report, space=search_space(cfg.bounds))
    cfg.out.mkdir(parents=True, exist_ok=True)
    (cfg.out / "compare.csv").write_text(table.to_csv())
    cells_dir = cfg.out / "cells"
    cells_dir.mkdir(exist_ok=True)
    detail = []
    for row in table.rows:
        for scen in table.scenarios:
            cell = table.median_cell(row, scen)
            if cell.result is not None:
                cell.result.to_csv(cells_dir / f"{_slug(row)}_{scen}.csv")
            for c in table.cells[(row, scen)]:
                detail.append({"controller": row, "scenario": scen, "seed": c.seed,
                               "mse_x1": c.value if c.value != float("inf") else None,
                               "genome": c.genome.to_dict() if c.genome else None})
    _write_json(cfg.out / "compare_cells.json", detail)
    print(table.to_csv(), end="")
    return EXIT_OK


COMMANDS = {"simulate": cmd_simulate, "optimize": cmd_optimize, "compare": cmd_compare}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qcarfuzz", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="JSON run configuration")
        p.add_argument("--seed", type=int, help="overrides run.seed")
        p.add_argument("--out", help="output directory (overrides run.out)")
        p.add_argument("--dt", type=float, help="integration step [s]")
        p.add_argument("--horizon", type=float, help="simulated time [s]")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    overrides = {"seed": args.seed, "out": args.out, "dt": args.dt, "horizon": args.horizon}
    try:
        cfg = load_config(args.config, overrides)
        return COMMANDS[args.command](cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericDivergence as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DIVERGED


if __name__ == "__main__":
    sys.exit(main())
