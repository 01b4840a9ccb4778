"""Configuration-driven command line entry point.

Subcommands: groundstate, evolve, conformal-check, classify, sweep, preset,
check-conditions.  A run is described by one JSON config file; presets
expand to fully explicit configs that are echoed into summary.json.  Exit
codes: 0 success, 2 config error, 3 numerical failure, 4 blow-up detected
where none was allowed.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from typing import Any

import numpy as np

from . import conformal, diagnostics
from .conformal import ClassifyParams, GlobalVerdict, classify_global
from .evolve import IntegrationResult, SimConfig, integrate
from .grid import ComplexField, make_grid
from .nonlinearity import (ConditionPreconditionError, SeriesNonlinearity,
                           check_condition)
from .petviashvili import (PetviashviliDiverged, PetviashviliMaxIter,
                           solve_ground_state)
from .presets import PRESETS, expand_preset
from .profiles import (double_ground_state, gaussian, polynomial_decay,
                       quadratic_phase, sech_ground_state)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_UNEXPECTED_BLOWUP = 4


class ConfigError(ValueError):
    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"config error at {path or '<root>'}: {message}")


_ALLOWED_KEYS = {
    "": {"command", "preset", "experiment", "notes", "grid", "stepper",
         "nonlinearity", "initial_data", "groundstate", "run", "sweep",
         "classify", "conformal"},
    "grid": {"L", "N"},
    "stepper": {"kind", "dt", "t_end", "backend", "stage_tol"},
    "nonlinearity": {"kind", "terms", "c", "r", "scale", "tail_cut"},
    "initial_data": {"kind", "A", "n", "alpha", "eps", "alpha1", "eps1", "eps2",
                     "omega", "width", "scale_A", "phase_b", "seed_height"},
    "groundstate": {"omega", "tol", "max_iter", "gamma", "seed_height",
                    "compare_explicit"},
    "run": {"diagnostics_stride", "blowup_threshold", "weight_n",
            "snapshot_times", "nonautonomous_b", "allow_blowup"},
    "sweep": {"scale_A", "phase_b", "eps1", "scale", "omega"},
    "classify": {"min_records", "slope_tol", "tail_fraction", "osc_floor",
                 "osc_bound"},
    "conformal": {"b", "t_list", "dt", "u_stepper", "v_stepper"},
}


def validate_config(cfg: dict, path: str = "") -> None:
    """Reject unknown keys anywhere in the config tree."""
    if not isinstance(cfg, dict):
        raise ConfigError(path, f"expected an object, got {type(cfg).__name__}")
    allowed = _ALLOWED_KEYS.get(path)
    if allowed is not None:
        unknown = set(cfg) - allowed
        if unknown:
            raise ConfigError(path, f"unknown keys {sorted(unknown)}; allowed: {sorted(allowed)}")
    for key, value in cfg.items():
        if isinstance(value, dict) and key in _ALLOWED_KEYS:
            validate_config(value, key)


def _require(cfg: dict, key: str, path: str) -> Any:
    if key not in cfg:
        raise ConfigError(path, f"missing required key {key!r}")
    return cfg[key]


def build_nonlinearity(block: dict) -> SeriesNonlinearity:
    kind = _require(block, "kind", "nonlinearity")
    try:
        if kind == "finite_sum":
            terms = [(complex(d[0], d[1]) if isinstance(d, (list, tuple)) else complex(d), float(a))
                     for d, a in _require(block, "terms", "nonlinearity")]
            return SeriesNonlinearity.finite_sum(terms)
        common = dict(c=float(block.get("c", 1.0)), r=float(block.get("r", 1.0)),
                      scale=float(block.get("scale", 1.0)))
        if kind == "exp":
            return SeriesNonlinearity(kind="exp", tail_cut=int(block.get("tail_cut", 1)),
                                      **common)
        if kind == "exp_tail":
            if "tail_cut" in block:
                return SeriesNonlinearity(kind="exp", tail_cut=int(block["tail_cut"]), **common)
            return SeriesNonlinearity.exp_tail(**common)
        if kind == "sin":
            return SeriesNonlinearity(kind="sin", tail_cut=int(block.get("tail_cut", 0)), **common)
        if kind == "cos":
            return SeriesNonlinearity(kind="cos", tail_cut=int(block.get("tail_cut", 1)), **common)
    except (ValueError, TypeError) as exc:
        raise ConfigError("nonlinearity", str(exc)) from exc
    raise ConfigError("nonlinearity", f"unknown kind {kind!r}")


def build_initial_data(block: dict, grid, series: SeriesNonlinearity) -> ComplexField:
    kind = _require(block, "kind", "initial_data")
    try:
        if kind == "polynomial":
            u = polynomial_decay(float(_require(block, "A", "initial_data")),
                                 float(_require(block, "n", "initial_data")), grid)
        elif kind == "gaussian":
            u = gaussian(float(block.get("A", 1.0)), float(block.get("width", 1.0)), grid)
        elif kind == "sech_gs":
            u = sech_ground_state(float(_require(block, "alpha", "initial_data")),
                                  float(_require(block, "eps", "initial_data")), grid)
        elif kind == "double_gs":
            u = double_ground_state(float(_require(block, "alpha1", "initial_data")),
                                    float(_require(block, "eps1", "initial_data")),
                                    float(_require(block, "eps2", "initial_data")),
                                    float(_require(block, "omega", "initial_data")), grid)
        elif kind == "numeric_gs":
            seed_h = block.get("seed_height")
            seed = None if seed_h is None else gaussian(
                float(seed_h), 1.0 / math.sqrt(float(block["omega"])), grid)
            result = solve_ground_state(series, float(_require(block, "omega", "initial_data")),
                                        grid, seed=seed)
            u = result.Q
        else:
            raise ConfigError("initial_data", f"unknown kind {kind!r}")
    except (ValueError, TypeError) as exc:
        raise ConfigError("initial_data", str(exc)) from exc
    if "scale_A" in block:
        u = ComplexField(grid, float(block["scale_A"]) * u.values, u.time)
    if "phase_b" in block:
        u = quadratic_phase(u, float(block["phase_b"]))
    return u


def build_sim_config(cfg: dict) -> SimConfig:
    grid_blk = _require(cfg, "grid", "")
    step_blk = _require(cfg, "stepper", "")
    run_blk = cfg.get("run", {})
    kind = step_blk.get("kind", "irk4")
    if kind not in ("irk4", "splitstep"):
        raise ConfigError("stepper", f"unknown kind {kind!r}")
    try:
        return SimConfig(
            L=float(_require(grid_blk, "L", "grid")),
            N=int(_require(grid_blk, "N", "grid")),
            dt=float(_require(step_blk, "dt", "stepper")),
            t_end=float(_require(step_blk, "t_end", "stepper")),
            series=build_nonlinearity(_require(cfg, "nonlinearity", "")),
            stepper=kind,
            backend=step_blk.get("backend", "spectral"),
            nonautonomous_b=run_blk.get("nonautonomous_b"),
            diagnostics_stride=int(run_blk.get("diagnostics_stride", 10)),
            blowup_threshold=float(run_blk.get("blowup_threshold", 50.0)),
            weight_n=run_blk.get("weight_n"),
            snapshot_times=tuple(run_blk.get("snapshot_times", ())),
            stage_tol=float(step_blk.get("stage_tol", 1e-13)),
        )
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError("stepper", str(exc)) from exc


def _drifts(records) -> tuple[float, float | None]:
    mass0 = records[0].mass
    mass_drift = max(abs(r.mass - mass0) for r in records) / mass0 if mass0 else 0.0
    if records[0].energy.tracked and abs(records[0].energy.total) > 0:
        e0 = records[0].energy.total
        energy_drift = max(abs(r.energy.total - e0) for r in records
                           if r.energy.tracked) / abs(e0)
    else:
        energy_drift = None
    return mass_drift, energy_drift


def _summarize(cfg: dict, result: IntegrationResult,
               verdict: GlobalVerdict | None) -> dict:
    mass_drift, energy_drift = _drifts(result.records)
    return {
        "verdict": verdict.value if verdict is not None else None,
        "t_end_reached": result.final.time,
        "mass_drift_rel": mass_drift,
        "energy_drift_rel": energy_drift,
        "blowup_time": result.blowup.time if result.blowup else None,
        "blowup_cause": result.blowup.cause if result.blowup else None,
        "config_echo": cfg,
    }


def run_evolve(cfg: dict, outdir: str) -> int:
    sim = build_sim_config(cfg)
    grid = sim.make_grid()
    series = sim.series
    u0 = build_initial_data(_require(cfg, "initial_data", ""), grid, series)
    result = integrate(sim, u0)
    verdict = classify_global(result.records, _classify_params(cfg))
    os.makedirs(outdir, exist_ok=True)
    diagnostics.persist(result.records, _summarize(cfg, result, verdict), outdir)
    for t, snap in result.snapshots.items():
        diagnostics.write_field_csv(snap, os.path.join(outdir, f"snap_{t:.6g}.csv"))
    print(f"evolve: t={result.final.time:.6g} verdict={verdict.value} "
          f"blowup={result.blowup}")
    if result.blown_up and not cfg.get("run", {}).get("allow_blowup", False):
        return EXIT_UNEXPECTED_BLOWUP
    return EXIT_OK


def run_groundstate(cfg: dict, outdir: str) -> int:
    grid_blk = _require(cfg, "grid", "")
    gs_blk = _require(cfg, "groundstate", "")
    grid = make_grid(float(grid_blk["L"]), int(grid_blk["N"]))
    series = build_nonlinearity(_require(cfg, "nonlinearity", ""))
    seed_h = gs_blk.get("seed_height")
    omega = float(_require(gs_blk, "omega", "groundstate"))
    seed = None if seed_h is None else gaussian(float(seed_h), 1.0 / math.sqrt(omega), grid)
    result = solve_ground_state(
        series, omega, grid, seed=seed,
        gamma=gs_blk.get("gamma", "auto"),
        tol=float(gs_blk.get("tol", 1e-12)),
        max_iter=int(gs_blk.get("max_iter", 2000)),
    )
    os.makedirs(outdir, exist_ok=True)
    diagnostics.write_field_csv(result.Q, os.path.join(outdir, "profile.csv"))
    diagnostics.write_summary(
        {"omega": result.omega, "residual_inf": result.residual_inf,
         "iterations": result.iterations, "config_echo": cfg},
        os.path.join(outdir, "result.json"))
    if gs_blk.get("compare_explicit"):
        _write_explicit_comparison(cfg, series, result, grid, outdir)
    print(f"groundstate: omega={omega} residual={result.residual_inf:.3e} "
          f"iterations={result.iterations}")
    return EXIT_OK


def _write_explicit_comparison(cfg, series, result, grid, outdir) -> None:
    """For a two-power series with alpha2 = 2 alpha1, emit num-vs-exact CSV."""
    import csv as _csv

    if series.kind != "finite_sum" or len(series.terms) != 2:
        raise ConfigError("groundstate", "compare_explicit needs a two-power finite sum")
    (d1, a1), (d2, a2) = series.terms
    if abs(a2 - 2 * a1) > 1e-12:
        raise ConfigError("groundstate", "explicit solution needs alpha2 = 2 alpha1")
    q_exact = double_ground_state(a1, d1.real, d2.real, result.omega, grid)
    diff = np.abs(result.Q.values - q_exact.values)
    path = os.path.join(outdir, "gs_comparison.csv")
    with open(path, "w", newline="") as fh:
        w = _csv.writer(fh)
        w.writerow(["x", "q_num", "q_exact", "diff"])
        for xj, qn, qe, dj in zip(grid.x, result.Q.values.real, q_exact.values.real, diff):
            w.writerow([f"{xj:.17g}", f"{qn:.17g}", f"{qe:.17g}", f"{dj:.17g}"])


def _classify_params(cfg: dict) -> ClassifyParams:
    blk = cfg.get("classify", {})
    return ClassifyParams(
        min_records=int(blk.get("min_records", 20)),
        slope_tol=float(blk.get("slope_tol", 1e-3)),
        tail_fraction=float(blk.get("tail_fraction", 0.25)),
        osc_floor=float(blk.get("osc_floor", 0.1)),
        osc_bound=float(blk.get("osc_bound", 3.0)),
    )


def run_classify(indir: str, cfg: dict | None = None) -> int:
    records = diagnostics.load_trajectory(os.path.join(indir, "trajectory.csv"))
    verdict = classify_global(records, _classify_params(cfg or {}))
    diagnostics.write_summary({"verdict": verdict.value},
                              os.path.join(indir, "verdict.json"))
    print(f"classify: {verdict.value}")
    return EXIT_OK


def _sweep_points(sweep_blk: dict) -> list[dict]:
    import itertools

    axes = [(key, list(vals)) for key, vals in sweep_blk.items()]
    if not axes:
        return [{}]
    keys = [k for k, _ in axes]
    return [dict(zip(keys, combo)) for combo in itertools.product(*(v for _, v in axes))]


def _apply_sweep_point(cfg: dict, point: dict) -> dict:
    import copy

    out = copy.deepcopy(cfg)
    out.pop("sweep", None)
    for key, value in point.items():
        if key == "scale_A":
            out.setdefault("initial_data", {})["scale_A"] = value
        elif key == "phase_b":
            out.setdefault("initial_data", {})["phase_b"] = value
        elif key == "eps1":
            out["nonlinearity"]["terms"][0][0] = value
        elif key == "scale":
            out["nonlinearity"]["scale"] = value
        elif key == "omega":
            out.setdefault("groundstate", {})["omega"] = value
    return out


def _run_sweep_point(args: tuple[dict, dict, str]) -> dict:
    cfg, point, rundir = args
    is_gs = "stepper" not in cfg
    if is_gs:
        try:
            code = run_groundstate(cfg, rundir)
            row = {"verdict": "converged" if code == 0 else "failed"}
        except (PetviashviliDiverged, PetviashviliMaxIter) as exc:
            row = {"verdict": f"failed: {exc}"}
        row.update({"t_blowup_or_horizon": math.nan, "max_scatter_indicator": math.nan})
    else:
        sim = build_sim_config(cfg)
        grid = sim.make_grid()
        u0 = build_initial_data(cfg["initial_data"], grid, sim.series)
        result = integrate(sim, u0)
        verdict = classify_global(result.records, _classify_params(cfg))
        os.makedirs(rundir, exist_ok=True)
        diagnostics.persist(result.records, _summarize(cfg, result, verdict), rundir)
        row = {
            "verdict": verdict.value,
            "t_blowup_or_horizon": result.blowup.time if result.blowup else result.final.time,
            "max_scatter_indicator": max(r.scatter_indicator for r in result.records),
        }
    row.update({"b": point.get("phase_b", math.nan),
                "A": point.get("scale_A", point.get("eps1", point.get("scale", math.nan)))})
    return row


def run_sweep(cfg: dict, outdir: str, workers: int = 1) -> int:
    import csv as _csv

    points = _sweep_points(cfg.get("sweep", {}))
    tasks = []
    for i, point in enumerate(points):
        tag = "_".join(f"{k}={v:g}" for k, v in point.items()) or f"{i}"
        tasks.append((_apply_sweep_point(cfg, point), point,
                      os.path.join(outdir, f"run_{i:03d}_{tag}")))
    if workers > 1:
        import multiprocessing as mp

        with mp.Pool(workers) as pool:
            rows = pool.map(_run_sweep_point, tasks)
    else:
        rows = [_run_sweep_point(t) for t in tasks]
    os.makedirs(outdir, exist_ok=True)
    with open(os.path.join(outdir, "verdicts.csv"), "w", newline="") as fh:
        w = _csv.DictWriter(fh, fieldnames=["b", "A", "verdict",
                                            "t_blowup_or_horizon",
                                            "max_scatter_indicator"])
        w.writeheader()
        for row in rows:
            w.writerow(row)
    for row in rows:
        print(f"sweep point b={row['b']} A={row['A']}: {row['verdict']}")
    return EXIT_OK


def run_conformal_check(cfg: dict, outdir: str) -> int:
    blk = _require(cfg, "conformal", "")
    grid_blk = _require(cfg, "grid", "")
    grid = make_grid(float(grid_blk["L"]), int(grid_blk["N"]))
    series = build_nonlinearity(_require(cfg, "nonlinearity", ""))
    v0 = build_initial_data(_require(cfg, "initial_data", ""), grid, series)
    report = conformal.conformal_equivalence_check(
        v0, float(_require(blk, "b", "conformal")), series,
        [float(t) for t in _require(blk, "t_list", "conformal")],
        float(_require(blk, "dt", "conformal")),
        u_stepper=blk.get("u_stepper", "irk4"),
        v_stepper=blk.get("v_stepper", "splitstep"),
    )
    os.makedirs(outdir, exist_ok=True)
    diagnostics.write_summary(
        {"b": report.b, "t_list": list(report.t_list),
         "deviations_l2": list(report.deviations_l2),
         "max_deviation": report.max_deviation, "config_echo": cfg},
        os.path.join(outdir, "equivalence.json"))
    print(f"conformal-check: max L2 deviation {report.max_deviation:.3e}")
    return EXIT_OK


def run_check_conditions(cfg: dict) -> int:
    series = build_nonlinearity(_require(cfg, "nonlinearity", ""))
    out = []
    for cond in ("coeffcond", "coeffcond2", "coeffcond2.1", "coeffcond3"):
        for R0 in (0.5, 1.0, 2.0):
            try:
                rep = check_condition(series, cond, R0=R0, M=6)
                out.append({"condition": cond, "R0": R0,
                            "status": rep.verdict.status, "bound": rep.verdict.bound,
                            "analytic_all_R0": rep.analytic_all_R0})
            except ConditionPreconditionError as exc:
                out.append({"condition": cond, "R0": R0, "status": "rejected",
                            "reason": str(exc)})
    print(json.dumps(out, indent=2))
    return EXIT_OK


def _parse_set(values: list[str]) -> dict:
    out = {}
    for item in values:
        if "=" not in item:
            raise ConfigError("--set", f"expected key=value, got {item!r}")
        key, _, raw = item.partition("=")
        try:
            out[key] = json.loads(raw)
        except json.JSONDecodeError:
            out[key] = raw
    return out


def _dispatch(cfg: dict, outdir: str, workers: int) -> int:
    validate_config(cfg)
    command = cfg.get("command", "evolve")
    if command == "evolve":
        return run_evolve(cfg, outdir)
    if command == "groundstate":
        return run_groundstate(cfg, outdir)
    if command == "sweep":
        return run_sweep(cfg, outdir, workers)
    if command == "conformal-check":
        return run_conformal_check(cfg, outdir)
    raise ConfigError("command", f"unknown command {command!r}")


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="cnls", description=__doc__)
    sub = parser.add_subparsers(dest="cmd", required=True)

    def add_common(p):
        p.add_argument("--config", help="path to the JSON run config")
        p.add_argument("--preset", choices=sorted(PRESETS),
                       help="expand a preset instead of reading --config")
        p.add_argument("--out", default="out", help="output directory")
        p.add_argument("--workers", type=int, default=1)

    for name in ("evolve", "groundstate", "sweep", "conformal-check"):
        add_common(sub.add_parser(name))
    p_classify = sub.add_parser("classify")
    p_classify.add_argument("--in", dest="indir", required=True,
                            help="directory holding trajectory.csv")
    p_classify.add_argument("--config", default=None)
    p_cond = sub.add_parser("check-conditions")
    p_cond.add_argument("--config", required=True)
    p_preset = sub.add_parser("preset")
    p_preset.add_argument("preset_id", choices=sorted(PRESETS))
    p_preset.add_argument("--dry-run", action="store_true",
                          help="print the expanded config without computing")
    p_preset.add_argument("--out", default="out")
    p_preset.add_argument("--workers", type=int, default=1)
    p_preset.add_argument("--set", action="append", default=[], metavar="KEY=VAL",
                          help="dotted-key override, e.g. stepper.dt=0.005")

    args = parser.parse_args(argv)
    try:
        if args.cmd == "preset":
            cfg = expand_preset(args.preset_id, _parse_set(args.set))
            if args.dry_run:
                print(json.dumps(cfg, indent=2, sort_keys=True))
                return EXIT_OK
            return _dispatch(cfg, args.out, args.workers)
        if args.cmd == "classify":
            cfg = None
            if args.config:
                with open(args.config) as fh:
                    cfg = json.load(fh)
                validate_config(cfg)
            return run_classify(args.indir, cfg)
        if args.cmd == "check-conditions":
            with open(args.config) as fh:
                cfg = json.load(fh)
            validate_config(cfg)
            return run_check_conditions(cfg)
        if args.preset:
            if args.config:
                raise ConfigError("--preset", "give either --config or --preset")
            cfg = expand_preset(args.preset)
        elif args.config:
            with open(args.config) as fh:
                cfg = json.load(fh)
        else:
            raise ConfigError("--config", "one of --config or --preset is required")
        cfg.setdefault("command", args.cmd)
        if cfg["command"] != args.cmd:
            raise ConfigError("command", f"config says {cfg['command']!r}, "
                                         f"invoked as {args.cmd!r}")
        return _dispatch(cfg, args.out, args.workers)
    except (ConfigError, json.JSONDecodeError, FileNotFoundError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (PetviashviliDiverged, PetviashviliMaxIter, RuntimeError,
            ConditionPreconditionError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
