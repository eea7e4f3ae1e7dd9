"""Command-line front end.

    harvest-dde simulate --config scenario.json --out results/
    harvest-dde bounds   --config scenario.json --out results/
    harvest-dde periodic --config scenario.json --out results/ [--force]
    harvest-dde sweep    --config scenario.json --out results/ [--workers 4]

Exit codes: 0 ok, 2 config error, 3 premise violation, 4 integration
failure, 5 periodic solve not converged.
"""
from __future__ import annotations

import argparse
import csv
import itertools
import json
import logging
import math
import os
import sys
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path

from .analysis import (
    persistence_bounds,
    theorem2_margins,
    validate_premises,
    verify_bounds,
)
from .dde_core import integrate
from .errors import ConfigError, NotConverged, PositivityLoss, PremiseViolation
from .periodic import find_periodic
from .scenario import Scenario, load_scenario_dict, set_path

log = logging.getLogger("harvest_dde")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_PREMISE = 3
EXIT_INTEGRATION = 4
EXIT_NOT_CONVERGED = 5

SWEEP_COLUMNS = ["premises_ok", "failed_premises", "lower", "upper", "m", "M", "B", "condition"]


class CommandFailed(Exception):
    def __init__(self, code, block):
        self.code = code
        self.block = block
        super().__init__(block.get("message", ""))


def _json_default(o):
    if hasattr(o, "tolist"):
        return o.tolist()
    if hasattr(o, "value"):
        return o.value
    raise TypeError(f"not JSON serializable: {type(o).__name__}")


def _clean(o):
    # non-finite floats become strings so the output stays strict JSON
    if isinstance(o, float) and not math.isfinite(o):
        return repr(o)
    if isinstance(o, dict):
        return {k: _clean(v) for k, v in o.items()}
    if isinstance(o, (list, tuple)):
        return [_clean(v) for v in o]
    return o


def write_json(path, obj):
    with open(path, "w") as fh:
        json.dump(_clean(obj), fh, indent=2, default=_json_default, allow_nan=False)
        fh.write("\n")


def _fmt(x):
    if isinstance(x, float):
        return f"{x:.17g}"
    return "" if x is None else str(x)


def _error_block(exc, code):
    block = {"code": code, "type": type(exc).__name__, "message": str(exc)}
    if isinstance(exc, PremiseViolation):
        block["failed_premises"] = list(exc.failed)
    if isinstance(exc, ConfigError):
        block["field"] = exc.path
    if isinstance(exc, PositivityLoss):
        block["t"] = exc.t
    if isinstance(exc, NotConverged):
        block["residual"] = exc.residual
        block["iterations"] = exc.iterations
    return block


def print_table(title, rows):
    width = max(len(k) for k, _ in rows)
    print(title)
    for k, v in rows:
        v = f"{v:.10g}" if isinstance(v, float) else v
        print(f"  {k:<{width}}  {v}")


def apply_overrides(sc, grid_n=None, quad_n=None, tol=None, periodic_tol=False):
    an = sc.analysis
    if grid_n is not None:
        an = replace(an, grid_n=grid_n)
    if quad_n is not None:
        an = replace(an, quad_n=quad_n)
    if tol is not None and not periodic_tol:
        an = replace(an, tol=tol)
    sc = replace(sc, analysis=an)
    if tol is not None and periodic_tol:
        sc = replace(sc, periodic=replace(sc.periodic, tol=tol))
    return sc


def _check_premises(sc, horizon):
    prem = validate_premises(sc.model, horizon, sc.analysis.grid_n, sc.analysis.floor)
    if not prem.ok:
        names = ", ".join(prem.failed)
        raise PremiseViolation(f"premises fail on [0, {horizon:g}]: {names}", failed=prem.failed)
    return prem


def run_simulate(sc, out):
    """Integrate, compute bounds, verify containment; write CSV + JSON."""
    report_path = out / "simulate.json"
    report = {"command": "simulate", "scenario": sc.to_dict()}
    try:
        prem = _check_premises(sc, sc.integration.t_end)
        report["premises"] = prem.to_dict()
        traj = integrate(sc.model, sc.history, sc.integration)
        bounds = persistence_bounds(sc.model, sc.N0, sc.bounds_horizon,
                                    sc.analysis.grid_n, sc.analysis.quad_n, sc.analysis.floor)
        verdict = verify_bounds(traj, bounds, sc.analysis.tol)
    except (PremiseViolation, PositivityLoss) as exc:
        code = EXIT_PREMISE if isinstance(exc, PremiseViolation) else EXIT_INTEGRATION
        report["error"] = _error_block(exc, code)
        write_json(report_path, report)
        raise CommandFailed(code, report["error"]) from exc

    oversample = int(sc.outputs.get("oversample", 1))
    traj.to_csv(out / sc.outputs.get("trajectory_csv", "trajectory.csv"), oversample)
    report["bounds"] = bounds.to_dict()
    report["verification"] = {"passed": verdict.passed, "tol": verdict.tol,
                              "n_violations": len(verdict.violations),
                              "violations": verdict.violations[:20]}
    report["trajectory"] = {"t_end": traj.t_end, "h": traj.h, "n_nodes": len(traj.N),
                            "N_min": float(traj.N.min()), "N_max": float(traj.N.max()),
                            "N_final": float(traj.N[-1])}
    write_json(report_path, report)
    if not verdict.passed:
        log.warning("trajectory leaves the persistence bounds at %d nodes", len(verdict.violations))
    print_table("simulate", [
        ("nodes", len(traj.N)), ("N min", float(traj.N.min())), ("N max", float(traj.N.max())),
        ("lower bound", bounds.lower), ("upper bound", bounds.upper),
        ("contained", "yes" if verdict.passed else "NO"),
    ])
    return report


def compute_bounds(sc):
    _check_premises(sc, sc.bounds_horizon)
    return persistence_bounds(sc.model, sc.N0, sc.bounds_horizon,
                              sc.analysis.grid_n, sc.analysis.quad_n, sc.analysis.floor)


def run_bounds(sc, out):
    try:
        bounds = compute_bounds(sc)
    except PremiseViolation as exc:
        block = _error_block(exc, EXIT_PREMISE)
        write_json(out / "bounds.json", {"command": "bounds", "error": block})
        raise CommandFailed(EXIT_PREMISE, block) from exc
    d = bounds.to_dict()
    write_json(out / "bounds.json", d)
    print_table("persistence bounds", [
        ("lower", bounds.lower), ("upper", bounds.upper),
        ("inf K(r/b-1)^(1/gamma)", bounds.inner_inf), ("sup K(r/b-1)^(1/gamma)", bounds.inner_sup),
        ("sup int b", bounds.sup_int_b), ("sup int (r-b)", bounds.sup_int_rb),
    ])
    return d


def run_periodic(sc, out, force=False):
    report = {"command": "periodic"}
    try:
        if sc.model.T is None:
            raise ConfigError("periodic solve needs a declared period", "model.T")
        _check_premises(sc, sc.model.T)
        margins = theorem2_margins(sc.model, sc.analysis.grid_n)
    except PremiseViolation as exc:
        report["error"] = _error_block(exc, EXIT_PREMISE)
        write_json(out / "periodic.json", report)
        raise CommandFailed(EXIT_PREMISE, report["error"]) from exc
    report["margins"] = margins.to_dict()
    if margins.condition.value == "NEITHER" and not (force or sc.periodic.force):
        report["note"] = "neither periodicity condition holds; solve skipped (use --force)"
        write_json(out / "periodic.json", report)
        print_table("periodicity margins", [("m", margins.m), ("M", margins.M),
                                            ("condition", margins.condition.value),
                                            ("solve", "skipped")])
        return report
    seed = sc.periodic.seed
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            res = find_periodic(sc.model, seed, sc.periodic.max_iter, sc.periodic.tol,
                                h=sc.periodic.h, n_samples=sc.periodic.n_samples)
    except NotConverged as exc:
        report["error"] = _error_block(exc, EXIT_NOT_CONVERGED)
        report["error"]["trace"] = exc.trace
        write_json(out / "periodic.json", report)
        raise CommandFailed(EXIT_NOT_CONVERGED, report["error"]) from exc
    except PositivityLoss as exc:
        report["error"] = _error_block(exc, EXIT_INTEGRATION)
        write_json(out / "periodic.json", report)
        raise CommandFailed(EXIT_INTEGRATION, report["error"]) from exc
    report["solve"] = res.to_dict()
    res.trajectory_one_period.to_csv(out / sc.outputs.get("periodic_csv", "periodic_trajectory.csv"),
                                     int(sc.outputs.get("oversample", 1)))
    write_json(out / "periodic.json", report)
    print_table("periodic solution", [
        ("m", margins.m), ("M", margins.M), ("condition", margins.condition.value),
        ("iterations", res.iterations), ("residual", res.residual),
        ("periodicity residual", res.periodicity_residual),
    ])
    return report


def sweep_cells(base, axes):
    names = list(axes)
    for name in names:
        values = axes[name]
        if not isinstance(values, list) or not values:
            raise ConfigError("sweep axis needs a non-empty list of values", f"sweep.axes.{name}")
        set_path(base, name, values[0])
    cells = []
    for combo in itertools.product(*(axes[n] for n in names)):
        d = base
        for name, v in zip(names, combo):
            d = set_path(d, name, v)
        cells.append((dict(zip(names, combo)), d))
    return names, cells


def evaluate_cell(cell_dict):
    """One sweep row; premise failures become flagged rows."""
    sc = Scenario.from_dict(cell_dict)
    row = dict.fromkeys(SWEEP_COLUMNS)
    prem = validate_premises(sc.model, sc.bounds_horizon, sc.analysis.grid_n, sc.analysis.floor)
    row["premises_ok"] = prem.ok
    row["failed_premises"] = ";".join(prem.failed)
    if not prem.ok:
        return row
    b = persistence_bounds(sc.model, sc.N0, sc.bounds_horizon, sc.analysis.grid_n,
                           sc.analysis.quad_n, sc.analysis.floor)
    row["lower"] = b.lower
    row["upper"] = b.upper
    if sc.model.T is not None:
        try:
            mg = theorem2_margins(sc.model, sc.analysis.grid_n)
        except PremiseViolation:
            return row
        row.update(m=mg.m, M=mg.M, B=mg.B, condition=mg.condition.value)
    return row


def run_sweep(base_dict, sc, out, workers=None):
    axes = sc.sweep.get("axes", {})
    if not isinstance(axes, dict):
        raise ConfigError("expected an object of axis -> values", "sweep.axes")
    names, cells = sweep_cells(base_dict, axes)
    for _, d in cells:
        Scenario.from_dict(d)
    payload = [d for _, d in cells]
    if workers is None:
        workers = int(sc.sweep.get("workers", min(4, os.cpu_count() or 1)))
    workers = max(1, min(workers, len(payload)))
    if workers == 1:
        rows = [evaluate_cell(d) for d in payload]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(evaluate_cell, payload))
    path = out / sc.outputs.get("sweep_csv", "sweep.csv")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["cell"] + names + SWEEP_COLUMNS)
        for i, ((vals, _), row) in enumerate(zip(cells, rows)):
            w.writerow([i] + [_fmt(vals[n]) for n in names] + [_fmt(row[c]) for c in SWEEP_COLUMNS])
    print(f"sweep: {len(rows)} cells -> {path}")
    return rows


def build_parser():
    p = argparse.ArgumentParser(prog="harvest-dde",
                                description="Delayed Hill-type harvesting model toolkit")
    sub = p.add_subparsers(dest="command", required=True)
    for name, help_ in (("simulate", "integrate and verify persistence bounds"),
                        ("bounds", "compute persistence bounds"),
                        ("periodic", "periodicity margins and periodic-solution search"),
                        ("sweep", "grid over scenario fields")):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("--config", required=True, help="scenario JSON file")
        sp.add_argument("--out", default=None, help="output directory (default: outputs.dir or .)")
        sp.add_argument("--grid-n", type=int, default=None)
        sp.add_argument("--quad-n", type=int, default=None)
        sp.add_argument("--tol", type=float, default=None)
        if name == "periodic":
            sp.add_argument("--force", action="store_true",
                            help="solve even when neither periodicity condition holds")
        if name == "sweep":
            sp.add_argument("--workers", type=int, default=None)
    return p


def _setup_logging():
    level = os.environ.get("HARVEST_DDE_LOG", "error").lower()
    levels = {"error": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}
    logging.basicConfig(level=levels.get(level, logging.ERROR),
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)


def main(argv=None):
    _setup_logging()
    args = build_parser().parse_args(argv)
    try:
        raw = load_scenario_dict(args.config)
        sc = Scenario.from_dict(raw)
        sc = apply_overrides(sc, args.grid_n, args.quad_n, args.tol,
                             periodic_tol=args.command == "periodic")
        out = Path(args.out or sc.outputs.get("dir", "."))
        try:
            out.mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            raise ConfigError(f"cannot create output directory: {exc}", "--out") from exc
        if args.command == "simulate":
            run_simulate(sc, out)
        elif args.command == "bounds":
            run_bounds(sc, out)
        elif args.command == "periodic":
            run_periodic(sc, out, force=args.force)
        else:
            run_sweep(raw, sc, out, args.workers)
    except ConfigError as exc:
        print(json.dumps({"error": _error_block(exc, EXIT_CONFIG)}), file=sys.stderr)
        return EXIT_CONFIG
    except CommandFailed as exc:
        print(json.dumps({"error": _clean(exc.block)}, default=_json_default), file=sys.stderr)
        return exc.code
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
