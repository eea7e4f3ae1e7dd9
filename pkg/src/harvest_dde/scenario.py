"""Scenario files: one JSON document with model/initial/integration/analysis/
periodic/outputs/sweep sections. Parsing errors carry the dotted field path."""
from __future__ import annotations

import copy
import json
from dataclasses import dataclass, field
from typing import Any, Optional

from .analysis import DEFAULT_FLOOR, DEFAULT_GRID_N, DEFAULT_QUAD_N
from .dde_core import IntegrationConfig
from .errors import ConfigError
from .model import Constant, History, ModelParams, coefficient_from_dict

SECTIONS = ("model", "initial", "integration", "analysis", "periodic", "outputs", "sweep")


def _num(d, key, path, default=None, cast=float, required=False):
    if key not in d or d[key] is None:
        if required:
            raise ConfigError("missing required field", f"{path}.{key}")
        return default
    v = d[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"expected a number, got {v!r}", f"{path}.{key}")
    if cast is int and int(v) != v:
        raise ConfigError(f"expected an integer, got {v!r}", f"{path}.{key}")
    return cast(v)


@dataclass
class AnalysisSettings:
    grid_n: int = DEFAULT_GRID_N
    quad_n: int = DEFAULT_QUAD_N
    horizon: Optional[float] = None
    tol: float = 1e-6
    floor: float = DEFAULT_FLOOR


@dataclass
class PeriodicSettings:
    seed: Any = field(default_factory=lambda: Constant(1.0))
    max_iter: int = 200
    tol: float = 1e-8
    h: Optional[float] = None
    n_samples: Optional[int] = None
    force: bool = False


@dataclass
class Scenario:
    model: ModelParams
    phi: Any
    N0: float
    integration: IntegrationConfig
    analysis: AnalysisSettings = field(default_factory=AnalysisSettings)
    periodic: PeriodicSettings = field(default_factory=PeriodicSettings)
    outputs: dict = field(default_factory=dict)
    sweep: dict = field(default_factory=dict)

    @property
    def history(self):
        return History.for_params(self.model, self.phi, self.N0, self.integration.t_end)

    @property
    def bounds_horizon(self):
        if self.analysis.horizon is not None:
            return self.analysis.horizon
        if self.model.T is not None:
            return self.model.T
        return self.integration.t_end

    @classmethod
    def from_dict(cls, d):
        if not isinstance(d, dict):
            raise ConfigError("scenario must be a JSON object")
        unknown = sorted(set(d) - set(SECTIONS))
        if unknown:
            raise ConfigError(f"unknown section {unknown[0]!r}", unknown[0])
        if "model" not in d:
            raise ConfigError("missing required section", "model")
        model = ModelParams.from_dict(d["model"], "model")
        if not model.gamma > 0:
            raise ConfigError("gamma must be > 0", "model.gamma")

        ini = d.get("initial", {})
        if not isinstance(ini, dict):
            raise ConfigError("expected an object", "initial")
        N0 = _num(ini, "N0", "initial", required=True)
        if not N0 > 0:
            raise ConfigError("N0 must be > 0", "initial.N0")
        phi = coefficient_from_dict(ini.get("phi", N0), "initial.phi")

        it = d.get("integration", {})
        if not isinstance(it, dict):
            raise ConfigError("expected an object", "integration")
        try:
            integration = IntegrationConfig(
                h=_num(it, "h", "integration", required=True),
                t_end=_num(it, "t_end", "integration", required=True),
                positivity_floor=_num(it, "positivity_floor", "integration", 0.0),
                max_lag_iterations=_num(it, "max_lag_iterations", "integration", 3, int),
            )
        except ValueError as exc:
            raise ConfigError(str(exc), "integration") from exc

        an = d.get("analysis", {})
        analysis = AnalysisSettings(
            grid_n=_num(an, "grid_n", "analysis", DEFAULT_GRID_N, int),
            quad_n=_num(an, "quad_n", "analysis", DEFAULT_QUAD_N, int),
            horizon=_num(an, "horizon", "analysis"),
            tol=_num(an, "tol", "analysis", 1e-6),
            floor=_num(an, "floor", "analysis", DEFAULT_FLOOR),
        )
        if analysis.grid_n < 2:
            raise ConfigError("grid_n must be >= 2", "analysis.grid_n")
        if analysis.quad_n < 2:
            raise ConfigError("quad_n must be >= 2", "analysis.quad_n")

        pe = d.get("periodic", {})
        seed = coefficient_from_dict(pe.get("seed", 1.0), "periodic.seed")
        force = pe.get("force", False)
        if not isinstance(force, bool):
            raise ConfigError("expected true/false", "periodic.force")
        periodic = PeriodicSettings(
            seed=seed,
            max_iter=_num(pe, "max_iter", "periodic", 200, int),
            tol=_num(pe, "tol", "periodic", 1e-8),
            h=_num(pe, "h", "periodic"),
            n_samples=_num(pe, "n_samples", "periodic", None, int),
            force=force,
        )

        outputs = d.get("outputs", {})
        sweep = d.get("sweep", {})
        for name, sec in (("outputs", outputs), ("sweep", sweep)):
            if not isinstance(sec, dict):
                raise ConfigError("expected an object", name)
        return cls(model, phi, N0, integration, analysis, periodic,
                   copy.deepcopy(outputs), copy.deepcopy(sweep))

    def to_dict(self):
        return {
            "model": self.model.to_dict(),
            "initial": {"phi": self.phi.to_dict(), "N0": self.N0},
            "integration": self.integration.to_dict(),
            "analysis": {
                "grid_n": self.analysis.grid_n,
                "quad_n": self.analysis.quad_n,
                "horizon": self.analysis.horizon,
                "tol": self.analysis.tol,
                "floor": self.analysis.floor,
            },
            "periodic": {
                "seed": self.periodic.seed.to_dict(),
                "max_iter": self.periodic.max_iter,
                "tol": self.periodic.tol,
                "h": self.periodic.h,
                "n_samples": self.periodic.n_samples,
                "force": self.periodic.force,
            },
            "outputs": copy.deepcopy(self.outputs),
            "sweep": copy.deepcopy(self.sweep),
        }


def load_scenario_dict(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except FileNotFoundError as exc:
        raise ConfigError("config file not found", str(path)) from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}",
                          str(path)) from exc


def load_scenario(path):
    return Scenario.from_dict(load_scenario_dict(path))


def set_path(d, dotted, value):
    """Return a copy of ``d`` with the existing scalar at ``dotted`` replaced."""
    out = copy.deepcopy(d)
    keys = dotted.split(".")
    node = out
    for i, k in enumerate(keys[:-1]):
        if not isinstance(node, dict) or k not in node:
            raise ConfigError("sweep axis does not exist", ".".join(keys[: i + 1]))
        node = node[k]
    last = keys[-1]
    if not isinstance(node, dict) or last not in node:
        raise ConfigError("sweep axis does not exist", dotted)
    current = node[last]
    if isinstance(current, (dict, list)):
        raise ConfigError("sweep axis must reference a scalar field", dotted)
    node[last] = value
    return out
