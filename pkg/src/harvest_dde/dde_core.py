"""Method-of-steps integration with fixed-step RK4 and cubic Hermite dense output.

The stepping kernel comes in two flavours with identical arithmetic: a
compiled Cython module (``harvest_dde._march``) and a pure-Python fallback.
The compiled one is used when importable, unless ``HARVEST_DDE_PURE=1``.
"""
from __future__ import annotations

import csv
import logging
import math
import os
from dataclasses import dataclass

import numpy as np

from . import _march_py
from .errors import InvalidDelay, OutOfRange, PositivityLoss
from .model import History

log = logging.getLogger(__name__)

_march_hill_py = _march_py.march_hill
try:
    if os.environ.get("HARVEST_DDE_PURE", "") in ("1", "true", "yes"):
        raise ImportError("pure-Python backend forced by HARVEST_DDE_PURE")
    from ._march import march_hill as _march_hill_ext

    BACKEND = "cython"
except ImportError:  # pragma: no cover - depends on the build
    _march_hill_ext = None
    BACKEND = "python"


@dataclass(frozen=True)
class IntegrationConfig:
    h: float
    t_end: float
    positivity_floor: float = 0.0
    max_lag_iterations: int = 3

    def __post_init__(self):
        if not self.h > 0:
            raise ValueError("step h must be positive")
        if not self.t_end > 0:
            raise ValueError("t_end must be positive")
        if self.positivity_floor < 0:
            raise ValueError("positivity_floor must be >= 0")
        if self.max_lag_iterations < 1:
            raise ValueError("max_lag_iterations must be >= 1")

    def to_dict(self):
        return {
            "h": self.h,
            "t_end": self.t_end,
            "positivity_floor": self.positivity_floor,
            "max_lag_iterations": self.max_lag_iterations,
        }


class Trajectory:
    """Node values and slopes on an equispaced grid plus the initial history.

    Between nodes the solution is the cubic Hermite interpolant; at or before
    t0 = 0 it is the history (N0 exactly at 0).
    """

    def __init__(self, h, N, D, history, t0=0.0):
        self.h = float(h)
        self.t0 = float(t0)
        self.N = np.asarray(N, dtype=float)
        self.D = np.asarray(D, dtype=float)
        self.N.setflags(write=False)
        self.D.setflags(write=False)
        self.history = history
        self.n_steps = len(self.N) - 1
        self.t_end = self.t0 + self.n_steps * self.h

    @property
    def t(self):
        return self.t0 + self.h * np.arange(self.n_steps + 1)

    @property
    def nodes(self):
        return list(zip(self.t.tolist(), self.N.tolist(), self.D.tolist()))

    def __call__(self, t):
        return evaluate(self, t)

    def sample(self, oversample=1):
        """(t, N) on the node grid refined ``oversample`` times."""
        m = self.n_steps * int(oversample)
        ts = self.t0 + (self.h / oversample) * np.arange(m + 1)
        return ts, evaluate(self, ts)

    def to_csv(self, path, oversample=1):
        ts, ys = self.sample(oversample)
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["t", "N"])
            for a, b in zip(ts.tolist(), ys.tolist()):
                w.writerow([f"{a:.17g}", f"{b:.17g}"])


def evaluate(traj, t):
    """Dense-output value of the trajectory at ``t`` (scalar or array)."""
    scalar = np.ndim(t) == 0
    x = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(x > traj.t_end + 1e-12 * max(1.0, abs(traj.t_end))):
        raise OutOfRange(f"t={x.max()} beyond t_end={traj.t_end}")
    out = np.empty_like(x)
    past = x <= traj.t0
    if np.any(past):
        out[past] = traj.history(x[past] - traj.t0)
    fut = ~past
    if np.any(fut):
        u = (x[fut] - traj.t0) / traj.h
        k = np.clip(np.floor(u).astype(int), 0, traj.n_steps - 1)
        s = u - k
        out[fut] = _march_py.hermite(traj.N[k], traj.D[k], traj.N[k + 1], traj.D[k + 1], s, traj.h)
        on_node = s == 0.0
        if np.any(on_node):
            idx = np.flatnonzero(fut)[on_node]
            out[idx] = traj.N[k[on_node]]
    return float(out[0]) if scalar else out


def _stage_grid(cfg):
    n = max(1, int(math.ceil(cfg.t_end / cfg.h - 1e-9)))
    return n, 0.5 * cfg.h * np.arange(2 * n + 1)


def _lag_inputs(theta, history, ts):
    th = np.asarray(theta(ts), dtype=float)
    if np.any(th < 0):
        bad = ts[np.argmax(th < 0)]
        raise InvalidDelay(f"theta(t) < 0 at t={bad}: lag map g(t) exceeds t")
    g = ts - th
    hist = np.zeros_like(g)
    known = g <= 0.0
    if np.any(known):
        hist[known] = history(g[known])
    return g, hist


def _kernel(backend):
    if backend is None:
        backend = BACKEND
    if backend == "cython":
        if _march_hill_ext is None:
            raise RuntimeError("compiled kernel not built; reinstall with Cython available")
        return _march_hill_ext
    if backend == "python":
        return _march_hill_py
    raise ValueError(f"unknown backend {backend!r}")


def integrate(params, history, cfg, backend=None):
    """Solve the initial-value problem on [0, t_end] for the harvesting model.

    ``backend`` picks the stepping kernel ("cython" or "python"); the default
    is whichever was selected at import.
    """
    kernel = _kernel(backend)
    n, ts = _stage_grid(cfg)
    g, hist = _lag_inputs(params.theta, history, ts)
    r = np.ascontiguousarray(params.r(ts), dtype=float)
    b = np.ascontiguousarray(params.b(ts), dtype=float)
    K = np.ascontiguousarray(params.K(ts), dtype=float)
    if np.min(ts - g) < cfg.h:
        log.debug("delay shorter than h somewhere; lag-in-step iteration active")
    N, D, status, fail = kernel(
        float(cfg.h), float(history.N0), g, hist, r, b, K, float(params.gamma),
        float(cfg.positivity_floor), True, int(cfg.max_lag_iterations),
    )
    if status:
        raise PositivityLoss(fail * cfg.h, N[fail])
    return Trajectory(cfg.h, N, D, history)


def integrate_generic(f, theta, history, cfg, check_positivity=False):
    """Method of steps for ``y'(t) = f(t, y(t), y(t - theta(t)))``.

    ``theta`` is any callable (or a coefficient). Positivity checks are off by
    default since generic test systems need not stay positive.
    """
    if not isinstance(history, History):
        raise TypeError("history must be a History")
    n, ts = _stage_grid(cfg)
    g, hist = _lag_inputs(theta, history, ts)
    tlist = ts.tolist()

    def stage_f(j, y, y_lag):
        return f(tlist[j], y, y_lag)

    N, D, status, fail = _march_py.march(
        stage_f, n, float(cfg.h), float(history.N0), g, hist,
        float(cfg.positivity_floor), bool(check_positivity), int(cfg.max_lag_iterations),
    )
    if status:
        raise PositivityLoss(fail * cfg.h, N[fail])
    return Trajectory(cfg.h, N, D, history)
