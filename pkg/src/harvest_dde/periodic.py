"""Picard iteration of the period map to locate T-periodic positive solutions."""
from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .analysis import Condition, theorem2_margins
from .dde_core import IntegrationConfig, integrate
from .errors import NotConverged
from .model import Constant, History, Tabulated

log = logging.getLogger(__name__)

THETA_GRID_N = 2048
DEFAULT_SEGMENT_INTERVALS = 256
DEFAULT_STEPS_PER_PERIOD = 512


def theta_max(params):
    ts = np.linspace(0.0, params.T, THETA_GRID_N, endpoint=False)
    return float(max(0.0, np.max(params.theta(ts))))


def default_step(params):
    """Step that divides T evenly and does not exceed the smallest delay."""
    T = params.T
    h = T / DEFAULT_STEPS_PER_PERIOD
    ts = np.linspace(0.0, T, THETA_GRID_N, endpoint=False)
    th_min = float(np.min(params.theta(ts)))
    if th_min > 0 and th_min < h:
        h = th_min
    return T / math.ceil(T / h - 1e-9)


def default_segment_size(th_max, h):
    """Half-step-aligned sample count when theta_max allows it, else 257.

    Aligned samples coincide with RK4 stage times, so lag lookups into the
    segment reproduce the dense output exactly.
    """
    if th_max <= 0:
        return 2
    m = th_max / (0.5 * h)
    if abs(m - round(m)) <= 1e-9 * max(1.0, m) and round(m) >= 1:
        return int(round(m)) + 1
    return DEFAULT_SEGMENT_INTERVALS + 1


@dataclass(frozen=True)
class HistorySegment:
    """Samples of N on a uniform grid over [-theta_max, 0]; the last one is N(0)."""

    samples: np.ndarray
    theta_max: float

    def __post_init__(self):
        s = np.array(self.samples, dtype=float)
        if s.ndim != 1 or len(s) < 2:
            raise ValueError("a history segment needs at least 2 samples")
        if not np.all(s > 0) or not np.all(np.isfinite(s)):
            raise ValueError("history segment samples must be positive and finite")
        if self.theta_max < 0:
            raise ValueError("theta_max must be >= 0")
        s.setflags(write=False)
        object.__setattr__(self, "samples", s)

    @property
    def grid(self):
        return np.linspace(-self.theta_max, 0.0, len(self.samples))

    @property
    def terminal(self):
        return float(self.samples[-1])

    @classmethod
    def from_function(cls, fn, th_max, n_samples):
        if isinstance(fn, (int, float)):
            fn = Constant(float(fn))
        grid = np.linspace(-th_max, 0.0, n_samples)
        return cls(np.asarray(fn(grid), dtype=float), th_max)

    def to_history(self):
        if self.theta_max == 0:
            phi = Constant(self.terminal)
        else:
            phi = Tabulated(tuple(zip(self.grid.tolist(), self.samples.tolist())), "clamped")
        return History(phi=phi, N0=self.terminal, support_depth=self.theta_max)

    def to_dict(self):
        return {"theta_max": self.theta_max, "samples": self.samples.tolist()}


def period_map(params, seg, h=None):
    """Integrate one period from ``seg`` and return the segment one period later."""
    if params.T is None:
        raise ValueError("model period T must be declared")
    if not isinstance(seg, HistorySegment):
        raise TypeError("seg must be a HistorySegment")
    if h is None:
        h = default_step(params)
    T = params.T
    traj = integrate(params, seg.to_history(), IntegrationConfig(h=h, t_end=T))
    # sampling at T - theta_max + grid; clip for rounding at the right end
    ts = np.minimum(T + seg.grid, traj.t_end)
    return HistorySegment(traj(ts), seg.theta_max)


@dataclass
class PeriodicSolveResult:
    converged: bool
    iterations: int
    residual: float
    final_segment: HistorySegment
    trajectory_one_period: object
    periodicity_residual: float = float("nan")
    trace: list = field(default_factory=list)
    condition: str = ""

    def to_dict(self):
        ts, ys = self.trajectory_one_period.sample()
        return {
            "converged": self.converged,
            "iterations": self.iterations,
            "residual": self.residual,
            "periodicity_residual": self.periodicity_residual,
            "condition": self.condition,
            "trace": list(self.trace),
            "final_segment": self.final_segment.to_dict(),
            "period_min": float(np.min(ys)),
            "period_max": float(np.max(ys)),
        }


def periodicity_residual(params, seg, h=None, oversample=8):
    """sup |N(t + T) - N(t)| over [0, T] after integrating two periods from ``seg``."""
    if h is None:
        h = default_step(params)
    T = params.T
    traj = integrate(params, seg.to_history(), IntegrationConfig(h=h, t_end=2 * T))
    n = int(round(T / h)) * oversample
    ts = np.linspace(0.0, T, n + 1)
    return float(np.max(np.abs(traj(np.minimum(ts + T, traj.t_end)) - traj(ts))))


def find_periodic(params, seed, max_iter=200, tol=1e-8, h=None, n_samples=None, oversample=8):
    """Fixed point of the period map by plain Picard iteration.

    ``seed`` is a HistorySegment, a number (constant history) or a callable on
    t <= 0. Raises NotConverged when the residual stays above ``tol``.
    """
    if params.T is None:
        raise ValueError("model period T must be declared")
    margins = theorem2_margins(params)
    if margins.condition == Condition.NEITHER:
        warnings.warn(
            f"neither periodicity condition holds (m={margins.m:.4g}, M={margins.M:.4g}); "
            "existence of a periodic solution is not guaranteed",
            RuntimeWarning,
            stacklevel=2,
        )
    if h is None:
        h = default_step(params)
    th_max = theta_max(params)
    if isinstance(seed, HistorySegment):
        seg = seed
    else:
        if n_samples is None:
            n_samples = default_segment_size(th_max, h)
        seg = HistorySegment.from_function(seed, th_max, n_samples)

    trace = []
    residual = math.inf
    for it in range(1, max_iter + 1):
        new = period_map(params, seg, h)
        residual = float(np.max(np.abs(new.samples - seg.samples)))
        trace.append(residual)
        seg = new
        log.debug("picard iteration %d residual %.3e", it, residual)
        if residual <= tol:
            break
    else:
        raise NotConverged(residual, max_iter, trace)

    one = integrate(params, seg.to_history(), IntegrationConfig(h=h, t_end=params.T))
    return PeriodicSolveResult(
        converged=True,
        iterations=len(trace),
        residual=residual,
        final_segment=seg,
        trajectory_one_period=one,
        periodicity_residual=periodicity_residual(params, seg, h, oversample),
        trace=trace,
        condition=margins.condition.value,
    )
