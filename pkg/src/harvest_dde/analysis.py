"""Premise checks, persistence bounds and periodicity margins on sampling grids.

Every sup/inf over t >= 0 is approximated by the extremum over a uniform grid:
one period when the model declares a period and the horizon equals it, the
whole horizon otherwise.
"""
from __future__ import annotations

import enum
import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.integrate import simpson

from .errors import PremiseViolation

DEFAULT_GRID_N = 2048
DEFAULT_QUAD_N = 64
DEFAULT_FLOOR = 1e-9

GAMMA_POSITIVE = "gamma > 0"
R_POSITIVE = "r(t) > 0"
B_FLOOR = "b(t) >= b > 0"
K_FLOOR = "K(t) >= k > 0"
THETA_NONNEG = "theta(t) >= 0"
R_ABOVE_B = "r(t) > b(t)"


def sample_grid(params, horizon, grid_n):
    """Uniform grid over [0, horizon]; the endpoint is dropped for one full period."""
    if grid_n < 2:
        raise ValueError("grid_n must be >= 2")
    if not horizon > 0:
        raise ValueError("horizon must be positive")
    periodic = params.T is not None and math.isclose(horizon, params.T)
    return np.linspace(0.0, horizon, grid_n, endpoint=not periodic)


@dataclass
class Check:
    name: str
    passed: bool
    worst_t: float
    worst_value: float


@dataclass
class PremiseReport:
    checks: list
    horizon: float
    grid_n: int

    @property
    def ok(self):
        return all(c.passed for c in self.checks)

    @property
    def failed(self):
        return [c.name for c in self.checks if not c.passed]

    def __getitem__(self, name):
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_dict(self):
        return {
            "ok": self.ok,
            "failed": self.failed,
            "horizon": self.horizon,
            "grid_n": self.grid_n,
            "checks": [asdict(c) for c in self.checks],
        }


def validate_premises(params, horizon, grid_n=DEFAULT_GRID_N, floor=DEFAULT_FLOOR):
    """Check the positivity and ordering hypotheses on a grid; never raises."""
    ts = sample_grid(params, horizon, grid_n)
    r = params.r(ts)
    b = params.b(ts)
    K = params.K(ts)
    th = params.theta(ts)

    def check(name, margin, strict=True):
        # report the t with the smallest margin
        margin = np.where(np.isfinite(margin), margin, -np.inf)
        i = int(np.argmin(margin))
        ok = margin[i] > 0 if strict else margin[i] >= 0
        return Check(name, bool(ok), float(ts[i]), float(margin[i]))

    checks = [
        Check(GAMMA_POSITIVE, bool(params.gamma > 0), 0.0, float(params.gamma)),
        check(R_POSITIVE, r),
        Check(B_FLOOR, *_worst_floor(ts, b, floor)),
        Check(K_FLOOR, *_worst_floor(ts, K, floor)),
        check(THETA_NONNEG, th, strict=False),
        check(R_ABOVE_B, r - b),
    ]
    return PremiseReport(checks=checks, horizon=float(horizon), grid_n=int(grid_n))


def _worst_floor(ts, values, floor):
    i = int(np.argmin(values))
    v = float(values[i])
    return bool(np.isfinite(v) and v >= floor), float(ts[i]), v


@dataclass
class BoundsReport:
    lower: float
    upper: float
    inner_inf: float
    inner_sup: float
    sup_int_b: float
    sup_int_rb: float
    premises_ok: dict
    grid: dict = field(default_factory=dict)
    N0: float = float("nan")

    def to_dict(self):
        return asdict(self)


def _lag_integrals(params, ts, quad_n):
    """Composite Simpson for the integrals of b and r - b over [g(t), t]."""
    g = ts - params.theta(ts)
    u = np.linspace(0.0, 1.0, quad_n + 1)
    s = g[:, None] + (ts - g)[:, None] * u[None, :]
    b = params.b(s)
    rb = params.r(s) - b
    width = ts - g
    int_b = simpson(b, x=u, axis=1) * width
    int_rb = simpson(rb, x=u, axis=1) * width
    return int_b, int_rb


def persistence_bounds(params, N0, horizon, grid_n=DEFAULT_GRID_N, quad_n=DEFAULT_QUAD_N,
                       floor=DEFAULT_FLOOR):
    """Lower and upper persistence bounds for the solution started at N0."""
    if quad_n < 2:
        raise ValueError("quad_n must be >= 2")
    ts = sample_grid(params, horizon, grid_n)
    r = params.r(ts)
    b = params.b(ts)
    K = params.K(ts)
    if np.any(~(r > b)):
        t_bad = float(ts[np.argmax(~(r > b))])
        raise PremiseViolation(f"r(t) <= b(t) at t={t_bad}; persistence bounds undefined",
                               failed=[R_ABOVE_B])
    with np.errstate(invalid="ignore", divide="ignore"):
        inner = K * (r / b - 1.0) ** (1.0 / params.gamma)
    int_b, int_rb = _lag_integrals(params, ts, quad_n)
    sup_int_b = float(np.max(int_b))
    sup_int_rb = float(np.max(int_rb))
    inner_inf = float(np.min(inner))
    inner_sup = float(np.max(inner))
    flags = {
        R_ABOVE_B: True,
        B_FLOOR: bool(np.min(b) >= floor),
        K_FLOOR: bool(np.min(K) >= floor),
        "sup int b finite": bool(math.isfinite(sup_int_b)),
        "sup int (r-b) finite": bool(math.isfinite(sup_int_rb)),
    }
    lower = min(float(N0), inner_inf * math.exp(-sup_int_b))
    upper = max(float(N0), inner_sup * math.exp(sup_int_rb))
    return BoundsReport(
        lower=lower,
        upper=upper,
        inner_inf=inner_inf,
        inner_sup=inner_sup,
        sup_int_b=sup_int_b,
        sup_int_rb=sup_int_rb,
        premises_ok=flags,
        grid={"t0": 0.0, "horizon": float(horizon), "grid_n": int(grid_n),
              "quad_n": int(quad_n), "endpoint": bool(ts[-1] == horizon)},
        N0=float(N0),
    )


@dataclass
class BoundsVerdict:
    passed: bool
    tol: float
    violations: list

    def to_dict(self):
        return asdict(self)


def verify_bounds(traj, report, tol=1e-6):
    """Check lower - tol <= N <= upper + tol at every trajectory node."""
    t = traj.t
    N = traj.N
    bad = (N < report.lower - tol) | (N > report.upper + tol) | ~np.isfinite(N)
    violations = [(float(a), float(b)) for a, b in zip(t[bad], N[bad])]
    return BoundsVerdict(passed=not violations, tol=float(tol), violations=violations)


class Condition(str, enum.Enum):
    B1_HOLDS = "B1_HOLDS"
    B2_HOLDS = "B2_HOLDS"
    BOTH = "BOTH"
    NEITHER = "NEITHER"


@dataclass
class PeriodicityReport:
    m: float
    M: float
    B: float
    condition: Condition
    T: float
    grid_n: int

    def to_dict(self):
        d = asdict(self)
        d["condition"] = self.condition.value
        return d


def theorem2_margins(params, grid_n=DEFAULT_GRID_N):
    """Extremes of (r/b - 1) K**gamma over one period and the derived classification."""
    if params.T is None:
        raise ValueError("model period T must be declared")
    ts = np.linspace(0.0, params.T, grid_n, endpoint=False)
    r = params.r(ts)
    b = params.b(ts)
    ok = (r > b) & (b > 0)
    if not np.all(ok):
        t_bad = float(ts[np.argmax(~ok)])
        failed = [R_ABOVE_B] if np.any(~(r > b)) else []
        if np.any(~(b > 0)):
            failed.append(B_FLOOR)
        raise PremiseViolation(f"need r(t) > b(t) > 0; fails at t={t_bad}", failed=failed)
    v = (r / b - 1.0) * params.K(ts) ** params.gamma
    m = float(np.min(v))
    M = float(np.max(v))
    B = math.log(M) / params.gamma
    if m > 1 and M < 1:
        cond = Condition.BOTH
    elif m > 1:
        cond = Condition.B1_HOLDS
    elif M < 1:
        cond = Condition.B2_HOLDS
    else:
        cond = Condition.NEITHER
    return PeriodicityReport(m=m, M=M, B=B, condition=cond, T=float(params.T), grid_n=int(grid_n))
