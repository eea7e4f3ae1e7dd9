"""Coefficient functions, harvest schedules and the right-hand side of the
delayed Hill-type harvesting model

    N'(t) = [ r(t) / (1 + (N(t - theta(t)) / K(t))**gamma) - b(t) ] N(t),
    b(t)  = eta(t) - lam(t).

Every coefficient is a small frozen dataclass that evaluates on scalars or
numpy arrays. Scalars in give floats out.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from .errors import ConfigError, InvalidDelay, InvalidState, NoPositiveEquilibrium

__all__ = [
    "Constant",
    "Cosine",
    "SeasonalPulse",
    "RotationalPulse",
    "Tabulated",
    "CoefficientFunction",
    "ModelParams",
    "History",
    "coefficient_from_dict",
    "eval_coefficient",
    "seasonal_harvest",
    "rotational_harvest",
    "lag_time",
    "rhs",
    "equilibrium",
]


def _out(t, values):
    if np.ndim(t) == 0:
        return float(values)
    return values


@dataclass(frozen=True)
class Constant:
    value: float

    def __call__(self, t):
        if np.ndim(t) == 0:
            return float(self.value)
        return np.full(np.shape(t), float(self.value))

    def to_dict(self):
        return {"type": "constant", "value": self.value}


@dataclass(frozen=True)
class Cosine:
    """base + amplitude * cos(omega * pi * (t - phase)); period 2/omega."""

    base: float
    amplitude: float
    omega: float = 2.0
    phase: float = 0.0

    def __call__(self, t):
        x = np.asarray(t, dtype=float)
        return _out(t, self.base + self.amplitude * np.cos(self.omega * np.pi * (x - self.phase)))

    @property
    def period(self):
        return 2.0 / self.omega if self.omega else None

    def to_dict(self):
        return {
            "type": "cosine",
            "base": self.base,
            "amplitude": self.amplitude,
            "omega": self.omega,
            "phase": self.phase,
        }


def _pulse(x, peak, H, t_start):
    n = np.floor(x)
    s = x - n - t_start
    inside = (s > 0.0) & (s < H)
    return np.where(inside, peak * np.sin(np.pi * s / H), 0.0), n


def seasonal_harvest(t, peak=0.5, H=0.25, t_start=0.25):
    """Half-sine harvest pulse inside (n + t_start, n + t_start + H), zero elsewhere."""
    if H <= 0 or t_start < 0 or t_start + H > 1:
        raise ValueError("need H > 0, t_start >= 0 and t_start + H <= 1")
    x = np.asarray(t, dtype=float)
    values, _ = _pulse(x, peak, H, t_start)
    return _out(t, values)


def rotational_harvest(t, peak=0.5, H=0.25, t_start=0.25, cycle=3, open_offset=0):
    """Seasonal pulse applied only in open years, i.e. floor(t) % cycle == open_offset."""
    if cycle < 1 or not 0 <= open_offset < cycle:
        raise ValueError("need cycle >= 1 and 0 <= open_offset < cycle")
    if H <= 0 or t_start < 0 or t_start + H > 1:
        raise ValueError("need H > 0, t_start >= 0 and t_start + H <= 1")
    x = np.asarray(t, dtype=float)
    values, n = _pulse(x, peak, H, t_start)
    is_open = np.mod(n, cycle) == open_offset
    return _out(t, np.where(is_open, values, 0.0))


@dataclass(frozen=True)
class SeasonalPulse:
    peak: float = 0.5
    H: float = 0.25
    t_start: float = 0.25

    def __post_init__(self):
        if self.H <= 0 or self.t_start < 0 or self.t_start + self.H > 1:
            raise ValueError("SeasonalPulse needs H > 0, t_start >= 0, t_start + H <= 1")

    def __call__(self, t):
        return seasonal_harvest(t, self.peak, self.H, self.t_start)

    period = 1.0

    def to_dict(self):
        return {"type": "seasonal_pulse", "peak": self.peak, "H": self.H, "t_start": self.t_start}


@dataclass(frozen=True)
class RotationalPulse:
    peak: float = 0.5
    H: float = 0.25
    t_start: float = 0.25
    cycle: int = 3
    open_offset: int = 0

    def __post_init__(self):
        if self.H <= 0 or self.t_start < 0 or self.t_start + self.H > 1:
            raise ValueError("RotationalPulse needs H > 0, t_start >= 0, t_start + H <= 1")
        if int(self.cycle) != self.cycle or self.cycle < 1:
            raise ValueError("cycle must be a positive integer")
        if not 0 <= self.open_offset < self.cycle:
            raise ValueError("open_offset must lie in [0, cycle)")

    def __call__(self, t):
        return rotational_harvest(t, self.peak, self.H, self.t_start, int(self.cycle), int(self.open_offset))

    @property
    def period(self):
        return float(self.cycle)

    def to_dict(self):
        return {
            "type": "rotational_pulse",
            "peak": self.peak,
            "H": self.H,
            "t_start": self.t_start,
            "cycle": self.cycle,
            "open_offset": self.open_offset,
        }


@dataclass(frozen=True)
class Tabulated:
    """Piecewise-linear interpolation through ``knots``.

    ``extension="periodic"`` wraps t modulo ``period``; ``"clamped"`` holds
    the end values outside the knot range.
    """

    knots: tuple
    extension: str = "clamped"
    period: Optional[float] = None
    _t: np.ndarray = field(init=False, repr=False, compare=False)
    _v: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        knots = tuple((float(a), float(b)) for a, b in self.knots)
        if len(knots) < 1:
            raise ValueError("Tabulated needs at least one knot")
        ts = np.array([k[0] for k in knots])
        if np.any(np.diff(ts) <= 0):
            raise ValueError("Tabulated knots must be strictly increasing in t")
        if self.extension not in ("clamped", "periodic"):
            raise ValueError(f"unknown extension {self.extension!r}")
        if self.extension == "periodic" and not (self.period and self.period > 0):
            raise ValueError("periodic extension needs a positive period")
        object.__setattr__(self, "knots", knots)
        object.__setattr__(self, "_t", ts)
        object.__setattr__(self, "_v", np.array([k[1] for k in knots]))

    def __call__(self, t):
        x = np.asarray(t, dtype=float)
        if self.extension == "periodic":
            values = np.interp(x, self._t, self._v, period=self.period)
        else:
            values = np.interp(x, self._t, self._v)
        return _out(t, values)

    def to_dict(self):
        d = {"type": "tabulated", "knots": [list(k) for k in self.knots], "extension": self.extension}
        if self.period is not None:
            d["period"] = self.period
        return d


CoefficientFunction = Union[Constant, Cosine, SeasonalPulse, RotationalPulse, Tabulated]

_TYPES = {
    "constant": Constant,
    "cosine": Cosine,
    "seasonal_pulse": SeasonalPulse,
    "rotational_pulse": RotationalPulse,
    "tabulated": Tabulated,
}


def coefficient_from_dict(spec, path=""):
    """Build a coefficient from its tagged-object form; bare numbers mean Constant."""
    if isinstance(spec, (int, float)) and not isinstance(spec, bool):
        return Constant(float(spec))
    if not isinstance(spec, dict) or "type" not in spec:
        raise ConfigError("expected a number or an object with a 'type' field", path)
    kind = spec["type"]
    cls = _TYPES.get(kind)
    if cls is None:
        raise ConfigError(f"unknown coefficient type {kind!r}", f"{path}.type")
    kwargs = {k: v for k, v in spec.items() if k != "type"}
    if cls is Tabulated and "knots" in kwargs:
        kwargs["knots"] = tuple(tuple(k) for k in kwargs["knots"])
    try:
        return cls(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc), path) from exc


def eval_coefficient(c, t):
    return c(t)


@dataclass(frozen=True)
class ModelParams:
    gamma: float
    r: CoefficientFunction
    eta: CoefficientFunction
    lam: CoefficientFunction = Constant(0.0)
    K: CoefficientFunction = Constant(1.0)
    theta: CoefficientFunction = Constant(0.0)
    T: Optional[float] = None

    def b(self, t):
        """Effective per-capita loss rate eta(t) - lam(t)."""
        return self.eta(t) - self.lam(t)

    def g(self, t):
        return lag_time(self, t)

    def to_dict(self):
        return {
            "gamma": self.gamma,
            "r": self.r.to_dict(),
            "eta": self.eta.to_dict(),
            "lam": self.lam.to_dict(),
            "K": self.K.to_dict(),
            "theta": self.theta.to_dict(),
            "T": self.T,
        }

    @classmethod
    def from_dict(cls, d, path="model"):
        if not isinstance(d, dict):
            raise ConfigError("expected an object", path)
        for key in ("gamma", "r", "eta"):
            if key not in d:
                raise ConfigError("missing required field", f"{path}.{key}")
        try:
            gamma = float(d["gamma"])
        except (TypeError, ValueError) as exc:
            raise ConfigError("gamma must be a number", f"{path}.gamma") from exc
        T = d.get("T")
        if T is not None and not (isinstance(T, (int, float)) and T > 0):
            raise ConfigError("T must be a positive number or null", f"{path}.T")
        return cls(
            gamma=gamma,
            r=coefficient_from_dict(d["r"], f"{path}.r"),
            eta=coefficient_from_dict(d["eta"], f"{path}.eta"),
            lam=coefficient_from_dict(d.get("lam", 0.0), f"{path}.lam"),
            K=coefficient_from_dict(d.get("K", 1.0), f"{path}.K"),
            theta=coefficient_from_dict(d.get("theta", 0.0), f"{path}.theta"),
            T=None if T is None else float(T),
        )


@dataclass(frozen=True)
class History:
    """Initial data: phi on t < 0 and N(0) = N0."""

    phi: CoefficientFunction
    N0: float
    support_depth: float = 0.0

    def __post_init__(self):
        if isinstance(self.phi, (int, float)):
            object.__setattr__(self, "phi", Constant(float(self.phi)))
        if not self.N0 > 0:
            raise ValueError("N0 must be positive")
        if self.support_depth < 0:
            raise ValueError("support_depth must be nonnegative")

    def __call__(self, t):
        """phi(t) for t < 0, N0 at t == 0."""
        if np.ndim(t) == 0:
            return float(self.N0) if t == 0 else float(self.phi(t))
        x = np.asarray(t, dtype=float)
        return np.where(x == 0.0, self.N0, self.phi(x))

    @classmethod
    def for_params(cls, params, phi, N0, horizon):
        """History whose support depth covers max theta over [0, horizon]."""
        grid = np.linspace(0.0, horizon, 2048)
        depth = float(max(0.0, np.max(params.theta(grid))))
        return cls(phi=phi, N0=N0, support_depth=depth)


def lag_time(params, t):
    """g(t) = t - theta(t)."""
    th = params.theta(t)
    if np.any(np.asarray(th) < 0):
        raise InvalidDelay(f"theta(t) < 0 at t={t}")
    return t - th


def rhs(params, t, N, N_lag):
    """Right-hand side of the delayed Hill-type harvesting equation."""
    if N < 0 or N_lag < 0:
        raise InvalidState(f"negative population (N={N}, N_lag={N_lag}) at t={t}")
    K = params.K(t)
    hill = params.r(t) / (1.0 + (N_lag / K) ** params.gamma)
    return (hill - params.b(t)) * N


def equilibrium(params, t_frozen=0.0):
    """K (r/b - 1)**(1/gamma) with coefficients frozen at ``t_frozen``."""
    r = params.r(t_frozen)
    b = params.b(t_frozen)
    if not (b > 0 and r > b):
        raise NoPositiveEquilibrium(f"need r > b > 0 at t={t_frozen} (r={r}, b={b})")
    return params.K(t_frozen) * (r / b - 1.0) ** (1.0 / params.gamma)
