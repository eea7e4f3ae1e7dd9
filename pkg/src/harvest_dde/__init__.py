"""Simulation and analysis of the delayed Hill-type harvested population model."""
from .analysis import (
    BoundsReport,
    Condition,
    PeriodicityReport,
    persistence_bounds,
    theorem2_margins,
    validate_premises,
    verify_bounds,
)
from .dde_core import BACKEND, IntegrationConfig, Trajectory, evaluate, integrate, integrate_generic
from .errors import (
    ConfigError,
    HarvestDDEError,
    InvalidDelay,
    InvalidState,
    NoPositiveEquilibrium,
    NotConverged,
    OutOfRange,
    PositivityLoss,
    PremiseViolation,
)
from .model import (
    Constant,
    Cosine,
    History,
    ModelParams,
    RotationalPulse,
    SeasonalPulse,
    Tabulated,
    coefficient_from_dict,
    equilibrium,
    eval_coefficient,
    lag_time,
    rhs,
    rotational_harvest,
    seasonal_harvest,
)
from .periodic import HistorySegment, PeriodicSolveResult, find_periodic, period_map

__version__ = "0.1.0"
