"""Random interlacements on a finite subset of Z^d (d >= 3).

Exact-in-law sampling of the trajectory soup restricted to a finite set,
plus a Monte Carlo harness that cross-checks four routes to the derivative
of an increasing event's probability in the intensity parameter.
"""

__version__ = "0.1.0"

from .capacity import Equilibrium, equilibrium_measure
from .errors import (
    BudgetExceededError,
    EstimatorDisagreementError,
    InsufficientDataError,
    InvalidInputError,
    NumericalFailureError,
    RInterlaceError,
    UnsupportedDimensionError,
)
from .events import (
    EVENT_KINDS,
    EventSpec,
    IncreasingEvent,
    MonotoneReport,
    build_event,
    check_monotone,
    connected,
    evaluate,
    parse_event,
)
from .green import DEFAULT_ASYMPTOTIC_RADIUS, DEFAULT_PRECISION, PotentialTable
from .lattice import LatticeSet, Site, neighbors, srw_step
from .pivotal import PivotalReport, count_plus_pivotal
from .process import (
    Configuration,
    LevelPoint,
    LevelProcess,
    empty_configuration,
    interlacement_set,
    points_from_json,
    points_to_json,
    restrict,
    sample_configuration,
    sample_level_process,
    vacant_set,
    with_extra_trace,
)
from .russo import (
    DEFAULT_FD_STEP_FRACTION,
    DerivativeBundle,
    Estimate,
    ScanPoint,
    ScanReport,
    conditional_trajectory_mean,
    derivative_added_trajectory,
    derivative_bundle,
    derivative_conditional,
    derivative_finite_difference,
    derivative_pivotal,
    estimate_probability,
    nonempty_conditional_mean,
    nonempty_derivative,
    nonempty_probability,
    pivotal_density_scan,
    tv_distance_check,
    universal_bound_check,
)
from .walk import (
    DEFAULT_EXCURSION_BUDGET,
    GTrace,
    SamplerStats,
    draw_trace,
    sample_start,
    sample_trace,
    sample_trace_stepwise,
    trace_from_dict,
    trace_to_dict,
)

__all__ = [
    "__version__",
    # lattice / potential
    "LatticeSet",
    "Site",
    "neighbors",
    "srw_step",
    "PotentialTable",
    "DEFAULT_PRECISION",
    "DEFAULT_ASYMPTOTIC_RADIUS",
    # capacity
    "Equilibrium",
    "equilibrium_measure",
    # walk / process
    "GTrace",
    "SamplerStats",
    "DEFAULT_EXCURSION_BUDGET",
    "sample_start",
    "sample_trace",
    "sample_trace_stepwise",
    "draw_trace",
    "trace_to_dict",
    "trace_from_dict",
    "LevelPoint",
    "LevelProcess",
    "Configuration",
    "sample_level_process",
    "sample_configuration",
    "empty_configuration",
    "restrict",
    "interlacement_set",
    "vacant_set",
    "with_extra_trace",
    "points_to_json",
    "points_from_json",
    # events / pivotal
    "EVENT_KINDS",
    "EventSpec",
    "IncreasingEvent",
    "MonotoneReport",
    "parse_event",
    "build_event",
    "evaluate",
    "connected",
    "check_monotone",
    "PivotalReport",
    "count_plus_pivotal",
    # estimators
    "Estimate",
    "DerivativeBundle",
    "ScanPoint",
    "ScanReport",
    "DEFAULT_FD_STEP_FRACTION",
    "estimate_probability",
    "derivative_added_trajectory",
    "derivative_pivotal",
    "derivative_conditional",
    "derivative_finite_difference",
    "derivative_bundle",
    "conditional_trajectory_mean",
    "nonempty_probability",
    "nonempty_derivative",
    "nonempty_conditional_mean",
    "tv_distance_check",
    "universal_bound_check",
    "pivotal_density_scan",
    # errors
    "RInterlaceError",
    "InvalidInputError",
    "UnsupportedDimensionError",
    "NumericalFailureError",
    "BudgetExceededError",
    "InsufficientDataError",
    "EstimatorDisagreementError",
]
