"""leolink: joint LEO satellite and mobile UE tracking.

An extended Kalman filter over the 12-dimensional satellite + UE state,
fed by range and elevation measurements, with timing advance, Doppler,
TDoA, clock drift and visibility-window utilities for the link.
"""

from __future__ import annotations

# Version information
from ._version import (
    VERSION as VERSION,
)
from ._version import (
    __version__ as __version__,
)
from ._version import (
    get_version as get_version,
)
from ._version import (
    get_version_info as get_version_info,
)
from ._version import (
    version_info as version_info,
)

# Geometry
from .geo import (
    EARTH_MU_KM3_S2 as EARTH_MU_KM3_S2,
)
from .geo import (
    EARTH_RADIUS_KM as EARTH_RADIUS_KM,
)
from .geo import (
    EarthModel as EarthModel,
)
from .geo import (
    GeodeticPosition as GeodeticPosition,
)
from .geo import (
    earth_centered_angle as earth_centered_angle,
)
from .geo import (
    elevation_angle as elevation_angle,
)
from .geo import (
    geodetic_to_ecef as geodetic_to_ecef,
)
from .geo import (
    slant_range as slant_range,
)

# Motion models
from .dynamics import (
    STATE_DIM as STATE_DIM,
)
from .dynamics import (
    JointState as JointState,
)
from .dynamics import (
    LinearUETrajectory as LinearUETrajectory,
)
from .dynamics import (
    OrbitElements as OrbitElements,
)
from .dynamics import (
    SatState as SatState,
)
from .dynamics import (
    motion_jacobian as motion_jacobian,
)
from .dynamics import (
    propagate_joint as propagate_joint,
)
from .dynamics import (
    propagate_truth as propagate_truth,
)

# Estimation
from .estimator import (
    ExtendedKalmanFilter as ExtendedKalmanFilter,
)
from .estimator import (
    GaussianBelief as GaussianBelief,
)
from .estimator import (
    Measurement as Measurement,
)
from .estimator import (
    NoiseConfig as NoiseConfig,
)
from .estimator import (
    measurement_jacobian as measurement_jacobian,
)
from .estimator import (
    measurement_model as measurement_model,
)
from .estimator import (
    predict as predict,
)
from .estimator import (
    update as update,
)

# Link metrics
from .link import (
    ClockModel as ClockModel,
)
from .link import (
    LinkMetrics as LinkMetrics,
)
from .link import (
    VisibilityWindow as VisibilityWindow,
)
from .link import (
    clock_drift as clock_drift,
)
from .link import (
    doppler_shift as doppler_shift,
)
from .link import (
    range_rate as range_rate,
)
from .link import (
    tdoa as tdoa,
)
from .link import (
    timing_advance as timing_advance,
)
from .link import (
    visibility_windows as visibility_windows,
)

# Scenarios
from .scenario import (
    MonteCarloResult as MonteCarloResult,
)
from .scenario import (
    ScenarioConfig as ScenarioConfig,
)
from .scenario import (
    ScenarioResult as ScenarioResult,
)
from .scenario import (
    ScenarioSummary as ScenarioSummary,
)
from .scenario import (
    run_monte_carlo as run_monte_carlo,
)
from .scenario import (
    run_scenario as run_scenario,
)

# Event system
from .events import (
    EventContext as EventContext,
)
from .events import (
    EventManager as EventManager,
)

# Exception classes
from .exceptions import (
    ConfigurationError as ConfigurationError,
)
from .exceptions import (
    DomainError as DomainError,
)
from .exceptions import (
    EphemerisError as EphemerisError,
)
from .exceptions import (
    LeoLinkError as LeoLinkError,
)
from .exceptions import (
    NumericalError as NumericalError,
)
from .exceptions import (
    OutputError as OutputError,
)
from .exceptions import (
    ScenarioAbortedError as ScenarioAbortedError,
)

# Logging
from .logging import (
    LeoLinkLogger as LeoLinkLogger,
)
