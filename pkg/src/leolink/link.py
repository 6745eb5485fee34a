"""Link-layer quantities: timing advance, Doppler, TDoA, clock drift and visibility."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Any, Callable, Union

import numpy as np
from scipy.optimize import bisect, minimize_scalar

from .dynamics import OrbitElements, orbit_states
from .exceptions import DomainError
from .geo import EarthModel, elevation_angles

if TYPE_CHECKING:
    import numpy.typing as npt

    from .dynamics import JointState

SPEED_OF_LIGHT_KM_S = 3e5
BOUNDARY_TOLERANCE_S = 1e-3
MAX_CLOCK_RATE = 1e-3

PositionFunction = Callable[["npt.NDArray[np.float64]"], "npt.NDArray[np.float64]"]
SatelliteTrack = Union[OrbitElements, PositionFunction]


@dataclass(frozen=True)
class LinkMetrics:
    """Timing advance (s), Doppler (Hz), range rate (km/s) and TDoA (s) at one epoch.

    ``tdoa_prev`` is the TDoA against the previous epoch (NaN at the first).
    """

    time: float
    ta: float
    doppler: float
    range_rate: float
    tdoa_prev: float
    slant_range: float


@dataclass(frozen=True)
class ClockModel:
    """Satellite/UE clock offset rate ``eps1`` and drift ``eps2`` (dimensionless)."""

    eps1: float = 0.0
    eps2: float = 0.0

    def __post_init__(self) -> None:
        for name in ("eps1", "eps2"):
            value = getattr(self, name)
            if not (math.isfinite(value) and abs(value) < MAX_CLOCK_RATE):
                msg = f"Clock rate {name} must satisfy |{name}| < 1e-3"
                raise DomainError(msg, operation="ClockModel", value=value)

    @property
    def enabled(self) -> bool:
        return self.eps1 != 0.0 or self.eps2 != 0.0


@dataclass(frozen=True)
class VisibilityWindow:
    """Maximal interval with elevation at or above the mask.

    ``truncated`` is set when the interval is cut by the start or end of the
    scanned span rather than by the horizon mask.
    """

    t_start: float
    t_end: float
    theta_max: float
    t_theta_max: float
    truncated: bool = False

    @property
    def duration(self) -> float:
        return self.t_end - self.t_start

    def contains(self, t: float) -> bool:
        return self.t_start <= t <= self.t_end

    def to_dict(self) -> dict[str, float | bool]:
        return {
            "t_start": self.t_start,
            "t_end": self.t_end,
            "theta_max": self.theta_max,
            "t_theta_max": self.t_theta_max,
            "truncated": self.truncated,
        }


@dataclass(frozen=True)
class ClockDriftFit:
    """Least-squares affine clock drift ``alpha t + beta``."""

    alpha: float
    beta: float
    residual_rms: float


def _check_c(c: float, operation: str) -> None:
    if not (math.isfinite(c) and c > 0):
        msg = "Speed of light must be positive"
        raise DomainError(msg, operation=operation, value=c)


def timing_advance(d: float, c: float = SPEED_OF_LIGHT_KM_S) -> float:
    """Round-trip time ``2 d / c`` in seconds."""
    _check_c(c, "timing_advance")
    if not d >= 0:
        msg = "Slant range must be non-negative"
        raise DomainError(msg, operation="timing_advance", value=d)
    return 2.0 * d / c


def timing_advance_error(
    d_true: npt.ArrayLike, d_est: npt.ArrayLike, c: float = SPEED_OF_LIGHT_KM_S
) -> tuple[Any, Any]:
    """Squared range error (km^2) and the resulting TA error (s, estimate minus truth).

    Works elementwise on range series.
    """
    _check_c(c, "timing_advance_error")
    diff = np.subtract(d_est, d_true)
    return diff**2, 2.0 * diff / c


def range_rate(x: JointState) -> float:
    """Line-of-sight projection of the relative velocity, km/s (negative when approaching)."""
    p_lu = x.sat_pos - x.ue_pos
    d = float(np.linalg.norm(p_lu))
    if d == 0.0:
        msg = "Range rate is undefined for coincident positions"
        raise DomainError(msg, operation="range_rate")
    return float(np.dot(p_lu, x.sat_vel - x.ue_vel)) / d


def doppler_shift(
    x: JointState, f_T: float, c: float = SPEED_OF_LIGHT_KM_S
) -> float:
    """Doppler shift ``-f_T * range_rate / c`` in Hz; positive on approach."""
    _check_c(c, "doppler_shift")
    return -f_T * range_rate(x) / c


def doppler_at_frequencies(
    rate: npt.ArrayLike, frequencies: npt.ArrayLike, c: float = SPEED_OF_LIGHT_KM_S
) -> npt.NDArray[np.float64]:
    """Doppler shifts for range rate(s) ``rate`` at several carriers.

    The result has one trailing column per carrier.
    """
    _check_c(c, "doppler_at_frequencies")
    return -np.multiply.outer(
        np.asarray(rate, dtype=np.float64), np.asarray(frequencies, dtype=np.float64)
    ) / c


def doppler_rate(doppler: npt.ArrayLike, dt: float) -> npt.NDArray[np.float64]:
    """Frequency difference of arrivals between consecutive epochs, Hz/s."""
    if not dt > 0:
        msg = "Time step must be positive"
        raise DomainError(msg, operation="doppler_rate", value=dt)
    return np.diff(np.asarray(doppler, dtype=np.float64)) / dt


def tdoa(d_t: float, d_t1: float, c: float = SPEED_OF_LIGHT_KM_S) -> float:
    """Signed arrival-time difference ``(d_t1 - d_t) / c``."""
    _check_c(c, "tdoa")
    return (d_t1 - d_t) / c


def clock_drift(t11: float, t12: float, clk: ClockModel) -> float:
    """Clock-induced TDoA deviation ``t12 eps2 - t11 eps1``."""
    if not t12 > t11 >= 0:
        msg = "Clock drift needs t12 > t11 >= 0"
        raise DomainError(msg, operation="clock_drift", value=(t11, t12))
    return t12 * clk.eps2 - t11 * clk.eps1


def fit_clock_drift(samples: npt.ArrayLike) -> ClockDriftFit:
    """Least-squares line through (time, drift) samples."""
    data = np.asarray(samples, dtype=np.float64)
    if data.ndim != 2 or data.shape[1] != 2 or len(data) < 2:
        msg = "Clock drift fit needs at least two (time, drift) samples"
        raise DomainError(msg, operation="fit_clock_drift", value=data.shape)
    t, drift = data[:, 0], data[:, 1]
    if np.ptp(t) == 0.0:
        msg = "Clock drift fit needs at least two distinct times"
        raise DomainError(msg, operation="fit_clock_drift")
    alpha, beta = np.polyfit(t, drift, 1)
    residual = drift - (alpha * t + beta)
    return ClockDriftFit(
        alpha=float(alpha),
        beta=float(beta),
        residual_rms=float(np.sqrt(np.mean(residual**2))),
    )


def _position_function(
    track: SatelliteTrack, m: EarthModel | None
) -> PositionFunction:
    if isinstance(track, OrbitElements):
        return lambda t: orbit_states(track, t, m)[0]
    return track


def visibility_windows(
    orbit: SatelliteTrack,
    ue_traj: PositionFunction,
    theta_min: float,
    t0: float,
    t1: float,
    dt: float,
    m: EarthModel | None = None,
) -> list[VisibilityWindow]:
    """Find maximal intervals where the elevation stays at or above ``theta_min``.

    The span is scanned on a ``dt`` grid, with ``t1`` appended when it falls
    between grid points; boundaries are refined by bisection to 1 ms and the
    peak elevation by bounded scalar maximization. ``orbit`` is either
    circular orbit elements or a function mapping an array of times to
    (n, 3) satellite positions.
    """
    if not t1 > t0:
        msg = "Visibility span needs t1 > t0"
        raise DomainError(msg, operation="visibility_windows", value=(t0, t1))
    if not dt > 0:
        msg = "Scan step must be positive"
        raise DomainError(msg, operation="visibility_windows", value=dt)

    sat = _position_function(orbit, m)

    def excess(t: float) -> float:
        times = np.array([t])
        return float(elevation_angles(sat(times), ue_traj(times))[0]) - theta_min

    n = int(math.floor((t1 - t0) / dt + 1e-9)) + 1
    times = t0 + dt * np.arange(n)
    if t1 - times[-1] > 1e-9 * dt:
        times = np.append(times, t1)
        n += 1
    theta = elevation_angles(sat(times), ue_traj(times))
    above = theta >= theta_min
    if not above.any():
        return []

    edges = np.diff(above.astype(np.int8))
    starts = list(np.flatnonzero(edges == 1) + 1)
    ends = list(np.flatnonzero(edges == -1))
    if above[0]:
        starts.insert(0, 0)
    if above[-1]:
        ends.append(n - 1)

    windows = []
    for i, j in zip(starts, ends):
        truncated = False
        if i == 0:
            t_start = float(times[0])
            truncated = True
        else:
            t_start = float(
                bisect(excess, times[i - 1], times[i], xtol=BOUNDARY_TOLERANCE_S)
            )
        if j == n - 1:
            t_end = float(times[-1])
            truncated = True
        else:
            t_end = float(
                bisect(excess, times[j], times[j + 1], xtol=BOUNDARY_TOLERANCE_S)
            )

        k = i + int(np.argmax(theta[i : j + 1]))
        t_peak, theta_peak = float(times[k]), float(theta[k])
        lo, hi = float(times[max(k - 1, i)]), float(times[min(k + 1, j)])
        if hi > lo:
            res = minimize_scalar(
                lambda t: -excess(t),
                bounds=(lo, hi),
                method="bounded",
                options={"xatol": 1e-6},
            )
            refined = -float(res.fun) + theta_min
            if refined > theta_peak:
                t_peak, theta_peak = float(res.x), refined

        windows.append(
            VisibilityWindow(
                t_start=t_start,
                t_end=t_end,
                theta_max=theta_peak,
                t_theta_max=t_peak,
                truncated=truncated,
            )
        )
    return windows
