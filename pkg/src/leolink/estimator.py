"""Kalman filtering for the joint satellite-UE state.

Generic linear predict/update steps on arrays, the EKF specialization that
propagates the mean through the nonlinear motion and measurement models, the
scalar Riccati helpers and a Gaussian posterior density.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Protocol

import numpy as np
from scipy.stats import multivariate_normal

from .dynamics import (
    SAT_POS,
    SAT_VEL,
    STATE_DIM,
    UE_POS,
    UE_VEL,
    JointState,
    jacobian_vector,
    propagate_vector,
)
from .exceptions import ConfigurationError, DomainError, NumericalError
from .geo import EarthModel, elevation_angle, slant_range

if TYPE_CHECKING:
    import numpy.typing as npt

    from .geo import Vec3

    Matrix = npt.NDArray[np.float64]
    Vector = npt.NDArray[np.float64]

MAX_CONDITION = 1e12
ELEVATION_FD_STEP_KM = 1e-6
PSD_TOLERANCE = 1e-9

MEASUREMENT_MODES = ("range_elevation", "direct_position")


def symmetrize(P: Matrix) -> Matrix:
    return 0.5 * (P + P.T)


def check_psd(name: str, M: npt.ArrayLike, shape: tuple[int, int]) -> Matrix:
    """Validate a covariance matrix, raising ConfigurationError naming ``name``."""
    arr = np.array(M, dtype=np.float64)
    if arr.shape != shape:
        msg = f"{name} must have shape {shape}, got {arr.shape}"
        raise ConfigurationError(msg, config_key=name)
    if not np.all(np.isfinite(arr)):
        msg = f"{name} must be finite"
        raise ConfigurationError(msg, config_key=name)
    scale = max(1.0, float(np.max(np.abs(arr))))
    if np.max(np.abs(arr - arr.T)) > PSD_TOLERANCE * scale:
        msg = f"{name} must be symmetric"
        raise ConfigurationError(msg, config_key=name)
    if float(np.min(np.linalg.eigvalsh(arr))) < -PSD_TOLERANCE * scale:
        msg = f"{name} must be positive semidefinite"
        raise ConfigurationError(msg, config_key=name)
    return arr


@dataclass(frozen=True, eq=False)
class GaussianBelief:
    """Mean joint state and its 12x12 covariance."""

    mean: JointState
    cov: Matrix

    def __post_init__(self) -> None:
        cov = np.array(self.cov, dtype=np.float64)
        if cov.shape != (STATE_DIM, STATE_DIM) or not np.all(np.isfinite(cov)):
            msg = "Belief covariance must be a finite 12x12 matrix"
            raise DomainError(msg, operation="GaussianBelief", value=cov.shape)
        object.__setattr__(self, "cov", cov)


@dataclass(frozen=True)
class Measurement:
    """Range (km) and elevation (rad) observed at ``time``."""

    time: float
    range: float
    elevation: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.range) and self.range > 0):
            msg = "Measured range must be positive"
            raise DomainError(msg, operation="Measurement", value=self.range)
        if not -math.pi / 2 <= self.elevation <= math.pi / 2:
            msg = "Measured elevation must lie in [-pi/2, pi/2]"
            raise DomainError(msg, operation="Measurement", value=self.elevation)

    def as_vector(self) -> Vector:
        return np.array([self.range, self.elevation])


@dataclass(frozen=True, eq=False)
class PositionFix:
    """Directly measured satellite position, used by the direct_position mode."""

    time: float
    position: Vec3

    def __post_init__(self) -> None:
        object.__setattr__(self, "position", np.asarray(self.position, dtype=np.float64))

    def as_vector(self) -> Vector:
        return self.position


DEFAULT_ACCELERATION_DENSITY = 1e-10


def default_process_noise(
    velocity_density: float = DEFAULT_ACCELERATION_DENSITY, position_density: float = 0.0
) -> Matrix:
    """Diagonal spectral density of the process noise for both bodies.

    ``velocity_density`` (km^2/s^3) is white acceleration noise on the
    velocity states, ``position_density`` (km^2/s) white velocity noise on
    the position states. :func:`discretize_process_noise` turns it into the
    covariance added over one step.
    """
    diag = np.array([position_density] * 3 + [velocity_density] * 3)
    return np.diag(np.concatenate([diag, diag]))


def _position_from_velocity() -> Matrix:
    N = np.zeros((STATE_DIM, STATE_DIM))
    N[SAT_POS, SAT_VEL] = np.eye(3)
    N[UE_POS, UE_VEL] = np.eye(3)
    return N


_N = _position_from_velocity()


def discretize_process_noise(Qc: Matrix, dt: float) -> Matrix:
    """Covariance accumulated over ``dt`` by white noise of spectral density ``Qc``.

    Integrates ``Phi(s) Qc Phi(s)^T`` over the step with the kinematic
    transition ``Phi(s) = I + s N``. For white acceleration of density ``q``
    this is the familiar ``q dt^3/3``, ``q dt^2/2``, ``q dt`` block.
    Gravity-gradient terms are of relative order ``dt^2 / T_orbit^2`` and are
    left out.
    """
    NQ = _N @ Qc
    return symmetrize(Qc * dt + (NQ + NQ.T) * (dt**2 / 2.0) + NQ @ _N.T * (dt**3 / 3.0))


def default_initial_covariance(
    sat_pos: float = 1.0,
    sat_vel: float = 0.1,
    ue_pos: float = 0.1,
    ue_vel: float = 0.01,
) -> Matrix:
    """Diagonal P0 built from per-block standard deviations."""
    sigmas = np.repeat([sat_pos, sat_vel, ue_pos, ue_vel], 3)
    return np.diag(sigmas**2)


@dataclass(frozen=True, eq=False)
class NoiseConfig:
    """Process noise density, measurement and initial covariances.

    ``Q`` is a spectral density (per second), discretized for each step;
    ``R`` is the 2x2 range/elevation covariance; ``position_variance`` sets
    the isotropic 3x3 covariance of the direct_position mode.
    """

    Q: Matrix = field(default_factory=default_process_noise)
    R: Matrix = field(default_factory=lambda: np.diag([0.1**2, 1e-3**2]))
    P0: Matrix = field(default_factory=default_initial_covariance)
    position_variance: float = 0.1**2

    def __post_init__(self) -> None:
        object.__setattr__(self, "Q", check_psd("noise.Q", self.Q, (STATE_DIM, STATE_DIM)))
        object.__setattr__(self, "R", check_psd("noise.R", self.R, (2, 2)))
        object.__setattr__(
            self, "P0", check_psd("noise.P0", self.P0, (STATE_DIM, STATE_DIM))
        )
        if not (math.isfinite(self.position_variance) and self.position_variance >= 0):
            msg = "Position measurement variance must be non-negative"
            raise ConfigurationError(
                msg,
                config_key="noise.position_sigma_km",
                config_value=self.position_variance,
            )

    def measurement_covariance(self, mode: str = "range_elevation") -> Matrix:
        if mode == "direct_position":
            return self.position_variance * np.eye(3)
        return self.R


def _range_elevation(sat: Vector, ue: Vector) -> tuple[float, float]:
    p_lu = sat - ue
    d = math.sqrt(float(p_lu @ p_lu))
    nu = math.sqrt(float(ue @ ue))
    sine = float(p_lu @ ue) / (d * nu)
    return d, math.asin(min(1.0, max(-1.0, sine)))


def measurement_model(x: JointState, time: float = 0.0) -> Measurement:
    """Noise-free range and elevation of the satellite seen from the UE."""
    return Measurement(
        time=time,
        range=slant_range(x.sat_pos, x.ue_pos),
        elevation=elevation_angle(x.sat_pos, x.ue_pos),
    )


def _range_elevation_jacobian(x: Vector) -> Matrix:
    sat, ue = x[SAT_POS], x[UE_POS]
    p_lu = sat - ue
    d = float(np.linalg.norm(p_lu))
    if d == 0.0 or not np.any(ue):
        msg = "Measurement Jacobian is undefined for coincident positions"
        raise DomainError(msg, operation="measurement_jacobian")
    H = np.zeros((2, STATE_DIM))
    H[0, SAT_POS] = p_lu / d
    H[0, UE_POS] = -p_lu / d
    h = ELEVATION_FD_STEP_KM
    for block in (SAT_POS, UE_POS):
        for axis in range(3):
            col = block.start + axis
            plus = x.copy()
            minus = x.copy()
            plus[col] += h
            minus[col] -= h
            _, up = _range_elevation(plus[SAT_POS], plus[UE_POS])
            _, down = _range_elevation(minus[SAT_POS], minus[UE_POS])
            H[1, col] = (up - down) / (2.0 * h)
    return H


def measurement_jacobian(x: JointState) -> Matrix:
    """2x12 Jacobian of range and elevation.

    The range row is analytic; the elevation row uses central differences
    with a 1e-6 km step. Velocity columns are zero.
    """
    return _range_elevation_jacobian(x.vector)


class MeasurementModel(Protocol):
    """What the EKF needs from a measurement mode."""

    mode: str
    ndim: int

    def function(self, x: Vector) -> Vector: ...

    def jacobian(self, x: Vector) -> Matrix: ...


class RangeElevationModel:
    """Nonlinear range/elevation observation of the joint state."""

    mode = "range_elevation"
    ndim = 2

    def function(self, x: Vector) -> Vector:
        sat, ue = x[SAT_POS], x[UE_POS]
        if np.array_equal(sat, ue):
            msg = "Measurement is undefined for coincident positions"
            raise DomainError(msg, operation="measurement_model")
        return np.array(_range_elevation(sat, ue))

    def jacobian(self, x: Vector) -> Matrix:
        return _range_elevation_jacobian(x)


class SatellitePositionModel:
    """Linear observation of the satellite position block."""

    mode = "direct_position"
    ndim = 3

    def __init__(self) -> None:
        self._H = np.zeros((3, STATE_DIM))
        self._H[:, SAT_POS] = np.eye(3)

    def function(self, x: Vector) -> Vector:
        return self._H @ x

    def jacobian(self, x: Vector) -> Matrix:
        return self._H


def measurement_model_for(mode: str) -> MeasurementModel:
    if mode == "range_elevation":
        return RangeElevationModel()
    if mode == "direct_position":
        return SatellitePositionModel()
    msg = f"Unknown measurement mode '{mode}'"
    raise ConfigurationError(msg, config_key="filter.measurement_mode", config_value=mode)


def _inverse_innovation(S: Matrix) -> Matrix:
    if not np.all(np.isfinite(S)):
        msg = "Innovation covariance is not finite"
        raise NumericalError(msg)
    cond = float(np.linalg.cond(S))
    if not math.isfinite(cond) or cond > MAX_CONDITION:
        msg = "Innovation covariance is ill-conditioned"
        raise NumericalError(msg, condition_number=cond)
    if S.shape == (2, 2):
        det = S[0, 0] * S[1, 1] - S[0, 1] * S[1, 0]
        return np.array([[S[1, 1], -S[0, 1]], [-S[1, 0], S[0, 0]]]) / det
    return np.linalg.inv(S)


def kalman_gain(P_pred: Matrix, H: Matrix, R: Matrix) -> Matrix:
    """``K = P H^T (H P H^T + R)^-1``.

    Raises NumericalError when the innovation covariance has condition
    number above 1e12.
    """
    S = H @ P_pred @ H.T + R
    return P_pred @ H.T @ _inverse_innovation(S)


def covariance_update_plain(P_pred: Matrix, K: Matrix, H: Matrix) -> Matrix:
    """``(I - K H) P``."""
    return (np.eye(P_pred.shape[0]) - K @ H) @ P_pred


def covariance_update_joseph(P_pred: Matrix, K: Matrix, H: Matrix, R: Matrix) -> Matrix:
    """``(I - K H) P (I - K H)^T + K R K^T``, equal to the plain form for the optimal gain."""
    I_KH = np.eye(P_pred.shape[0]) - K @ H
    return I_KH @ P_pred @ I_KH.T + K @ R @ K.T


def covariance_predict(P: Matrix, F: Matrix, Q: Matrix) -> Matrix:
    """``F P F^T + Q``, symmetrized."""
    return symmetrize(F @ P @ F.T + Q)


def kf_update(
    x_pred: Vector,
    P_pred: Matrix,
    y: Vector,
    H: Matrix,
    R: Matrix,
    joseph_form: bool = True,
    predicted: Vector | None = None,
) -> tuple[Vector, Matrix, Vector]:
    """Kalman correction. Returns the posterior mean, covariance and innovation.

    ``predicted`` is the expected measurement, ``H x_pred`` when omitted; the
    EKF passes the nonlinear ``h(x_pred)``. Nothing is computed from the
    gain until it is known to be safe.
    """
    innovation = y - (H @ x_pred if predicted is None else predicted)
    K = kalman_gain(P_pred, H, R)
    if joseph_form:
        P = covariance_update_joseph(P_pred, K, H, R)
    else:
        P = covariance_update_plain(P_pred, K, H)
    return x_pred + K @ innovation, symmetrize(P), innovation


def predict(
    b: GaussianBelief, dt: float, Q: Matrix, m: EarthModel | None = None
) -> GaussianBelief:
    """EKF prediction.

    The mean goes through the nonlinear Euler model; the covariance through
    the motion Jacobian evaluated at the pre-step mean, plus the process
    noise density ``Q`` discretized over ``dt``.
    """
    if not (math.isfinite(dt) and dt > 0):
        msg = "Time step must be positive"
        raise DomainError(msg, operation="predict", value=dt)
    Q = check_psd("noise.Q", Q, (STATE_DIM, STATE_DIM))
    m = m or EarthModel()
    x = b.mean.vector
    F = jacobian_vector(x, dt, m)
    cov = covariance_predict(b.cov, F, discretize_process_noise(Q, dt))
    return GaussianBelief(JointState.from_vector(propagate_vector(x, dt, m)), cov)


def update(
    b_pred: GaussianBelief,
    y: Measurement,
    R: Matrix,
    joseph_form: bool = True,
) -> tuple[GaussianBelief, Vector]:
    """EKF correction with a range/elevation measurement.

    The predicted measurement comes from the nonlinear model, the gain from
    the linearized one.
    """
    x = b_pred.mean.vector
    mean, P, innovation = kf_update(
        x,
        b_pred.cov,
        y.as_vector(),
        _range_elevation_jacobian(x),
        R,
        joseph_form,
        predicted=measurement_model(b_pred.mean).as_vector(),
    )
    return GaussianBelief(JointState.from_vector(mean), P), innovation


class ExtendedKalmanFilter:
    """EKF over the 12-dimensional joint state.

    Holds one belief as plain arrays and advances it with :meth:`step`.
    Instances are single-writer; run one per replication.

    Args:
        belief: Initial belief
        noise: Process noise density and measurement covariances
        model: Measurement model (range/elevation by default)
        earth: Earth model used by the motion model
        joseph_form: Use the Joseph covariance update
    """

    def __init__(
        self,
        belief: GaussianBelief,
        noise: NoiseConfig,
        model: MeasurementModel | None = None,
        earth: EarthModel | None = None,
        joseph_form: bool = True,
    ) -> None:
        self.noise = noise
        self.model = model or RangeElevationModel()
        self.earth = earth or EarthModel()
        self.joseph_form = joseph_form
        self.R = noise.measurement_covariance(self.model.mode)
        self.x = belief.mean.vector
        self.P = belief.cov.copy()
        self._step_noise: dict[float, Matrix] = {}

    @property
    def belief(self) -> GaussianBelief:
        return GaussianBelief(JointState.from_vector(self.x), self.P.copy())

    def process_noise(self, dt: float) -> Matrix:
        """Discrete process noise for a step of ``dt``, cached per step size."""
        Qd = self._step_noise.get(dt)
        if Qd is None:
            Qd = self._step_noise[dt] = discretize_process_noise(self.noise.Q, dt)
        return Qd

    def predict(self, dt: float) -> None:
        if not (math.isfinite(dt) and dt > 0):
            msg = "Time step must be positive"
            raise DomainError(msg, operation="ExtendedKalmanFilter.predict", value=dt)
        F = jacobian_vector(self.x, dt, self.earth)
        self.P = covariance_predict(self.P, F, self.process_noise(dt))
        self.x = propagate_vector(self.x, dt, self.earth)

    def update(self, z: npt.ArrayLike) -> Vector:
        """Correct with measurement vector ``z`` and return the innovation.

        The state is left untouched when the gain computation fails.
        """
        self.x, self.P, innovation = kf_update(
            self.x,
            self.P,
            np.asarray(z, dtype=np.float64),
            self.model.jacobian(self.x),
            self.R,
            self.joseph_form,
            predicted=self.model.function(self.x),
        )
        return innovation

    def step(self, dt: float, z: npt.ArrayLike | None = None) -> Vector | None:
        """Predict over ``dt``, then update if a measurement is given."""
        self.predict(dt)
        if z is None:
            return None
        return self.update(z)


def steady_state_covariance_scalar(F: float, H: float, Q: float, R: float) -> float:
    """Closed-form scalar steady-state covariance ``(R/H^2)(F + sqrt(F^2 + H^2 Q / R))``."""
    if H == 0:
        msg = "Observation gain must be non-zero"
        raise DomainError(msg, operation="steady_state_covariance_scalar", value=H)
    if not R > 0:
        msg = "Measurement variance must be positive"
        raise DomainError(msg, operation="steady_state_covariance_scalar", value=R)
    return (R / H**2) * (F + math.sqrt(F * F + H * H * Q / R))


def iterate_scalar_riccati(
    F: float, H: float, Q: float, R: float, P0: float, n: int
) -> Vector:
    """Posterior variances of ``n`` predict/update cycles of a 1D constant system."""
    out = np.empty(n)
    P = P0
    for k in range(n):
        P_pred = F * F * P + Q
        K = P_pred * H / (H * H * P_pred + R)
        P = (1.0 - K * H) * P_pred
        out[k] = P
    return out


def gaussian_density(mean: npt.ArrayLike, cov: npt.ArrayLike, x: npt.ArrayLike) -> float:
    """Multivariate normal density; DomainError for a singular covariance."""
    cov = np.atleast_2d(np.asarray(cov, dtype=np.float64))
    eig = np.linalg.eigvalsh(cov)
    if eig.min() <= 0:
        msg = "Density needs a positive definite covariance"
        raise DomainError(msg, operation="posterior_density", value=float(eig.min()))
    try:
        return float(multivariate_normal(mean=mean, cov=cov).pdf(x))
    except (np.linalg.LinAlgError, ValueError) as e:
        msg = f"Density evaluation failed: {e}"
        raise DomainError(msg, operation="posterior_density") from e


def posterior_density(b: GaussianBelief, x: JointState) -> float:
    """Density of ``x`` under the Gaussian belief ``b``."""
    return gaussian_density(b.mean.vector, b.cov, x.vector)
