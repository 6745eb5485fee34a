"""End-to-end simulation: truth, noisy measurements, filtering and metrics.

A scenario generates a truth trajectory (circular-orbit RK4 or an external
ephemeris plus a linearly moving UE), synthesizes range/elevation or direct
position measurements, runs the EKF epoch by epoch and derives link metrics
from the estimate. Replications run in parallel for Monte Carlo studies.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields, is_dataclass
from typing import TYPE_CHECKING, Any, Protocol

import numpy as np
from scipy.stats import chi2

from . import events as ev
from .dynamics import (
    INTEGRATORS,
    SAT_POS,
    STATE_DIM,
    JointState,
    LinearUETrajectory,
    OrbitElements,
    propagate_truth,
    truth_orbit_state,
)
from .estimator import (
    MEASUREMENT_MODES,
    ExtendedKalmanFilter,
    GaussianBelief,
    Measurement,
    NoiseConfig,
    PositionFix,
    measurement_model_for,
)
from .exceptions import (
    ConfigurationError,
    DomainError,
    NumericalError,
    ScenarioAbortedError,
)
from .geo import EarthModel, GeodeticPosition, elevation_angles
from .link import (
    SPEED_OF_LIGHT_KM_S,
    ClockDriftFit,
    ClockModel,
    LinkMetrics,
    VisibilityWindow,
    fit_clock_drift,
    timing_advance_error,
    visibility_windows,
)
from .logging import scenario_logger

if TYPE_CHECKING:
    import numpy.typing as npt

    from .events import EventManager

    Array = npt.NDArray[np.float64]

DEFAULT_UE_DEG = (48.8323, 2.3364)
DEFAULT_UE = GeodeticPosition.from_degrees(*DEFAULT_UE_DEG)
DEFAULT_ALTITUDE_KM = 375.0
DEFAULT_INCLINATION = math.radians(55.0)
DEFAULT_PASS_TIME_S = 300.0
DEFAULT_UE_SPEED_KM_S = 0.30677
DEFAULT_FREQUENCY_HZ = 10.7e9

INITIAL_STREAM = 0
MEASUREMENT_STREAM = 1
SAT_STATES = 6


def nominal_orbit() -> OrbitElements:
    return OrbitElements.overhead_pass(
        DEFAULT_UE, DEFAULT_ALTITUDE_KM, DEFAULT_INCLINATION, DEFAULT_PASS_TIME_S
    )


def _close(a: Any, b: Any) -> bool:
    if is_dataclass(a) and not isinstance(a, type):
        if type(a) is not type(b):
            return False
        return all(_close(getattr(a, f.name), getattr(b, f.name)) for f in fields(a))
    if isinstance(a, np.ndarray) or isinstance(b, np.ndarray):
        x, y = np.asarray(a), np.asarray(b)
        return x.shape == y.shape and bool(np.allclose(x, y, rtol=1e-12, atol=1e-15))
    if isinstance(a, tuple) and isinstance(b, tuple):
        return len(a) == len(b) and all(_close(x, y) for x, y in zip(a, b))
    if isinstance(a, float) or isinstance(b, float):
        if isinstance(a, bool) or isinstance(b, bool):
            return a == b
        return math.isclose(a, b, rel_tol=1e-12, abs_tol=1e-15)
    return bool(a == b)


class SatelliteEphemeris(Protocol):
    """External satellite truth sampled at arbitrary times."""

    def states(self, times: npt.ArrayLike) -> tuple[Array, Array]: ...


@dataclass(frozen=True, eq=False)
class ScenarioConfig:
    """Everything needed to reproduce one scenario run.

    The UE velocity is ``ue_speed`` (km/s) along ``ue_direction``, or along
    local east at the start point when no direction is given.
    """

    orbit: OrbitElements = field(default_factory=nominal_orbit)
    ue_start: GeodeticPosition = DEFAULT_UE
    ue_speed: float = DEFAULT_UE_SPEED_KM_S
    ue_direction: tuple[float, float, float] | None = None
    earth: EarthModel = field(default_factory=EarthModel)
    noise: NoiseConfig = field(default_factory=NoiseConfig)
    clock: ClockModel = field(default_factory=ClockModel)
    f_T: float = DEFAULT_FREQUENCY_HZ
    c: float = SPEED_OF_LIGHT_KM_S
    dt: float = 0.01
    t0: float = 0.0
    t1: float = 600.0
    seed: int = 0
    theta_min: float = 0.0
    measurement_mode: str = "range_elevation"
    measurements_only_when_visible: bool = True
    joseph_form: bool = True
    truth_integrator: str = "rk4"

    def __post_init__(self) -> None:
        finite = all(
            math.isfinite(v)
            for v in (self.dt, self.t0, self.t1, self.f_T, self.c, self.ue_speed)
        )
        checks: list[tuple[bool, str, str, Any]] = [
            (self.dt > 0, "time.dt_s", "must be positive", self.dt),
            (self.t0 >= 0, "time.t0_s", "must be non-negative", self.t0),
            (self.t1 > self.t0, "time.t1_s", "must exceed t0", self.t1),
            (self.f_T > 0, "link.frequency_ghz", "must be positive", self.f_T),
            (self.c > 0, "link.speed_of_light_km_s", "must be positive", self.c),
            (self.ue_speed >= 0, "ue.speed_mps", "must be non-negative", self.ue_speed),
            (
                isinstance(self.seed, (int, np.integer))
                and not isinstance(self.seed, bool)
                and self.seed >= 0,
                "seed",
                "must be a non-negative integer",
                self.seed,
            ),
            (
                -math.pi / 2 <= self.theta_min <= math.pi / 2,
                "link.theta_min_deg",
                "must lie in [-90, 90] degrees",
                self.theta_min,
            ),
            (
                self.measurement_mode in MEASUREMENT_MODES,
                "filter.measurement_mode",
                f"must be one of {', '.join(MEASUREMENT_MODES)}",
                self.measurement_mode,
            ),
            (
                self.truth_integrator in INTEGRATORS,
                "filter.truth_integrator",
                f"must be one of {', '.join(INTEGRATORS)}",
                self.truth_integrator,
            ),
        ]
        if not finite:
            msg = "Scenario times, speeds and frequencies must be finite"
            raise ConfigurationError(msg)
        for ok, key, message, value in checks:
            if not ok:
                raise ConfigurationError(
                    f"Invalid {key}: {message}", config_key=key, config_value=value
                )
        if self.ue_direction is not None:
            direction = tuple(float(v) for v in self.ue_direction)
            if len(direction) != 3 or not any(direction):
                msg = "Invalid ue.direction: must be a non-zero 3-vector"
                raise ConfigurationError(
                    msg, config_key="ue.direction", config_value=self.ue_direction
                )
            object.__setattr__(self, "ue_direction", direction)

    def __eq__(self, other: object) -> bool:
        # Equal to float round-off: configs pass through degree/radian conversions.
        if not isinstance(other, ScenarioConfig):
            return NotImplemented
        return _close(self, other)

    __hash__ = None  # type: ignore[assignment]

    @property
    def n_epochs(self) -> int:
        return int(math.floor((self.t1 - self.t0) / self.dt + 1e-9)) + 1

    @property
    def times(self) -> Array:
        return self.t0 + self.dt * np.arange(self.n_epochs)

    def ue_trajectory(self) -> LinearUETrajectory:
        return LinearUETrajectory.from_geodetic(
            self.ue_start, self.ue_speed, self.ue_direction, self.earth, self.t0
        )

    @property
    def ue_velocity(self) -> Array:
        return self.ue_trajectory().velocity


@dataclass(frozen=True, eq=False)
class EpochRecord:
    """One epoch of a scenario run."""

    time: float
    truth: JointState
    estimate: JointState
    cov_diag: Array
    measurement: Measurement | PositionFix
    innovation: Array | None
    link: LinkMetrics
    gamma: float
    theta: float
    visible: bool


@dataclass(frozen=True)
class ScenarioSummary:
    """Aggregate metrics of a scenario run."""

    epochs: int
    visible_epochs: int
    mpe: tuple[float, float, float]
    rmse: tuple[float, ...]
    nees_mean: float
    windows: list[VisibilityWindow]
    ta_rmse: float
    max_abs_doppler: float
    clock_fit: ClockDriftFit | None = None
    run_index: int = 0

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {
            "epochs": self.epochs,
            "visible_epochs": self.visible_epochs,
            "mpe_percent": list(self.mpe),
            "rmse": list(self.rmse),
            "nees_mean": self.nees_mean,
            "ta_rmse_s": self.ta_rmse,
            "max_abs_doppler_hz": self.max_abs_doppler,
            "windows": [w.to_dict() for w in self.windows],
        }
        if self.clock_fit is not None:
            out["clock_drift_fit"] = {
                "alpha": self.clock_fit.alpha,
                "beta_s": self.clock_fit.beta,
                "residual_rms_s": self.clock_fit.residual_rms,
            }
        return out


@dataclass(eq=False)
class ScenarioResult:
    """Per-epoch arrays of a run plus its summary.

    Link metrics (``ta``, ``doppler``, ``range_rate``, ``tdoa_prev``,
    ``slant_range``) come from the estimate; ``*_true`` columns from truth.
    ``tdoa_measured`` is the truth TDoA plus the injected clock drift.
    """

    config: ScenarioConfig
    times: Array
    truth: Array
    estimate: Array
    cov_diag: Array
    sat_cov: Array
    measurements: Array
    innovations: Array
    visible: npt.NDArray[np.bool_]
    gamma: Array
    theta: Array
    gamma_est: Array
    theta_est: Array
    slant_range: Array
    slant_range_true: Array
    ta: Array
    ta_true: Array
    doppler: Array
    doppler_true: Array
    range_rate: Array
    range_rate_true: Array
    tdoa_prev: Array
    tdoa_measured: Array
    clock_drift: Array
    nees: Array
    summary: ScenarioSummary

    def __len__(self) -> int:
        return len(self.times)

    def record(self, k: int) -> EpochRecord:
        z = self.measurements[k]
        measurement: Measurement | PositionFix
        if self.config.measurement_mode == "direct_position":
            measurement = PositionFix(float(self.times[k]), z)
        else:
            measurement = Measurement(float(self.times[k]), float(z[0]), float(z[1]))
        innovation = self.innovations[k]
        return EpochRecord(
            time=float(self.times[k]),
            truth=JointState.from_vector(self.truth[k]),
            estimate=JointState.from_vector(self.estimate[k]),
            cov_diag=self.cov_diag[k],
            measurement=measurement,
            innovation=None if np.isnan(innovation).all() else innovation,
            link=LinkMetrics(
                time=float(self.times[k]),
                ta=float(self.ta[k]),
                doppler=float(self.doppler[k]),
                range_rate=float(self.range_rate[k]),
                tdoa_prev=float(self.tdoa_prev[k]),
                slant_range=float(self.slant_range[k]),
            ),
            gamma=float(self.gamma[k]),
            theta=float(self.theta[k]),
            visible=bool(self.visible[k]),
        )

    def link_series(self) -> list[LinkMetrics]:
        """Estimate-based link metrics at the epochs inside visibility windows."""
        return [self.record(int(k)).link for k in np.flatnonzero(self.visible)]


def make_rng(seed: int, run: int, stream: int) -> np.random.Generator:
    """Independent PCG64 stream for a (seed, run, stream) triple."""
    return np.random.Generator(
        np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(run, stream)))
    )


def _noise_factor(cov: Array) -> Array:
    w, v = np.linalg.eigh(cov)
    return v * np.sqrt(np.clip(w, 0.0, None))


def noiseless_range_elevation(sat_pos: npt.ArrayLike, ue_pos: npt.ArrayLike) -> Array:
    """Vectorized h(x) over (n, 3) position arrays, shape (n, 2)."""
    s = np.atleast_2d(np.asarray(sat_pos, dtype=np.float64))
    u = np.atleast_2d(np.asarray(ue_pos, dtype=np.float64))
    return np.column_stack(
        [np.linalg.norm(s - u, axis=-1), elevation_angles(s, u)]
    )


def synthesize_measurements(
    sat_pos: npt.ArrayLike,
    ue_pos: npt.ArrayLike,
    times: npt.ArrayLike,
    noise: NoiseConfig,
    seed: int,
    run: int = 0,
) -> list[Measurement]:
    """Range/elevation of the truth plus zero-mean Gaussian noise with covariance R.

    Identical seeds give bit-identical sequences. Elevations are clipped to
    [-pi/2, pi/2].
    """
    clean = noiseless_range_elevation(sat_pos, ue_pos)
    z = clean + _draw_noise(noise.R, len(clean), seed, run)
    z[:, 1] = np.clip(z[:, 1], -math.pi / 2, math.pi / 2)
    return [
        Measurement(float(t), float(r), float(e))
        for t, r, e in zip(np.asarray(times, dtype=np.float64), z[:, 0], z[:, 1])
    ]


def synthesize_position_fixes(
    sat_pos: npt.ArrayLike,
    times: npt.ArrayLike,
    noise: NoiseConfig,
    seed: int,
    run: int = 0,
) -> list[PositionFix]:
    """Satellite position plus isotropic Gaussian noise."""
    clean = np.atleast_2d(np.asarray(sat_pos, dtype=np.float64))
    z = clean + _draw_noise(
        noise.measurement_covariance("direct_position"), len(clean), seed, run
    )
    return [PositionFix(float(t), p) for t, p in zip(np.asarray(times), z)]


def _draw_noise(cov: Array, n: int, seed: int, run: int) -> Array:
    rng = make_rng(seed, run, MEASUREMENT_STREAM)
    return rng.standard_normal((n, cov.shape[0])) @ _noise_factor(cov).T


def mean_percentage_error(est: npt.ArrayLike, truth: npt.ArrayLike) -> Array:
    """Per-axis mean of ``100 |est - truth| / |truth|``.

    Epochs with ``|truth| < 1 km`` on an axis are left out of that axis;
    an axis with no usable epoch yields NaN.
    """
    e = np.atleast_2d(np.asarray(est, dtype=np.float64))
    t = np.atleast_2d(np.asarray(truth, dtype=np.float64))
    if e.size == 0 or t.size == 0:
        msg = "Mean percentage error needs a non-empty series"
        raise DomainError(msg, operation="mean_percentage_error")
    if e.shape != t.shape:
        msg = "Estimate and truth series must have equal shapes"
        raise DomainError(msg, operation="mean_percentage_error", value=(e.shape, t.shape))
    usable = np.abs(t) >= 1.0
    ratio = np.where(usable, np.abs(e - t) / np.where(usable, np.abs(t), 1.0), 0.0)
    counts = usable.sum(axis=0)
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(counts > 0, 100.0 * ratio.sum(axis=0) / counts, np.nan)


def nees_series(est: npt.ArrayLike, truth: npt.ArrayLike, cov: npt.ArrayLike) -> Array:
    """``e^T P^-1 e`` per epoch; NaN where the covariance is singular."""
    e = np.atleast_2d(np.asarray(est, dtype=np.float64)) - np.atleast_2d(
        np.asarray(truth, dtype=np.float64)
    )
    P = np.asarray(cov, dtype=np.float64).reshape(len(e), e.shape[1], e.shape[1])
    out = np.full(len(e), np.nan)
    for k in range(len(e)):
        try:
            if np.linalg.cond(P[k]) > 1e15:
                continue
            out[k] = float(e[k] @ np.linalg.solve(P[k], e[k]))
        except np.linalg.LinAlgError:
            continue
    return out


def nees_chi2_band(dof: int, runs: int, alpha: float = 0.05) -> tuple[float, float]:
    """Two-sided acceptance band for the NEES averaged over ``runs`` replications."""
    if dof <= 0 or runs <= 0 or not 0 < alpha < 1:
        msg = "NEES band needs positive dof and runs and alpha in (0, 1)"
        raise DomainError(msg, operation="nees_chi2_band", value=(dof, runs, alpha))
    n = dof * runs
    return (
        float(chi2.ppf(alpha / 2, n)) / runs,
        float(chi2.ppf(1 - alpha / 2, n)) / runs,
    )


def truth_satellite(
    cfg: ScenarioConfig, ephemeris: SatelliteEphemeris | None
) -> tuple[Array, Array]:
    """Truth satellite positions and velocities at every epoch of ``cfg``."""
    if ephemeris is not None:
        pos, vel = ephemeris.states(cfg.times)
        radius = np.linalg.norm(pos, axis=-1)
        if np.any(radius <= cfg.earth.radius):
            k = int(np.argmax(radius <= cfg.earth.radius))
            msg = "Satellite truth dips below the earth surface"
            raise DomainError(msg, operation="run_scenario", value=(k, float(radius[k])))
        return pos, vel
    s0 = truth_orbit_state(cfg.orbit, cfg.t0, cfg.earth)
    s0.check_above_surface(cfg.earth)
    return propagate_truth(
        s0, cfg.dt, cfg.n_epochs - 1, cfg.earth, integrator=cfg.truth_integrator
    )


def _initial_belief(cfg: ScenarioConfig, x0: Array, run: int) -> GaussianBelief:
    rng = make_rng(cfg.seed, run, INITIAL_STREAM)
    perturbation = _noise_factor(cfg.noise.P0) @ rng.standard_normal(STATE_DIM)
    return GaussianBelief(JointState.from_vector(x0 + perturbation), cfg.noise.P0)


def central_angles(sat: Array, ue: Array) -> Array:
    """Earth-centered angle per row of (n, 3) position arrays."""
    cosine = np.einsum("ij,ij->i", sat, ue) / (
        np.linalg.norm(sat, axis=-1) * np.linalg.norm(ue, axis=-1)
    )
    return np.arccos(np.clip(cosine, -1.0, 1.0))


def range_rates(x: Array) -> Array:
    """Range rate per row of (n, 12) joint-state arrays."""
    p_lu = x[:, 0:3] - x[:, 6:9]
    v_lu = x[:, 3:6] - x[:, 9:12]
    return np.einsum("ij,ij->i", p_lu, v_lu) / np.linalg.norm(p_lu, axis=-1)


def _emit_window_transitions(
    events: EventManager, visible: npt.NDArray[np.bool_], times: Array
) -> None:
    prev = False
    for k, now in enumerate(visible):
        if now and not prev:
            events.emit_event(ev.WINDOW_OPEN, float(times[k]), source="scenario", epoch=k)
        elif prev and not now:
            events.emit_event(ev.WINDOW_CLOSE, float(times[k]), source="scenario", epoch=k)
        prev = bool(now)
    if prev:
        k = len(visible) - 1
        events.emit_event(ev.WINDOW_CLOSE, float(times[k]), source="scenario", epoch=k)


def run_scenario(
    cfg: ScenarioConfig,
    events: EventManager | None = None,
    ephemeris: SatelliteEphemeris | None = None,
    run_index: int = 0,
) -> ScenarioResult:
    """Run one replication of ``cfg``.

    Raises ScenarioAbortedError with the failing epoch when a filter update
    is numerically unsafe.
    """
    times = cfg.times
    n = len(times)
    if events is not None:
        events.emit_event(ev.SCENARIO_START, cfg, source="scenario", epochs=n, run=run_index)
    scenario_logger.debug(
        f"Running {n} epochs, mode {cfg.measurement_mode}", extra={"sim_time": cfg.t0}
    )

    sat_pos, sat_vel = truth_satellite(cfg, ephemeris)
    ue = cfg.ue_trajectory()
    ue_pos = ue(times)
    truth = np.hstack([sat_pos, sat_vel, ue_pos, np.tile(ue.velocity, (n, 1))])

    theta = elevation_angles(sat_pos, ue_pos)
    gamma = central_angles(sat_pos, ue_pos)
    visible = theta >= cfg.theta_min

    if cfg.measurement_mode == "direct_position":
        fixes = synthesize_position_fixes(sat_pos, times, cfg.noise, cfg.seed, run_index)
        measurements = np.array([f.as_vector() for f in fixes])
    else:
        obs = synthesize_measurements(sat_pos, ue_pos, times, cfg.noise, cfg.seed, run_index)
        measurements = np.array([m.as_vector() for m in obs])

    ekf = ExtendedKalmanFilter(
        _initial_belief(cfg, truth[0], run_index),
        cfg.noise,
        model=measurement_model_for(cfg.measurement_mode),
        earth=cfg.earth,
        joseph_form=cfg.joseph_form,
    )

    estimate = np.empty((n, STATE_DIM))
    cov_diag = np.empty((n, STATE_DIM))
    sat_cov = np.empty((n, SAT_STATES, SAT_STATES))
    innovations = np.full((n, measurements.shape[1]), np.nan)
    for k in range(n):
        try:
            if k > 0:
                ekf.predict(cfg.dt)
            if visible[k] or not cfg.measurements_only_when_visible:
                innovations[k] = ekf.update(measurements[k])
            elif events is not None:
                events.emit_event(
                    ev.FILTER_REJECTED, float(times[k]), source="scenario", epoch=k
                )
        except NumericalError as e:
            scenario_logger.error(
                f"Filter step failed: {e.message}",
                extra={"epoch": k, "sim_time": float(times[k])},
            )
            raise ScenarioAbortedError(k, float(times[k]), e) from e
        estimate[k] = ekf.x
        cov_diag[k] = np.diag(ekf.P)
        sat_cov[k] = ekf.P[:SAT_STATES, :SAT_STATES]

    if events is not None:
        _emit_window_transitions(events, visible, times)

    sat_est, ue_est = estimate[:, SAT_POS], estimate[:, 6:9]
    slant = np.linalg.norm(sat_est - ue_est, axis=-1)
    slant_true = np.linalg.norm(sat_pos - ue_pos, axis=-1)
    rate = range_rates(estimate)
    rate_true = range_rates(truth)

    tdoa_prev = np.full(n, np.nan)
    tdoa_prev[1:] = np.diff(slant) / cfg.c
    drift = np.full(n, np.nan)
    drift[1:] = times[1:] * cfg.clock.eps2 - times[:-1] * cfg.clock.eps1
    tdoa_measured = np.full(n, np.nan)
    tdoa_measured[1:] = np.diff(slant_true) / cfg.c + drift[1:]

    nees = nees_series(
        estimate[:, :SAT_STATES], truth[:, :SAT_STATES], sat_cov
    )

    if ephemeris is not None:
        track: Any = lambda t: ephemeris.states(t)[0]  # noqa: E731
    else:
        track = cfg.orbit
    windows: list[VisibilityWindow] = []
    if n > 1:
        windows = visibility_windows(
            track, ue, cfg.theta_min, cfg.t0, float(times[-1]), cfg.dt, cfg.earth
        )

    summary = _summarize(
        cfg,
        times=times,
        truth=truth,
        estimate=estimate,
        visible=visible,
        slant=slant,
        slant_true=slant_true,
        doppler=-cfg.f_T * rate / cfg.c,
        drift=drift,
        nees=nees,
        windows=windows,
        run_index=run_index,
    )

    result = ScenarioResult(
        config=cfg,
        times=times,
        truth=truth,
        estimate=estimate,
        cov_diag=cov_diag,
        sat_cov=sat_cov,
        measurements=measurements,
        innovations=innovations,
        visible=visible,
        gamma=gamma,
        theta=theta,
        gamma_est=central_angles(sat_est, ue_est),
        theta_est=elevation_angles(sat_est, ue_est),
        slant_range=slant,
        slant_range_true=slant_true,
        ta=2.0 * slant / cfg.c,
        ta_true=2.0 * slant_true / cfg.c,
        doppler=-cfg.f_T * rate / cfg.c,
        doppler_true=-cfg.f_T * rate_true / cfg.c,
        range_rate=rate,
        range_rate_true=rate_true,
        tdoa_prev=tdoa_prev,
        tdoa_measured=tdoa_measured,
        clock_drift=drift,
        nees=nees,
        summary=summary,
    )

    if events is not None:
        events.emit_event(
            ev.SCENARIO_END, len(windows), source="scenario", epochs=n, run=run_index
        )
    return result


def _summarize(
    cfg: ScenarioConfig,
    *,
    times: Array,
    truth: Array,
    estimate: Array,
    visible: npt.NDArray[np.bool_],
    slant: Array,
    slant_true: Array,
    doppler: Array,
    drift: Array,
    nees: Array,
    windows: list[VisibilityWindow],
    run_index: int,
) -> ScenarioSummary:
    mask = visible if visible.any() else np.ones_like(visible)
    mpe = mean_percentage_error(estimate[mask][:, SAT_POS], truth[mask][:, SAT_POS])
    rmse = np.sqrt(np.mean((estimate - truth) ** 2, axis=0))
    _, ta_err = timing_advance_error(slant_true[mask], slant[mask], cfg.c)
    finite_nees = nees[np.isfinite(nees)]

    clock_fit = None
    if cfg.clock.enabled and len(times) >= 3:
        clock_fit = fit_clock_drift(np.column_stack([times[1:], drift[1:]]))

    return ScenarioSummary(
        epochs=len(times),
        visible_epochs=int(visible.sum()),
        mpe=(float(mpe[0]), float(mpe[1]), float(mpe[2])),
        rmse=tuple(float(v) for v in rmse),
        nees_mean=float(finite_nees.mean()) if finite_nees.size else math.nan,
        windows=windows,
        ta_rmse=float(np.sqrt(np.mean(ta_err**2))),
        max_abs_doppler=float(np.max(np.abs(doppler[mask]))),
        clock_fit=clock_fit,
        run_index=run_index,
    )


@dataclass(frozen=True)
class MonteCarloResult:
    """Per-run summaries of a Monte Carlo study and its NEES consistency check."""

    summaries: list[ScenarioSummary]
    mean_nees: float
    nees_band: tuple[float, float]

    @property
    def runs(self) -> int:
        return len(self.summaries)

    @property
    def consistent(self) -> bool:
        lo, hi = self.nees_band
        return lo <= self.mean_nees <= hi

    def to_dict(self) -> dict[str, Any]:
        return {
            "runs": self.runs,
            "mean_nees": self.mean_nees,
            "nees_band": list(self.nees_band),
            "consistent": self.consistent,
        }


def _run_replication(cfg: ScenarioConfig, run_index: int) -> ScenarioSummary:
    return run_scenario(cfg, run_index=run_index).summary


def run_monte_carlo(
    cfg: ScenarioConfig,
    runs: int,
    workers: int | None = None,
    alpha: float = 0.05,
) -> MonteCarloResult:
    """Run ``runs`` independent replications of ``cfg``.

    Replication ``i`` uses run index ``i`` for its random streams, so results
    do not depend on ``workers``. ``workers=1`` runs in-process.
    """
    if runs < 1:
        msg = "Monte Carlo needs at least one run"
        raise ConfigurationError(msg, config_key="runs", config_value=runs)
    scenario_logger.info(f"Monte Carlo: {runs} runs", extra={"command": "montecarlo"})
    if workers == 1:
        summaries = [_run_replication(cfg, i) for i in range(runs)]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            summaries = list(pool.map(_run_replication, [cfg] * runs, range(runs)))
    per_run = np.array([s.nees_mean for s in summaries])
    finite = per_run[np.isfinite(per_run)]
    return MonteCarloResult(
        summaries=summaries,
        mean_nees=float(finite.mean()) if finite.size else math.nan,
        nees_band=nees_chi2_band(SAT_STATES, runs, alpha),
    )
