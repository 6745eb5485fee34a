"""Tests for the Kalman filter algebra and the joint-state EKF."""

from __future__ import annotations

import math

import numpy as np
import pytest
from scipy.integrate import quad

from leolink.dynamics import (
    SAT_POS,
    SAT_VEL,
    STATE_DIM,
    UE_POS,
    UE_VEL,
    JointState,
    LinearUETrajectory,
    OrbitElements,
    gravity_gradient,
    orbit_states,
    propagate_vector,
)
from leolink.estimator import (
    ExtendedKalmanFilter,
    GaussianBelief,
    Measurement,
    NoiseConfig,
    SatellitePositionModel,
    covariance_predict,
    covariance_update_joseph,
    covariance_update_plain,
    default_initial_covariance,
    default_process_noise,
    discretize_process_noise,
    gaussian_density,
    iterate_scalar_riccati,
    kalman_gain,
    kf_update,
    measurement_jacobian,
    measurement_model,
    measurement_model_for,
    posterior_density,
    predict,
    steady_state_covariance_scalar,
    update,
)
from leolink.exceptions import ConfigurationError, DomainError, NumericalError
from leolink.geo import EarthModel, GeodeticPosition, elevation_angle, slant_range

PARIS = GeodeticPosition.from_degrees(48.8323, 2.3364)


def pass_state(t: float = 290.0) -> JointState:
    """Joint state a few seconds before an overhead pass of Paris."""
    el = OrbitElements.overhead_pass(PARIS, 375.0, math.radians(55.0), pass_time=300.0)
    pos, vel = orbit_states(el, [t])
    ue = LinearUETrajectory.from_geodetic(PARIS, 0.30677)
    return JointState(pos[0], vel[0], ue(t), ue.velocity)


def random_psd(rng: np.random.Generator, n: int) -> np.ndarray:
    a = rng.normal(size=(n, n))
    return a @ a.T + 0.1 * np.eye(n)


class TestNoiseConfig:
    """Test covariance validation."""

    def test_defaults(self):
        """Test the default Q density, R and P0."""
        noise = NoiseConfig()
        np.testing.assert_array_equal(np.diag(noise.Q)[SAT_VEL], [1e-10] * 3)
        np.testing.assert_array_equal(np.diag(noise.Q)[UE_VEL], [1e-10] * 3)
        np.testing.assert_array_equal(np.diag(noise.Q)[SAT_POS], [0.0] * 3)
        np.testing.assert_allclose(np.diag(noise.R), [0.01, 1e-6])
        np.testing.assert_allclose(
            np.diag(noise.P0), np.repeat([1.0, 1e-2, 1e-2, 1e-4], 3)
        )

    def test_default_builders(self):
        """Test the diagonal builders."""
        assert default_process_noise(2.0, 1.0)[3, 3] == 2.0
        assert default_process_noise(2.0, 1.0)[6, 6] == 1.0
        assert default_initial_covariance(sat_pos=3.0)[0, 0] == 9.0

    def test_asymmetric(self):
        """Test an asymmetric R is rejected."""
        with pytest.raises(ConfigurationError, match="symmetric") as exc_info:
            NoiseConfig(R=np.array([[1.0, 0.5], [0.0, 1.0]]))
        assert exc_info.value.details["config_key"] == "noise.R"

    def test_not_psd(self):
        """Test a negative eigenvalue is rejected."""
        with pytest.raises(ConfigurationError, match="semidefinite"):
            NoiseConfig(R=np.diag([1.0, -1.0]))

    def test_wrong_shape(self):
        """Test a Q of the wrong shape is rejected."""
        with pytest.raises(ConfigurationError, match="shape"):
            NoiseConfig(Q=np.eye(6))

    def test_measurement_covariance_modes(self):
        """Test the per-mode measurement covariance."""
        noise = NoiseConfig(position_variance=0.04)
        assert noise.measurement_covariance().shape == (2, 2)
        np.testing.assert_array_equal(
            noise.measurement_covariance("direct_position"), 0.04 * np.eye(3)
        )


class TestProcessNoise:
    """Test the discretization of the process noise density."""

    def test_white_acceleration_blocks(self):
        """Test the q dt^3/3, q dt^2/2, q dt blocks for white acceleration."""
        Qd = discretize_process_noise(default_process_noise(2.0, 0.0), 0.5)
        for pos, vel in ((SAT_POS, SAT_VEL), (UE_POS, UE_VEL)):
            np.testing.assert_allclose(Qd[pos, pos], 2.0 * 0.5**3 / 3 * np.eye(3))
            np.testing.assert_allclose(Qd[pos, vel], 2.0 * 0.5**2 / 2 * np.eye(3))
            np.testing.assert_allclose(Qd[vel, vel], 2.0 * 0.5 * np.eye(3))
        assert np.all(Qd[SAT_POS, UE_POS] == 0)
        np.testing.assert_array_equal(Qd, Qd.T)

    def test_position_density(self):
        """Test white velocity noise adds p dt on the position states only."""
        Qd = discretize_process_noise(default_process_noise(0.0, 3.0), 0.2)
        np.testing.assert_allclose(
            np.diag(Qd), np.tile([0.6, 0.6, 0.6, 0.0, 0.0, 0.0], 2)
        )

    def test_step_size_invariance(self):
        """Test two half steps add the same noise as one full step."""
        x = JointState([7000, 0, 0], [0, 0, 0], [6371, 0, 0], [0, 0, 0])
        m = EarthModel(mu=1e-30)
        Q = default_process_noise(1e-3, 1e-4)
        start = GaussianBelief(x, np.zeros((STATE_DIM, STATE_DIM)))
        whole = predict(start, 2.0, Q, m)
        halves = predict(predict(start, 1.0, Q, m), 1.0, Q, m)
        np.testing.assert_allclose(halves.cov, whole.cov, rtol=1e-12, atol=1e-18)

    def test_filter_adds_discrete_noise(self):
        """Test one EKF prediction from a point belief adds exactly the discrete noise."""
        zeros = np.zeros((STATE_DIM, STATE_DIM))
        noise = NoiseConfig(Q=default_process_noise(1e-6, 1e-8), P0=zeros)
        ekf = ExtendedKalmanFilter(GaussianBelief(pass_state(), zeros), noise)
        ekf.predict(0.01)
        np.testing.assert_allclose(
            ekf.P, discretize_process_noise(noise.Q, 0.01), rtol=1e-12, atol=1e-30
        )
        assert ekf.process_noise(0.01) is ekf.process_noise(0.01)


class TestMeasurementModel:
    """Test the range/elevation model and its Jacobian."""

    def test_overhead(self):
        """Test overhead geometry gives 375 km at pi/2."""
        x = JointState([6746, 0, 0], [0, 7.6, 0], [6371, 0, 0], [0, 0, 0])
        y = measurement_model(x, time=3.0)
        assert y.time == 3.0
        assert y.range == pytest.approx(375.0)
        assert y.elevation == pytest.approx(math.pi / 2)

    def test_horizon(self):
        """Test a horizontal line of sight gives zero elevation."""
        x = JointState([6371, 500, 0], [0, 7.6, 0], [6371, 0, 0], [0, 0, 0])
        assert measurement_model(x).elevation == pytest.approx(0.0, abs=1e-12)

    def test_matches_geo(self):
        """Test agreement with the geometry functions."""
        x = pass_state()
        y = measurement_model(x)
        assert y.range == slant_range(x.sat_pos, x.ue_pos)
        assert y.elevation == elevation_angle(x.sat_pos, x.ue_pos)

    def test_coincident(self):
        """Test coincident positions raise DomainError."""
        x = JointState([6371, 0, 0], [0, 0, 0], [6371, 0, 0], [0, 0, 0])
        with pytest.raises(DomainError):
            measurement_model(x)
        with pytest.raises(DomainError):
            measurement_jacobian(x)

    def test_invalid_measurement(self):
        """Test measurement validation."""
        with pytest.raises(DomainError):
            Measurement(time=0.0, range=-1.0, elevation=0.1)
        with pytest.raises(DomainError):
            Measurement(time=0.0, range=1.0, elevation=2.0)

    def test_jacobian_structure(self):
        """Test the range row and the zero velocity columns."""
        x = pass_state()
        H = measurement_jacobian(x)
        assert H.shape == (2, STATE_DIM)
        p_lu = x.sat_pos - x.ue_pos
        assert H[0, SAT_POS] @ p_lu == pytest.approx(np.linalg.norm(p_lu))
        assert np.all(H[:, SAT_VEL] == 0)
        assert np.all(H[:, UE_VEL] == 0)
        assert np.all(np.isfinite(H))

    def test_jacobian_matches_finite_differences(self):
        """Test the full matrix against central differences."""
        x = pass_state(250.0).vector
        h = 1e-3
        numeric = np.zeros((2, STATE_DIM))
        for j in range(STATE_DIM):
            step = np.zeros(STATE_DIM)
            step[j] = h
            up = measurement_model(JointState.from_vector(x + step)).as_vector()
            down = measurement_model(JointState.from_vector(x - step)).as_vector()
            numeric[:, j] = (up - down) / (2 * h)
        H = measurement_jacobian(JointState.from_vector(x))
        np.testing.assert_allclose(H, numeric, atol=1e-6)

    def test_mode_factory(self):
        """Test the measurement mode factory."""
        assert measurement_model_for("range_elevation").ndim == 2
        assert measurement_model_for("direct_position").ndim == 3
        with pytest.raises(ConfigurationError, match="Unknown measurement mode"):
            measurement_model_for("doppler")


class TestKalmanGain:
    """Test the gain and covariance updates."""

    def test_scalar(self):
        """Test P = H = R = 1 gives K = 0.5."""
        K = kalman_gain(np.eye(1), np.eye(1), np.eye(1))
        assert K[0, 0] == pytest.approx(0.5)

    def test_large_r(self):
        """Test the gain vanishes as R grows."""
        rng = np.random.default_rng(1)
        P = np.eye(STATE_DIM)
        H = 0.1 * rng.normal(size=(2, STATE_DIM))
        base = np.linalg.norm(kalman_gain(P, H, np.eye(2)))
        small = np.linalg.norm(kalman_gain(P, H, 1e6 * np.eye(2)))
        assert small < 1e-5 * base

    def test_dense_oracle(self):
        """Test against a generic inverse."""
        rng = np.random.default_rng(2)
        for _ in range(20):
            P = random_psd(rng, STATE_DIM)
            H = rng.normal(size=(2, STATE_DIM))
            R = random_psd(rng, 2)
            expected = P @ H.T @ np.linalg.inv(H @ P @ H.T + R)
            np.testing.assert_allclose(
                kalman_gain(P, H, R), expected, rtol=1e-10, atol=1e-12
            )

    def test_singular_innovation(self):
        """Test a singular innovation covariance raises NumericalError."""
        H = np.zeros((2, STATE_DIM))
        H[0, 0] = H[1, 0] = 1.0
        with pytest.raises(NumericalError, match="ill-conditioned"):
            kalman_gain(np.eye(STATE_DIM), H, np.zeros((2, 2)))

    def test_joseph_equals_plain(self):
        """Test both covariance forms agree for the optimal gain."""
        rng = np.random.default_rng(3)
        P = random_psd(rng, STATE_DIM)
        H = rng.normal(size=(2, STATE_DIM))
        R = random_psd(rng, 2)
        K = kalman_gain(P, H, R)
        np.testing.assert_allclose(
            covariance_update_joseph(P, K, H, R),
            covariance_update_plain(P, K, H),
            atol=1e-9,
        )

    def test_scalar_sequence(self):
        """Test five 1D predict/update cycles against the textbook recursion."""
        F, Q, H, R = np.eye(1), np.array([[0.2]]), np.eye(1), np.array([[0.5]])
        ys = [1.0, 1.3, 0.8, 1.1, 0.95]
        x, P = np.zeros(1), np.eye(1)
        x_ref, P_ref = 0.0, 1.0
        for y in ys:
            x, P = F @ x, covariance_predict(P, F, Q)
            x, P, innovation = kf_update(x, P, np.array([y]), H, R, joseph_form=False)
            P_ref = P_ref + 0.2
            k = P_ref / (P_ref + 0.5)
            assert innovation[0] == pytest.approx(y - x_ref)
            x_ref = x_ref + k * (y - x_ref)
            P_ref = (1 - k) * P_ref
            assert x[0] == pytest.approx(x_ref)
            assert P[0, 0] == pytest.approx(P_ref)
        np.testing.assert_allclose(
            iterate_scalar_riccati(1.0, 1.0, 0.2, 0.5, 1.0, 5)[-1], P_ref
        )


class TestPredictUpdate:
    """Test the EKF predict and update functions."""

    def test_predict_dense_oracle(self):
        """Test one prediction against an explicitly assembled F."""
        x = pass_state()
        noise = NoiseConfig()
        dt = 0.01
        b = predict(GaussianBelief(x, noise.P0), dt, noise.Q)
        F = np.eye(STATE_DIM)
        F[0:3, 3:6] = dt * np.eye(3)
        F[3:6, 0:3] = gravity_gradient(x.sat_pos) * dt
        F[6:9, 9:12] = dt * np.eye(3)
        np.testing.assert_allclose(
            b.cov, F @ noise.P0 @ F.T + discretize_process_noise(noise.Q, dt), atol=1e-12
        )
        np.testing.assert_allclose(
            b.mean.vector, propagate_vector(x.vector, dt, EarthModel())
        )

    def test_predict_ue_block(self):
        """Test the UE block cross terms with gravity switched off."""
        x = JointState([7000, 0, 0], [0, 0, 0], [6371, 0, 0], [0, 0, 0])
        P = np.eye(STATE_DIM)
        m = EarthModel(mu=1e-30)
        b = predict(GaussianBelief(x, P), 2.0, np.zeros((STATE_DIM, STATE_DIM)), m)
        assert b.cov[6, 6] == pytest.approx(1.0 + 4.0)
        assert b.cov[6, 9] == pytest.approx(2.0)
        assert b.cov[9, 9] == pytest.approx(1.0)

    def test_predict_trace_grows(self):
        """Test Q > 0 increases the trace over a vanishing step."""
        x = pass_state()
        P = np.eye(STATE_DIM)
        Q = 1e-4 * np.eye(STATE_DIM)
        b = predict(GaussianBelief(x, P), 1e-9, Q)
        assert np.trace(b.cov) >= np.trace(P)

    def test_predict_rejects_bad_q(self):
        """Test a non-PSD Q raises ConfigurationError."""
        x = pass_state()
        with pytest.raises(ConfigurationError):
            predict(GaussianBelief(x, np.eye(STATE_DIM)), 1.0, -np.eye(STATE_DIM))

    def test_zero_innovation(self):
        """Test a measurement equal to the prediction leaves the mean alone."""
        x = pass_state()
        noise = NoiseConfig()
        b, innovation = update(GaussianBelief(x, noise.P0), measurement_model(x), noise.R)
        np.testing.assert_array_equal(innovation, [0.0, 0.0])
        np.testing.assert_array_equal(b.mean.vector, x.vector)

    def test_uninformative_measurement(self):
        """Test a huge R leaves the belief nearly unchanged."""
        x = pass_state()
        noise = NoiseConfig()
        y = Measurement(0.0, measurement_model(x).range + 1.0, 0.5)
        b, _ = update(GaussianBelief(x, noise.P0), y, 1e12 * np.eye(2))
        assert np.max(np.abs(b.mean.vector - x.vector)) < 1e-6

    def test_update_shrinks_covariance(self):
        """Test the posterior covariance is below the prior."""
        x = pass_state()
        noise = NoiseConfig()
        y = Measurement(0.0, measurement_model(x).range + 0.2, 0.8)
        for joseph in (True, False):
            b, _ = update(GaussianBelief(x, noise.P0), y, noise.R, joseph_form=joseph)
            assert np.min(np.linalg.eigvalsh(noise.P0 - b.cov)) > -1e-9
            assert np.trace(b.cov) <= np.trace(noise.P0) + 1e-12
            np.testing.assert_array_equal(b.cov, b.cov.T)


class TestExtendedKalmanFilter:
    """Test the stateful EKF."""

    def test_zero_noise_fixed_point(self):
        """Test the filter tracks its own model exactly without noise."""
        x0 = pass_state()
        zeros = np.zeros((STATE_DIM, STATE_DIM))
        noise = NoiseConfig(Q=zeros, R=1e-12 * np.eye(2), P0=zeros)
        ekf = ExtendedKalmanFilter(GaussianBelief(x0, zeros), noise)
        truth = x0.vector
        m = EarthModel()
        for _ in range(200):
            truth = propagate_vector(truth, 0.01, m)
            z = measurement_model(JointState.from_vector(truth)).as_vector()
            ekf.step(0.01, z)
        assert np.max(np.abs(ekf.x - truth)) < 1e-9

    def test_covariance_stays_psd(self):
        """Test symmetry and PSD over many cycles."""
        el = OrbitElements.overhead_pass(
            PARIS, 375.0, math.radians(55.0), pass_time=300.0
        )
        ue = LinearUETrajectory.from_geodetic(PARIS, 0.30677)
        times = 280.0 + 0.01 * np.arange(2000)
        sat_pos, sat_vel = orbit_states(el, times)
        noise = NoiseConfig()
        x0 = JointState(sat_pos[0], sat_vel[0], ue(times[0]), ue.velocity)
        ekf = ExtendedKalmanFilter(GaussianBelief(x0, noise.P0), noise)
        for k in range(1, len(times)):
            truth = JointState(sat_pos[k], sat_vel[k], ue(times[k]), ue.velocity)
            ekf.step(0.01, measurement_model(truth).as_vector())
            assert np.max(np.abs(ekf.P - ekf.P.T)) < 1e-9
        assert np.min(np.linalg.eigvalsh(ekf.P)) > -1e-9

    def test_step_without_measurement(self):
        """Test a step with no measurement only predicts."""
        noise = NoiseConfig()
        ekf = ExtendedKalmanFilter(GaussianBelief(pass_state(), noise.P0), noise)
        assert ekf.step(0.01) is None
        assert np.trace(ekf.P) > np.trace(noise.P0)

    def test_update_matches_generic_correction(self):
        """Test the EKF correction is the generic one with h(x) as prediction."""
        noise = NoiseConfig()
        x0 = pass_state()
        ekf = ExtendedKalmanFilter(GaussianBelief(x0, noise.P0), noise)
        predicted = measurement_model(x0).as_vector()
        z = predicted + np.array([0.3, 1e-3])
        x, P, expected = kf_update(
            x0.vector,
            noise.P0,
            z,
            measurement_jacobian(x0),
            noise.R,
            predicted=predicted,
        )
        innovation = ekf.update(z)
        np.testing.assert_allclose(innovation, expected, rtol=1e-9, atol=1e-12)
        np.testing.assert_allclose(ekf.x, x, rtol=1e-9)
        np.testing.assert_allclose(ekf.P, P, rtol=1e-7, atol=1e-12)

    def test_failed_update_keeps_state(self):
        """Test a rejected update leaves the belief untouched."""
        zeros = np.zeros((STATE_DIM, STATE_DIM))
        noise = NoiseConfig(Q=zeros, R=np.zeros((2, 2)), P0=zeros)
        x0 = pass_state()
        ekf = ExtendedKalmanFilter(GaussianBelief(x0, zeros), noise)
        with pytest.raises(NumericalError):
            ekf.update([400.0, 0.5])
        np.testing.assert_array_equal(ekf.x, x0.vector)

    def test_direct_position_mode(self):
        """Test the linear position model pulls the satellite estimate."""
        noise = NoiseConfig(position_variance=0.01)
        x0 = pass_state()
        ekf = ExtendedKalmanFilter(
            GaussianBelief(x0, noise.P0), noise, model=SatellitePositionModel()
        )
        target = x0.sat_pos + np.array([1.0, 0.0, 0.0])
        innovation = ekf.update(target)
        np.testing.assert_allclose(innovation, [1.0, 0.0, 0.0])
        assert 0.9 < ekf.x[0] - x0.sat_pos[0] < 1.0
        np.testing.assert_array_equal(ekf.belief.mean.ue_pos, ekf.x[UE_POS])

    def test_invalid_dt(self):
        """Test a non-positive step is rejected."""
        noise = NoiseConfig()
        ekf = ExtendedKalmanFilter(GaussianBelief(pass_state(), noise.P0), noise)
        with pytest.raises(DomainError):
            ekf.predict(0.0)


class TestRiccati:
    """Test the scalar steady-state helpers."""

    @pytest.mark.parametrize(
        ("F", "H", "Q", "R", "expected"),
        [
            (1.0, 1.0, 0.0, 1.0, 2.0),
            (1.0, 1.0, 3.0, 1.0, 3.0),
            (0.5, 2.0, 0.1, 0.3, 0.075 * (0.5 + math.sqrt(0.25 + 0.4 / 0.3))),
        ],
    )
    def test_closed_form(self, F, H, Q, R, expected):
        """Test the closed form by substitution."""
        assert steady_state_covariance_scalar(F, H, Q, R) == pytest.approx(expected)

    def test_closed_form_domain(self):
        """Test H = 0 and R <= 0 are rejected."""
        with pytest.raises(DomainError):
            steady_state_covariance_scalar(1.0, 0.0, 1.0, 1.0)
        with pytest.raises(DomainError):
            steady_state_covariance_scalar(1.0, 1.0, 1.0, 0.0)

    def test_iteration_fixed_point(self):
        """Test the iterated recursion reaches its fixed point."""
        F, H, Q, R = 0.9, 1.0, 0.1, 1.0
        P = iterate_scalar_riccati(F, H, Q, R, 1.0, 500)[-1]
        P_pred = F * F * P + Q
        K = P_pred * H / (H * H * P_pred + R)
        assert (1 - K * H) * P_pred == pytest.approx(P, abs=1e-8)


class TestPosteriorDensity:
    """Test the Gaussian posterior density."""

    def test_peak(self):
        """Test the density at the mean."""
        x = pass_state()
        P = default_initial_covariance()
        b = GaussianBelief(x, P)
        expected = 1.0 / math.sqrt((2 * math.pi) ** STATE_DIM * np.linalg.det(P))
        assert posterior_density(b, x) == pytest.approx(expected, rel=1e-9)

    def test_symmetric(self):
        """Test f(mean + d) = f(mean - d)."""
        x = pass_state()
        b = GaussianBelief(x, default_initial_covariance())
        delta = np.full(STATE_DIM, 0.01)
        plus = JointState.from_vector(x.vector + delta)
        minus = JointState.from_vector(x.vector - delta)
        assert posterior_density(b, plus) == pytest.approx(posterior_density(b, minus))

    def test_normalized_1d(self):
        """Test a 1D reduction integrates to one."""
        total, _ = quad(lambda t: gaussian_density([0.0], [[2.0]], [t]), -50, 50)
        assert total == pytest.approx(1.0, abs=1e-6)

    def test_singular(self):
        """Test a singular covariance raises DomainError."""
        b = GaussianBelief(pass_state(), np.zeros((STATE_DIM, STATE_DIM)))
        with pytest.raises(DomainError, match="positive definite"):
            posterior_density(b, pass_state())
