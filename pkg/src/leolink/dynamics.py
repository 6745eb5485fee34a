"""Joint satellite-UE motion model, its Jacobian, and truth orbit generation.

The filter model is the explicit Euler step of two-body satellite motion plus
constant-velocity UE motion. Truth trajectories come from an independent
circular Keplerian solution or a classical RK4 integrator, so any filter
error from model mismatch is attributable to the Euler step alone.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from .exceptions import DomainError
from .geo import EarthModel, GeodeticPosition, geodetic_to_ecef, local_east

if TYPE_CHECKING:
    import numpy.typing as npt

    from .geo import Vec3

    Matrix = npt.NDArray[np.float64]

STATE_DIM = 12
SAT_POS = slice(0, 3)
SAT_VEL = slice(3, 6)
UE_POS = slice(6, 9)
UE_VEL = slice(9, 12)

INTEGRATORS = ("rk4", "euler")


def _wrap_angle(angle: float) -> float:
    wrapped = math.atan2(math.sin(angle), math.cos(angle))
    return math.pi if wrapped == -math.pi else wrapped


@dataclass(frozen=True, eq=False)
class SatState:
    """Satellite position (km) and velocity (km/s)."""

    pos: Vec3
    vel: Vec3

    def __post_init__(self) -> None:
        object.__setattr__(self, "pos", np.asarray(self.pos, dtype=np.float64))
        object.__setattr__(self, "vel", np.asarray(self.vel, dtype=np.float64))
        if self.pos.shape != (3,) or self.vel.shape != (3,):
            msg = "Satellite state needs 3-vectors"
            raise DomainError(msg, operation="SatState")

    def check_above_surface(self, m: EarthModel) -> None:
        """Raise DomainError if the satellite is not above the surface."""
        radius = float(np.linalg.norm(self.pos))
        if not radius > m.radius:
            msg = "Satellite position must lie above the earth surface"
            raise DomainError(msg, operation="SatState", value=radius)


@dataclass(frozen=True, eq=False)
class JointState:
    """Satellite and UE kinematics, flattened as [p^l, v^l, p^u, v^u].

    Construction checks shapes and finiteness only. That the satellite lies
    above the earth surface is checked only by
    :meth:`SatState.check_above_surface` on the truth orbit (and a radius
    check on ephemeris truth); filter estimates are never checked.
    """

    sat_pos: Vec3
    sat_vel: Vec3
    ue_pos: Vec3
    ue_vel: Vec3

    def __post_init__(self) -> None:
        for name in ("sat_pos", "sat_vel", "ue_pos", "ue_vel"):
            arr = np.array(getattr(self, name), dtype=np.float64)
            if arr.shape != (3,) or not np.all(np.isfinite(arr)):
                msg = f"JointState.{name} must be a finite 3-vector"
                raise DomainError(msg, operation="JointState", value=arr)
            object.__setattr__(self, name, arr)

    @classmethod
    def from_vector(cls, x: npt.ArrayLike) -> JointState:
        v = np.asarray(x, dtype=np.float64)
        if v.shape != (STATE_DIM,):
            msg = "Joint state vector must have 12 entries"
            raise DomainError(msg, operation="JointState.from_vector", value=v.shape)
        return cls(v[SAT_POS], v[SAT_VEL], v[UE_POS], v[UE_VEL])

    @classmethod
    def from_parts(cls, sat: SatState, ue_pos: Vec3, ue_vel: Vec3) -> JointState:
        return cls(sat.pos, sat.vel, ue_pos, ue_vel)

    @property
    def vector(self) -> npt.NDArray[np.float64]:
        return np.concatenate([self.sat_pos, self.sat_vel, self.ue_pos, self.ue_vel])

    @property
    def sat(self) -> SatState:
        return SatState(self.sat_pos, self.sat_vel)


@dataclass(frozen=True)
class OrbitElements:
    """Circular orbit: altitude (km), inclination, RAAN and phase (radians).

    ``phase`` is the argument of latitude at t = 0.
    """

    altitude: float
    inclination: float
    raan: float = 0.0
    phase: float = 0.0

    def __post_init__(self) -> None:
        values = (self.altitude, self.inclination, self.raan, self.phase)
        if not all(math.isfinite(v) for v in values):
            msg = "Orbit elements must be finite"
            raise DomainError(msg, operation="OrbitElements", value=values)
        if self.altitude <= 0:
            msg = "Orbit altitude must be positive"
            raise DomainError(msg, operation="OrbitElements", value=self.altitude)
        if not 0.0 <= self.inclination <= math.pi:
            msg = "Inclination must lie in [0, pi]"
            raise DomainError(msg, operation="OrbitElements", value=self.inclination)

    def radius(self, m: EarthModel) -> float:
        return m.radius + self.altitude

    def mean_motion(self, m: EarthModel) -> float:
        return math.sqrt(m.mu / self.radius(m) ** 3)

    def period(self, m: EarthModel) -> float:
        return 2.0 * math.pi / self.mean_motion(m)

    @classmethod
    def overhead_pass(
        cls,
        ue: GeodeticPosition,
        altitude: float,
        inclination: float,
        pass_time: float = 0.0,
        m: EarthModel | None = None,
    ) -> OrbitElements:
        """Orbit whose ascending ground track crosses ``ue`` at ``pass_time``.

        Raises DomainError when the UE latitude exceeds what the
        inclination can reach.
        """
        m = m or EarthModel()
        p_u = geodetic_to_ecef(ue, m)
        lat = math.asin(p_u[2] / float(np.linalg.norm(p_u)))
        lon = math.atan2(p_u[1], p_u[0])
        sin_i = math.sin(inclination)
        if sin_i == 0.0 or abs(math.sin(lat)) > sin_i + 1e-12:
            msg = "UE latitude is not reachable by an orbit of this inclination"
            raise DomainError(
                msg, operation="OrbitElements.overhead_pass", value=inclination
            )
        u_pass = math.asin(max(-1.0, min(1.0, math.sin(lat) / sin_i)))
        node_offset = math.atan2(
            math.cos(inclination) * math.sin(u_pass), math.cos(u_pass)
        )
        draft = cls(altitude, inclination)
        phase = u_pass - draft.mean_motion(m) * pass_time
        return cls(
            altitude,
            inclination,
            raan=_wrap_angle(lon - node_offset),
            phase=_wrap_angle(phase),
        )


@dataclass(frozen=True, eq=False)
class LinearUETrajectory:
    """UE moving in a straight line at constant velocity from ``start`` at ``t0``.

    Calling it with a scalar time returns a 3-vector; with an array of times,
    an (n, 3) array.
    """

    start: Vec3
    velocity: Vec3
    t0: float = 0.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "start", np.asarray(self.start, dtype=np.float64))
        object.__setattr__(self, "velocity", np.asarray(self.velocity, dtype=np.float64))

    @classmethod
    def from_geodetic(
        cls,
        g: GeodeticPosition,
        speed: float,
        direction: npt.ArrayLike | None = None,
        m: EarthModel | None = None,
        t0: float = 0.0,
    ) -> LinearUETrajectory:
        """Start at ``g`` moving at ``speed`` km/s, local east unless ``direction`` is given."""
        if direction is None:
            unit = local_east(g)
        else:
            unit = np.asarray(direction, dtype=np.float64)
            norm = float(np.linalg.norm(unit))
            if unit.shape != (3,) or norm == 0.0:
                msg = "UE direction must be a non-zero 3-vector"
                raise DomainError(msg, operation="LinearUETrajectory", value=unit)
            unit = unit / norm
        return cls(geodetic_to_ecef(g, m), speed * unit, t0)

    def __call__(self, t: npt.ArrayLike) -> npt.NDArray[np.float64]:
        times = np.asarray(t, dtype=np.float64)
        if times.ndim == 0:
            return self.start + (float(times) - self.t0) * self.velocity
        return self.start + np.outer(times - self.t0, self.velocity)


def gravitational_acceleration(p_l: npt.ArrayLike, m: EarthModel | None = None) -> Vec3:
    """Two-body acceleration ``-mu p / |p|^3`` in km/s^2."""
    m = m or EarthModel()
    p = np.asarray(p_l, dtype=np.float64)
    r = float(np.linalg.norm(p))
    if r == 0.0:
        msg = "Gravity is undefined at the earth center"
        raise DomainError(msg, operation="gravitational_acceleration")
    return -m.mu * p / r**3


def _check_dt(dt: float, operation: str) -> None:
    if not (math.isfinite(dt) and dt > 0):
        msg = "Time step must be positive"
        raise DomainError(msg, operation=operation, value=dt)


def propagate_vector(
    x: npt.NDArray[np.float64], dt: float, m: EarthModel
) -> npt.NDArray[np.float64]:
    """Euler step of the joint model on a flat 12-vector."""
    out = x.copy()
    out[SAT_POS] = x[SAT_POS] + x[SAT_VEL] * dt
    out[SAT_VEL] = x[SAT_VEL] + gravitational_acceleration(x[SAT_POS], m) * dt
    out[UE_POS] = x[UE_POS] + x[UE_VEL] * dt
    return out


def propagate_joint(x: JointState, dt: float, m: EarthModel | None = None) -> JointState:
    """Noise-free mean propagation of the joint state by one Euler step.

    Satellite position advances by v dt and velocity by a(p) dt; the UE
    moves linearly and keeps its velocity.
    """
    _check_dt(dt, "propagate_joint")
    return JointState.from_vector(propagate_vector(x.vector, dt, m or EarthModel()))


def gravity_gradient(p_l: npt.ArrayLike, m: EarthModel | None = None) -> Matrix:
    """Symmetric 3x3 derivative of the two-body acceleration w.r.t. position."""
    m = m or EarthModel()
    p = np.asarray(p_l, dtype=np.float64)
    r = float(np.linalg.norm(p))
    if r == 0.0:
        msg = "Gravity gradient is undefined at the earth center"
        raise DomainError(msg, operation="gravity_gradient")
    return (m.mu / r**5) * (3.0 * np.outer(p, p) - r * r * np.eye(3))


def jacobian_vector(
    x: npt.NDArray[np.float64], dt: float, m: EarthModel
) -> Matrix:
    f = np.eye(STATE_DIM)
    eye3 = np.eye(3)
    f[SAT_POS, SAT_VEL] = dt * eye3
    f[SAT_VEL, SAT_POS] = gravity_gradient(x[SAT_POS], m) * dt
    f[UE_POS, UE_VEL] = dt * eye3
    return f


def motion_jacobian(x: JointState, dt: float, m: EarthModel | None = None) -> Matrix:
    """12x12 Jacobian of :func:`propagate_joint`.

    Identity diagonal blocks, ``dt I`` position-velocity coupling for both
    bodies and ``A dt`` (the gravity gradient) in the satellite
    velocity-position block; zeros elsewhere.
    """
    _check_dt(dt, "motion_jacobian")
    return jacobian_vector(x.vector, dt, m or EarthModel())


def orbit_states(
    el: OrbitElements, times: npt.ArrayLike, m: EarthModel | None = None
) -> tuple[npt.NDArray[np.float64], npt.NDArray[np.float64]]:
    """Analytic circular-orbit positions and velocities, shape (n, 3) each."""
    m = m or EarthModel()
    t = np.atleast_1d(np.asarray(times, dtype=np.float64))
    r = el.radius(m)
    speed = math.sqrt(m.mu / r)
    u = el.phase + el.mean_motion(m) * t
    cu, su = np.cos(u), np.sin(u)
    co, so = math.cos(el.raan), math.sin(el.raan)
    ci, si = math.cos(el.inclination), math.sin(el.inclination)
    pos = r * np.column_stack([co * cu - so * ci * su, so * cu + co * ci * su, si * su])
    vel = speed * np.column_stack(
        [-co * su - so * ci * cu, -so * su + co * ci * cu, si * cu]
    )
    return pos, vel


def truth_orbit_state(
    el: OrbitElements, t: float, m: EarthModel | None = None
) -> SatState:
    """Satellite state on the circular orbit ``el`` at time ``t``."""
    if not t >= 0:
        msg = "Truth orbit time must be non-negative"
        raise DomainError(msg, operation="truth_orbit_state", value=t)
    pos, vel = orbit_states(el, [t], m)
    return SatState(pos[0], vel[0])


def _rk4_step(
    s: tuple[float, float, float, float, float, float], dt: float, mu: float
) -> tuple[float, float, float, float, float, float]:
    # Scalar kernel: a truth pass is ~1e5 steps, numpy overhead on 3-vectors dominates.
    x, y, z, vx, vy, vz = s
    h = 0.5 * dt

    r2 = x * x + y * y + z * z
    k = -mu / (r2 * math.sqrt(r2))
    ax1, ay1, az1 = k * x, k * y, k * z

    x2, y2, z2 = x + h * vx, y + h * vy, z + h * vz
    vx2, vy2, vz2 = vx + h * ax1, vy + h * ay1, vz + h * az1
    r2 = x2 * x2 + y2 * y2 + z2 * z2
    k = -mu / (r2 * math.sqrt(r2))
    ax2, ay2, az2 = k * x2, k * y2, k * z2

    x3, y3, z3 = x + h * vx2, y + h * vy2, z + h * vz2
    vx3, vy3, vz3 = vx + h * ax2, vy + h * ay2, vz + h * az2
    r2 = x3 * x3 + y3 * y3 + z3 * z3
    k = -mu / (r2 * math.sqrt(r2))
    ax3, ay3, az3 = k * x3, k * y3, k * z3

    x4, y4, z4 = x + dt * vx3, y + dt * vy3, z + dt * vz3
    vx4, vy4, vz4 = vx + dt * ax3, vy + dt * ay3, vz + dt * az3
    r2 = x4 * x4 + y4 * y4 + z4 * z4
    k = -mu / (r2 * math.sqrt(r2))
    ax4, ay4, az4 = k * x4, k * y4, k * z4

    c = dt / 6.0
    return (
        x + c * (vx + 2.0 * vx2 + 2.0 * vx3 + vx4),
        y + c * (vy + 2.0 * vy2 + 2.0 * vy3 + vy4),
        z + c * (vz + 2.0 * vz2 + 2.0 * vz3 + vz4),
        vx + c * (ax1 + 2.0 * ax2 + 2.0 * ax3 + ax4),
        vy + c * (ay1 + 2.0 * ay2 + 2.0 * ay3 + ay4),
        vz + c * (az1 + 2.0 * az2 + 2.0 * az3 + az4),
    )


def _euler_step(
    s: tuple[float, float, float, float, float, float], dt: float, mu: float
) -> tuple[float, float, float, float, float, float]:
    x, y, z, vx, vy, vz = s
    r2 = x * x + y * y + z * z
    k = -mu / (r2 * math.sqrt(r2))
    return (
        x + vx * dt,
        y + vy * dt,
        z + vz * dt,
        vx + k * x * dt,
        vy + k * y * dt,
        vz + k * z * dt,
    )


def truth_orbit_step_rk4(s: SatState, dt: float, m: EarthModel | None = None) -> SatState:
    """One classical fourth-order Runge-Kutta step of two-body motion."""
    _check_dt(dt, "truth_orbit_step_rk4")
    m = m or EarthModel()
    out = _rk4_step((*s.pos.tolist(), *s.vel.tolist()), dt, m.mu)
    return SatState(np.array(out[:3]), np.array(out[3:]))


def propagate_truth(
    s0: SatState,
    dt: float,
    n_steps: int,
    m: EarthModel | None = None,
    integrator: str = "rk4",
) -> tuple[npt.NDArray[np.float64], npt.NDArray[np.float64]]:
    """Integrate ``n_steps`` steps from ``s0``.

    Returns positions and velocities of shape (n_steps + 1, 3), the first row
    being ``s0``. ``integrator`` is "rk4" (truth) or "euler" (the filter's own
    model, for self-consistency runs).
    """
    _check_dt(dt, "propagate_truth")
    if integrator not in INTEGRATORS:
        msg = f"Unknown integrator '{integrator}'"
        raise DomainError(msg, operation="propagate_truth", value=integrator)
    m = m or EarthModel()
    step = _rk4_step if integrator == "rk4" else _euler_step
    out = np.empty((n_steps + 1, 6))
    state = (*s0.pos.tolist(), *s0.vel.tolist())
    out[0] = state
    for k in range(1, n_steps + 1):
        state = step(state, dt, m.mu)
        out[k] = state
    return out[:, :3], out[:, 3:]


def specific_energy(
    pos: npt.ArrayLike, vel: npt.ArrayLike, m: EarthModel | None = None
) -> npt.NDArray[np.float64]:
    """Specific orbital energy ``v^2/2 - mu/r`` for (n, 3) or (3,) inputs."""
    m = m or EarthModel()
    p = np.asarray(pos, dtype=np.float64)
    v = np.asarray(vel, dtype=np.float64)
    return 0.5 * np.sum(v * v, axis=-1) - m.mu / np.linalg.norm(p, axis=-1)


def angular_momentum(pos: npt.ArrayLike, vel: npt.ArrayLike) -> npt.NDArray[np.float64]:
    """Magnitude of the specific angular momentum ``|p x v|``."""
    return np.linalg.norm(np.cross(np.asarray(pos), np.asarray(vel)), axis=-1)
