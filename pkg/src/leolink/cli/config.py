"""Scenario configuration files.

A configuration is one JSON object with optional sections; anything left out
takes the nominal simulation values. Parsing is strict: unknown keys at any
level are rejected by name and syntax errors carry line and column.
"""

from __future__ import annotations

import json
import math
from dataclasses import replace
from pathlib import Path
from typing import Any, Callable

import numpy as np

from leolink.dynamics import OrbitElements
from leolink.estimator import (
    DEFAULT_ACCELERATION_DENSITY,
    NoiseConfig,
    default_initial_covariance,
    default_process_noise,
)
from leolink.exceptions import ConfigurationError, DomainError
from leolink.geo import EarthModel, GeodeticPosition
from leolink.link import ClockModel
from leolink.scenario import (
    DEFAULT_ALTITUDE_KM,
    DEFAULT_PASS_TIME_S,
    DEFAULT_UE_DEG,
    DEFAULT_UE_SPEED_KM_S,
    ScenarioConfig,
)

SCHEMA: dict[str, frozenset[str]] = {
    "orbit": frozenset(
        {
            "altitude_km",
            "inclination_deg",
            "raan_deg",
            "phase_deg",
            "raan_rad",
            "phase_rad",
            "pass_time_s",
        }
    ),
    "ue": frozenset(
        {"latitude_deg", "longitude_deg", "height_km", "speed_mps", "direction"}
    ),
    "earth": frozenset({"equatorial_radius_km", "polar_radius_km", "mu_km3_s2"}),
    "noise": frozenset(
        {
            "process_noise_density",
            "process_position_density",
            "range_sigma_km",
            "elevation_sigma_rad",
            "position_sigma_km",
            "initial_sigma",
        }
    ),
    "clock": frozenset({"eps1", "eps2"}),
    "link": frozenset({"frequency_ghz", "speed_of_light_km_s", "theta_min_deg"}),
    "time": frozenset({"t0_s", "t1_s", "dt_s"}),
    "filter": frozenset(
        {
            "measurement_mode",
            "measurements_only_when_visible",
            "joseph_form",
            "truth_integrator",
        }
    ),
}
INITIAL_SIGMA_KEYS = ("sat_pos_km", "sat_vel_km_s", "ue_pos_km", "ue_vel_km_s")
TOP_LEVEL_KEYS = frozenset(SCHEMA) | {"seed"}

_DEFAULT_SIGMAS = {
    "sat_pos_km": 1.0,
    "sat_vel_km_s": 0.1,
    "ue_pos_km": 0.1,
    "ue_vel_km_s": 0.01,
}


class _Section:
    """Typed accessor over one config section."""

    def __init__(self, name: str, data: dict[str, Any]) -> None:
        self.name = name
        self.data = data

    def key(self, key: str) -> str:
        return f"{self.name}.{key}" if self.name else key

    def number(self, key: str, default: float) -> float:
        value = self.data.get(key, default)
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            msg = f"Invalid {self.key(key)}: expected a number"
            raise ConfigurationError(msg, config_key=self.key(key), config_value=value)
        if not math.isfinite(value):
            msg = f"Invalid {self.key(key)}: must be finite"
            raise ConfigurationError(msg, config_key=self.key(key), config_value=value)
        return float(value)

    def flag(self, key: str, default: bool) -> bool:
        value = self.data.get(key, default)
        if not isinstance(value, bool):
            msg = f"Invalid {self.key(key)}: expected true or false"
            raise ConfigurationError(msg, config_key=self.key(key), config_value=value)
        return value

    def text(self, key: str, default: str) -> str:
        value = self.data.get(key, default)
        if not isinstance(value, str):
            msg = f"Invalid {self.key(key)}: expected a string"
            raise ConfigurationError(msg, config_key=self.key(key), config_value=value)
        return value


def _sections(raw: Any) -> dict[str, _Section]:
    if not isinstance(raw, dict):
        msg = "Configuration must be a JSON object"
        raise ConfigurationError(msg)
    for key in raw:
        if key not in TOP_LEVEL_KEYS:
            msg = f"Unknown configuration key '{key}'"
            raise ConfigurationError(msg, config_key=key)
    sections: dict[str, _Section] = {}
    for name, allowed in SCHEMA.items():
        data = raw.get(name, {})
        if not isinstance(data, dict):
            msg = f"Configuration section '{name}' must be an object"
            raise ConfigurationError(msg, config_key=name)
        for key in data:
            if key not in allowed:
                msg = f"Unknown configuration key '{name}.{key}'"
                raise ConfigurationError(msg, config_key=f"{name}.{key}")
        sections[name] = _Section(name, data)
    return sections


def _initial_sigmas(noise: _Section) -> dict[str, float]:
    raw = noise.data.get("initial_sigma", {})
    if not isinstance(raw, dict):
        msg = "Configuration section 'noise.initial_sigma' must be an object"
        raise ConfigurationError(msg, config_key="noise.initial_sigma")
    for key in raw:
        if key not in INITIAL_SIGMA_KEYS:
            msg = f"Unknown configuration key 'noise.initial_sigma.{key}'"
            raise ConfigurationError(msg, config_key=f"noise.initial_sigma.{key}")
    section = _Section("noise.initial_sigma", raw)
    return {key: section.number(key, _DEFAULT_SIGMAS[key]) for key in INITIAL_SIGMA_KEYS}


def _non_negative(section: _Section, key: str, default: float) -> float:
    value = section.number(key, default)
    if value < 0:
        msg = f"Invalid {section.key(key)}: must be non-negative"
        raise ConfigurationError(msg, config_key=section.key(key), config_value=value)
    return value


def _build_noise(noise: _Section) -> NoiseConfig:
    sigmas = _initial_sigmas(noise)
    for key, value in sigmas.items():
        if value < 0:
            msg = f"Invalid noise.initial_sigma.{key}: must be non-negative"
            raise ConfigurationError(
                msg, config_key=f"noise.initial_sigma.{key}", config_value=value
            )
    range_sigma = _non_negative(noise, "range_sigma_km", 0.1)
    elevation_sigma = _non_negative(noise, "elevation_sigma_rad", 1e-3)
    position_sigma = _non_negative(noise, "position_sigma_km", 0.1)
    return NoiseConfig(
        Q=default_process_noise(
            _non_negative(noise, "process_noise_density", DEFAULT_ACCELERATION_DENSITY),
            _non_negative(noise, "process_position_density", 0.0),
        ),
        R=np.diag([range_sigma**2, elevation_sigma**2]),
        P0=default_initial_covariance(
            sigmas["sat_pos_km"],
            sigmas["sat_vel_km_s"],
            sigmas["ue_pos_km"],
            sigmas["ue_vel_km_s"],
        ),
        position_variance=position_sigma**2,
    )


def _build_direction(ue: _Section) -> tuple[float, float, float] | None:
    value = ue.data.get("direction")
    if value is None:
        return None
    if (
        not isinstance(value, list)
        or len(value) != 3
        or any(isinstance(v, bool) or not isinstance(v, (int, float)) for v in value)
    ):
        msg = "Invalid ue.direction: expected a list of three numbers"
        raise ConfigurationError(msg, config_key="ue.direction", config_value=value)
    return (float(value[0]), float(value[1]), float(value[2]))


def config_from_dict(raw: Any) -> ScenarioConfig:
    """Build a ScenarioConfig from a parsed JSON document."""
    s = _sections(raw)
    seed = raw.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int) or seed < 0:
        msg = "Invalid seed: expected a non-negative integer"
        raise ConfigurationError(msg, config_key="seed", config_value=seed)

    part = "earth"
    try:
        earth = EarthModel(
            equatorial_radius=s["earth"].number("equatorial_radius_km", 6371.0),
            polar_radius=s["earth"].number("polar_radius_km", 6371.0),
            mu=s["earth"].number("mu_km3_s2", 398600.4418),
        )
        part = "ue"
        ue = s["ue"]
        ue_start = GeodeticPosition.from_degrees(
            ue.number("latitude_deg", DEFAULT_UE_DEG[0]),
            ue.number("longitude_deg", DEFAULT_UE_DEG[1]),
            ue.number("height_km", 0.0),
        )
        part = "orbit"
        orbit = _build_orbit(s["orbit"], ue_start, earth)
        part = "clock"
        clock = ClockModel(s["clock"].number("eps1", 0.0), s["clock"].number("eps2", 0.0))
    except DomainError as e:
        raise ConfigurationError(
            f"Invalid {part} section: {e.message}", config_key=part
        ) from e

    link, time, filt = s["link"], s["time"], s["filter"]
    return ScenarioConfig(
        orbit=orbit,
        ue_start=ue_start,
        ue_speed=ue.number("speed_mps", DEFAULT_UE_SPEED_KM_S * 1000.0) / 1000.0,
        ue_direction=_build_direction(ue),
        earth=earth,
        noise=_build_noise(s["noise"]),
        clock=clock,
        f_T=link.number("frequency_ghz", 10.7) * 1e9,
        c=link.number("speed_of_light_km_s", 3e5),
        dt=time.number("dt_s", 0.01),
        t0=time.number("t0_s", 0.0),
        t1=time.number("t1_s", 600.0),
        seed=seed,
        theta_min=math.radians(link.number("theta_min_deg", 0.0)),
        measurement_mode=filt.text("measurement_mode", "range_elevation"),
        measurements_only_when_visible=filt.flag("measurements_only_when_visible", True),
        joseph_form=filt.flag("joseph_form", True),
        truth_integrator=filt.text("truth_integrator", "rk4"),
    )


def _orbit_angles(orbit: _Section) -> tuple[float, float] | None:
    given = {
        key
        for key in ("raan_deg", "phase_deg", "raan_rad", "phase_rad")
        if orbit.data.get(key) is not None
    }
    if not given:
        return None
    if given == {"raan_rad", "phase_rad"}:
        return orbit.number("raan_rad", 0.0), orbit.number("phase_rad", 0.0)
    if given == {"raan_deg", "phase_deg"}:
        return (
            math.radians(orbit.number("raan_deg", 0.0)),
            math.radians(orbit.number("phase_deg", 0.0)),
        )
    msg = "orbit RAAN and phase must be given together in the same unit"
    raise ConfigurationError(msg, config_key=f"orbit.{sorted(given)[0]}")


def _build_orbit(
    orbit: _Section, ue_start: GeodeticPosition, earth: EarthModel
) -> OrbitElements:
    altitude = orbit.number("altitude_km", DEFAULT_ALTITUDE_KM)
    inclination = math.radians(orbit.number("inclination_deg", 55.0))
    angles = _orbit_angles(orbit)
    if angles is None:
        return OrbitElements.overhead_pass(
            ue_start,
            altitude,
            inclination,
            orbit.number("pass_time_s", DEFAULT_PASS_TIME_S),
            earth,
        )
    return OrbitElements(altitude, inclination, *angles)


def load_config(path: str | Path | None) -> ScenarioConfig:
    """Load a scenario configuration; ``None`` gives the nominal scenario."""
    if path is None:
        return config_from_dict({})
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        msg = f"Cannot read configuration file {path}: {e}"
        raise ConfigurationError(msg, config_key="config") from e
    return parse_config(text)


def parse_config(text: str) -> ScenarioConfig:
    if not text.strip():
        return config_from_dict({})
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as e:
        msg = f"Configuration is not valid JSON: {e.msg}"
        raise ConfigurationError(msg, line=e.lineno, column=e.colno) from e
    return config_from_dict(raw)


def apply_overrides(
    cfg: ScenarioConfig,
    seed: int | None = None,
    theta_min_deg: float | None = None,
    freq_ghz: float | None = None,
) -> ScenarioConfig:
    """Apply command-line overrides on top of a loaded configuration."""
    changes: dict[str, Any] = {}
    if seed is not None:
        changes["seed"] = seed
    if theta_min_deg is not None:
        changes["theta_min"] = math.radians(theta_min_deg)
    if freq_ghz is not None:
        changes["f_T"] = freq_ghz * 1e9
    return replace(cfg, **changes) if changes else cfg


def _exact_inverse(
    value: float, forward: Callable[[float], float], inverse: Callable[[float], float]
) -> float:
    # Nearest float whose forward conversion reproduces value bit for bit.
    guess = inverse(value)
    candidates = [guess]
    up = down = guess
    for _ in range(4):
        up, down = math.nextafter(up, math.inf), math.nextafter(down, -math.inf)
        candidates.extend([up, down])
    for candidate in candidates:
        if forward(candidate) == value:
            return candidate
    return guess


def _degrees(rad: float) -> float:
    return _exact_inverse(rad, math.radians, math.degrees)


def config_to_dict(cfg: ScenarioConfig) -> dict[str, Any]:
    """Fully resolved configuration document with explicit RAAN and phase.

    Values are written so that :func:`config_from_dict` rebuilds the same
    floats exactly; replayed runs then match bit for bit. Noise matrices are
    written back through their diagonals.
    """
    q = np.diag(cfg.noise.Q)
    p0 = np.sqrt(np.diag(cfg.noise.P0))
    r = np.sqrt(np.diag(cfg.noise.R))
    return {
        "orbit": {
            "altitude_km": cfg.orbit.altitude,
            "inclination_deg": _degrees(cfg.orbit.inclination),
            "raan_rad": cfg.orbit.raan,
            "phase_rad": cfg.orbit.phase,
        },
        "ue": {
            "latitude_deg": _degrees(cfg.ue_start.latitude),
            "longitude_deg": _degrees(cfg.ue_start.longitude),
            "height_km": cfg.ue_start.height,
            "speed_mps": _exact_inverse(
                cfg.ue_speed, lambda v: v / 1000.0, lambda v: v * 1000.0
            ),
            "direction": list(cfg.ue_direction) if cfg.ue_direction else None,
        },
        "earth": {
            "equatorial_radius_km": cfg.earth.equatorial_radius,
            "polar_radius_km": cfg.earth.polar_radius,
            "mu_km3_s2": cfg.earth.mu,
        },
        "noise": {
            "process_noise_density": float(q[3]),
            "process_position_density": float(q[0]),
            "range_sigma_km": float(r[0]),
            "elevation_sigma_rad": float(r[1]),
            "position_sigma_km": math.sqrt(cfg.noise.position_variance),
            "initial_sigma": {
                key: float(p0[3 * i]) for i, key in enumerate(INITIAL_SIGMA_KEYS)
            },
        },
        "clock": {"eps1": cfg.clock.eps1, "eps2": cfg.clock.eps2},
        "link": {
            "frequency_ghz": _exact_inverse(
                cfg.f_T, lambda v: v * 1e9, lambda v: v / 1e9
            ),
            "speed_of_light_km_s": cfg.c,
            "theta_min_deg": _degrees(cfg.theta_min),
        },
        "time": {"t0_s": cfg.t0, "t1_s": cfg.t1, "dt_s": cfg.dt},
        "filter": {
            "measurement_mode": cfg.measurement_mode,
            "measurements_only_when_visible": cfg.measurements_only_when_visible,
            "joseph_form": cfg.joseph_form,
            "truth_integrator": cfg.truth_integrator,
        },
        "seed": cfg.seed,
    }


def dump_config(cfg: ScenarioConfig, path: str | Path) -> None:
    Path(path).write_text(
        json.dumps(config_to_dict(cfg), indent=2) + "\n", encoding="utf-8"
    )
