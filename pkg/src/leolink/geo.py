"""Coordinate transforms and satellite-UE geometry.

All positions live in the earth-centered frame with the origin at the earth
center, in kilometres. Angles are radians everywhere inside the library;
degrees only appear at the configuration and CLI boundary.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from .exceptions import DomainError

if TYPE_CHECKING:
    import numpy.typing as npt

    Vec3 = npt.NDArray[np.float64]

EARTH_RADIUS_KM = 6371.0
EARTH_MU_KM3_S2 = 398600.4418


@dataclass(frozen=True)
class EarthModel:
    """Earth shape and gravity.

    Defaults to a sphere of radius 6371 km. The ellipsoidal form is kept in
    the coordinate transform so ``equatorial_radius != polar_radius`` works.
    """

    equatorial_radius: float = EARTH_RADIUS_KM
    polar_radius: float = EARTH_RADIUS_KM
    mu: float = EARTH_MU_KM3_S2

    def __post_init__(self) -> None:
        if not (
            math.isfinite(self.equatorial_radius)
            and math.isfinite(self.polar_radius)
            and math.isfinite(self.mu)
        ):
            msg = "Earth model parameters must be finite"
            raise DomainError(msg, operation="EarthModel")
        if not self.equatorial_radius >= self.polar_radius > 0:
            msg = "Earth model requires equatorial_radius >= polar_radius > 0"
            raise DomainError(
                msg,
                operation="EarthModel",
                value=(self.equatorial_radius, self.polar_radius),
            )
        if self.mu <= 0:
            msg = "Gravitational constant must be positive"
            raise DomainError(msg, operation="EarthModel", value=self.mu)

    @property
    def radius(self) -> float:
        """Reference radius R_e used by the spherical relations."""
        return self.equatorial_radius


@dataclass(frozen=True)
class GeodeticPosition:
    """UE location: latitude and longitude in radians, height in km."""

    latitude: float
    longitude: float
    height: float = 0.0

    def __post_init__(self) -> None:
        values = (self.latitude, self.longitude, self.height)
        if not all(math.isfinite(v) for v in values):
            msg = "Geodetic position must be finite"
            raise DomainError(msg, operation="GeodeticPosition", value=values)
        if not -math.pi / 2 <= self.latitude <= math.pi / 2:
            msg = "Latitude must lie in [-pi/2, pi/2]"
            raise DomainError(msg, operation="GeodeticPosition", value=self.latitude)
        if not -math.pi < self.longitude <= math.pi:
            msg = "Longitude must lie in (-pi, pi]"
            raise DomainError(msg, operation="GeodeticPosition", value=self.longitude)
        if self.height < 0:
            msg = "Height must be non-negative"
            raise DomainError(msg, operation="GeodeticPosition", value=self.height)

    @classmethod
    def from_degrees(
        cls, latitude_deg: float, longitude_deg: float, height_km: float = 0.0
    ) -> GeodeticPosition:
        """Build a position from degrees; longitude is wrapped into (-180, 180]."""
        lon = math.radians(longitude_deg)
        if lon <= -math.pi or lon > math.pi:
            lon = math.atan2(math.sin(lon), math.cos(lon))
            if lon == -math.pi:
                lon = math.pi
        return cls(math.radians(latitude_deg), lon, height_km)

    @property
    def latitude_deg(self) -> float:
        return math.degrees(self.latitude)

    @property
    def longitude_deg(self) -> float:
        return math.degrees(self.longitude)


def _as_vec3(v: npt.ArrayLike, operation: str) -> Vec3:
    arr = np.asarray(v, dtype=np.float64)
    if arr.shape != (3,) or not np.all(np.isfinite(arr)):
        msg = "Expected a finite 3-vector"
        raise DomainError(msg, operation=operation, value=arr)
    return arr


def geodetic_to_ecef(g: GeodeticPosition, m: EarthModel | None = None) -> Vec3:
    """Convert a geodetic position to earth-centered coordinates.

    Uses the prime-vertical radius of curvature
    ``N = a^2 / sqrt(a^2 cos^2(lat) + b^2 sin^2(lat))``, so for a sphere the
    result has magnitude ``a + height``.
    """
    m = m or EarthModel()
    a, b = m.equatorial_radius, m.polar_radius
    sin_lat, cos_lat = math.sin(g.latitude), math.cos(g.latitude)
    n = a * a / math.sqrt(a * a * cos_lat * cos_lat + b * b * sin_lat * sin_lat)
    return np.array(
        [
            (n + g.height) * cos_lat * math.cos(g.longitude),
            (n + g.height) * cos_lat * math.sin(g.longitude),
            (b * b) / (a * a) * (n + g.height) * sin_lat,
        ]
    )


def local_east(g: GeodeticPosition) -> Vec3:
    """Unit vector pointing east at the given location."""
    return np.array([-math.sin(g.longitude), math.cos(g.longitude), 0.0])


def earth_centered_angle(p_u: npt.ArrayLike, p_l: npt.ArrayLike) -> float:
    """Central angle between the UE and satellite position vectors."""
    u = _as_vec3(p_u, "earth_centered_angle")
    s = _as_vec3(p_l, "earth_centered_angle")
    nu, ns = float(np.linalg.norm(u)), float(np.linalg.norm(s))
    if nu == 0.0 or ns == 0.0:
        msg = "Earth-centered angle is undefined for a zero-length vector"
        raise DomainError(msg, operation="earth_centered_angle")
    cosine = float(np.dot(u, s)) / (nu * ns)
    return math.acos(min(1.0, max(-1.0, cosine)))


def elevation_angle(p_l: npt.ArrayLike, p_u: npt.ArrayLike) -> float:
    """Elevation of the satellite above the UE's local horizon.

    ``theta = asin((p_lu . u) / |p_lu|)`` with ``p_lu = p_l - p_u`` and ``u``
    the local zenith unit vector ``p_u / |p_u|``.
    """
    s = _as_vec3(p_l, "elevation_angle")
    u = _as_vec3(p_u, "elevation_angle")
    nu = float(np.linalg.norm(u))
    if nu == 0.0:
        msg = "Elevation is undefined for a UE at the earth center"
        raise DomainError(msg, operation="elevation_angle")
    p_lu = s - u
    d = float(np.linalg.norm(p_lu))
    if d == 0.0:
        msg = "Elevation is undefined for coincident satellite and UE"
        raise DomainError(msg, operation="elevation_angle")
    sine = float(np.dot(p_lu, u)) / (d * nu)
    return math.asin(min(1.0, max(-1.0, sine)))


def elevation_angles(p_l: npt.ArrayLike, p_u: npt.ArrayLike) -> npt.NDArray[np.float64]:
    """Vectorized elevation for (n, 3) arrays of satellite and UE positions."""
    s = np.atleast_2d(np.asarray(p_l, dtype=np.float64))
    u = np.atleast_2d(np.asarray(p_u, dtype=np.float64))
    p_lu = s - u
    d = np.linalg.norm(p_lu, axis=-1)
    nu = np.linalg.norm(u, axis=-1)
    if np.any(d == 0.0) or np.any(nu == 0.0):
        msg = "Elevation is undefined for coincident points or a UE at the origin"
        raise DomainError(msg, operation="elevation_angles")
    sine = np.einsum("ij,ij->i", p_lu, u) / (d * nu)
    return np.arcsin(np.clip(sine, -1.0, 1.0))


def slant_range(p_l: npt.ArrayLike, p_u: npt.ArrayLike) -> float:
    """Euclidean distance between satellite and UE."""
    s = _as_vec3(p_l, "slant_range")
    u = _as_vec3(p_u, "slant_range")
    return float(np.linalg.norm(s - u))


def slant_range_from_gamma(
    gamma: float, r_l: float, m: EarthModel | None = None
) -> float:
    """Slant range from the earth-centered angle by the cosine law.

    ``d = sqrt(R_e^2 + r_l^2 - 2 R_e r_l cos(gamma))`` for a UE on the surface.
    """
    m = m or EarthModel()
    if not (math.isfinite(gamma) and math.isfinite(r_l)):
        msg = "Cosine-law inputs must be finite"
        raise DomainError(msg, operation="slant_range_from_gamma", value=(gamma, r_l))
    if not 0.0 <= gamma <= math.pi:
        msg = "Earth-centered angle must lie in [0, pi]"
        raise DomainError(msg, operation="slant_range_from_gamma", value=gamma)
    re = m.radius
    if r_l < re:
        msg = "Satellite radius must not be below the earth surface"
        raise DomainError(msg, operation="slant_range_from_gamma", value=r_l)
    d_sq = re * re + r_l * r_l - 2.0 * re * r_l * math.cos(gamma)
    return math.sqrt(max(d_sq, 0.0))
