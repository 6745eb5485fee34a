"""Tests for coordinate transforms and satellite-UE geometry."""

from __future__ import annotations

import math

import numpy as np
import pytest

from leolink.exceptions import DomainError
from leolink.geo import (
    EARTH_RADIUS_KM,
    EarthModel,
    GeodeticPosition,
    earth_centered_angle,
    elevation_angle,
    elevation_angles,
    geodetic_to_ecef,
    local_east,
    slant_range,
    slant_range_from_gamma,
)

R_SAT = 6746.0
PARIS = GeodeticPosition.from_degrees(48.8323, 2.3364)


class TestEarthModel:
    """Test the earth shape parameters."""

    def test_defaults_are_spherical(self):
        """Test the default model is the 6371 km sphere."""
        m = EarthModel()
        assert m.equatorial_radius == m.polar_radius == EARTH_RADIUS_KM
        assert m.radius == 6371.0

    def test_invalid_radii(self):
        """Test polar radius above equatorial is rejected."""
        with pytest.raises(DomainError, match="equatorial_radius"):
            EarthModel(equatorial_radius=6300.0, polar_radius=6400.0)

    def test_invalid_mu(self):
        """Test non-positive gravitational constant is rejected."""
        with pytest.raises(DomainError, match="positive"):
            EarthModel(mu=0.0)


class TestGeodeticPosition:
    """Test geodetic position validation."""

    def test_from_degrees(self):
        """Test degrees are converted to radians."""
        g = GeodeticPosition.from_degrees(90.0, 180.0)
        assert g.latitude == pytest.approx(math.pi / 2)
        assert g.longitude == pytest.approx(math.pi)

    def test_longitude_wrapping(self):
        """Test longitudes outside (-180, 180] are wrapped."""
        g = GeodeticPosition.from_degrees(0.0, 270.0)
        assert g.longitude_deg == pytest.approx(-90.0)
        g = GeodeticPosition.from_degrees(0.0, -180.0)
        assert g.longitude == pytest.approx(math.pi)

    @pytest.mark.parametrize(
        ("lat", "lon", "height"),
        [(2.0, 0.0, 0.0), (0.0, 4.0, 0.0), (0.0, 0.0, -1.0), (math.nan, 0.0, 0.0)],
    )
    def test_invalid_positions(self, lat, lon, height):
        """Test out-of-range and non-finite positions raise DomainError."""
        with pytest.raises(DomainError):
            GeodeticPosition(lat, lon, height)


class TestGeodeticToEcef:
    """Test geodetic to earth-centered conversion."""

    def test_equator_prime_meridian(self):
        """Test the equator/prime-meridian point lies on the x axis."""
        p = geodetic_to_ecef(GeodeticPosition(0.0, 0.0))
        np.testing.assert_allclose(p, [6371.0, 0.0, 0.0], atol=1e-9)

    def test_pole(self):
        """Test the pole lies on the z axis whatever the longitude."""
        p = geodetic_to_ecef(GeodeticPosition.from_degrees(90.0, 37.0))
        np.testing.assert_allclose(p, [0.0, 0.0, 6371.0], atol=1e-9)

    def test_paris(self):
        """Test the Paris position recovers its latitude and longitude."""
        p = geodetic_to_ecef(PARIS)
        assert np.linalg.norm(p) == pytest.approx(6371.0, rel=1e-12)
        assert math.degrees(math.asin(p[2] / 6371.0)) == pytest.approx(48.8323)
        assert math.degrees(math.atan2(p[1], p[0])) == pytest.approx(2.3364)
        assert p[0] == pytest.approx(4190, abs=5.0)
        assert p[2] == pytest.approx(4796, abs=5.0)

    @pytest.mark.parametrize("height", [0.0, 0.5, 375.0])
    def test_spherical_magnitude(self, height):
        """Test the magnitude is radius plus height on a sphere."""
        rng = np.random.default_rng(7)
        for _ in range(20):
            g = GeodeticPosition(
                rng.uniform(-math.pi / 2, math.pi / 2),
                rng.uniform(-math.pi + 1e-9, math.pi),
                height,
            )
            r = np.linalg.norm(geodetic_to_ecef(g))
            assert r == pytest.approx(6371.0 + height, rel=1e-9)

    def test_ellipsoid_pole(self):
        """Test the ellipsoidal form puts the pole at the polar radius."""
        m = EarthModel(equatorial_radius=6378.137, polar_radius=6356.752)
        p = geodetic_to_ecef(GeodeticPosition.from_degrees(90.0, 0.0), m)
        assert p[2] == pytest.approx(6356.752, rel=1e-9)

    def test_local_east_is_horizontal(self):
        """Test the east vector is a unit vector orthogonal to the zenith."""
        east = local_east(PARIS)
        assert np.linalg.norm(east) == pytest.approx(1.0)
        assert np.dot(east, geodetic_to_ecef(PARIS)) == pytest.approx(0.0, abs=1e-9)


class TestAngles:
    """Test earth-centered and elevation angles."""

    def test_collinear_and_orthogonal(self):
        """Test the trivial central angles."""
        assert earth_centered_angle([6371, 0, 0], [R_SAT, 0, 0]) == 0.0
        assert earth_centered_angle([6371, 0, 0], [0, R_SAT, 0]) == pytest.approx(
            math.pi / 2
        )

    def test_matches_direct_acos(self):
        """Test the Paris central angle against a direct evaluation."""
        p_u = geodetic_to_ecef(PARIS)
        p_l = np.array([R_SAT, 0.0, 0.0])
        expected = math.acos(np.dot(p_u, p_l) / (np.linalg.norm(p_u) * R_SAT))
        assert earth_centered_angle(p_u, p_l) == pytest.approx(expected)

    def test_symmetric_and_scale_invariant(self):
        """Test symmetry and invariance under positive scaling."""
        a = np.array([6371.0, 120.0, -40.0])
        b = np.array([5000.0, 3000.0, 2500.0])
        gamma = earth_centered_angle(a, b)
        assert earth_centered_angle(b, a) == pytest.approx(gamma)
        assert earth_centered_angle(3.0 * a, 0.5 * b) == pytest.approx(gamma)

    def test_zero_vector(self):
        """Test a zero vector raises DomainError."""
        with pytest.raises(DomainError):
            earth_centered_angle([0, 0, 0], [R_SAT, 0, 0])

    def test_elevation_zenith_and_horizon(self):
        """Test overhead and horizon elevations."""
        assert elevation_angle([R_SAT, 0, 0], [6371, 0, 0]) == pytest.approx(
            math.pi / 2
        )
        assert elevation_angle([6371, 500, 0], [6371, 0, 0]) == pytest.approx(
            0.0, abs=1e-12
        )

    @pytest.mark.parametrize("gamma_deg", [1.0, 5.0, 20.0, 60.0, 120.0])
    def test_elevation_spherical_triangle(self, gamma_deg):
        """Test elevation against tan(theta) = (cos g - Re/r) / sin g."""
        gamma = math.radians(gamma_deg)
        p_u = np.array([6371.0, 0.0, 0.0])
        p_l = R_SAT * np.array([math.cos(gamma), math.sin(gamma), 0.0])
        expected = math.atan((math.cos(gamma) - 6371.0 / R_SAT) / math.sin(gamma))
        assert elevation_angle(p_l, p_u) == pytest.approx(expected, abs=1e-9)

    def test_elevation_coincident(self):
        """Test coincident points raise DomainError."""
        with pytest.raises(DomainError, match="coincident"):
            elevation_angle([6371, 0, 0], [6371, 0, 0])

    def test_vectorized_matches_scalar(self):
        """Test the vectorized elevation agrees with the scalar one."""
        p_u = np.tile([6371.0, 0.0, 0.0], (3, 1))
        p_l = np.array([[R_SAT, 0, 0], [6371, 500, 0], [6000, 3000, 0]])
        thetas = elevation_angles(p_l, p_u)
        for k in range(3):
            assert thetas[k] == pytest.approx(elevation_angle(p_l[k], p_u[k]))


class TestSlantRange:
    """Test slant range and the cosine-law form."""

    def test_collinear(self):
        """Test the radial distance."""
        assert slant_range([R_SAT, 0, 0], [6371, 0, 0]) == pytest.approx(375.0)
        assert slant_range([1, 2, 3], [1, 2, 3]) == 0.0

    @pytest.mark.parametrize(
        ("gamma", "expected"),
        [
            (0.0, 375.0),
            (math.pi / 2, math.sqrt(6371.0**2 + R_SAT**2)),
            (math.pi, 6371.0 + R_SAT),
        ],
    )
    def test_cosine_law(self, gamma, expected):
        """Test the cosine law at the trivial angles."""
        assert slant_range_from_gamma(gamma, R_SAT) == pytest.approx(expected)

    def test_cosine_law_matches_euclidean(self):
        """Test the two slant range forms agree for surface UEs."""
        rng = np.random.default_rng(11)
        for _ in range(50):
            u = rng.normal(size=3)
            s = rng.normal(size=3)
            p_u = 6371.0 * u / np.linalg.norm(u)
            p_l = rng.uniform(6521.0, 7371.0) * s / np.linalg.norm(s)
            gamma = earth_centered_angle(p_u, p_l)
            d = slant_range_from_gamma(gamma, float(np.linalg.norm(p_l)))
            assert d == pytest.approx(slant_range(p_l, p_u), abs=1e-9)

    def test_below_surface(self):
        """Test a satellite radius below the surface raises DomainError."""
        with pytest.raises(DomainError, match="below"):
            slant_range_from_gamma(0.1, 6000.0)

    def test_gamma_out_of_range(self):
        """Test gamma outside [0, pi] raises DomainError."""
        with pytest.raises(DomainError):
            slant_range_from_gamma(-0.1, R_SAT)
