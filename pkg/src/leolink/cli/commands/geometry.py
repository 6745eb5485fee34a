"""Implementation of the 'geometry' command."""

from __future__ import annotations

from pathlib import Path
from typing import TYPE_CHECKING, Any

import numpy as np
import pandas as pd

from leolink.geo import elevation_angles
from leolink.link import doppler_at_frequencies, doppler_rate
from leolink.scenario import central_angles, range_rates, truth_satellite

from ..config import apply_overrides, config_to_dict, load_config
from ..output import RunManifest, ensure_dir, finish_manifest, utc_now, write_csv
from .track import TrackCommand

if TYPE_CHECKING:
    from leolink.scenario import ScenarioConfig


def doppler_column(freq_ghz: float) -> str:
    return f"doppler_{freq_ghz:g}ghz_hz"


def doppler_rate_column(freq_ghz: float) -> str:
    return f"doppler_rate_{freq_ghz:g}ghz_hz_s"


def geometry_frame(
    cfg: ScenarioConfig,
    frequencies_ghz: list[float],
    ephemeris: Any | None = None,
) -> pd.DataFrame:
    """Truth geometry per epoch: angles, range, TA, radial distance and Doppler.

    Each carrier gets a Doppler column and a Doppler-rate column, the latter
    NaN at the first epoch.

    Depends on the configuration only, never on noise or seed.
    """
    times = cfg.times
    sat_pos, sat_vel = truth_satellite(cfg, ephemeris)
    ue = cfg.ue_trajectory()
    ue_pos = ue(times)
    joint = np.hstack([sat_pos, sat_vel, ue_pos, np.tile(ue.velocity, (len(times), 1))])
    slant = np.linalg.norm(sat_pos - ue_pos, axis=-1)
    rate = range_rates(joint)
    theta = elevation_angles(sat_pos, ue_pos)
    data: dict[str, Any] = {
        "time": times,
        "gamma_rad": central_angles(sat_pos, ue_pos),
        "theta_rad": theta,
        "slant_range_km": slant,
        "ta_s": 2.0 * slant / cfg.c,
        "radial_distance_km": np.linalg.norm(sat_pos, axis=-1),
        "range_rate_km_s": rate,
    }
    shifts = doppler_at_frequencies(rate, np.asarray(frequencies_ghz) * 1e9, cfg.c)
    for i, freq in enumerate(frequencies_ghz):
        data[doppler_column(freq)] = shifts[:, i]
        drift = np.full(len(times), np.nan)
        if len(times) > 1:
            drift[1:] = doppler_rate(shifts[:, i], cfg.dt)
        data[doppler_rate_column(freq)] = drift
    data["visible"] = (theta >= cfg.theta_min).astype(int)
    return pd.DataFrame(data)


class GeometryCommand:
    """Write earth-centered angle, elevation, TA and Doppler tables without filtering."""

    name = "geometry"

    def run(
        self,
        cfg: ScenarioConfig,
        out_dir: str | Path,
        frequencies_ghz: list[float] | None = None,
        ephemeris: str | None = None,
    ) -> RunManifest:
        started = utc_now()
        freqs = list(frequencies_ghz or [cfg.f_T / 1e9])
        trajectory = (
            TrackCommand().load_trajectory(cfg, ephemeris) if ephemeris else None
        )
        out = Path(out_dir)
        ensure_dir(out)
        write_csv(geometry_frame(cfg, freqs, trajectory), out / "geometry.csv")

        arguments: dict[str, Any] = {"frequencies_ghz": freqs}
        if ephemeris:
            arguments["ephemeris"] = str(Path(ephemeris).resolve())
        manifest = RunManifest(
            command=self.name,
            config=config_to_dict(cfg),
            seed=cfg.seed,
            started=started,
            outputs=["geometry.csv"],
            arguments=arguments,
        )
        return finish_manifest(manifest, out)

    def execute(
        self,
        config_path: str | None,
        out_dir: str,
        frequencies_ghz: list[float] | None = None,
        theta_min_deg: float | None = None,
        ephemeris: str | None = None,
    ) -> int:
        """Execute the geometry command."""
        cfg = apply_overrides(load_config(config_path), theta_min_deg=theta_min_deg)
        manifest = self.run(cfg, out_dir, frequencies_ghz, ephemeris)
        print(f"Wrote {', '.join(manifest.outputs)} to {out_dir}")
        return 0
