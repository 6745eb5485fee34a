"""Implementation of the 'track' command."""

from __future__ import annotations

from pathlib import Path
from typing import TYPE_CHECKING, Any

from leolink.exceptions import EphemerisError
from leolink.scenario import run_scenario

from ..config import apply_overrides, load_config
from ..ephemeris import EphemerisTrajectory, load_ephemeris
from ..output import emit_results, utc_now
from . import scenario_events

if TYPE_CHECKING:
    from leolink.scenario import ScenarioConfig

    from ..output import RunManifest


class TrackCommand:
    """Filter against an external ephemeris used as satellite truth."""

    name = "track"

    def load_trajectory(self, cfg: ScenarioConfig, ephemeris: str) -> EphemerisTrajectory:
        trajectory = EphemerisTrajectory(load_ephemeris(ephemeris, cfg.earth))
        t_last = float(cfg.times[-1])
        if not trajectory.covers(cfg.t0, t_last):
            lo, hi = trajectory.span
            msg = (
                f"Scenario span [{cfg.t0:g}, {t_last:g}] s is not covered by the "
                f"ephemeris [{lo:g}, {hi:g}] s"
            )
            raise EphemerisError(msg, path=ephemeris)
        return trajectory

    def run(
        self, cfg: ScenarioConfig, out_dir: str | Path, ephemeris: str
    ) -> RunManifest:
        started = utc_now()
        trajectory = self.load_trajectory(cfg, ephemeris)
        result = run_scenario(
            cfg, events=scenario_events(self.name), ephemeris=trajectory
        )
        arguments: dict[str, Any] = {"ephemeris": str(Path(ephemeris).resolve())}
        return emit_results(
            result, out_dir, command=self.name, arguments=arguments, started=started
        )

    def execute(
        self,
        config_path: str | None,
        out_dir: str,
        ephemeris: str,
        seed: int | None = None,
        theta_min_deg: float | None = None,
        freq_ghz: float | None = None,
    ) -> int:
        """Execute the track command."""
        cfg = apply_overrides(load_config(config_path), seed, theta_min_deg, freq_ghz)
        manifest = self.run(cfg, out_dir, ephemeris=ephemeris)
        print(f"Wrote {', '.join(manifest.outputs)} to {out_dir}")
        return 0
