"""Implementation of the 'windows' command."""

from __future__ import annotations

from pathlib import Path
from typing import TYPE_CHECKING, Any

from leolink.link import visibility_windows
from leolink.logging import cli_logger

from ..config import apply_overrides, config_to_dict, load_config
from ..output import (
    RunManifest,
    ensure_dir,
    finish_manifest,
    utc_now,
    windows_frame,
    write_csv,
)
from .track import TrackCommand

if TYPE_CHECKING:
    from leolink.link import VisibilityWindow
    from leolink.scenario import ScenarioConfig


class WindowsCommand:
    """List the visibility windows of a configuration."""

    name = "windows"

    def find(
        self, cfg: ScenarioConfig, ephemeris: str | None = None
    ) -> list[VisibilityWindow]:
        track: Any = cfg.orbit
        if ephemeris:
            trajectory = TrackCommand().load_trajectory(cfg, ephemeris)
            track = lambda t: trajectory.states(t)[0]  # noqa: E731
        return visibility_windows(
            track,
            cfg.ue_trajectory(),
            cfg.theta_min,
            cfg.t0,
            float(cfg.times[-1]),
            cfg.dt,
            cfg.earth,
        )

    def run(
        self, cfg: ScenarioConfig, out_dir: str | Path, ephemeris: str | None = None
    ) -> RunManifest:
        started = utc_now()
        windows = self.find(cfg, ephemeris)
        for w in windows:
            cli_logger.info(
                f"Window {w.t_start:.3f}-{w.t_end:.3f} s, "
                f"peak elevation {w.theta_max:.4f} rad at {w.t_theta_max:.3f} s",
                extra={"command": self.name},
            )
        out = Path(out_dir)
        ensure_dir(out)
        write_csv(windows_frame(windows), out / "windows.csv")
        arguments: dict[str, Any] = {}
        if ephemeris:
            arguments["ephemeris"] = str(Path(ephemeris).resolve())
        manifest = RunManifest(
            command=self.name,
            config=config_to_dict(cfg),
            seed=cfg.seed,
            started=started,
            outputs=["windows.csv"],
            arguments=arguments,
        )
        return finish_manifest(manifest, out)

    def execute(
        self,
        config_path: str | None,
        out_dir: str,
        theta_min_deg: float | None = None,
        ephemeris: str | None = None,
    ) -> int:
        """Execute the windows command."""
        cfg = apply_overrides(load_config(config_path), theta_min_deg=theta_min_deg)
        manifest = self.run(cfg, out_dir, ephemeris)
        print(f"Wrote {', '.join(manifest.outputs)} to {out_dir}")
        return 0
