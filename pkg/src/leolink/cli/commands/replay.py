"""Implementation of the 'replay' command."""

from __future__ import annotations

from pathlib import Path
from typing import TYPE_CHECKING

from leolink.exceptions import ConfigurationError
from leolink.logging import cli_logger

from ..config import config_from_dict
from ..output import load_manifest
from .geometry import GeometryCommand
from .simulate import SimulateCommand
from .track import TrackCommand
from .windows import WindowsCommand

if TYPE_CHECKING:
    from ..output import RunManifest

REPLAYABLE = {
    "simulate": SimulateCommand,
    "track": TrackCommand,
    "geometry": GeometryCommand,
    "windows": WindowsCommand,
}


class ReplayCommand:
    """Re-run a recorded manifest into a new output directory."""

    name = "replay"

    def run(self, manifest_path: str | Path, out_dir: str | Path) -> RunManifest:
        manifest = load_manifest(manifest_path)
        command_cls = REPLAYABLE.get(manifest.command)
        if command_cls is None:
            msg = f"Manifest command '{manifest.command}' cannot be replayed"
            raise ConfigurationError(
                msg, config_key="manifest.command", config_value=manifest.command
            )
        cfg = config_from_dict(manifest.config)
        cli_logger.info(
            f"Replaying '{manifest.command}' recorded with leolink {manifest.version}",
            extra={"command": self.name},
        )
        command = command_cls()
        return command.run(cfg, out_dir, **manifest.arguments)  # type: ignore[attr-defined]

    def execute(self, manifest_path: str, out_dir: str) -> int:
        """Execute the replay command."""
        manifest = self.run(manifest_path, out_dir)
        print(f"Wrote {', '.join(manifest.outputs)} to {out_dir}")
        return 0
