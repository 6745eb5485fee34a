"""Implementation of the 'simulate' command."""

from __future__ import annotations

from pathlib import Path
from typing import TYPE_CHECKING

from leolink.exceptions import ConfigurationError
from leolink.logging import cli_logger
from leolink.scenario import run_monte_carlo, run_scenario

from ..config import apply_overrides, load_config
from ..output import emit_results, utc_now
from . import scenario_events

if TYPE_CHECKING:
    from leolink.scenario import ScenarioConfig

    from ..output import RunManifest


class SimulateCommand:
    """Run the full scenario: truth, measurements, filter and link metrics."""

    name = "simulate"

    def run(
        self,
        cfg: ScenarioConfig,
        out_dir: str | Path,
        runs: int = 1,
        workers: int | None = None,
    ) -> RunManifest:
        """Run one scenario and, for ``runs`` above one, a Monte Carlo study.

        Raises ConfigurationError for fewer than one run or worker.
        """
        if runs < 1:
            msg = "Invalid --runs: must be at least 1"
            raise ConfigurationError(msg, config_key="runs", config_value=runs)
        if workers is not None and workers < 1:
            msg = "Invalid --workers: must be at least 1"
            raise ConfigurationError(msg, config_key="workers", config_value=workers)
        started = utc_now()
        result = run_scenario(cfg, events=scenario_events(self.name))
        monte_carlo = None
        if runs > 1:
            monte_carlo = run_monte_carlo(cfg, runs, workers=workers)
            cli_logger.info(
                f"Monte Carlo mean NEES {monte_carlo.mean_nees:.3f}, band "
                f"[{monte_carlo.nees_band[0]:.3f}, {monte_carlo.nees_band[1]:.3f}]",
                extra={"command": self.name},
            )
        return emit_results(
            result,
            out_dir,
            command=self.name,
            arguments={"runs": runs},
            monte_carlo=monte_carlo,
            started=started,
        )

    def execute(
        self,
        config_path: str | None,
        out_dir: str,
        seed: int | None = None,
        theta_min_deg: float | None = None,
        freq_ghz: float | None = None,
        runs: int = 1,
        workers: int | None = None,
    ) -> int:
        """Execute the simulate command."""
        cfg = apply_overrides(load_config(config_path), seed, theta_min_deg, freq_ghz)
        manifest = self.run(cfg, out_dir, runs=runs, workers=workers)
        print(f"Wrote {', '.join(manifest.outputs)} to {out_dir}")
        return 0
