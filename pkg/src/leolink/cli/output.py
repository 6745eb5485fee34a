"""Plot-ready result files and run manifests.

CSV files use '.' decimals with 12 significant digits and '\\n' line endings,
so identical runs produce byte-identical files.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import TYPE_CHECKING, Any

import pandas as pd

from leolink._version import __version__
from leolink.exceptions import ConfigurationError, OutputError

from .config import config_to_dict

if TYPE_CHECKING:
    from leolink.link import VisibilityWindow
    from leolink.scenario import MonteCarloResult, ScenarioResult

FLOAT_FORMAT = "%.12g"
STATE_NAMES = [
    "sat_px", "sat_py", "sat_pz", "sat_vx", "sat_vy", "sat_vz",
    "ue_px", "ue_py", "ue_pz", "ue_vx", "ue_vy", "ue_vz",
]  # fmt: skip


def utc_now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


@dataclass
class RunManifest:
    """Everything needed to replay a CLI run.

    ``arguments`` holds the command options beyond the configuration
    (ephemeris path, Monte Carlo runs, carrier list).
    """

    command: str
    config: dict[str, Any]
    seed: int
    version: str = __version__
    started: str = field(default_factory=utc_now)
    finished: str | None = None
    outputs: list[str] = field(default_factory=list)
    arguments: dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> RunManifest:
        try:
            return cls(
                command=data["command"],
                config=data["config"],
                seed=data["seed"],
                version=data.get("version", __version__),
                started=data.get("started", utc_now()),
                finished=data.get("finished"),
                outputs=list(data.get("outputs", [])),
                arguments=dict(data.get("arguments", {})),
            )
        except (KeyError, TypeError) as e:
            msg = f"Manifest is missing required field: {e}"
            raise ConfigurationError(msg, config_key="manifest") from e


def ensure_dir(out_dir: Path) -> None:
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        msg = f"Cannot create output directory {out_dir}"
        raise OutputError(msg, path=str(out_dir), original_error=e) from e


def write_csv(frame: pd.DataFrame, path: Path) -> None:
    try:
        frame.to_csv(
            path,
            index=False,
            float_format=FLOAT_FORMAT,
            lineterminator="\n",
            na_rep="nan",
        )
    except OSError as e:
        msg = f"Cannot write {path}"
        raise OutputError(msg, path=str(path), original_error=e) from e


def write_json(data: dict[str, Any], path: Path) -> None:
    try:
        path.write_text(json.dumps(data, indent=2, allow_nan=True) + "\n", encoding="utf-8")
    except OSError as e:
        msg = f"Cannot write {path}"
        raise OutputError(msg, path=str(path), original_error=e) from e


def states_frame(r: ScenarioResult) -> pd.DataFrame:
    data: dict[str, Any] = {"time": r.times}
    for i, name in enumerate(STATE_NAMES):
        data[f"true_{name}"] = r.truth[:, i]
    for i, name in enumerate(STATE_NAMES):
        data[f"est_{name}"] = r.estimate[:, i]
    for i, name in enumerate(STATE_NAMES):
        data[f"var_{name}"] = r.cov_diag[:, i]
    data["visible"] = r.visible.astype(int)
    return pd.DataFrame(data)


def link_frame(r: ScenarioResult) -> pd.DataFrame:
    return pd.DataFrame(
        {
            "time": r.times,
            "ta_s": r.ta,
            "ta_true_s": r.ta_true,
            "doppler_hz": r.doppler,
            "doppler_true_hz": r.doppler_true,
            "range_rate_km_s": r.range_rate,
            "range_rate_true_km_s": r.range_rate_true,
            "tdoa_s": r.tdoa_prev,
            "tdoa_measured_s": r.tdoa_measured,
            "clock_drift_s": r.clock_drift,
            "slant_range_km": r.slant_range,
            "gamma_rad": r.gamma,
            "theta_rad": r.theta,
            "gamma_est_rad": r.gamma_est,
            "theta_est_rad": r.theta_est,
            "visible": r.visible.astype(int),
        }
    )


def windows_frame(windows: list[VisibilityWindow]) -> pd.DataFrame:
    return pd.DataFrame(
        {
            "t_start_s": [w.t_start for w in windows],
            "t_end_s": [w.t_end for w in windows],
            "theta_max_rad": [w.theta_max for w in windows],
            "t_theta_max_s": [w.t_theta_max for w in windows],
            "truncated": [int(w.truncated) for w in windows],
        }
    )


def montecarlo_frame(mc: MonteCarloResult) -> pd.DataFrame:
    return pd.DataFrame(
        {
            "run": [s.run_index for s in mc.summaries],
            "nees_mean": [s.nees_mean for s in mc.summaries],
            "mpe_x_percent": [s.mpe[0] for s in mc.summaries],
            "mpe_y_percent": [s.mpe[1] for s in mc.summaries],
            "mpe_z_percent": [s.mpe[2] for s in mc.summaries],
            "ta_rmse_s": [s.ta_rmse for s in mc.summaries],
            "max_abs_doppler_hz": [s.max_abs_doppler for s in mc.summaries],
            "visible_epochs": [s.visible_epochs for s in mc.summaries],
        }
    )


def finish_manifest(manifest: RunManifest, out_dir: Path) -> RunManifest:
    manifest.finished = utc_now()
    manifest.outputs.append("manifest.json")
    write_json(manifest.to_dict(), out_dir / "manifest.json")
    return manifest


def emit_results(
    r: ScenarioResult,
    out_dir: str | Path,
    command: str = "simulate",
    arguments: dict[str, Any] | None = None,
    monte_carlo: MonteCarloResult | None = None,
    started: str | None = None,
) -> RunManifest:
    """Write states.csv, link.csv, windows.csv, summary.json and manifest.json.

    With a Monte Carlo result, montecarlo.csv is written too and the summary
    gains a ``monte_carlo`` block.
    """
    out = Path(out_dir)
    ensure_dir(out)
    manifest = RunManifest(
        command=command,
        config=config_to_dict(r.config),
        seed=r.config.seed,
        arguments=dict(arguments or {}),
    )
    if started:
        manifest.started = started

    write_csv(states_frame(r), out / "states.csv")
    write_csv(link_frame(r), out / "link.csv")
    write_csv(windows_frame(r.summary.windows), out / "windows.csv")
    manifest.outputs.extend(["states.csv", "link.csv", "windows.csv"])

    summary = r.summary.to_dict()
    if monte_carlo is not None:
        write_csv(montecarlo_frame(monte_carlo), out / "montecarlo.csv")
        manifest.outputs.append("montecarlo.csv")
        summary["monte_carlo"] = monte_carlo.to_dict()
    write_json(summary, out / "summary.json")
    manifest.outputs.append("summary.json")
    return finish_manifest(manifest, out)


def load_manifest(path: str | Path) -> RunManifest:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as e:
        msg = f"Cannot read manifest {path}: {e}"
        raise ConfigurationError(msg, config_key="manifest") from e
    except json.JSONDecodeError as e:
        msg = f"Manifest is not valid JSON: {e.msg}"
        raise ConfigurationError(msg, line=e.lineno, column=e.colno) from e
    if not isinstance(data, dict):
        msg = "Manifest must be a JSON object"
        raise ConfigurationError(msg, config_key="manifest")
    return RunManifest.from_dict(data)
