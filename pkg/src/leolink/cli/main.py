"""Main CLI entry point for leolink."""

from __future__ import annotations

import argparse
import sys

from leolink._version import __version__
from leolink.exceptions import LeoLinkError
from leolink.logging import LeoLinkLogger, cli_logger

from .commands.geometry import GeometryCommand
from .commands.replay import ReplayCommand
from .commands.simulate import SimulateCommand
from .commands.track import TrackCommand
from .commands.windows import WindowsCommand


def _add_config_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--config",
        "-c",
        default=None,
        help="JSON scenario configuration (default: built-in Paris pass)",
    )
    parser.add_argument(
        "--out",
        "-o",
        default="out",
        help="Output directory for CSV/JSON results (default: out)",
    )
    parser.add_argument(
        "--theta-min-deg",
        type=float,
        default=None,
        help="Minimum elevation for visibility, degrees",
    )


def _add_filter_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--seed", type=int, default=None, help="Master random seed")
    parser.add_argument(
        "--freq-ghz",
        type=float,
        default=None,
        help="Carrier frequency for Doppler, GHz",
    )


def create_parser() -> argparse.ArgumentParser:
    """Create the main argument parser."""
    parser = argparse.ArgumentParser(
        prog="leolink",
        description="leolink - LEO satellite and UE tracking with link metrics",
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument(
        "--version",
        action="version",
        version=f"leolink {__version__}",
    )
    parser.add_argument(
        "--log-level",
        default="INFO",
        choices=["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"],
        help="Logging level (default: INFO)",
    )
    parser.add_argument(
        "--log-format",
        default="text",
        choices=["text", "json"],
        help="Log line format (default: text)",
    )

    subparsers = parser.add_subparsers(
        dest="command",
        help="Available commands",
        metavar="COMMAND",
    )

    simulate = subparsers.add_parser(
        "simulate",
        help="Run truth, measurements, filter and link metrics",
        description="Simulate a pass with synthetic measurements and run the EKF",
    )
    _add_config_options(simulate)
    _add_filter_options(simulate)
    simulate.add_argument(
        "--runs", type=int, default=1, help="Monte Carlo replications (default: 1)"
    )
    simulate.add_argument(
        "--workers",
        type=int,
        default=None,
        help="Worker processes for Monte Carlo runs (default: CPU count)",
    )

    track = subparsers.add_parser(
        "track",
        help="Run the EKF against an external ephemeris",
        description="Use an ephemeris CSV as satellite truth and run the EKF",
    )
    _add_config_options(track)
    _add_filter_options(track)
    track.add_argument(
        "--ephemeris", "-e", required=True, help="Ephemeris CSV (time, pos, vel)"
    )

    geometry = subparsers.add_parser(
        "geometry",
        help="Tabulate angles, slant range, TA and Doppler",
        description="Write the pass geometry and link metrics without filtering",
    )
    _add_config_options(geometry)
    geometry.add_argument(
        "--freq-ghz",
        type=float,
        action="append",
        dest="frequencies_ghz",
        default=None,
        help="Carrier frequency in GHz; repeat for several carriers",
    )
    geometry.add_argument("--ephemeris", "-e", default=None, help="Ephemeris CSV")

    windows = subparsers.add_parser(
        "windows",
        help="List visibility windows",
        description="Find the windows where the satellite is above the mask",
    )
    _add_config_options(windows)
    windows.add_argument("--ephemeris", "-e", default=None, help="Ephemeris CSV")

    replay = subparsers.add_parser(
        "replay",
        help="Re-run a recorded manifest",
        description="Reproduce a previous run from its manifest.json",
    )
    replay.add_argument("manifest", help="Path to manifest.json")
    replay.add_argument(
        "--out", "-o", default="replay", help="Output directory (default: replay)"
    )

    return parser


def _dispatch(parsed_args: argparse.Namespace) -> int:
    if parsed_args.command == "simulate":
        return SimulateCommand().execute(
            config_path=parsed_args.config,
            out_dir=parsed_args.out,
            seed=parsed_args.seed,
            theta_min_deg=parsed_args.theta_min_deg,
            freq_ghz=parsed_args.freq_ghz,
            runs=parsed_args.runs,
            workers=parsed_args.workers,
        )
    if parsed_args.command == "track":
        return TrackCommand().execute(
            config_path=parsed_args.config,
            out_dir=parsed_args.out,
            ephemeris=parsed_args.ephemeris,
            seed=parsed_args.seed,
            theta_min_deg=parsed_args.theta_min_deg,
            freq_ghz=parsed_args.freq_ghz,
        )
    if parsed_args.command == "geometry":
        return GeometryCommand().execute(
            config_path=parsed_args.config,
            out_dir=parsed_args.out,
            frequencies_ghz=parsed_args.frequencies_ghz,
            theta_min_deg=parsed_args.theta_min_deg,
            ephemeris=parsed_args.ephemeris,
        )
    if parsed_args.command == "windows":
        return WindowsCommand().execute(
            config_path=parsed_args.config,
            out_dir=parsed_args.out,
            theta_min_deg=parsed_args.theta_min_deg,
            ephemeris=parsed_args.ephemeris,
        )
    if parsed_args.command == "replay":
        return ReplayCommand().execute(
            manifest_path=parsed_args.manifest, out_dir=parsed_args.out
        )
    print(f"Unknown command: {parsed_args.command}", file=sys.stderr)
    return 1


def main(args: list[str] | None = None) -> int:
    """Main CLI entry point.

    Exit codes: 0 success, 2 configuration/domain/ephemeris errors,
    3 numerical failures, 1 anything else.
    """
    parser = create_parser()
    parsed_args = parser.parse_args(args)

    if not parsed_args.command:
        parser.print_help()
        return 1

    LeoLinkLogger.configure(
        level=parsed_args.log_level,
        format_type=parsed_args.log_format,
        force=True,
    )

    try:
        return _dispatch(parsed_args)
    except LeoLinkError as e:
        cli_logger.error(
            f"{type(e).__name__}: {e.message}",
            extra={"command": parsed_args.command},
        )
        print(f"Error: {e}", file=sys.stderr)
        return e.exit_code
    except KeyboardInterrupt:
        print("\nOperation cancelled by user.", file=sys.stderr)
        return 1
    except Exception as e:
        print(f"Error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
