"""External ephemeris ingestion and export.

Files are CSV with header ``time,px,py,pz,vx,vy,vz`` and optional
``ax,ay,az`` columns, in s, km, km/s and km/s^2.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import TYPE_CHECKING, Sequence

import numpy as np
import pandas as pd
from scipy.interpolate import interp1d

from leolink.exceptions import EphemerisError, OutputError
from leolink.geo import EarthModel

if TYPE_CHECKING:
    import numpy.typing as npt

    from leolink.geo import Vec3

BASE_COLUMNS = ["time", "px", "py", "pz", "vx", "vy", "vz"]
ACC_COLUMNS = ["ax", "ay", "az"]


@dataclass(frozen=True, eq=False)
class EphemerisRecord:
    """One ephemeris sample."""

    time: float
    pos: Vec3
    vel: Vec3
    acc: Vec3 | None = None


def _read_frame(path: Path) -> pd.DataFrame:
    try:
        return pd.read_csv(path, skipinitialspace=True, dtype=str)
    except FileNotFoundError as e:
        msg = f"Ephemeris file not found: {path}"
        raise EphemerisError(msg, path=str(path)) from e
    except pd.errors.EmptyDataError as e:
        msg = "Ephemeris file is empty"
        raise EphemerisError(msg, path=str(path)) from e
    except (pd.errors.ParserError, OSError, UnicodeDecodeError) as e:
        msg = f"Malformed ephemeris file: {e}"
        raise EphemerisError(msg, path=str(path)) from e


def load_ephemeris(
    path: str | Path, m: EarthModel | None = None
) -> list[EphemerisRecord]:
    """Read and validate an ephemeris CSV.

    Raises EphemerisError naming the 1-based data row for malformed values,
    non-increasing times and positions at or below the surface.
    """
    path = Path(path)
    m = m or EarthModel()
    frame = _read_frame(path)
    columns = [c.strip() for c in frame.columns]
    if columns not in (BASE_COLUMNS, BASE_COLUMNS + ACC_COLUMNS):
        msg = (
            "Ephemeris header must be "
            f"'{','.join(BASE_COLUMNS)}' with optional '{','.join(ACC_COLUMNS)}'"
        )
        raise EphemerisError(msg, path=str(path))
    frame.columns = columns
    if frame.empty:
        msg = "Ephemeris file has no data rows"
        raise EphemerisError(msg, path=str(path))

    values = frame.apply(pd.to_numeric, errors="coerce").to_numpy(dtype=np.float64)
    bad = ~np.isfinite(values).all(axis=1)
    if bad.any():
        row = int(np.argmax(bad)) + 1
        msg = f"Malformed ephemeris row {row}"
        raise EphemerisError(msg, path=str(path), row=row)

    times = values[:, 0]
    steps = np.diff(times)
    if np.any(steps <= 0):
        row = int(np.argmax(steps <= 0)) + 2
        msg = f"Ephemeris times must be strictly increasing (row {row})"
        raise EphemerisError(msg, path=str(path), row=row)

    radius = np.linalg.norm(values[:, 1:4], axis=1)
    below = radius <= m.radius
    if below.any():
        row = int(np.argmax(below)) + 1
        msg = f"Ephemeris position below the earth surface (row {row})"
        raise EphemerisError(msg, path=str(path), row=row)

    has_acc = values.shape[1] == len(BASE_COLUMNS) + len(ACC_COLUMNS)
    return [
        EphemerisRecord(
            time=float(v[0]),
            pos=v[1:4].copy(),
            vel=v[4:7].copy(),
            acc=v[7:10].copy() if has_acc else None,
        )
        for v in values
    ]


def write_ephemeris(records: Sequence[EphemerisRecord], path: str | Path) -> None:
    """Write records in the ingestion format at full float precision."""
    with_acc = bool(records) and all(r.acc is not None for r in records)
    rows = []
    for r in records:
        row = [r.time, *r.pos, *r.vel]
        if with_acc and r.acc is not None:
            row.extend(r.acc)
        rows.append(row)
    columns = BASE_COLUMNS + (ACC_COLUMNS if with_acc else [])
    try:
        pd.DataFrame(rows, columns=columns).to_csv(
            path, index=False, float_format="%.17g", lineterminator="\n"
        )
    except OSError as e:
        msg = f"Cannot write ephemeris {path}"
        raise OutputError(msg, path=str(path), original_error=e) from e


class EphemerisTrajectory:
    """Satellite truth linearly interpolated between ephemeris samples."""

    def __init__(self, records: Sequence[EphemerisRecord]) -> None:
        if len(records) < 2:
            msg = "Interpolation needs at least two ephemeris records"
            raise EphemerisError(msg)
        self.times = np.array([r.time for r in records])
        states = np.array([np.concatenate([r.pos, r.vel]) for r in records])
        self._interp = interp1d(self.times, states, axis=0, assume_sorted=True)

    @property
    def span(self) -> tuple[float, float]:
        return float(self.times[0]), float(self.times[-1])

    def covers(self, t0: float, t1: float) -> bool:
        lo, hi = self.span
        return lo <= t0 and t1 <= hi

    def states(
        self, times: npt.ArrayLike
    ) -> tuple[npt.NDArray[np.float64], npt.NDArray[np.float64]]:
        t = np.atleast_1d(np.asarray(times, dtype=np.float64))
        lo, hi = self.span
        if t.min() < lo or t.max() > hi:
            msg = (
                f"Requested times [{t.min():g}, {t.max():g}] s fall outside the "
                f"ephemeris span [{lo:g}, {hi:g}] s"
            )
            raise EphemerisError(msg)
        out = self._interp(t)
        return out[:, :3], out[:, 3:]
