"""CSV ingestion and serialization of minute telemetry, truth sidecars and report tables."""
from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass
from datetime import datetime, timedelta
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import BadTimestamp, EmptySeries, GapRejected, IoError, MissingColumn, NonFinite
from .timeseries import MINUTE_S, MINUTES_PER_HOUR, TimeSeries, Unit, utc

REQUIRED_COLUMNS = ("timestamp", "delta_t_mw", "ace_f_mw", "f_ref_hz", "f_hz", "p_g_mw", "nai_mw")
OPTIONAL_COLUMNS = ("nsi_mw",)
SCHEMA = REQUIRED_COLUMNS + OPTIONAL_COLUMNS
TRUTH_COLUMNS = ("minute", "alpha", "sigma", "beta_mw_per_hz")
GAP_POLICIES = ("reject", "drop_hour")

_UNITS = {
    "delta_t_mw": Unit.MW,
    "ace_f_mw": Unit.MW,
    "f_ref_hz": Unit.HZ,
    "f_hz": Unit.HZ,
    "p_g_mw": Unit.MW,
    "nai_mw": Unit.MW,
    "nsi_mw": Unit.MW,
}


@dataclass(frozen=True)
class Telemetry:
    """Aligned minute series of one balancing area.

    After ``drop_hour`` gap handling the series hold only the kept hours,
    back to back; ``hour_mask[h]`` says whether hour ``h`` of the original
    file survived.
    """

    delta_t: TimeSeries
    ace_f: TimeSeries
    f_ref: TimeSeries
    f: TimeSeries
    p_g: TimeSeries
    nai: TimeSeries
    nsi: TimeSeries | None = None
    hour_mask: tuple[bool, ...] | None = None

    def __len__(self) -> int:
        return len(self.f)

    @property
    def start_time(self) -> datetime:
        return self.f.start_time

    def columns(self) -> dict[str, TimeSeries]:
        out = {
            "delta_t_mw": self.delta_t,
            "ace_f_mw": self.ace_f,
            "f_ref_hz": self.f_ref,
            "f_hz": self.f,
            "p_g_mw": self.p_g,
            "nai_mw": self.nai,
        }
        if self.nsi is not None:
            out["nsi_mw"] = self.nsi
        return out


def format_timestamp(t: datetime) -> str:
    return utc(t).strftime("%Y-%m-%dT%H:%M:%SZ")


def parse_timestamp(text: str) -> datetime:
    text = text.strip()
    if text.endswith(("Z", "z")):
        text = text[:-1] + "+00:00"
    return utc(datetime.fromisoformat(text))


def fmt9(x: float) -> str:
    """Report float format: 9 significant digits."""
    if isinstance(x, float) and not math.isfinite(x):
        return "nan" if math.isnan(x) else ("inf" if x > 0 else "-inf")
    return f"{x:.9g}"


def _open_for_write(path: Path):
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        return open(path, "w", newline="", encoding="utf-8")
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


def write_rows(path: str | os.PathLike, header: Sequence[str], rows: Iterable[Sequence[object]]) -> Path:
    path = Path(path)
    with _open_for_write(path) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow(row)
    return path


# -- telemetry ---------------------------------------------------------------


def ingest_csv(path: str | os.PathLike, gap_policy: str = "reject", flip_interchange_sign: bool = False) -> Telemetry:
    """Read and validate a minute telemetry CSV.

    Header names are matched case-insensitively in any order; ``nsi_mw`` is
    optional. Timestamps must sit on a 60 s grid anchored at the first row
    and increase strictly. Missing minutes are handled per ``gap_policy``:
    ``reject`` raises GapRejected for the first affected hour, ``drop_hour``
    removes every hour (counted from the first row) that has a gap. Row
    numbers in errors are 0-based data rows.
    """
    if gap_policy not in GAP_POLICIES:
        raise ValueError(f"gap_policy must be one of {GAP_POLICIES}, got {gap_policy!r}")
    try:
        fh = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc
    with fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise MissingColumn(REQUIRED_COLUMNS[0])
        names = [h.strip().lower() for h in header]
        for col in REQUIRED_COLUMNS:
            if col not in names:
                raise MissingColumn(col)
        index = {c: names.index(c) for c in SCHEMA if c in names}
        value_cols = [c for c in SCHEMA[1:] if c in index]

        minutes: list[int] = []
        data: dict[str, list[float]] = {c: [] for c in value_cols}
        t0: datetime | None = None
        for row_no, row in enumerate(reader):
            if not row or all(not cell.strip() for cell in row):
                continue
            try:
                t = parse_timestamp(row[index["timestamp"]])
            except (ValueError, IndexError) as exc:
                raise BadTimestamp(row_no, str(exc)) from None
            if t0 is None:
                t0 = t
            offset = (t - t0).total_seconds()
            m = int(round(offset / MINUTE_S))
            if offset != m * MINUTE_S:
                raise BadTimestamp(row_no, "not on the 60 s grid")
            if minutes and m <= minutes[-1]:
                raise BadTimestamp(row_no, "timestamps must increase strictly")
            minutes.append(m)
            for c in value_cols:
                try:
                    v = float(row[index[c]])
                except (ValueError, IndexError):
                    raise NonFinite(row_no, c) from None
                if not math.isfinite(v):
                    raise NonFinite(row_no, c)
                data[c].append(v)
    if t0 is None:
        raise EmptySeries("telemetry file has no data rows")

    span = minutes[-1] + 1
    present = np.zeros(span, dtype=bool)
    present[minutes] = True
    n_hours = -(-span // MINUTES_PER_HOUR)
    gap_hours = sorted({m // MINUTES_PER_HOUR for m in np.flatnonzero(~present)})
    hour_mask = None
    keep = np.ones(len(minutes), dtype=bool)
    start = t0
    if gap_hours:
        if gap_policy == "reject":
            raise GapRejected(int(gap_hours[0]))
        dropped = set(gap_hours)
        hour_mask = tuple(h not in dropped for h in range(n_hours))
        keep = np.array([(m // MINUTES_PER_HOUR) not in dropped for m in minutes])
        if not keep.any():
            raise EmptySeries("every hour contains a gap")
        start = t0 + timedelta(seconds=MINUTE_S * minutes[int(np.argmax(keep))])

    def series(col: str) -> TimeSeries:
        vals = np.asarray(data[col], dtype=np.float64)[keep]
        if col == "delta_t_mw" and flip_interchange_sign:
            vals = -vals
        return TimeSeries(start, MINUTE_S, vals, _UNITS[col])

    return Telemetry(
        delta_t=series("delta_t_mw"),
        ace_f=series("ace_f_mw"),
        f_ref=series("f_ref_hz"),
        f=series("f_hz"),
        p_g=series("p_g_mw"),
        nai=series("nai_mw"),
        nsi=series("nsi_mw") if "nsi_mw" in data else None,
        hour_mask=hour_mask,
    )


def write_telemetry_csv(tel: Telemetry, path: str | os.PathLike) -> Path:
    """Write telemetry with round-trip float precision (``repr``)."""
    cols = tel.columns()
    names = [c for c in SCHEMA[1:] if c in cols]
    stamps = tel.f.timestamps()
    rows = (
        [format_timestamp(stamps[k])] + [repr(float(cols[c].values[k])) for c in names]
        for k in range(len(tel))
    )
    return write_rows(path, ("timestamp", *names), rows)


def telemetry_from_dataset(ds, recorded_beta: float | np.ndarray | None = None) -> Telemetry:
    """Telemetry view of a SyntheticDataset; ACE_f is recorded with ``recorded_beta``
    (MW/Hz, default the per-minute truth)."""
    d_interchange = ds.delta_interchange
    return Telemetry(
        delta_t=d_interchange,
        ace_f=ds.recorded_ace_f(recorded_beta),
        f_ref=ds.f_ref,
        f=ds.f,
        p_g=ds.p_g,
        nai=ds.nai,
        nsi=ds.nsi,
    )


def write_dataset_csv(ds, path: str | os.PathLike, recorded_beta: float | np.ndarray | None = None) -> Path:
    return write_telemetry_csv(telemetry_from_dataset(ds, recorded_beta), path)


def write_truth_csv(ds, path: str | os.PathLike) -> Path:
    rows = (
        (k, repr(float(a)), repr(float(s)), repr(float(b)))
        for k, (a, s, b) in enumerate(zip(ds.truth_alpha, ds.truth_sigma, ds.truth_beta))
    )
    return write_rows(path, TRUTH_COLUMNS, rows)


def read_truth_csv(path: str | os.PathLike) -> dict[str, np.ndarray]:
    try:
        fh = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc
    with fh:
        reader = csv.DictReader(fh)
        fields = [f.strip().lower() for f in (reader.fieldnames or [])]
        for col in TRUTH_COLUMNS:
            if col not in fields:
                raise MissingColumn(col)
        rows = list(reader)
    out = {c: np.array([float(r[c]) for r in rows]) for c in TRUTH_COLUMNS}
    out["minute"] = out["minute"].astype(int)
    return out


# -- long-format plot data ---------------------------------------------------


def emit_plot_data(series: Mapping[str, Sequence[float] | np.ndarray | TimeSeries], path: str | os.PathLike,
                   index_name: str = "minute") -> Path:
    """Write ``(index, series_name, value)`` rows, one block per series.

    Series are emitted in mapping order; values use 9 significant digits.
    """
    if not series:
        raise ValueError("emit_plot_data needs at least one series")
    blocks = []
    for name, values in series.items():
        arr = values.values if isinstance(values, TimeSeries) else np.asarray(values, dtype=np.float64)
        blocks.append((name, arr))
    rows = ((k, name, fmt9(float(v))) for name, arr in blocks for k, v in enumerate(arr))
    return write_rows(path, (index_name, "series_name", "value"), rows)
