"""Sunspot-number series ingestion, smoothing, embedding and splitting.

Input files follow the SILSO catalogue layouts (semicolon- or
whitespace-delimited):

* yearly rows:  ``year; value; ...``               (e.g. ``1700;5.0``)
* monthly rows: ``year; month; decimal-date; value; ...``
                                                   (e.g. ``1749;01;1749.042;96.7``)

A value of ``-1`` marks a missing observation; it is kept as an explicit
gap, never dropped and never treated as zero.  Timestamps must be strictly
increasing with no holes in the cadence.

Internally a monthly timestamp is the integer ``year*12 + (month-1)`` and a
yearly timestamp is the calendar year, so ordering and spacing checks are
plain integer arithmetic for both cadences.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .errors import (
    GapError,
    IntegrityError,
    LengthError,
    ParseError,
    RangeError,
    ShapeError,
)

YEARLY = "yearly"
MONTHLY = "monthly"
_CADENCES = (YEARLY, MONTHLY)


def month_index(year: int, month: int) -> int:
    """Integer timestamp of a calendar month (January 1749 -> 20988)."""
    return year * 12 + (month - 1)


def format_timestamp(cadence: str, t: int) -> str:
    """Render an integer timestamp as ``1700`` (yearly) or ``1749-01`` (monthly)."""
    if cadence == YEARLY:
        return str(int(t))
    year, month = divmod(int(t), 12)
    return f"{year:04d}-{month + 1:02d}"


def parse_timestamp(cadence: str, text: str | int, role: str = "start") -> int:
    """Parse ``1920``, ``1996-04`` etc. into an integer timestamp.

    A bare year on a monthly series is ambiguous; ``role`` resolves it:
    ``"start"`` means January of that year and ``"end"`` means December, so
    windows and split boundaries written as years behave inclusively.
    """
    if cadence not in _CADENCES:
        raise ShapeError(f"unknown cadence {cadence!r}")
    s = str(text).strip()
    try:
        if "-" in s:
            if cadence == YEARLY:
                raise ValueError("yearly timestamps take no month part")
            year_s, month_s = s.split("-")
            year, month = int(year_s), int(month_s)
            if not 1 <= month <= 12:
                raise ValueError(f"month {month} out of range")
            return month_index(year, month)
        year = int(s)
    except ValueError as exc:
        raise ParseError(f"bad timestamp {text!r}: {exc}") from None
    if cadence == YEARLY:
        return year
    return month_index(year, 12 if role == "end" else 1)


@dataclass(frozen=True)
class TimeSeries:
    """Uniformly spaced sunspot-number series.

    ``values`` holds NaN wherever ``missing`` is True; all non-missing
    values are finite and >= 0.  ``smoothed`` is only set by
    :func:`smooth_13_month`.
    """

    cadence: str
    start: int
    values: np.ndarray
    missing: np.ndarray
    smoothed: bool = False

    def __post_init__(self):
        if self.cadence not in _CADENCES:
            raise ShapeError(f"unknown cadence {self.cadence!r}")
        values = np.asarray(self.values, dtype=np.float64)
        mask = np.asarray(self.missing, dtype=bool)
        if values.ndim != 1 or mask.shape != values.shape:
            raise ShapeError("values and missing must be 1-d arrays of equal length")
        present = values[~mask]
        if present.size and (not np.all(np.isfinite(present)) or np.any(present < 0)):
            raise IntegrityError("non-missing values must be finite and >= 0")
        values = values.copy()
        values[mask] = np.nan
        values.flags.writeable = False
        mask = mask.copy()
        mask.flags.writeable = False
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "missing", mask)

    def __len__(self) -> int:
        return int(self.values.shape[0])

    @property
    def timestamps(self) -> np.ndarray:
        return self.start + np.arange(len(self), dtype=np.int64)

    @property
    def end(self) -> int:
        return self.start + len(self) - 1

    def labels(self) -> list[str]:
        return [format_timestamp(self.cadence, t) for t in self.timestamps]

    def window(self, start: int | None = None, end: int | None = None) -> "TimeSeries":
        """Inclusive timestamp slice; raises RangeError when empty."""
        lo = self.start if start is None else max(int(start), self.start)
        hi = self.end if end is None else min(int(end), self.end)
        if hi < lo:
            raise RangeError(
                f"window [{format_timestamp(self.cadence, lo)}, "
                f"{format_timestamp(self.cadence, hi)}] is empty"
            )
        i, j = lo - self.start, hi - self.start + 1
        return replace(self, start=lo, values=self.values[i:j], missing=self.missing[i:j])


@dataclass(frozen=True)
class EmbeddedDataset:
    """Lag vectors paired with horizon-shifted targets.

    Row ``i`` holds ``d`` consecutive values ending at some time ``t`` and
    the target is the value at ``t + h``; ``target_times[i]`` is that target
    timestamp.
    """

    inputs: np.ndarray
    targets: np.ndarray
    target_times: np.ndarray
    cadence: str
    d: int
    h: int

    def __post_init__(self):
        inputs = np.asarray(self.inputs, dtype=np.float64)
        targets = np.asarray(self.targets, dtype=np.float64)
        times = np.asarray(self.target_times, dtype=np.int64)
        if inputs.ndim != 2 or inputs.shape[1] != self.d:
            raise ShapeError(f"inputs must be (n, {self.d})")
        if targets.shape != (inputs.shape[0],) or times.shape != targets.shape:
            raise ShapeError("inputs, targets and target_times must align")
        for arr, name in ((inputs, "inputs"), (targets, "targets"), (times, "target_times")):
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    def __len__(self) -> int:
        return int(self.targets.shape[0])

    def take(self, rows: slice) -> "EmbeddedDataset":
        return replace(
            self,
            inputs=self.inputs[rows],
            targets=self.targets[rows],
            target_times=self.target_times[rows],
        )


def _split_fields(line: str) -> list[str]:
    if ";" in line:
        fields = [f.strip() for f in line.split(";")]
    else:
        fields = line.split()
    while fields and fields[-1] == "":
        fields.pop()
    return fields


def _parse_value(raw: str, lineno: int) -> tuple[float, bool]:
    try:
        v = float(raw)
    except ValueError:
        raise ParseError(f"bad value {raw!r}", line=lineno) from None
    if v == -1:
        return np.nan, True
    if not np.isfinite(v) or v < 0:
        raise ParseError(f"value {raw!r} is not a sunspot number (>= 0 or -1)", line=lineno)
    return v, False


def load_silso(source, cadence: str) -> TimeSeries:
    """Read a SILSO-format yearly or monthly file into a :class:`TimeSeries`.

    ``source`` may be a path or an open text/binary stream.  Rows must be
    consecutive in the cadence; any jump or repeat raises
    :class:`IntegrityError` naming the offending line.
    """
    if cadence not in _CADENCES:
        raise ShapeError(f"unknown cadence {cadence!r}")
    if isinstance(source, (str, Path)):
        with open(source, "r", encoding="utf-8") as fh:
            return load_silso(fh, cadence)
    if isinstance(source, (bytes, bytearray)):
        return load_silso(io.StringIO(source.decode("utf-8")), cadence)
    if isinstance(source, io.RawIOBase) or (
        hasattr(source, "read") and isinstance(getattr(source, "mode", ""), str) and "b" in getattr(source, "mode", "")
    ):
        source = io.TextIOWrapper(source, encoding="utf-8")

    timestamps: list[int] = []
    values: list[float] = []
    missing: list[bool] = []
    for lineno, line in enumerate(source, start=1):
        if isinstance(line, bytes):
            line = line.decode("utf-8")
        if not line.strip():
            continue
        fields = _split_fields(line)
        if cadence == YEARLY:
            if len(fields) < 2:
                raise ParseError("yearly rows need at least year and value", line=lineno)
            try:
                year = int(float(fields[0]))
            except ValueError:
                raise ParseError(f"bad year {fields[0]!r}", line=lineno) from None
            t = year
            raw = fields[1]
        else:
            if len(fields) < 4:
                raise ParseError(
                    "monthly rows need year, month, decimal date and value", line=lineno
                )
            try:
                year = int(fields[0])
                month = int(fields[1])
            except ValueError:
                raise ParseError(f"bad year/month {fields[0]!r} {fields[1]!r}", line=lineno) from None
            if not 1 <= month <= 12:
                raise ParseError(f"month {month} out of range", line=lineno)
            t = month_index(year, month)
            raw = fields[3]
        v, m = _parse_value(raw, lineno)
        if timestamps:
            if t <= timestamps[-1]:
                raise IntegrityError(f"line {lineno}: timestamp not increasing")
            if t != timestamps[-1] + 1:
                raise IntegrityError(
                    f"line {lineno}: gap in cadence between "
                    f"{format_timestamp(cadence, timestamps[-1])} and "
                    f"{format_timestamp(cadence, t)}"
                )
        timestamps.append(t)
        values.append(v)
        missing.append(m)
    if not timestamps:
        raise ParseError("no data rows found")
    return TimeSeries(
        cadence=cadence,
        start=timestamps[0],
        values=np.array(values),
        missing=np.array(missing),
    )


def smooth_13_month(ts: TimeSeries, weights: str = "sidc") -> TimeSeries:
    """13-month running mean of a raw monthly series.

    The default ``"sidc"`` weighting is the community-standard filter: half
    weight on the two window endpoints, full weight on the inner eleven
    months, divided by 12.  ``"plain"`` is an unweighted 13-point mean.
    The output loses six months at each end.
    """
    if ts.cadence != MONTHLY:
        raise ShapeError("13-month smoothing applies to monthly series only")
    if ts.smoothed:
        raise ShapeError("series is already smoothed")
    n = len(ts)
    if n < 13:
        raise LengthError(f"need at least 13 months, got {n}")
    if ts.missing.any():
        bad = int(np.flatnonzero(ts.missing)[0])
        t_bad = ts.start + bad
        lo = max(ts.start + 6, t_bad - 6)
        hi = min(ts.end - 6, t_bad + 6)
        raise GapError(
            f"missing value at {format_timestamp(MONTHLY, t_bad)} falls inside the "
            f"smoothing windows centred on {format_timestamp(MONTHLY, lo)}.."
            f"{format_timestamp(MONTHLY, hi)}"
        )
    if weights == "sidc":
        kernel = np.full(13, 1.0 / 12.0)
        kernel[0] = kernel[12] = 0.5 / 12.0
    elif weights == "plain":
        kernel = np.full(13, 1.0 / 13.0)
    else:
        raise ShapeError(f"unknown smoothing weights {weights!r}")
    smoothed = np.convolve(ts.values, kernel[::-1], mode="valid")
    return TimeSeries(
        cadence=MONTHLY,
        start=ts.start + 6,
        values=smoothed,
        missing=np.zeros(n - 12, dtype=bool),
        smoothed=True,
    )


def embed(ts: TimeSeries, d: int, h: int) -> EmbeddedDataset:
    """Time-delay embedding: inputs are ``d`` consecutive values, the target
    sits ``h`` steps after the last lag.  Produces ``len(ts) - d - h + 1`` rows.
    """
    if d < 1 or h < 1:
        raise ShapeError("d and h must be positive")
    n = len(ts)
    if n < d + h:
        raise LengthError(f"series of length {n} cannot embed with d={d}, h={h}")
    if ts.missing.any():
        t_bad = ts.start + int(np.flatnonzero(ts.missing)[0])
        raise GapError(
            f"missing value at {format_timestamp(ts.cadence, t_bad)} inside the embedded range"
        )
    rows = n - d - h + 1
    windows = np.lib.stride_tricks.sliding_window_view(ts.values, d)
    return EmbeddedDataset(
        inputs=windows[:rows].copy(),
        targets=ts.values[d + h - 1 :].copy(),
        target_times=ts.timestamps[d + h - 1 :],
        cadence=ts.cadence,
        d=d,
        h=h,
    )


def split_by_date(ds: EmbeddedDataset, boundary: int) -> tuple[EmbeddedDataset, EmbeddedDataset]:
    """Split on target timestamps: targets <= boundary train, later rows test."""
    if len(ds) == 0:
        raise ShapeError("cannot split an empty dataset")
    first, last = int(ds.target_times[0]), int(ds.target_times[-1])
    if boundary < first or boundary > last:
        raise RangeError(
            f"boundary {format_timestamp(ds.cadence, boundary)} outside target range "
            f"[{format_timestamp(ds.cadence, first)}, {format_timestamp(ds.cadence, last)}]"
        )
    n_train = int(np.searchsorted(ds.target_times, boundary, side="right"))
    return ds.take(slice(0, n_train)), ds.take(slice(n_train, len(ds)))


def split_by_count(ds: EmbeddedDataset, n_train: int) -> tuple[EmbeddedDataset, EmbeddedDataset]:
    """First ``n_train`` rows train, the remainder test."""
    if n_train < 1:
        raise RangeError("n_train must be positive")
    if n_train > len(ds):
        raise RangeError(f"n_train={n_train} exceeds {len(ds)} rows")
    return ds.take(slice(0, n_train)), ds.take(slice(n_train, len(ds)))


def save_timeseries_csv(ts: TimeSeries, path) -> None:
    """Write the internal CSV form: a metadata comment line, then
    ``timestamp,value,missing`` rows.  Floats use repr so a reload is
    bit-exact.
    """
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(f"# cadence={ts.cadence},smoothed={str(ts.smoothed).lower()}\n")
        writer = csv.writer(fh)
        writer.writerow(["timestamp", "value", "missing"])
        for t, v, m in zip(ts.timestamps, ts.values, ts.missing):
            writer.writerow([format_timestamp(ts.cadence, t), "" if m else repr(float(v)), int(m)])


def load_timeseries_csv(path) -> TimeSeries:
    """Reload a file written by :func:`save_timeseries_csv`."""
    with open(path, "r", encoding="utf-8", newline="") as fh:
        first = fh.readline()
        cadence, smoothed = None, False
        if first.startswith("#"):
            for part in first[1:].strip().split(","):
                key, _, val = part.partition("=")
                if key.strip() == "cadence":
                    cadence = val.strip()
                elif key.strip() == "smoothed":
                    smoothed = val.strip() == "true"
            header = fh.readline()
        else:
            header = first
        if header.strip() != "timestamp,value,missing":
            raise ParseError(f"unexpected header {header.strip()!r}")
        timestamps, values, missing = [], [], []
        for lineno, row in enumerate(csv.reader(fh), start=3):
            if not row:
                continue
            if len(row) != 3:
                raise ParseError(f"expected 3 columns, got {len(row)}", line=lineno)
            label, raw, miss = row
            if cadence is None:
                cadence = MONTHLY if "-" in label else YEARLY
            timestamps.append(parse_timestamp(cadence, label))
            m = miss.strip() == "1"
            values.append(np.nan if m else float(raw))
            missing.append(m)
    if not timestamps:
        raise ParseError("no data rows found")
    start = timestamps[0]
    if timestamps != list(range(start, start + len(timestamps))):
        raise IntegrityError("timestamps not consecutive")
    return TimeSeries(
        cadence=cadence,
        start=start,
        values=np.array(values),
        missing=np.array(missing),
        smoothed=smoothed,
    )
