"""Time-axis model and temporal aggregation (hourly->daily->monthly->annual).

Period labels are ISO-ordered strings so lexicographic order equals
chronological order at a fixed frequency:

- hourly   ``YYYY-MM-DDTHH``
- daily    ``YYYY-MM-DD``
- monthly  ``YYYY-MM``
- annual   ``YYYY``

The proleptic Gregorian calendar is used throughout; days are UTC-bounded.
Missing-value policy: the hourly->daily step reduces over the non-missing
hours of a day (a fully missing day stays missing), while monthly and annual
reductions are strict: any missing constituent makes the period missing.
"""

from __future__ import annotations

import calendar
import dataclasses
from dataclasses import dataclass
from datetime import date, datetime, timedelta

import numpy as np

from .errors import (
    CoverageError,
    FrequencyError,
    UnsupportedAggregationError,
    ValidationError,
)

FREQUENCIES = ("hourly", "daily", "monthly", "annual")


@dataclass(frozen=True)
class VariableKind:
    """Reduction semantics of one climate variable.

    ``daily_reduce`` applies to the hourly->daily step and again to the
    daily->monthly step; ``annual_reduce`` applies to the annual step
    ("forbidden" marks variables that must stay monthly).
    """

    name: str
    units: str
    daily_reduce: str
    annual_reduce: str


VARIABLES: dict[str, VariableKind] = {
    "temperature_avg": VariableKind("temperature_avg", "degC", "mean", "mean"),
    "temperature_min": VariableKind("temperature_min", "degC", "min", "mean"),
    "temperature_max": VariableKind("temperature_max", "degC", "max", "mean"),
    "precipitation": VariableKind("precipitation", "mm", "sum", "sum"),
    "wind_gust": VariableKind("wind_gust", "m/s", "max", "mean"),
    "spei": VariableKind("spei", "", "mean", "forbidden"),
}


def variable_kind(name: str) -> VariableKind:
    try:
        return VARIABLES[name]
    except KeyError:
        raise ValidationError(
            f"unknown variable {name!r}; expected one of {sorted(VARIABLES)}"
        ) from None


def parse_label(label: str, frequency: str) -> datetime:
    """Timestamp of the start of a period label."""
    try:
        if frequency == "annual":
            return datetime(int(label), 1, 1)
        if frequency == "monthly":
            return datetime.strptime(label, "%Y-%m")
        if frequency == "daily":
            d = date.fromisoformat(label)
            return datetime(d.year, d.month, d.day)
        if frequency == "hourly":
            return datetime.strptime(label, "%Y-%m-%dT%H")
    except ValueError as exc:
        raise ValidationError(f"bad {frequency} label {label!r}: {exc}") from None
    raise FrequencyError(f"unknown frequency {frequency!r}")


def format_label(ts: datetime, frequency: str) -> str:
    if frequency == "annual":
        return f"{ts.year:04d}"
    if frequency == "monthly":
        return f"{ts.year:04d}-{ts.month:02d}"
    if frequency == "daily":
        return f"{ts.year:04d}-{ts.month:02d}-{ts.day:02d}"
    if frequency == "hourly":
        return f"{ts.year:04d}-{ts.month:02d}-{ts.day:02d}T{ts.hour:02d}"
    raise FrequencyError(f"unknown frequency {frequency!r}")


def next_label(label: str, frequency: str) -> str:
    ts = parse_label(label, frequency)
    if frequency == "hourly":
        return format_label(ts + timedelta(hours=1), frequency)
    if frequency == "daily":
        return format_label(ts + timedelta(days=1), frequency)
    if frequency == "monthly":
        year, month = ts.year + ts.month // 12, ts.month % 12 + 1
        return f"{year:04d}-{month:02d}"
    return f"{ts.year + 1:04d}"


@dataclass(frozen=True)
class TimeAxis:
    """Ordered, contiguous period labels at one frequency."""

    frequency: str
    labels: tuple[str, ...]

    def __post_init__(self):
        if self.frequency not in FREQUENCIES:
            raise FrequencyError(f"unknown frequency {self.frequency!r}")
        if not self.labels:
            raise ValidationError("time axis must have at least one label")
        object.__setattr__(self, "labels", tuple(self.labels))
        expected = self.labels[0]
        for label in self.labels:
            if label != expected:
                raise ValidationError(
                    f"time axis not contiguous at {self.frequency} frequency: "
                    f"expected {expected!r}, found {label!r}"
                )
            expected = next_label(label, self.frequency)

    @classmethod
    def range(cls, frequency: str, start: str, periods: int) -> "TimeAxis":
        labels = [start]
        for _ in range(periods - 1):
            labels.append(next_label(labels[-1], frequency))
        return cls(frequency, tuple(labels))

    def __len__(self) -> int:
        return len(self.labels)

    @property
    def start(self) -> datetime:
        return parse_label(self.labels[0], self.frequency)

    def index_of(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise ValidationError(f"label {label!r} not on time axis") from None

    def years(self) -> tuple[int, int]:
        """(first, last) calendar year touched by the axis."""
        return int(self.labels[0][:4]), int(self.labels[-1][:4])

    def year_slice(self, year_from: int, year_to: int) -> slice:
        """Index slice of labels whose year lies in [year_from, year_to]."""
        idx = [
            i for i, lbl in enumerate(self.labels) if year_from <= int(lbl[:4]) <= year_to
        ]
        if not idx:
            raise ValidationError(
                f"years [{year_from}, {year_to}] not covered by axis "
                f"{self.labels[0]}..{self.labels[-1]}"
            )
        return slice(idx[0], idx[-1] + 1)


def _group_key(label: str, source_freq: str, target_freq: str) -> str:
    if target_freq == "daily":
        return label[:10]
    if target_freq == "monthly":
        return label[:7]
    if target_freq == "annual":
        return label[:4]
    raise FrequencyError(f"cannot group to {target_freq!r}")


def _expected_count(group_label: str, source_freq: str, target_freq: str) -> int:
    if source_freq == "hourly" and target_freq == "daily":
        return 24
    if source_freq == "daily" and target_freq == "monthly":
        year, month = int(group_label[:4]), int(group_label[5:7])
        return calendar.monthrange(year, month)[1]
    if source_freq == "daily" and target_freq == "annual":
        return 366 if calendar.isleap(int(group_label)) else 365
    if source_freq == "monthly" and target_freq == "annual":
        return 12
    raise FrequencyError(f"cannot aggregate {source_freq} to {target_freq}")


def calendar_groups(
    axis: TimeAxis, target_freq: str, require_complete: bool
) -> list[tuple[str, slice]]:
    """Contiguous slices of the axis per calendar period at ``target_freq``.

    With ``require_complete`` every group must hold the full calendar count
    of source periods (leap-aware), otherwise a :class:`CoverageError` names
    the offending period.
    """
    groups: list[tuple[str, slice]] = []
    start = 0
    labels = axis.labels
    current = _group_key(labels[0], axis.frequency, target_freq)
    for i in range(1, len(labels) + 1):
        key = _group_key(labels[i], axis.frequency, target_freq) if i < len(labels) else None
        if key != current:
            groups.append((current, slice(start, i)))
            start, current = i, key
    if require_complete:
        for label, sl in groups:
            expected = _expected_count(label, axis.frequency, target_freq)
            got = sl.stop - sl.start
            if got != expected:
                raise CoverageError(
                    f"period {label} has {got} of {expected} {axis.frequency} steps"
                )
    return groups


_LENIENT_FILL = {"sum": 0.0, "mean": 0.0, "min": np.inf, "max": -np.inf}


def _reduce_block(block: np.ndarray, how: str, strict: bool) -> np.ndarray:
    """Reduce axis 0 of a (k, ...) block. Strict mode lets NaN poison the
    result; lenient mode reduces over finite entries only."""
    if strict:
        if how == "sum":
            return block.sum(axis=0)
        if how == "mean":
            return block.mean(axis=0)
        if how == "min":
            return block.min(axis=0)
        return block.max(axis=0)
    finite = np.isfinite(block)
    count = finite.sum(axis=0)
    filled = np.where(finite, block, _LENIENT_FILL[how])
    if how == "sum":
        out = filled.sum(axis=0)
    elif how == "mean":
        with np.errstate(invalid="ignore"):
            out = filled.sum(axis=0) / np.maximum(count, 1)
    elif how == "min":
        out = filled.min(axis=0)
    else:
        out = filled.max(axis=0)
    return np.where(count > 0, out, np.nan)


def _reduce_axis(
    stacked: np.ndarray,
    axis: TimeAxis,
    target_freq: str,
    how: str,
    strict: bool,
) -> tuple[TimeAxis, np.ndarray]:
    groups = calendar_groups(axis, target_freq, require_complete=True)
    out = np.empty((len(groups),) + stacked.shape[1:], dtype=np.float64)
    for k, (_, sl) in enumerate(groups):
        out[k] = _reduce_block(stacked[sl], how, strict)
    new_axis = TimeAxis(target_freq, tuple(label for label, _ in groups))
    return new_axis, out


def _stack(obj) -> np.ndarray:
    """Time-major array view of a ClimateField or UnitTable."""
    if hasattr(obj, "planes"):
        return obj.planes
    return np.stack([obj.values[u] for u in sorted(obj.values)], axis=1)


def _rebuild(obj, new_axis: TimeAxis, stacked: np.ndarray):
    if hasattr(obj, "planes"):
        return dataclasses.replace(obj, time=new_axis, planes=stacked)
    units = sorted(obj.values)
    values = {u: stacked[:, k].copy() for k, u in enumerate(units)}
    return dataclasses.replace(obj, time=new_axis, values=values)


def hourly_to_daily(series, kind: VariableKind):
    """Reduce 24 UTC hours to one daily value per cell or unit.

    Applies ``kind.daily_reduce`` over the non-missing hours of each day; a
    fully missing day stays missing.
    """
    if series.time.frequency != "hourly":
        raise FrequencyError(
            f"hourly_to_daily needs an hourly series, got {series.time.frequency}"
        )
    new_axis, out = _reduce_axis(
        _stack(series), series.time, "daily", kind.daily_reduce, strict=False
    )
    return _rebuild(series, new_axis, out)


def daily_to_monthly(series, kind: VariableKind):
    """Reduce full calendar months of daily values (strict missing policy)."""
    if series.time.frequency != "daily":
        raise FrequencyError(
            f"daily_to_monthly needs a daily series, got {series.time.frequency}"
        )
    new_axis, out = _reduce_axis(
        _stack(series), series.time, "monthly", kind.daily_reduce, strict=True
    )
    return _rebuild(series, new_axis, out)


def to_annual(series, kind: VariableKind):
    """Aggregate daily or monthly values to calendar years.

    Precipitation sums; temperature-like kinds take the arithmetic mean over
    the 12 monthly values or over all calendar days. Years with any missing
    constituent are emitted missing.
    """
    if kind.annual_reduce == "forbidden":
        raise UnsupportedAggregationError(
            f"{kind.name} is available only monthly and cannot be aggregated to annual"
        )
    if series.time.frequency not in ("daily", "monthly"):
        raise FrequencyError(
            f"to_annual needs a daily or monthly series, got {series.time.frequency}"
        )
    new_axis, out = _reduce_axis(
        _stack(series), series.time, "annual", kind.annual_reduce, strict=True
    )
    return _rebuild(series, new_axis, out)
