"""Threshold statistics over unit-level daily series.

Thresholding happens after spatial aggregation: the inputs here are the
weighted daily unit series. Three modes: absolute (count days beyond a
fixed value), relative (count days beyond a percentile of the unit's own
historical distribution), cumulative (sum the residuals beyond a fixed
value). Exceedance is strict, and periods are calendar months or years.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass

import numpy as np

from .errors import FrequencyError, ValidationError
from .temporal import TimeAxis, calendar_groups

MODES = ("absolute", "relative", "cumulative")
DIRECTIONS = ("above", "below")
PERIODS = ("monthly", "annual")


@dataclass(frozen=True)
class ThresholdSpec:
    """How to threshold a daily series.

    ``value`` is the threshold in variable units for absolute and
    cumulative modes, or the percentile (0, 100) for relative mode.
    ``baseline`` restricts the historical distribution for relative
    thresholds to an inclusive year range; None means the full record.
    """

    mode: str
    direction: str
    value: float
    baseline: tuple[int, int] | None = None
    period: str = "annual"

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValidationError(f"threshold mode must be one of {MODES}")
        if self.direction not in DIRECTIONS:
            raise ValidationError(f"threshold direction must be one of {DIRECTIONS}")
        if self.period not in PERIODS:
            raise ValidationError(f"threshold period must be one of {PERIODS}")
        if self.mode == "relative" and not 0.0 < self.value < 100.0:
            raise ValidationError(
                f"relative threshold needs a percentile in (0, 100), got {self.value}"
            )
        if self.baseline is not None and self.baseline[0] > self.baseline[1]:
            raise ValidationError(f"empty baseline year range {self.baseline}")


def relative_threshold(history: np.ndarray, p: float) -> float:
    """Percentile of the non-NA history by linear interpolation between
    closest ranks. An all-NA history yields an NA threshold."""
    if not 0.0 < p < 100.0:
        raise ValidationError(f"percentile must lie in (0, 100), got {p}")
    values = np.asarray(history, dtype=np.float64)
    values = np.sort(values[np.isfinite(values)])
    n = len(values)
    if n == 0:
        return float("nan")
    h = (n - 1) * p / 100.0
    lo = math.floor(h)
    if lo + 1 >= n:
        return float(values[-1])
    return float(values[lo] + (h - lo) * (values[lo + 1] - values[lo]))


def _require_daily(axis: TimeAxis):
    if axis.frequency != "daily":
        raise FrequencyError(
            f"threshold statistics need a daily series, got {axis.frequency}"
        )


def _exceeds(values: np.ndarray, theta: float, direction: str) -> np.ndarray:
    return values > theta if direction == "above" else values < theta


def exceedance_count(
    values: np.ndarray, axis: TimeAxis, theta: float, direction: str, period: str
) -> tuple[TimeAxis, np.ndarray]:
    """Days strictly beyond the threshold per calendar period.

    A period whose days are all NA is NA; an NA threshold makes every
    period NA. Partial periods at the series edges count the days present.
    """
    _require_daily(axis)
    if period not in PERIODS:
        raise ValidationError(f"period must be one of {PERIODS}")
    values = np.asarray(values, dtype=np.float64)
    groups = calendar_groups(axis, period, require_complete=False)
    out = np.full(len(groups), np.nan)
    if math.isfinite(theta):
        for k, (_, sl) in enumerate(groups):
            chunk = values[sl]
            finite = np.isfinite(chunk)
            if finite.any():
                out[k] = float(np.count_nonzero(_exceeds(chunk[finite], theta, direction)))
    new_axis = TimeAxis(period, tuple(label for label, _ in groups))
    return new_axis, out


def cumulative_exceedance(
    values: np.ndarray, axis: TimeAxis, theta: float, direction: str, period: str
) -> tuple[TimeAxis, np.ndarray]:
    """Sum of residuals beyond the threshold per calendar period."""
    _require_daily(axis)
    if period not in PERIODS:
        raise ValidationError(f"period must be one of {PERIODS}")
    values = np.asarray(values, dtype=np.float64)
    groups = calendar_groups(axis, period, require_complete=False)
    out = np.full(len(groups), np.nan)
    if math.isfinite(theta):
        for k, (_, sl) in enumerate(groups):
            chunk = values[sl]
            finite = np.isfinite(chunk)
            if finite.any():
                residual = chunk[finite] - theta if direction == "above" else theta - chunk[finite]
                out[k] = float(np.sum(np.maximum(residual, 0.0)))
    new_axis = TimeAxis(period, tuple(label for label, _ in groups))
    return new_axis, out


def unit_thresholds(table, spec: ThresholdSpec) -> dict[str, float]:
    """Per-unit threshold values for a daily UnitTable.

    Absolute and cumulative modes use the fixed value; relative mode takes
    the percentile of each unit's own history, restricted to the baseline
    years when given.
    """
    _require_daily(table.time)
    if spec.mode != "relative":
        return {u: spec.value for u in table.values}
    sl = slice(None)
    if spec.baseline is not None:
        sl = table.time.year_slice(*spec.baseline)
    return {u: relative_threshold(row[sl], spec.value) for u, row in table.values.items()}


def apply_threshold(table, spec: ThresholdSpec):
    """Threshold statistics for every unit of a daily UnitTable.

    Returns a UnitTable at the spec's period frequency holding exceedance
    counts (absolute/relative) or residual sums (cumulative).
    """
    thresholds = unit_thresholds(table, spec)
    stat = cumulative_exceedance if spec.mode == "cumulative" else exceedance_count
    groups = calendar_groups(table.time, spec.period, require_complete=False)
    new_axis = TimeAxis(spec.period, tuple(label for label, _ in groups))
    values: dict[str, np.ndarray] = {}
    for unit_id, row in table.values.items():
        _, out = stat(row, table.time, thresholds[unit_id], spec.direction, spec.period)
        values[unit_id] = out
    return dataclasses.replace(table, time=new_axis, values=values)
