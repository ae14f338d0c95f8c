"""Spatial aggregation of gridded values onto administrative units.

The unit value is a ratio of sums over the cells intersecting the unit:
weight mass times climate value over total weight mass, where each cell's
mass is area x coverage fraction x socio-economic weight (area dropped for
cropland and concurrent layers). Cells with a missing climate value or a
missing weight leave both sums; a unit with no contributing cell, or zero
total mass, is emitted as NA rather than imputed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .boundaries import LEVELS, CoverageMatrix
from .errors import AlignmentError, ConfigurationError, ValidationError
from .grid import GridSpec, area_plane
from .temporal import TimeAxis, VariableKind
from .weights import WeightLayer, WeightScheme, concurrent_base_year


@dataclass(frozen=True)
class SourceInfo:
    """One row of the source/variable matrix."""

    name: str
    variables: frozenset[str]
    frequency: str
    resolution: float
    years: tuple[int, int]
    reanalysis: bool = False


SOURCES: dict[str, SourceInfo] = {
    "cru_ts": SourceInfo(
        "cru_ts", frozenset({"temperature_avg", "precipitation"}), "monthly", 0.5, (1901, 2022)
    ),
    "csic": SourceInfo("csic", frozenset({"spei"}), "monthly", 0.5, (1901, 2020)),
    "era5": SourceInfo(
        "era5",
        frozenset(
            {
                "temperature_avg",
                "temperature_min",
                "temperature_max",
                "precipitation",
                "wind_gust",
            }
        ),
        "daily",
        0.25,
        (1940, 2023),
        reanalysis=True,
    ),
    "udel": SourceInfo(
        "udel", frozenset({"temperature_avg", "precipitation"}), "monthly", 0.5, (1900, 2017)
    ),
    "synthetic": SourceInfo(
        "synthetic",
        frozenset(
            {
                "temperature_avg",
                "temperature_min",
                "temperature_max",
                "precipitation",
                "wind_gust",
                "spei",
            }
        ),
        "daily",
        0.5,
        (1, 9999),
    ),
}


@dataclass(frozen=True)
class ClimateField:
    """Time-stacked value planes for one variable on one grid."""

    variable: VariableKind
    grid: GridSpec
    time: TimeAxis
    planes: np.ndarray
    source: str = "synthetic"

    def __post_init__(self):
        planes = np.asarray(self.planes, dtype=np.float64)
        expected = (len(self.time),) + self.grid.shape
        if planes.shape != expected:
            raise ValidationError(
                f"planes shape {planes.shape} does not match (time, rows, cols) {expected}"
            )
        object.__setattr__(self, "planes", planes)
        if self.source not in SOURCES:
            raise ValidationError(f"unknown source {self.source!r}")
        if self.variable.name not in SOURCES[self.source].variables:
            raise ValidationError(
                f"{self.source} does not provide {self.variable.name}"
            )


@dataclass(frozen=True)
class UnitTable:
    """Per-unit, per-period values with explicit NA (NaN)."""

    level: str
    time: TimeAxis
    variable: VariableKind
    scheme: WeightScheme
    values: dict[str, np.ndarray] = field(default_factory=dict)

    def __post_init__(self):
        if self.level not in LEVELS:
            raise ValidationError(f"level must be one of {LEVELS}, got {self.level!r}")
        values = {}
        for unit_id, row in self.values.items():
            row = np.asarray(row, dtype=np.float64)
            if row.shape != (len(self.time),):
                raise ValidationError(
                    f"unit {unit_id!r} has {row.shape[0] if row.ndim else 0} values "
                    f"for {len(self.time)} periods"
                )
            values[unit_id] = row
        object.__setattr__(self, "values", values)

    def units(self) -> list[str]:
        return sorted(self.values)

    def equals(self, other: "UnitTable", rtol: float = 0.0) -> bool:
        """Value equality including NA positions; metadata must match."""
        if (
            self.level != other.level
            or self.time != other.time
            or self.variable != other.variable
            or self.scheme != other.scheme
            or set(self.values) != set(other.values)
        ):
            return False
        for unit_id, row in self.values.items():
            o = other.values[unit_id]
            if not np.array_equal(np.isnan(row), np.isnan(o)):
                return False
            a, b = row[~np.isnan(row)], o[~np.isnan(o)]
            if rtol == 0.0:
                if not np.array_equal(a, b):
                    return False
            elif not np.allclose(a, b, rtol=rtol, atol=0.0):
                return False
        return True


def _check_frames(grid: GridSpec, coverage: CoverageMatrix, weights: WeightLayer):
    if not coverage.grid.same_frame(grid):
        raise AlignmentError("coverage matrix is not on the value plane's grid frame")
    if not weights.grid.spec.same_frame(grid):
        raise AlignmentError("weight layer is not on the value plane's grid frame")


def weighted_aggregate(
    plane: np.ndarray, coverage: CoverageMatrix, weights: WeightLayer
) -> dict[str, float]:
    """One time step of the weighted aggregation, per unit.

    Returns unit_id -> value, with NaN where the unit has no contributing
    cell or zero total weight mass. Contributions are summed in cell-index
    order so the stored order of coverage entries cannot change results.
    """
    plane = np.asarray(plane, dtype=np.float64)
    if plane.shape != coverage.grid.shape:
        raise AlignmentError(
            f"plane shape {plane.shape} does not match coverage grid {coverage.grid.shape}"
        )
    _check_frames(coverage.grid, coverage, weights)
    x = plane.ravel()
    w = weights.grid.values.ravel()
    area = area_plane(coverage.grid).ravel() if weights.use_area else None
    out: dict[str, float] = {}
    for unit_id in coverage.units():
        idx, frac = coverage.unit_arrays(unit_id)
        order = np.argsort(idx, kind="stable")
        idx, frac = idx[order], frac[order]
        xs, ws = x[idx], w[idx]
        mass = frac * ws
        if area is not None:
            mass = mass * area[idx]
        ok = np.isfinite(xs) & np.isfinite(ws)
        contributing = ok & (mass > 0)
        n_contrib = int(np.count_nonzero(contributing))
        if n_contrib == 0:
            out[unit_id] = float("nan")
            continue
        if n_contrib == 1:
            # Ratio collapses; skip the division so the cell value survives
            # bitwise.
            out[unit_id] = float(xs[contributing][0])
            continue
        numerator = float(np.sum(mass[ok] * xs[ok]))
        denominator = float(np.sum(mass[ok]))
        out[unit_id] = numerator / denominator if denominator > 0.0 else float("nan")
    return out


def aggregate_series(
    field: ClimateField,
    coverage: CoverageMatrix,
    weights: WeightLayer | Mapping[int, WeightLayer],
) -> UnitTable:
    """Aggregate every time step of a field onto the coverage units.

    ``weights`` is a single layer for fixed-base schemes, or a mapping of
    decade -> layer for the concurrent scheme, in which case the layer is
    swapped per step according to the decade of the step's year.
    """
    if isinstance(weights, Mapping):
        for layer in weights.values():
            if layer.scheme.kind != "concurrent":
                raise ValidationError(
                    "per-decade weight mappings are only for the concurrent scheme"
                )
        scheme = WeightScheme("concurrent")

        def layer_for(label: str) -> WeightLayer:
            base = concurrent_base_year(int(label[:4]))
            try:
                return weights[base]
            except KeyError:
                raise ConfigurationError(
                    f"no concurrent weight layer for decade {base}"
                ) from None

    else:
        scheme = weights.scheme

        def layer_for(label: str) -> WeightLayer:
            return weights

    rows: dict[str, list[float]] = {u: [] for u in coverage.units()}
    for t, label in enumerate(field.time.labels):
        step = weighted_aggregate(field.planes[t], coverage, layer_for(label))
        for unit_id, value in step.items():
            rows[unit_id].append(value)
    return UnitTable(
        level=coverage.level,
        time=field.time,
        variable=field.variable,
        scheme=scheme,
        values={u: np.asarray(v) for u, v in rows.items()},
    )
