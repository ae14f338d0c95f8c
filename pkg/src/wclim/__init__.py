"""wclim: socio-economically weighted aggregation of gridded climate data."""

from .aggregate import ClimateField, SourceInfo, SOURCES, UnitTable, aggregate_series, weighted_aggregate
from .boundaries import AdminUnit, CoverageMatrix, build_coverage, polygon_cell_fraction
from .extremes import ThresholdSpec, apply_threshold, cumulative_exceedance, exceedance_count, relative_threshold
from .grid import Grid, GridSpec, align_half_offset, block_aggregate, cell_area
from .temporal import TimeAxis, VariableKind, VARIABLES, daily_to_monthly, hourly_to_daily, to_annual, variable_kind
from .weights import (
    WeightLayer,
    WeightScheme,
    concurrent_base_year,
    concurrent_weight,
    cropland_weight,
    nightlight_weight,
    population_weight,
    unweighted_layer,
)

__version__ = "0.1.0"

__all__ = [
    "AdminUnit",
    "ClimateField",
    "CoverageMatrix",
    "Grid",
    "GridSpec",
    "SOURCES",
    "SourceInfo",
    "ThresholdSpec",
    "TimeAxis",
    "UnitTable",
    "VARIABLES",
    "VariableKind",
    "WeightLayer",
    "WeightScheme",
    "aggregate_series",
    "align_half_offset",
    "apply_threshold",
    "block_aggregate",
    "build_coverage",
    "cell_area",
    "concurrent_base_year",
    "concurrent_weight",
    "cropland_weight",
    "cumulative_exceedance",
    "daily_to_monthly",
    "exceedance_count",
    "hourly_to_daily",
    "nightlight_weight",
    "polygon_cell_fraction",
    "population_weight",
    "relative_threshold",
    "to_annual",
    "unweighted_layer",
    "variable_kind",
    "weighted_aggregate",
]
