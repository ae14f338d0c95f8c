"""The five socio-economic weighting schemes as layers on a climate grid frame.

Schemes: unweighted (pure area weighting), population (density x cell
area), night-time lights (DN threshold then block mean), cropland (block
mean of km2), and concurrent (decade population counts with a dynamic base
year). Cropland and concurrent layers drop the cell-area term from the
aggregation ratio; the other schemes keep it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import AlignmentError, UnsupportedPeriodError, ValidationError
from .grid import Grid, GridSpec, align_half_offset, area_plane, block_aggregate

SCHEME_KINDS = ("unweighted", "population", "nightlight", "cropland", "concurrent")
BASE_YEARS = (2000, 2005, 2010, 2015)

# Kinds whose layers set the grid-area term to 1 in the aggregation ratio.
_NO_AREA_KINDS = frozenset({"cropland", "concurrent"})

# DN values below this are zeroed before aggregation (noise from auroras,
# boat lights, fires in the harmonized night-light data).
DN_NOISE_FLOOR = 30.0
DN_MAX = 63.0

CONCURRENT_FIRST_YEAR = 1900
CONCURRENT_LAST_YEAR = 2029


@dataclass(frozen=True)
class WeightScheme:
    """A weighting kind plus its base year.

    Fixed-base kinds require a base year from :data:`BASE_YEARS`; the
    unweighted kind takes none; a concurrent scheme carries either no year
    (the queried, dynamic form) or the decade of one instantiated layer.
    """

    kind: str
    base_year: int | None = None

    def __post_init__(self):
        if self.kind not in SCHEME_KINDS:
            raise ValidationError(f"unknown weight scheme {self.kind!r}")
        if self.kind in ("population", "nightlight", "cropland"):
            if self.base_year not in BASE_YEARS:
                raise ValidationError(
                    f"{self.kind} weighting needs a base year in {BASE_YEARS}, "
                    f"got {self.base_year}"
                )
        elif self.kind == "unweighted":
            if self.base_year is not None:
                raise ValidationError("unweighted scheme takes no base year")
        else:  # concurrent
            if self.base_year is not None and (
                self.base_year % 10
                or not CONCURRENT_FIRST_YEAR <= self.base_year <= 2020
            ):
                raise ValidationError(
                    f"concurrent layers are decade-based 1900..2020, got {self.base_year}"
                )


@dataclass(frozen=True)
class WeightLayer:
    """Nonnegative weights on a grid, tagged with their scheme.

    ``use_area`` says whether the aggregation ratio multiplies by the cell
    area; it is False exactly for cropland and concurrent layers.
    """

    scheme: WeightScheme
    grid: Grid
    use_area: bool

    def __post_init__(self):
        expected = self.scheme.kind not in _NO_AREA_KINDS
        if self.use_area != expected:
            raise ValidationError(
                f"use_area must be {expected} for {self.scheme.kind} layers"
            )
        finite = self.grid.values[np.isfinite(self.grid.values)]
        if finite.size and finite.min() < 0:
            raise ValidationError(f"{self.scheme.kind} weights contain negatives")


def resample_to_frame(grid: Grid, target: GridSpec) -> Grid:
    """Bring a raster onto a target frame.

    Handles the supported cases: identical frames, an exact half-cell
    offset, and integer-factor-finer rasters (block mean, then a half-cell
    alignment if one remains). Anything else raises
    :class:`AlignmentError`.
    """
    if grid.spec.same_frame(target):
        return grid
    ratio = target.resolution / grid.spec.resolution
    factor = round(ratio)
    if factor > 1 and abs(ratio - factor) <= 1e-6 * factor:
        grid = block_aggregate(grid, factor)
        if grid.spec.same_frame(target):
            return grid
    return align_half_offset(grid, target)


def unweighted_layer(spec: GridSpec) -> WeightLayer:
    """Constant-1 weights: the aggregation collapses to an area-weighted mean."""
    ones = Grid(spec, np.ones(spec.shape), units="")
    return WeightLayer(WeightScheme("unweighted"), ones, use_area=True)


def population_weight(density: Grid, spec: GridSpec, base_year: int) -> WeightLayer:
    """Population-size weights: density (persons/km2) times relative cell area."""
    if not density.spec.same_frame(spec):
        raise AlignmentError("density raster is not on the requested grid frame")
    finite = density.values[np.isfinite(density.values)]
    if finite.size and finite.min() < 0:
        raise ValidationError("population density contains negative values")
    values = density.values * area_plane(spec)
    layer = Grid(spec, values, units="persons")
    return WeightLayer(WeightScheme("population", base_year), layer, use_area=True)


def nightlight_weight(dn_fine: Grid, target: GridSpec, base_year: int) -> WeightLayer:
    """Night-light weights: zero DN below the noise floor, then block-mean
    aggregate the fine raster onto the target frame."""
    finite = dn_fine.values[np.isfinite(dn_fine.values)]
    if finite.size and (finite.min() < 0 or finite.max() > DN_MAX):
        raise ValidationError(f"DN values outside [0, {DN_MAX:g}]")
    thresholded = np.where(dn_fine.values < DN_NOISE_FLOOR, 0.0, dn_fine.values)
    cleaned = Grid(dn_fine.spec, thresholded, dn_fine.units)
    coarse = resample_to_frame(cleaned, target)
    return WeightLayer(WeightScheme("nightlight", base_year), coarse, use_area=True)


def cropland_weight(cropland_fine: Grid, target: GridSpec, base_year: int) -> WeightLayer:
    """Cropland-area weights: block-mean the fine km2 raster, no thresholding."""
    finite = cropland_fine.values[np.isfinite(cropland_fine.values)]
    if finite.size and finite.min() < 0:
        raise ValidationError("cropland areas contain negative values")
    coarse = resample_to_frame(cropland_fine, target)
    return WeightLayer(WeightScheme("cropland", base_year), coarse, use_area=False)


def concurrent_base_year(t: int) -> int:
    """Base year for the concurrent scheme: the start of t's decade."""
    if t < CONCURRENT_FIRST_YEAR or t > CONCURRENT_LAST_YEAR:
        raise UnsupportedPeriodError(
            f"concurrent weighting covers {CONCURRENT_FIRST_YEAR}..{CONCURRENT_LAST_YEAR}, got {t}"
        )
    return 10 * (t // 10)


def concurrent_layer_source(base_year: int) -> str:
    """Which archive provides the population counts for a decade layer."""
    return "gpw" if base_year >= 2020 else "hyde"


def concurrent_weight(count: Grid, target: GridSpec, base_year: int) -> WeightLayer:
    """Decade layer of the concurrent scheme from a population-count raster."""
    finite = count.values[np.isfinite(count.values)]
    if finite.size and finite.min() < 0:
        raise ValidationError("population counts contain negative values")
    on_frame = resample_to_frame(count, target)
    return WeightLayer(WeightScheme("concurrent", base_year), on_frame, use_area=False)
