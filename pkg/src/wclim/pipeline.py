"""Query model and end-to-end pipeline over a data directory.

The data directory holds:

- climate files ``*.nc`` carrying ``source``/``variable`` global attributes
  (fallback: ``<source>__<variable>.nc`` filenames);
- weight rasters ``weight__<kind>__<year>.nc`` (population density, fine DN,
  fine cropland km2, or decade population counts, each on its native grid);
- boundaries ``gadm0.geojson`` / ``gadm1.geojson``;
- a ``cache/`` subdirectory for coverage sidecars (created on demand).

A query runs coverage -> weights -> spatial aggregation -> temporal
aggregation or threshold statistics. When a climate grid sits half a cell
off the weight rasters' frame (the 721-row reanalysis case), the climate
planes are resampled onto the weight frame, which stays canonical.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import os
import re
import threading
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import io as wio
from .aggregate import SOURCES, ClimateField, UnitTable, aggregate_series
from .boundaries import LEVELS, CoverageMatrix, build_coverage
from .errors import AlignmentError, QueryError, WclimError
from .extremes import MODES, PERIODS, ThresholdSpec, apply_threshold
from .grid import Grid, GridSpec, align_half_offset, block_spec
from .temporal import (
    VARIABLES,
    TimeAxis,
    daily_to_monthly,
    hourly_to_daily,
    to_annual,
)
from .weights import (
    BASE_YEARS,
    SCHEME_KINDS,
    WeightLayer,
    concurrent_base_year,
    concurrent_weight,
    cropland_weight,
    nightlight_weight,
    population_weight,
    resample_to_frame,
    unweighted_layer,
)

_WEIGHT_FILE_RE = re.compile(r"^weight__([a-z]+)__(\d{4})(?:__[\w.]+)?\.nc$")
_CLIMATE_FILE_RE = re.compile(r"^(\w+)__(\w+)\.nc$")

FREQUENCIES_OUT = ("daily", "monthly", "annual")


@dataclass(frozen=True)
class Query:
    """A validated aggregation request."""

    source: str
    variable: str
    level: str
    weight_kind: str
    base_year: int | None
    frequency: str
    year_from: int
    year_to: int
    threshold: ThresholdSpec | None = None

    def canonical(self) -> dict:
        doc = {
            "source": self.source,
            "variable": self.variable,
            "level": self.level,
            "weight_kind": self.weight_kind,
            "base_year": self.base_year,
            "frequency": self.frequency,
            "year_from": self.year_from,
            "year_to": self.year_to,
            "threshold": None,
        }
        if self.threshold is not None:
            doc["threshold"] = {
                "mode": self.threshold.mode,
                "direction": self.threshold.direction,
                "value": self.threshold.value,
                "baseline": list(self.threshold.baseline)
                if self.threshold.baseline
                else None,
                "period": self.threshold.period,
            }
        return doc


def normalize_query(raw: dict) -> Query:
    """Build a Query from loosely typed input (CLI flags, JSON body).

    Strings are lower-cased and stripped so equivalent requests canonicalize
    to the same query; structural problems raise :class:`QueryError` with a
    stable code.
    """

    def norm(value):
        return value.strip().lower() if isinstance(value, str) else value

    def require(key):
        value = norm(raw.get(key))
        if value in (None, ""):
            raise QueryError("missing_field", f"query field {key!r} is required")
        return value

    def integer(key, value):
        try:
            return int(value)
        except (TypeError, ValueError):
            raise QueryError("bad_field", f"query field {key!r} must be an integer") from None

    threshold = None
    traw = raw.get("threshold")
    if traw:
        mode = norm(traw.get("mode"))
        if mode not in MODES:
            raise QueryError("unknown_threshold_mode", f"threshold mode must be one of {MODES}")
        direction = norm(traw.get("direction", "above"))
        period = norm(traw.get("period", "annual"))
        if period not in PERIODS:
            raise QueryError("unknown_threshold_period", f"threshold period must be one of {PERIODS}")
        value = traw.get("value")
        if value is None:
            raise QueryError("missing_field", "threshold value is required")
        baseline = None
        if traw.get("baseline_from") is not None or traw.get("baseline_to") is not None:
            baseline = (
                integer("baseline_from", traw.get("baseline_from")),
                integer("baseline_to", traw.get("baseline_to")),
            )
        try:
            threshold = ThresholdSpec(
                mode=mode,
                direction=direction,
                value=float(value),
                baseline=baseline,
                period=period,
            )
        except WclimError as exc:
            raise QueryError("bad_threshold", str(exc)) from exc

    base_year = raw.get("base_year")
    return Query(
        source=require("source"),
        variable=require("variable"),
        level=require("level"),
        weight_kind=norm(raw.get("weight_kind") or raw.get("weight") or "unweighted"),
        base_year=None if base_year in (None, "") else integer("base_year", base_year),
        frequency=require("frequency"),
        year_from=integer("year_from", raw.get("year_from") or raw.get("from")),
        year_to=integer("year_to", raw.get("year_to") or raw.get("to")),
        threshold=threshold,
    )


class DataRepository:
    """Scans and lazily loads the contents of one data directory."""

    def __init__(self, data_dir: str | os.PathLike):
        self.data_dir = Path(data_dir)
        self.climate_paths: dict[tuple[str, str], Path] = {}
        self.weight_paths: dict[tuple[str, int], list[Path]] = {}
        self.boundary_paths: dict[str, Path] = {}
        self.scan_error: str | None = None
        self._fields: dict[tuple[str, str], ClimateField] = {}
        self._units: dict[str, list] = {}
        self._rasters: dict[Path, Grid] = {}
        self._coverage: dict[tuple[str, GridSpec], CoverageMatrix] = {}
        self._fingerprints: dict[str, tuple[tuple[float, int], str]] = {}
        # single-writer initialization: lazy loads may race across requests
        self._load_lock = threading.RLock()
        try:
            self._scan()
        except Exception as exc:
            self.scan_error = str(exc)

    def _scan(self):
        if not self.data_dir.is_dir():
            raise FileNotFoundError(f"data directory {self.data_dir} does not exist")
        for path in sorted(self.data_dir.glob("*.nc")):
            m = _WEIGHT_FILE_RE.match(path.name)
            if m:
                kind, year = m.group(1), int(m.group(2))
                if kind not in SCHEME_KINDS:
                    raise WclimError(f"{path.name}: unknown weight kind {kind!r}")
                self.weight_paths.setdefault((kind, year), []).append(path)
                continue
            source, variable = self._identify_climate(path)
            self.climate_paths[(source, variable)] = path
        for level in LEVELS:
            candidate = self.data_dir / f"{level}.geojson"
            if candidate.exists():
                self.boundary_paths[level] = candidate

    @staticmethod
    def _identify_climate(path: Path) -> tuple[str, str]:
        from scipy.io import netcdf_file

        with netcdf_file(str(path), "r", mmap=False) as nc:
            source = getattr(nc, "source", None)
            variable = getattr(nc, "variable", None)
        if isinstance(source, bytes):
            source = source.decode()
        if isinstance(variable, bytes):
            variable = variable.decode()
        if source and variable:
            return str(source), str(variable)
        m = _CLIMATE_FILE_RE.match(path.name)
        if m and m.group(1) in SOURCES:
            return m.group(1), m.group(2)
        raise WclimError(f"{path.name}: cannot identify climate source/variable")

    # -- loading ---------------------------------------------------------

    def field(self, source: str, variable: str) -> ClimateField:
        key = (source, variable)
        with self._load_lock:
            if key in self._fields:
                return self._fields[key]
            path = self.climate_paths.get(key)
            if path is None:
                raise QueryError(
                    "variable_not_available",
                    f"no data for source {source!r}, variable {variable!r}",
                    status=400,
                )
            field = wio.read_climate(str(path), variable, source)
            if field.time.frequency == "hourly":
                field = hourly_to_daily(field, field.variable)
            self._fields[key] = field
            return field

    def units(self, level: str):
        with self._load_lock:
            if level not in self._units:
                path = self.boundary_paths.get(level)
                if path is None:
                    raise QueryError(
                        "level_not_available", f"no boundaries for level {level!r}", status=400
                    )
                self._units[level] = wio.read_boundaries(str(path), level)
            return self._units[level]

    def weight_raster(self, kind: str, year: int, target_resolution: float) -> Grid:
        """Raster for one scheme and year that can land on the target
        resolution (equal, or finer by an integer factor)."""
        paths = self.weight_paths.get((kind, year), [])
        if not paths:
            raise QueryError(
                "missing_weight_layer",
                f"no {kind} weight raster for base year {year}",
                status=400,
            )
        best = None
        for path in paths:
            with self._load_lock:
                if path not in self._rasters:
                    self._rasters[path] = wio.read_raster(str(path))
                raster = self._rasters[path]
            ratio = target_resolution / raster.spec.resolution
            if abs(ratio - 1.0) <= 1e-6:
                return raster
            if ratio > 1 and abs(ratio - round(ratio)) <= 1e-6 * ratio and best is None:
                best = raster
        if best is None:
            raise QueryError(
                "missing_weight_layer",
                f"no {kind} raster for base year {year} matches resolution {target_resolution}",
            )
        return best

    def coverage(self, level: str, spec: GridSpec) -> CoverageMatrix:
        key = (level, spec)
        with self._load_lock:
            if key in self._coverage:
                return self._coverage[key]
            return self._build_coverage(key)

    def _build_coverage(self, key: tuple[str, GridSpec]) -> CoverageMatrix:
        level, spec = key
        boundary_path = self.boundary_paths.get(level)
        if boundary_path is None:
            raise QueryError(
                "level_not_available", f"no boundaries for level {level!r}", status=400
            )
        cache_dir = self.data_dir / "cache"
        cache_dir.mkdir(exist_ok=True)
        token = wio.coverage_fingerprint(str(boundary_path), spec)
        cache_path = cache_dir / f"coverage_{level}_{token}.parquet"
        if cache_path.exists():
            coverage = wio.load_coverage(str(cache_path))
        else:
            coverage = build_coverage(self.units(level), spec)
            wio.save_coverage(coverage, str(cache_path))
        self._coverage[key] = coverage
        return coverage

    def fingerprint(self, path: str | Path) -> str:
        path = str(path)
        stat = os.stat(path)
        stamp = (stat.st_mtime, stat.st_size)
        cached = self._fingerprints.get(path)
        if cached and cached[0] == stamp:
            return cached[1]
        digest = hashlib.sha256()
        with open(path, "rb") as fh:
            digest.update(fh.read())
        value = digest.hexdigest()
        self._fingerprints[path] = (stamp, value)
        return value

    # -- catalog ---------------------------------------------------------

    def catalog(self) -> dict:
        if self.scan_error is not None:
            raise WclimError(self.scan_error)
        sources = []
        for source in sorted({s for s, _ in self.climate_paths}):
            variables = []
            years_min, years_max = None, None
            frequency = None
            resolution = None
            for (s, variable), _ in sorted(self.climate_paths.items()):
                if s != source:
                    continue
                field = self.field(source, variable)
                frequency = field.time.frequency
                resolution = field.grid.resolution
                y0, y1 = field.time.years()
                years_min = y0 if years_min is None else min(years_min, y0)
                years_max = y1 if years_max is None else max(years_max, y1)
                variables.append(
                    {
                        "name": variable,
                        "units": field.variable.units,
                        "frequencies": _output_frequencies(field),
                        "years": [y0, y1],
                    }
                )
            sources.append(
                {
                    "name": source,
                    "native_frequency": frequency,
                    "resolution": resolution,
                    "years": [years_min, years_max],
                    "variables": variables,
                }
            )
        weight_years: dict[str, list[int]] = {}
        for (kind, year), _ in sorted(self.weight_paths.items()):
            weight_years.setdefault(kind, []).append(year)
        weights = [{"kind": "unweighted", "base_years": []}]
        for kind in ("population", "nightlight", "cropland", "concurrent"):
            if kind in weight_years:
                weights.append({"kind": kind, "base_years": sorted(weight_years[kind])})
        return {
            "sources": sources,
            "levels": sorted(self.boundary_paths),
            "weights": weights,
            "layouts": list(wio.LAYOUTS),
            "formats": list(wio.FORMATS),
            "thresholds": {
                "modes": list(MODES),
                "directions": ["above", "below"],
                "periods": list(PERIODS),
                "requires_native_frequency": "daily",
            },
        }


def _output_frequencies(field: ClimateField) -> list[str]:
    native = field.time.frequency
    out = [native]
    if native == "daily":
        out.append("monthly")
    if field.variable.annual_reduce != "forbidden":
        out.append("annual")
    return out


def validate_query(repo: DataRepository, query: Query) -> ClimateField:
    """Check a query against the catalog; returns the climate field."""
    if query.source not in SOURCES:
        raise QueryError("unknown_source", f"unknown source {query.source!r}")
    if query.variable not in VARIABLES:
        raise QueryError("unknown_variable", f"unknown variable {query.variable!r}")
    if query.level not in LEVELS:
        raise QueryError("unknown_level", f"level must be one of {LEVELS}")
    if query.weight_kind not in SCHEME_KINDS:
        raise QueryError("unknown_weight", f"weight must be one of {SCHEME_KINDS}")
    if query.frequency not in FREQUENCIES_OUT:
        raise QueryError(
            "unknown_frequency", f"frequency must be one of {FREQUENCIES_OUT}"
        )
    if query.variable not in SOURCES[query.source].variables:
        raise QueryError(
            "variable_not_in_source",
            f"{query.source} does not provide {query.variable}",
        )
    if query.weight_kind in ("population", "nightlight", "cropland"):
        if query.base_year not in BASE_YEARS:
            raise QueryError(
                "base_year_invalid",
                f"{query.weight_kind} weighting needs a base year in {BASE_YEARS}",
            )
    elif query.base_year is not None:
        raise QueryError(
            "base_year_invalid", f"{query.weight_kind} weighting takes no base year"
        )
    if query.year_from > query.year_to:
        raise QueryError(
            "invalid_time_range", f"empty year range {query.year_from}..{query.year_to}"
        )

    field = repo.field(query.source, query.variable)
    native = field.time.frequency

    if query.variable == "spei" and query.frequency != "monthly":
        raise QueryError(
            "spei_monthly_only",
            "spei cannot be aggregated beyond monthly; it is available only monthly",
        )
    if query.frequency == "daily" and native != "daily":
        raise QueryError(
            "frequency_unavailable",
            f"{query.source} provides {native} data; daily output needs a daily source",
        )
    if query.frequency == "annual" and VARIABLES[query.variable].annual_reduce == "forbidden":
        raise QueryError("spei_monthly_only", "spei cannot be annual")

    if query.threshold is not None:
        if native != "daily":
            raise QueryError(
                "threshold_requires_daily",
                "threshold statistics need daily data (an ERA5-style source)",
            )
        if query.frequency != query.threshold.period:
            raise QueryError(
                "threshold_period_mismatch",
                f"threshold period {query.threshold.period} does not match "
                f"requested frequency {query.frequency}",
            )

    y0, y1 = field.time.years()
    if query.year_from < y0 or query.year_to > y1:
        raise QueryError(
            "range_outside_coverage",
            f"requested {query.year_from}..{query.year_to}, coverage is {y0}..{y1}",
            status=422,
        )
    if query.threshold is not None and query.threshold.baseline is not None:
        b0, b1 = query.threshold.baseline
        if b0 < y0 or b1 > y1:
            raise QueryError(
                "range_outside_coverage",
                f"baseline {b0}..{b1} outside coverage {y0}..{y1}",
                status=422,
            )
    if query.weight_kind == "concurrent":
        for year in range(query.year_from, query.year_to + 1):
            decade = concurrent_base_year(year)
            if (("concurrent", decade)) not in repo.weight_paths:
                raise QueryError(
                    "missing_weight_layer",
                    f"no concurrent weight raster for decade {decade}",
                )
    return field


def _coarse_spec_for(raster: Grid, field: ClimateField) -> GridSpec:
    """Frame the raster will occupy once coarsened to the field's resolution."""
    ratio = field.grid.resolution / raster.spec.resolution
    factor = round(ratio)
    if factor > 1 and abs(ratio - factor) <= 1e-6 * factor:
        return block_spec(raster.spec, factor)
    return raster.spec


def _align_field(field: ClimateField, target: GridSpec) -> ClimateField:
    planes = np.stack(
        [
            align_half_offset(Grid(field.grid, plane), target).values
            for plane in field.planes
        ]
    )
    return ClimateField(
        variable=field.variable,
        grid=target,
        time=field.time,
        planes=planes,
        source=field.source,
    )


def prepare_frame(
    repo: DataRepository, query: Query, field: ClimateField
) -> tuple[ClimateField, WeightLayer | dict[int, WeightLayer]]:
    """Build the weight layer(s) and put the field on the canonical frame.

    The weight rasters' (coarsened) frame is canonical: a half-offset
    climate grid is resampled onto it, which also crops a 721-row polar
    grid to the 720-row frame.
    """
    kind = query.weight_kind
    if kind == "unweighted":
        return field, unweighted_layer(field.grid)

    if kind == "concurrent":
        decades = sorted(
            {concurrent_base_year(y) for y in range(query.year_from, query.year_to + 1)}
        )
        rasters = {
            decade: repo.weight_raster("concurrent", decade, field.grid.resolution)
            for decade in decades
        }
        frames = {_coarse_spec_for(r, field) for r in rasters.values()}
        if len(frames) > 1:
            raise AlignmentError("concurrent decade rasters disagree on the grid frame")
        frame = frames.pop()
        if not frame.same_frame(field.grid):
            field = _align_field(field, frame)
        layers = {
            decade: concurrent_weight(raster, frame, decade)
            for decade, raster in rasters.items()
        }
        return field, layers

    raster = repo.weight_raster(kind, query.base_year, field.grid.resolution)
    frame = _coarse_spec_for(raster, field)
    if not frame.same_frame(field.grid):
        field = _align_field(field, frame)
    if kind == "population":
        layer = population_weight(resample_to_frame(raster, frame), frame, query.base_year)
    elif kind == "nightlight":
        layer = nightlight_weight(raster, frame, query.base_year)
    else:
        layer = cropland_weight(raster, frame, query.base_year)
    return field, layer


def _slice_axis(axis: TimeAxis, sl: slice) -> TimeAxis:
    return TimeAxis(axis.frequency, axis.labels[sl])


def run_query(repo: DataRepository, query: Query) -> UnitTable:
    """Execute a validated query and return the resulting unit table."""
    field = validate_query(repo, query)
    field, weights = prepare_frame(repo, query, field)
    coverage = repo.coverage(query.level, field.grid)

    if query.threshold is None:
        sl = field.time.year_slice(query.year_from, query.year_to)
        window = dataclasses.replace(
            field, time=_slice_axis(field.time, sl), planes=field.planes[sl]
        )
        table = aggregate_series(window, coverage, weights)
        if query.frequency == window.time.frequency:
            return table
        if query.frequency == "monthly":
            return daily_to_monthly(table, field.variable)
        return to_annual(table, field.variable)

    # Relative thresholds draw on the full record; counts are sliced after.
    table = aggregate_series(field, coverage, weights)
    stats = apply_threshold(table, query.threshold)
    sl = stats.time.year_slice(query.year_from, query.year_to)
    return dataclasses.replace(
        stats,
        time=_slice_axis(stats.time, sl),
        values={u: row[sl] for u, row in stats.values.items()},
    )


def query_id(repo: DataRepository, query: Query) -> str:
    """Deterministic result id: canonical query plus data fingerprints."""
    digest = hashlib.sha256()
    digest.update(json.dumps(query.canonical(), sort_keys=True).encode())
    paths = [repo.climate_paths.get((query.source, query.variable))]
    paths.append(repo.boundary_paths.get(query.level))
    if query.weight_kind == "concurrent":
        for year in range(query.year_from, query.year_to + 1):
            paths.extend(
                repo.weight_paths.get(("concurrent", concurrent_base_year(year)), [])
            )
    elif query.weight_kind != "unweighted":
        paths.extend(repo.weight_paths.get((query.weight_kind, query.base_year), []))
    for path in paths:
        if path is not None and os.path.exists(path):
            digest.update(repo.fingerprint(path).encode())
    return digest.hexdigest()[:24]
