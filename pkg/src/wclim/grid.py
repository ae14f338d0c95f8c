"""Regular lat/lon grid model: cell areas, block coarsening, half-offset alignment.

Conventions shared by every module in the package:

- Cells are indexed row-major from the northwest corner: row 0 is the
  northernmost row, column 0 the westernmost column, and the flat cell
  index of (row, col) is ``row * n_cols + col``.
- Origins are cell *centers*, not edges.
- Missing values are NaN; a value plane is always float64.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import AlignmentError, DomainError, ShapeError

# Tolerance (in cells) for deciding whether two grids sit on the same frame
# or on an exact half-cell offset.
_OFFSET_TOL = 1e-6


def normalize_lon(lon: float) -> float:
    """Map a longitude into [-180, 180)."""
    return (lon + 180.0) % 360.0 - 180.0


@dataclass(frozen=True)
class GridSpec:
    """Geometry of a regular lat/lon grid.

    ``lat_origin`` / ``lon_origin`` are the center of the first (northernmost)
    row and first (westernmost) column; ``resolution`` is the uniform cell
    size in degrees.
    """

    lat_origin: float
    lon_origin: float
    resolution: float
    n_rows: int
    n_cols: int

    def __post_init__(self):
        if not (self.resolution > 0):
            raise DomainError(f"resolution must be > 0, got {self.resolution}")
        if self.n_rows < 1 or self.n_cols < 1:
            raise DomainError(
                f"grid must have at least one row and column, got {self.n_rows}x{self.n_cols}"
            )
        lat_last = self.lat_origin - (self.n_rows - 1) * self.resolution
        # Allow half a cell of slack so edge-touching grids (ERA5 polar rows)
        # validate; centers themselves must stay within the poles.
        if self.lat_origin > 90.0 + 1e-9 or lat_last < -90.0 - 1e-9:
            raise DomainError(
                f"cell centers span latitudes [{lat_last}, {self.lat_origin}], outside [-90, 90]"
            )
        if not (math.isfinite(self.lon_origin) and math.isfinite(self.lat_origin)):
            raise DomainError("grid origins must be finite")

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n_rows, self.n_cols)

    @property
    def n_cells(self) -> int:
        return self.n_rows * self.n_cols

    def lat_centers(self) -> np.ndarray:
        """Latitudes of row centers, north to south."""
        return self.lat_origin - np.arange(self.n_rows) * self.resolution

    def lon_centers(self) -> np.ndarray:
        """Longitudes of column centers, west to east (not wrapped)."""
        return self.lon_origin + np.arange(self.n_cols) * self.resolution

    def cell_index(self, row: int, col: int) -> int:
        return row * self.n_cols + col

    def cell_rect(self, row: int, col: int) -> tuple[float, float, float, float]:
        """Bounds (lon_w, lat_s, lon_e, lat_n) of one cell."""
        half = self.resolution / 2.0
        lat = self.lat_origin - row * self.resolution
        lon = self.lon_origin + col * self.resolution
        return (lon - half, lat - half, lon + half, lat + half)

    def window_for_bbox(
        self, lon_min: float, lat_min: float, lon_max: float, lat_max: float
    ) -> tuple[int, int, int, int]:
        """Half-open index window (r0, r1, c0, c1) of cells overlapping a bbox,
        clamped to the grid extent."""
        top_edge = self.lat_origin + self.resolution / 2.0
        left_edge = self.lon_origin - self.resolution / 2.0
        r0 = int(math.floor((top_edge - lat_max) / self.resolution))
        r1 = int(math.ceil((top_edge - lat_min) / self.resolution))
        c0 = int(math.floor((lon_min - left_edge) / self.resolution))
        c1 = int(math.ceil((lon_max - left_edge) / self.resolution))
        r0 = max(0, min(self.n_rows, r0))
        r1 = max(0, min(self.n_rows, r1))
        c0 = max(0, min(self.n_cols, c0))
        c1 = max(0, min(self.n_cols, c1))
        return r0, r1, c0, c1

    def same_frame(self, other: "GridSpec") -> bool:
        """True when the two specs describe the same cells (within tolerance)."""
        if self.shape != other.shape:
            return False
        tol = _OFFSET_TOL * self.resolution
        return (
            abs(self.resolution - other.resolution) <= tol
            and abs(self.lat_origin - other.lat_origin) <= tol
            and abs(self.lon_origin - other.lon_origin) <= tol
        )

    def offset_to(self, other: "GridSpec") -> tuple[float, float]:
        """Origin offset to ``other`` in units of cells (lat, lon).

        Raises :class:`AlignmentError` when resolutions differ or the offsets
        are not integer or half-integer multiples of the resolution.
        """
        if abs(self.resolution - other.resolution) > _OFFSET_TOL * self.resolution:
            raise AlignmentError(
                f"resolutions differ: {self.resolution} vs {other.resolution}"
            )
        dlat = (self.lat_origin - other.lat_origin) / self.resolution
        dlon = (other.lon_origin - self.lon_origin) / self.resolution
        for d in (dlat, dlon):
            if abs(2 * d - round(2 * d)) > 2 * _OFFSET_TOL:
                raise AlignmentError(
                    f"origin offset {d} cells is neither integer nor half-integer"
                )
        return dlat, dlon


@dataclass(frozen=True)
class Grid:
    """A value plane on a :class:`GridSpec`. NaN marks missing cells."""

    spec: GridSpec
    values: np.ndarray
    units: str = ""

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.shape != self.spec.shape:
            raise ShapeError(
                f"value plane {values.shape} does not match grid {self.spec.shape}"
            )
        values = values.copy()
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def missing_mask(self) -> np.ndarray:
        return ~np.isfinite(self.values)


def cell_area(lat_center: float, resolution: float) -> float:
    """Relative (dimensionless) area of a cell centered at ``lat_center``.

    resolution**2 * cos(lat), clamped at zero to guard floating error at the
    poles. Serves as the per-cell area term in the weighted aggregation.
    """
    if not -90.0 <= lat_center <= 90.0:
        raise DomainError(f"latitude {lat_center} outside [-90, 90]")
    return resolution * resolution * max(0.0, math.cos(math.radians(lat_center)))


def area_plane(spec: GridSpec) -> np.ndarray:
    """Per-cell relative areas for a whole grid, shape (n_rows, n_cols)."""
    lats = np.clip(spec.lat_centers(), -90.0, 90.0)
    col = spec.resolution**2 * np.maximum(0.0, np.cos(np.radians(lats)))
    return np.repeat(col[:, None], spec.n_cols, axis=1)


def block_spec(spec: GridSpec, factor: int) -> GridSpec:
    """Spec of the grid produced by factor x factor block aggregation."""
    if factor < 1:
        raise ShapeError(f"factor must be >= 1, got {factor}")
    if spec.n_rows % factor or spec.n_cols % factor:
        raise ShapeError(
            f"grid {spec.n_rows}x{spec.n_cols} not divisible into {factor}x{factor} blocks"
        )
    return GridSpec(
        lat_origin=spec.lat_origin - (factor - 1) * spec.resolution / 2.0,
        lon_origin=spec.lon_origin + (factor - 1) * spec.resolution / 2.0,
        resolution=spec.resolution * factor,
        n_rows=spec.n_rows // factor,
        n_cols=spec.n_cols // factor,
    )


def block_aggregate(fine: Grid, factor: int) -> Grid:
    """Coarsen a grid by averaging factor x factor blocks of cells.

    Blocks start at the upper-left (northwest) corner. Missing cells are
    excluded from each block mean; an all-missing block stays missing.
    """
    coarse_spec = block_spec(fine.spec, factor)
    nr, nc = coarse_spec.n_rows, coarse_spec.n_cols
    blocks = fine.values.reshape(nr, factor, nc, factor)
    finite = np.isfinite(blocks)
    count = finite.sum(axis=(1, 3))
    total = np.where(finite, blocks, 0.0).sum(axis=(1, 3))
    with np.errstate(invalid="ignore"):
        values = np.where(count > 0, total / np.maximum(count, 1), np.nan)
    return Grid(coarse_spec, values, fine.units)


def half_offset_steps(source: GridSpec, target: GridSpec) -> tuple[int, int]:
    """Integer index shifts placing target centers at source-center midpoints.

    Returns (di, dj) such that target cell (r, c) is surrounded by source
    cells (di+r, dj+c) .. (di+r+1, dj+c+1). Raises :class:`AlignmentError`
    when the grids are not offset by exactly half a cell in both axes.
    """
    res = source.resolution
    if abs(res - target.resolution) > _OFFSET_TOL * res:
        raise AlignmentError(
            f"resolutions differ: {res} vs {target.resolution}"
        )
    di = (source.lat_origin - target.lat_origin) / res - 0.5
    dj = (target.lon_origin - source.lon_origin) / res - 0.5
    for name, d in (("lat", di), ("lon", dj)):
        if abs(d - round(d)) > _OFFSET_TOL:
            raise AlignmentError(
                f"{name} offset is not half a cell (fractional shift {d})"
            )
    return int(round(di)), int(round(dj))


def align_half_offset(source: Grid, target: GridSpec) -> Grid:
    """Resample onto a grid offset by half a cell in both axes.

    Each target cell takes the equal-weight mean of the (up to) four source
    cells overlapping it, which equals bilinear interpolation evaluated at
    the target center. Cells along the target edge average only the
    neighbors that exist; missing neighbors are skipped, and a target cell
    with no finite neighbor stays missing.
    """
    di, dj = half_offset_steps(source.spec, target)
    src = source.values
    nsr, nsc = src.shape
    rows_n = di + np.arange(target.n_rows)
    cols_w = dj + np.arange(target.n_cols)

    def fetch(rows: np.ndarray, cols: np.ndarray) -> np.ndarray:
        ok = (rows >= 0) & (rows < nsr)
        okc = (cols >= 0) & (cols < nsc)
        plane = src[np.clip(rows, 0, nsr - 1)[:, None], np.clip(cols, 0, nsc - 1)[None, :]]
        return np.where(ok[:, None] & okc[None, :], plane, np.nan)

    quads = (
        fetch(rows_n, cols_w),
        fetch(rows_n, cols_w + 1),
        fetch(rows_n + 1, cols_w),
        fetch(rows_n + 1, cols_w + 1),
    )
    finite = [np.isfinite(q) for q in quads]
    count = sum(f.astype(np.int64) for f in finite)
    zeroed = [np.where(f, q, 0.0) for q, f in zip(quads, finite)]
    # Pairwise sum keeps constant and dyadic-affine fields bitwise exact.
    total = (zeroed[0] + zeroed[1]) + (zeroed[2] + zeroed[3])
    with np.errstate(invalid="ignore"):
        values = np.where(count > 0, total / np.maximum(count, 1), np.nan)
    return Grid(target, values, source.units)
