"""Administrative polygons and fractional grid-cell coverage.

Geometry lives in planar lon/lat degree space; sphericity enters downstream
only through the cosine cell-area term. A geometry is a multi-polygon: a
list of polygons, each polygon a list of rings (outer ring first, then
holes) stored as (N, 2) float arrays of lon/lat vertices without the
repeated closing vertex.

Cell fractions come from clipping every ring against the cell rectangle
(successive half-plane clipping, valid for concave rings when the clip
window is a rectangle) and a shoelace area with holes subtracted.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    BoundaryError,
    EmptyGeometryError,
    KeyCollisionError,
    ValidationError,
)
from .grid import GridSpec

LEVELS = ("gadm0", "gadm1")

# Fractions below this are numeric noise and are dropped from the matrix.
SLIVER_FRACTION = 1e-12

Ring = np.ndarray
Polygon = list  # [outer_ring, *hole_rings]
Geometry = list  # [Polygon, ...]


def _clean_ring(vertices, context: str = "ring") -> Ring:
    ring = np.asarray(vertices, dtype=np.float64)
    if ring.ndim != 2 or ring.shape[1] != 2:
        raise BoundaryError(f"{context}: expected (N, 2) lon/lat vertices")
    if len(ring) >= 2 and np.array_equal(ring[0], ring[-1]):
        ring = ring[:-1]
    if len(ring) < 3:
        raise BoundaryError(f"{context}: needs at least 3 distinct vertices")
    lon, lat = ring[:, 0], ring[:, 1]
    if lon.min() < -180.0 or lon.max() > 180.0:
        raise BoundaryError(f"{context}: longitude outside [-180, 180]")
    if lat.min() < -90.0 or lat.max() > 90.0:
        raise BoundaryError(f"{context}: latitude outside [-90, 90]")
    jumps = np.abs(np.diff(np.append(lon, lon[0])))
    if jumps.max() > 180.0:
        raise BoundaryError(
            f"{context}: crosses the antimeridian unsplit; split at +/-180 first"
        )
    return ring


def make_geometry(multipolygon, context: str = "geometry") -> Geometry:
    """Validate and normalize GeoJSON-style MultiPolygon coordinates.

    Accepts ``[[ring, ...], ...]`` where each ring is a closed or open
    vertex list; returns the internal multi-polygon form.
    """
    if not multipolygon:
        raise EmptyGeometryError(f"{context}: no polygons")
    geometry: Geometry = []
    for p, rings in enumerate(multipolygon):
        if not rings:
            raise BoundaryError(f"{context}: polygon {p} has no rings")
        geometry.append(
            [_clean_ring(r, f"{context} polygon {p} ring {k}") for k, r in enumerate(rings)]
        )
    return geometry


@dataclass(frozen=True)
class AdminUnit:
    """One administrative unit (country or first subnational level)."""

    unit_id: str
    level: str
    name: str
    geometry: Geometry

    def __post_init__(self):
        if self.level not in LEVELS:
            raise ValidationError(f"level must be one of {LEVELS}, got {self.level!r}")

    def bbox(self) -> tuple[float, float, float, float]:
        """(lon_min, lat_min, lon_max, lat_max) over all outer rings."""
        outers = np.concatenate([poly[0] for poly in self.geometry])
        return (
            float(outers[:, 0].min()),
            float(outers[:, 1].min()),
            float(outers[:, 0].max()),
            float(outers[:, 1].max()),
        )


def shoelace_area(ring: Ring) -> float:
    """Unsigned planar area of a ring in degrees squared."""
    x, y = ring[:, 0], ring[:, 1]
    return 0.5 * abs(float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y)))


def geometry_area(geometry: Geometry) -> float:
    """Planar multi-polygon area in degrees squared, holes subtracted."""
    total = 0.0
    for poly in geometry:
        outer = shoelace_area(poly[0])
        holes = sum(shoelace_area(h) for h in poly[1:])
        total += max(0.0, outer - holes)
    return total


def _clip_half_plane(points: list, axis: int, bound: float, keep_below: bool) -> list:
    """One Sutherland-Hodgman pass against axis <= bound or axis >= bound."""
    if not points:
        return []
    out: list = []
    prev = points[-1]
    prev_in = (prev[axis] <= bound) if keep_below else (prev[axis] >= bound)
    for cur in points:
        cur_in = (cur[axis] <= bound) if keep_below else (cur[axis] >= bound)
        if cur_in != prev_in:
            t = (bound - prev[axis]) / (cur[axis] - prev[axis])
            cross = (
                prev[0] + t * (cur[0] - prev[0]),
                prev[1] + t * (cur[1] - prev[1]),
            )
            out.append(cross)
        if cur_in:
            out.append(cur)
        prev, prev_in = cur, cur_in
    return out


def clip_ring_to_rect(
    ring: Ring, lon_w: float, lat_s: float, lon_e: float, lat_n: float
) -> list:
    """Clip a (possibly concave) ring to an axis-aligned rectangle."""
    points = [(float(x), float(y)) for x, y in ring]
    points = _clip_half_plane(points, 0, lon_w, keep_below=False)
    points = _clip_half_plane(points, 0, lon_e, keep_below=True)
    points = _clip_half_plane(points, 1, lat_s, keep_below=False)
    points = _clip_half_plane(points, 1, lat_n, keep_below=True)
    return points


def _clipped_area(points: list) -> float:
    if len(points) < 3:
        return 0.0
    return shoelace_area(np.asarray(points))


def polygon_cell_fraction(
    geometry: Geometry, cell: tuple[float, float, float, float]
) -> float:
    """Fraction of a lon/lat rectangle covered by a multi-polygon, in [0, 1]."""
    if geometry_area(geometry) <= 0.0:
        raise EmptyGeometryError("geometry has zero area after cleaning")
    lon_w, lat_s, lon_e, lat_n = cell
    cell_area = (lon_e - lon_w) * (lat_n - lat_s)
    if cell_area <= 0.0:
        raise ValidationError(f"cell rectangle {cell} has non-positive area")
    covered = 0.0
    for poly in geometry:
        outer = _clipped_area(clip_ring_to_rect(poly[0], lon_w, lat_s, lon_e, lat_n))
        holes = sum(
            _clipped_area(clip_ring_to_rect(h, lon_w, lat_s, lon_e, lat_n))
            for h in poly[1:]
        )
        covered += max(0.0, outer - holes)
    return min(1.0, max(0.0, covered / cell_area))


@dataclass(frozen=True)
class CoverageMatrix:
    """Sparse map unit_id -> [(flat cell index, coverage fraction)].

    Fractions are strictly positive; entries are sorted by cell index so
    downstream sums are independent of construction order.
    """

    level: str
    grid: GridSpec
    entries: dict[str, list[tuple[int, float]]]

    def units(self) -> list[str]:
        return sorted(self.entries)

    def unit_arrays(self, unit_id: str) -> tuple[np.ndarray, np.ndarray]:
        pairs = self.entries[unit_id]
        idx = np.fromiter((j for j, _ in pairs), dtype=np.int64, count=len(pairs))
        frac = np.fromiter((f for _, f in pairs), dtype=np.float64, count=len(pairs))
        return idx, frac


def build_coverage(units: list[AdminUnit], grid: GridSpec) -> CoverageMatrix:
    """Coverage fractions for every unit over every intersecting grid cell.

    Only cells whose rectangles overlap a unit's bounding box are visited;
    fractions below :data:`SLIVER_FRACTION` are dropped. The result does not
    depend on the ordering of ``units``.
    """
    entries: dict[str, list[tuple[int, float]]] = {}
    level = units[0].level if units else LEVELS[0]
    for unit in units:
        if unit.unit_id in entries:
            raise KeyCollisionError(f"duplicate unit_id {unit.unit_id!r}")
        if unit.level != level:
            raise ValidationError(
                f"mixed levels in one coverage build: {unit.level} vs {level}"
            )
        if geometry_area(unit.geometry) <= 0.0:
            raise EmptyGeometryError(f"unit {unit.unit_id!r} has zero-area geometry")
        r0, r1, c0, c1 = grid.window_for_bbox(*unit.bbox())
        cells: list[tuple[int, float]] = []
        for row in range(r0, r1):
            for col in range(c0, c1):
                frac = polygon_cell_fraction(unit.geometry, grid.cell_rect(row, col))
                if frac >= SLIVER_FRACTION:
                    cells.append((grid.cell_index(row, col), frac))
        entries[unit.unit_id] = cells
    return CoverageMatrix(level=level, grid=grid, entries=entries)
