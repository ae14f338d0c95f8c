"""Independent oracles the tests check the library against.

These deliberately avoid the code paths under test: the aggregation oracle
is a scalar Python loop over math.fsum, point-in-polygon is an even-odd ray
cast (the library clips polygons instead), and areas come from high-precision
reference values frozen where noted.
"""

from __future__ import annotations

import math

import numpy as np


def brute_force_aggregate(plane, entries, weight_values, areas, use_area):
    """Scalar evaluation of the weighted aggregation ratio for one unit.

    ``entries`` is [(flat cell index, fraction)], ``plane``/``weight_values``/
    ``areas`` are flat sequences. Returns NaN under the NA policy: no
    contributing cell or zero mass.
    """
    num_terms, den_terms = [], []
    for j, f in entries:
        x = plane[j]
        w = weight_values[j]
        if math.isnan(x) or math.isnan(w):
            continue
        a = areas[j] if use_area else 1.0
        mass = a * f * w
        num_terms.append(mass * x)
        den_terms.append(mass)
    den = math.fsum(den_terms)
    if not den_terms or den <= 0.0:
        return float("nan")
    return math.fsum(num_terms) / den


def points_in_geometry(points: np.ndarray, geometry) -> np.ndarray:
    """Even-odd ray casting over every ring of a multi-polygon.

    Holes toggle containment twice, so points inside a hole end up outside.
    """
    x, y = points[:, 0], points[:, 1]
    inside = np.zeros(len(points), dtype=bool)
    for polygon in geometry:
        for ring in polygon:
            x0, y0 = ring[:, 0], ring[:, 1]
            x1, y1 = np.roll(x0, -1), np.roll(y0, -1)
            for k in range(len(ring)):
                crosses = (y0[k] <= y) != (y1[k] <= y)
                if not crosses.any():
                    continue
                t = (y[crosses] - y0[k]) / (y1[k] - y0[k])
                xi = x0[k] + t * (x1[k] - x0[k])
                hits = np.zeros(len(points), dtype=bool)
                hits[crosses] = x[crosses] < xi
                inside ^= hits
    return inside


def monte_carlo_fraction(geometry, cell, n: int, seed: int) -> float:
    """Monte Carlo estimate of the covered fraction of a cell rectangle."""
    lon_w, lat_s, lon_e, lat_n = cell
    rng = np.random.default_rng(seed)
    pts = np.column_stack(
        [
            rng.uniform(lon_w, lon_e, size=n),
            rng.uniform(lat_s, lat_n, size=n),
        ]
    )
    return float(points_in_geometry(pts, geometry).mean())


def closest_rank_percentile(values, p: float) -> float:
    """Reference percentile: sort, interpolate between closest ranks."""
    v = sorted(float(x) for x in values if not math.isnan(float(x)))
    if not v:
        return float("nan")
    h = (len(v) - 1) * p / 100.0
    lo = math.floor(h)
    if lo + 1 >= len(v):
        return v[-1]
    return v[lo] + (h - lo) * (v[lo + 1] - v[lo])


def area_weighted_mean_two_pass(values, areas) -> float:
    """Independent two-pass area-weighted mean (normalize, then accumulate)."""
    pairs = [(x, a) for x, a in zip(values, areas) if not math.isnan(x)]
    if not pairs:
        return float("nan")
    total = math.fsum(a for _, a in pairs)
    if total <= 0:
        return float("nan")
    return math.fsum(x * (a / total) for x, a in pairs)


def random_concave_polygon(rng: np.random.Generator, center, n_vertices: int, radius: float):
    """Star-shaped (hence simple) polygon with jagged radii; usually concave."""
    angles = np.sort(rng.uniform(0.0, 2 * np.pi, size=n_vertices))
    radii = rng.uniform(0.25 * radius, radius, size=n_vertices)
    cx, cy = center
    pts = np.column_stack([cx + radii * np.cos(angles), cy + radii * np.sin(angles)])
    return [[pts]]
