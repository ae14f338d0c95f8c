"""Deterministic synthetic data directory for demos and end-to-end tests.

Builds a small region (lon 4..10, lat 40..44) with an ERA5-style daily
source on a half-offset 17x25 grid at 0.25 deg, monthly sources on the
8x12 socio-economic frame at 0.5 deg, weight rasters for every scheme, and
two levels of boundaries. One subnational unit sits on a zero-population
box so population-weighted queries demonstrate NA retention.

Run ``python -m wclim.fixtures OUTDIR`` or call :func:`build_fixture`.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import numpy as np

from .aggregate import ClimateField
from .grid import Grid, GridSpec
from .io import write_climate, write_raster
from .temporal import VARIABLES, TimeAxis, parse_label

SOCIO_025 = GridSpec(lat_origin=43.875, lon_origin=4.125, resolution=0.25, n_rows=16, n_cols=24)
SOCIO_05 = GridSpec(lat_origin=43.75, lon_origin=4.25, resolution=0.5, n_rows=8, n_cols=12)
ERA5_FRAME = GridSpec(lat_origin=44.0, lon_origin=4.0, resolution=0.25, n_rows=17, n_cols=25)
NIGHTLIGHT_FINE = GridSpec(lat_origin=43.975, lon_origin=4.025, resolution=0.05, n_rows=80, n_cols=120)
CROPLAND_FINE = GridSpec(lat_origin=43.9375, lon_origin=4.0625, resolution=0.125, n_rows=32, n_cols=48)

# Population is zeroed here so the unit covering the box aggregates to NA
# under population weighting.
DEAD_ZONE = (8.5, 40.5, 9.5, 41.5)  # lon_w, lat_s, lon_e, lat_n


def _lonlat(spec: GridSpec) -> tuple[np.ndarray, np.ndarray]:
    lon = np.tile(spec.lon_centers(), (spec.n_rows, 1))
    lat = np.repeat(spec.lat_centers()[:, None], spec.n_cols, axis=1)
    return lon, lat


def _seasonal(axis: TimeAxis) -> np.ndarray:
    """Phase in [0, 1) per time step from the day of year."""
    phases = []
    for label in axis.labels:
        ts = parse_label(label, axis.frequency)
        phases.append((ts.timetuple().tm_yday - 1) / 365.0)
    return np.asarray(phases)


def _temperature(spec: GridSpec, axis: TimeAxis) -> np.ndarray:
    lon, lat = _lonlat(spec)
    base = 12.0 - 0.8 * (lat - 40.0) + 0.3 * (lon - 4.0)
    season = 8.0 * np.sin(2 * np.pi * _seasonal(axis))
    return base[None, :, :] + season[:, None, None]


def _precipitation(spec: GridSpec, axis: TimeAxis) -> np.ndarray:
    lon, lat = _lonlat(spec)
    base = 2.0 + 0.5 * np.cos(lon) + 0.3 * np.sin(2.0 * lat)
    season = 1.0 + 0.6 * np.cos(2 * np.pi * _seasonal(axis))
    return np.maximum(base[None, :, :] * season[:, None, None], 0.0)


def _spei(spec: GridSpec, axis: TimeAxis) -> np.ndarray:
    lon, lat = _lonlat(spec)
    pattern = np.sin(lon) * np.cos(lat)
    season = np.sin(2 * np.pi * _seasonal(axis) + 1.0)
    return 1.5 * pattern[None, :, :] * season[:, None, None]


def _axis_for_years(frequency: str, year_from: int, year_to: int) -> TimeAxis:
    if frequency == "daily":
        days = (
            np.datetime64(f"{year_to + 1}-01-01") - np.datetime64(f"{year_from}-01-01")
        ).astype(int)
        return TimeAxis.range("daily", f"{year_from}-01-01", int(days))
    return TimeAxis.range("monthly", f"{year_from}-01", 12 * (year_to - year_from + 1))


def _population_density(spec: GridSpec) -> np.ndarray:
    lon, lat = _lonlat(spec)
    density = 50.0 + 30.0 * np.sin(1.3 * lon) * np.cos(2.1 * lat) + 10.0 * np.cos(lon + lat)
    density = np.maximum(density, 0.0)
    w, s, e, n = DEAD_ZONE
    density[(lon > w) & (lon < e) & (lat > s) & (lat < n)] = 0.0
    return density


def _nightlight_dn(spec: GridSpec) -> np.ndarray:
    lon, lat = _lonlat(spec)
    cities = [(5.4, 43.3, 1.2), (7.25, 43.7, 0.9), (9.1, 42.6, 0.7)]
    dn = np.zeros(spec.shape)
    for cx, cy, strength in cities:
        dn += 63.0 * strength * np.exp(-((lon - cx) ** 2 + (lat - cy) ** 2) / 0.35)
    dn += 12.0 * (np.sin(5 * lon) * np.cos(5 * lat) + 1.0)  # dim noise below the floor
    return np.clip(np.round(dn), 0.0, 63.0)


def _cropland_km2(spec: GridSpec) -> np.ndarray:
    lon, lat = _lonlat(spec)
    return np.maximum(40.0 + 35.0 * np.sin(0.9 * lon + 0.4) * np.sin(1.7 * lat), 0.0)


def _concurrent_count(spec: GridSpec, decade: int) -> np.ndarray:
    growth = 1.0 + (decade - 2000) / 100.0
    return _population_density(spec) * 6.0 * growth


def _rect(lon_w, lat_s, lon_e, lat_n) -> list:
    return [
        [
            [lon_w, lat_s],
            [lon_e, lat_s],
            [lon_e, lat_n],
            [lon_w, lat_n],
            [lon_w, lat_s],
        ]
    ]


def _feature(gid0: str, gid1: str | None, name: str, rings: list) -> dict:
    props = {"GID_0": gid0, "COUNTRY": f"Country {gid0}"}
    if gid1 is not None:
        props["GID_1"] = gid1
        props["NAME_1"] = name
    return {
        "type": "Feature",
        "properties": props,
        "geometry": {"type": "MultiPolygon", "coordinates": [rings]},
    }


def _boundaries() -> tuple[dict, dict]:
    gadm0 = {
        "type": "FeatureCollection",
        "features": [
            _feature("AAA", None, "", _rect(4.0, 40.0, 7.0, 44.0)),
            _feature("BBB", None, "", _rect(7.0, 40.0, 10.0, 44.0)),
        ],
    }
    l_shape = [
        [
            [4.0, 40.0],
            [7.0, 40.0],
            [7.0, 41.0],
            [5.0, 41.0],
            [5.0, 42.0],
            [4.0, 42.0],
            [4.0, 40.0],
        ]
    ]
    gadm1 = {
        "type": "FeatureCollection",
        "features": [
            _feature("AAA", "AAA.1_1", "North A", _rect(4.0, 42.0, 7.0, 44.0)),
            _feature("AAA", "AAA.2_1", "South A", l_shape),
            _feature("BBB", "BBB.1_1", "North B", _rect(7.0, 42.0, 10.0, 44.0)),
            _feature("BBB", "BBB.2_1", "Dead Zone", _rect(*DEAD_ZONE)),
        ],
    }
    return gadm0, gadm1


def build_fixture(data_dir: str | Path) -> Path:
    """Write the full synthetic data directory; returns its path."""
    out = Path(data_dir)
    out.mkdir(parents=True, exist_ok=True)

    daily = _axis_for_years("daily", 2000, 2001)
    monthly = _axis_for_years("monthly", 2000, 2003)

    era5_temp = _temperature(ERA5_FRAME, daily)
    era5_temp[5, 0, 0] = np.nan  # sporadic gap, exercises NA retention
    write_climate(
        ClimateField(VARIABLES["temperature_avg"], ERA5_FRAME, daily, era5_temp, "era5"),
        str(out / "era5__temperature_avg.nc"),
    )
    write_climate(
        ClimateField(
            VARIABLES["precipitation"], ERA5_FRAME, daily, _precipitation(ERA5_FRAME, daily), "era5"
        ),
        str(out / "era5__precipitation.nc"),
    )
    write_climate(
        ClimateField(
            VARIABLES["temperature_avg"], SOCIO_05, monthly, _temperature(SOCIO_05, monthly), "cru_ts"
        ),
        str(out / "cru_ts__temperature_avg.nc"),
    )
    write_climate(
        ClimateField(
            VARIABLES["precipitation"], SOCIO_05, monthly, _precipitation(SOCIO_05, monthly), "cru_ts"
        ),
        str(out / "cru_ts__precipitation.nc"),
    )
    write_climate(
        ClimateField(
            VARIABLES["temperature_avg"], SOCIO_05, monthly, _temperature(SOCIO_05, monthly) - 0.3, "udel"
        ),
        str(out / "udel__temperature_avg.nc"),
    )
    write_climate(
        ClimateField(VARIABLES["spei"], SOCIO_05, monthly, _spei(SOCIO_05, monthly), "csic"),
        str(out / "csic__spei.nc"),
    )

    for year in (2000, 2005):
        scale = 1.0 + (year - 2000) / 50.0
        write_raster(
            Grid(SOCIO_025, _population_density(SOCIO_025) * scale, "persons/km2"),
            str(out / f"weight__population__{year}.nc"),
        )
    write_raster(
        Grid(NIGHTLIGHT_FINE, _nightlight_dn(NIGHTLIGHT_FINE), "DN"),
        str(out / "weight__nightlight__2015.nc"),
    )
    write_raster(
        Grid(CROPLAND_FINE, _cropland_km2(CROPLAND_FINE), "km2"),
        str(out / "weight__cropland__2000.nc"),
    )
    write_raster(
        Grid(SOCIO_025, _concurrent_count(SOCIO_025, 2000), "persons"),
        str(out / "weight__concurrent__2000.nc"),
    )

    gadm0, gadm1 = _boundaries()
    (out / "gadm0.geojson").write_text(json.dumps(gadm0), encoding="utf-8")
    (out / "gadm1.geojson").write_text(json.dumps(gadm1), encoding="utf-8")
    return out


if __name__ == "__main__":
    target = sys.argv[1] if len(sys.argv) > 1 else "fixture_data"
    print(build_fixture(target))
