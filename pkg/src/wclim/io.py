"""File ingestion and serialization.

Climate rasters come in as classic/64-bit-offset NetCDF with CF-style time
units; boundaries as GADM-flavoured GeoJSON. Unit tables go out in wide or
long layout as csv, json, or parquet with deterministic bytes: columns and
rows are ordered (unit_id ascending, then period ascending), floats are
rendered at 12 significant digits in csv, and NA becomes an empty csv
field / a null elsewhere. Writers stage to a temp file and rename.
"""

from __future__ import annotations

import csv
import hashlib
import json
import os
import re
import tempfile
from datetime import datetime, timedelta
from io import StringIO

import numpy as np
import pyarrow as pa
import pyarrow.parquet as pq
from scipy.io import netcdf_file

from .aggregate import ClimateField, UnitTable
from .boundaries import AdminUnit, CoverageMatrix, make_geometry
from .errors import BoundaryError, IngestionError, KeyCollisionError, ValidationError
from .grid import Grid, GridSpec
from .temporal import TimeAxis, VariableKind, format_label, parse_label, variable_kind
from .weights import WeightScheme

LAYOUTS = ("wide", "long")
FORMATS = ("csv", "json", "parquet")

FILL_VALUE = -9999.0

# NetCDF variable names seen in the wild, mapped onto our canonical names.
_VARIABLE_ALIASES = {
    "t2m": "temperature_avg",
    "tas": "temperature_avg",
    "tmp": "temperature_avg",
    "tmin": "temperature_min",
    "tasmin": "temperature_min",
    "tmax": "temperature_max",
    "tasmax": "temperature_max",
    "pr": "precipitation",
    "tp": "precipitation",
    "pre": "precipitation",
    "fg": "wind_gust",
    "wind_gust": "wind_gust",
    "spei": "spei",
}

_TIME_UNITS_RE = re.compile(
    r"^(hours|days)\s+since\s+(\d{1,4})-(\d{1,2})-(\d{1,2})(?:[T ](\d{1,2})(?::(\d{2}))?(?::(\d{2}))?)?",
    re.IGNORECASE,
)


def _attr(obj, name: str, default=None):
    value = getattr(obj, name, default)
    if isinstance(value, bytes):
        return value.decode("utf-8", "replace")
    return value


def _find_coord(nc, names: tuple[str, ...], path: str) -> tuple[str, np.ndarray]:
    for name in names:
        if name in nc.variables:
            var = nc.variables[name]
            if len(var.dimensions) != 1:
                raise IngestionError(f"{path}: coordinate {name} is not 1-D")
            return name, np.asarray(var[:], dtype=np.float64).copy()
    raise IngestionError(f"{path}: no coordinate variable named any of {names}")


def _uniform_step(values: np.ndarray, what: str, path: str) -> float:
    if len(values) < 2:
        raise IngestionError(f"{path}: {what} axis needs at least 2 points")
    steps = np.diff(values)
    step = float(steps[0])
    if np.any(np.abs(steps - step) > 1e-6):
        raise IngestionError(f"{path}: non-uniform {what} spacing")
    return step


def _convert_units(values: np.ndarray, units: str, kind: VariableKind, path: str) -> np.ndarray:
    u = units.strip()
    name = kind.name
    if name.startswith("temperature"):
        if u in ("K", "kelvin", "Kelvin"):
            return values - 273.15
        if u in ("degC", "deg_C", "C", "celsius", "Celsius", "°C"):
            return values
    elif name == "precipitation":
        if u in ("mm", "millimeters", "kg m-2", "kg/m^2", "kg/m2"):
            return values
        if u in ("m", "meters", "metres"):
            return values * 1000.0
    elif name == "wind_gust":
        if u in ("m/s", "m s-1", "m s**-1", "meters per second"):
            return values
    elif name == "spei":
        if u in ("", "1", "unitless", "none"):
            return values
    raise IngestionError(f"{path}: unknown units {units!r} for {name}")


def _time_labels(
    offsets: np.ndarray, units: str, path: str, freq_hint: str | None = None
) -> tuple[str, tuple[str, ...]]:
    m = _TIME_UNITS_RE.match(units.strip())
    if not m:
        raise IngestionError(f"{path}: unsupported time units {units!r}")
    step_unit = m.group(1).lower()
    base = datetime(
        int(m.group(2)),
        int(m.group(3)),
        int(m.group(4)),
        int(m.group(5) or 0),
        int(m.group(6) or 0),
    )
    delta = timedelta(hours=1) if step_unit == "hours" else timedelta(days=1)
    stamps = [base + delta * float(o) for o in offsets]
    if any(b <= a for a, b in zip(stamps, stamps[1:])):
        raise IngestionError(f"{path}: time axis is not strictly increasing")
    if freq_hint in ("hourly", "daily", "monthly", "annual"):
        freq = freq_hint
    elif step_unit == "hours" and (
        len(stamps) == 1
        or all(b - a == timedelta(hours=1) for a, b in zip(stamps, stamps[1:]))
    ):
        freq = "hourly"
    elif len(stamps) > 1 and all(
        b - a == timedelta(days=1) for a, b in zip(stamps, stamps[1:])
    ):
        freq = "daily"
    elif all(t.day == 1 and t.hour == 0 for t in stamps):
        freq = "annual" if all(t.month == 1 for t in stamps) and len(stamps) > 1 else "monthly"
    elif len(stamps) == 1:
        freq = "daily"
    else:
        raise IngestionError(f"{path}: cannot infer time frequency")
    labels = tuple(format_label(t, freq) for t in stamps)
    return freq, labels


def read_climate(path: str, variable: str, source: str) -> ClimateField:
    """Read one variable from a NetCDF file into a ClimateField.

    The grid is inferred from the 1-D lat/lon coordinate centers (uniform
    spacing required), rows are normalized to north-first order, values are
    converted to canonical units, and the fill value becomes NaN.
    """
    kind = variable_kind(variable)
    try:
        nc = netcdf_file(path, "r", mmap=False)
    except Exception as exc:
        raise IngestionError(f"{path}: not a readable NetCDF file ({exc})") from exc
    try:
        lat_name, lat = _find_coord(nc, ("lat", "latitude"), path)
        lon_name, lon = _find_coord(nc, ("lon", "longitude"), path)
        if "time" not in nc.variables:
            raise IngestionError(f"{path}: no time variable")
        time_var = nc.variables["time"]
        freq, labels = _time_labels(
            np.asarray(time_var[:], dtype=np.float64),
            _attr(time_var, "units", ""),
            path,
            freq_hint=_attr(time_var, "frequency", None),
        )

        data_var = None
        candidates = {variable} | {
            alias for alias, canon in _VARIABLE_ALIASES.items() if canon == variable
        }
        fallback = None
        for name, var in nc.variables.items():
            if name in (lat_name, lon_name, "time"):
                continue
            if name in candidates:
                data_var = var
                break
            if len(var.dimensions) == 3 and fallback is None:
                fallback = var
        if data_var is None:
            data_var = fallback
        if data_var is None:
            raise IngestionError(f"{path}: no data variable for {variable}")
        dims = data_var.dimensions
        if len(dims) != 3 or dims[0] != "time":
            raise IngestionError(
                f"{path}: expected dimensions (time, {lat_name}, {lon_name}), got {dims}"
            )
        raw = np.asarray(data_var[:], dtype=np.float64).copy()

        fill = _attr(data_var, "_FillValue", None)
        if fill is None:
            fill = _attr(data_var, "missing_value", None)
        if fill is not None:
            raw[np.isclose(raw, float(fill), rtol=0.0, atol=1e-6)] = np.nan
        raw = _convert_units(raw, _attr(data_var, "units", ""), kind, path)

        lat_step = _uniform_step(lat, "latitude", path)
        lon_step = _uniform_step(lon, "longitude", path)
        if lon_step <= 0:
            raise IngestionError(f"{path}: longitude axis must run west to east")
        if lat_step > 0:
            lat = lat[::-1]
            raw = raw[:, ::-1, :]
        resolution = abs(lat_step)
        if abs(resolution - lon_step) > 1e-6:
            raise IngestionError(
                f"{path}: lat step {resolution} differs from lon step {lon_step}"
            )
        spec = GridSpec(
            lat_origin=float(lat[0]),
            lon_origin=float(lon[0]),
            resolution=resolution,
            n_rows=len(lat),
            n_cols=len(lon),
        )
        return ClimateField(
            variable=kind,
            grid=spec,
            time=TimeAxis(freq, labels),
            planes=raw,
            source=source,
        )
    finally:
        nc.close()


def write_climate(field: ClimateField, path: str, ascending_lat: bool = False):
    """Write a ClimateField as classic NetCDF.

    The writer exists for fixtures and synthetic data; ``ascending_lat``
    stores rows south-first to exercise the reader's normalization.
    """
    axis = field.time
    if axis.frequency == "hourly":
        units = f"hours since {axis.start:%Y-%m-%d %H:%M:%S}"
        step = timedelta(hours=1)
    else:
        units = f"days since {axis.start:%Y-%m-%d} 00:00:00"
        step = timedelta(days=1)
    offsets = np.asarray(
        [(parse_label(lbl, axis.frequency) - axis.start) / step for lbl in axis.labels]
    )

    lats = field.grid.lat_centers()
    lons = field.grid.lon_centers()
    planes = np.where(np.isfinite(field.planes), field.planes, FILL_VALUE)
    if ascending_lat:
        lats = lats[::-1]
        planes = planes[:, ::-1, :]

    fd, tmp = tempfile.mkstemp(dir=os.path.dirname(os.path.abspath(path)), suffix=".nc")
    os.close(fd)
    try:
        nc = netcdf_file(tmp, "w")
        nc.source = field.source
        nc.variable = field.variable.name
        nc.createDimension("time", len(axis))
        nc.createDimension("lat", field.grid.n_rows)
        nc.createDimension("lon", field.grid.n_cols)
        tvar = nc.createVariable("time", "d", ("time",))
        tvar[:] = offsets
        tvar.units = units
        tvar.frequency = axis.frequency
        latv = nc.createVariable("lat", "d", ("lat",))
        latv[:] = lats
        latv.units = "degrees_north"
        lonv = nc.createVariable("lon", "d", ("lon",))
        lonv[:] = lons
        lonv.units = "degrees_east"
        data = nc.createVariable(field.variable.name, "d", ("time", "lat", "lon"))
        data[:] = planes
        data.units = field.variable.units
        data._FillValue = FILL_VALUE
        nc.close()
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_raster(grid, path: str, name: str = "weights"):
    """Write a single value plane as classic NetCDF (no time dimension)."""
    values = np.where(np.isfinite(grid.values), grid.values, FILL_VALUE)
    fd, tmp = tempfile.mkstemp(dir=os.path.dirname(os.path.abspath(path)), suffix=".nc")
    os.close(fd)
    try:
        nc = netcdf_file(tmp, "w")
        nc.createDimension("lat", grid.spec.n_rows)
        nc.createDimension("lon", grid.spec.n_cols)
        latv = nc.createVariable("lat", "d", ("lat",))
        latv[:] = grid.spec.lat_centers()
        latv.units = "degrees_north"
        lonv = nc.createVariable("lon", "d", ("lon",))
        lonv[:] = grid.spec.lon_centers()
        lonv.units = "degrees_east"
        data = nc.createVariable(name, "d", ("lat", "lon"))
        data[:] = values
        data.units = grid.units
        data._FillValue = FILL_VALUE
        nc.close()
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def read_raster(path: str) -> Grid:
    """Read a single-plane NetCDF raster written by :func:`write_raster`."""
    try:
        nc = netcdf_file(path, "r", mmap=False)
    except Exception as exc:
        raise IngestionError(f"{path}: not a readable NetCDF file ({exc})") from exc
    try:
        lat_name, lat = _find_coord(nc, ("lat", "latitude"), path)
        lon_name, lon = _find_coord(nc, ("lon", "longitude"), path)
        data_var = None
        for name, var in nc.variables.items():
            if name not in (lat_name, lon_name) and len(var.dimensions) == 2:
                data_var = var
                break
        if data_var is None:
            raise IngestionError(f"{path}: no 2-D data variable")
        raw = np.asarray(data_var[:], dtype=np.float64).copy()
        fill = _attr(data_var, "_FillValue", None)
        if fill is not None:
            raw[np.isclose(raw, float(fill), rtol=0.0, atol=1e-6)] = np.nan
        lat_step = _uniform_step(lat, "latitude", path)
        lon_step = _uniform_step(lon, "longitude", path)
        if lat_step > 0:
            lat = lat[::-1]
            raw = raw[::-1, :]
        spec = GridSpec(
            lat_origin=float(lat[0]),
            lon_origin=float(lon[0]),
            resolution=abs(lat_step),
            n_rows=len(lat),
            n_cols=len(lon),
        )
        return Grid(spec, raw, units=_attr(data_var, "units", "") or "")
    finally:
        nc.close()


def read_boundaries(path: str, level: str) -> list[AdminUnit]:
    """Load GADM0/GADM1 units from a GeoJSON FeatureCollection.

    Features need GID_0 (and GID_1/NAME_1 at level gadm1) properties;
    rings must be closed; Polygon and MultiPolygon geometries are
    normalized to multi-polygons.
    """
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    if doc.get("type") != "FeatureCollection":
        raise BoundaryError(f"{path}: not a GeoJSON FeatureCollection")
    units: list[AdminUnit] = []
    seen: set[str] = set()
    for i, feature in enumerate(doc.get("features", [])):
        props = feature.get("properties") or {}
        label = props.get("GID_1") or props.get("GID_0") or f"feature {i}"
        if level == "gadm0":
            unit_id = props.get("GID_0")
            name = props.get("COUNTRY") or props.get("NAME_0") or ""
        else:
            unit_id = props.get("GID_1")
            name = props.get("NAME_1") or ""
        if not unit_id:
            raise BoundaryError(f"{path}: {label} lacks the {level} id property")
        if unit_id in seen:
            raise KeyCollisionError(f"{path}: duplicate {level} id {unit_id!r}")
        seen.add(unit_id)
        geom = feature.get("geometry") or {}
        gtype = geom.get("type")
        coords = geom.get("coordinates")
        if gtype == "Polygon":
            polygons = [coords]
        elif gtype == "MultiPolygon":
            polygons = coords
        else:
            raise BoundaryError(f"{path}: {label} has geometry type {gtype!r}")
        for rings in polygons:
            for ring in rings:
                if len(ring) < 4 or ring[0] != ring[-1]:
                    raise BoundaryError(f"{path}: {label} has an unclosed ring")
        units.append(
            AdminUnit(
                unit_id=unit_id,
                level=level,
                name=name,
                geometry=make_geometry(polygons, context=label),
            )
        )
    return units


def _sorted_units(table: UnitTable) -> list[str]:
    return sorted(table.values)


def table_records(table: UnitTable) -> list[tuple[str, str, float | None]]:
    """(unit_id, period, value-or-None) triples, unit then period ascending."""
    records = []
    for unit_id in _sorted_units(table):
        row = table.values[unit_id]
        for label, value in zip(table.time.labels, row):
            records.append((unit_id, label, None if np.isnan(value) else float(value)))
    return records


def _fmt_csv(value: float | None) -> str:
    return "" if value is None else f"{value:.12g}"


def render_table(table: UnitTable, layout: str, fmt: str) -> bytes:
    """Serialize a UnitTable to bytes; deterministic for identical tables."""
    if layout not in LAYOUTS:
        raise ValidationError(f"layout must be one of {LAYOUTS}, got {layout!r}")
    if fmt not in FORMATS:
        raise ValidationError(f"format must be one of {FORMATS}, got {fmt!r}")
    if not table.values:
        raise ValidationError("cannot export an empty table")
    labels = list(table.time.labels)
    units = _sorted_units(table)

    if fmt == "csv":
        buf = StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        if layout == "wide":
            writer.writerow(["unit_id", *labels])
            for unit_id in units:
                row = table.values[unit_id]
                writer.writerow(
                    [unit_id]
                    + [_fmt_csv(None if np.isnan(v) else float(v)) for v in row]
                )
        else:
            writer.writerow(["unit_id", "period", "value"])
            for unit_id, period, value in table_records(table):
                writer.writerow([unit_id, period, _fmt_csv(value)])
        return buf.getvalue().encode("utf-8")

    if fmt == "json":
        if layout == "wide":
            rows = []
            for unit_id in units:
                row = table.values[unit_id]
                obj = {"unit_id": unit_id}
                for label, v in zip(labels, row):
                    obj[label] = None if np.isnan(v) else float(v)
                rows.append(obj)
        else:
            rows = [
                {"unit_id": u, "period": p, "value": v} for u, p, v in table_records(table)
            ]
        return (json.dumps(rows, ensure_ascii=False, separators=(",", ":")) + "\n").encode(
            "utf-8"
        )

    # parquet
    if layout == "wide":
        arrays = [pa.array(units, type=pa.string())]
        names = ["unit_id"]
        for k, label in enumerate(labels):
            col = [
                None if np.isnan(table.values[u][k]) else float(table.values[u][k])
                for u in units
            ]
            arrays.append(pa.array(col, type=pa.float64()))
            names.append(label)
    else:
        records = table_records(table)
        arrays = [
            pa.array([r[0] for r in records], type=pa.string()),
            pa.array([r[1] for r in records], type=pa.string()),
            pa.array([r[2] for r in records], type=pa.float64()),
        ]
        names = ["unit_id", "period", "value"]
    sink = pa.BufferOutputStream()
    pq.write_table(pa.table(dict(zip(names, arrays))), sink, compression="snappy")
    return sink.getvalue().to_pybytes()


def export_table(table: UnitTable, layout: str, fmt: str, path: str):
    """Write a serialized UnitTable to disk (temp file, then atomic rename)."""
    payload = render_table(table, layout, fmt)
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".part")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _infer_frequency(label: str) -> str:
    return {4: "annual", 7: "monthly", 10: "daily", 13: "hourly"}.get(
        len(label), "daily"
    )


def _records_to_table(
    records: list[tuple[str, str, float | None]],
    level: str,
    variable: VariableKind,
    scheme: WeightScheme,
) -> UnitTable:
    labels = sorted({p for _, p, _ in records})
    if not labels:
        raise ValidationError("no records to import")
    index = {p: i for i, p in enumerate(labels)}
    values: dict[str, np.ndarray] = {}
    for unit_id, period, value in records:
        row = values.setdefault(unit_id, np.full(len(labels), np.nan))
        row[index[period]] = np.nan if value is None else value
    axis = TimeAxis(_infer_frequency(labels[0]), tuple(labels))
    return UnitTable(level=level, time=axis, variable=variable, scheme=scheme, values=values)


def read_table(
    path: str,
    fmt: str,
    layout: str,
    *,
    level: str,
    variable: VariableKind,
    scheme: WeightScheme,
) -> UnitTable:
    """Re-import an exported table. Metadata is supplied by the caller; the
    file contributes units, periods, values, and NA positions."""
    records: list[tuple[str, str, float | None]] = []
    if fmt == "csv":
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            header = next(reader)
            if layout == "wide":
                labels = header[1:]
                for row in reader:
                    for label, cell in zip(labels, row[1:]):
                        records.append((row[0], label, float(cell) if cell else None))
            else:
                for row in reader:
                    records.append((row[0], row[1], float(row[2]) if row[2] else None))
    elif fmt == "json":
        with open(path, encoding="utf-8") as fh:
            rows = json.load(fh)
        if layout == "wide":
            for obj in rows:
                for key, value in obj.items():
                    if key != "unit_id":
                        records.append((obj["unit_id"], key, value))
        else:
            records = [(o["unit_id"], o["period"], o["value"]) for o in rows]
    elif fmt == "parquet":
        tbl = pq.read_table(path)
        cols = {name: tbl.column(name).to_pylist() for name in tbl.column_names}
        if layout == "wide":
            for name in tbl.column_names:
                if name == "unit_id":
                    continue
                for unit_id, value in zip(cols["unit_id"], cols[name]):
                    records.append((unit_id, name, value))
        else:
            records = list(zip(cols["unit_id"], cols["period"], cols["value"]))
    else:
        raise ValidationError(f"format must be one of {FORMATS}, got {fmt!r}")
    return _records_to_table(records, level, variable, scheme)


def _spec_dict(spec: GridSpec) -> dict:
    return {
        "lat_origin": spec.lat_origin,
        "lon_origin": spec.lon_origin,
        "resolution": spec.resolution,
        "n_rows": spec.n_rows,
        "n_cols": spec.n_cols,
    }


def coverage_fingerprint(boundaries_path: str, spec: GridSpec) -> str:
    """Content hash identifying one (boundaries file, grid frame) pairing."""
    digest = hashlib.sha256()
    with open(boundaries_path, "rb") as fh:
        digest.update(fh.read())
    digest.update(json.dumps(_spec_dict(spec), sort_keys=True).encode())
    return digest.hexdigest()[:16]


def save_coverage(coverage: CoverageMatrix, path: str):
    """Cache a CoverageMatrix as a columnar parquet sidecar."""
    unit_ids: list[str] = []
    cells: list[int] = []
    fractions: list[float] = []
    for unit_id in coverage.units():
        for j, f in coverage.entries[unit_id]:
            unit_ids.append(unit_id)
            cells.append(j)
            fractions.append(f)
    meta = {
        b"wclim_level": coverage.level.encode(),
        b"wclim_grid": json.dumps(_spec_dict(coverage.grid), sort_keys=True).encode(),
        b"wclim_units": json.dumps(coverage.units()).encode(),
    }
    tbl = pa.table(
        {
            "unit_id": pa.array(unit_ids, type=pa.string()),
            "cell_index": pa.array(cells, type=pa.int64()),
            "fraction": pa.array(fractions, type=pa.float64()),
        }
    ).replace_schema_metadata(meta)
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".part")
    os.close(fd)
    try:
        pq.write_table(tbl, tmp, compression="snappy")
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def load_coverage(path: str) -> CoverageMatrix:
    tbl = pq.read_table(path)
    meta = tbl.schema.metadata or {}
    try:
        level = meta[b"wclim_level"].decode()
        spec = GridSpec(**json.loads(meta[b"wclim_grid"]))
        unit_ids = json.loads(meta[b"wclim_units"])
    except KeyError:
        raise IngestionError(f"{path}: not a coverage cache file") from None
    entries: dict[str, list[tuple[int, float]]] = {u: [] for u in unit_ids}
    for unit_id, cell, frac in zip(
        tbl.column("unit_id").to_pylist(),
        tbl.column("cell_index").to_pylist(),
        tbl.column("fraction").to_pylist(),
    ):
        entries.setdefault(unit_id, []).append((cell, frac))
    return CoverageMatrix(level=level, grid=spec, entries=entries)
