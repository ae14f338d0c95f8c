"""HTTP query service: catalog, aggregation, downloads, and map previews.

Synchronous request model with a bounded in-process result cache (LRU by
approximate bytes). Query ids are content hashes of the canonicalized query
plus data-file fingerprints, so identical queries get identical ids across
restarts and concurrent duplicates share one computation.
"""

from __future__ import annotations

import threading
from collections import OrderedDict
from dataclasses import dataclass

import numpy as np
from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, Response

from .aggregate import UnitTable
from .errors import QueryError, WclimError
from .io import FORMATS, LAYOUTS, render_table, table_records
from .pipeline import DataRepository, Query, normalize_query, query_id, run_query

PREVIEW_ROWS = 50

_MEDIA_TYPES = {
    "csv": "text/csv; charset=utf-8",
    "json": "application/json",
    "parquet": "application/vnd.apache.parquet",
}


def _error(status: int, code: str, message: str) -> JSONResponse:
    return JSONResponse(
        status_code=status, content={"error": {"code": code, "message": message}}
    )


@dataclass
class _CachedResult:
    query: Query
    table: UnitTable
    nbytes: int


class ResultCache:
    """LRU keyed by result id, bounded by approximate table bytes."""

    def __init__(self, max_bytes: int = 256 * 1024 * 1024):
        self.max_bytes = max_bytes
        self._items: OrderedDict[str, _CachedResult] = OrderedDict()
        self._total = 0
        self._lock = threading.Lock()

    def get(self, key: str) -> _CachedResult | None:
        with self._lock:
            item = self._items.get(key)
            if item is not None:
                self._items.move_to_end(key)
            return item

    def put(self, key: str, item: _CachedResult):
        with self._lock:
            if key in self._items:
                self._total -= self._items[key].nbytes
            self._items[key] = item
            self._items.move_to_end(key)
            self._total += item.nbytes
            while self._total > self.max_bytes and len(self._items) > 1:
                _, evicted = self._items.popitem(last=False)
                self._total -= evicted.nbytes


def _table_bytes(table: UnitTable) -> int:
    return sum(row.nbytes for row in table.values.values()) + 64 * len(table.values)


def _preview_rows(table: UnitTable, limit: int = PREVIEW_ROWS) -> list[dict]:
    rows = []
    for unit_id, period, value in table_records(table)[:limit]:
        rows.append({"unit_id": unit_id, "period": period, "value": value})
    return rows


def _download_name(query: Query, layout: str, fmt: str) -> str:
    parts = [query.source, query.variable, query.level, query.weight_kind]
    if query.base_year is not None:
        parts.append(str(query.base_year))
    if query.threshold is not None:
        parts.append(f"{query.threshold.mode}-{query.threshold.direction}")
    parts.append(f"{query.year_from}-{query.year_to}")
    parts.append(layout)
    return "_".join(parts) + "." + fmt


def create_app(data_dir: str) -> FastAPI:
    """Build the FastAPI app bound to one data directory."""
    repo = DataRepository(data_dir)
    cache = ResultCache()
    compute_locks: dict[str, threading.Lock] = {}
    locks_guard = threading.Lock()

    app = FastAPI(title="wclim", version="0.1.0")
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )
    app.state.repo = repo

    @app.get("/api/v1/catalog")
    def catalog():
        try:
            return repo.catalog()
        except WclimError as exc:
            return _error(503, "index_unavailable", str(exc))

    @app.post("/api/v1/aggregate")
    async def aggregate(request: Request):
        try:
            raw = await request.json()
        except Exception:
            return _error(400, "bad_json", "request body is not valid JSON")
        try:
            query = normalize_query(raw)
            rid = query_id(repo, query)
            with locks_guard:
                lock = compute_locks.setdefault(rid, threading.Lock())
            with lock:
                item = cache.get(rid)
                if item is None:
                    table = run_query(repo, query)
                    item = _CachedResult(query, table, _table_bytes(table))
                    cache.put(rid, item)
        except QueryError as exc:
            return _error(exc.status, exc.code, str(exc))
        except WclimError as exc:
            return _error(400, type(exc).__name__.lower(), str(exc))
        table = item.table
        return {
            "id": rid,
            "level": table.level,
            "frequency": table.time.frequency,
            "periods": list(table.time.labels),
            "units": table.units(),
            "preview": _preview_rows(table),
        }

    @app.get("/api/v1/download")
    def download(id: str, layout: str = "long", format: str = "csv"):
        if layout not in LAYOUTS:
            return _error(400, "unknown_layout", f"layout must be one of {LAYOUTS}")
        if format not in FORMATS:
            return _error(400, "unknown_format", f"format must be one of {FORMATS}")
        item = cache.get(id)
        if item is None:
            return _error(404, "unknown_result", f"no result with id {id!r}")
        payload = render_table(item.table, layout, format)
        return Response(
            content=payload,
            media_type=_MEDIA_TYPES[format],
            headers={
                "Content-Disposition": f'attachment; filename="{_download_name(item.query, layout, format)}"'
            },
        )

    @app.get("/api/v1/preview/geo")
    def preview_geo(id: str, period: str | None = None):
        item = cache.get(id)
        if item is None:
            return _error(404, "unknown_result", f"no result with id {id!r}")
        table = item.table
        if period is None:
            period = table.time.labels[0]
        if period not in table.time.labels:
            return _error(400, "period_outside_result", f"period {period!r} not in result")
        t = table.time.labels.index(period)
        try:
            units = {u.unit_id: u for u in repo.units(table.level)}
        except QueryError as exc:
            return _error(exc.status, exc.code, str(exc))
        features = []
        for unit_id in table.units():
            unit = units.get(unit_id)
            if unit is None:
                continue
            value = float(table.values[unit_id][t])
            is_na = bool(np.isnan(value))
            coordinates = [
                [[list(v) for v in np.vstack([ring, ring[:1]])] for ring in poly]
                for poly in unit.geometry
            ]
            features.append(
                {
                    "type": "Feature",
                    "geometry": {"type": "MultiPolygon", "coordinates": coordinates},
                    "properties": {
                        "unit_id": unit_id,
                        "name": unit.name,
                        "value": None if is_na else value,
                        "na": is_na,
                    },
                }
            )
        return {
            "type": "FeatureCollection",
            "features": features,
            "period": period,
            "id": id,
        }

    return app
