"""Command line interface: headless pipeline runs and the HTTP service.

Exit codes: 0 success, 2 validation error (bad flags or query), 1 runtime
error.
"""

from __future__ import annotations

import sys

import click

from .errors import QueryError, ValidationError, WclimError
from .io import FORMATS, LAYOUTS, export_table
from .pipeline import DataRepository, normalize_query, run_query

_data_dir_option = click.option(
    "--data-dir",
    envvar="WCLIM_DATA_DIR",
    required=True,
    type=click.Path(exists=False),
    help="Data directory (or set WCLIM_DATA_DIR).",
)


def _fail(exc: WclimError) -> "NoReturn":  # noqa: F821
    code = getattr(exc, "code", None)
    prefix = f"{code}: " if code else ""
    click.echo(f"error: {prefix}{exc}", err=True)
    sys.exit(2 if isinstance(exc, (QueryError, ValidationError)) else 1)


def _run_and_export(data_dir: str, raw_query: dict, layout: str, fmt: str, out: str):
    try:
        repo = DataRepository(data_dir)
        query = normalize_query(raw_query)
        table = run_query(repo, query)
        if layout not in LAYOUTS:
            raise QueryError("unknown_layout", f"layout must be one of {LAYOUTS}")
        if fmt not in FORMATS:
            raise QueryError("unknown_format", f"format must be one of {FORMATS}")
        export_table(table, layout, fmt, out)
    except WclimError as exc:
        _fail(exc)
    except OSError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)
    click.echo(out)


@click.group()
def main():
    """Weighted aggregation of gridded climate data to administrative units."""


def _aggregate_options(fn):
    for option in reversed(
        [
            click.option("--source", required=True),
            click.option("--variable", required=True),
            click.option("--level", required=True),
            click.option("--weight", default="unweighted", show_default=True),
            click.option("--base-year", type=int, default=None),
            click.option("--freq", "frequency", required=True),
            click.option("--from", "year_from", type=int, required=True),
            click.option("--to", "year_to", type=int, required=True),
            click.option("--layout", default="long", show_default=True),
            click.option("--format", "fmt", default="csv", show_default=True),
            click.option("--out", required=True, type=click.Path()),
        ]
    ):
        fn = option(fn)
    return fn


@main.command()
@_data_dir_option
@_aggregate_options
def aggregate(data_dir, source, variable, level, weight, base_year, frequency,
              year_from, year_to, layout, fmt, out):
    """Run the aggregation pipeline and write the table to a file."""
    raw = {
        "source": source,
        "variable": variable,
        "level": level,
        "weight_kind": weight,
        "base_year": base_year,
        "frequency": frequency,
        "year_from": year_from,
        "year_to": year_to,
    }
    _run_and_export(data_dir, raw, layout, fmt, out)


@main.command()
@_data_dir_option
@_aggregate_options
@click.option("--mode", required=True, help="absolute, relative, or cumulative.")
@click.option("--direction", default="above", show_default=True)
@click.option("--value", type=float, required=True,
              help="Threshold in variable units, or the percentile for relative mode.")
@click.option("--baseline-from", type=int, default=None)
@click.option("--baseline-to", type=int, default=None)
def extremes(data_dir, source, variable, level, weight, base_year, frequency,
             year_from, year_to, layout, fmt, out, mode, direction, value,
             baseline_from, baseline_to):
    """Threshold statistics (counts or residual sums) over daily data."""
    raw = {
        "source": source,
        "variable": variable,
        "level": level,
        "weight_kind": weight,
        "base_year": base_year,
        "frequency": frequency,
        "year_from": year_from,
        "year_to": year_to,
        "threshold": {
            "mode": mode,
            "direction": direction,
            "value": value,
            "baseline_from": baseline_from,
            "baseline_to": baseline_to,
            "period": frequency,
        },
    }
    _run_and_export(data_dir, raw, layout, fmt, out)


@main.command()
@_data_dir_option
@click.option("--level", required=True)
@click.option("--source", required=True, help="Source whose grid frame to cover.")
def coverage(data_dir, level, source):
    """Precompute and cache the coverage matrix for a level and grid frame."""
    try:
        repo = DataRepository(data_dir)
        if level not in repo.boundary_paths:
            raise QueryError("level_not_available", f"no boundaries for {level!r}")
        pairs = [(s, v) for (s, v) in repo.climate_paths if s == source]
        if not pairs:
            raise QueryError("unknown_source", f"no climate files for source {source!r}")
        field = repo.field(*pairs[0])
        matrix = repo.coverage(level, field.grid)
    except WclimError as exc:
        _fail(exc)
    click.echo(f"coverage cached: {level} on {field.grid.shape} grid, "
               f"{len(matrix.entries)} units")


@main.command()
@_data_dir_option
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8000, show_default=True)
def serve(data_dir, host, port):
    """Start the HTTP query service."""
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(data_dir), host=host, port=port, log_level="warning")


if __name__ == "__main__":
    main()
