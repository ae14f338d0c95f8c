import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from oracles import closest_rank_percentile
from wclim.aggregate import UnitTable
from wclim.errors import FrequencyError, ValidationError
from wclim.extremes import (
    ThresholdSpec,
    apply_threshold,
    cumulative_exceedance,
    exceedance_count,
    relative_threshold,
    unit_thresholds,
)
from wclim.temporal import VARIABLES, TimeAxis
from wclim.weights import WeightScheme


class TestRelativeThreshold:
    def test_one_to_hundred_p95(self):
        assert relative_threshold(np.arange(1.0, 101.0), 95.0) == 95.05

    def test_matches_reference_on_random_data(self):
        rng = np.random.default_rng(31)
        for _ in range(25):
            values = rng.normal(size=rng.integers(2, 200))
            p = float(rng.uniform(0.5, 99.5))
            assert relative_threshold(values, p) == pytest.approx(
                closest_rank_percentile(values, p), rel=1e-12
            )

    def test_high_percentile_approaches_max(self):
        values = np.arange(1.0, 101.0)
        assert relative_threshold(values, 99.999) == pytest.approx(100.0, abs=1e-2)

    def test_constant_series(self):
        assert relative_threshold(np.full(40, 3.25), 17.0) == 3.25

    def test_all_na_history_gives_na(self):
        assert math.isnan(relative_threshold(np.full(10, np.nan), 95.0))

    def test_nas_excluded(self):
        values = np.array([np.nan, 1.0, 2.0, 3.0, np.nan])
        assert relative_threshold(values, 50.0) == 2.0

    def test_percentile_domain(self):
        with pytest.raises(ValidationError):
            relative_threshold(np.arange(10.0), 0.0)
        with pytest.raises(ValidationError):
            relative_threshold(np.arange(10.0), 100.0)

    @given(st.floats(min_value=1.0, max_value=99.0), st.floats(min_value=1.0, max_value=99.0))
    def test_monotone_in_p(self, p1, p2):
        values = np.array([5.0, 1.0, 9.0, 3.0, 7.0, 2.0])
        lo, hi = sorted((p1, p2))
        assert relative_threshold(values, lo) <= relative_threshold(values, hi)

    def test_affine_equivariance(self):
        rng = np.random.default_rng(32)
        values = rng.normal(size=60)
        a, b = 2.5, -7.0
        for p in (10.0, 50.0, 90.5):
            assert relative_threshold(a * values + b, p) == pytest.approx(
                a * relative_threshold(values, p) + b, rel=1e-12
            )


def daily_axis(start, n):
    return TimeAxis.range("daily", start, n)


class TestExceedanceCount:
    def test_all_below_counts_zero(self):
        axis = daily_axis("2001-01-01", 31)
        _, out = exceedance_count(np.zeros(31), axis, 5.0, "above", "monthly")
        assert out.tolist() == [0.0]

    def test_july_synthetic_month(self):
        axis = daily_axis("2001-07-01", 31)
        values = np.concatenate([np.full(10, 32.0), np.full(21, 30.0)])
        _, out = exceedance_count(values, axis, 31.5, "above", "monthly")
        assert out.tolist() == [10.0]

    def test_theta_below_everything_counts_non_na_days(self):
        axis = daily_axis("2001-01-01", 31)
        values = np.ones(31)
        values[4] = np.nan
        _, out = exceedance_count(values, axis, -1e18, "above", "monthly")
        assert out.tolist() == [30.0]

    def test_strict_inequality(self):
        axis = daily_axis("2001-01-01", 31)
        _, above = exceedance_count(np.full(31, 5.0), axis, 5.0, "above", "monthly")
        _, below = exceedance_count(np.full(31, 5.0), axis, 5.0, "below", "monthly")
        assert above.tolist() == [0.0]
        assert below.tolist() == [0.0]

    def test_above_below_equal_partition(self):
        rng = np.random.default_rng(33)
        axis = daily_axis("2001-01-01", 90)
        values = np.round(rng.normal(size=90), 1)
        values[rng.random(90) < 0.1] = np.nan
        theta = 0.2
        _, above = exceedance_count(values, axis, theta, "above", "annual")
        _, below = exceedance_count(values, axis, theta, "below", "annual")
        finite = values[np.isfinite(values)]
        equal = np.count_nonzero(finite == theta)
        assert above[0] + below[0] + equal == len(finite)

    def test_all_na_period_is_na(self):
        axis = daily_axis("2001-01-01", 59)
        values = np.ones(59)
        values[31:] = np.nan  # February entirely missing
        _, out = exceedance_count(values, axis, 0.5, "above", "monthly")
        assert out[0] == 31.0
        assert math.isnan(out[1])

    def test_na_threshold_gives_na_counts(self):
        axis = daily_axis("2001-01-01", 31)
        _, out = exceedance_count(np.ones(31), axis, float("nan"), "above", "monthly")
        assert math.isnan(out[0])

    def test_non_daily_rejected(self):
        axis = TimeAxis.range("monthly", "2001-01", 12)
        with pytest.raises(FrequencyError):
            exceedance_count(np.ones(12), axis, 0.0, "above", "annual")

    def test_monotone_non_increasing_in_theta(self):
        rng = np.random.default_rng(34)
        axis = daily_axis("2001-01-01", 365)
        values = rng.normal(15, 10, size=365)
        thetas = np.linspace(values.min() - 1, values.max() + 1, 20)
        counts = [
            exceedance_count(values, axis, float(t), "above", "annual")[1][0]
            for t in thetas
        ]
        assert all(a >= b for a, b in zip(counts, counts[1:]))


class TestCumulativeExceedance:
    def test_spec_example(self):
        axis = daily_axis("2001-01-01", 3)
        _, out = cumulative_exceedance(np.array([5.0, 7.0, 9.0]), axis, 6.0, "above", "annual")
        assert out[0] == 4.0

    def test_theta_at_or_above_max_gives_zero(self):
        axis = daily_axis("2001-01-01", 31)
        _, out = cumulative_exceedance(np.full(31, 9.0), axis, 9.0, "above", "monthly")
        assert out[0] == 0.0

    def test_below_direction(self):
        axis = daily_axis("2001-01-01", 3)
        _, out = cumulative_exceedance(np.array([5.0, 7.0, 9.0]), axis, 6.0, "below", "annual")
        assert out[0] == 1.0

    def test_linearity_when_all_above(self):
        axis = daily_axis("2001-01-01", 10)
        values = np.linspace(10.0, 20.0, 10)
        _, base = cumulative_exceedance(values, axis, 5.0, "above", "annual")
        delta = 0.75
        _, shifted = cumulative_exceedance(values, axis, 5.0 - delta, "above", "annual")
        assert shifted[0] == pytest.approx(base[0] + 10 * delta, rel=1e-12)

    def test_bounded_by_count_times_range(self):
        rng = np.random.default_rng(35)
        axis = daily_axis("2001-01-01", 365)
        values = rng.normal(0, 5, size=365)
        theta = -1.0
        _, count = exceedance_count(values, axis, theta, "above", "annual")
        _, total = cumulative_exceedance(values, axis, theta, "above", "annual")
        assert 0.0 <= total[0] <= count[0] * (values.max() - theta)

    def test_convex_non_increasing_in_theta(self):
        rng = np.random.default_rng(36)
        axis = daily_axis("2001-01-01", 200)
        values = rng.normal(size=200)
        thetas = np.linspace(-3, 3, 20)
        sums = [
            cumulative_exceedance(values, axis, float(t), "above", "annual")[1][0]
            for t in thetas
        ]
        assert all(a >= b for a, b in zip(sums, sums[1:]))
        # convexity: second differences nonnegative on the uniform theta grid
        second = np.diff(sums, 2)
        assert np.all(second >= -1e-9)


def _daily_table(values_by_unit, start="2000-01-01"):
    n = len(next(iter(values_by_unit.values())))
    axis = daily_axis(start, n)
    return UnitTable(
        "gadm0", axis, VARIABLES["temperature_avg"], WeightScheme("unweighted"),
        {u: np.asarray(v, dtype=float) for u, v in values_by_unit.items()},
    )


class TestThresholdSpecAndTableOps:
    def test_spec_validation(self):
        with pytest.raises(ValidationError):
            ThresholdSpec("relative", "above", 100.0)
        with pytest.raises(ValidationError):
            ThresholdSpec("absolute", "sideways", 1.0)
        with pytest.raises(ValidationError):
            ThresholdSpec("absolute", "above", 1.0, baseline=(2005, 2001))
        with pytest.raises(ValidationError):
            ThresholdSpec("quantile", "above", 1.0)

    def test_unit_thresholds_relative_per_unit(self):
        table = _daily_table({"A": np.arange(366.0), "B": np.arange(366.0) * 2})
        spec = ThresholdSpec("relative", "above", 50.0)
        thresholds = unit_thresholds(table, spec)
        assert thresholds["A"] == pytest.approx(182.5)
        assert thresholds["B"] == pytest.approx(365.0)

    def test_unit_thresholds_baseline_restriction(self):
        values = np.concatenate([np.zeros(366), np.full(365, 100.0)])
        table = _daily_table({"A": values})
        full = unit_thresholds(table, ThresholdSpec("relative", "above", 90.0))
        early = unit_thresholds(
            table, ThresholdSpec("relative", "above", 90.0, baseline=(2000, 2000))
        )
        assert early["A"] == 0.0
        assert full["A"] == 100.0

    def test_apply_threshold_absolute_annual(self):
        values = np.concatenate([np.full(200, 10.0), np.full(166, 30.0)])
        table = _daily_table({"A": values})
        out = apply_threshold(table, ThresholdSpec("absolute", "above", 20.0, period="annual"))
        assert out.time.labels == ("2000",)
        assert out.values["A"].tolist() == [166.0]

    def test_apply_threshold_cumulative_monthly(self):
        table = _daily_table({"A": np.full(366, 12.0)})
        out = apply_threshold(
            table, ThresholdSpec("cumulative", "above", 10.0, period="monthly")
        )
        assert out.time.labels[0] == "2000-01"
        assert out.values["A"][0] == pytest.approx(31 * 2.0)
