import numpy as np
import pytest
from hypothesis import given, strategies as st

from wclim.errors import AlignmentError, UnsupportedPeriodError, ValidationError
from wclim.grid import Grid, GridSpec, block_aggregate
from wclim.weights import (
    WeightLayer,
    WeightScheme,
    concurrent_base_year,
    concurrent_layer_source,
    concurrent_weight,
    cropland_weight,
    nightlight_weight,
    population_weight,
    resample_to_frame,
    unweighted_layer,
)


class TestWeightScheme:
    def test_fixed_base_kinds_need_valid_year(self):
        WeightScheme("population", 2000)
        with pytest.raises(ValidationError):
            WeightScheme("population", 2001)
        with pytest.raises(ValidationError):
            WeightScheme("nightlight", None)

    def test_unweighted_takes_no_year(self):
        WeightScheme("unweighted")
        with pytest.raises(ValidationError):
            WeightScheme("unweighted", 2000)

    def test_concurrent_dynamic_or_decade(self):
        WeightScheme("concurrent")
        WeightScheme("concurrent", 1950)
        with pytest.raises(ValidationError):
            WeightScheme("concurrent", 1955)

    def test_unknown_kind(self):
        with pytest.raises(ValidationError):
            WeightScheme("gdp", 2000)


class TestWeightLayer:
    def test_use_area_tied_to_kind(self):
        spec = GridSpec(0.25, 0.25, 0.5, 1, 1)
        grid = Grid(spec, np.ones((1, 1)))
        WeightLayer(WeightScheme("population", 2000), grid, use_area=True)
        with pytest.raises(ValidationError):
            WeightLayer(WeightScheme("population", 2000), grid, use_area=False)
        with pytest.raises(ValidationError):
            WeightLayer(WeightScheme("cropland", 2000), grid, use_area=True)

    def test_negative_weights_rejected(self):
        spec = GridSpec(0.25, 0.25, 0.5, 1, 1)
        with pytest.raises(ValidationError):
            WeightLayer(WeightScheme("population", 2000), Grid(spec, -np.ones((1, 1))), True)


class TestPopulationWeight:
    def test_zero_density_gives_zero_weights(self):
        spec = GridSpec(0.25, 0.25, 0.5, 2, 2)
        layer = population_weight(Grid(spec, np.zeros((2, 2))), spec, 2000)
        assert np.all(layer.grid.values == 0.0)
        assert layer.use_area is True

    def test_equator_vs_sixty_ratio(self):
        spec = GridSpec(60.0, 0.0, 60.0, 2, 1)  # rows at 60N and 0N
        density = Grid(spec, np.full((2, 1), 3.0))
        layer = population_weight(density, spec, 2005)
        ratio = layer.grid.values[1, 0] / layer.grid.values[0, 0]
        assert ratio == pytest.approx(2.0, rel=1e-15)

    def test_density_times_area_at_equator(self):
        spec = GridSpec(0.0, 0.0, 0.5, 1, 2)
        layer = population_weight(Grid(spec, np.array([[1.0, 2.0]])), spec, 2010)
        assert layer.grid.values[0, 0] == 0.25
        assert layer.grid.values[0, 1] == 0.5

    def test_negative_density_rejected(self):
        spec = GridSpec(0.25, 0.25, 0.5, 1, 1)
        with pytest.raises(ValidationError):
            population_weight(Grid(spec, np.array([[-1.0]])), spec, 2000)

    def test_frame_mismatch_rejected(self):
        spec = GridSpec(0.25, 0.25, 0.5, 1, 1)
        other = GridSpec(0.75, 0.25, 0.5, 1, 1)
        with pytest.raises(AlignmentError):
            population_weight(Grid(spec, np.ones((1, 1))), other, 2000)


class TestNightlightWeight:
    def test_toy_threshold_then_mean(self):
        fine = GridSpec(0.375, 0.125, 0.25, 2, 2)
        target = GridSpec(0.25, 0.25, 0.5, 1, 1)
        dn = Grid(fine, np.array([[29.0, 29.0], [31.0, 33.0]]))
        layer = nightlight_weight(dn, target, 2015)
        assert layer.grid.values[0, 0] == 16.0
        assert layer.use_area is True

    def test_dn_29_zeroed_everywhere(self):
        fine = GridSpec(0.375, 0.125, 0.25, 2, 2)
        target = GridSpec(0.25, 0.25, 0.5, 1, 1)
        layer = nightlight_weight(Grid(fine, np.full((2, 2), 29.0)), target, 2015)
        assert np.all(layer.grid.values == 0.0)

    def test_dn_30_kept_everywhere(self):
        fine = GridSpec(0.375, 0.125, 0.25, 2, 2)
        target = GridSpec(0.25, 0.25, 0.5, 1, 1)
        layer = nightlight_weight(Grid(fine, np.full((2, 2), 30.0)), target, 2015)
        assert np.all(layer.grid.values == 30.0)

    def test_dn_out_of_range_rejected(self):
        fine = GridSpec(0.375, 0.125, 0.25, 2, 2)
        target = GridSpec(0.25, 0.25, 0.5, 1, 1)
        with pytest.raises(ValidationError):
            nightlight_weight(Grid(fine, np.full((2, 2), 64.0)), target, 2015)
        with pytest.raises(ValidationError):
            nightlight_weight(Grid(fine, np.full((2, 2), -1.0)), target, 2015)

    def test_thresholding_never_raises_block_mean(self):
        rng = np.random.default_rng(12)
        fine = GridSpec(14.875, 0.125, 0.25, 60, 60)
        dn_values = np.floor(rng.uniform(0, 64, size=(60, 60)))
        target = GridSpec(11.25, 3.75, 7.5, 2, 2)
        dn = Grid(fine, dn_values)
        layer = nightlight_weight(dn, target, 2015)
        plain = block_aggregate(dn, 30)
        assert np.all(layer.grid.values <= plain.values + 1e-12)


class TestCroplandWeight:
    def test_constant_field(self):
        fine = GridSpec(0.4375, 0.0625, 0.125, 4, 4)
        target = GridSpec(0.25, 0.25, 0.5, 1, 1)
        layer = cropland_weight(Grid(fine, np.full((4, 4), 7.5)), target, 2000)
        assert layer.grid.values[0, 0] == 7.5
        assert layer.use_area is False

    def test_three_by_three_mean(self):
        res = 0.25 / 3.0
        fine = GridSpec(0.25 + res, 0.25 - res, res, 3, 3)
        target = GridSpec(0.25, 0.25, 0.25, 1, 1)
        values = np.zeros((3, 3))
        values[2, 2] = 9.0
        layer = cropland_weight(Grid(fine, values), target, 2005)
        assert layer.grid.values[0, 0] == 1.0

    def test_negative_area_rejected(self):
        fine = GridSpec(0.375, 0.125, 0.25, 2, 2)
        target = GridSpec(0.25, 0.25, 0.5, 1, 1)
        with pytest.raises(ValidationError):
            cropland_weight(Grid(fine, np.array([[1.0, 1.0], [1.0, -0.5]])), target, 2000)


class TestConcurrent:
    @pytest.mark.parametrize(
        "year,base", [(1907, 1900), (1900, 1900), (1909, 1900), (2023, 2020), (1955, 1950)]
    )
    def test_decade_floor(self, year, base):
        assert concurrent_base_year(year) == base

    @pytest.mark.parametrize("year", [1899, 1850, 2030])
    def test_unsupported_period(self, year):
        with pytest.raises(UnsupportedPeriodError):
            concurrent_base_year(year)

    @given(st.integers(min_value=1900, max_value=2029))
    def test_constant_within_decade_and_idempotent(self, year):
        base = concurrent_base_year(year)
        assert base == concurrent_base_year(10 * (year // 10))
        assert concurrent_base_year(base) == base

    def test_layer_source_archives(self):
        assert concurrent_layer_source(1900) == "hyde"
        assert concurrent_layer_source(2010) == "hyde"
        assert concurrent_layer_source(2020) == "gpw"

    def test_concurrent_layer_use_area_false(self):
        spec = GridSpec(0.25, 0.25, 0.5, 2, 2)
        layer = concurrent_weight(Grid(spec, np.ones((2, 2))), spec, 2000)
        assert layer.use_area is False
        assert layer.scheme == WeightScheme("concurrent", 2000)


class TestUnweighted:
    def test_constant_one_plane(self):
        spec = GridSpec(45.0, 0.0, 0.5, 3, 4)
        layer = unweighted_layer(spec)
        assert np.all(layer.grid.values == 1.0)
        assert layer.use_area is True

    def test_no_scheme_emits_negatives(self):
        # every construction path yields nonnegative or missing weights
        fine = GridSpec(0.375, 0.125, 0.25, 2, 2)
        target = GridSpec(0.25, 0.25, 0.5, 1, 1)
        values = np.array([[0.0, np.nan], [63.0, 12.0]])
        layer = nightlight_weight(Grid(fine, values), target, 2015)
        finite = layer.grid.values[np.isfinite(layer.grid.values)]
        assert np.all(finite >= 0.0)


class TestResampleToFrame:
    def test_identity(self):
        spec = GridSpec(0.75, 0.25, 0.5, 2, 2)
        g = Grid(spec, np.ones((2, 2)))
        assert resample_to_frame(g, spec) is g

    def test_block_then_half_offset(self):
        fine = GridSpec(1.875, 0.125, 0.25, 8, 8)
        coarse_offset = GridSpec(1.5, 0.5, 0.5, 3, 3)  # half cell off the blocked frame
        out = resample_to_frame(Grid(fine, np.full((8, 8), 2.0)), coarse_offset)
        assert out.spec.same_frame(coarse_offset)
        assert np.all(out.values == 2.0)

    def test_incompatible_raises(self):
        spec = GridSpec(0.75, 0.25, 0.5, 2, 2)
        bad = GridSpec(0.6, 0.3, 0.3, 2, 2)
        with pytest.raises(AlignmentError):
            resample_to_frame(Grid(spec, np.ones((2, 2))), bad)
