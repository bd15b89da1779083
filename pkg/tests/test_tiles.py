import numpy as np
import pytest

from sivgrip.errors import ConfigurationError
from sivgrip.tiles import FeatureBounds, TilingConfig, q_value, q_values, tile_code

from oracles import reference_tile_code


def two_feature_config(tilings=8, tiles=8):
    bounds = FeatureBounds((0.0, 0.0), (1.0, 1.0))
    return TilingConfig.uniform(bounds, tilings, (tiles, tiles))


def test_lower_corner_maps_to_index_zero():
    bounds = FeatureBounds((0.0, 0.0, 1.0), (1.0, 1.0, 2.0))
    config = TilingConfig.uniform(bounds, 1, (8, 8, 1), (False, False, True))
    assert tile_code((0.0, 0.0, 1.0), config) == (0,)


def test_same_cell_inputs_share_tiles():
    bounds = FeatureBounds((0.0, 0.0), (1.0, 1.0))
    config = TilingConfig.uniform(bounds, 1, (8, 8))
    # both points sit inside cell (1, 2) of the single zero-offset tiling
    a = tile_code((0.130, 0.260), config)
    b = tile_code((0.132, 0.262), config)
    assert a == b


def test_eight_tilings_give_eight_distinct_indices():
    config = two_feature_config()
    active = tile_code((0.37, 0.81), config)
    assert len(active) == config.tilings
    assert len(set(active)) == config.tilings
    assert all(0 <= i < config.table_size for i in active)


def test_matches_reference_tiler_on_dense_grid():
    config = two_feature_config()
    grid = np.linspace(0.0, 1.0, 50)
    for x in grid:
        for y in grid:
            expected = reference_tile_code(
                (x, y),
                config.bounds.lower,
                config.bounds.upper,
                config.tilings,
                config.tiles_per_dim,
                config.offsets,
            )
            assert tile_code((x, y), config) == expected


def test_deterministic_for_identical_inputs():
    config = two_feature_config()
    phi = (0.123456, 0.654321)
    assert tile_code(phi, config) == tile_code(phi, config)


def test_out_of_bounds_features_clamp_to_bounds():
    config = two_feature_config()
    assert tile_code((-5.0, 2.0), config) == tile_code((0.0, 1.0), config)


def test_dimension_mismatch_is_a_configuration_error():
    config = two_feature_config()
    with pytest.raises(ConfigurationError):
        tile_code((0.1, 0.2, 0.3), config)


def test_invalid_bounds_rejected():
    with pytest.raises(ConfigurationError):
        FeatureBounds((0.0, 1.0), (1.0, 1.0))
    with pytest.raises(ConfigurationError):
        FeatureBounds((0.0,), (float("inf"),))


def test_offsets_validated():
    bounds = FeatureBounds((0.0,), (1.0,))
    with pytest.raises(ConfigurationError):
        TilingConfig(bounds, 1, (4,), ((1.5,),))


def test_table_size_counts_guard_cells():
    config = two_feature_config(tilings=8, tiles=8)
    assert config.table_size == 8 * 9 * 9


def test_q_value_zero_weights():
    config = two_feature_config()
    weights = np.zeros((config.table_size, 3))
    active = tile_code((0.5, 0.5), config)
    assert q_value(weights, active, 0) == 0.0


def test_q_value_constant_weights_scale_with_tilings():
    config = two_feature_config()
    weights = np.full((config.table_size, 2), 0.25)
    active = tile_code((0.2, 0.9), config)
    assert q_value(weights, active, 1) == pytest.approx(0.25 * config.tilings)


def test_q_value_matches_direct_summation():
    config = two_feature_config()
    rng = np.random.default_rng(7)
    weights = rng.normal(size=(config.table_size, 4))
    active = tile_code((0.33, 0.77), config)
    for action in range(4):
        direct = sum(weights[i, action] for i in active)
        assert q_value(weights, active, action) == direct
    vector = q_values(weights, active)
    for action in range(4):
        assert vector[action] == q_value(weights, active, action)
