"""Tile coding over a bounded feature space.

A feature space is covered by several overlapping grid tilings; an input
activates exactly one tile per tiling and its value is the sum of the
active tiles' weights. Continuous dimensions get offset grids so nearby
inputs share tiles; discrete dimensions (hand state, bias) get one cell
per distinct value and no offset so they are never smeared.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import ConfigurationError

ActiveTileSet = tuple[int, ...]


@dataclass(frozen=True)
class FeatureBounds:
    """Per-dimension closed bounds [lower, upper] of the feature space."""

    lower: tuple[float, ...]
    upper: tuple[float, ...]

    def __post_init__(self):
        problems = []
        if len(self.lower) != len(self.upper):
            problems.append("lower and upper bounds differ in length")
        if not self.lower:
            problems.append("feature count must be >= 1")
        for d, (lo, hi) in enumerate(zip(self.lower, self.upper)):
            if not (math.isfinite(lo) and math.isfinite(hi)):
                problems.append(f"bounds for feature {d} are not finite")
            elif not lo < hi:
                problems.append(f"bounds for feature {d} must satisfy lower < upper")
        if problems:
            raise ConfigurationError(problems)

    @property
    def feature_count(self) -> int:
        return len(self.lower)


@dataclass(frozen=True)
class TilingConfig:
    """Grid layout of the tile coder.

    ``offsets[t][d]`` is tiling t's shift in dimension d, expressed as a
    fraction of one tile width in [0, 1). Each dimension with k tiles is
    allocated k + 1 cells so offset grids never run off the table.
    """

    bounds: FeatureBounds
    tilings: int
    tiles_per_dim: tuple[int, ...]
    offsets: tuple[tuple[float, ...], ...]
    cells_per_dim: tuple[int, ...] = field(init=False)
    cells_per_tiling: int = field(init=False)
    table_size: int = field(init=False)

    def __post_init__(self):
        problems = []
        n = self.bounds.feature_count
        if self.tilings < 1:
            problems.append("number of tilings must be >= 1")
        if len(self.tiles_per_dim) != n:
            problems.append("tiles_per_dim length must match feature count")
        if any(t < 1 for t in self.tiles_per_dim):
            problems.append("each dimension needs >= 1 tile")
        if len(self.offsets) != self.tilings:
            problems.append("offsets must have one row per tiling")
        for t, row in enumerate(self.offsets):
            if len(row) != n:
                problems.append(f"offset row {t} must have one entry per feature")
                continue
            if any(not (0.0 <= o < 1.0) for o in row):
                problems.append(f"offset row {t} has entries outside [0, 1)")
        if problems:
            raise ConfigurationError(problems)
        cells = tuple(t + 1 for t in self.tiles_per_dim)
        per_tiling = math.prod(cells)
        object.__setattr__(self, "cells_per_dim", cells)
        object.__setattr__(self, "cells_per_tiling", per_tiling)
        object.__setattr__(self, "table_size", self.tilings * per_tiling)

    @classmethod
    def uniform(
        cls,
        bounds: FeatureBounds,
        tilings: int,
        tiles_per_dim: Sequence[int],
        discrete_dims: Sequence[bool] | None = None,
    ) -> "TilingConfig":
        """Build the standard layout: tiling t shifted by t/tilings of a
        tile width in every continuous dimension, zero in discrete ones."""
        n = bounds.feature_count
        discrete = tuple(discrete_dims) if discrete_dims is not None else (False,) * n
        if len(discrete) != n:
            raise ConfigurationError("discrete_dims length must match feature count")
        offsets = tuple(
            tuple(0.0 if discrete[d] else t / tilings for d in range(n))
            for t in range(tilings)
        )
        return cls(bounds, tilings, tuple(tiles_per_dim), offsets)


def tile_code(features: Sequence[float], config: TilingConfig) -> ActiveTileSet:
    """Map a feature vector to one tile index per tiling.

    Out-of-bounds values are clamped to the bounds before coding, so the
    result is total over all finite inputs of the right dimension.
    """
    n = config.bounds.feature_count
    if len(features) != n:
        raise ConfigurationError(
            f"feature vector has {len(features)} entries, bounds expect {n}"
        )
    lo = config.bounds.lower
    hi = config.bounds.upper
    tiles = config.tiles_per_dim
    cells = config.cells_per_dim
    active = []
    for t in range(config.tilings):
        row = config.offsets[t]
        index = 0
        for d in range(n):
            x = min(max(float(features[d]), lo[d]), hi[d])
            width = (hi[d] - lo[d]) / tiles[d]
            cell = int(math.floor((x - lo[d]) / width + row[d]))
            if cell < 0:
                cell = 0
            elif cell >= cells[d]:
                cell = cells[d] - 1
            index = index * cells[d] + cell
        active.append(t * config.cells_per_tiling + index)
    return tuple(active)


def q_value(weights: np.ndarray, active: ActiveTileSet, action: int) -> float:
    """Sum the active tiles' weights for one action."""
    total = 0.0
    for tile in active:
        total += float(weights[tile, action])
    return total


def q_values(weights: np.ndarray, active: ActiveTileSet) -> np.ndarray:
    """Per-action value vector for an active tile set."""
    out = weights[active[0]].astype(np.float64, copy=True)
    for tile in active[1:]:
        out += weights[tile]
    return out
