"""Map detector-head activations to one activation vector per predicted box.

Three conventions are supported:

* fully-connected heads: one activation row per proposal, pick the row;
* convolutional heads: take the C channel values at the feature-map cell the
  box center falls into;
* whole-map flattening: per-channel means, for heads whose layer 0 is a
  [W, H, C] backbone map feeding fully-connected layers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InputError


@dataclass(frozen=True)
class BoxGeometry:
    """Axis-aligned box in pixel corner coordinates."""

    x1: float
    y1: float
    x2: float
    y2: float

    def __post_init__(self):
        vals = (self.x1, self.y1, self.x2, self.y2)
        if not all(math.isfinite(v) for v in vals):
            raise InputError(f"box coordinates must be finite, got {vals}")
        if min(vals) < 0:
            raise InputError(f"box coordinates must be >= 0, got {vals}")
        if not (self.x1 < self.x2 and self.y1 < self.y2):
            raise InputError(f"degenerate box: {vals}")

    @property
    def center(self) -> tuple[float, float]:
        return (self.x1 + self.x2) / 2.0, (self.y1 + self.y2) / 2.0

    @property
    def width(self) -> float:
        return self.x2 - self.x1

    @property
    def height(self) -> float:
        return self.y2 - self.y1

    @property
    def area(self) -> float:
        return self.width * self.height

    def as_list(self) -> list[float]:
        return [self.x1, self.y1, self.x2, self.y2]


@dataclass(frozen=True)
class FeatureMap:
    """A [W, H, C] activation map plus the source image size.

    ``values`` is stored row-major as (h, w, c); index order is
    (w = column, h = row) in all cell coordinates.
    """

    values: np.ndarray
    image_width: float
    image_height: float

    def __post_init__(self):
        arr = np.asarray(self.values, dtype=np.float64)
        if arr.ndim != 3 or min(arr.shape) < 1:
            raise InputError(
                f"feature map must be (H, W, C) with all dims >= 1, got {arr.shape}"
            )
        if not np.all(np.isfinite(arr)):
            raise InputError("feature map contains non-finite values")
        if not (self.image_width > 0 and self.image_height > 0):
            raise InputError("image dimensions must be positive")
        object.__setattr__(self, "values", arr)

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @property
    def channels(self) -> int:
        return self.values.shape[2]


def extract_fc_pattern(proposal_activations, proposal_index: int) -> np.ndarray:
    """Row of a [P, Out] activation matrix for one proposal."""
    matrix = np.asarray(proposal_activations, dtype=np.float64)
    if matrix.ndim != 2:
        raise InputError(f"expected a 2-D activation matrix, got shape {matrix.shape}")
    if not 0 <= proposal_index < matrix.shape[0]:
        raise InputError(
            f"proposal index {proposal_index} out of range for {matrix.shape[0]} rows"
        )
    return matrix[proposal_index].copy()


def map_box_to_cell(box: BoxGeometry, fmap: FeatureMap) -> tuple[int, int]:
    """Feature-map cell (w, h) whose image region contains the box center.

    Proportional scaling with floor; the result is clamped into bounds so
    centers on the far image edge land in the last cell.
    """
    cx, cy = box.center
    w = math.floor(cx * fmap.width / fmap.image_width)
    h = math.floor(cy * fmap.height / fmap.image_height)
    w = min(max(w, 0), fmap.width - 1)
    h = min(max(h, 0), fmap.height - 1)
    return w, h


def extract_conv_pattern(fmap: FeatureMap, cell: tuple[int, int]) -> np.ndarray:
    """The C channel values at cell (w, h)."""
    w, h = cell
    if not (0 <= w < fmap.width and 0 <= h < fmap.height):
        raise InputError(
            f"cell {(w, h)} out of bounds for a {fmap.width}x{fmap.height} map"
        )
    return fmap.values[h, w, :].copy()


def channel_mean_flatten(fmap: FeatureMap) -> np.ndarray:
    """Per-channel means over all W*H cells, as a C-long vector."""
    flat = fmap.values.reshape(-1, fmap.channels)
    return flat.mean(axis=0)
