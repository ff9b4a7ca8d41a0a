"""Region masks, priority resolution, and resolution resampling.

Masks are H×W float arrays with values in [0, 1], authored at the
canonical resolution (the generator's output resolution) and resampled
to each layer's feature resolution by exact area averaging.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from PIL import Image

from .errors import ConfigError, ContractError

# Decoration-sequence defaults; background is lowest by construction.
# Fully overridable per edit.
DEFAULT_PRIORITIES = {
    "background": 0,
    "bed": 1,
    "window": 2,
    "picture": 3,
    "table": 4,
    "lamp": 5,
}


@dataclass(frozen=True)
class PriorityAssignment:
    object_id: str
    priority: int


def assign_priority(category: str, override: int | None = None,
                    object_id: str | None = None) -> PriorityAssignment:
    """Priority for an object category, or the explicit override."""
    oid = object_id if object_id is not None else category
    if override is not None:
        if override < 0:
            raise ContractError(f"priority must be >= 0, got {override}")
        return PriorityAssignment(oid, int(override))
    if category not in DEFAULT_PRIORITIES:
        raise ConfigError(
            f"no default priority for category {category!r}; pass an override")
    return PriorityAssignment(oid, DEFAULT_PRIORITIES[category])


def validate_mask(values: np.ndarray) -> np.ndarray:
    values = np.asarray(values, dtype=np.float64)
    if values.ndim != 2:
        raise ContractError(f"mask must be 2-D, got shape {values.shape}")
    if not np.isfinite(values).all():
        raise ContractError("mask contains non-finite values")
    if values.min() < 0.0 or values.max() > 1.0:
        raise ContractError("mask values must lie in [0, 1]")
    return values


def resolve_priority_masks(
    raw: Sequence[tuple[np.ndarray, PriorityAssignment | int]],
) -> list[np.ndarray]:
    """Turn raw masks with priorities into effective, overlap-suppressed masks.

    Each mask keeps only what is not claimed by strictly higher-priority
    masks: ``eff_o = m_o * max(0, 1 - sum of higher-priority masks)``.
    Equal priorities are left untouched (the suppression is strict), so
    overlapping equal-priority binary masks can push the pointwise sum
    above 1; that case is warned about.

    Returns effective masks in input order.
    """
    if len(raw) == 0:
        raise ContractError("need at least one mask")
    masks = []
    priorities = []
    for m, p in raw:
        masks.append(validate_mask(m))
        priorities.append(p.priority if isinstance(p, PriorityAssignment) else int(p))
    shape = masks[0].shape
    for m in masks[1:]:
        if m.shape != shape:
            raise ContractError(
                f"mask resolution mismatch: {m.shape} vs {shape}")

    out = []
    for i, (m, p) in enumerate(zip(masks, priorities)):
        higher = np.zeros(shape)
        for j, (m2, p2) in enumerate(zip(masks, priorities)):
            if j != i and p2 > p:
                higher += m2
        out.append(m * np.clip(1.0 - higher, 0.0, None))

    for i in range(len(masks)):
        for j in range(i + 1, len(masks)):
            if priorities[i] == priorities[j]:
                overlap = np.minimum(masks[i], masks[j])
                if (overlap >= 0.5).any():
                    warnings.warn(
                        f"masks {i} and {j} share priority {priorities[i]} and "
                        "overlap; their blended sum can exceed 1",
                        stacklevel=2)
    return out


def _overlap_weights(n_src: int, n_dst: int) -> np.ndarray:
    """Row-stochastic (n_dst, n_src) matrix of interval-overlap fractions."""
    if n_dst <= 0 or n_src <= 0:
        raise ContractError("resolutions must be positive")
    w = np.zeros((n_dst, n_src))
    step = n_src / n_dst
    for i in range(n_dst):
        lo, hi = i * step, (i + 1) * step
        j0, j1 = int(np.floor(lo)), int(np.ceil(hi))
        for j in range(j0, min(j1, n_src)):
            w[i, j] = min(hi, j + 1) - max(lo, j)
    return w / step


def area_downsample(values: np.ndarray, shape: tuple[int, int]) -> np.ndarray:
    """Exact box-filter downsample of a 2-D array to (H, W).

    Preserves total mass: sum(out) * (src_area / dst_cells) == sum(values).
    """
    values = np.asarray(values, dtype=np.float64)
    h, w = shape
    wy = _overlap_weights(values.shape[0], h)
    wx = _overlap_weights(values.shape[1], w)
    return wy @ values @ wx.T


def upsample_nearest(values: np.ndarray, shape: tuple[int, int]) -> np.ndarray:
    """Nearest-neighbour upsample of a 2-D array to (H, W)."""
    values = np.asarray(values)
    h, w = shape
    rows = np.floor((np.arange(h) + 0.5) * values.shape[0] / h).astype(int)
    cols = np.floor((np.arange(w) + 0.5) * values.shape[1] / w).astype(int)
    return values[np.ix_(rows, cols)]


def resample_mask(mask: np.ndarray, layer: int, model) -> np.ndarray:
    """Resample a canonical-resolution mask to a layer's feature resolution."""
    mask = validate_mask(mask)
    if not 1 <= layer <= model.layer_count + 1:
        raise ContractError(
            f"layer {layer} out of range 1..{model.layer_count + 1}")
    canonical = model.output_resolution
    if mask.shape != canonical:
        raise ContractError(
            f"mask shape {mask.shape} != canonical resolution {canonical}")
    return area_downsample(mask, model.resolution(layer))


def save_mask_png(mask: np.ndarray, path) -> None:
    """Write a mask as a single-channel 8-bit PNG (0 -> 0.0, 255 -> 1.0)."""
    mask = validate_mask(mask)
    img = Image.fromarray(np.round(mask * 255.0).astype(np.uint8), mode="L")
    img.save(path, format="PNG")


def load_mask_png(path) -> np.ndarray:
    img = Image.open(path).convert("L")
    return np.asarray(img, dtype=np.float64) / 255.0
