"""Content and style modulation: the two local-editing operators.

Both are mask-gated linear blends over feature maps. Content modulation
replaces what is drawn inside a region; style modulation restyles a
region with its own latent code while the rest of the map keeps the
global style.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ContractError
from .masks import validate_mask
from .model import FeatureMap, GeneratorModel, LatentCode


@dataclass
class RegionPatch:
    """Replacement content for a region: features, mask, optional style."""

    features: FeatureMap
    mask: np.ndarray
    style: LatentCode | None = None

    def __post_init__(self):
        self.mask = validate_mask(self.mask)
        if self.mask.shape != (self.features.height, self.features.width):
            raise ContractError(
                f"mask shape {self.mask.shape} does not match features "
                f"({self.features.height}, {self.features.width})")


def blend_masked(base: np.ndarray, replacement: np.ndarray,
                 mask: np.ndarray) -> np.ndarray:
    """``base*(1-m) + replacement*m`` with exact endpoints.

    Pixels where the mask is exactly 0 keep ``base`` bitwise; pixels
    where it is exactly 1 take ``replacement`` bitwise.
    """
    m = mask[None, :, :]
    blended = base * (1.0 - m) + replacement * m
    return np.where(m == 0.0, base, np.where(m == 1.0, replacement, blended))


def cmod(feature: FeatureMap, patch: RegionPatch) -> FeatureMap:
    """Content modulation: convex per-pixel blend of host and patch features."""
    if patch.features.data.shape != feature.data.shape:
        raise ContractError(
            f"patch shape {patch.features.data.shape} != host {feature.data.shape}")
    if patch.features.layer != feature.layer:
        raise ContractError(
            f"patch layer {patch.features.layer} != host layer {feature.layer}")
    return FeatureMap(feature.layer,
                      blend_masked(feature.data, patch.features.data, patch.mask))


def smod(feature: FeatureMap, w_global: LatentCode, patch: RegionPatch,
         model: GeneratorModel) -> FeatureMap:
    """Style modulation: restyle the patch region with its own code.

    The host map is styled with the global code, the patch features with
    the patch's code, and the two styled maps are mask-blended, so the
    region's style is controlled independently of the rest of the image.
    """
    if patch.style is None:
        raise ContractError("style modulation needs a patch style code")
    if not (feature.layer == w_global.layer == patch.features.layer
            == patch.style.layer):
        raise ContractError(
            f"inconsistent layers: host {feature.layer}, global code "
            f"{w_global.layer}, patch {patch.features.layer}, "
            f"patch code {patch.style.layer}")
    if patch.features.data.shape != feature.data.shape:
        raise ContractError(
            f"patch shape {patch.features.data.shape} != host {feature.data.shape}")
    styled_host = model.apply_style(feature, w_global)
    styled_patch = model.apply_style(patch.features, patch.style)
    return FeatureMap(feature.layer,
                      blend_masked(styled_host.data, styled_patch.data, patch.mask))
