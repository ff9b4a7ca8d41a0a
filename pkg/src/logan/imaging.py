"""Deterministic image encode/visualization helpers.

The CLI and the HTTP service both ship renders through these functions,
so equal pixel data always yields byte-equal PNG files.
"""

from __future__ import annotations

import io

import numpy as np
from PIL import Image

from .errors import ContractError
from .masks import upsample_nearest


def image_to_array(image: np.ndarray) -> np.ndarray:
    """3×H×W floats in [0,1] -> H×W×3 uint8."""
    image = np.asarray(image)
    if image.ndim != 3 or image.shape[0] != 3:
        raise ContractError(f"expected 3×H×W image, got {image.shape}")
    return np.clip(np.round(image * 255.0), 0, 255).astype(np.uint8).transpose(1, 2, 0)


def image_to_png_bytes(image: np.ndarray) -> bytes:
    buf = io.BytesIO()
    Image.fromarray(image_to_array(image), mode="RGB").save(buf, format="PNG")
    return buf.getvalue()


def save_image_png(image: np.ndarray, path) -> None:
    with open(path, "wb") as fh:
        fh.write(image_to_png_bytes(image))


def load_image_png(path) -> np.ndarray:
    arr = np.asarray(Image.open(path).convert("RGB"), dtype=np.float64) / 255.0
    return arr.transpose(2, 0, 1)


def feature_heatmap_png(features: np.ndarray,
                        resolution: tuple[int, int] | None = None) -> bytes:
    """Channel-mean heatmap of a C×H×W feature map, min-max normalized."""
    mean = np.asarray(features).mean(axis=0)
    lo, hi = mean.min(), mean.max()
    norm = (mean - lo) / (hi - lo) if hi > lo else np.zeros_like(mean)
    if resolution is not None:
        norm = upsample_nearest(norm, resolution)
    buf = io.BytesIO()
    Image.fromarray(np.round(norm * 255.0).astype(np.uint8), mode="L").save(
        buf, format="PNG")
    return buf.getvalue()


def tile_row(images: list[np.ndarray], pad: int = 4) -> np.ndarray:
    """Tile equally sized 3×H×W images into one row with white gutters."""
    if not images:
        raise ContractError("nothing to tile")
    h = images[0].shape[1]
    parts = []
    for i, img in enumerate(images):
        if img.shape != images[0].shape:
            raise ContractError("tiles must share one shape")
        if i:
            parts.append(np.ones((3, h, pad)))
        parts.append(img)
    return np.concatenate(parts, axis=2)


def tile_grid(rows: list[list[np.ndarray]], pad: int = 4) -> np.ndarray:
    strips = [tile_row(r, pad) for r in rows]
    w = strips[0].shape[2]
    parts = []
    for i, strip in enumerate(strips):
        if strip.shape[2] != w:
            raise ContractError("rows must have equal width")
        if i:
            parts.append(np.ones((3, pad, w)))
        parts.append(strip)
    return np.concatenate(parts, axis=1)
