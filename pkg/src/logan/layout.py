"""Background layout parsing and room clearing.

A semantic segmentation map (ceiling / wall / floor plus object classes)
is reduced to a compact geometric layout: the convex closure of the
ceiling with its lowest "key point", and a floor boundary formed by two
sloped segments anchored at the image borders. The layout drives
background completion: per-class mean features are painted over each
region to refill erased objects.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image

from .errors import ContractError, LayoutIncompleteError
from .masks import area_downsample
from .session import ScheduledAction, Session

BACKGROUND_CLASSES = ("ceiling", "wall", "floor")
RASTER_IDS = {"ceiling": 0, "wall": 1, "floor": 2}

# fixed display colors for indexed-PNG export (index -> RGB)
_PALETTE_COLORS = [
    (70, 130, 180), (189, 183, 107), (139, 69, 19), (178, 34, 34),
    (85, 107, 47), (72, 61, 139), (205, 92, 92), (46, 139, 87),
    (210, 105, 30), (106, 90, 205), (188, 143, 143), (0, 139, 139),
]


@dataclass
class SegmentationMap:
    """H×W class-id grid with a palette naming each id."""

    labels: np.ndarray
    palette: dict[int, str]

    def __post_init__(self):
        self.labels = np.asarray(self.labels)
        if self.labels.ndim != 2:
            raise ContractError(f"labels must be 2-D, got {self.labels.shape}")
        self.labels = self.labels.astype(np.int32)
        unknown = set(np.unique(self.labels)) - set(self.palette)
        if unknown:
            raise ContractError(f"label ids missing from palette: {sorted(unknown)}")

    @property
    def shape(self) -> tuple[int, int]:
        return self.labels.shape

    def ids_for(self, name: str) -> list[int]:
        return [i for i, n in self.palette.items() if n == name]

    def class_mask(self, name: str) -> np.ndarray:
        mask = np.zeros(self.shape, dtype=bool)
        for i in self.ids_for(name):
            mask |= self.labels == i
        return mask

    def background_mask(self) -> np.ndarray:
        mask = np.zeros(self.shape, dtype=bool)
        for name in BACKGROUND_CLASSES:
            mask |= self.class_mask(name)
        return mask

    def object_mask(self) -> np.ndarray:
        return ~self.background_mask()


def save_segmentation(seg: SegmentationMap, png_path, palette_path) -> None:
    img = Image.fromarray(seg.labels.astype(np.uint8), mode="P")
    flat = []
    for i in range(256):
        flat.extend(_PALETTE_COLORS[i % len(_PALETTE_COLORS)])
    img.putpalette(flat)
    img.save(png_path, format="PNG")
    Path(palette_path).write_text(
        json.dumps({str(k): v for k, v in sorted(seg.palette.items())}, indent=2))


def load_segmentation(png_path, palette_path) -> SegmentationMap:
    img = Image.open(png_path)
    if img.mode not in ("P", "L"):
        raise ContractError(f"segmentation PNG must be indexed or 8-bit, got {img.mode}")
    labels = np.asarray(img, dtype=np.int32)
    palette = {int(k): v for k, v in json.loads(Path(palette_path).read_text()).items()}
    return SegmentationMap(labels, palette)


def _convex_hull(points: np.ndarray) -> list[tuple[int, int]]:
    """Monotone-chain hull over (x, y) integer points; handles degeneracy."""
    pts = sorted(set(map(tuple, points.tolist())))
    if len(pts) <= 2:
        return [tuple(p) for p in pts]

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    lower, upper = [], []
    for p in pts:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    for p in reversed(pts):
        while len(upper) >= 2 and cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    return lower[:-1] + upper[:-1]


@dataclass
class Layout:
    """Parsed background geometry at a source resolution."""

    height: int
    width: int
    ceiling_hull: list[tuple[float, float]]
    key_point: tuple[float, float]
    left_anchor: tuple[float, float]
    right_anchor: tuple[float, float]
    slopes: tuple[float, float]
    floor_boundary: list[tuple[float, float]] = field(default_factory=list)

    def boundary_y(self, x: np.ndarray) -> np.ndarray:
        """Piecewise-linear floor boundary height at (fractional) columns."""
        xs = np.array([p[0] for p in self.floor_boundary])
        ys = np.array([p[1] for p in self.floor_boundary])
        return np.interp(x, xs, ys)

    def ceiling_envelope(self, x: np.ndarray) -> np.ndarray:
        """Max hull y per column; -inf outside the hull's x-range."""
        x = np.asarray(x, dtype=np.float64)
        env = np.full(x.shape, -np.inf)
        hull = self.ceiling_hull
        if len(hull) == 1:
            px, py = hull[0]
            env[np.isclose(x, px, atol=0.5)] = py
            return env
        n = len(hull)
        for i in range(n):
            (x0, y0), (x1, y1) = hull[i], hull[(i + 1) % n]
            if n == 2 and i == 1:
                break
            if x0 == x1:
                on = np.isclose(x, x0, atol=0.5)
                env[on] = np.maximum(env[on], max(y0, y1))
                continue
            lo, hi = min(x0, x1), max(x0, x1)
            span = (x >= lo) & (x <= hi)
            t = (x[span] - x0) / (x1 - x0)
            env[span] = np.maximum(env[span], y0 + t * (y1 - y0))
        return env

    def to_dict(self) -> dict:
        return {
            "height": self.height, "width": self.width,
            "ceiling_hull": [list(p) for p in self.ceiling_hull],
            "key_point": list(self.key_point),
            "left_anchor": list(self.left_anchor),
            "right_anchor": list(self.right_anchor),
            "slopes": list(self.slopes),
            "floor_boundary": [list(p) for p in self.floor_boundary],
        }


def _anchored_slope(xs: np.ndarray, dy: np.ndarray) -> float:
    denom = float((xs * xs).sum())
    if denom == 0.0:
        return 0.0
    return float((xs * dy).sum() / denom)


def _fit_floor_slopes(cols: np.ndarray, tops: np.ndarray, y_l: float, y_r: float,
                      width: int) -> tuple[float, float]:
    """Two anchored least-squares lines with a scanned breakpoint.

    The left line passes through (0, y_l), the right through (width-1, y_r).
    The column split is chosen to minimize the combined squared error.
    """
    if cols.size == 0:
        return 0.0, 0.0
    xl, dl = cols.astype(np.float64), tops - y_l
    xr, dr = cols - (width - 1.0), tops - y_r

    def sse(xs, dy):
        denom = (xs * xs).sum()
        if denom == 0.0:
            return float((dy * dy).sum())
        return float((dy * dy).sum() - (xs * dy).sum() ** 2 / denom)

    best = None
    for split in range(cols.size + 1):
        total = sse(xl[:split], dl[:split]) + sse(xr[split:], dr[split:])
        if best is None or total < best[0]:
            best = (total, split)
    split = best[1]
    return _anchored_slope(xl[:split], dl[:split]), _anchored_slope(xr[split:], dr[split:])


def parse_layout(seg: SegmentationMap,
                 slopes: tuple[float, float] | None = None) -> Layout:
    """Recover ceiling hull, key point, and floor boundary from a segmentation.

    ``slopes`` overrides the fitted boundary slopes with fixed values.
    """
    h, w = seg.shape
    ceiling = seg.class_mask("ceiling")
    floor = seg.class_mask("floor")
    wall = seg.class_mask("wall")
    if not ceiling.any():
        raise LayoutIncompleteError("ceiling", "no ceiling pixels found")
    for col, name in ((0, "floor-left"), (w - 1, "floor-right")):
        if not floor[:, col].any():
            raise LayoutIncompleteError(
                name, f"no floor pixels on border column {col}")

    ys, xs = np.nonzero(ceiling)
    hull = _convex_hull(np.stack([xs, ys], axis=1))
    max_y = max(p[1] for p in hull)
    candidates = [p for p in hull if p[1] == max_y]
    key_point = min(candidates, key=lambda p: (abs(p[0] - w / 2.0), p[0]))

    y_l = int(np.nonzero(floor[:, 0])[0].min())
    y_r = int(np.nonzero(floor[:, w - 1])[0].min())

    if slopes is None:
        cols, tops = [], []
        for x in range(w):
            col = np.nonzero(floor[:, x])[0]
            if col.size == 0:
                continue
            top = int(col.min())
            if top > 0 and wall[top - 1, x]:
                cols.append(x)
                tops.append(top)
        k_l, k_r = _fit_floor_slopes(np.asarray(cols, dtype=np.float64),
                                     np.asarray(tops, dtype=np.float64),
                                     y_l, y_r, w)
    else:
        k_l, k_r = float(slopes[0]), float(slopes[1])

    boundary = [(0.0, float(y_l)), (float(w - 1), float(y_r))]
    if abs(k_l - k_r) > 1e-12:
        x_m = (y_r - y_l - k_r * (w - 1)) / (k_l - k_r)
        if 0.0 < x_m < w - 1.0:
            boundary = [(0.0, float(y_l)), (float(x_m), float(y_l + k_l * x_m)),
                        (float(w - 1), float(y_r))]

    return Layout(
        height=h, width=w,
        ceiling_hull=[(float(x), float(y)) for x, y in hull],
        key_point=(float(key_point[0]), float(key_point[1])),
        left_anchor=(0.0, float(y_l)), right_anchor=(float(w - 1), float(y_r)),
        slopes=(k_l, k_r), floor_boundary=boundary)


def rasterize_layout(layout: Layout, resolution: tuple[int, int]) -> SegmentationMap:
    """Paint the three background classes over a full frame.

    The partition is exhaustive and exclusive: ceiling above (and inside)
    the hull, floor below the boundary, wall everywhere else.
    """
    h, w = resolution
    if h < 1 or w < 1:
        raise ContractError(f"bad raster resolution {resolution}")
    x_src = (np.arange(w) + 0.5) * layout.width / w - 0.5
    y_src = (np.arange(h) + 0.5) * layout.height / h - 0.5

    env = layout.ceiling_envelope(x_src)
    ceiling = y_src[:, None] <= env[None, :]
    floor = (y_src[:, None] >= layout.boundary_y(x_src)[None, :]) & ~ceiling

    labels = np.full((h, w), RASTER_IDS["wall"], dtype=np.int32)
    labels[ceiling] = RASTER_IDS["ceiling"]
    labels[floor] = RASTER_IDS["floor"]
    return SegmentationMap(labels, {v: k for k, v in RASTER_IDS.items()})


@dataclass
class BackgroundFill:
    """Per-layer background features painted from per-class means."""

    features: dict[int, np.ndarray]
    regions: dict[int, np.ndarray]
    class_means: dict[int, dict[str, np.ndarray]]
    low_confidence: tuple[str, ...] = ()


def build_background_fill(features: dict[int, np.ndarray], seg: SegmentationMap,
                          layout: Layout) -> BackgroundFill:
    """Average visible background features per class and paint each region.

    Per layer and class, the mean is taken over cells weighted by how much
    visible-background area of that class they cover, so object pixels
    never influence the fill. A class with no visible pixel at all falls
    back to the global visible-background mean and is flagged.
    """
    canonical = seg.shape
    rast = rasterize_layout(layout, canonical)
    visible = {
        name: (seg.class_mask(name) & (rast.labels == RASTER_IDS[name])).astype(np.float64)
        for name in BACKGROUND_CLASSES
    }
    visible_any = seg.background_mask().astype(np.float64)
    low_confidence = tuple(
        name for name in BACKGROUND_CLASSES if visible[name].sum() == 0)

    fill_features: dict[int, np.ndarray] = {}
    regions: dict[int, np.ndarray] = {}
    means: dict[int, dict[str, np.ndarray]] = {}
    for layer, data in sorted(features.items()):
        c, hl, wl = data.shape
        layer_rast = rasterize_layout(layout, (hl, wl)).labels
        global_w = area_downsample(visible_any, (hl, wl))
        gw_sum = global_w.sum()
        global_mean = ((data * global_w).sum(axis=(1, 2)) / gw_sum
                       if gw_sum > 0 else data.mean(axis=(1, 2)))

        fill = np.empty_like(data)
        layer_means = {}
        for name in BACKGROUND_CLASSES:
            weights = area_downsample(visible[name], (hl, wl))
            w_sum = weights.sum()
            if visible[name].sum() > 0 and w_sum > 0:
                mean = (data * weights).sum(axis=(1, 2)) / w_sum
            else:
                mean = global_mean
            layer_means[name] = mean
            fill[:, layer_rast == RASTER_IDS[name]] = mean[:, None]
        fill_features[layer] = fill
        regions[layer] = layer_rast
        means[layer] = layer_means

    return BackgroundFill(fill_features, regions, means, low_confidence)


def clear_room_action(session: Session, seg: SegmentationMap, layout: Layout,
                      fill: BackgroundFill, layer: int) -> ScheduledAction:
    if layer not in fill.features:
        raise ContractError(f"background fill has no features for layer {layer}")
    if seg.shape != session.model.output_resolution:
        raise ContractError(
            f"segmentation {seg.shape} != canonical resolution "
            f"{session.model.output_resolution}")
    return ScheduledAction(
        object_id="@clear_room", layer=layer,
        features=fill.features[layer].copy(),
        canonical_mask=seg.object_mask().astype(np.float64),
        priority=0, style=None)


def clear_room(session: Session, layout: Layout, fill: BackgroundFill,
               layer: int = 4, seg: SegmentationMap | None = None) -> Session:
    """Erase every object region in one content edit at ``layer``.

    The union of non-background pixels is refilled with the per-class
    background features; downstream layers re-synthesize.
    """
    seg = seg if seg is not None else session.segmentation
    if seg is None:
        raise ContractError("clear_room needs a segmentation map")
    action = clear_room_action(session, seg, layout, fill, layer)
    session.add_actions([action], {"op": "clear_room", "layer": layer})
    return session
