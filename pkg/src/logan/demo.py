"""Deterministic demo scene: segmentation, bank, and figure grids.

Everything here is derived from seeds and fixed geometry so that demo
outputs, documentation figures, and tests agree byte-for-byte.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .bank import ObjectBank, extract_object
from .composer import EditPlan, apply_edit, attach_segmentation
from .imaging import save_image_png, tile_row
from .layout import Layout, SegmentationMap, rasterize_layout
from .model import GeneratorModel, instantiate_model
from .session import Session

DEMO_MODEL_REF = "toy:7"
DEMO_CODE_SEED = 1

# object paint-in rectangles as (r0, r1, c0, c1) fractions of the frame
_BED = (0.58, 0.88, 0.28, 0.62)
_WINDOW = (0.26, 0.44, 0.70, 0.90)
_LAMP = (0.42, 0.60, 0.10, 0.20)

_EXTRA_BEDS = {
    "bed_b": (0.58, 0.88, 0.45, 0.79),   # horizontal, shifted right
    "bed_c": (0.40, 0.88, 0.30, 0.46),   # upright
    "bed_d": (0.40, 0.88, 0.55, 0.71),   # upright, shifted right
}


def demo_layout(resolution: tuple[int, int]) -> Layout:
    """Fixed room geometry scaled to a frame size."""
    h, w = resolution
    y_l, y_r = 0.66 * (h - 1), 0.70 * (h - 1)
    k_l, k_r = 0.10, -0.12
    x_m = (y_r - y_l - k_r * (w - 1)) / (k_l - k_r)
    hull = [(0.0, 0.0), (w - 1.0, 0.0), (w - 1.0, 0.10 * h),
            ((w - 1) / 2.0, 0.20 * h), (0.0, 0.10 * h)]
    return Layout(
        height=h, width=w, ceiling_hull=hull,
        key_point=((w - 1) / 2.0, 0.20 * h),
        left_anchor=(0.0, y_l), right_anchor=(w - 1.0, y_r),
        slopes=(k_l, k_r),
        floor_boundary=[(0.0, y_l), (x_m, y_l + k_l * x_m), (w - 1.0, y_r)])


def _rect_mask(resolution: tuple[int, int], box) -> np.ndarray:
    h, w = resolution
    r0, r1, c0, c1 = box
    mask = np.zeros(resolution)
    mask[int(r0 * h):int(r1 * h), int(c0 * w):int(c1 * w)] = 1.0
    return mask


def build_demo_segmentation(resolution: tuple[int, int] = (256, 256)) -> SegmentationMap:
    """Three background classes plus bed, window, and lamp regions."""
    base = rasterize_layout(demo_layout(resolution), resolution)
    labels = base.labels.copy()
    palette = dict(base.palette)
    for class_id, (name, box) in enumerate(
            [("bed", _BED), ("window", _WINDOW), ("lamp", _LAMP)], start=3):
        palette[class_id] = name
        labels[_rect_mask(resolution, box) > 0] = class_id
    return SegmentationMap(labels, palette)


def build_demo_session(model_ref: str = DEMO_MODEL_REF,
                       code_seed: int = DEMO_CODE_SEED,
                       with_segmentation: bool = True):
    model = instantiate_model(model_ref)
    session = Session(model, seed=code_seed)
    if with_segmentation:
        attach_segmentation(session,
                            build_demo_segmentation(model.output_resolution))
    return model, session


def build_demo_bank(session: Session) -> ObjectBank:
    """Extract the painted objects plus extra bed poses for clustering."""
    resolution = session.model.output_resolution
    bank = ObjectBank()
    for name, box in [("bed_a", _BED), ("window_a", _WINDOW), ("lamp_a", _LAMP)]:
        bank.add(extract_object(session, _rect_mask(resolution, box),
                                name.split("_")[0], asset_id=name))
    for name, box in _EXTRA_BEDS.items():
        bank.add(extract_object(session, _rect_mask(resolution, box),
                                "bed", asset_id=name))
    return bank


def _run(model: GeneratorModel, bank: ObjectBank, edits: list[dict],
         segmentation: SegmentationMap | None = None,
         code_seed: int = DEMO_CODE_SEED) -> np.ndarray:
    session = Session(model, seed=code_seed)
    if segmentation is not None:
        attach_segmentation(session, segmentation)
    for edit in edits:
        apply_edit(session, edit, bank)
    return session.render()


def write_figures(directory, model_ref: str = DEMO_MODEL_REF,
                  code_seed: int = DEMO_CODE_SEED) -> list[Path]:
    """Regenerate the layer-sweep and workflow grids into a directory."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    model, session = build_demo_session(model_ref, code_seed)
    seg = session.segmentation
    bank = build_demo_bank(session)
    base_image = session.render()
    written = []

    def emit(name: str, image: np.ndarray) -> None:
        path = directory / name
        save_image_png(image, path)
        written.append(path)

    removal_layers = [l for l in (2, 3, 4, 5, 6, 8) if l <= model.layer_count]
    removals = [_run(model, bank, [{"op": "remove", "object": "bed_a",
                                    "layer": layer}], seg, code_seed)
                for layer in removal_layers]
    emit("removal_sweep.png", tile_row([base_image] + removals))

    insertion_layers = [l for l in (4, 5, 6, 7, 8, 10)
                        if l <= model.layer_count]
    h, w = model.output_resolution
    target = [int(0.55 * w), int(0.35 * h)]
    inserts = [_run(model, bank,
                    [{"op": "clear_room"},
                     {"op": "insert", "object": "bed_c", "layer": layer,
                      "position": target}], seg, code_seed)
               for layer in insertion_layers]
    emit("insertion_sweep.png", tile_row([base_image] + inserts))

    steps = 5
    rotations = [_run(model, bank,
                      [{"op": "rotate", "object": "bed_a", "s": s, "S": steps,
                        "left": 0, "right": 1}], seg, code_seed)
                 for s in range(steps + 1)]
    emit("rotation_strip.png", tile_row(rotations))

    cleared = _run(model, bank, [{"op": "clear_room"}], seg, code_seed)
    emit("empty_room.png", tile_row([base_image, cleared]))

    restyled_global = _run(model, bank,
                           [{"op": "global_style", "style_seed": 11,
                             "layers": [9, model.layer_count]}], seg, code_seed)
    restyled_object = _run(model, bank,
                           [{"op": "restyle_object", "object": "bed_a",
                             "style_seed": 9}], seg, code_seed)
    emit("restyle.png", tile_row([base_image, restyled_global, restyled_object]))
    return written


def demo_plan(seed: int = DEMO_CODE_SEED) -> EditPlan:
    """Small example program exercising remove + insert + restyle."""
    return EditPlan(
        base={"seed": seed},
        edits=[
            {"op": "remove", "object": "bed_a"},
            {"op": "insert", "object": "bed_c", "layer": 7},
            {"op": "restyle_object", "object": "bed_c", "style_seed": 5},
        ])


__all__ = [
    "DEMO_MODEL_REF", "DEMO_CODE_SEED", "demo_layout",
    "build_demo_segmentation", "build_demo_session", "build_demo_bank",
    "write_figures", "demo_plan",
]
