"""Edit-script parsing and compilation onto sessions.

A script is JSON: base latent codes (seed or explicit), an optional
segmentation reference, and a list of edits over a closed op vocabulary.
Parsing only validates; compilation resolves recommended layers, asset
references, priorities, and style seeds into scheduled actions, then the
session's layer-wise loop renders the result.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import jsonschema
import numpy as np

from .bank import (CLUSTER_COUNT, CLUSTER_DIMS, ObjectBank, POSE_LAYERS,
                   ROTATION_STEPS, cluster_poses, rotation_path,
                   transform_asset)
from .errors import ContractError, LoganError, ScriptParseError, UnknownObjectError
from .layout import (build_background_fill, clear_room_action,
                     load_segmentation, parse_layout)
from .masks import DEFAULT_PRIORITIES
from .model import GeneratorModel, LatentCode
from .session import ScheduledAction, Session

OP_KINDS = ("remove", "insert", "shift", "rotate", "restyle_object",
            "global_style", "clear_room")

REMOVAL_LAYER = 4
INSERTION_LAYER = 7
RESTYLE_START_LAYER = 8

EDIT_SCRIPT_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "Edit script",
    "type": "object",
    "required": ["base", "edits"],
    "additionalProperties": False,
    "properties": {
        "base": {
            "type": "object",
            "additionalProperties": False,
            "minProperties": 1,
            "maxProperties": 1,
            "properties": {
                "seed": {"type": "integer"},
                "codes": {
                    "type": "array",
                    "items": {"type": "array", "items": {"type": "number"}},
                },
            },
        },
        "segmentation": {
            "type": "object",
            "additionalProperties": False,
            "required": ["png", "palette"],
            "properties": {
                "png": {"type": "string"},
                "palette": {"type": "string"},
            },
        },
        "edits": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["op"],
                "additionalProperties": False,
                "properties": {
                    "op": {"enum": list(OP_KINDS)},
                    "object": {"type": "string"},
                    "layer": {"type": "integer", "minimum": 1},
                    "layers": {
                        "type": "array",
                        "items": {"type": "integer", "minimum": 1},
                        "minItems": 2, "maxItems": 2,
                    },
                    "position": {
                        "type": "array",
                        "items": {"type": "integer"},
                        "minItems": 2, "maxItems": 2,
                    },
                    "priority": {"type": "integer", "minimum": 0},
                    "s": {"type": "integer", "minimum": 0},
                    "S": {"type": "integer", "minimum": 1},
                    "left": {"type": "integer", "minimum": 0},
                    "right": {"type": "integer", "minimum": 0},
                    "style_seed": {"type": "integer"},
                },
            },
        },
    },
}

# per-op field contract, validated after the structural pass
_OP_FIELDS = {
    "remove": ({"object"}, {"layer", "priority"}),
    "insert": ({"object"}, {"layer", "position", "priority", "style_seed"}),
    "shift": ({"object", "position"}, {"layer", "priority"}),
    "rotate": ({"object", "s"}, {"S", "left", "right", "layer", "layers",
                                 "priority"}),
    "restyle_object": ({"object", "style_seed"}, {"layers", "priority"}),
    "global_style": ({"style_seed"}, {"layers"}),
    "clear_room": (set(), {"layer"}),
}


@dataclass
class EditPlan:
    """Validated, unresolved edit program."""

    base: dict
    edits: list[dict]
    segmentation: dict | None = field(default=None)

    @property
    def base_seed(self) -> int | None:
        return self.base.get("seed")

    @property
    def base_codes(self) -> list | None:
        return self.base.get("codes")


def _pointer(path) -> str:
    return "/" + "/".join(str(p) for p in path) if path else ""


def validate_edit_fields(edit: dict, pointer: str = "") -> None:
    """Check one structurally valid edit's per-op field contract."""
    required, optional = _OP_FIELDS[edit["op"]]
    present = set(edit) - {"op"}
    missing = required - present
    if missing:
        raise ScriptParseError(
            f"op {edit['op']!r} requires field {sorted(missing)[0]!r}", pointer)
    extra = present - required - optional
    if extra:
        raise ScriptParseError(
            f"op {edit['op']!r} does not take field {sorted(extra)[0]!r}",
            f"{pointer}/{sorted(extra)[0]}")
    if "layers" in edit and edit["layers"][0] > edit["layers"][1]:
        raise ScriptParseError("layer range is inverted", f"{pointer}/layers")
    if edit["op"] == "rotate" and edit["s"] > edit.get("S", ROTATION_STEPS):
        raise ScriptParseError("s exceeds S", f"{pointer}/s")


def validate_edit(edit, pointer: str = "") -> dict:
    """Validate a standalone edit op (structure plus field contract)."""
    validator = jsonschema.Draft202012Validator(
        EDIT_SCRIPT_SCHEMA["properties"]["edits"]["items"])
    errors = sorted(validator.iter_errors(edit),
                    key=lambda e: (-len(e.absolute_path),
                                   _pointer(e.absolute_path)))
    if errors:
        raise ScriptParseError(errors[0].message,
                               pointer + _pointer(errors[0].absolute_path))
    validate_edit_fields(edit, pointer)
    return dict(edit)


def parse_edit_script(text: bytes | str) -> EditPlan:
    """Validate script JSON against the schema; reject unknown fields.

    Parse errors carry the JSON-pointer path of the offending element.
    """
    if isinstance(text, bytes):
        try:
            text = text.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ScriptParseError(f"script is not UTF-8: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScriptParseError(f"invalid JSON: {exc}") from exc

    validator = jsonschema.Draft202012Validator(EDIT_SCRIPT_SCHEMA)
    errors = sorted(validator.iter_errors(doc),
                    key=lambda e: (-len(e.absolute_path),
                                   _pointer(e.absolute_path)))
    if errors:
        chosen = errors[0]
        raise ScriptParseError(chosen.message, _pointer(chosen.absolute_path))

    for i, edit in enumerate(doc["edits"]):
        validate_edit_fields(edit, f"/edits/{i}")
    return EditPlan(base=dict(doc["base"]),
                    edits=[dict(e) for e in doc["edits"]],
                    segmentation=(dict(doc["segmentation"])
                                  if "segmentation" in doc else None))


def serialize_plan(plan: EditPlan) -> bytes:
    """Canonical script bytes: sorted keys, minimal separators."""
    doc = {"base": plan.base, "edits": plan.edits}
    if plan.segmentation is not None:
        doc["segmentation"] = plan.segmentation
    return json.dumps(doc, sort_keys=True, separators=(",", ":")).encode()


def recommended_layer(kind: str, category: str = "") -> int:
    """Default editing layer for an op kind.

    Content removal works best early (layer 4), insertion and placement
    in the middle (layer 7), restyling from layer 8 up. Restyle ops use
    the returned value as the start of their layer range.
    """
    if kind in ("remove", "clear_room"):
        return REMOVAL_LAYER
    if kind in ("insert", "shift", "rotate"):
        return INSERTION_LAYER
    if kind in ("restyle_object", "global_style"):
        return RESTYLE_START_LAYER
    raise ContractError(f"unknown op kind {kind!r}")


def style_codes_from_seed(model: GeneratorModel, seed: int,
                          layers) -> dict[int, LatentCode]:
    """Per-layer codes drawn sequentially in ascending layer order."""
    rng = np.random.default_rng(seed)
    return {layer: LatentCode(layer,
                              rng.standard_normal(model.spec(layer).style_dim))
            for layer in sorted(layers)}


def attach_segmentation(session: Session, seg) -> None:
    """Parse layout and build background fills from the base features."""
    if seg.shape != session.model.output_resolution:
        raise ContractError(
            f"segmentation {seg.shape} != canonical resolution "
            f"{session.model.output_resolution}")
    layout = parse_layout(seg)
    features = {layer: session.features_at(layer, edited=False)
                for layer in range(1, session.model.layer_count + 1)}
    session.segmentation = seg
    session.layout = layout
    session.fill = build_background_fill(features, seg, layout)


def _resolve_object(session: Session, bank: ObjectBank | None, ref: str):
    """Object reference → (mask, category, default priority, asset or None)."""
    if bank is not None and ref in bank.ids():
        asset = bank.get(ref)
        return asset.mask, asset.category, asset.priority, asset
    seg = session.segmentation
    if seg is not None and seg.ids_for(ref):
        mask = seg.class_mask(ref).astype(np.float64)
        return mask, ref, DEFAULT_PRIORITIES.get(ref, 0), None
    raise UnknownObjectError(ref)


def _removal_fill(session: Session, layer: int) -> np.ndarray:
    """Background features for an erased region.

    With a parsed layout the per-class background fill is used; without
    one the fill degrades to the layer's per-channel mean (a featureless
    smear, but deterministic and segmentation-free).
    """
    if session.fill is not None and layer in session.fill.features:
        return session.fill.features[layer].copy()
    data = session.features_at(layer, edited=False)
    mean = data.mean(axis=(1, 2))
    return np.broadcast_to(mean[:, None, None], data.shape).copy()


def _pose_model(bank: ObjectBank, category: str):
    pool = bank.by_category(category)
    m = min(CLUSTER_COUNT, len(pool))
    if m < 2:
        raise ContractError(
            f"rotation needs >= 2 banked {category!r} assets, found {len(pool)}")
    return cluster_poses(pool, m=m, dims=CLUSTER_DIMS, seed=0)


def apply_edit(session: Session, edit: dict, bank: ObjectBank | None = None) -> None:
    """Compile one validated edit into actions and append it to the log."""
    op = edit["op"]
    model = session.model
    entry = dict(edit)

    if op == "remove":
        mask, category, _, _ = _resolve_object(session, bank, edit["object"])
        if mask.max() == 0.0:
            raise ContractError(f"object {edit['object']!r} has an empty mask")
        layer = edit.get("layer", recommended_layer(op, category))
        session.add_actions([ScheduledAction(
            object_id=f"remove:{edit['object']}", layer=layer,
            canonical_mask=mask, features=_removal_fill(session, layer),
            priority=edit.get("priority", 0))], entry)

    elif op == "insert":
        if bank is None:
            raise UnknownObjectError(edit["object"])
        asset = bank.get(edit["object"])
        layer = edit.get("layer", recommended_layer(op, asset.category))
        if "position" in edit:
            x, y = edit["position"]
            y0, x0, _, _ = asset.bbox
            asset = transform_asset(asset, x - x0, y - y0)
        style = None
        if "style_seed" in edit:
            style = style_codes_from_seed(model, edit["style_seed"], [layer])[layer]
        session.add_actions([ScheduledAction(
            object_id=asset.id, layer=layer, canonical_mask=asset.mask,
            features=asset.features_at(layer),
            priority=edit.get("priority", asset.priority), style=style)], entry)

    elif op == "shift":
        if bank is None:
            raise UnknownObjectError(edit["object"])
        asset = bank.get(edit["object"])
        dx, dy = edit["position"]
        moved = transform_asset(asset, dx, dy)
        erase_layer = recommended_layer("remove", asset.category)
        place_layer = edit.get("layer", recommended_layer(op, asset.category))
        session.add_actions([
            ScheduledAction(
                object_id=f"remove:{asset.id}", layer=erase_layer,
                canonical_mask=asset.mask,
                features=_removal_fill(session, erase_layer), priority=0),
            ScheduledAction(
                object_id=asset.id, layer=place_layer,
                canonical_mask=moved.mask, features=moved.features_at(place_layer),
                priority=edit.get("priority", asset.priority)),
        ], entry)

    elif op == "rotate":
        if bank is None:
            raise UnknownObjectError(edit["object"])
        asset = bank.get(edit["object"])
        steps = edit.get("S", ROTATION_STEPS)
        pose_model = _pose_model(bank, asset.category)
        left = edit.get("left", pose_model.assign(asset))
        right = edit.get("right", (left + 1) % pose_model.cluster_count)
        path = rotation_path(left, right, steps, pose_model)
        codes = path.at(edit["s"])
        lo, hi = edit.get("layers", (POSE_LAYERS[0], POSE_LAYERS[-1]))
        pose_layers = [l for l in range(lo, hi + 1) if l <= model.layer_count]
        missing = [l for l in pose_layers if l not in codes]
        if missing:
            raise ContractError(
                f"rotation path lacks codes for pose layers {missing}")
        place_layer = edit.get("layer", recommended_layer(op, asset.category))
        priority = edit.get("priority", asset.priority)
        actions = [ScheduledAction(
            object_id=asset.id, layer=place_layer, canonical_mask=asset.mask,
            features=asset.features_at(place_layer), priority=priority)]
        actions += [ScheduledAction(
            object_id=asset.id, layer=layer, canonical_mask=asset.mask,
            priority=priority, style=codes[layer]) for layer in pose_layers]
        session.add_actions(actions, entry)

    elif op == "restyle_object":
        mask, category, default_priority, asset = _resolve_object(
            session, bank, edit["object"])
        if mask.max() == 0.0:
            raise ContractError(f"object {edit['object']!r} has an empty mask")
        lo, hi = edit.get("layers",
                          (recommended_layer(op, category), model.layer_count))
        if hi > model.layer_count:
            raise ContractError(
                f"layer range [{lo},{hi}] exceeds layer count {model.layer_count}")
        codes = style_codes_from_seed(model, edit["style_seed"],
                                      range(lo, hi + 1))
        priority = edit.get("priority",
                            asset.priority if asset else default_priority)
        session.add_actions([ScheduledAction(
            object_id=edit["object"], layer=layer, canonical_mask=mask,
            priority=priority, style=codes[layer])
            for layer in range(lo, hi + 1)], entry)

    elif op == "global_style":
        lo, hi = edit.get("layers", (1, model.layer_count))
        if hi > model.layer_count:
            raise ContractError(
                f"layer range [{lo},{hi}] exceeds layer count {model.layer_count}")
        codes = style_codes_from_seed(model, edit["style_seed"],
                                      range(lo, hi + 1))
        session.set_global_codes(codes, entry)

    elif op == "clear_room":
        if session.segmentation is None or session.layout is None \
                or session.fill is None:
            raise ContractError(
                "clear_room needs a segmentation attached to the session")
        layer = edit.get("layer", recommended_layer(op, ""))
        action = clear_room_action(session, session.segmentation,
                                   session.layout, session.fill, layer)
        session.add_actions([action], entry)

    else:  # unreachable after schema validation
        raise ContractError(f"unknown op {op!r}")


def apply_global_style(session: Session, codes: dict[int, LatentCode],
                       layers: tuple[int, int] | None = None) -> np.ndarray:
    """Swap global codes on a layer range, keep content edits, re-render."""
    if layers is not None:
        lo, hi = layers
        outside = [l for l in codes if not lo <= l <= hi]
        if outside:
            raise ContractError(f"codes {outside} fall outside range [{lo},{hi}]")
    session.set_global_codes(codes, None)
    return session.render()


def execute_plan(model: GeneratorModel, plan: EditPlan,
                 bank: ObjectBank | None = None,
                 base_dir=None) -> tuple[np.ndarray, Session]:
    """Run a plan on a fresh session; returns (image, session)."""
    if plan.base_codes is not None:
        if len(plan.base_codes) != model.layer_count:
            raise ContractError(
                f"base codes cover {len(plan.base_codes)} layers, "
                f"model has {model.layer_count}")
        codes = [LatentCode(i + 1, np.asarray(vals, dtype=np.float64))
                 for i, vals in enumerate(plan.base_codes)]
        session = Session(model, base_codes=codes)
    else:
        session = Session(model, seed=plan.base_seed)
    if plan.segmentation is not None:
        root = Path(base_dir) if base_dir is not None else Path.cwd()
        seg = load_segmentation(root / plan.segmentation["png"],
                                root / plan.segmentation["palette"])
        attach_segmentation(session, seg)
    for edit in plan.edits:
        apply_edit(session, edit, bank)
    return session.render(), session


def replay_log(session: Session, bank: ObjectBank | None = None) -> Session:
    """Re-execute a session's log on a fresh session (bit-exact on toy)."""
    fresh = Session(session.model, base_codes=list(session.base_codes))
    if session.segmentation is not None:
        attach_segmentation(fresh, session.segmentation)
    for edit in session.log:
        apply_edit(fresh, edit, bank)
    return fresh
