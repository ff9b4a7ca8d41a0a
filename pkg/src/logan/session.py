"""Stateful editing sessions over an immutable generator.

A session owns the layer-wise synthesis loop. Edits become scheduled
actions: per-layer feature patches with a canonical-resolution mask, a
priority, and an optional style code. Every re-render runs the same
loop, so an unedited session is bitwise identical to the plain generator
path and replaying a session's log reproduces its image exactly.

Per layer the loop:
  1. resolves the layer cohort's raw masks into effective masks at the
     canonical resolution (strictly-higher priorities suppress overlap),
     then box-filters each effective mask down to the layer resolution;
  2. blends content patches into the entry features, ascending priority;
  3. styles the map once: globally with the layer code, then per styled
     action by blending in the action's restyled region;
  4. advances through the layer's convolution.
"""

from __future__ import annotations

import hashlib
import json
import uuid
from dataclasses import dataclass, field

import numpy as np

from .errors import ContractError, LoganError
from .masks import area_downsample, resolve_priority_masks, validate_mask
from .model import GeneratorModel, LatentCode, adain
from .modulation import blend_masked


@dataclass
class ScheduledAction:
    """One per-layer edit: content patch and/or regional style override."""

    object_id: str
    layer: int
    canonical_mask: np.ndarray
    features: np.ndarray | None = None
    priority: int = 0
    style: LatentCode | None = None
    seq: int = field(default=-1, compare=False)

    def __post_init__(self):
        self.canonical_mask = validate_mask(self.canonical_mask)
        if self.layer < 1:
            raise ContractError(f"action layer must be >= 1, got {self.layer}")
        if self.priority < 0:
            raise ContractError(f"priority must be >= 0, got {self.priority}")
        if self.features is not None:
            self.features = np.asarray(self.features, dtype=np.float64)
            if self.features.ndim != 3:
                raise ContractError(
                    f"action features must be C×H×W, got {self.features.shape}")
        if self.style is not None and self.style.layer != self.layer:
            raise ContractError(
                f"style code layer {self.style.layer} != action layer {self.layer}")
        if self.features is None and self.style is None:
            raise ContractError("action needs features or a style code")


class Session:
    """Single-writer editing state bound to one generator."""

    def __init__(self, model: GeneratorModel,
                 base_codes: list[LatentCode] | None = None,
                 seed: int | None = None, session_id: str | None = None):
        if base_codes is None:
            if seed is None:
                raise ContractError("need base codes or a seed")
            base_codes = model.codes_from_seed(seed)
        if len(base_codes) != model.layer_count:
            raise ContractError(
                f"need {model.layer_count} base codes, got {len(base_codes)}")
        for layer, code in enumerate(base_codes, start=1):
            if code.layer != layer:
                raise ContractError(
                    f"base code at position {layer} declares layer {code.layer}")
        self.id = session_id or uuid.uuid4().hex
        self.model = model
        self.seed = seed
        self.base_codes = tuple(base_codes)
        self.global_codes: list[LatentCode] = list(base_codes)
        self.actions: list[ScheduledAction] = []
        self.log: list[dict] = []
        # derived artifacts attached by the composer / service
        self.segmentation = None
        self.layout = None
        self.fill = None
        self._seq = 0
        self._entry: dict[int, np.ndarray] = {1: model.initial_features()}
        self._content: dict[int, np.ndarray] = {}
        self._dirty_from = 1

    # -- mutation -----------------------------------------------------------

    def _validate_action(self, action: ScheduledAction) -> None:
        model = self.model
        if action.layer > model.layer_count:
            raise ContractError(
                f"action layer {action.layer} > layer count {model.layer_count}")
        if action.canonical_mask.shape != model.output_resolution:
            raise ContractError(
                f"action mask {action.canonical_mask.shape} != canonical "
                f"resolution {model.output_resolution}")
        if action.features is not None:
            expected = (model.channels(action.layer), *model.resolution(action.layer))
            if action.features.shape != expected:
                raise ContractError(
                    f"action features {action.features.shape} != layer "
                    f"{action.layer} shape {expected}")
        if action.style is not None:
            model.spec(action.layer)  # bounds check
            if action.style.values.shape != (model.spec(action.layer).style_dim,):
                raise ContractError(
                    f"style code length {action.style.values.shape[0]} != "
                    f"style dim {model.spec(action.layer).style_dim}")

    def add_actions(self, actions: list[ScheduledAction],
                    log_entry: dict | None = None) -> None:
        """Append actions atomically and invalidate from their lowest layer."""
        for action in actions:
            self._validate_action(action)
        for action in actions:
            action.seq = self._seq
            self._seq += 1
            self.actions.append(action)
        if actions:
            self._dirty_from = min(self._dirty_from,
                                   min(a.layer for a in actions))
        if log_entry is not None:
            self.log.append(log_entry)

    def set_global_codes(self, codes: dict[int, LatentCode],
                         log_entry: dict | None = None) -> None:
        """Replace the global style code on selected layers."""
        for layer, code in codes.items():
            if not 1 <= layer <= self.model.layer_count:
                raise ContractError(
                    f"layer {layer} out of range 1..{self.model.layer_count}")
            if code.layer != layer:
                raise ContractError(
                    f"code for layer {layer} declares layer {code.layer}")
            if code.values.shape != (self.model.spec(layer).style_dim,):
                raise ContractError(
                    f"code length {code.values.shape[0]} != style dim "
                    f"{self.model.spec(layer).style_dim}")
        for layer, code in codes.items():
            self.global_codes[layer - 1] = code
        if codes:
            self._dirty_from = min(self._dirty_from, min(codes))
        if log_entry is not None:
            self.log.append(log_entry)

    # -- synthesis ----------------------------------------------------------

    def _cohorts(self) -> dict[int, list[ScheduledAction]]:
        grouped: dict[int, list[ScheduledAction]] = {}
        for action in self.actions:
            grouped.setdefault(action.layer, []).append(action)
        for cohort in grouped.values():
            cohort.sort(key=lambda a: (a.priority, a.seq))
        return grouped

    def _run_layer(self, layer: int, cohort: list[ScheduledAction]) -> None:
        data = self._entry[layer]
        masks: list[np.ndarray] = []
        if cohort:
            effective = resolve_priority_masks(
                [(a.canonical_mask, a.priority) for a in cohort])
            res = data.shape[1:]
            masks = [area_downsample(m, res) for m in effective]
            for action, m in zip(cohort, masks):
                if action.features is None:
                    continue
                try:
                    data = blend_masked(data, action.features, m)
                except LoganError as exc:
                    raise type(exc)(
                        f"layer {layer}, object {action.object_id}: {exc}") from exc
        self._content[layer] = data

        w = self.global_codes[layer - 1]
        styled = self.model._apply_style_raw(data, w.values, layer)
        for action, m in zip(cohort, masks):
            if action.style is None:
                continue
            try:
                source = action.features if action.features is not None else data
                scale, bias = self.model._style_raw(action.style.values, layer)
                styled = blend_masked(styled, adain(source, scale, bias), m)
            except LoganError as exc:
                raise type(exc)(
                    f"layer {layer}, object {action.object_id}: {exc}") from exc
        self._entry[layer + 1] = self.model._forward_raw(styled, layer)

    def ensure_current(self) -> None:
        """Re-synthesize any stale layers (from the earliest edited layer)."""
        last = self.model.layer_count
        if self._dirty_from > last and (last + 1) in self._entry:
            return
        cohorts = self._cohorts()
        for layer in range(self._dirty_from, last + 1):
            self._run_layer(layer, cohorts.get(layer, []))
        self._dirty_from = last + 2

    # -- views --------------------------------------------------------------

    def render(self) -> np.ndarray:
        """Current 3×H×W image in [0, 1]."""
        self.ensure_current()
        return self.model._render_raw(self._entry[self.model.layer_count + 1])

    def features_at(self, layer: int, *, edited: bool = True) -> np.ndarray:
        """Cached features at a layer.

        ``edited=True`` returns the content map after the layer's patches
        were blended in (before styling); ``edited=False`` the features
        entering the layer.
        """
        if not 1 <= layer <= self.model.layer_count + 1:
            raise ContractError(
                f"layer {layer} out of range 1..{self.model.layer_count + 1}")
        self.ensure_current()
        if layer == self.model.layer_count + 1 or not edited:
            return self._entry[layer].copy()
        return self._content[layer].copy()

    def log_digest(self) -> str:
        """Hash of everything that determines the rendered image."""
        h = hashlib.sha256()
        h.update(self.model.weight_digest().encode())
        for code in self.base_codes:
            h.update(np.ascontiguousarray(code.values).tobytes())
        h.update(json.dumps(self.log, sort_keys=True,
                            separators=(",", ":")).encode())
        return h.hexdigest()
