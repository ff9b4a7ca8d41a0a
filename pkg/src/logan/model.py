"""Layer-wise style-based generator backbone.

The generator is a stack of L layers. Each layer takes a C×H×W feature
map, restyles it per channel (instance-normalize, then scale/shift with
parameters produced by a learned affine map of the layer's latent code),
runs a 3×3 convolution plus nonlinearity, and doubles resolution on the
scheduled layers. A final 1×1 projection and sigmoid squash produce RGB.

Two backbones share this code path: a seeded, never-trained toy model
used throughout the tests, and a checkpoint adapter that loads externally
trained weights from a JSON manifest plus float32 blobs.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import AdapterFormatError, ConfigError, ContractError, NumericError

ADAIN_EPS = 1e-8
MANIFEST_FORMAT = "logan-generator"
MANIFEST_VERSION = 1

TOY_DEFAULTS = {"layer_count": 14, "channels": 16, "style_dim": 32}
TOY_MAX_RESOLUTION = 256


def toy_resolution(layer: int) -> int:
    """Toy resolution schedule: 4 at layer 1, doubling every other layer."""
    return min(4 * 2 ** ((layer - 1) // 2), TOY_MAX_RESOLUTION)


@dataclass(frozen=True)
class LatentCode:
    """Per-layer style vector."""

    layer: int
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 1:
            raise ContractError(f"latent code must be 1-D, got {values.shape}")
        if not np.isfinite(values).all():
            raise NumericError("latent code contains non-finite entries")
        object.__setattr__(self, "values", values)


@dataclass(frozen=True)
class StyleParams:
    """Per-channel scale and bias specialized from a latent code."""

    layer: int
    scale: np.ndarray
    bias: np.ndarray

    def __post_init__(self):
        if self.scale.shape != self.bias.shape or self.scale.ndim != 1:
            raise ContractError("scale and bias must be 1-D and equal length")


@dataclass
class FeatureMap:
    """C×H×W activations at one layer (layer L+1 means post-final features)."""

    layer: int
    data: np.ndarray

    def __post_init__(self):
        data = np.asarray(self.data, dtype=np.float64)
        if data.ndim != 3:
            raise ContractError(f"feature map must be C×H×W, got {data.shape}")
        if not np.isfinite(data).all():
            raise NumericError("feature map contains non-finite entries")
        self.data = data

    @property
    def channels(self) -> int:
        return self.data.shape[0]

    @property
    def height(self) -> int:
        return self.data.shape[1]

    @property
    def width(self) -> int:
        return self.data.shape[2]


def adain(data: np.ndarray, scale: np.ndarray, bias: np.ndarray,
          eps: float = ADAIN_EPS) -> np.ndarray:
    """Normalize each channel over H×W, then scale and shift.

    The eps added to the channel std keeps degenerate (constant) channels
    defined: they normalize to zero and come out as pure bias.
    """
    mu = data.mean(axis=(1, 2), keepdims=True)
    sigma = data.std(axis=(1, 2), keepdims=True)
    normalized = (data - mu) / (sigma + eps)
    return scale[:, None, None] * normalized + bias[:, None, None]


def _leaky_relu(x: np.ndarray, slope: float = 0.2) -> np.ndarray:
    return np.where(x >= 0.0, x, slope * x)


def _conv3x3_same(x: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    """3×3 zero-padded convolution, (C_in,H,W) × (C_out,C_in,3,3)."""
    _, h, w = x.shape
    padded = np.pad(x, ((0, 0), (1, 1), (1, 1)))
    windows = np.lib.stride_tricks.sliding_window_view(padded, (3, 3), axis=(1, 2))
    patches = windows.transpose(1, 2, 0, 3, 4).reshape(h * w, -1)
    out = patches @ kernel.reshape(kernel.shape[0], -1).T
    # contiguous output keeps downstream reduction order independent of
    # whether a mask blend copied the map
    return np.ascontiguousarray(out.reshape(h, w, kernel.shape[0]).transpose(2, 0, 1))


def _upsample2x_nearest(x: np.ndarray) -> np.ndarray:
    return x.repeat(2, axis=1).repeat(2, axis=2)


def _sigmoid(x: np.ndarray) -> np.ndarray:
    return 1.0 / (1.0 + np.exp(-x))


@dataclass(frozen=True)
class LayerSpec:
    channels: int
    height: int
    width: int
    style_dim: int


class GeneratorModel:
    """Immutable layer-wise generator; all operations are pure."""

    def __init__(self, kind: str, specs: list[LayerSpec],
                 output_spec: tuple[int, int, int], weights: dict,
                 seed: int | None = None):
        self.kind = kind
        self.seed = seed
        self._specs = specs
        self._output = output_spec  # (channels, height, width)
        self._weights = weights
        self._digest = None
        self.layer_count = len(specs)
        prev = None
        for i, spec in enumerate(specs):
            if prev is not None and (spec.height < prev.height or spec.width < prev.width):
                raise ConfigError(
                    f"layer {i + 1} resolution decreases: {prev} -> {spec}")
            prev = spec

    # -- declared geometry ------------------------------------------------

    def spec(self, layer: int) -> LayerSpec:
        if not 1 <= layer <= self.layer_count:
            raise ContractError(
                f"layer {layer} out of range 1..{self.layer_count}")
        return self._specs[layer - 1]

    def resolution(self, layer: int) -> tuple[int, int]:
        if layer == self.layer_count + 1:
            return (self._output[1], self._output[2])
        s = self.spec(layer)
        return (s.height, s.width)

    def channels(self, layer: int) -> int:
        if layer == self.layer_count + 1:
            return self._output[0]
        return self.spec(layer).channels

    @property
    def output_resolution(self) -> tuple[int, int]:
        return (self._output[1], self._output[2])

    # -- weights ----------------------------------------------------------

    def _weight_items(self):
        yield "constant", self._weights["constant"]
        for layer in range(1, self.layer_count + 1):
            yield f"affine_w_{layer}", self._weights["affine_w"][layer]
            yield f"affine_b_{layer}", self._weights["affine_b"][layer]
            yield f"conv_{layer}", self._weights["conv"][layer]
        yield "projection_w", self._weights["proj_w"]
        yield "projection_b", self._weights["proj_b"]

    def weight_digest(self) -> str:
        if self._digest is None:
            h = hashlib.sha256()
            for name, arr in self._weight_items():
                h.update(name.encode())
                h.update(np.ascontiguousarray(arr, dtype=np.float64).tobytes())
            self._digest = h.hexdigest()
        return self._digest

    # -- style ------------------------------------------------------------

    def style_params(self, w: LatentCode) -> StyleParams:
        scale, bias = self._style_raw(w.values, w.layer)
        return StyleParams(w.layer, scale, bias)

    def _style_raw(self, values: np.ndarray, layer: int):
        spec = self.spec(layer)
        if values.shape != (spec.style_dim,):
            raise ContractError(
                f"latent code length {values.shape[0]} != style dim "
                f"{spec.style_dim} at layer {layer}")
        y = self._weights["affine_w"][layer] @ values + self._weights["affine_b"][layer]
        c = spec.channels
        return 1.0 + y[:c], y[c:]

    def apply_style(self, feature: FeatureMap, w: LatentCode) -> FeatureMap:
        """Restyle every channel of a layer's features with the code's styles."""
        if feature.layer != w.layer:
            raise ContractError(
                f"feature layer {feature.layer} != code layer {w.layer}")
        return FeatureMap(feature.layer,
                          self._apply_style_raw(feature.data, w.values, feature.layer))

    def _apply_style_raw(self, data: np.ndarray, values: np.ndarray,
                         layer: int) -> np.ndarray:
        spec = self.spec(layer)
        if data.shape != (spec.channels, spec.height, spec.width):
            raise ContractError(
                f"feature shape {data.shape} does not match layer {layer} "
                f"spec ({spec.channels},{spec.height},{spec.width})")
        scale, bias = self._style_raw(values, layer)
        return adain(data, scale, bias)

    # -- synthesis --------------------------------------------------------

    def forward_layer(self, styled: FeatureMap, layer: int) -> FeatureMap:
        """Advance styled features through layer ``layer``'s convolution."""
        if styled.layer != layer:
            raise ContractError(
                f"feature layer {styled.layer} != requested layer {layer}")
        return FeatureMap(layer + 1, self._forward_raw(styled.data, layer))

    def _forward_raw(self, data: np.ndarray, layer: int) -> np.ndarray:
        self.spec(layer)
        out = _leaky_relu(_conv3x3_same(data, self._weights["conv"][layer]))
        h_next, _ = self.resolution(layer + 1)
        if h_next != data.shape[1]:
            out = _upsample2x_nearest(out)
        return out

    def render_rgb(self, final: FeatureMap) -> np.ndarray:
        """Project post-final-layer features to a 3×H×W image in [0, 1]."""
        if final.layer != self.layer_count + 1:
            raise ContractError(
                f"render expects post-final features (layer {self.layer_count + 1}), "
                f"got layer {final.layer}")
        return self._render_raw(final.data)

    def _render_raw(self, data: np.ndarray) -> np.ndarray:
        if not np.isfinite(data).all():
            raise NumericError("non-finite features passed to render")
        proj = np.tensordot(self._weights["proj_w"], data, axes=(1, 0))
        return _sigmoid(proj + self._weights["proj_b"][:, None, None])

    def initial_features(self) -> np.ndarray:
        return self._weights["constant"].copy()

    def synthesize(self, codes: list[LatentCode]) -> np.ndarray:
        """Run the full unedited generator path: style, convolve, render."""
        if len(codes) != self.layer_count:
            raise ContractError(
                f"need {self.layer_count} codes, got {len(codes)}")
        data = self.initial_features()
        for layer, w in enumerate(codes, start=1):
            if w.layer != layer:
                raise ContractError(
                    f"code at position {layer} declares layer {w.layer}")
            data = self._apply_style_raw(data, w.values, layer)
            data = self._forward_raw(data, layer)
        return self._render_raw(data)

    def codes_from_seed(self, seed: int) -> list[LatentCode]:
        """Deterministic per-layer codes drawn in layer order."""
        rng = np.random.default_rng(seed)
        return [LatentCode(layer, rng.standard_normal(self.spec(layer).style_dim))
                for layer in range(1, self.layer_count + 1)]

    # -- persistence ------------------------------------------------------

    def export_manifest(self, directory) -> Path:
        """Write this model as a checkpoint manifest plus float32 blobs."""
        directory = Path(directory)
        blob_dir = directory / "blobs"
        blob_dir.mkdir(parents=True, exist_ok=True)

        def write_blob(name: str, arr: np.ndarray) -> str:
            rel = f"blobs/{name}.f32"
            (directory / rel).write_bytes(
                np.ascontiguousarray(arr, dtype="<f4").tobytes())
            return rel

        layers = []
        for layer in range(1, self.layer_count + 1):
            s = self.spec(layer)
            layers.append({
                "layer": layer,
                "channels": s.channels, "height": s.height, "width": s.width,
                "style_dim": s.style_dim,
                "affine_weight": write_blob(f"affine_w_{layer:02d}",
                                            self._weights["affine_w"][layer]),
                "affine_bias": write_blob(f"affine_b_{layer:02d}",
                                          self._weights["affine_b"][layer]),
                "conv_weight": write_blob(f"conv_{layer:02d}",
                                          self._weights["conv"][layer]),
            })
        manifest = {
            "format": MANIFEST_FORMAT,
            "version": MANIFEST_VERSION,
            "layer_count": self.layer_count,
            "layers": layers,
            "output": {"channels": self._output[0],
                       "height": self._output[1], "width": self._output[2]},
            "constant": write_blob("constant", self._weights["constant"]),
            "projection_weight": write_blob("projection_w", self._weights["proj_w"]),
            "projection_bias": write_blob("projection_b", self._weights["proj_b"]),
        }
        path = directory / "manifest.json"
        path.write_text(json.dumps(manifest, indent=2, sort_keys=True))
        return path


def _toy_weights(specs: list[LayerSpec], out_channels: int, seed: int) -> dict:
    """Seeded toy weights, drawn in a fixed order.

    Values are rounded through float32 so a manifest export/import round
    trip is lossless.
    """
    rng = np.random.default_rng(seed)

    def f32(arr):
        return arr.astype(np.float32).astype(np.float64)

    c0 = specs[0].channels
    weights = {
        "constant": f32(rng.standard_normal((c0, specs[0].height, specs[0].width))),
        "affine_w": {}, "affine_b": {}, "conv": {},
    }
    for layer, spec in enumerate(specs, start=1):
        c_out = specs[layer].channels if layer < len(specs) else out_channels
        weights["affine_w"][layer] = f32(
            rng.standard_normal((2 * spec.channels, spec.style_dim))
            / np.sqrt(spec.style_dim))
        weights["affine_b"][layer] = np.zeros(2 * spec.channels)
        weights["conv"][layer] = f32(
            rng.standard_normal((c_out, spec.channels, 3, 3))
            * np.sqrt(2.0 / (9.0 * spec.channels)))
    weights["proj_w"] = f32(rng.standard_normal((3, out_channels))
                            / np.sqrt(out_channels))
    weights["proj_b"] = np.zeros(3)
    return weights


def _load_blob(directory: Path, rel: str, shape: tuple, what: str) -> np.ndarray:
    path = directory / rel
    if not path.is_file():
        raise AdapterFormatError(f"{what}: missing blob {rel!r}")
    raw = np.frombuffer(path.read_bytes(), dtype="<f4")
    expected = int(np.prod(shape))
    if raw.size != expected:
        raise AdapterFormatError(
            f"{what}: blob {rel!r} holds {raw.size} floats, expected {expected}")
    return raw.reshape(shape).astype(np.float64)


def _load_checkpoint(manifest_path) -> GeneratorModel:
    manifest_path = Path(manifest_path)
    try:
        manifest = json.loads(manifest_path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise AdapterFormatError(f"unreadable manifest: {exc}") from exc
    if manifest.get("format") != MANIFEST_FORMAT:
        raise AdapterFormatError(
            f"not a generator manifest: format={manifest.get('format')!r}")
    if manifest.get("version") != MANIFEST_VERSION:
        raise AdapterFormatError(
            f"unsupported manifest version {manifest.get('version')!r}")
    entries = manifest.get("layers", [])
    layer_count = manifest.get("layer_count")
    if layer_count != len(entries) or layer_count < 2:
        raise AdapterFormatError(
            f"layer_count {layer_count} inconsistent with {len(entries)} entries")
    directory = manifest_path.parent
    out = manifest["output"]
    output_spec = (out["channels"], out["height"], out["width"])

    specs = []
    for i, entry in enumerate(entries):
        if entry.get("layer") != i + 1:
            raise AdapterFormatError(f"layer entries out of order at index {i}")
        specs.append(LayerSpec(entry["channels"], entry["height"],
                               entry["width"], entry["style_dim"]))
    for prev, nxt in zip(specs, specs[1:] + [LayerSpec(*output_spec, specs[-1].style_dim)]):
        if nxt.height not in (prev.height, 2 * prev.height) or \
           nxt.width not in (prev.width, 2 * prev.width):
            raise AdapterFormatError(
                f"resolution step {prev.height}x{prev.width} -> "
                f"{nxt.height}x{nxt.width} is neither equal nor doubled")

    weights = {
        "constant": _load_blob(directory, manifest["constant"],
                               (specs[0].channels, specs[0].height, specs[0].width),
                               "constant"),
        "affine_w": {}, "affine_b": {}, "conv": {},
    }
    for layer, (entry, spec) in enumerate(zip(entries, specs), start=1):
        c_out = specs[layer].channels if layer < len(specs) else output_spec[0]
        weights["affine_w"][layer] = _load_blob(
            directory, entry["affine_weight"],
            (2 * spec.channels, spec.style_dim), f"layer {layer}")
        weights["affine_b"][layer] = _load_blob(
            directory, entry["affine_bias"], (2 * spec.channels,), f"layer {layer}")
        weights["conv"][layer] = _load_blob(
            directory, entry["conv_weight"], (c_out, spec.channels, 3, 3),
            f"layer {layer}")
    weights["proj_w"] = _load_blob(directory, manifest["projection_weight"],
                                   (3, output_spec[0]), "projection")
    weights["proj_b"] = _load_blob(directory, manifest["projection_bias"],
                                   (3,), "projection")
    return GeneratorModel("checkpoint", specs, output_spec, weights)


def instantiate_model(config) -> GeneratorModel:
    """Build a generator from a config dict or a model-ref string.

    Strings: ``toy:<seed>`` or ``toy:<seed>:<layer_count>`` for the toy
    backbone, anything else is a checkpoint manifest path.
    """
    if isinstance(config, str):
        config = parse_model_ref(config)
    kind = config.get("kind")
    if kind == "toy":
        params = dict(TOY_DEFAULTS)
        params.update({k: v for k, v in config.items() if k in params})
        seed = config.get("seed", 0)
        layer_count = params["layer_count"]
        if layer_count < 2:
            raise ConfigError(f"layer_count must be >= 2, got {layer_count}")
        specs = [LayerSpec(params["channels"], toy_resolution(layer),
                           toy_resolution(layer), params["style_dim"])
                 for layer in range(1, layer_count + 1)]
        out_res = toy_resolution(layer_count + 1)
        output_spec = (params["channels"], out_res, out_res)
        weights = _toy_weights(specs, params["channels"], seed)
        return GeneratorModel("toy", specs, output_spec, weights, seed=seed)
    if kind == "checkpoint":
        return _load_checkpoint(config["manifest"])
    raise ConfigError(f"unknown model kind {kind!r}")


def parse_model_ref(ref: str) -> dict:
    if ref.startswith("toy:"):
        parts = ref.split(":")
        try:
            config = {"kind": "toy", "seed": int(parts[1])}
            if len(parts) > 2:
                config["layer_count"] = int(parts[2])
            if len(parts) > 3:
                raise ValueError
        except (ValueError, IndexError):
            raise ConfigError(f"bad toy model ref {ref!r}; want toy:<seed>[:<layers>]")
        return config
    return {"kind": "checkpoint", "manifest": ref}
