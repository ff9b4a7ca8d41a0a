"""Transplantable-object bank: extraction, storage, clustering, rotation.

An asset freezes one object out of a session: its canonical-resolution
mask plus, per stored layer, the session's content features (zeroed
outside the region) and the layer's latent code. Assets can be shifted
on the canvas, persisted to a digest-checked directory, clustered by
mask shape into pose groups, and rotated by interpolating between the
latent codes of two pose-cluster representatives.
"""

from __future__ import annotations

import hashlib
import json
import os
import shutil
import tempfile
import uuid
from dataclasses import dataclass
from pathlib import Path
from typing import TYPE_CHECKING

import numpy as np

from .errors import (ContractError, CorruptionError, ManifestVersionError,
                     UnknownObjectError)
from .masks import (area_downsample, assign_priority, load_mask_png,
                    save_mask_png, validate_mask)
from .model import LatentCode

if TYPE_CHECKING:
    from .session import Session

BANK_FORMAT = "logan-bank"
BANK_VERSION = 1

# layers assets span by default; covers removal (4), insertion (7) and
# the pose-controlling range (3..6) with headroom for layer sweeps
DEFAULT_EXTRACT_LAYERS = tuple(range(1, 11))

POSE_LAYERS = (3, 4, 5, 6)
CLUSTER_DIMS = (32, 32)
CLUSTER_COUNT = 4
ROTATION_STEPS = 10


def _shift2d(arr: np.ndarray, dy: int, dx: int) -> np.ndarray:
    """Integer-translate the trailing two axes with zero fill."""
    out = np.zeros_like(arr)
    h, w = arr.shape[-2:]
    sy0, sy1 = max(0, -dy), min(h, h - dy)
    sx0, sx1 = max(0, -dx), min(w, w - dx)
    if sy0 >= sy1 or sx0 >= sx1:
        return out
    out[..., sy0 + dy:sy1 + dy, sx0 + dx:sx1 + dx] = arr[..., sy0:sy1, sx0:sx1]
    return out


@dataclass(frozen=True)
class AssetLayer:
    """One stored layer of an asset: content features plus its code."""

    layer: int
    features: np.ndarray
    code: LatentCode


class ObjectAsset:
    """One transplantable object.

    Translations are kept as an accumulated offset over the original
    arrays, so equal-and-opposite shifts cancel exactly instead of
    compounding edge clipping at coarse layers.
    """

    def __init__(self, asset_id: str, category: str, priority: int,
                 mask: np.ndarray, layers: dict[int, AssetLayer],
                 offset: tuple[int, int] = (0, 0)):
        if not layers:
            raise ContractError("asset needs at least one stored layer")
        self.id = asset_id
        self.category = category
        self.priority = int(priority)
        self._origin_mask = validate_mask(mask)
        if self._origin_mask.max() == 0.0:
            raise ContractError("asset mask is empty")
        self._origin_layers = dict(sorted(layers.items()))
        self.offset = (int(offset[0]), int(offset[1]))  # (dx, dy)
        for layer, entry in self._origin_layers.items():
            if entry.layer != layer or entry.code.layer != layer:
                raise ContractError(
                    f"layer entry {layer} carries mismatched layer tags")
            if entry.features.ndim != 3:
                raise ContractError(
                    f"layer {layer} features must be C×H×W, "
                    f"got {entry.features.shape}")

    @property
    def canonical_resolution(self) -> tuple[int, int]:
        return self._origin_mask.shape

    @property
    def layers(self) -> tuple[int, ...]:
        return tuple(self._origin_layers)

    @property
    def mask(self) -> np.ndarray:
        dx, dy = self.offset
        if (dx, dy) == (0, 0):
            return self._origin_mask.copy()
        return _shift2d(self._origin_mask, dy, dx)

    @property
    def bbox(self) -> tuple[int, int, int, int]:
        """Support bounding box (y0, x0, y1, x1), half-open, canonical res."""
        ys, xs = np.nonzero(self.mask)
        return (int(ys.min()), int(xs.min()), int(ys.max()) + 1, int(xs.max()) + 1)

    def code_at(self, layer: int) -> LatentCode:
        return self._layer(layer).code

    def features_at(self, layer: int) -> np.ndarray:
        """Layer features with the accumulated offset applied."""
        entry = self._layer(layer)
        dx, dy = self.offset
        if (dx, dy) == (0, 0):
            return entry.features.copy()
        h_c, w_c = self._origin_mask.shape
        _, h_l, w_l = entry.features.shape
        return _shift2d(entry.features,
                        int(np.rint(dy * h_l / h_c)),
                        int(np.rint(dx * w_l / w_c)))

    def _layer(self, layer: int) -> AssetLayer:
        if layer not in self._origin_layers:
            raise ContractError(
                f"asset {self.id!r} has no layer {layer}; stored: "
                f"{list(self._origin_layers)}")
        return self._origin_layers[layer]

    def equals(self, other: "ObjectAsset", ignore_id: bool = True) -> bool:
        """Field-by-field equality on realized values."""
        if not ignore_id and self.id != other.id:
            return False
        if (self.category, self.priority, self.layers) != \
                (other.category, other.priority, other.layers):
            return False
        if not np.array_equal(self.mask, other.mask):
            return False
        for layer in self.layers:
            if not np.array_equal(self.features_at(layer), other.features_at(layer)):
                return False
            if not np.array_equal(self.code_at(layer).values,
                                  other.code_at(layer).values):
                return False
        return True


def extract_object(session: "Session", mask: np.ndarray, category: str,
                   layers=None, *, priority: int | None = None,
                   asset_id: str | None = None) -> ObjectAsset:
    """Freeze the session content under ``mask`` into an asset.

    Stores, per layer, the post-edit content features zeroed outside the
    mask's footprint at that layer's resolution, and the session's layer
    code. Slices are exact, so reinserting at the same spot reproduces
    the source content.
    """
    mask = validate_mask(mask)
    if mask.shape != session.model.output_resolution:
        raise ContractError(
            f"mask shape {mask.shape} != canonical resolution "
            f"{session.model.output_resolution}")
    if mask.max() == 0.0:
        raise ContractError("cannot extract an empty mask")
    if layers is None:
        layers = [l for l in DEFAULT_EXTRACT_LAYERS
                  if l <= session.model.layer_count]
    assignment = assign_priority(category, override=priority)
    entries = {}
    for layer in layers:
        data = session.features_at(layer, edited=True)
        support = area_downsample(mask, data.shape[1:]) > 0.0
        entries[layer] = AssetLayer(
            layer, np.where(support[None, :, :], data, 0.0),
            session.global_codes[layer - 1])
    return ObjectAsset(asset_id or uuid.uuid4().hex, category,
                       assignment.priority, mask, entries)


def transform_asset(asset: ObjectAsset, dx: int, dy: int) -> ObjectAsset:
    """Translate an asset by (dx, dy) canonical pixels (right, down)."""
    dx, dy = int(dx), int(dy)
    if (dx, dy) == (0, 0):
        return asset
    h, w = asset.canonical_resolution
    y0, x0, y1, x1 = asset.bbox
    clipped = []
    if y0 + dy < 0:
        clipped.append(f"rows [{y0 + dy},0)")
    if y1 + dy > h:
        clipped.append(f"rows [{h},{y1 + dy})")
    if x0 + dx < 0:
        clipped.append(f"cols [{x0 + dx},0)")
    if x1 + dx > w:
        clipped.append(f"cols [{w},{x1 + dx})")
    if clipped:
        raise ContractError(
            f"shift ({dx},{dy}) pushes asset {asset.id!r} out of frame: "
            + ", ".join(clipped))
    return ObjectAsset(asset.id, asset.category, asset.priority,
                       asset._origin_mask, asset._origin_layers,
                       offset=(asset.offset[0] + dx, asset.offset[1] + dy))


class ObjectBank:
    """Id-addressed collection of assets; iteration is id-sorted."""

    def __init__(self, assets=()):
        self._assets: dict[str, ObjectAsset] = {}
        for asset in assets:
            self.add(asset)

    def add(self, asset: ObjectAsset) -> None:
        if asset.id in self._assets:
            raise ContractError(f"duplicate asset id {asset.id!r}")
        self._assets[asset.id] = asset

    def remove(self, asset_id: str) -> None:
        if asset_id not in self._assets:
            raise UnknownObjectError(asset_id)
        del self._assets[asset_id]

    def get(self, asset_id: str) -> ObjectAsset:
        if asset_id not in self._assets:
            raise UnknownObjectError(asset_id)
        return self._assets[asset_id]

    def ids(self) -> list[str]:
        return sorted(self._assets)

    def by_category(self, category: str) -> list[ObjectAsset]:
        return [self._assets[i] for i in self.ids()
                if self._assets[i].category == category]

    def __len__(self) -> int:
        return len(self._assets)

    def __iter__(self):
        return iter(self._assets[i] for i in self.ids())


def _digest(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def persist_bank(bank: ObjectBank, path) -> Path:
    """Write the bank as manifest + float32 blobs + mask PNGs, atomically.

    The directory is built under a temporary name and swapped into place,
    so readers never observe a half-written bank. Features are stored as
    little-endian float32; masks must be exactly 8-bit representable.
    """
    path = Path(path)
    parent = path.absolute().parent
    parent.mkdir(parents=True, exist_ok=True)
    tmp = Path(tempfile.mkdtemp(prefix=path.name + ".tmp-", dir=parent))
    try:
        manifest_assets = []
        for asset in bank:
            rel_dir = f"assets/{asset.id}"
            asset_dir = tmp / rel_dir
            asset_dir.mkdir(parents=True)

            mask = asset.mask
            quantized = np.round(mask * 255.0)
            if not np.array_equal(quantized / 255.0, mask):
                raise ContractError(
                    f"asset {asset.id!r} mask is not 8-bit representable")
            save_mask_png(mask, asset_dir / "mask.png")
            mask_digest = _digest((asset_dir / "mask.png").read_bytes())

            layer_entries = []
            for layer in asset.layers:
                features = np.ascontiguousarray(
                    asset.features_at(layer), dtype="<f4").tobytes()
                code = np.ascontiguousarray(
                    asset.code_at(layer).values, dtype="<f4").tobytes()
                feat_rel = f"{rel_dir}/layer_{layer:02d}.f32"
                code_rel = f"{rel_dir}/code_{layer:02d}.f32"
                (tmp / feat_rel).write_bytes(features)
                (tmp / code_rel).write_bytes(code)
                layer_entries.append({
                    "layer": layer,
                    "features": feat_rel,
                    "shape": list(asset.features_at(layer).shape),
                    "features_digest": _digest(features),
                    "code": code_rel,
                    "code_length": asset.code_at(layer).values.shape[0],
                    "code_digest": _digest(code),
                })
            manifest_assets.append({
                "id": asset.id,
                "category": asset.category,
                "priority": asset.priority,
                "canonical": list(asset.canonical_resolution),
                "mask": f"{rel_dir}/mask.png",
                "mask_digest": mask_digest,
                "layers": layer_entries,
            })
        manifest = {"format": BANK_FORMAT, "version": BANK_VERSION,
                    "assets": manifest_assets}
        (tmp / "manifest.json").write_text(
            json.dumps(manifest, indent=2, sort_keys=True))

        if path.exists():
            old = Path(tempfile.mkdtemp(prefix=path.name + ".old-", dir=parent))
            os.replace(path, old / "bank")
            os.replace(tmp, path)
            shutil.rmtree(old)
        else:
            os.replace(tmp, path)
    except BaseException:
        shutil.rmtree(tmp, ignore_errors=True)
        raise
    return path


def _read_checked(directory: Path, rel: str, digest: str, asset_id: str) -> bytes:
    file = directory / rel
    if not file.is_file():
        raise CorruptionError(f"asset {asset_id!r}: missing blob {rel!r}")
    data = file.read_bytes()
    if _digest(data) != digest:
        raise CorruptionError(f"asset {asset_id!r}: digest mismatch on {rel!r}")
    return data


def load_bank(path) -> ObjectBank:
    path = Path(path)
    manifest_file = path / "manifest.json"
    if not manifest_file.is_file():
        raise CorruptionError(f"no bank manifest at {manifest_file}")
    manifest = json.loads(manifest_file.read_text())
    if manifest.get("format") != BANK_FORMAT:
        raise CorruptionError(
            f"not a bank manifest: format={manifest.get('format')!r}")
    if manifest.get("version") != BANK_VERSION:
        raise ManifestVersionError(
            f"unsupported bank version {manifest.get('version')!r}")

    bank = ObjectBank()
    for record in manifest.get("assets", []):
        asset_id = record["id"]
        _read_checked(path, record["mask"], record["mask_digest"], asset_id)
        mask = load_mask_png(path / record["mask"])
        entries = {}
        for layer_rec in record["layers"]:
            layer = layer_rec["layer"]
            shape = tuple(layer_rec["shape"])
            raw = _read_checked(path, layer_rec["features"],
                                layer_rec["features_digest"], asset_id)
            if len(raw) != int(np.prod(shape)) * 4:
                raise CorruptionError(
                    f"asset {asset_id!r}: blob {layer_rec['features']!r} has "
                    f"{len(raw)} bytes, expected {int(np.prod(shape)) * 4}")
            features = np.frombuffer(raw, dtype="<f4").reshape(shape).astype(np.float64)
            raw_code = _read_checked(path, layer_rec["code"],
                                     layer_rec["code_digest"], asset_id)
            code = np.frombuffer(raw_code, dtype="<f4").astype(np.float64)
            entries[layer] = AssetLayer(layer, features, LatentCode(layer, code))
        bank.add(ObjectAsset(asset_id, record["category"], record["priority"],
                             mask, entries))
    return bank


# -- pose clustering ---------------------------------------------------------


@dataclass(frozen=True)
class PoseClusterModel:
    """K-means pose groups over downsampled object masks."""

    category: str
    dims: tuple[int, int]
    centers: np.ndarray                      # (M, H_s*W_s)
    representative_ids: tuple[str, ...]
    representative_codes: tuple[dict, ...]   # per center: {layer: LatentCode}

    def __post_init__(self):
        if self.centers.shape[0] < 2:
            raise ContractError("need at least 2 clusters")
        for i in range(self.centers.shape[0]):
            for j in range(i + 1, self.centers.shape[0]):
                if np.array_equal(self.centers[i], self.centers[j]):
                    raise ContractError(f"centers {i} and {j} coincide")

    @property
    def cluster_count(self) -> int:
        return self.centers.shape[0]

    def assign(self, asset: ObjectAsset) -> int:
        """Index of the nearest center for an asset's mask shape."""
        vec = area_downsample(asset.mask, self.dims).ravel()
        d = ((self.centers - vec[None, :]) ** 2).sum(axis=1)
        return int(np.argmin(d))


def _kmeans_pp_init(x: np.ndarray, m: int, rng: np.random.Generator) -> np.ndarray:
    n = x.shape[0]
    chosen = [int(rng.integers(n))]
    d2 = ((x - x[chosen[0]][None, :]) ** 2).sum(axis=1)
    for _ in range(1, m):
        total = d2.sum()
        if total == 0.0:
            # remaining points coincide with a center; take any unused row
            nxt = next(i for i in range(n) if i not in chosen)
        else:
            # side="right" so r=0 cannot land on an already-chosen point
            r = rng.random() * total
            nxt = int(np.searchsorted(np.cumsum(d2), r, side="right"))
        chosen.append(nxt)
        d2 = np.minimum(d2, ((x - x[nxt][None, :]) ** 2).sum(axis=1))
    return x[chosen].copy()


def _lloyd(x: np.ndarray, centers: np.ndarray,
           max_iter: int = 300, rel_tol: float = 1e-6):
    n, m = x.shape[0], centers.shape[0]
    prev = np.inf
    for _ in range(max_iter):
        d = ((x[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
        labels = d.argmin(axis=1)
        cost = d[np.arange(n), labels]
        inertia = float(cost.sum())
        for k in range(m):
            members = labels == k
            if members.any():
                centers[k] = x[members].mean(axis=0)
        empties = [k for k in range(m) if not (labels == k).any()]
        if empties:
            # rescue each empty cluster with a distinct costliest point
            order = np.argsort(-cost, kind="stable")
            for k, idx in zip(empties, order):
                centers[k] = x[idx]
        if prev - inertia <= rel_tol * max(inertia, 1e-12):
            break
        prev = inertia
    d = ((x[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
    labels = d.argmin(axis=1)
    return centers, labels, float(d[np.arange(n), labels].sum())


def cluster_poses(assets, m: int = CLUSTER_COUNT,
                  dims: tuple[int, int] = CLUSTER_DIMS,
                  seed: int = 0) -> PoseClusterModel:
    """Group assets of one category into ``m`` pose clusters by mask shape.

    Masks are box-filtered to ``dims`` and flattened; k-means++ seeding
    plus Lloyd iterations run over rows sorted canonically, so the result
    does not depend on the input order. Each center is represented by
    the latent codes of its nearest real asset.
    """
    assets = list(assets)
    if len(assets) < m:
        raise ContractError(f"need at least {m} assets, got {len(assets)}")
    categories = {a.category for a in assets}
    if len(categories) != 1:
        raise ContractError(f"assets span multiple categories: {sorted(categories)}")

    vectors = {a.id: area_downsample(a.mask, dims).ravel() for a in assets}
    order = sorted(assets, key=lambda a: (vectors[a.id].tobytes(), a.id))
    x = np.stack([vectors[a.id] for a in order])

    rng = np.random.default_rng(seed)
    centers, _, _ = _lloyd(x, _kmeans_pp_init(x, m, rng))

    # canonical center order: by first coordinate, then full vector
    perm = sorted(range(m), key=lambda k: (centers[k, 0], centers[k].tobytes()))
    centers = centers[perm]

    rep_ids, rep_codes = [], []
    for k in range(m):
        d = ((x - centers[k][None, :]) ** 2).sum(axis=1)
        nearest = order[int(np.argmin(d))]
        rep_ids.append(nearest.id)
        rep_codes.append({layer: nearest.code_at(layer)
                          for layer in nearest.layers})
    return PoseClusterModel(order[0].category, tuple(dims), centers,
                            tuple(rep_ids), tuple(rep_codes))


@dataclass(frozen=True)
class RotationPath:
    """Latent codes for each interpolation step s = 0..S between two poses."""

    steps: int
    codes: tuple[tuple[LatentCode, ...], ...]  # indexed [s][layer position]

    def at(self, s: int) -> dict[int, LatentCode]:
        if not 0 <= s <= self.steps:
            raise ContractError(f"step {s} out of range 0..{self.steps}")
        return {code.layer: code for code in self.codes[s]}


def rotation_path(left: int, right: int, steps: int,
                  model: PoseClusterModel) -> RotationPath:
    """Linear latent interpolation between two cluster representatives.

    Endpoints reuse the representative codes verbatim; interior steps are
    w_left + (s/steps) * (w_right - w_left), per stored layer.
    """
    if steps < 1:
        raise ContractError(f"steps must be >= 1, got {steps}")
    for ref in (left, right):
        if not 0 <= ref < model.cluster_count:
            raise ContractError(
                f"center {ref} out of range 0..{model.cluster_count - 1}")
    codes_l = model.representative_codes[left]
    codes_r = model.representative_codes[right]
    if set(codes_l) != set(codes_r):
        raise ContractError(
            f"representatives store different layers: "
            f"{sorted(codes_l)} vs {sorted(codes_r)}")
    layers = sorted(codes_l)
    all_steps = []
    for s in range(steps + 1):
        if s == 0:
            step_codes = [codes_l[layer] for layer in layers]
        elif s == steps:
            step_codes = [codes_r[layer] for layer in layers]
        else:
            frac = s / steps
            step_codes = [
                LatentCode(layer, codes_l[layer].values
                           + frac * (codes_r[layer].values - codes_l[layer].values))
                for layer in layers]
        all_steps.append(tuple(step_codes))
    return RotationPath(steps, tuple(all_steps))
