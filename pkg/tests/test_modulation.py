"""Content and style modulation operator identities.

The load-bearing properties: an all-zero mask is a bitwise no-op, an
all-one mask is a bitwise replacement, and soft masks blend convexly.
Style modulation with an empty mask must reduce to plain global styling.
"""

from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from logan.errors import ContractError
from logan.model import FeatureMap, LatentCode
from logan.modulation import RegionPatch, blend_masked, cmod, smod


def _maps(model, rng, layer=3):
    shape = (model.channels(layer), *model.resolution(layer))
    host = FeatureMap(layer, rng.standard_normal(shape))
    patch = FeatureMap(layer, rng.standard_normal(shape))
    return host, patch


def _code(model, rng, layer=3):
    return LatentCode(layer, rng.standard_normal(model.spec(layer).style_dim))


class TestBlend:
    def test_zero_mask_is_bitwise_identity(self, rng):
        base = rng.standard_normal((4, 8, 8))
        rep = rng.standard_normal((4, 8, 8))
        out = blend_masked(base, rep, np.zeros((8, 8)))
        assert np.array_equal(out, base)

    def test_one_mask_is_bitwise_replacement(self, rng):
        base = rng.standard_normal((4, 8, 8))
        rep = rng.standard_normal((4, 8, 8))
        out = blend_masked(base, rep, np.ones((8, 8)))
        assert np.array_equal(out, rep)

    def test_binary_mask_mixes_exactly(self, rng):
        base = rng.standard_normal((2, 4, 4))
        rep = rng.standard_normal((2, 4, 4))
        mask = (rng.random((4, 4)) > 0.5).astype(np.float64)
        out = blend_masked(base, rep, mask)
        np.testing.assert_array_equal(out[:, mask == 1.0], rep[:, mask == 1.0])
        np.testing.assert_array_equal(out[:, mask == 0.0], base[:, mask == 0.0])

    def test_soft_mask_is_convex(self, rng):
        base = rng.standard_normal((2, 6, 6))
        rep = rng.standard_normal((2, 6, 6))
        mask = rng.random((6, 6))
        out = blend_masked(base, rep, mask)
        lo = np.minimum(base, rep)
        hi = np.maximum(base, rep)
        assert (out >= lo - 1e-12).all() and (out <= hi + 1e-12).all()

    def test_half_mask_is_midpoint(self):
        base = np.zeros((1, 2, 2))
        rep = np.full((1, 2, 2), 2.0)
        out = blend_masked(base, rep, np.full((2, 2), 0.5))
        np.testing.assert_allclose(out, 1.0, atol=1e-12)

    @settings(max_examples=30, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1))
    def test_endpoint_exactness_property(self, seed):
        rng = np.random.default_rng(seed)
        base = rng.standard_normal((3, 5, 5))
        rep = rng.standard_normal((3, 5, 5))
        mask = rng.random((5, 5))
        mask[rng.random((5, 5)) < 0.3] = 0.0
        mask[rng.random((5, 5)) < 0.3] = 1.0
        out = blend_masked(base, rep, mask)
        assert np.array_equal(out[:, mask == 0.0], base[:, mask == 0.0])
        assert np.array_equal(out[:, mask == 1.0], rep[:, mask == 1.0])


class TestContentModulation:
    def test_empty_mask_keeps_host(self, small_model, rng):
        host, patch = _maps(small_model, rng)
        out = cmod(host, RegionPatch(patch, np.zeros(patch.data.shape[1:])))
        assert np.array_equal(out.data, host.data)
        assert out.layer == host.layer

    def test_full_mask_takes_patch(self, small_model, rng):
        host, patch = _maps(small_model, rng)
        out = cmod(host, RegionPatch(patch, np.ones(patch.data.shape[1:])))
        assert np.array_equal(out.data, patch.data)

    def test_region_replacement(self, small_model, rng):
        host, patch = _maps(small_model, rng)
        mask = np.zeros(host.data.shape[1:])
        mask[:4, :4] = 1.0
        out = cmod(host, RegionPatch(patch, mask))
        np.testing.assert_array_equal(out.data[:, :4, :4], patch.data[:, :4, :4])
        np.testing.assert_array_equal(out.data[:, 4:, :], host.data[:, 4:, :])

    def test_shape_mismatch_rejected(self, small_model, rng):
        host, _ = _maps(small_model, rng, layer=3)
        patch = FeatureMap(3, rng.standard_normal((2, 4, 4)))
        with pytest.raises(ContractError, match="mask shape"):
            RegionPatch(patch, np.ones(host.data.shape[1:]))
        with pytest.raises(ContractError, match="patch shape"):
            cmod(host, RegionPatch(patch, np.ones((4, 4))))

    def test_layer_mismatch_rejected(self, small_model, rng):
        host, _ = _maps(small_model, rng, layer=2)
        other = FeatureMap(3, rng.standard_normal(host.data.shape))
        with pytest.raises(ContractError, match="layer"):
            cmod(host, RegionPatch(other, np.ones(host.data.shape[1:])))


class TestStyleModulation:
    def test_empty_mask_reduces_to_global_styling(self, small_model, rng):
        host, patch = _maps(small_model, rng)
        w_global = _code(small_model, rng)
        w_patch = _code(small_model, rng)
        out = smod(host, w_global, RegionPatch(
            patch, np.zeros(host.data.shape[1:]), w_patch), small_model)
        expected = small_model.apply_style(host, w_global)
        assert np.array_equal(out.data, expected.data)

    def test_full_mask_styles_patch_with_its_own_code(self, small_model, rng):
        host, patch = _maps(small_model, rng)
        w_global = _code(small_model, rng)
        w_patch = _code(small_model, rng)
        out = smod(host, w_global, RegionPatch(
            patch, np.ones(host.data.shape[1:]), w_patch), small_model)
        expected = small_model.apply_style(patch, w_patch)
        assert np.array_equal(out.data, expected.data)

    def test_each_side_uses_own_statistics(self, small_model, rng):
        """Inside the region the result must be invariant to host content."""
        host_a, patch = _maps(small_model, rng)
        host_b = FeatureMap(3, rng.standard_normal(host_a.data.shape))
        w_global = _code(small_model, rng)
        w_patch = _code(small_model, rng)
        mask = np.zeros(host_a.data.shape[1:])
        mask[2:6, 2:6] = 1.0
        region = RegionPatch(patch, mask, w_patch)
        out_a = smod(host_a, w_global, region, small_model)
        out_b = smod(host_b, w_global, region, small_model)
        np.testing.assert_array_equal(out_a.data[:, 2:6, 2:6],
                                      out_b.data[:, 2:6, 2:6])

    def test_missing_style_code_rejected(self, small_model, rng):
        host, patch = _maps(small_model, rng)
        w_global = _code(small_model, rng)
        with pytest.raises(ContractError, match="style code"):
            smod(host, w_global,
                 RegionPatch(patch, np.ones(host.data.shape[1:])), small_model)

    def test_inconsistent_layers_rejected(self, small_model, rng):
        host, patch = _maps(small_model, rng, layer=3)
        w_global = _code(small_model, rng, layer=3)
        w_patch = _code(small_model, rng, layer=4)
        with pytest.raises(ContractError, match="inconsistent layers"):
            smod(host, w_global,
                 RegionPatch(patch, np.ones(host.data.shape[1:]), w_patch),
                 small_model)
