"""Projection maps and their threshold inverses."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from noisecoder.core import CapacityError, Message, ProjectionSpec, Rng, StegoKey
from noisecoder.projection import (
    MC_THRESHOLD,
    SQRT2,
    capacity_bits,
    codebook_for_image,
    embed_into_channels,
    extract_message,
    generate_codebook,
    invert_mc,
    invert_multibits,
    invert_multichannel,
    invert_sign,
    multibits_levels,
    project_mb,
    project_mc,
    project_message,
    project_mn,
    project_multibits,
    project_multichannel,
)

bit_arrays = st.lists(st.integers(0, 1), min_size=1, max_size=64).map(
    lambda v: np.array(v, dtype=np.uint8)
)


# ---------------------------------------------------------------------------
# level tables
# ---------------------------------------------------------------------------

class TestLevels:
    def test_two_bit_table_is_pinned(self):
        # symbol order 00, 01, 10, 11; deliberately non-monotone (10 above 11)
        expected = np.array([-3.0, -1.0, 3.0, 1.0]) / np.sqrt(5.0)
        np.testing.assert_allclose(multibits_levels(2), expected, rtol=0, atol=0)

    @pytest.mark.parametrize("b", [3, 4, 5, 8])
    def test_levels_have_zero_mean_unit_variance(self, b):
        lv = multibits_levels(b)
        assert lv.size == 2**b
        assert abs(lv.mean()) < 1e-15
        assert abs(lv.var() - 1.0) < 1e-12

    def test_wider_tables_ascend_with_symbol_value(self):
        for b in (3, 4, 5):
            assert np.all(np.diff(multibits_levels(b)) > 0)

    def test_three_bit_levels_closed_form(self):
        # odd integers -7..7 scaled by 1/sqrt(21)
        expected = np.arange(-7, 8, 2) / np.sqrt(21.0)
        np.testing.assert_allclose(multibits_levels(3), expected, rtol=0, atol=0)

    def test_depth_bounds(self):
        with pytest.raises(CapacityError):
            multibits_levels(1)
        with pytest.raises(CapacityError):
            multibits_levels(17)


# ---------------------------------------------------------------------------
# single-bit projections
# ---------------------------------------------------------------------------

class TestSignProjections:
    def test_mb_levels(self):
        out = project_mb(np.array([0, 1, 1, 0], dtype=np.uint8))
        np.testing.assert_array_equal(out, [-1.0, 1.0, 1.0, -1.0])

    def test_mn_keeps_magnitudes(self):
        z = np.array([0.5, -1.5, 2.0, -0.1])
        out = project_mn(z, np.array([1, 1, 0, 0], dtype=np.uint8))
        np.testing.assert_array_equal(out, [0.5, 1.5, -2.0, -0.1])
        np.testing.assert_array_equal(np.abs(out), np.abs(z))

    def test_invert_sign(self):
        vals = np.array([0.3, -0.2, 1e-12, 0.0, -5.0])
        np.testing.assert_array_equal(invert_sign(vals), [1, 0, 1, 0, 0])

    def test_mc_codebook_values(self):
        bits = np.array([0, 1, 0, 1, 1, 1], dtype=np.uint8)
        out = project_mc(bits, Rng(0, "mc"))
        assert np.all(out[bits == 0] == 0.0)
        assert np.all(np.abs(out[bits == 1]) == SQRT2)

    def test_mc_sign_draw_is_reproducible(self):
        bits = Rng(1, "b").bits(64)
        a = project_mc(bits, Rng(5, "mc_signs"))
        b = project_mc(bits, Rng(5, "mc_signs"))
        assert np.array_equal(a, b)

    def test_invert_mc_threshold(self):
        vals = np.array([1.2, 0.5, -1.0])
        np.testing.assert_array_equal(invert_mc(vals), [1, 0, 1])

    def test_invert_mc_boundary_goes_to_zero_bit(self):
        # the threshold itself is not "above" the threshold
        assert invert_mc(np.array([MC_THRESHOLD])).tolist() == [0]
        assert invert_mc(np.array([-MC_THRESHOLD])).tolist() == [0]

    @given(bit_arrays)
    def test_mb_round_trip(self, bits):
        assert np.array_equal(invert_sign(project_mb(bits)), bits)

    @given(bit_arrays, st.integers(0, 2**32 - 1))
    def test_mn_round_trip(self, bits, seed):
        z = Rng(seed, "z").standard_normal(bits.size)
        assert np.array_equal(invert_sign(project_mn(z, bits)), bits)

    @given(bit_arrays, st.integers(0, 2**32 - 1))
    def test_mc_round_trip(self, bits, seed):
        assert np.array_equal(invert_mc(project_mc(bits, Rng(seed, "s"))), bits)

    def test_decision_margins_are_ordered(self):
        # distance from each codeword to its decision boundary; the ladder
        # mb > mc > multibits(2) is what drives the accuracy ordering under
        # bounded recovery error
        margin_mb = 1.0
        margin_mc = SQRT2 - MC_THRESHOLD
        lv = np.sort(multibits_levels(2))
        margin_b2 = float(np.min(np.diff(lv)) / 2.0)
        assert margin_mc == pytest.approx(MC_THRESHOLD)
        assert margin_mb > margin_mc > margin_b2
        assert margin_b2 == pytest.approx(1.0 / np.sqrt(5.0))

    def test_mb_survives_sub_margin_noise(self):
        bits = Rng(3, "b").bits(512)
        noisy = project_mb(bits) + Rng(4, "n").uniform(-0.99, 0.99, 512)
        assert np.array_equal(invert_sign(noisy), bits)


# ---------------------------------------------------------------------------
# multibits
# ---------------------------------------------------------------------------

class TestMultibits:
    def test_symbols_map_msb_first(self):
        bits = np.array([1, 0, 0, 1], dtype=np.uint8)  # symbols 10, 01
        out = project_multibits(bits, 2)
        lv = multibits_levels(2)
        np.testing.assert_array_equal(out, [lv[2], lv[1]])

    def test_decode_pinned_examples(self):
        # 0.9 sits above the top boundary 2/sqrt(5) ~ 0.894 -> symbol 10
        assert invert_multibits(np.array([0.9]), 2).tolist() == [1, 0]
        # exactly on the boundary resolves toward the smaller level, 11
        boundary = 2.0 / np.sqrt(5.0)
        assert invert_multibits(np.array([boundary]), 2).tolist() == [1, 1]
        # zero is the 01/11 midpoint; smaller level wins again
        assert invert_multibits(np.array([0.0]), 2).tolist() == [0, 1]

    def test_bit_count_must_divide(self):
        with pytest.raises(CapacityError):
            project_multibits(np.zeros(5, dtype=np.uint8), 2)

    @given(st.integers(2, 5), st.data())
    def test_round_trip(self, b, data):
        n_sym = data.draw(st.integers(1, 32))
        bits = np.array(
            data.draw(st.lists(st.integers(0, 1), min_size=b * n_sym,
                               max_size=b * n_sym)),
            dtype=np.uint8,
        )
        assert np.array_equal(invert_multibits(project_multibits(bits, b), b), bits)

    @pytest.mark.parametrize("b", [2, 3, 4])
    def test_round_trip_survives_sub_margin_noise(self, b):
        lv = np.sort(multibits_levels(b))
        margin = float(np.min(np.diff(lv)) / 2.0)
        bits = Rng(7, "b").bits(b * 256)
        vals = project_multibits(bits, b)
        noisy = vals + Rng(8, "n").uniform(-0.9 * margin, 0.9 * margin, vals.shape)
        assert np.array_equal(invert_multibits(noisy, b), bits)

    def test_every_symbol_decodes_to_itself(self):
        for b in (2, 3, 4, 5):
            lv = multibits_levels(b)
            symbols = np.arange(2**b)
            shifts = np.arange(b - 1, -1, -1)
            bits = ((symbols[:, None] >> shifts) & 1).astype(np.uint8).reshape(-1)
            assert np.array_equal(invert_multibits(lv, b), bits)


# ---------------------------------------------------------------------------
# multichannel
# ---------------------------------------------------------------------------

class TestMultichannel:
    def test_channels_are_keyed_copies(self):
        cb = generate_codebook(Rng(0, "cb"), (3, 4, 4))
        bits = Rng(1, "b").bits(16)
        out = project_multichannel(bits, cb)
        assert out.shape == (3, 4, 4)
        msg_sign = (2.0 * bits.astype(float) - 1.0).reshape(4, 4)
        for c in range(3):
            key_sign = 2.0 * cb[c].astype(float) - 1.0
            np.testing.assert_array_equal(out[c], msg_sign * key_sign)

    def test_round_trip(self):
        cb = generate_codebook(Rng(2, "cb"), (3, 8, 8))
        bits = Rng(3, "b").bits(64)
        assert np.array_equal(invert_multichannel(project_multichannel(bits, cb), cb), bits)

    def test_majority_vote_absorbs_one_bad_channel(self):
        cb = generate_codebook(Rng(4, "cb"), (3, 8, 8))
        bits = Rng(5, "b").bits(64)
        carrier = project_multichannel(bits, cb)
        carrier[1] *= -1.0  # one channel fully corrupted
        assert np.array_equal(invert_multichannel(carrier, cb), bits)

    def test_wrong_codebook_shape_raises(self):
        cb = generate_codebook(Rng(0, "cb"), (3, 4, 4))
        with pytest.raises(CapacityError):
            invert_multichannel(np.zeros((3, 5, 5)), cb)

    def test_non_binary_codebook_raises(self):
        with pytest.raises(CapacityError):
            project_multichannel(np.zeros(16, dtype=np.uint8), np.full((3, 4, 4), 2))

    def test_codebook_rotation_by_index(self):
        key = StegoKey(
            ProjectionSpec("multichannel"), seed=6,
            codebook=generate_codebook(Rng(6, "codebook"), (3, 4, 4)),
        )
        a0 = codebook_for_image(key, 0, (3, 4, 4))
        a0_again = codebook_for_image(key, 0, (3, 4, 4))
        a1 = codebook_for_image(key, 1, (3, 4, 4))
        assert np.array_equal(a0, a0_again)
        assert not np.array_equal(a0, a1)


# ---------------------------------------------------------------------------
# carrier assembly and the full encode/decode paths
# ---------------------------------------------------------------------------

class TestCarrierAssembly:
    def test_untouched_channels_survive(self):
        z = Rng(0, "z").standard_normal((3, 4, 4))
        payload = np.ones((1, 4, 4))
        out = embed_into_channels(z, payload)
        np.testing.assert_array_equal(out[0], payload[0])
        assert np.array_equal(out[1:], z[1:])

    def test_two_dimensional_payload_promotes(self):
        z = Rng(0, "z").standard_normal((3, 4, 4))
        out = embed_into_channels(z, np.ones((4, 4)))
        np.testing.assert_array_equal(out[0], np.ones((4, 4)))

    def test_shape_mismatch_raises(self):
        z = np.zeros((3, 4, 4))
        with pytest.raises(CapacityError):
            embed_into_channels(z, np.ones((2, 5, 5)))
        with pytest.raises(CapacityError):
            embed_into_channels(z, np.ones((4, 4, 4)))

    def test_capacity_values(self):
        shape = (3, 16, 16)
        assert capacity_bits(ProjectionSpec("mb"), shape) == 3 * 256
        assert capacity_bits(ProjectionSpec("multibits", 3), shape) == 9 * 256
        assert capacity_bits(ProjectionSpec("multichannel"), shape) == 256


class TestFullPaths:
    SHAPE = (3, 8, 8)

    def _key(self, kind, b=1, seed=10):
        if kind == "multichannel":
            cb = generate_codebook(Rng(seed, "codebook"), self.SHAPE)
            return StegoKey(ProjectionSpec(kind), seed=seed, codebook=cb)
        return StegoKey(ProjectionSpec(kind, b), seed=seed)

    @pytest.mark.parametrize("kind,b,channels", [
        ("mn", 1, 1), ("mb", 1, 1), ("mc", 1, 1),
        ("mb", 1, 3), ("multibits", 2, 1), ("multibits", 3, 2),
        ("multichannel", 1, 1),
    ])
    def test_round_trip(self, kind, b, channels):
        key = self._key(kind, b)
        c, h, w = self.SHAPE
        bits = Rng(11, "payload").bits(b * channels * h * w)
        msg = Message(bits, width=w, height=h,
                      bits_per_element=b, channels_used=channels)
        z = Rng(12, "noise").standard_normal(self.SHAPE)
        carrier = project_message(z, msg, key)
        back = extract_message(carrier, key, channels_used=channels)
        assert np.array_equal(back.bits, bits)
        if kind not in ("multichannel",) and channels < c:
            assert np.array_equal(carrier[channels:], z[channels:])

    def test_projected_channel_statistics(self):
        # projected values should stay near zero mean, unit variance
        key = self._key("mb")
        bits = Rng(13, "p").bits(64 * 64)
        msg = Message(bits, width=64, height=64)
        z = Rng(14, "n").standard_normal((3, 64, 64))
        carrier = project_message(z, msg, key)
        assert abs(carrier[0].mean()) < 5.0 / 64
        assert abs(carrier[0].var() - 1.0) < 5.0 * np.sqrt(2.0) / 64

    def test_geometry_mismatch_raises(self):
        key = self._key("mb")
        msg = Message(np.zeros(16, dtype=np.uint8), width=4, height=4)
        with pytest.raises(CapacityError, match="geometry"):
            project_message(np.zeros((3, 8, 8)), msg, key)

    def test_channels_used_out_of_range(self):
        key = self._key("mb")
        with pytest.raises(CapacityError):
            extract_message(np.zeros(self.SHAPE), key, channels_used=4)
        with pytest.raises(CapacityError):
            extract_message(np.zeros(self.SHAPE), key, channels_used=0)

    def test_bits_per_element_mismatch_raises(self):
        key = self._key("multibits", 3)
        msg = Message(np.zeros(2 * 64, dtype=np.uint8),
                      width=8, height=8, bits_per_element=2)
        with pytest.raises(CapacityError):
            project_message(np.zeros(self.SHAPE), msg, key)
