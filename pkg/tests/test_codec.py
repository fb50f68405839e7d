"""Quantizer pins and image/float carrier round trips."""

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from noisecoder.codec import (
    dequantize_u8,
    quantize_u8,
    read_float,
    read_png,
    write_float,
    write_png,
)
from noisecoder.core import FormatError, Rng


class TestQuantizer:
    @pytest.mark.parametrize("x,u", [
        (-1.0, 0), (0.0, 128), (1.0, 255),
        (-2.0, 0), (2.0, 255),          # clamped
        (-0.5, 64), (0.5, 191),
    ])
    def test_pinned_codes(self, x, u):
        assert quantize_u8(np.array([x]))[0] == u

    def test_half_away_rounding(self):
        # (x + 1) * 127.5 = 128.5 at x = 1/127.5 * 0.5 + ... pick codes directly:
        # value 0.5 above an integer code must round up, not to-even
        x = (128.5 / 127.5) - 1.0
        assert quantize_u8(np.array([x]))[0] == 129
        x = (126.5 / 127.5) - 1.0
        assert quantize_u8(np.array([x]))[0] == 127

    def test_composed_error_bound(self):
        x = Rng(0, "q").uniform(-1, 1, 10_000)
        err = np.abs(dequantize_u8(quantize_u8(x)) - x)
        assert err.max() <= 1.0 / 255.0 + 1e-12

    def test_out_of_range_clamps_to_end_codes(self):
        x = np.array([-5.0, 5.0, -1.0001, 1.0001])
        np.testing.assert_array_equal(quantize_u8(x), [0, 255, 0, 255])

    def test_monotone(self):
        x = np.linspace(-1.2, 1.2, 4001)
        u = quantize_u8(x).astype(int)
        assert np.all(np.diff(u) >= 0)

    def test_idempotent_on_codes(self):
        u = np.arange(256, dtype=np.uint8)
        assert np.array_equal(quantize_u8(dequantize_u8(u)), u)

    @given(st.floats(-1.0, 1.0))
    def test_error_bound_property(self, x):
        err = abs(float(dequantize_u8(quantize_u8(np.array([x])))[0]) - x)
        assert err <= 1.0 / 255.0 + 1e-12


class TestPng:
    def test_round_trip_exact(self, tmp_path):
        u = Rng(1, "img").integers(0, 256, (3, 16, 16)).astype(np.uint8)
        path = tmp_path / "x.png"
        write_png(u, path)
        assert np.array_equal(read_png(path), u)

    def test_rejects_wrong_channel_count(self, tmp_path):
        with pytest.raises(FormatError, match="3 channels"):
            write_png(np.zeros((1, 4, 4), dtype=np.uint8), tmp_path / "g.png")

    def test_rejects_wrong_dtype(self, tmp_path):
        with pytest.raises(FormatError, match="uint8"):
            write_png(np.zeros((3, 4, 4)), tmp_path / "f.png")

    def test_rejects_grayscale_file(self, tmp_path):
        from PIL import Image

        path = tmp_path / "gray.png"
        Image.fromarray(np.zeros((4, 4), dtype=np.uint8), mode="L").save(path)
        with pytest.raises(FormatError, match="RGB"):
            read_png(path)

    def test_rejects_non_png(self, tmp_path):
        path = tmp_path / "junk.png"
        path.write_bytes(b"not an image")
        with pytest.raises(FormatError):
            read_png(path)


class TestFloatCarrier:
    def test_round_trip_is_f32_exact(self, tmp_path):
        x = Rng(2, "f").standard_normal((3, 8, 8)) * 0.8
        path = tmp_path / "x.nzt"
        write_float(x, path)
        back = read_float(path)
        assert np.array_equal(back, x.astype("<f4").astype(np.float64))

    def test_requires_chw(self, tmp_path):
        with pytest.raises(FormatError):
            write_float(np.zeros((4, 4)), tmp_path / "x.nzt")

    def test_read_rejects_non_carrier_rank(self, tmp_path):
        from noisecoder.core import tensor_write

        path = tmp_path / "v.nzt"
        tensor_write(np.zeros(7), path)
        with pytest.raises(FormatError):
            read_float(path)
