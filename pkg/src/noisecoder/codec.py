"""Carrier serialization: 8-bit quantization, PNG, and the float container.

The sample lives in [-1, 1]; the 8-bit path maps that affinely onto 0..255
with round-half-away-from-zero and clamping, which is where the decodable
information loss in the PNG pipeline comes from. The float path keeps f32
precision via the NZT1 container.
"""

from __future__ import annotations

import numpy as np
from PIL import Image, UnidentifiedImageError

from .core import FormatError, require_carrier_shape, tensor_read, tensor_write

_HALF_RANGE = 127.5


def quantize_u8(x: np.ndarray) -> np.ndarray:
    """Map [-1, 1] floats to u8: clamp(round((x + 1) * 127.5), 0, 255).

    Rounding is half away from zero, so x = 0 lands on 128 rather than
    flip-flopping with the platform's banker's rounding.
    """
    v = (np.asarray(x, dtype=np.float64) + 1.0) * _HALF_RANGE
    rounded = np.copysign(np.floor(np.abs(v) + 0.5), v)
    return np.clip(rounded, 0, 255).astype(np.uint8)


def dequantize_u8(u: np.ndarray) -> np.ndarray:
    """Inverse affine map; composed error is at most 1/255 for in-range x."""
    return np.asarray(u, dtype=np.float64) / _HALF_RANGE - 1.0


def write_png(u: np.ndarray, path) -> None:
    """Write a (3, H, W) u8 tensor as an RGB PNG."""
    a = np.asarray(u)
    require_carrier_shape(a)
    if a.shape[0] != 3:
        raise FormatError(f"PNG carrier must have 3 channels, got {a.shape[0]}")
    if a.dtype != np.uint8:
        raise FormatError(f"PNG carrier must be uint8, got {a.dtype}")
    Image.fromarray(np.transpose(a, (1, 2, 0)), mode="RGB").save(path, format="PNG")


def read_png(path) -> np.ndarray:
    """Read an RGB PNG back as a (3, H, W) u8 tensor."""
    try:
        with Image.open(path) as img:
            if img.mode != "RGB":
                raise FormatError(f"expected an RGB PNG, got mode {img.mode}")
            arr = np.asarray(img, dtype=np.uint8)
    except UnidentifiedImageError as exc:
        raise FormatError(f"not a PNG image: {exc}") from exc
    return np.ascontiguousarray(np.transpose(arr, (2, 0, 1)))


def write_float(x: np.ndarray, path) -> None:
    """Float carrier arm: NZT1, f32 on disk."""
    arr = np.asarray(x, dtype=np.float64)
    require_carrier_shape(arr)
    tensor_write(arr, path)


def read_float(path) -> np.ndarray:
    arr = tensor_read(path)
    require_carrier_shape(arr)
    return arr
