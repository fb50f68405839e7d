"""Message projections: deterministic maps from bits to carrier noise.

Each projection sends a bit block to one noise channel so that, over uniform
payloads, the projected values keep zero mean and unit variance and stay
element-wise independent. The receiver inverts with thresholds only; none of
the sender's randomness is needed to decode.

Channel layout: a message of n channels occupies carrier channels 0..n-1;
remaining channels keep their fresh standard-normal draws. With b bits per
element, bit group i*b:(i+1)*b (MSB first) belongs to flat element i in
channel-major order.
"""

from __future__ import annotations

import numpy as np

from .core import CapacityError, Message, Rng, StegoKey

SQRT2 = float(np.sqrt(2.0))
MC_THRESHOLD = SQRT2 / 2.0

# 2-bit codeword table in symbol order 00, 01, 10, 11. The association is
# deliberately non-monotone (10 sits above 11); keep it exactly as published.
_MB2_LEVELS = np.array([-3.0, -1.0, 3.0, 1.0]) / np.sqrt(5.0)


def multibits_levels(b: int) -> np.ndarray:
    """Carrier levels for b-bit symbols, indexed by symbol value.

    Levels are the 2^b odd multiples (2k+1-2^b) scaled to unit variance under
    uniform symbols; for b = 2 the published non-monotone association is used
    instead of the ascending one.
    """
    if b < 2:
        raise CapacityError("multibits requires b >= 2")
    if b > 16:
        raise CapacityError("multibits depth above 16 is not supported")
    if b == 2:
        return _MB2_LEVELS.copy()
    k = np.arange(2**b, dtype=np.float64)
    scale = np.sqrt((4.0**b - 1.0) / 3.0)
    return (2.0 * k + 1.0 - 2.0**b) / scale


def _decode_nearest(values: np.ndarray, levels_by_symbol: np.ndarray) -> np.ndarray:
    """Nearest-level decode; exact midpoints resolve toward the smaller level."""
    order = np.argsort(levels_by_symbol, kind="stable")
    sorted_levels = levels_by_symbol[order]
    boundaries = 0.5 * (sorted_levels[:-1] + sorted_levels[1:])
    # side='left' sends a value equal to a boundary into the lower bin
    idx = np.searchsorted(boundaries, values, side="left")
    return order[idx]


# ---------------------------------------------------------------------------
# single-bit projections
# ---------------------------------------------------------------------------

def project_mn(z: np.ndarray, bits: np.ndarray) -> np.ndarray:
    """Magnitude-preserving projection: keep |z|, set the sign from the bit."""
    z = np.asarray(z, dtype=np.float64)
    m = _check_bits(bits, z.size)
    mag = np.abs(z.reshape(-1))
    return np.where(m == 1, mag, -mag).reshape(z.shape)


def project_mb(bits: np.ndarray, shape=None) -> np.ndarray:
    """Binary projection: bit 1 -> +1, bit 0 -> -1."""
    m = np.asarray(bits, dtype=np.uint8)
    out = 2.0 * m.astype(np.float64) - 1.0
    return out.reshape(shape) if shape is not None else out


def project_mc(bits: np.ndarray, rng: Rng, shape=None) -> np.ndarray:
    """Centered projection: bit 0 -> 0, bit 1 -> +/-sqrt(2) equiprobably.

    The sign draw comes from the sender's rng and is irrelevant to decoding;
    both choices land on the same side of the |.| threshold.
    """
    m = np.asarray(bits, dtype=np.uint8)
    signs = np.where(rng.random(m.shape) < 0.5, -SQRT2, SQRT2)
    out = np.where(m == 1, signs, 0.0)
    return out.reshape(shape) if shape is not None else out


def invert_sign(values: np.ndarray) -> np.ndarray:
    """Shared inverse for mn and mb: bit = 1 iff the value is positive."""
    return (np.asarray(values).reshape(-1) > 0).astype(np.uint8)


def invert_mc(values: np.ndarray) -> np.ndarray:
    """bit = 1 iff |value| exceeds sqrt(2)/2, the midpoint of the two codebooks."""
    return (np.abs(np.asarray(values).reshape(-1)) > MC_THRESHOLD).astype(np.uint8)


# ---------------------------------------------------------------------------
# multibits
# ---------------------------------------------------------------------------

def project_multibits(bits: np.ndarray, b: int, shape=None) -> np.ndarray:
    """Group bits into b-bit symbols (MSB first) and emit their levels."""
    m = np.asarray(bits, dtype=np.uint8).reshape(-1)
    if m.size % b:
        raise CapacityError(f"bit count {m.size} is not a multiple of b={b}")
    weights = 1 << np.arange(b - 1, -1, -1)
    symbols = m.reshape(-1, b) @ weights
    out = multibits_levels(b)[symbols]
    return out.reshape(shape) if shape is not None else out


def invert_multibits(values: np.ndarray, b: int) -> np.ndarray:
    """Nearest-codeword decode back to bits, ties toward the smaller level."""
    flat = np.asarray(values, dtype=np.float64).reshape(-1)
    symbols = _decode_nearest(flat, multibits_levels(b))
    shifts = np.arange(b - 1, -1, -1)
    return ((symbols[:, None] >> shifts) & 1).astype(np.uint8).reshape(-1)


# ---------------------------------------------------------------------------
# multichannel
# ---------------------------------------------------------------------------

def generate_codebook(rng: Rng, shape) -> np.ndarray:
    """Uniform 0/1 codebook over the full (C, H, W) carrier shape."""
    return (rng.random(tuple(shape)) < 0.5).astype(np.uint8)


def codebook_for_image(key: StegoKey, index: int, shape) -> np.ndarray:
    """Optional per-image codebook rotation, derived from the key seed."""
    return generate_codebook(key.rng(f"codebook/{index}"), shape)


def project_multichannel(bits: np.ndarray, codebook: np.ndarray) -> np.ndarray:
    """Replicate a 1-bpp message across every channel, sign-keyed per element.

    Element (c, y, x) carries (2m - 1)*(2C[c,y,x] - 1), so each channel is an
    independently keyed +/-1 copy of the message and channels stay
    uncorrelated even though they encode the same payload.
    """
    cb = _check_codebook(codebook)
    channels, height, width = cb.shape
    m = _check_bits(bits, height * width).reshape(height, width)
    msg_sign = 2.0 * m.astype(np.float64) - 1.0
    key_sign = 2.0 * cb.astype(np.float64) - 1.0
    return msg_sign[None, :, :] * key_sign


def invert_multichannel(values: np.ndarray, codebook: np.ndarray) -> np.ndarray:
    """Undo the per-channel keying, then take a per-pixel majority vote."""
    cb = _check_codebook(codebook)
    v = np.asarray(values, dtype=np.float64)
    if v.shape != cb.shape:
        raise CapacityError(f"carrier shape {v.shape} != codebook shape {cb.shape}")
    key_sign = 2.0 * cb.astype(np.float64) - 1.0
    votes = (v * key_sign > 0).sum(axis=0)
    return (2 * votes > cb.shape[0]).astype(np.uint8).reshape(-1)


# ---------------------------------------------------------------------------
# carrier assembly
# ---------------------------------------------------------------------------

def embed_into_channels(z: np.ndarray, payload: np.ndarray) -> np.ndarray:
    """Overwrite the first payload channels of fresh noise z, keep the rest."""
    z = np.asarray(z, dtype=np.float64)
    p = np.asarray(payload, dtype=np.float64)
    if p.ndim == 2:
        p = p[None, :, :]
    if p.ndim != 3 or p.shape[1:] != z.shape[1:]:
        raise CapacityError(f"payload shape {p.shape} does not match carrier {z.shape}")
    n = p.shape[0]
    if n > z.shape[0]:
        raise CapacityError(f"payload needs {n} channels, carrier has {z.shape[0]}")
    out = z.copy()
    out[:n] = p
    return out


def capacity_bits(spec, shape) -> int:
    """Largest payload the projection can carry on a (C, H, W) carrier."""
    channels, height, width = shape
    if spec.kind == "multichannel":
        return height * width
    return spec.bits_per_element * channels * height * width


def project_message(z: np.ndarray, message: Message, key: StegoKey) -> np.ndarray:
    """Full encoder: project message bits and assemble the carrier tensor.

    z supplies both the untouched channels and, for mn, the magnitudes of the
    projected ones. The mc sign draw comes from the key seed so repeated runs
    are reproducible.
    """
    spec = key.projection
    shape = z.shape
    if message.width != shape[2] or message.height != shape[1]:
        raise CapacityError(
            f"message geometry {message.height}x{message.width} does not match "
            f"carrier {shape[1]}x{shape[2]}"
        )
    if spec.kind == "multichannel":
        if message.channels_used != 1 or message.bits_per_element != 1:
            raise CapacityError("multichannel carries a 1 bpp message")
        return project_multichannel(message.bits, key.codebook)

    n = message.channels_used
    if n > shape[0]:
        raise CapacityError(f"message uses {n} channels, carrier has {shape[0]}")
    if message.bits_per_element != spec.bits_per_element:
        raise CapacityError(
            f"message has {message.bits_per_element} bits per element, "
            f"projection {spec} expects {spec.bits_per_element}"
        )
    block = shape[1] * shape[2]
    sub = (n, shape[1], shape[2])
    if spec.kind == "mn":
        payload = project_mn(z[:n], message.bits)
    elif spec.kind == "mb":
        payload = project_mb(message.bits, sub)
    elif spec.kind == "mc":
        payload = project_mc(message.bits, key.rng("mc_signs"), sub)
    elif spec.kind == "multibits":
        payload = project_multibits(message.bits, spec.bits_per_element, sub)
    else:  # unreachable; ProjectionSpec validates kinds
        raise CapacityError(f"unknown projection {spec.kind!r}")
    return embed_into_channels(z, payload)


def extract_message(z_rec: np.ndarray, key: StegoKey, channels_used: int) -> Message:
    """Full decoder: read back the payload from recovered noise."""
    spec = key.projection
    c, h, w = z_rec.shape
    if spec.kind == "multichannel":
        bits = invert_multichannel(z_rec, key.codebook)
        return Message(bits, width=w, height=h, bits_per_element=1, channels_used=1)
    n = int(channels_used)
    if n < 1 or n > c:
        raise CapacityError(f"channels_used {n} out of range for carrier with {c}")
    region = z_rec[:n].reshape(-1)
    if spec.kind in ("mn", "mb"):
        bits = invert_sign(region)
    elif spec.kind == "mc":
        bits = invert_mc(region)
    else:
        bits = invert_multibits(region, spec.bits_per_element)
    return Message(
        bits, width=w, height=h,
        bits_per_element=spec.bits_per_element, channels_used=n,
    )


def _check_bits(bits, expected: int) -> np.ndarray:
    m = np.asarray(bits, dtype=np.uint8).reshape(-1)
    if m.size != expected:
        raise CapacityError(f"expected {expected} bits, got {m.size}")
    return m


def _check_codebook(codebook) -> np.ndarray:
    if codebook is None:
        raise CapacityError("multichannel projection requires a codebook")
    cb = np.asarray(codebook)
    if cb.ndim != 3:
        raise CapacityError(f"codebook must be (C, H, W), got shape {cb.shape}")
    if not np.all((cb == 0) | (cb == 1)):
        raise CapacityError("codebook entries must be 0 or 1")
    return cb.astype(np.uint8)
