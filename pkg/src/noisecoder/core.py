"""Core types, deterministic RNG, bit packing, and the NZT1 tensor container.

Latent tensors are plain float64 numpy arrays of shape (channels, height,
width), C-ordered, so flat index = c*H*W + y*W + x. All ODE math runs in
float64; anything that hits disk or the wire is stored as little-endian f32.
"""

from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass, field

import numpy as np

# NZT1 container: magic, u8 ndim, ndim little-endian u32 dims, then LE f32
# data. No metadata, no alignment padding.
NZT1_MAGIC = b"NZT1"

# Hard cap on total elements so corrupt headers cannot trigger huge allocs.
MAX_TENSOR_ELEMENTS = 1 << 31


class NoisecoderError(Exception):
    """Base class for errors raised by this package."""


class FormatError(NoisecoderError):
    """Malformed or unreadable serialized data (NZT1, PNG, config)."""


class CapacityError(NoisecoderError):
    """Message geometry does not fit the carrier or the key."""


# ---------------------------------------------------------------------------
# deterministic RNG
# ---------------------------------------------------------------------------

class Rng:
    """Counter-based generator with named substreams.

    A (seed, purpose) pair is hashed to a 128-bit Philox key, so every
    substream is an independent, reproducible stream: the same 64-bit seed
    produces bit-identical draws on every platform, and distinct purpose
    strings never collide unless sha256 does.
    """

    ALGORITHM = "philox4x64 keyed by sha256(seed:purpose)[:16]"

    def __init__(self, seed: int, purpose: str = ""):
        self.seed = int(seed)
        self.purpose = purpose
        digest = hashlib.sha256(f"{self.seed}:{purpose}".encode()).digest()
        key = np.frombuffer(digest[:16], dtype="<u8")
        self._gen = np.random.Generator(np.random.Philox(key=key))

    def substream(self, purpose: str) -> "Rng":
        """Derive an independent stream for a named purpose.

        Nested purposes concatenate with '/' so substream('a').substream('b')
        and substream('a/b') coincide.
        """
        joined = f"{self.purpose}/{purpose}" if self.purpose else purpose
        return Rng(self.seed, joined)

    # Thin passthroughs; keep the numpy Generator surface small and explicit.
    def standard_normal(self, shape) -> np.ndarray:
        return self._gen.standard_normal(shape)

    def random(self, shape=None) -> np.ndarray:
        return self._gen.random(shape)

    def uniform(self, low, high, size=None) -> np.ndarray:
        return self._gen.uniform(low, high, size)

    def bits(self, count: int) -> np.ndarray:
        """count uniform message bits as uint8 0/1."""
        return (self._gen.random(count) < 0.5).astype(np.uint8)

    def integers(self, low, high=None, size=None):
        return self._gen.integers(low, high, size)

    def __repr__(self):
        return f"Rng(seed={self.seed}, purpose={self.purpose!r})"


# ---------------------------------------------------------------------------
# message and key types
# ---------------------------------------------------------------------------

@dataclass
class Message:
    """Bit payload plus the geometry it is laid out for.

    bits holds 0/1 uint8 values ordered channel-major to match the carrier;
    for b bits per element, each group of b consecutive bits belongs to one
    carrier element, most significant first.
    """

    bits: np.ndarray
    width: int
    height: int
    bits_per_element: int = 1
    channels_used: int = 1

    def __post_init__(self):
        self.bits = np.ascontiguousarray(np.asarray(self.bits, dtype=np.uint8))
        if self.bits.ndim != 1:
            raise CapacityError("message bits must be a flat array")
        if not np.all((self.bits == 0) | (self.bits == 1)):
            raise CapacityError("message bits must be 0 or 1")
        expected = self.bits_per_element * self.channels_used * self.width * self.height
        if len(self.bits) != expected:
            raise CapacityError(
                f"message length {len(self.bits)} != "
                f"b*n*W*H = {expected} for the declared geometry"
            )

    @property
    def bits_per_pixel(self) -> float:
        return len(self.bits) / float(self.width * self.height)

    def __len__(self):
        return len(self.bits)


PROJECTION_KINDS = ("mn", "mb", "mc", "multibits", "multichannel")


@dataclass(frozen=True)
class ProjectionSpec:
    """Which projection maps message bits onto carrier noise.

    kind 'multibits' carries bits_per_element >= 2; every other kind is one
    bit per carrier element.
    """

    kind: str
    bits_per_element: int = 1

    def __post_init__(self):
        if self.kind not in PROJECTION_KINDS:
            raise CapacityError(f"unknown projection kind {self.kind!r}")
        if self.kind == "multibits":
            if self.bits_per_element < 2:
                raise CapacityError("multibits requires bits_per_element >= 2")
        elif self.bits_per_element != 1:
            raise CapacityError(f"{self.kind} carries exactly 1 bit per element")

    @classmethod
    def parse(cls, text: str) -> "ProjectionSpec":
        """Parse 'mb', 'multibits:3', ... as used in config files."""
        name, _, arg = text.strip().lower().partition(":")
        if name == "multibits":
            if not arg:
                raise CapacityError("multibits needs a bit depth, e.g. multibits:2")
            return cls(name, int(arg))
        if arg:
            raise CapacityError(f"projection {name!r} takes no argument")
        return cls(name)

    def __str__(self):
        if self.kind == "multibits":
            return f"multibits:{self.bits_per_element}"
        return self.kind


@dataclass
class StegoKey:
    """Shared secret: projection choice, seed, and codebook when needed."""

    projection: ProjectionSpec
    seed: int
    codebook: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.projection.kind == "multichannel" and self.codebook is None:
            raise CapacityError("multichannel projection requires a codebook")

    def rng(self, purpose: str) -> Rng:
        return Rng(self.seed, purpose)


# ---------------------------------------------------------------------------
# bit packing
# ---------------------------------------------------------------------------

def pack_bits(data: bytes, count: int | None = None) -> np.ndarray:
    """Unpack a byte payload into `count` bits, MSB first.

    count defaults to all 8*len(data) bits; asking for more than the payload
    holds is an error rather than zero-fill.
    """
    buf = np.frombuffer(bytes(data), dtype=np.uint8)
    total = 8 * len(buf)
    if count is None:
        count = total
    if count < 0 or count > total:
        raise CapacityError(f"payload underflow: want {count} bits, have {total}")
    return np.unpackbits(buf)[:count]


def bits_to_bytes(bits: np.ndarray) -> bytes:
    """Pack bits (MSB first) back into bytes; a ragged tail is zero-padded."""
    arr = np.asarray(bits, dtype=np.uint8)
    if arr.size and not np.all((arr == 0) | (arr == 1)):
        raise CapacityError("bits must be 0 or 1")
    return np.packbits(arr).tobytes()


# ---------------------------------------------------------------------------
# NZT1 tensor I/O
# ---------------------------------------------------------------------------

def tensor_write(arr: np.ndarray, path) -> None:
    """Serialize a float tensor as NZT1 (data cast to little-endian f32)."""
    a = np.ascontiguousarray(arr, dtype=np.float64)
    if a.ndim < 1 or a.ndim > 255:
        raise FormatError(f"unsupported rank {a.ndim}")
    if any(d <= 0 or d >= 1 << 32 for d in a.shape):
        raise FormatError(f"bad dimensions {a.shape}")
    if a.size > MAX_TENSOR_ELEMENTS:
        raise FormatError("dimension overflow")
    if not np.all(np.isfinite(a)):
        raise FormatError("refusing to serialize non-finite values")
    with open(path, "wb") as fh:
        fh.write(NZT1_MAGIC)
        fh.write(struct.pack("<B", a.ndim))
        fh.write(struct.pack(f"<{a.ndim}I", *a.shape))
        fh.write(a.astype("<f4").tobytes())


def tensor_read(path) -> np.ndarray:
    """Read an NZT1 tensor back as float64 (values remain f32-exact)."""
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < 5 or blob[:4] != NZT1_MAGIC:
        raise FormatError("magic mismatch: not an NZT1 tensor")
    ndim = blob[4]
    if ndim < 1:
        raise FormatError("bad dimensions: rank 0")
    header_end = 5 + 4 * ndim
    if len(blob) < header_end:
        raise FormatError("truncated payload: incomplete dimension header")
    dims = struct.unpack(f"<{ndim}I", blob[5:header_end])
    if any(d == 0 for d in dims):
        raise FormatError(f"bad dimensions {dims}")
    count = 1
    for d in dims:
        count *= d
        if count > MAX_TENSOR_ELEMENTS:
            raise FormatError("dimension overflow")
    expected = header_end + 4 * count
    if len(blob) < expected:
        raise FormatError("truncated payload")
    if len(blob) > expected:
        raise FormatError("trailing data after payload")
    data = np.frombuffer(blob, dtype="<f4", count=count, offset=header_end)
    return data.astype(np.float64).reshape(dims)


def require_carrier_shape(arr: np.ndarray) -> tuple[int, int, int]:
    """Validate a (C, H, W) latent tensor and return its shape."""
    a = np.asarray(arr)
    if a.ndim != 3 or any(d <= 0 for d in a.shape):
        raise FormatError(f"expected a (C, H, W) tensor, got shape {a.shape}")
    return a.shape
