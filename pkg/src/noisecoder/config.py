"""Flat `key = value` configuration shared by sender and receiver.

The file is UTF-8 text; blank lines and lines starting with '#' are
ignored, and everything after an unquoted '#' on a value line is treated as
a comment. Sender and receiver must agree on every field here (it plays the
role of the stego key), so unknown keys are rejected loudly rather than
silently dropped.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import CapacityError, FormatError, ProjectionSpec, StegoKey, tensor_read

_KNOWN_KEYS = {
    "model", "projection", "channels", "seed", "codebook", "context",
    "sigma_max", "sigma_min", "rho", "steps", "payload_bits", "shape",
}


@dataclass
class Config:
    model: str = "gmm:builtin"
    projection: ProjectionSpec = field(default_factory=lambda: ProjectionSpec("mb"))
    channels: int = 1
    seed: int = 0
    codebook: str | None = None
    context: str | None = None
    sigma_max: float = 80.0
    sigma_min: float = 0.002
    rho: float = 7.0
    steps: int = 40
    payload_bits: int | None = None
    shape: tuple[int, int, int] | None = None  # required for bridge models

    def stego_key(self) -> StegoKey:
        codebook = None
        if self.projection.kind == "multichannel":
            if not self.codebook:
                raise CapacityError("multichannel projection requires codebook = <path>")
            codebook = tensor_read(self.codebook)
            if not np.all((codebook == 0) | (codebook == 1)):
                raise CapacityError("codebook entries must be 0 or 1")
            codebook = codebook.astype(np.uint8)
        return StegoKey(self.projection, self.seed, codebook)


def _parse_shape(text: str) -> tuple[int, int, int]:
    parts = [p for p in text.replace(",", " ").split() if p]
    if len(parts) != 3:
        raise FormatError(f"shape must be C,H,W, got {text!r}")
    dims = tuple(int(p) for p in parts)
    if any(d <= 0 for d in dims):
        raise FormatError(f"shape entries must be positive, got {text!r}")
    return dims


def parse_config(path) -> Config:
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise FormatError(f"cannot read config {path}: {exc}") from exc

    values: dict[str, str] = {}
    for lineno, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise FormatError(f"{path}:{lineno}: expected key = value")
        key, _, value = line.partition("=")
        key = key.strip().lower()
        value = value.strip()
        if key not in _KNOWN_KEYS:
            raise FormatError(f"{path}:{lineno}: unknown key {key!r}")
        if key in values:
            raise FormatError(f"{path}:{lineno}: duplicate key {key!r}")
        values[key] = value

    cfg = Config()
    try:
        if "model" in values:
            cfg.model = values["model"]
        if "projection" in values:
            cfg.projection = ProjectionSpec.parse(values["projection"])
        if "channels" in values:
            cfg.channels = int(values["channels"])
        if "seed" in values:
            cfg.seed = int(values["seed"])
        if "codebook" in values:
            cfg.codebook = values["codebook"]
        if "context" in values:
            cfg.context = values["context"]
        if "sigma_max" in values:
            cfg.sigma_max = float(values["sigma_max"])
        if "sigma_min" in values:
            cfg.sigma_min = float(values["sigma_min"])
        if "rho" in values:
            cfg.rho = float(values["rho"])
        if "steps" in values:
            cfg.steps = int(values["steps"])
        if "payload_bits" in values:
            cfg.payload_bits = int(values["payload_bits"])
        if "shape" in values:
            cfg.shape = _parse_shape(values["shape"])
    except ValueError as exc:
        raise FormatError(f"bad value in {path}: {exc}") from exc

    if cfg.channels < 1:
        raise CapacityError("channels must be >= 1")
    return cfg


def write_config(cfg: Config, path) -> None:
    lines = [
        "# noisecoder shared configuration",
        f"model = {cfg.model}",
        f"projection = {cfg.projection}",
        f"channels = {cfg.channels}",
        f"seed = {cfg.seed}",
        f"sigma_max = {cfg.sigma_max:g}",
        f"sigma_min = {cfg.sigma_min:g}",
        f"rho = {cfg.rho:g}",
        f"steps = {cfg.steps}",
    ]
    if cfg.codebook:
        lines.append(f"codebook = {cfg.codebook}")
    if cfg.context:
        lines.append(f"context = {cfg.context}")
    if cfg.payload_bits is not None:
        lines.append(f"payload_bits = {cfg.payload_bits}")
    if cfg.shape is not None:
        lines.append("shape = {},{},{}".format(*cfg.shape))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
