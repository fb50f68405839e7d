"""Sigma schedule and the deterministic Heun sampler, both directions.

The forward pass integrates the probability-flow ODE dx/dsigma =
(x - D(x; sigma)) / sigma from sigma_max down to 0, starting at x =
sigma_max * z. Because the flow is deterministic, integrating the same grid
upward recovers the initial noise from a sample; that inverse is what makes
the carrier decodable.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import CapacityError, Message, NoisecoderError, StegoKey
from .projection import extract_message, project_message


class SamplerError(NoisecoderError):
    """Integration failed (divergence, bad schedule, shape mismatch)."""


@dataclass(frozen=True)
class SigmaSchedule:
    """Strictly decreasing noise levels sigma_0..sigma_{N-1} plus final 0."""

    sigma_max: float = 80.0
    sigma_min: float = 0.002
    rho: float = 7.0
    steps: int = 40
    values: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.steps < 2:
            raise SamplerError("schedule needs at least 2 steps")
        if not (0 < self.sigma_min < self.sigma_max):
            raise SamplerError("need 0 < sigma_min < sigma_max")
        if self.rho <= 0:
            raise SamplerError("rho must be positive")
        n = self.steps
        i = np.arange(n, dtype=np.float64)
        inv = 1.0 / self.rho
        ramp = self.sigma_max**inv + (i / (n - 1)) * (
            self.sigma_min**inv - self.sigma_max**inv
        )
        grid = ramp**self.rho
        # the float formula hits the endpoints only to ~1e-15; pin them exact
        grid[0] = self.sigma_max
        grid[-1] = self.sigma_min
        values = np.concatenate([grid, [0.0]])
        object.__setattr__(self, "values", values)
        if np.any(np.diff(values) >= 0):
            raise SamplerError("schedule is not strictly decreasing")


def build_schedule(
    sigma_max: float = 80.0,
    sigma_min: float = 0.002,
    rho: float = 7.0,
    steps: int = 40,
) -> SigmaSchedule:
    return SigmaSchedule(sigma_max, sigma_min, rho, steps)


def _denoise(model, x, sigma, context):
    d = model.denoise(x, sigma, context=context)
    if d.shape != x.shape:
        raise SamplerError(f"model returned shape {d.shape}, expected {x.shape}")
    return d


def heun_forward(z, schedule: SigmaSchedule, model, context=None) -> np.ndarray:
    """Integrate sigma_max -> 0 starting from x = sigma_max * z.

    Every step pairs an Euler predictor with a trapezoidal correction except
    the final step to sigma = 0, which stays plain Euler because the drift is
    undefined there. Cost: exactly 2N - 1 denoiser evaluations.
    """
    z = np.asarray(z, dtype=np.float64)
    if z.shape != tuple(model.shape):
        raise SamplerError(f"noise shape {z.shape} != model shape {tuple(model.shape)}")
    sig = schedule.values
    x = sig[0] * z
    for i in range(len(sig) - 1):
        s_cur, s_next = sig[i], sig[i + 1]
        d_cur = (x - _denoise(model, x, s_cur, context)) / s_cur
        x_pred = x + (s_next - s_cur) * d_cur
        if s_next > 0:
            d_next = (x_pred - _denoise(model, x_pred, s_next, context)) / s_next
            x = x + (s_next - s_cur) * 0.5 * (d_cur + d_next)
        else:
            x = x_pred
        if not np.all(np.isfinite(x)):
            raise SamplerError(f"integration diverged at sigma={s_next}")
    return x


def heun_inverse(x0, schedule: SigmaSchedule, model, context=None) -> np.ndarray:
    """Integrate the reversed grid sigma_min -> sigma_max and rescale.

    The forward pass ends with an Euler step to sigma = 0, which is exactly
    "replace x by its denoised estimate"; the first move here undoes that to
    first order (one denoiser call at sigma_min), after which the Heun sweep
    climbs the positive grid. Cost matches the forward pass: 2N - 1 calls.
    Returns z' = x(sigma_max) / sigma_max.
    """
    x = np.asarray(x0, dtype=np.float64)
    if x.shape != tuple(model.shape):
        raise SamplerError(f"sample shape {x.shape} != model shape {tuple(model.shape)}")
    grid = schedule.values[:-1][::-1]  # ascending sigma_min..sigma_max
    x = x + (x - _denoise(model, x, grid[0], context))
    for i in range(len(grid) - 1):
        s_cur, s_next = grid[i], grid[i + 1]
        d_cur = (x - _denoise(model, x, s_cur, context)) / s_cur
        x_pred = x + (s_next - s_cur) * d_cur
        d_next = (x_pred - _denoise(model, x_pred, s_next, context)) / s_next
        x = x + (s_next - s_cur) * 0.5 * (d_cur + d_next)
        if not np.all(np.isfinite(x)):
            raise SamplerError(f"integration diverged at sigma={s_next}")
    return x / schedule.sigma_max


def hide(message: Message, key: StegoKey, schedule: SigmaSchedule, model,
         context=None, noise_purpose: str = "noise"):
    """Encode: draw fresh noise, project the message in, run the ODE down.

    Returns (sample, carrier_noise); the caller can gate on collapse
    diagnostics of the carrier before using the sample.
    """
    rng = key.rng(noise_purpose)
    z = rng.standard_normal(tuple(model.shape))
    z_m = project_message(z, message, key)
    x0 = heun_forward(z_m, schedule, model, context=context)
    return x0, z_m


def extract(x0, key: StegoKey, schedule: SigmaSchedule, model,
            channels_used: int = 1, context=None):
    """Decode: run the ODE back up and threshold the recovered noise.

    Returns (message, recovered_noise). channels_used must match the
    sender's geometry; it is part of the shared configuration, like the key.
    """
    z_rec = heun_inverse(x0, schedule, model, context=context)
    msg = extract_message(z_rec, key, channels_used)
    return msg, z_rec


def message_for_capacity(bits: np.ndarray, key: StegoKey, shape,
                         channels_used: int) -> Message:
    """Wrap raw bits in a Message sized for the given carrier geometry."""
    c, h, w = shape
    spec = key.projection
    if spec.kind == "multichannel":
        if channels_used != 1:
            raise CapacityError("multichannel always carries one message channel")
        return Message(bits, width=w, height=h, bits_per_element=1, channels_used=1)
    return Message(
        bits, width=w, height=h,
        bits_per_element=spec.bits_per_element, channels_used=channels_used,
    )
