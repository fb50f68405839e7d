"""Analytic score models with exact denoisers.

The denoiser convention: D(x; sigma) is the posterior mean of the clean
tensor given x observed at noise level sigma, so the score of the smoothed
density is (D(x; sigma) - x) / sigma^2. An isotropic Gaussian mixture
admits D in closed form, which makes exact round-trip experiments possible
without a trained network.
"""

from __future__ import annotations

from importlib import resources

import numpy as np

from ._kernels import KERNEL_BACKEND, gmm_denoise_kernel
from .core import FormatError, NoisecoderError, Rng, tensor_read, tensor_write

DEFAULT_FIXTURE = "gmm_small.nzt"


class ModelError(NoisecoderError):
    """Score model construction or evaluation failed."""


class GaussianMixtureModel:
    """Isotropic Gaussian mixture with a closed-form denoiser.

    means: (K, C, H, W); weights: (K,) summing to 1; stds: (K,) positive.
    At noise level sigma each component contributes through responsibilities
    computed on the smoothed density (component variance s_k^2 + sigma^2),
    and the denoised estimate blends x with the component means. sigma = 0
    returns x unchanged; sigma -> inf approaches the mixture mean.
    """

    thread_safe = True

    def __init__(self, means, weights, stds):
        means = np.ascontiguousarray(means, dtype=np.float64)
        if means.ndim != 4:
            raise ModelError(f"means must be (K, C, H, W), got shape {means.shape}")
        self.means = means
        self.weights = np.ascontiguousarray(weights, dtype=np.float64)
        self.stds = np.ascontiguousarray(stds, dtype=np.float64)
        k = means.shape[0]
        if self.weights.shape != (k,) or self.stds.shape != (k,):
            raise ModelError("weights and stds must have one entry per component")
        if np.any(self.weights <= 0) or np.any(self.stds <= 0):
            raise ModelError("weights and stds must be positive")
        total = self.weights.sum()
        if not np.isclose(total, 1.0, rtol=1e-6):
            raise ModelError(f"weights sum to {total}, expected 1")
        self.weights = self.weights / total
        self.shape = means.shape[1:]
        self._flat_means = means.reshape(k, -1)

    # -- sampling interface --------------------------------------------------

    def denoise(self, x: np.ndarray, sigma: float, context=None) -> np.ndarray:
        """Posterior-mean estimate of the clean tensor. context is ignored."""
        x = np.asarray(x, dtype=np.float64)
        if x.shape != self.shape:
            raise ModelError(f"input shape {x.shape} != model shape {self.shape}")
        if sigma < 0 or not np.isfinite(sigma):
            raise ModelError(f"bad sigma {sigma}")
        out = np.empty(x.size, dtype=np.float64)
        gmm_denoise_kernel(
            np.ascontiguousarray(x.reshape(-1)), float(sigma),
            self._flat_means, self.weights, self.stds, out,
        )
        return out.reshape(self.shape)

    def score(self, x: np.ndarray, sigma: float) -> np.ndarray:
        """Gradient of log density at noise level sigma > 0."""
        if sigma <= 0:
            raise ModelError("score needs sigma > 0")
        return (self.denoise(x, sigma) - np.asarray(x, dtype=np.float64)) / sigma**2

    def responsibilities(self, x: np.ndarray, sigma: float) -> np.ndarray:
        """Per-component posterior weights at noise level sigma (sums to 1)."""
        flat = np.asarray(x, dtype=np.float64).reshape(-1)
        var = self.stds**2 + float(sigma) ** 2
        d2 = ((flat[None, :] - self._flat_means) ** 2).sum(axis=1)
        logit = (
            np.log(self.weights)
            - 0.5 * flat.size * np.log(2.0 * np.pi * var)
            - d2 / (2.0 * var)
        )
        logit -= logit.max()
        gamma = np.exp(logit)
        return gamma / gamma.sum()

    @property
    def mixture_mean(self) -> np.ndarray:
        return (self.weights[:, None] * self._flat_means).sum(axis=0).reshape(self.shape)

    # -- fixture serialization ------------------------------------------------
    #
    # NZT1 holds a bare tensor, so the fixture is a self-describing 1-D
    # vector: [K, C, H, W, then per component: weight, std, mean (C*H*W,
    # channel-major)]. The header integers are exact in f32.

    def to_fixture(self, path) -> None:
        k = len(self.weights)
        blocks = [np.array([k, *self.shape], dtype=np.float64)]
        for j in range(k):
            blocks.append(np.array([self.weights[j], self.stds[j]]))
            blocks.append(self._flat_means[j])
        tensor_write(np.concatenate(blocks), path)

    @classmethod
    def from_fixture(cls, path) -> "GaussianMixtureModel":
        vec = tensor_read(path)
        if vec.ndim != 1 or vec.size < 5:
            raise FormatError("mixture fixture must be a 1-D parameter vector")
        k, c, h, w = (int(round(v)) for v in vec[:4])
        n = c * h * w
        expected = 4 + k * (2 + n)
        if min(k, c, h, w) < 1 or vec.size != expected:
            raise FormatError(
                f"mixture fixture header ({k},{c},{h},{w}) does not match "
                f"payload length {vec.size}"
            )
        body = vec[4:].reshape(k, 2 + n)
        return cls(
            means=body[:, 2:].reshape(k, c, h, w),
            weights=body[:, 0],
            stds=body[:, 1],
        )


def default_fixture_path() -> str:
    """Path of the packaged desk-scale mixture fixture."""
    return str(resources.files("noisecoder").joinpath("fixtures", DEFAULT_FIXTURE))


def load_default_model() -> GaussianMixtureModel:
    return GaussianMixtureModel.from_fixture(default_fixture_path())


def make_desk_mixture(seed: int = 7, shape=(3, 16, 16)) -> GaussianMixtureModel:
    """Regenerate the desk-scale mixture deterministically.

    The checked-in fixture was produced by exactly this call; it exists so
    the fixture is reproducible, not so it gets rebuilt at runtime. The
    component std 0.005 is calibrated so that u8 carrier quantization (error
    bounded by 1/255 per element, amplified by ~1/s through inversion) lands
    between the centered-projection margin 0.707 and the binary margin 1.0,
    which is the regime where the published accuracy orderings appear.
    """
    rng = Rng(seed, "fixture/means")
    means = rng.uniform(-0.5, 0.5, size=(4, *shape))
    return GaussianMixtureModel(
        means=means,
        weights=[0.4, 0.3, 0.2, 0.1],
        stds=[0.005] * 4,
    )


def kernel_backend() -> str:
    """Which denoiser kernel is active ('compiled' or a numpy variant)."""
    return KERNEL_BACKEND
