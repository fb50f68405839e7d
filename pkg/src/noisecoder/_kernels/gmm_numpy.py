"""Pure numpy mirror of the compiled mixture-denoiser kernel.

Used when the extension is unavailable or NOISECODER_PURE_PYTHON is set; both
implementations must agree to float64 roundoff (there is a parity test).
"""

from __future__ import annotations

import numpy as np


def denoise(x, sigma, means, weights, stds, out):
    """Posterior-weighted denoised estimate, written into out (length n)."""
    if sigma == 0.0:
        out[:] = x
        return
    n = x.shape[0]
    var = stds * stds + sigma * sigma                       # (K,)
    d2 = ((x[None, :] - means) ** 2).sum(axis=1)            # (K,)
    logit = np.log(weights) - 0.5 * n * np.log(2.0 * np.pi * var) - d2 / (2.0 * var)
    logit -= logit.max()                                    # guard exp underflow
    gamma = np.exp(logit)
    gamma /= gamma.sum()
    cx = float((gamma * stds * stds / var).sum())
    out[:] = cx * x
    out += (gamma * sigma * sigma / var) @ means
