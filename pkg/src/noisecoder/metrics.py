"""Evaluation metrics: recovery accuracy, detectability, sample statistics.

detection_error follows the steganalysis convention: sweep every useful
threshold in both orientations and report the best achievable average of
false-alarm and missed-detection rates, so 0.5 means the detector is blind
and 0 means covers and stegos separate perfectly.
"""

from __future__ import annotations

import numpy as np

from .core import CapacityError, NoisecoderError


class MetricError(NoisecoderError):
    pass


def accuracy(sent, recovered) -> float:
    """Fraction of matching bits: 1 - hamming/len."""
    a = np.asarray(sent, dtype=np.uint8).reshape(-1)
    b = np.asarray(recovered, dtype=np.uint8).reshape(-1)
    if a.size != b.size:
        raise CapacityError(f"bit vectors differ in length: {a.size} vs {b.size}")
    if a.size == 0:
        raise CapacityError("empty bit vectors")
    return float(1.0 - np.count_nonzero(a != b) / a.size)


def bits_per_pixel(n_bits: int, width: int, height: int) -> float:
    if width <= 0 or height <= 0:
        raise MetricError("width and height must be positive")
    return n_bits / float(width * height)


def detection_error(stego_scores, cover_scores) -> float:
    """Minimum of (P_FA + P_MD)/2 over all thresholds and both orientations.

    Candidate thresholds are the merged unique scores plus a sentinel below
    the minimum, which covers the all-stego and all-cover classifications.
    """
    s = np.asarray(stego_scores, dtype=np.float64).reshape(-1)
    c = np.asarray(cover_scores, dtype=np.float64).reshape(-1)
    if s.size == 0 or c.size == 0:
        raise MetricError("need at least one score per class")
    merged = np.unique(np.concatenate([s, c]))
    thresholds = np.concatenate([[merged[0] - 1.0], merged])
    s_sorted = np.sort(s)
    c_sorted = np.sort(c)
    # orientation A: stego iff score > t
    p_md_a = np.searchsorted(s_sorted, thresholds, side="right") / s.size
    p_fa_a = 1.0 - np.searchsorted(c_sorted, thresholds, side="right") / c.size
    # orientation B: stego iff score <= t
    p_md_b = 1.0 - p_md_a
    p_fa_b = 1.0 - p_fa_a
    best = min(
        float(np.min(0.5 * (p_fa_a + p_md_a))),
        float(np.min(0.5 * (p_fa_b + p_md_b))),
    )
    return best


def _mean_cov(rows: np.ndarray):
    mu = rows.mean(axis=0)
    cov = np.cov(rows, rowvar=False, ddof=1)
    return mu, np.atleast_2d(cov)


def _sqrt_psd(mat: np.ndarray) -> np.ndarray:
    """Symmetric PSD square root via eigendecomposition, clipping dust."""
    sym = 0.5 * (mat + mat.T)
    vals, vecs = np.linalg.eigh(sym)
    floor = 1e-10 * max(float(np.trace(sym)), 1.0)
    vals = np.where(vals < floor, np.maximum(vals, 0.0), vals)
    return (vecs * np.sqrt(vals)) @ vecs.T


def frechet_distance(features_a, features_b) -> float:
    """Frechet distance between Gaussian fits of two feature sets.

    ||mu_a - mu_b||^2 + Tr(S_a + S_b - 2 (S_a^1/2 S_b S_a^1/2)^1/2), with the
    matrix square roots taken through symmetric eigendecompositions; tiny
    negative eigenvalues from roundoff are clipped to zero.
    """
    a = np.asarray(features_a, dtype=np.float64)
    b = np.asarray(features_b, dtype=np.float64)
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[1]:
        raise MetricError("feature sets must be 2-D with a common width")
    d = a.shape[1]
    if a.shape[0] < d + 1 or b.shape[0] < d + 1:
        raise MetricError(f"need at least d+1 = {d + 1} rows per set")
    mu_a, cov_a = _mean_cov(a)
    mu_b, cov_b = _mean_cov(b)
    root_a = _sqrt_psd(cov_a)
    inner = _sqrt_psd(root_a @ cov_b @ root_a)
    dist = float(
        ((mu_a - mu_b) ** 2).sum()
        + np.trace(cov_a)
        + np.trace(cov_b)
        - 2.0 * np.trace(inner)
    )
    # exact-equality inputs can dip epsilon-negative
    return max(dist, 0.0)


# ---------------------------------------------------------------------------
# baseline steganalyzer
# ---------------------------------------------------------------------------

def image_features(x: np.ndarray) -> np.ndarray:
    """Hand features per channel: mean, variance, lag-1 h/v autocorrelation,
    high-pass residual energy. Flat vector of 5 * C entries."""
    a = np.asarray(x, dtype=np.float64)
    if a.ndim != 3:
        raise MetricError(f"expected (C, H, W), got shape {a.shape}")
    feats = []
    for ch in a:
        mu = ch.mean()
        var = ch.var()
        centered = ch - mu
        denom = (centered**2).mean() + 1e-12
        lag_h = (centered[:, :-1] * centered[:, 1:]).mean() / denom
        lag_v = (centered[:-1, :] * centered[1:, :]).mean() / denom
        # 4-neighbour Laplacian energy, interior pixels only
        lap = (
            4.0 * ch[1:-1, 1:-1]
            - ch[:-2, 1:-1] - ch[2:, 1:-1] - ch[1:-1, :-2] - ch[1:-1, 2:]
        )
        feats.extend([mu, var, lag_h, lag_v, (lap**2).mean()])
    return np.array(feats)


def baseline_steganalyzer(train_stego, train_cover):
    """Fisher discriminant over the hand features; returns a score callable.

    Higher score means more stego-like. The within-class scatter is
    ridge-regularized with 1e-6 * trace so degenerate feature sets (constant
    columns) stay solvable.
    """
    fs = np.stack([image_features(x) for x in train_stego])
    fc = np.stack([image_features(x) for x in train_cover])
    if len(fs) < 2 or len(fc) < 2:
        raise MetricError("need at least two training images per class")
    mu_s, mu_c = fs.mean(axis=0), fc.mean(axis=0)
    scatter = np.cov(fs, rowvar=False, ddof=1) * (len(fs) - 1) + np.cov(
        fc, rowvar=False, ddof=1
    ) * (len(fc) - 1)
    scatter = np.atleast_2d(scatter)
    ridge = 1e-6 * max(float(np.trace(scatter)), 1e-12)
    w = np.linalg.solve(scatter + ridge * np.eye(len(mu_s)), mu_s - mu_c)
    midpoint = 0.5 * (mu_s + mu_c)

    def score(image) -> float:
        return float(w @ (image_features(image) - midpoint))

    return score
