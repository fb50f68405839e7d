"""Carrier sanity gates and recovery-error histograms.

A projected carrier should be indistinguishable from standard normal noise
in its first two moments and show no spatial or cross-channel structure.
check_collapse standardizes those statistics so a fixed 5-sigma gate applies
at any tensor size; degenerate payloads (all-ones, duplicated channels,
variance drift) blow far past it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import NoisecoderError

WARN_LEVEL = 3.0
FAIL_LEVEL = 5.0
MIN_ELEMENTS = 100


class DiagnosticsError(NoisecoderError):
    pass


@dataclass
class CollapseReport:
    """Standardized moment statistics plus the worst correlation probe.

    mean_stat = mean * sqrt(n) and var_stat = (var - 1) * sqrt(n / 2) are
    approximately standard normal for i.i.d. N(0, 1) input, as is r * sqrt(m)
    for each correlation estimated from m pairs; max_corr_stat is the worst
    |r| * sqrt(m) over channel pairs and lag-1 offsets.
    """

    mean_stat: float
    var_stat: float
    max_corr_stat: float
    worst_corr_probe: str
    verdicts: dict
    verdict: str  # "pass" | "warn" | "fail"

    def lines(self):
        yield f"collapse_mean_stat={self.mean_stat:.6f}"
        yield f"collapse_var_stat={self.var_stat:.6f}"
        yield f"collapse_corr_stat={self.max_corr_stat:.6f} ({self.worst_corr_probe})"
        yield f"collapse_verdict={self.verdict}"


def _grade(value: float) -> str:
    if abs(value) > FAIL_LEVEL:
        return "fail"
    if abs(value) > WARN_LEVEL:
        return "warn"
    return "pass"


def _corr_stat(a: np.ndarray, b: np.ndarray) -> float:
    """|Pearson r| scaled by sqrt(sample count); 0 for degenerate input."""
    a = a.reshape(-1)
    b = b.reshape(-1)
    a = a - a.mean()
    b = b - b.mean()
    denom = np.sqrt((a**2).sum() * (b**2).sum())
    if denom == 0:
        return 0.0
    r = float((a * b).sum() / denom)
    return abs(r) * np.sqrt(a.size)


def check_collapse(z: np.ndarray) -> CollapseReport:
    """Gate a carrier tensor before sampling; see module docstring."""
    a = np.asarray(z, dtype=np.float64)
    if a.ndim != 3:
        raise DiagnosticsError(f"expected (C, H, W), got shape {a.shape}")
    n = a.size
    if n < MIN_ELEMENTS:
        raise DiagnosticsError(f"need at least {MIN_ELEMENTS} elements, got {n}")

    mean_stat = float(a.mean() * np.sqrt(n))
    var_stat = float((a.var() - 1.0) * np.sqrt(n / 2.0))

    probes = {}
    c = a.shape[0]
    for i in range(c):
        for j in range(i + 1, c):
            probes[f"channels {i}/{j}"] = _corr_stat(a[i], a[j])
    probes["lag-1 horizontal"] = _corr_stat(a[:, :, :-1], a[:, :, 1:])
    probes["lag-1 vertical"] = _corr_stat(a[:, :-1, :], a[:, 1:, :])
    worst = max(probes, key=probes.get)
    max_corr = probes[worst]

    verdicts = {
        "mean": _grade(mean_stat),
        "variance": _grade(var_stat),
        "independence": _grade(max_corr),
    }
    order = {"pass": 0, "warn": 1, "fail": 2}
    overall = max(verdicts.values(), key=order.get)
    return CollapseReport(
        mean_stat=mean_stat,
        var_stat=var_stat,
        max_corr_stat=max_corr,
        worst_corr_probe=worst,
        verdicts=verdicts,
        verdict=overall,
    )


@dataclass
class ErrorHistogram:
    counts: np.ndarray
    edges: np.ndarray
    mean: float
    std: float
    max_abs: float

    def lines(self):
        yield f"err_mean={self.mean:.6f}"
        yield f"err_std={self.std:.6f}"
        yield f"err_max_abs={self.max_abs:.6f}"

    def dump(self, path) -> None:
        """Two-column text: bin center, count."""
        centers = 0.5 * (self.edges[:-1] + self.edges[1:])
        with open(path, "w", encoding="utf-8") as fh:
            for center, count in zip(centers, self.counts):
                fh.write(f"{center:.9g} {int(count)}\n")


def error_histogram(z: np.ndarray, z_rec: np.ndarray, bins: int = 61) -> ErrorHistogram:
    """Histogram of recovery error z - z' over equal-width bins."""
    a = np.asarray(z, dtype=np.float64)
    b = np.asarray(z_rec, dtype=np.float64)
    if a.shape != b.shape:
        raise DiagnosticsError(f"shape mismatch: {a.shape} vs {b.shape}")
    if bins < 1:
        raise DiagnosticsError("need at least one bin")
    diff = (a - b).reshape(-1)
    counts, edges = np.histogram(diff, bins=bins)
    return ErrorHistogram(
        counts=counts,
        edges=edges,
        mean=float(diff.mean()),
        std=float(diff.std()),
        max_abs=float(np.abs(diff).max()),
    )
