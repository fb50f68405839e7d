"""Regenerate the golden files consumed by the bridge server's test suite.

Writes JSON next to the server tests so the TypeScript side can verify its
mixture math and tensor-layout conversions against values produced by the
Python reference implementation. Run from the repository root:

    python3 tools/gen_server_goldens.py
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from noisecoder.core import Rng
from noisecoder.score_models import load_default_model

ROOT = Path(__file__).resolve().parent.parent
GOLDEN_DIR = ROOT / "server" / "test" / "golden"


def gmm_probes() -> dict:
    model = load_default_model()
    shape = tuple(model.shape)
    sigmas = [0.0, 0.002, 0.03, 0.5, 2.0, 11.0, 80.0]
    sigmas += [float(s) for s in Rng(21, "golden/sigma").uniform(0.002, 80.0, 5)]
    rng = Rng(22, "golden/probe")
    probes = []
    for sigma in sigmas:
        x = rng.standard_normal(shape) * max(sigma, 0.05)
        # float32 rounding mirrors what the wire would deliver
        x = x.astype("<f4").astype(np.float64)
        expected = model.denoise(x, sigma)
        probes.append(
            {
                "sigma": sigma,
                "x": x.reshape(-1).tolist(),
                "expected": np.asarray(expected).reshape(-1).tolist(),
            }
        )
    return {"shape": list(shape), "probes": probes}


def layout_golden() -> dict:
    shape = (2, 3, 4)
    chw = (np.arange(np.prod(shape), dtype=np.float32) * 0.5 - 3.0).reshape(shape)
    hwc = np.transpose(chw, (1, 2, 0))
    return {
        "shape": list(shape),
        "chw": chw.reshape(-1).astype(np.float64).tolist(),
        "hwc": hwc.reshape(-1).astype(np.float64).tolist(),
    }


def main() -> None:
    GOLDEN_DIR.mkdir(parents=True, exist_ok=True)
    (GOLDEN_DIR / "gmm_probes.json").write_text(json.dumps(gmm_probes()))
    (GOLDEN_DIR / "layout_golden.json").write_text(json.dumps(layout_golden(), indent=1))
    print(f"wrote goldens to {GOLDEN_DIR}")


if __name__ == "__main__":
    main()
