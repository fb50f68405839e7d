"""Compare the compiled mixture-denoiser kernel against the numpy fallback.

Run from the repo root after installing:

    python benchmarks/bench_kernels.py

Times single denoise calls and a full hide-pipeline forward pass on the
desk-scale fixture, for both kernel backends.
"""

import time

import numpy as np

from noisecoder._kernels import KERNEL_BACKEND, gmm_numpy

try:
    from noisecoder._kernels import _gmm

    compiled = _gmm.denoise
except ImportError:
    compiled = None

from noisecoder.core import Rng
from noisecoder.sampler import build_schedule, heun_forward
from noisecoder.score_models import load_default_model


def time_kernel(fn, x, model, repeats=2000):
    out = np.empty(x.size)
    flat = np.ascontiguousarray(x.reshape(-1))
    args = (model._flat_means, model.weights, model.stds, out)
    fn(flat, 1.0, *args)  # warm up
    t0 = time.perf_counter()
    for _ in range(repeats):
        fn(flat, 1.0, *args)
    return (time.perf_counter() - t0) / repeats


def time_forward(model, kernel_fn, repeats=5):
    # swap the kernel underneath the model for an end-to-end comparison
    import noisecoder.score_models as sm

    saved = sm.gmm_denoise_kernel
    sm.gmm_denoise_kernel = kernel_fn
    try:
        z = Rng(0, "bench").standard_normal(model.shape)
        sched = build_schedule(steps=40)
        heun_forward(z, sched, model)  # warm up
        t0 = time.perf_counter()
        for _ in range(repeats):
            heun_forward(z, sched, model)
        return (time.perf_counter() - t0) / repeats
    finally:
        sm.gmm_denoise_kernel = saved


def main():
    model = load_default_model()
    x = Rng(1, "bench").standard_normal(model.shape)
    print(f"active backend: {KERNEL_BACKEND}")
    print(f"model: K={len(model.weights)} shape={model.shape}")
    print()

    rows = [("numpy", gmm_numpy.denoise)]
    if compiled is not None:
        rows.append(("compiled", compiled))
    else:
        print("compiled kernel unavailable; showing numpy only")

    results = {}
    for name, fn in rows:
        per_call = time_kernel(fn, x, model)
        per_fwd = time_forward(model, fn)
        results[name] = (per_call, per_fwd)
        print(f"{name:>9}: denoise {per_call * 1e6:8.2f} us/call | "
              f"forward pass (N=40) {per_fwd * 1e3:8.2f} ms")

    if len(results) == 2:
        speed_call = results["numpy"][0] / results["compiled"][0]
        speed_fwd = results["numpy"][1] / results["compiled"][1]
        print(f"\nspeedup: {speed_call:.1f}x per call, {speed_fwd:.1f}x per forward pass")


if __name__ == "__main__":
    main()
