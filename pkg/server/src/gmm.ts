/**
 * Analytic Gaussian-mixture denoiser, numerically mirroring the Python
 * reference implementation in float64.
 *
 * The fixture is a rank-1 NZT1 tensor laid out as
 *   [K, C, H, W, then per component: weight, std, mean (C*H*W floats)]
 * with isotropic per-component stds. Given x at noise level sigma, the
 * denoised estimate is the posterior-weighted blend
 *   D(x) = sum_k gamma_k * (s_k^2 * x + sigma^2 * mu_k) / (s_k^2 + sigma^2)
 * where gamma are the responsibilities of the sigma-smoothed components.
 */

import { readTensor } from "./nzt.js";

export class GmmError extends Error {}

export class GaussianMixture {
  readonly shape: [number, number, number];
  readonly elements: number;
  readonly weights: Float64Array;
  readonly stds: Float64Array;
  /** Component means, flattened channel-major, means[k * elements + i]. */
  readonly means: Float64Array;

  constructor(shape: [number, number, number], weights: Float64Array, stds: Float64Array, means: Float64Array) {
    const k = weights.length;
    this.shape = shape;
    this.elements = shape[0] * shape[1] * shape[2];
    if (k < 1) throw new GmmError("mixture needs at least one component");
    if (stds.length !== k || means.length !== k * this.elements) {
      throw new GmmError("component arrays disagree on K");
    }
    let total = 0;
    for (let i = 0; i < k; i++) {
      const w = weights[i]!;
      const s = stds[i]!;
      if (!(w > 0)) throw new GmmError("weights must be positive");
      if (!(s > 0)) throw new GmmError("stds must be positive");
      total += w;
    }
    if (Math.abs(total - 1) > 1e-5) throw new GmmError("weights must sum to 1");
    // normalize exactly like the Python loader so both sides see the same model
    this.weights = weights.map((w) => w / total);
    this.stds = stds;
    this.means = means;
  }

  static fromFixture(path: string): GaussianMixture {
    const tensor = readTensor(path);
    if (tensor.shape.length !== 1) throw new GmmError("fixture must be a rank-1 tensor");
    const v = tensor.data;
    if (v.length < 4) throw new GmmError("fixture too short for header");
    const [k, c, h, w] = [v[0]!, v[1]!, v[2]!, v[3]!].map((d) => {
      if (!Number.isInteger(d) || d < 1) throw new GmmError("fixture header must hold positive integers");
      return d;
    }) as [number, number, number, number];
    const elements = c * h * w;
    if (v.length !== 4 + k * (2 + elements)) {
      throw new GmmError(`fixture length ${v.length} does not match header`);
    }
    const weights = new Float64Array(k);
    const stds = new Float64Array(k);
    const means = new Float64Array(k * elements);
    for (let comp = 0; comp < k; comp++) {
      const base = 4 + comp * (2 + elements);
      weights[comp] = v[base]!;
      stds[comp] = v[base + 1]!;
      means.set(v.subarray(base + 2, base + 2 + elements), comp * elements);
    }
    return new GaussianMixture([c, h, w], weights, stds, means);
  }

  /** Posterior-weighted denoised estimate of x (flattened, length elements). */
  denoise(x: Float64Array, sigma: number): Float64Array {
    const n = this.elements;
    if (x.length !== n) throw new GmmError(`tensor has ${x.length} elements, model expects ${n}`);
    if (!(sigma >= 0) || !Number.isFinite(sigma)) throw new GmmError("sigma must be finite and non-negative");
    if (sigma === 0) return Float64Array.from(x);

    const k = this.weights.length;
    const sig2 = sigma * sigma;
    const logit = new Float64Array(k);
    const variance = new Float64Array(k);
    let maxLogit = -Infinity;
    for (let comp = 0; comp < k; comp++) {
      const s = this.stds[comp]!;
      const varC = s * s + sig2;
      variance[comp] = varC;
      let d2 = 0;
      const off = comp * n;
      for (let i = 0; i < n; i++) {
        const r = x[i]! - this.means[off + i]!;
        d2 += r * r;
      }
      const l = Math.log(this.weights[comp]!) - 0.5 * n * Math.log(2 * Math.PI * varC) - d2 / (2 * varC);
      logit[comp] = l;
      if (l > maxLogit) maxLogit = l;
    }
    let norm = 0;
    for (let comp = 0; comp < k; comp++) {
      logit[comp] = Math.exp(logit[comp]! - maxLogit);
      norm += logit[comp]!;
    }

    const out = new Float64Array(n);
    let blendX = 0;
    for (let comp = 0; comp < k; comp++) {
      const gamma = logit[comp]! / norm;
      const s = this.stds[comp]!;
      const varC = variance[comp]!;
      blendX += (gamma * s * s) / varC;
      const coefMean = (gamma * sig2) / varC;
      const off = comp * n;
      for (let i = 0; i < n; i++) out[i] = out[i]! + coefMean * this.means[off + i]!;
    }
    for (let i = 0; i < n; i++) out[i] = out[i]! + blendX * x[i]!;
    return out;
  }
}
