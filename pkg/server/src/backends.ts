/**
 * Denoiser backends behind the bridge server.
 *
 * identity        echoes the payload (protocol conformance tests)
 * gmm:<fixture>   analytic mixture denoiser loaded from an NZT1 fixture
 * pretrained:<module>[:device]
 *                 dynamically imported model plugin; the server converts
 *                 between the wire's channel-major layout and the plugin's
 *                 interleaved layout and applies guidance combination, so
 *                 plugins only ever see plain conditional calls
 */

import { pathToFileURL } from "node:url";

import { parseContext } from "./context.js";
import { GaussianMixture } from "./gmm.js";
import { channelMajorToInterleaved, interleavedToChannelMajor } from "./layout.js";

export class BackendError extends Error {}

export interface Backend {
  readonly kind: string;
  /** Declared tensor shape, or null when any request shape is acceptable. */
  readonly shape: readonly number[] | null;
  /** Channel-major input, channel-major output, both float64. */
  denoise(x: Float64Array, sigma: number, shape: readonly number[], context?: string): Promise<Float64Array>;
}

class IdentityBackend implements Backend {
  readonly kind = "identity";
  readonly shape = null;

  async denoise(x: Float64Array): Promise<Float64Array> {
    return x;
  }
}

class GmmBackend implements Backend {
  readonly kind = "gmm";
  readonly shape: readonly number[];
  private readonly model: GaussianMixture;

  constructor(fixturePath: string) {
    this.model = GaussianMixture.fromFixture(fixturePath);
    this.shape = this.model.shape;
  }

  async denoise(x: Float64Array, sigma: number): Promise<Float64Array> {
    return this.model.denoise(x, sigma);
  }
}

/**
 * Contract for pretrained plugins: a module exporting
 *   createModel(modelId: string, device: string): PretrainedModel
 * (sync or async). The plugin works in interleaved (H, W, C) float32, the
 * layout its ecosystem stores images in.
 */
export interface PretrainedModel {
  /** Channel-major [C, H, W] the model was trained at. */
  shape: readonly number[];
  denoise(x: Float32Array, sigma: number, prompt: string): Float32Array | Promise<Float32Array>;
}

class PretrainedBackend implements Backend {
  readonly kind = "pretrained";
  readonly shape: readonly number[];
  private readonly model: PretrainedModel;

  constructor(model: PretrainedModel) {
    if (!Array.isArray(model.shape) || model.shape.length !== 3) {
      throw new BackendError("pretrained model must declare a [C, H, W] shape");
    }
    this.model = model;
    this.shape = model.shape.map((d) => Math.trunc(d));
  }

  static async load(spec: string): Promise<PretrainedBackend> {
    const sep = spec.lastIndexOf(":");
    // a lone path means default device; a trailing :<word> selects one
    const modulePath = sep > 0 ? spec.slice(0, sep) : spec;
    const device = sep > 0 ? spec.slice(sep + 1) : "cpu";
    let mod: { createModel?: (id: string, device: string) => PretrainedModel | Promise<PretrainedModel> };
    try {
      mod = await import(pathToFileURL(modulePath).href);
    } catch (err) {
      throw new BackendError(`cannot load pretrained module ${modulePath}: ${(err as Error).message}`);
    }
    if (typeof mod.createModel !== "function") {
      throw new BackendError(`module ${modulePath} does not export createModel`);
    }
    return new PretrainedBackend(await mod.createModel(modulePath, device));
  }

  async denoise(x: Float64Array, sigma: number, shape: readonly number[], context?: string): Promise<Float64Array> {
    const [c, h, w] = [this.shape[0]!, this.shape[1]!, this.shape[2]!];
    const { prompt, guidance } = parseContext(context);
    const interleaved = Float32Array.from(channelMajorToInterleaved(x, c, h, w));

    const cond = await this.model.denoise(interleaved, sigma, prompt);
    if (cond.length !== x.length) {
      throw new BackendError(`model returned ${cond.length} elements, expected ${x.length}`);
    }
    let combined: Float64Array;
    if (guidance === null || guidance === 1) {
      combined = Float64Array.from(cond);
    } else {
      // classifier-free guidance: uncond + g * (cond - uncond), handled
      // here so bridge clients only ever see a single D(x; sigma)
      const uncond = await this.model.denoise(interleaved, sigma, "");
      if (uncond.length !== x.length) {
        throw new BackendError(`model returned ${uncond.length} elements, expected ${x.length}`);
      }
      combined = new Float64Array(x.length);
      for (let i = 0; i < x.length; i++) {
        combined[i] = uncond[i]! + guidance * (cond[i]! - uncond[i]!);
      }
    }
    return interleavedToChannelMajor(combined, c, h, w);
  }
}

export async function createBackend(spec: string): Promise<Backend> {
  if (spec === "identity") return new IdentityBackend();
  if (spec.startsWith("gmm:")) {
    const path = spec.slice(4);
    if (path === "") throw new BackendError("gmm backend needs a fixture path");
    return new GmmBackend(path);
  }
  if (spec.startsWith("pretrained:")) {
    const rest = spec.slice("pretrained:".length);
    if (rest === "") throw new BackendError("pretrained backend needs a module path");
    return PretrainedBackend.load(rest);
  }
  throw new BackendError(
    `unknown backend ${JSON.stringify(spec)}; expected identity, gmm:<fixture> or pretrained:<module>[:device]`,
  );
}
