import { readFileSync } from "node:fs";
import { fileURLToPath } from "node:url";
import { dirname, join } from "node:path";

import { describe, expect, it } from "vitest";

import { GaussianMixture, GmmError } from "../dist/gmm.js";
import { NztError, parseTensor, readTensor } from "../dist/nzt.js";

const HERE = dirname(fileURLToPath(import.meta.url));
export const FIXTURE = join(HERE, "..", "..", "src", "noisecoder", "fixtures", "gmm_small.nzt");

interface GoldenProbe {
  sigma: number;
  x: number[];
  expected: number[];
}

const GOLDEN = JSON.parse(readFileSync(join(HERE, "golden", "gmm_probes.json"), "utf8")) as {
  shape: number[];
  probes: GoldenProbe[];
};

describe("nzt reader", () => {
  it("reads the bundled fixture", () => {
    const tensor = readTensor(FIXTURE);
    expect(tensor.shape).toEqual([3084]);
    expect(tensor.data[0]).toBe(4); // components
    expect(tensor.data.slice(1, 4)).toEqual(new Float64Array([3, 16, 16]));
  });

  it.each([
    [Buffer.from("NOPE\x01\x01\x00\x00\x00\x00\x00\x80\x3f", "latin1"), /bad magic/],
    [Buffer.from("NZT1\x01\x01\x00\x00", "latin1"), /truncated header/],
    [Buffer.from("NZT1\x01\x02\x00\x00\x00\x00\x00\x80\x3f", "latin1"), /truncated data/],
    [Buffer.from("NZT1\x01\x01\x00\x00\x00\x00\x00\x80\x3f\xff", "latin1"), /trailing bytes/],
    [Buffer.from("NZT1\x01\x00\x00\x00\x00", "latin1"), /zero-sized/],
    [Buffer.from("NZT1\x00", "latin1"), /rank/],
  ])("rejects corrupt container %#", (raw, pattern) => {
    expect(() => parseTensor(raw)).toThrowError(NztError);
    expect(() => parseTensor(raw)).toThrowError(pattern);
  });
});

describe("GaussianMixture", () => {
  const model = GaussianMixture.fromFixture(FIXTURE);

  it("parses the fixture layout", () => {
    expect(model.shape).toEqual([3, 16, 16]);
    expect(model.weights.length).toBe(4);
    const total = model.weights.reduce((a, b) => a + b, 0);
    expect(total).toBeCloseTo(1.0, 12);
    model.stds.forEach((s) => expect(s).toBeCloseTo(0.005, 9));
  });

  it("is the identity at sigma 0", () => {
    const x = Float64Array.from({ length: model.elements }, (_, i) => Math.sin(i));
    const out = model.denoise(x, 0);
    expect(out).toEqual(x);
    expect(out).not.toBe(x);
  });

  it("matches the reference implementation on the golden probes", () => {
    expect(GOLDEN.shape).toEqual(model.shape);
    let worst = 0;
    for (const probe of GOLDEN.probes) {
      const got = model.denoise(Float64Array.from(probe.x), probe.sigma);
      for (let i = 0; i < got.length; i++) {
        worst = Math.max(worst, Math.abs(got[i] - probe.expected[i]));
      }
    }
    expect(GOLDEN.probes.length).toBeGreaterThanOrEqual(12);
    expect(worst).toBeLessThan(1e-9);
  });

  it("rejects malformed fixtures", () => {
    expect(() =>
      new GaussianMixture([1, 1, 1], new Float64Array([2]), new Float64Array([1]), new Float64Array([0])),
    ).toThrowError(GmmError);
    expect(() =>
      new GaussianMixture([1, 1, 1], new Float64Array([1]), new Float64Array([0]), new Float64Array([0])),
    ).toThrowError(/stds must be positive/);
    expect(() => model.denoise(new Float64Array(3), 1.0)).toThrowError(/elements/);
    expect(() => model.denoise(new Float64Array(model.elements), -1)).toThrowError(/sigma/);
  });
});
