import { readFileSync } from "node:fs";
import { fileURLToPath } from "node:url";
import { dirname, join } from "node:path";

import { describe, expect, it } from "vitest";

import { channelMajorToInterleaved, interleavedToChannelMajor } from "../dist/layout.js";

const HERE = dirname(fileURLToPath(import.meta.url));
const GOLDEN = JSON.parse(readFileSync(join(HERE, "golden", "layout_golden.json"), "utf8")) as {
  shape: [number, number, number];
  chw: number[];
  hwc: number[];
};

describe("tensor layout conversion", () => {
  const [c, h, w] = GOLDEN.shape;

  it("matches the golden cross-check tensor exactly", () => {
    const hwc = channelMajorToInterleaved(Float64Array.from(GOLDEN.chw), c, h, w);
    expect(Array.from(hwc)).toEqual(GOLDEN.hwc);
    const chw = interleavedToChannelMajor(Float64Array.from(GOLDEN.hwc), c, h, w);
    expect(Array.from(chw)).toEqual(GOLDEN.chw);
  });

  it("round trips random tensors", () => {
    const x = Float64Array.from({ length: 5 * 7 * 2 }, (_, i) => Math.cos(i) * 3);
    const there = channelMajorToInterleaved(x, 5, 7, 2);
    const back = interleavedToChannelMajor(there, 5, 7, 2);
    expect(back).toEqual(x);
  });

  it("rejects length mismatches", () => {
    expect(() => channelMajorToInterleaved(new Float64Array(5), 2, 2, 2)).toThrowError(RangeError);
    expect(() => interleavedToChannelMajor(new Float64Array(5), 2, 2, 2)).toThrowError(RangeError);
  });
});
