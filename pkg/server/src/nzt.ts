/**
 * Reader for the NZT1 tensor container.
 *
 * Layout: 4-byte magic "NZT1", uint8 rank, rank little-endian uint32 dims,
 * then the float32 data in C order. The whole file must be consumed; short
 * or trailing bytes are corruption.
 */

import { readFileSync } from "node:fs";

export class NztError extends Error {}

export interface Tensor {
  shape: number[];
  data: Float64Array;
}

export function readTensor(path: string): Tensor {
  let raw: Buffer;
  try {
    raw = readFileSync(path);
  } catch (err) {
    throw new NztError(`cannot read ${path}: ${(err as Error).message}`);
  }
  return parseTensor(raw, path);
}

export function parseTensor(raw: Buffer, label = "<buffer>"): Tensor {
  if (raw.length < 5 || raw.subarray(0, 4).toString("latin1") !== "NZT1") {
    throw new NztError(`${label}: bad magic`);
  }
  const rank = raw.readUInt8(4);
  if (rank < 1) throw new NztError(`${label}: rank must be at least 1`);
  const headerLen = 5 + 4 * rank;
  if (raw.length < headerLen) throw new NztError(`${label}: truncated header`);
  const shape: number[] = [];
  let elements = 1;
  for (let i = 0; i < rank; i++) {
    const dim = raw.readUInt32LE(5 + 4 * i);
    if (dim === 0) throw new NztError(`${label}: zero-sized dimension`);
    shape.push(dim);
    elements *= dim;
    if (elements > 2 ** 31) throw new NztError(`${label}: element count overflow`);
  }
  const expected = headerLen + 4 * elements;
  if (raw.length < expected) throw new NztError(`${label}: truncated data`);
  if (raw.length > expected) throw new NztError(`${label}: trailing bytes`);
  const data = new Float64Array(elements);
  for (let i = 0; i < elements; i++) {
    const v = raw.readFloatLE(headerLen + 4 * i);
    if (!Number.isFinite(v)) throw new NztError(`${label}: non-finite value`);
    data[i] = v;
  }
  return { shape, data };
}
