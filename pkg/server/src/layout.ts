/**
 * Tensor layout conversion at the pretrained-model boundary.
 *
 * The wire speaks channel-major (C, H, W) flattened in C order; most model
 * ecosystems want interleaved (H, W, C). Getting this permutation wrong
 * produces plausible-looking garbage, so the conversions live here alone
 * and are pinned by a golden tensor test.
 */

export function channelMajorToInterleaved(
  x: Float64Array,
  channels: number,
  height: number,
  width: number,
): Float64Array {
  const pixels = height * width;
  if (x.length !== channels * pixels) {
    throw new RangeError(`tensor has ${x.length} elements, expected ${channels * pixels}`);
  }
  const out = new Float64Array(x.length);
  for (let c = 0; c < channels; c++) {
    const src = c * pixels;
    for (let p = 0; p < pixels; p++) {
      out[p * channels + c] = x[src + p]!;
    }
  }
  return out;
}

export function interleavedToChannelMajor(
  x: Float64Array,
  channels: number,
  height: number,
  width: number,
): Float64Array {
  const pixels = height * width;
  if (x.length !== channels * pixels) {
    throw new RangeError(`tensor has ${x.length} elements, expected ${channels * pixels}`);
  }
  const out = new Float64Array(x.length);
  for (let c = 0; c < channels; c++) {
    const dst = c * pixels;
    for (let p = 0; p < pixels; p++) {
      out[dst + p] = x[p * channels + c]!;
    }
  }
  return out;
}
