/**
 * Score-bridge protocol v1 framing.
 *
 * A frame is one compact JSON header line terminated by "\n", followed by
 * payload_len raw bytes of little-endian float32 tensor data. Every header
 * carries "op" and "payload_len"; hello frames add "version" and "shape",
 * denoise frames add "sigma", "shape" and optionally "context".
 */

export const PROTOCOL_VERSION = "1";

/** Headers never legitimately approach this; longer lines mean a framing bug. */
export const MAX_HEADER_BYTES = 1024 * 1024;

/** Upper bound on a single tensor payload (64M float32 elements). */
export const MAX_PAYLOAD_BYTES = 256 * 1024 * 1024;

export interface FrameHeader {
  op: string;
  version?: string;
  sigma?: number;
  shape?: number[];
  context?: string;
  message?: string;
  payload_len: number;
}

export interface Frame {
  header: FrameHeader;
  payload: Buffer;
}

/** Serialize a header (+ payload) the same way the Python client does. */
export function encodeFrame(
  op: string,
  fields: {
    version?: string;
    sigma?: number;
    shape?: readonly number[];
    context?: string;
    message?: string;
    payload?: Buffer;
  } = {},
): Buffer {
  const header: Record<string, unknown> = { op };
  if (fields.version !== undefined) header.version = fields.version;
  if (fields.sigma !== undefined) header.sigma = encodeSigma(fields.sigma);
  if (fields.shape !== undefined) header.shape = fields.shape.map((d) => Math.trunc(d));
  if (fields.context !== undefined) header.context = fields.context;
  if (fields.message !== undefined) header.message = fields.message;
  const payload = fields.payload ?? Buffer.alloc(0);
  header.payload_len = payload.length;
  const line = Buffer.from(JSON.stringify(header) + "\n", "utf8");
  return Buffer.concat([line, payload]);
}

/** Integral sigmas travel as JSON integers, matching the client encoder. */
export function encodeSigma(sigma: number): number {
  if (Number.isInteger(sigma) && Math.abs(sigma) < 2 ** 53) return Math.trunc(sigma);
  return sigma;
}

export class ProtocolError extends Error {}

/**
 * Incremental frame parser over a byte stream.
 *
 * Feed chunks as they arrive; completed frames come back from next().
 * Malformed header lines surface as ProtocolError so the server can reply
 * with an error frame and keep reading from the following line.
 */
export class FrameReader {
  private buf: Buffer = Buffer.alloc(0);
  private pending: FrameHeader | null = null;

  push(chunk: Buffer): void {
    this.buf = this.buf.length === 0 ? chunk : Buffer.concat([this.buf, chunk]);
  }

  /** Parse one complete frame, or return null until more bytes arrive. */
  next(): Frame | null {
    if (this.pending === null) {
      const nl = this.buf.indexOf(0x0a);
      if (nl < 0) {
        if (this.buf.length > MAX_HEADER_BYTES) {
          throw new ProtocolError("header line exceeds limit");
        }
        return null;
      }
      const line = this.buf.subarray(0, nl).toString("utf8");
      this.buf = this.buf.subarray(nl + 1);
      this.pending = parseHeader(line);
    }
    const need = this.pending.payload_len;
    if (this.buf.length < need) return null;
    const payload = Buffer.from(this.buf.subarray(0, need));
    this.buf = this.buf.subarray(need);
    const header = this.pending;
    this.pending = null;
    return { header, payload };
  }

  /** Bytes buffered but not yet consumed (for orderly-shutdown checks). */
  bufferedBytes(): number {
    return this.buf.length + (this.pending ? this.pending.payload_len : 0);
  }
}

function parseHeader(line: string): FrameHeader {
  let parsed: unknown;
  try {
    parsed = JSON.parse(line);
  } catch (err) {
    throw new ProtocolError(`malformed header: ${(err as Error).message}`);
  }
  if (typeof parsed !== "object" || parsed === null || Array.isArray(parsed)) {
    throw new ProtocolError("header is not an object");
  }
  const raw = parsed as Record<string, unknown>;
  if (typeof raw.op !== "string") throw new ProtocolError("header missing op");
  const header: FrameHeader = { op: raw.op, payload_len: 0 };
  if (raw.payload_len !== undefined) {
    if (typeof raw.payload_len !== "number" || !Number.isInteger(raw.payload_len) || raw.payload_len < 0) {
      throw new ProtocolError("payload_len must be a non-negative integer");
    }
    if (raw.payload_len > MAX_PAYLOAD_BYTES) {
      throw new ProtocolError(`payload_len ${raw.payload_len} exceeds limit`);
    }
    header.payload_len = raw.payload_len;
  }
  if (raw.version !== undefined) header.version = String(raw.version);
  if (raw.sigma !== undefined) {
    if (typeof raw.sigma !== "number" || !Number.isFinite(raw.sigma)) {
      throw new ProtocolError("sigma must be a finite number");
    }
    header.sigma = raw.sigma;
  }
  if (raw.shape !== undefined) {
    if (!Array.isArray(raw.shape) || raw.shape.length === 0) {
      throw new ProtocolError("shape must be a non-empty array");
    }
    const dims = raw.shape.map((d) => {
      if (typeof d !== "number" || !Number.isInteger(d) || d < 1) {
        throw new ProtocolError("shape entries must be positive integers");
      }
      return d;
    });
    header.shape = dims;
  }
  if (raw.context !== undefined) header.context = String(raw.context);
  if (raw.message !== undefined) header.message = String(raw.message);
  return header;
}

export function shapeElements(shape: readonly number[]): number {
  return shape.reduce((acc, d) => acc * d, 1);
}

export function sameShape(a: readonly number[], b: readonly number[]): boolean {
  return a.length === b.length && a.every((d, i) => d === b[i]);
}

/** Decode a little-endian float32 payload; rejects non-finite entries. */
export function payloadToFloat64(payload: Buffer, elements: number): Float64Array {
  if (payload.length !== elements * 4) {
    throw new ProtocolError(`bad payload length ${payload.length}, expected ${elements * 4}`);
  }
  const out = new Float64Array(elements);
  for (let i = 0; i < elements; i++) {
    const v = payload.readFloatLE(i * 4);
    if (!Number.isFinite(v)) throw new ProtocolError("payload contains non-finite values");
    out[i] = v;
  }
  return out;
}

/** Encode a tensor back to the wire's little-endian float32 layout. */
export function float64ToPayload(values: ArrayLike<number>): Buffer {
  const out = Buffer.allocUnsafe(values.length * 4);
  for (let i = 0; i < values.length; i++) {
    const v = Math.fround(Number(values[i]));
    if (!Number.isFinite(v)) throw new ProtocolError("refusing to send non-finite values");
    out.writeFloatLE(v, i * 4);
  }
  return out;
}
