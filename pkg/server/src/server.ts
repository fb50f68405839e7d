/**
 * Bridge server session loop: handshake, then lock-step denoise frames.
 *
 * Malformed input gets an error frame back and the connection stays open
 * whenever the byte framing is still trustworthy (well-formed header, wrong
 * content). A header that cannot be parsed leaves the payload boundary
 * unknowable, so those also get an error frame but then close the stream.
 */

import type { Readable, Writable } from "node:stream";
import { createServer, type Server } from "node:net";

import type { Backend } from "./backends.js";
import {
  FrameReader,
  PROTOCOL_VERSION,
  ProtocolError,
  encodeFrame,
  float64ToPayload,
  payloadToFloat64,
  sameShape,
  shapeElements,
  type Frame,
} from "./protocol.js";

export type Logger = (message: string) => void;

export async function serveConnection(
  input: Readable,
  output: Writable,
  backend: Backend,
  log: Logger = () => {},
): Promise<void> {
  // write errors (peer went away mid-reply) end the session, never the process
  output.on("error", () => {});
  const reader = new FrameReader();
  let handshaken = false;

  const send = (buf: Buffer): Promise<void> =>
    new Promise((resolve, reject) => {
      output.write(buf, (err) => (err ? reject(err) : resolve()));
    });
  const sendError = (message: string): Promise<void> => {
    log(`error frame: ${message}`);
    return send(encodeFrame("error", { message }));
  };

  const handle = async (frame: Frame): Promise<"continue" | "bye"> => {
    const { header, payload } = frame;
    if (header.op === "hello") {
      if (header.version !== PROTOCOL_VERSION) {
        await sendError(`unsupported protocol version ${JSON.stringify(header.version ?? null)}`);
        return "continue";
      }
      handshaken = true;
      const shape = backend.shape ?? header.shape;
      await send(encodeFrame("hello", { version: PROTOCOL_VERSION, shape }));
      return "continue";
    }
    if (header.op === "bye") {
      await send(encodeFrame("bye"));
      return "bye";
    }
    if (header.op !== "denoise") {
      await sendError(`unsupported op ${JSON.stringify(header.op)}`);
      return "continue";
    }
    if (!handshaken) {
      await sendError("handshake required before denoise");
      return "continue";
    }
    if (!header.shape) {
      await sendError("denoise frame missing shape");
      return "continue";
    }
    if (header.sigma === undefined) {
      await sendError("denoise frame missing sigma");
      return "continue";
    }
    if (header.sigma < 0) {
      await sendError("sigma must be non-negative");
      return "continue";
    }
    if (backend.shape && !sameShape(backend.shape, header.shape)) {
      await sendError(
        `shape mismatch: backend serves [${backend.shape.join(",")}], request has [${header.shape.join(",")}]`,
      );
      return "continue";
    }
    const elements = shapeElements(header.shape);
    if (payload.length !== elements * 4) {
      await sendError("bad payload length");
      return "continue";
    }
    let result: Float64Array;
    try {
      const x = payloadToFloat64(payload, elements);
      result = await backend.denoise(x, header.sigma, header.shape, header.context);
    } catch (err) {
      await sendError((err as Error).message);
      return "continue";
    }
    await send(encodeFrame("denoise", { shape: header.shape, payload: float64ToPayload(result) }));
    return "continue";
  };

  try {
    for await (const chunk of input) {
      reader.push(chunk as Buffer);
      for (;;) {
        let frame: Frame | null;
        try {
          frame = reader.next();
        } catch (err) {
          if (err instanceof ProtocolError) {
            await sendError(err.message);
            return;
          }
          throw err;
        }
        if (frame === null) break;
        if ((await handle(frame)) === "bye") return;
      }
    }
  } catch (err) {
    // broken pipe or reset while replying: the peer is gone, nothing to do
    log(`connection dropped: ${(err as Error).message}`);
  }
}

export interface TcpHandle {
  server: Server;
  port: number;
}

export function serveTcp(port: number, backend: Backend, log: Logger = () => {}): Promise<TcpHandle> {
  return new Promise((resolve, reject) => {
    const server = createServer((socket) => {
      socket.on("error", () => {});
      void serveConnection(socket, socket, backend, log).finally(() => socket.end());
    });
    server.once("error", reject);
    server.listen(port, "127.0.0.1", () => {
      const address = server.address();
      if (address === null || typeof address === "string") {
        reject(new Error("tcp server has no bound port"));
        return;
      }
      resolve({ server, port: address.port });
    });
  });
}
