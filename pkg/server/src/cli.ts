/**
 * Command-line entry point.
 *
 *   node dist/cli.js --backend identity --listen stdio
 *   node dist/cli.js --backend gmm:path/to/fixture.nzt --listen tcp:7400
 *   node dist/cli.js --backend pretrained:./model.mjs:cpu --listen stdio
 *
 * stdio serves exactly one session on stdin/stdout; tcp accepts connections
 * until SIGINT/SIGTERM. Logs go to stderr, the protocol owns stdout.
 */

import { parseArgs } from "node:util";

import { createBackend } from "./backends.js";
import { serveConnection, serveTcp } from "./server.js";

const USAGE = `usage: cli.js [--backend <spec>] [--listen <where>]

  --backend   identity | gmm:<fixture.nzt> | pretrained:<module>[:device]
              (default: identity)
  --listen    stdio | tcp:<port>   port 0 picks a free port (default: stdio)
  --quiet     suppress stderr logging
`;

async function main(argv: string[]): Promise<number> {
  let values: { backend?: string; listen?: string; quiet?: boolean; help?: boolean };
  try {
    values = parseArgs({
      args: argv,
      options: {
        backend: { type: "string", default: "identity" },
        listen: { type: "string", default: "stdio" },
        quiet: { type: "boolean", default: false },
        help: { type: "boolean", short: "h", default: false },
      },
    }).values;
  } catch (err) {
    process.stderr.write(`error: ${(err as Error).message}\n${USAGE}`);
    return 2;
  }
  if (values.help) {
    process.stdout.write(USAGE);
    return 0;
  }
  const log = values.quiet ? () => {} : (msg: string) => process.stderr.write(`[score-bridge] ${msg}\n`);

  let backend;
  try {
    backend = await createBackend(values.backend ?? "identity");
  } catch (err) {
    process.stderr.write(`error: ${(err as Error).message}\n`);
    return 1;
  }
  const listen = values.listen ?? "stdio";

  if (listen === "stdio") {
    log(`serving ${backend.kind} on stdio`);
    await serveConnection(process.stdin, process.stdout, backend, log);
    return 0;
  }
  if (listen.startsWith("tcp:")) {
    const port = Number(listen.slice(4));
    if (!Number.isInteger(port) || port < 0 || port > 65535) {
      process.stderr.write(`error: bad tcp port in ${JSON.stringify(listen)}\n`);
      return 2;
    }
    const handle = await serveTcp(port, backend, log);
    // port discovery contract for --listen tcp:0; always printed, even quiet
    process.stderr.write(`listening on ${handle.port}\n`);
    log(`serving ${backend.kind} on tcp port ${handle.port}`);
    await new Promise<void>((resolve) => {
      const stop = () => {
        handle.server.close(() => resolve());
      };
      process.once("SIGINT", stop);
      process.once("SIGTERM", stop);
    });
    return 0;
  }
  process.stderr.write(`error: bad --listen value ${JSON.stringify(listen)}\n${USAGE}`);
  return 2;
}

main(process.argv.slice(2)).then(
  (code) => {
    process.exitCode = code;
  },
  (err) => {
    process.stderr.write(`fatal: ${(err as Error).stack ?? err}\n`);
    process.exitCode = 1;
  },
);
