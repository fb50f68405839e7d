/**
 * Denoise-frame context strings.
 *
 * Pretrained backends read `prompt=<text>;guidance=<real>`; both keys are
 * optional and unknown keys are rejected so typos fail loudly. Other
 * backends ignore context entirely.
 */

export class ContextError extends Error {}

export interface DenoiseContext {
  prompt: string;
  guidance: number | null;
}

export function parseContext(context: string | undefined): DenoiseContext {
  const out: DenoiseContext = { prompt: "", guidance: null };
  if (context === undefined || context === "") return out;
  for (const part of context.split(";")) {
    if (part === "") continue;
    const eq = part.indexOf("=");
    if (eq < 0) throw new ContextError(`context entry ${JSON.stringify(part)} is not key=value`);
    const key = part.slice(0, eq);
    const value = part.slice(eq + 1);
    if (key === "prompt") {
      out.prompt = value;
    } else if (key === "guidance") {
      const g = Number(value);
      if (value === "" || !Number.isFinite(g)) {
        throw new ContextError(`guidance must be a finite real, got ${JSON.stringify(value)}`);
      }
      out.guidance = g;
    } else {
      throw new ContextError(`unknown context key ${JSON.stringify(key)}`);
    }
  }
  return out;
}
