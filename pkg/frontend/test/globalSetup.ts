// Boots the real service over a synthetic data directory for the e2e test.

import { execFileSync, spawn, type ChildProcess } from "node:child_process";
import { mkdtempSync, rmSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import type { GlobalSetupContext } from "vitest/node";

declare module "vitest" {
  interface ProvidedContext {
    apiBase: string;
  }
}

let child: ChildProcess | null = null;
let dataDir = "";

async function waitForCatalog(base: string, timeoutMs = 60_000): Promise<void> {
  const deadline = Date.now() + timeoutMs;
  let lastError: unknown = null;
  while (Date.now() < deadline) {
    try {
      const r = await fetch(`${base}/api/v1/catalog`);
      if (r.ok) return;
      lastError = new Error(`catalog returned ${r.status}`);
    } catch (err) {
      lastError = err;
    }
    await new Promise((resolve) => setTimeout(resolve, 300));
  }
  throw new Error(`service did not come up at ${base}: ${lastError}`);
}

export default async function setup({ provide }: GlobalSetupContext) {
  dataDir = mkdtempSync(join(tmpdir(), "wclim-e2e-"));
  execFileSync("python3", ["-m", "wclim.fixtures", dataDir], { stdio: "inherit" });

  const port = 8300 + Math.floor(Math.random() * 500);
  const base = `http://127.0.0.1:${port}`;
  child = spawn(
    "python3",
    ["-m", "wclim.cli", "serve", "--port", String(port), "--data-dir", dataDir],
    { stdio: ["ignore", "inherit", "inherit"] },
  );
  await waitForCatalog(base);
  provide("apiBase", base);

  return () => {
    child?.kill("SIGTERM");
    rmSync(dataDir, { recursive: true, force: true });
  };
}
