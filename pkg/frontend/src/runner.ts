/**
 * Process-level bridge to the core CLI.
 *
 * The core is consumed strictly through its public interfaces: graphs
 * travel as SKNB bytes, results come back as TSV on stdout. Core errors
 * surface as {@link CoreError} with the core's message preserved.
 */

import { execFileSync } from "node:child_process";
import { mkdtempSync, rmSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

import { BoundGraph } from "./csr.js";

/** Raised when the core process exits non-zero; carries its message. */
export class CoreError extends Error {}

/** Command used to invoke the core; override with SKNET_CLI. */
export function coreCommand(): string[] {
  const env = process.env["SKNET_CLI"];
  if (env && env.trim()) return env.trim().split(/\s+/);
  return ["sknet"];
}

/** Run a core subcommand, returning stdout as UTF-8 text. */
export function runCore(args: string[]): string {
  const [cmd, ...prefix] = coreCommand();
  try {
    return execFileSync(cmd!, [...prefix, ...args], {
      encoding: "utf-8",
      maxBuffer: 1 << 28,
    });
  } catch (err) {
    const anyErr = err as { stderr?: string; message?: string };
    const stderr = (anyErr.stderr ?? "").trim();
    throw new CoreError(stderr || anyErr.message || "core invocation failed");
  }
}

/**
 * Materialize a graph for the core and run a subcommand against it.
 * The temp directory is always removed afterwards.
 */
export function runCoreOnGraph(graph: BoundGraph, args: string[]): string {
  const dir = mkdtempSync(join(tmpdir(), "sknet-bind-"));
  const path = join(dir, "graph.sknb");
  try {
    writeFileSync(path, graph.toSknb());
    return runCore([...args, "--input", path]);
  } finally {
    rmSync(dir, { recursive: true, force: true });
  }
}

/** Parse a two-column TSV of per-node values, returning column 2. */
export function parseValueColumn(text: string): Float64Array {
  const rows = text.trim().split("\n");
  const out = new Float64Array(rows.length);
  rows.forEach((row, i) => {
    out[i] = Number(row.split("\t")[1]);
  });
  return out;
}

/** Keep the raw second-column strings (for bit-exact comparisons). */
export function rawValueColumn(text: string): string[] {
  return text
    .trim()
    .split("\n")
    .map((row) => row.split("\t")[1]!);
}
