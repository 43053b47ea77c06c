// Scripted "perfect human": answers every labeling query with the ground
// truth from a truth CSV (stream_index,true_class), exactly as a human
// reading the images correctly would. Used by the authority-equivalence
// test and handy for demos.
//
// Usage: node dist/driver.js <base-url> <truth-csv> [timeout-seconds]

import { readFileSync } from "node:fs";
import { Client } from "./api.js";

export function parseTruthCsv(text: string): Map<number, number> {
  const truth = new Map<number, number>();
  const lines = text.split("\n").filter((line) => line.trim() !== "");
  if (lines[0] !== "stream_index,true_class") {
    throw new Error(`unexpected truth header: ${lines[0]}`);
  }
  for (const line of lines.slice(1)) {
    const [index, label] = line.split(",");
    truth.set(Number(index), Number(label));
  }
  return truth;
}

export async function drive(
  client: Client,
  truth: Map<number, number>,
  timeoutSeconds: number,
): Promise<void> {
  const deadline = Date.now() + timeoutSeconds * 1000;
  let started = false;
  while (Date.now() < deadline) {
    const state = await client.state();
    if (!started && state.run_state === "paused") {
      await client.control("resume");
      started = true;
    }
    if (state.run_state === "finished") return;
    for (const entry of await client.queue()) {
      const label = truth.get(entry.input_index);
      if (label === undefined) {
        throw new Error(`no ground truth for stream input ${entry.input_index}`);
      }
      await client.label(entry.query_id, label);
    }
    await new Promise((resolve) => setTimeout(resolve, 5));
  }
  throw new Error("driver timed out before the run finished");
}

const invokedDirectly =
  typeof process !== "undefined" && process.argv[1]?.endsWith("driver.js");

if (invokedDirectly) {
  const [baseUrl, truthPath, timeout] = process.argv.slice(2);
  if (!baseUrl || !truthPath) {
    console.error("usage: node driver.js <base-url> <truth-csv> [timeout-seconds]");
    process.exit(2);
  }
  const truth = parseTruthCsv(readFileSync(truthPath, "utf-8"));
  drive(new Client(baseUrl), truth, timeout ? Number(timeout) : 120)
    .then(() => {
      console.log("driver: run finished");
    })
    .catch((error) => {
      console.error(`driver: ${error}`);
      process.exit(1);
    });
}
