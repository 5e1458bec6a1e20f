/** Client helpers for the verifier service, plus a test-time spawner.
 *
 * The zoo talks to the verifier only through its public surface: the model
 * JSON format and the HTTP endpoints.
 */

import { ChildProcess, spawn } from "child_process";

import { Sequence } from "./dataset";
import { ModelDoc } from "./export";

export interface RunningService {
  baseUrl: string;
  stop(): void;
}

const sleep = (ms: number) => new Promise((r) => setTimeout(r, ms));

export async function startVerifierService(
  port = 8731,
  timeoutMs = 60_000,
): Promise<RunningService> {
  const proc: ChildProcess = spawn(
    "python3",
    ["-m", "seqstar.service", "--port", String(port)],
    { stdio: ["ignore", "ignore", "pipe"] },
  );
  let stderr = "";
  proc.stderr?.on("data", (chunk) => {
    stderr += String(chunk);
  });
  const baseUrl = `http://127.0.0.1:${port}`;
  const deadline = Date.now() + timeoutMs;
  while (Date.now() < deadline) {
    if (proc.exitCode !== null) {
      throw new Error(`verifier service exited early:\n${stderr}`);
    }
    try {
      const resp = await fetch(`${baseUrl}/health`);
      if (resp.ok) {
        return { baseUrl, stop: () => proc.kill("SIGTERM") };
      }
    } catch {
      // not up yet
    }
    await sleep(250);
  }
  proc.kill("SIGTERM");
  throw new Error(`verifier service did not come up:\n${stderr}`);
}

async function post(baseUrl: string, path: string, payload: unknown) {
  const resp = await fetch(`${baseUrl}${path}`, {
    method: "POST",
    headers: { "content-type": "application/json" },
    body: JSON.stringify(payload),
  });
  if (!resp.ok) {
    throw new Error(`${path} -> ${resp.status}: ${await resp.text()}`);
  }
  return resp.json();
}

export async function inspectModel(baseUrl: string, doc: ModelDoc) {
  return post(baseUrl, "/model/inspect", { model: doc }) as Promise<{
    name: string;
    input_features: number;
    output_classes: number;
    summary: string[];
  }>;
}

export async function forwardSequences(
  baseUrl: string,
  doc: ModelDoc,
  sequences: Sequence[],
) {
  return post(baseUrl, "/forward", {
    model: doc,
    sequences,
  }) as Promise<{ outputs: number[][]; predicted: number[] }>;
}
