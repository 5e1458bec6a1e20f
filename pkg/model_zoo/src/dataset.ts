/** Sequence records in the verifier's dataset format (JSON lines). */

import * as fs from "fs";

export interface Sequence {
  /** n_f rows by t_s columns, matching the verifier's layout. */
  values: number[][];
  label: number;
}

export function toJsonLines(sequences: Sequence[]): string {
  return (
    sequences
      .map((s) => JSON.stringify({ values: s.values, label: s.label }))
      .join("\n") + "\n"
  );
}

export function writeJsonLines(path: string, sequences: Sequence[]): void {
  fs.writeFileSync(path, toJsonLines(sequences));
}

export function readJsonLines(path: string): Sequence[] {
  return fs
    .readFileSync(path, "utf-8")
    .split("\n")
    .filter((line) => line.trim().length > 0)
    .map((line) => JSON.parse(line) as Sequence);
}

/** Split without shuffling: callers generate already-interleaved classes. */
export function holdOutSplit(
  sequences: Sequence[],
  holdOutFraction: number,
): { train: Sequence[]; heldOut: Sequence[] } {
  const byLabel = new Map<number, Sequence[]>();
  for (const seq of sequences) {
    const bucket = byLabel.get(seq.label) ?? [];
    bucket.push(seq);
    byLabel.set(seq.label, bucket);
  }
  const train: Sequence[] = [];
  const heldOut: Sequence[] = [];
  for (const bucket of byLabel.values()) {
    const nHold = Math.max(1, Math.round(bucket.length * holdOutFraction));
    heldOut.push(...bucket.slice(0, nHold));
    train.push(...bucket.slice(nHold));
  }
  return { train, heldOut };
}
