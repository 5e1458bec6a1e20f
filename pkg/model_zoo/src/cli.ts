/** Command line: generate datasets, train and export classifiers.
 *
 *   node dist/cli.js generate --task noise --count 50 --seed 7 --out d.jsonl
 *   node dist/cli.js train --data d.jsonl --arch lstm --seed 7 --out m.json
 */

import * as fs from "fs";
import { parseArgs } from "util";

import { holdOutSplit, readJsonLines, writeJsonLines } from "./dataset";
import { generateNoiseDataset } from "./noise";
import { Architecture, trainNoiseClassifier } from "./train";
import { generateVowelLikeDataset } from "./vowel";

async function main() {
  const [command, ...rest] = process.argv.slice(2);
  if (command === "generate") {
    const { values } = parseArgs({
      args: rest,
      options: {
        task: { type: "string", default: "noise" },
        count: { type: "string", default: "50" },
        seed: { type: "string", default: "0" },
        out: { type: "string" },
        duration: { type: "string", default: "0.5" },
        rate: { type: "string", default: "44100" },
        frame: { type: "string", default: "2048" },
      },
    });
    if (!values.out) throw new Error("--out is required");
    const count = Number(values.count);
    const seed = Number(values.seed);
    const data = values.task === "vowel"
      ? generateVowelLikeDataset(count, seed)
      : generateNoiseDataset(count, seed, {
          durationSeconds: Number(values.duration),
          sampleRate: Number(values.rate),
          frameSize: Number(values.frame),
        });
    writeJsonLines(values.out, data);
    console.log(`wrote ${data.length} sequences to ${values.out}`);
  } else if (command === "train") {
    const { values } = parseArgs({
      args: rest,
      options: {
        data: { type: "string" },
        arch: { type: "string", default: "lstm" },
        seed: { type: "string", default: "0" },
        out: { type: "string" },
        epochs: { type: "string", default: "40" },
        holdout: { type: "string", default: "0.25" },
      },
    });
    if (!values.data || !values.out) {
      throw new Error("--data and --out are required");
    }
    const dataset = readJsonLines(values.data);
    const { train, heldOut } = holdOutSplit(dataset, Number(values.holdout));
    const result = await trainNoiseClassifier(
      train,
      heldOut,
      values.arch as Architecture,
      Number(values.seed),
      { epochs: Number(values.epochs) },
    );
    fs.writeFileSync(values.out, JSON.stringify(result.doc) + "\n");
    console.log(
      `held-out accuracy ${(100 * result.heldOutAccuracy).toFixed(1)}% ` +
        `(${heldOut.length} sequences); model written to ${values.out}`,
    );
    result.dispose();
  } else {
    console.error("usage: cli.js generate|train [options]");
    process.exitCode = 2;
  }
}

main().catch((err) => {
  console.error(err.message ?? err);
  process.exitCode = 1;
});
