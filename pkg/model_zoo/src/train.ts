/** Training of the tiny sequence classifiers and export to the verifier.
 *
 * The softmax sits in its own layer during training, so the dense head's
 * weights are the pre-softmax map and a second model over the same graph
 * exposes the raw logits for round-trip comparisons.
 */

import * as tf from "@tensorflow/tfjs";

import { Sequence } from "./dataset";
import { exportConv1d, exportDense, exportLstm, ModelDoc } from "./export";
import { NOISE_CLASSES } from "./noise";

export type Architecture = "lstm" | "cnn_lstm";

export interface TrainOptions {
  epochs: number;
  hiddenUnits: number;
  convFilters: number;
  kernelSize: number;
  learningRate: number;
  batchSize: number;
}

export const DEFAULT_TRAIN_OPTIONS: TrainOptions = {
  epochs: 40,
  hiddenUnits: 8,
  convFilters: 6,
  kernelSize: 3,
  learningRate: 0.02,
  batchSize: 16,
};

export interface TrainedClassifier {
  doc: ModelDoc;
  heldOutAccuracy: number;
  /** Pre-softmax outputs for a batch of sequences (verifier layout). */
  logits(sequences: Sequence[]): number[][];
  dispose(): void;
}

function toBatch(sequences: Sequence[]): tf.Tensor3D {
  // Verifier layout is (n_f, t_s); tfjs wants (batch, t_s, n_f).
  const data = sequences.map((s) => s.values[0].map((_, t) =>
    s.values.map((row) => row[t])));
  return tf.tensor3d(data);
}

export async function trainNoiseClassifier(
  train: Sequence[],
  heldOut: Sequence[],
  architecture: Architecture,
  seed: number,
  options: Partial<TrainOptions> = {},
): Promise<TrainedClassifier> {
  const opts = { ...DEFAULT_TRAIN_OPTIONS, ...options };
  const nF = train[0].values.length;
  const tS = train[0].values[0].length;
  const classes = NOISE_CLASSES.length;

  const input = tf.input({ shape: [tS, nF] });
  let x = input as tf.SymbolicTensor;
  let conv: tf.layers.Layer | null = null;
  if (architecture === "cnn_lstm") {
    conv = tf.layers.conv1d({
      filters: opts.convFilters,
      kernelSize: opts.kernelSize,
      padding: "same",
      kernelInitializer: tf.initializers.glorotUniform({ seed: seed + 1 }),
    });
    x = conv.apply(x) as tf.SymbolicTensor;
    x = tf.layers.activation({ activation: "relu" })
      .apply(x) as tf.SymbolicTensor;
  }
  const lstm = tf.layers.lstm({
    units: opts.hiddenUnits,
    activation: "tanh",
    recurrentActivation: "sigmoid",
    kernelInitializer: tf.initializers.glorotUniform({ seed: seed + 2 }),
    recurrentInitializer: tf.initializers.orthogonal({ seed: seed + 3 }),
  });
  x = lstm.apply(x) as tf.SymbolicTensor;
  const head = tf.layers.dense({
    units: classes,
    kernelInitializer: tf.initializers.glorotUniform({ seed: seed + 4 }),
  });
  const logitsOut = head.apply(x) as tf.SymbolicTensor;
  const probsOut = tf.layers.softmax().apply(logitsOut) as tf.SymbolicTensor;

  const trainModel = tf.model({ inputs: input, outputs: probsOut });
  const logitsModel = tf.model({ inputs: input, outputs: logitsOut });
  trainModel.compile({
    optimizer: tf.train.adam(opts.learningRate),
    loss: "sparseCategoricalCrossentropy",
  });

  const xs = toBatch(train);
  // float labels: tfjs' sparse crossentropy floors them internally
  const ys = tf.tensor1d(train.map((s) => s.label), "float32");
  await trainModel.fit(xs, ys, {
    epochs: opts.epochs,
    batchSize: opts.batchSize,
    shuffle: false,
    verbose: 0,
  });
  xs.dispose();
  ys.dispose();

  const logits = (sequences: Sequence[]): number[][] =>
    tf.tidy(() => {
      const batch = toBatch(sequences);
      return (logitsModel.predict(batch) as tf.Tensor2D)
        .arraySync() as number[][];
    });

  const heldLogits = logits(heldOut);
  let hits = 0;
  heldOut.forEach((seq, i) => {
    const row = heldLogits[i];
    const pred = row.indexOf(Math.max(...row));
    if (pred === seq.label) hits++;
  });
  const accuracy = hits / heldOut.length;

  const layers: Record<string, unknown>[] = [];
  if (conv) {
    layers.push(exportConv1d(conv));
    layers.push({ kind: "relu" });
  }
  layers.push(exportLstm(lstm));
  layers.push(exportDense(head));
  const doc: ModelDoc = {
    name: `noise_${architecture}`,
    input_features: nF,
    output_dim: classes,
    labels: [...NOISE_CLASSES],
    layers,
  };
  return {
    doc,
    heldOutAccuracy: accuracy,
    logits,
    dispose: () => {
      trainModel.dispose();
    },
  };
}
