/** Conversion from trained tfjs layers to the verifier's model JSON.
 *
 * The verifier has no softmax layer kind; the exported head is the dense
 * layer's linear weights, which is exactly the pre-softmax map. Gate order
 * in the fused tfjs kernels is i, f, g (cell), o; the verifier stores the
 * four gates separately with weights as (hidden x input) matrices.
 */

import * as tf from "@tensorflow/tfjs";

export interface ModelDoc {
  name: string;
  input_features: number;
  output_dim: number;
  labels: string[];
  layers: Record<string, unknown>[];
}

function transpose(a: number[][]): number[][] {
  return a[0].map((_, j) => a.map((row) => row[j]));
}

export function exportDense(layer: tf.layers.Layer): Record<string, unknown> {
  const [kernel, bias] = layer.getWeights();
  const k = kernel.arraySync() as number[][]; // (in, out)
  const b = bias.arraySync() as number[];
  return {
    kind: "fully_connected",
    weights: transpose(k),
    bias: b,
  };
}

export function exportLstm(layer: tf.layers.Layer): Record<string, unknown> {
  const [kernel, recurrent, bias] = layer.getWeights();
  const k = kernel.arraySync() as number[][]; // (input, 4*units)
  const r = recurrent.arraySync() as number[][]; // (units, 4*units)
  const b = bias.arraySync() as number[]; // (4*units)
  const units = r.length;
  const gateNames = ["i", "f", "g", "o"];
  const doc: Record<string, unknown> = { kind: "lstm", output_mode: "last" };
  gateNames.forEach((g, idx) => {
    const cols = [idx * units, (idx + 1) * units];
    doc[`W_${g}`] = transpose(k.map((row) => row.slice(cols[0], cols[1])));
    doc[`R_${g}`] = transpose(r.map((row) => row.slice(cols[0], cols[1])));
    doc[`b_${g}`] = b.slice(cols[0], cols[1]);
  });
  return doc;
}

export function exportConv1d(layer: tf.layers.Layer): Record<string, unknown> {
  const [kernel, bias] = layer.getWeights();
  const k = kernel.arraySync() as number[][][]; // (kernelSize, inCh, filters)
  const b = bias.arraySync() as number[];
  const kernelSize = k.length;
  const inCh = k[0].length;
  const filters = k[0][0].length;
  const weights: number[][][] = [];
  for (let o = 0; o < filters; o++) {
    const perOut: number[][] = [];
    for (let c = 0; c < inCh; c++) {
      const taps: number[] = [];
      for (let t = 0; t < kernelSize; t++) taps.push(k[t][c][o]);
      perOut.push(taps);
    }
    weights.push(perOut);
  }
  const config = layer.getConfig() as Record<string, unknown>;
  const rawStrides = config.strides as number | number[] | undefined;
  const stride = Array.isArray(rawStrides) ? rawStrides[0] : rawStrides ?? 1;
  let padding = 0;
  if (config.padding === "same") {
    // The verifier's format has symmetric padding only, which matches
    // tfjs "same" exactly for odd kernels at stride 1.
    if (kernelSize % 2 === 0 || stride !== 1) {
      throw new Error(
        "'same' padding exports only for odd kernels at stride 1",
      );
    }
    padding = (kernelSize - 1) / 2;
  }
  return {
    kind: "conv1d",
    weights,
    bias: b,
    stride,
    padding,
    dilation: 1,
  };
}
