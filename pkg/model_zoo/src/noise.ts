/** Synthetic colored-noise signals and their per-frame features.
 *
 * Three classes: white (flat power spectrum), brown (integrated white,
 * power falling ~1/f^2), pink (~1/f, via the Kellet filter approximation).
 * Each signal is reduced to two per-frame statistics: a spectral-centroid
 * style location and the log-log spectral slope, which is what separates
 * the colors (white ~0, pink ~-1, brown ~-2).
 */

import * as tf from "@tensorflow/tfjs";

import { Sequence } from "./dataset";
import { Rng } from "./rng";

export const NOISE_CLASSES = ["white", "brown", "pink"] as const;
export type NoiseClass = (typeof NOISE_CLASSES)[number];

export interface NoiseTaskConfig {
  durationSeconds: number;
  sampleRate: number;
  frameSize: number; // power of two, for the FFT
}

export const DEFAULT_NOISE_CONFIG: NoiseTaskConfig = {
  durationSeconds: 0.5,
  sampleRate: 44100,
  frameSize: 2048,
};

export function synthesizeSignal(
  kind: NoiseClass,
  samples: number,
  rng: Rng,
): Float64Array {
  const white = new Float64Array(samples);
  for (let i = 0; i < samples; i++) white[i] = rng.gauss();
  let out: Float64Array;
  if (kind === "white") {
    out = white;
  } else if (kind === "brown") {
    out = new Float64Array(samples);
    let acc = 0;
    for (let i = 0; i < samples; i++) {
      acc += white[i];
      out[i] = acc;
    }
  } else {
    // Kellet's pink-noise filter bank over white noise.
    out = new Float64Array(samples);
    let b0 = 0, b1 = 0, b2 = 0, b3 = 0, b4 = 0, b5 = 0, b6 = 0;
    for (let i = 0; i < samples; i++) {
      const w = white[i];
      b0 = 0.99886 * b0 + w * 0.0555179;
      b1 = 0.99332 * b1 + w * 0.0750759;
      b2 = 0.969 * b2 + w * 0.153852;
      b3 = 0.8665 * b3 + w * 0.3104856;
      b4 = 0.55 * b4 + w * 0.5329522;
      b5 = -0.7616 * b5 - w * 0.016898;
      const pink = b0 + b1 + b2 + b3 + b4 + b5 + b6 + w * 0.5362;
      b6 = w * 0.115926;
      out[i] = pink;
    }
  }
  // Zero-mean, unit-RMS so the classes differ in shape, not level.
  let mean = 0;
  for (const v of out) mean += v;
  mean /= samples;
  let rms = 0;
  for (let i = 0; i < samples; i++) {
    out[i] -= mean;
    rms += out[i] * out[i];
  }
  rms = Math.sqrt(rms / samples) || 1;
  for (let i = 0; i < samples; i++) out[i] /= rms;
  return out;
}

/**
 * Per-frame [centroid, slope] features for a batch of signals. Frames are
 * non-overlapping, trailing partial frames dropped; all frames of all
 * signals go through one FFT call (per-op overhead dominates otherwise).
 * Returns, per signal, t_s rows of 2 entries.
 */
export function batchFrameFeatures(
  signals: Float64Array[],
  config: NoiseTaskConfig = DEFAULT_NOISE_CONFIG,
): number[][][] {
  const { frameSize, sampleRate } = config;
  const frameCount = Math.floor(signals[0].length / frameSize);
  if (frameCount < 1) {
    throw new Error(`signal shorter than one frame (${frameSize})`);
  }
  const allFrames: number[][] = [];
  for (const signal of signals) {
    for (let t = 0; t < frameCount; t++) {
      allFrames.push(
        Array.from(signal.subarray(t * frameSize, (t + 1) * frameSize)),
      );
    }
  }
  const mags = tf.tidy(() => {
    const frames = tf.tensor2d(allFrames);
    const spectrum = tf.abs(tf.spectral.rfft(frames));
    return tf.maximum(tf.square(spectrum), 1e-12).arraySync() as number[][];
  });
  const bins = frameSize / 2 + 1;
  const freqs = Array.from(
    { length: bins },
    (_, k) => (k * sampleRate) / frameSize,
  );
  const logF = freqs.map((f) => Math.log10(Math.max(f, 1e-6)));
  const perFrame = (p: number[]): [number, number] => {
    let num = 0;
    let den = 0;
    for (let k = 1; k < bins; k++) {
      num += freqs[k] * p[k];
      den += p[k];
    }
    const centroid = num / den / (sampleRate / 2); // normalized to Nyquist
    // Least-squares slope of log10 power against log10 frequency.
    let sx = 0, sy = 0, sxx = 0, sxy = 0;
    const n = bins - 1;
    for (let k = 1; k < bins; k++) {
      const x = logF[k];
      const y = Math.log10(p[k]);
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
    }
    const slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    return [centroid, slope];
  };
  return signals.map((_, s) =>
    Array.from({ length: frameCount }, (_, t) =>
      perFrame(mags[s * frameCount + t]),
    ),
  );
}

/** Single-signal convenience wrapper around batchFrameFeatures. */
export function frameFeatures(
  signal: Float64Array,
  config: NoiseTaskConfig = DEFAULT_NOISE_CONFIG,
): number[][] {
  return batchFrameFeatures([signal], config)[0];
}

/** Dataset in the verifier layout: values are n_f=2 rows by t_s columns. */
export function generateNoiseDataset(
  countPerClass: number,
  seed: number,
  config: NoiseTaskConfig = DEFAULT_NOISE_CONFIG,
): Sequence[] {
  if (countPerClass < 1) throw new Error("countPerClass must be >= 1");
  const rng = new Rng(seed);
  const samples = Math.round(config.durationSeconds * config.sampleRate);
  const signals: Float64Array[] = [];
  const labels: number[] = [];
  for (let i = 0; i < countPerClass; i++) {
    NOISE_CLASSES.forEach((kind, label) => {
      signals.push(synthesizeSignal(kind, samples, rng));
      labels.push(label);
    });
  }
  const features = batchFrameFeatures(signals, config);
  return labels.map((label, s) => ({
    values: [features[s].map((f) => f[0]), features[s].map((f) => f[1])],
    label,
  }));
}
