import { describe, expect, it } from "vitest";

import { toJsonLines } from "../src/dataset";
import {
  NOISE_CLASSES,
  NoiseTaskConfig,
  generateNoiseDataset,
  synthesizeSignal,
} from "../src/noise";
import { Rng } from "../src/rng";

// Small acoustic config keeps the FFT work light; the statistics are
// rate-independent.
const FAST: NoiseTaskConfig = {
  durationSeconds: 0.5,
  sampleRate: 8192,
  frameSize: 512,
};

describe("rng", () => {
  it("is reproducible and roughly uniform", () => {
    const a = new Rng(123);
    const b = new Rng(123);
    const va = Array.from({ length: 100 }, () => a.next());
    const vb = Array.from({ length: 100 }, () => b.next());
    expect(va).toEqual(vb);
    const mean = va.reduce((x, y) => x + y, 0) / va.length;
    expect(mean).toBeGreaterThan(0.35);
    expect(mean).toBeLessThan(0.65);
  });
});

describe("generateNoiseDataset", () => {
  it("emits one sequence per class with two feature rows", () => {
    const data = generateNoiseDataset(1, 7, FAST);
    expect(data).toHaveLength(3);
    expect(data.map((s) => s.label)).toEqual([0, 1, 2]);
    for (const seq of data) {
      expect(seq.values).toHaveLength(2);
      expect(seq.values[0].length).toBeGreaterThanOrEqual(1);
      expect(seq.values[0]).toHaveLength(seq.values[1].length);
    }
  });

  it("is deterministic per seed", () => {
    const a = toJsonLines(generateNoiseDataset(3, 42, FAST));
    const b = toJsonLines(generateNoiseDataset(3, 42, FAST));
    expect(a).toBe(b);
    const c = toJsonLines(generateNoiseDataset(3, 43, FAST));
    expect(c).not.toBe(a);
  });

  it("separates brown from white by the slope statistic", () => {
    // 34 per class: just over 100 signals.
    const data = generateNoiseDataset(34, 5, FAST);
    const meanSlope = (label: number) => {
      const rows = data.filter((s) => s.label === label)
        .flatMap((s) => s.values[1]);
      return rows.reduce((x, y) => x + y, 0) / rows.length;
    };
    const white = meanSlope(0);
    const brown = meanSlope(1);
    const pink = meanSlope(2);
    expect(Math.abs(white)).toBeLessThan(0.3); // flat spectrum
    expect(brown).toBeLessThan(-1.3); // steeper, opposite sign
    expect(pink).toBeLessThan(white);
    expect(pink).toBeGreaterThan(brown);
  });

  it("rejects a non-positive count", () => {
    expect(() => generateNoiseDataset(0, 1, FAST)).toThrow();
  });
});

describe("synthesizeSignal", () => {
  it("normalizes all classes to zero mean and unit power", () => {
    const rng = new Rng(9);
    for (const kind of NOISE_CLASSES) {
      const signal = synthesizeSignal(kind, 4096, rng);
      const mean = signal.reduce((x, y) => x + y, 0) / signal.length;
      const rms = Math.sqrt(
        signal.reduce((x, y) => x + y * y, 0) / signal.length,
      );
      expect(Math.abs(mean)).toBeLessThan(1e-9);
      expect(rms).toBeCloseTo(1.0, 6);
    }
  });
});
