/** Vowel-like synthetic task: 9 classes, 12 coefficients per step,
 * variable lengths between 7 and 29. Shape-compatible stand-in for the
 * two-vowel speaker data; each class gets its own coefficient profile and
 * drift direction.
 */

import { Sequence } from "./dataset";
import { Rng } from "./rng";

export const VOWEL_CLASSES = 9;
export const VOWEL_COEFFICIENTS = 12;
export const VOWEL_MIN_LENGTH = 7;
export const VOWEL_MAX_LENGTH = 29;

export function generateVowelLikeDataset(
  countPerClass: number,
  seed: number,
): Sequence[] {
  if (countPerClass < 1) throw new Error("countPerClass must be >= 1");
  const rng = new Rng(seed);
  // Fixed per-class profiles, drawn from a class-seeded stream so the
  // dataset is stable regardless of count.
  const profiles: number[][] = [];
  const drifts: number[][] = [];
  for (let c = 0; c < VOWEL_CLASSES; c++) {
    const prng = new Rng(seed * 1000 + c + 1);
    profiles.push(
      Array.from({ length: VOWEL_COEFFICIENTS }, () => 1.2 * prng.gauss()),
    );
    drifts.push(
      Array.from({ length: VOWEL_COEFFICIENTS }, () => 0.08 * prng.gauss()),
    );
  }
  const sequences: Sequence[] = [];
  for (let i = 0; i < countPerClass; i++) {
    for (let label = 0; label < VOWEL_CLASSES; label++) {
      const length =
        VOWEL_MIN_LENGTH + rng.int(VOWEL_MAX_LENGTH - VOWEL_MIN_LENGTH + 1);
      const values: number[][] = [];
      for (let f = 0; f < VOWEL_COEFFICIENTS; f++) {
        const row: number[] = [];
        for (let t = 0; t < length; t++) {
          row.push(profiles[label][f] + drifts[label][f] * t +
            0.15 * rng.gauss());
        }
        values.push(row);
      }
      sequences.push({ values, label });
    }
  }
  return sequences;
}
