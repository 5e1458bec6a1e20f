export { Rng } from "./rng";
export { Sequence, holdOutSplit, readJsonLines, toJsonLines, writeJsonLines }
  from "./dataset";
export {
  DEFAULT_NOISE_CONFIG,
  NOISE_CLASSES,
  NoiseClass,
  NoiseTaskConfig,
  batchFrameFeatures,
  frameFeatures,
  generateNoiseDataset,
  synthesizeSignal,
} from "./noise";
export {
  VOWEL_CLASSES,
  VOWEL_COEFFICIENTS,
  VOWEL_MAX_LENGTH,
  VOWEL_MIN_LENGTH,
  generateVowelLikeDataset,
} from "./vowel";
export { ModelDoc, exportConv1d, exportDense, exportLstm } from "./export";
export {
  Architecture,
  DEFAULT_TRAIN_OPTIONS,
  TrainOptions,
  TrainedClassifier,
  trainNoiseClassifier,
} from "./train";
export {
  RunningService,
  forwardSequences,
  inspectModel,
  startVerifierService,
} from "./service";
