export { ConfigError, ExtractorError, FtenError, PgmError, UnknownModelError } from "./errors.js";
export {
  DTYPE_F32,
  DTYPE_U16,
  DTYPE_U8,
  FTEN_MAGIC,
  FTEN_VERSION,
  HEADER_SIZE,
  decodeFeatureTensor,
  encodeFeatureTensor,
  readFeatureTensor,
  writeFeatureTensor,
} from "./ften.js";
export type { FeatureTensor } from "./ften.js";
export { decodePgm, encodePgm, readPgm, writePgm } from "./pgm.js";
export type { GrayImage } from "./pgm.js";
export { averagePool, resizeBilinear } from "./resample.js";
export type { Plane } from "./resample.js";
export { createEncoder, knownModels, registerEncoder } from "./models.js";
export type { Encoder, EncoderMode, StageFeatures } from "./models.js";
export { FEATURE_STRIDES, exportFeatures } from "./extract.js";
export type { ExportReport, ExtractorConfig, StageSource } from "./extract.js";
export { derive, raw, rawAt, uniforms } from "./prng.js";
