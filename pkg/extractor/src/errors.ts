/** Typed errors; `code` mirrors the class name for structured output. */

export class ExtractorError extends Error {
  readonly code: string;

  constructor(message: string) {
    super(message);
    this.code = new.target.name;
  }
}

/** Malformed or unreadable FTEN container. */
export class FtenError extends ExtractorError {}

/** Malformed or unreadable PGM image. */
export class PgmError extends ExtractorError {}

/** Model id not present in the encoder registry. */
export class UnknownModelError extends ExtractorError {}

/** Invalid configuration or command-line usage. */
export class ConfigError extends ExtractorError {}
