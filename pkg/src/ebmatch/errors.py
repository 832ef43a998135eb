"""Exception types shared across the engine."""


class EngineError(Exception):
    """Base class for all errors raised by this package."""


class LineFormatError(EngineError):
    """A line-oriented input file is malformed; carries the offending line number."""

    def __init__(self, message: str, line_no: int | None = None):
        if line_no is not None:
            message = f"line {line_no}: {message}"
        super().__init__(message)
        self.line_no = line_no


class LexiconFormatError(LineFormatError):
    """A lexicon file violates the TSV format or a lexicon invariant."""


class ArchiveFormatError(LineFormatError):
    """An archive file is malformed or violates marker invariants."""


class EmptySentenceError(EngineError):
    """A sentence has no tokens left after tokenization."""


class ModelFormatError(EngineError):
    """A saved model file does not match the expected schema."""


class ModelVersionError(ModelFormatError):
    """A saved model file declares an unsupported schema version."""


class LexiconMismatchError(ModelFormatError):
    """The lexicons on disk differ from the ones the model was built with."""


class ConfigError(EngineError):
    """A configuration value is out of range or unknown."""
