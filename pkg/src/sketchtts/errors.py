"""Exception types shared across the package."""


class SketchTTSError(Exception):
    """Base class for all package errors."""


class AudioError(SketchTTSError):
    """Bad or unusable audio input (too short, corrupt, wrong rate)."""


class AlignmentError(SketchTTSError):
    """Durations and frames disagree."""


class PhonemizeError(SketchTTSError):
    """Text could not be converted to phonemes."""


class VocabularyError(SketchTTSError):
    """A phoneme symbol is outside the model inventory."""


class ValidationError(SketchTTSError):
    """User-supplied input violates an interface contract."""


class ConfigError(SketchTTSError):
    """Inconsistent or impossible configuration."""


class CheckpointError(SketchTTSError):
    """Checkpoint archive is missing, unversioned, or incompatible."""
