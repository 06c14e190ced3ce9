"""Exception hierarchy shared across the engine."""


class OcrError(Exception):
    """Base class for all engine errors."""


class DimensionError(OcrError):
    """Image or tensor dimensions are invalid or inconsistent."""


class ParameterError(OcrError):
    """An operation parameter is outside its allowed range."""


class NoContentError(OcrError):
    """An operation requiring foreground pixels received an empty image."""


class ShapeError(OcrError):
    """A tensor shape does not match what a network expects."""


class NumericError(OcrError):
    """A non-finite value (NaN/Inf) appeared during computation."""


class ParseError(OcrError):
    """An architecture string could not be parsed into a valid network."""


class ModelIOError(OcrError):
    """A model file is missing, truncated, or has a bad magic/version."""


class TaxonomyError(OcrError):
    """A label id is unknown to the loaded taxonomy."""


class IngestError(OcrError):
    """A glyph sheet row could not be matched to its labels."""


class ConfigError(OcrError):
    """Inconsistent runtime configuration (e.g. model/taxonomy mismatch)."""


class ImageDecodeError(OcrError):
    """Input bytes could not be decoded as a supported image format."""
