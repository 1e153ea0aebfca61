"""Exception hierarchy shared by every ringaug module."""


class RingAugError(Exception):
    """Base class for all errors raised by ringaug."""


class GeometryError(RingAugError, ValueError):
    """Invalid geometric input (non-finite coordinates, bad index, ...)."""


class NotARingError(GeometryError):
    """A ring-only operation was called on a polygon without a partition."""


class ConfigurationError(RingAugError, ValueError):
    """Invalid augmentation spec, corpus spec or pipeline config."""


class DegenerateTransformError(RingAugError, ValueError):
    """The affine matrix is singular."""


class EmptyPolygonError(RingAugError):
    """Repair was asked to close a chain with no surviving vertices."""


class DegeneratePolygonError(RingAugError):
    """Fewer than three vertices survived, so no polygon can be formed."""

    def __init__(self, message, survivors=None):
        super().__init__(message)
        self.survivors = survivors


class InconsistencyError(RingAugError, ValueError):
    """A clip vertex does not refer to a gap between consecutive survivors."""


class UndefinedMetricError(RingAugError, ValueError):
    """A metric was evaluated on an empty input."""


class InvalidSequenceError(RingAugError, ValueError):
    """An index sequence is out of range or contains duplicates."""


class AnnotationError(RingAugError):
    """Base class for annotation file problems."""


class AnnotationParseError(AnnotationError):
    """The file is not valid JSON."""

    def __init__(self, message, line=None, offset=None):
        super().__init__(message)
        self.line = line
        self.offset = offset


class AnnotationFormatError(AnnotationError):
    """Valid JSON that does not follow the expected schema."""


class UnsupportedFormatError(AnnotationError):
    """Unknown annotation format tag."""
