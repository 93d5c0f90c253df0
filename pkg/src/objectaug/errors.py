"""Exception types raised by the augmentation engine."""


class ObjectAugError(Exception):
    """Base class for all engine errors."""


class DecodeError(ObjectAugError):
    """A file could not be decoded into the expected pixel format."""


class DimensionMismatch(ObjectAugError):
    """Two planes that must share dimensions do not."""


class UnknownLabel(ObjectAugError):
    """A mask contains a value outside the declared category set."""


class ParseError(ObjectAugError):
    """A text input (scores file, config file) is malformed."""


class ScoreOutOfRange(ObjectAugError):
    """A category score lies outside (0, 1]."""


class IoError(ObjectAugError):
    """A file could not be written or read."""


class EmptyInput(ObjectAugError):
    """An operation that needs at least one element got none."""


class NonPositiveScore(ObjectAugError):
    """A performance score is zero or negative."""


class ZeroCount(ObjectAugError):
    """An object count is below one."""


class ExternalUnavailable(ObjectAugError):
    """The external inpainting endpoint timed out, refused, or is not ready."""


class ExternalProtocol(ObjectAugError):
    """The external inpainting endpoint returned a malformed response."""


class InvariantViolation(ObjectAugError):
    """Assembly inputs do not satisfy their invariants."""


class PairingError(ObjectAugError):
    """An image has no mask with the same stem, or vice versa."""


class ValidationError(ObjectAugError):
    """A configuration value violates an invariant."""
