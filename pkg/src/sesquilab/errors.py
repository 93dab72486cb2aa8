"""Exception types shared across the library."""


class SesquiError(Exception):
    """Base class for all library errors."""


class NearZeroVector(SesquiError):
    """Renormalization hit a node vector with norm below the safe threshold."""


class NonpositiveDelta2(SesquiError):
    """Operation requires delta2 > 0."""


class Delta2Zero(SesquiError):
    """Operation requires delta2 != 0."""


class BallOutOfPatch(SesquiError):
    """Requested ball does not fit inside the patch interior."""


class WrongDimension(SesquiError):
    """Operation requires a specific domain dimension."""


class EmptyBallFamily(SesquiError):
    """No admissible ball fits inside the requested region."""


class ConfigError(SesquiError):
    """Invalid experiment configuration; the message names the offending key."""

    def __init__(self, key, message):
        self.key = key
        super().__init__(f"{key}: {message}")


class IoError(SesquiError):
    """Failed to read or write an artifact file."""
