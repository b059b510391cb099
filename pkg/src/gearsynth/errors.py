"""Exception types shared across the toolkit."""


class GearsynthError(Exception):
    """Base class for all domain errors."""


class ParseError(GearsynthError):
    """A data or sequence file does not match its documented schema."""


class MissingPart(GearsynthError):
    """A required catalogue part is absent from the data file."""


class AsymmetricMesh(GearsynthError):
    """Mesh partner lists are not symmetric."""


class ModuleMismatch(GearsynthError):
    """Two listed mesh partners have different gear modules."""


class UnknownPart(GearsynthError):
    """A token does not resolve to a catalogue part."""


class NegativeLength(GearsynthError):
    """A shaft length must be non-negative."""


class UnknownToken(GearsynthError):
    """A token string is not in the vocabulary."""


class DeadEnd(GearsynthError):
    """A prefix cannot be extended to any valid sequence."""


class InvalidSequence(GearsynthError):
    """A sequence failed grammar validation where validity was required."""


class TranslationOnRack(GearsynthError):
    """Shafts cannot be mounted on a translating member."""


class IncompatibleMesh(GearsynthError):
    """The two parts at a mesh token cannot mesh."""


class NonPositiveRatio(GearsynthError):
    """Log-based speed-ratio metrics need strictly positive ratios."""


class LengthMismatch(GearsynthError):
    """Paired metric inputs must have equal length."""


class TooFewRecords(GearsynthError):
    """A dataset split would be empty."""


class OutputUnwritable(GearsynthError):
    """An output path cannot be created or written."""


class BudgetTooSmall(GearsynthError):
    """Search budget is below the minimum for the configuration."""


class CompleterUnreachable(GearsynthError):
    """No completer process/connection could be established."""


class ProtocolError(GearsynthError):
    """Completer wire-protocol violation (bad handshake or malformed record)."""
