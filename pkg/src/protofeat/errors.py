"""Exception hierarchy shared by all protofeat modules."""


class ProtofeatError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(ProtofeatError):
    """Invalid configuration value, unknown key, or bad parameter combination."""


class DataError(ProtofeatError):
    """Input data missing, malformed, or inconsistent."""


class InvalidKernel(ProtofeatError):
    """Convolution kernel violates its contract (e.g. even-sized)."""


class NoStructureFound(ProtofeatError):
    """Prototype image produced no usable response anywhere on the scan circles."""


class DecodeError(DataError):
    """Malformed audio container."""


class UnsupportedFormat(DataError):
    """Audio codec we do not decode (only PCM16 and IEEE float32)."""


class EmptyMap(DataError):
    """Clip too short to produce a single analysis frame."""


class NoPeaksFound(ProtofeatError):
    """Prototype time-frequency map has no peaks above the floor."""


class DegenerateLabels(ProtofeatError):
    """Classifier training needs at least two distinct classes."""


class EmptyInput(ProtofeatError):
    """Operation received an empty sample/feature matrix."""


class ShapeError(ProtofeatError):
    """Array dimensions do not match."""


class InternalError(ProtofeatError):
    """An internal invariant was violated (CLI exit code 4)."""
