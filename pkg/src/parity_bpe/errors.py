"""Exception hierarchy shared across the toolkit.

The CLI maps these to exit codes: ConfigError -> 1, DataError -> 2,
InternalError -> 3.
"""


class ParityBpeError(Exception):
    """Base class for all toolkit errors."""


class ConfigError(ParityBpeError):
    """Invalid configuration or flag combination."""


class DataError(ParityBpeError):
    """Problem with input data (corpora, model files, gold files)."""


class CorpusError(DataError):
    """Malformed or inconsistent corpus input."""


class ModelFormatError(DataError):
    """Malformed, unversioned, or non-producible tokenizer model file."""


class InternalError(ParityBpeError):
    """An internal invariant was violated; indicates a bug."""
