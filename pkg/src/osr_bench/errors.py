"""Exception taxonomy.

Split along the CLI exit-code boundary: ConfigError covers bad user
parameters (exit 2), PackError and its subclasses cover bad or
inconsistent data (exit 3). Anything else is an internal error (exit 4).
"""

from __future__ import annotations


class OsrBenchError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(OsrBenchError):
    """Invalid user-supplied parameter (fraction out of range, bad flag, ...)."""


class PackError(OsrBenchError):
    """Data-level problem with a feature pack or a derived split."""


class PackFormatError(PackError):
    """On-disk layout problem: bad manifest, unreadable array files."""


class MissingFileError(PackFormatError):
    """A file required by the manifest is absent."""


class UnsupportedVersionError(PackFormatError):
    """Manifest declares a format version this reader does not support."""


class SizeMismatchError(PackFormatError):
    """Array sizes disagree with the manifest or with each other."""


class NonFiniteDataError(PackError):
    """NaN or Inf found where finite values are required."""


class InvariantError(PackError):
    """An in-memory pack invariant is violated (label range, shape, ...)."""


class EmptySplitError(PackError):
    """A sample split came out empty where a non-empty one is required."""
