"""Sequential-access compression: adaptive Shannon coding, one-pass sorting, bounded-memory coding, BWT."""

from .errors import CorruptStreamError, ParameterError, TruncatedStreamError

__version__ = "0.1.0"
