"""Exception types shared across the codec and container layers."""


class DpzipError(Exception):
    """Base class for all dpzip errors."""


class CorruptStreamError(DpzipError):
    """Compressed data cannot be decoded (bad offset, truncation, checksum...)."""


class ContainerError(DpzipError):
    """Stream container is malformed or unsupported (magic, version, headers)."""
