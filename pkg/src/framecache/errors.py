"""Exception hierarchy shared by every engine module."""


class FrameCacheError(Exception):
    """Base class for all errors raised by this package."""


class DimensionMismatch(FrameCacheError):
    def __init__(self, expected, actual, context=""):
        self.expected = expected
        self.actual = actual
        msg = f"expected dimension {expected}, got {actual}"
        if context:
            msg = f"{context}: {msg}"
        super().__init__(msg)


class NonFiniteComponent(FrameCacheError):
    def __init__(self, index, context=""):
        self.index = index
        msg = f"non-finite component at index {index}"
        if context:
            msg = f"{context}: {msg}"
        super().__init__(msg)


class ZeroNormVector(FrameCacheError):
    """A vector's norm is below the 1e-12 floor; cosine is undefined there."""


class NegativeScore(FrameCacheError):
    pass


class EmptyRaster(FrameCacheError):
    pass


class ConfigError(FrameCacheError):
    """A configuration value or domain-type invariant is violated."""


class CacheTooSmall(FrameCacheError):
    pass


class EmptyGains(FrameCacheError):
    pass


class EmptyCache(FrameCacheError):
    pass


class EmptySequence(FrameCacheError):
    pass


class EmptyStream(FrameCacheError):
    pass


class MalformedRecord(FrameCacheError):
    def __init__(self, index, reason):
        self.index = index
        self.reason = reason
        super().__init__(f"record {index}: {reason}")


class ParseError(FrameCacheError):
    def __init__(self, line, reason):
        self.line = line
        self.reason = reason
        super().__init__(f"line {line}: {reason}")


class SchemaViolation(FrameCacheError):
    def __init__(self, line, field, reason=""):
        self.line = line
        self.field = field
        msg = f"line {line}: invalid field {field!r}"
        if reason:
            msg = f"{msg} ({reason})"
        super().__init__(msg)


class SinkError(FrameCacheError):
    pass
