"""Exception types shared across the package."""


class CircuitDesignError(Exception):
    """Base class for all errors raised by this package."""


class DimensionError(CircuitDesignError, ValueError):
    """Matrix dimensions do not fit the requested operation."""


class RankError(CircuitDesignError, ValueError):
    """A matrix that must be full-rank is not."""


class ModelError(CircuitDesignError, ValueError):
    """Model and design cannot be combined into a valid model matrix."""


class SizeLimitError(CircuitDesignError, ValueError):
    """An enumeration would exceed a configured size cap."""


class ParseError(CircuitDesignError, ValueError):
    """Malformed design CSV or model JSON input."""
