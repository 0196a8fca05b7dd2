"""Exception types shared across the package."""


class ShapeError(ValueError):
    """Operand dimensions do not fit together."""


class SizeError(ValueError):
    """A requested tensor product would exceed the supported dimension."""


class DegenerateStateError(ValueError):
    """A state with zero norm cannot be renormalized or measured."""


class DistributionError(ValueError):
    """A probability map is malformed (negative entries, bad total)."""


class ConfigError(ValueError):
    """Invalid experiment configuration.

    ``field`` names the offending configuration key so front ends can report it.
    """

    def __init__(self, field: str, message: str):
        super().__init__(f"invalid config field '{field}': {message}")
        self.field = field


class DarkBinError(ValueError):
    """Both slit amplitudes vanish at the requested screen bin."""


class SpanError(ValueError):
    """An event lies outside the histogram span."""


class DegenerateTestError(ValueError):
    """Too few pooled bins remain for a goodness-of-fit test."""
