"""Exception types shared across the package."""


class ConfigError(ValueError):
    """Invalid configuration or argument combination."""


class DimensionError(ValueError):
    """Array shapes do not agree with the network configuration."""


class DivergenceError(RuntimeError):
    """Gradient descent produced a non-finite value or kept increasing the risk."""

    def __init__(self, message, step=None, risks=None):
        super().__init__(message)
        self.step = step
        self.risks = risks
