"""Gradient descent on scaled two- and three-layer networks with stability diagnostics."""

from .activations import ActivationSpec, certified_bounds
from .errors import ConfigError, DimensionError, DivergenceError
from .loss import Dataset, Example
from .model import Network, NetworkConfig

__version__ = "0.1.0"

__all__ = ["ActivationSpec", "certified_bounds", "ConfigError", "DimensionError",
           "DivergenceError", "Dataset", "Example", "Network", "NetworkConfig", "__version__"]
