"""Exception types shared across the package."""

import numpy as np


class ConfigurationError(ValueError):
    """A channel model, OFDM grid or scenario description is inconsistent."""


class NumericalError(np.linalg.LinAlgError):
    """A Hermitian system could not be factorized even after regularization."""


class EstimationFailed(RuntimeError):
    """Correlation estimation found no path above the detection threshold."""


class SelectionError(RuntimeError):
    """Every candidate in a parameter set failed to produce an index."""
