"""Cavity-mediated spin squeezing: effective parameters, exact Dicke dynamics,
Gaussian (Holstein-Primakoff) covariance propagation and mean-field
atom-cavity validation."""

from .errors import (CapacityError, ConvergenceError, DegeneratePolarizationError, FitError,
                     IntegrationError, ParameterError, SqueezeError)
from .params import (CavityGeometry, EffectiveParams, PhysicalParams, alpha_from_od,
                     coupling_from_od, derive_effective, params_from_mapping, parse_quantity,
                     reference_params)
from .squeezing import SqueezingResult, to_db

__version__ = "0.1.0"

__all__ = [
    "CapacityError", "CavityGeometry", "ConvergenceError", "DegeneratePolarizationError",
    "EffectiveParams", "FitError", "IntegrationError", "ParameterError", "PhysicalParams",
    "SqueezeError", "SqueezingResult", "alpha_from_od", "coupling_from_od", "derive_effective",
    "params_from_mapping", "parse_quantity", "reference_params", "to_db",
]
