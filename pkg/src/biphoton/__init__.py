"""Photon-counting statistics of highly entangled biphoton states.

Modules
-------
model
    Joint-amplitude models, hyperbolic kernels, photon-number calibration.
opcalc
    The covariance kernel ``S(chi, kappa)``, validity bounds, Schmidt number.
pgf
    Probability generating functions for small and large intervals.
intermediate
    First-order corrections for intervals of intermediate width.
coding
    Franson-interferometer (phase-time coding) statistics.
oracle
    Brute-force discretized Fredholm-determinant reference.
cli
    Command line harness.
"""

from .errors import (BiphotonError, ConfigError, ContractError, DomainError,
                     NumericError, ValidityWarning)
from .model import (BiphotonState, EntanglementParams, PhiModel, calibrate_scale,
                    make_gaussian, make_sinc_gaussian, marginal_intensity,
                    marginal_spectrum, mean_photon_number)

__version__ = "0.1.0"

__all__ = [
    "BiphotonError", "ConfigError", "ContractError", "DomainError", "NumericError",
    "ValidityWarning", "BiphotonState", "EntanglementParams", "PhiModel",
    "calibrate_scale", "make_gaussian", "make_sinc_gaussian", "marginal_intensity",
    "marginal_spectrum", "mean_photon_number",
]
