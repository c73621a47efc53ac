"""Bounds and achievable rates for the two-user Gaussian interference
channel with a full-duplex relay."""

__version__ = "0.1.0"

from .model import (
    ChannelGains,
    CovarianceParams,
    NotApplicableError,
    SymmetricChannel,
    SystemConfig,
    db_to_linear,
    gaussian_capacity,
    is_valid_covariance,
    linear_to_db,
)

__all__ = [
    "ChannelGains",
    "CovarianceParams",
    "NotApplicableError",
    "SymmetricChannel",
    "SystemConfig",
    "db_to_linear",
    "gaussian_capacity",
    "is_valid_covariance",
    "linear_to_db",
    "__version__",
]
