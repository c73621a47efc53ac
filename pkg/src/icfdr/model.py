"""Domain types for the two-user Gaussian interference channel with a
full-duplex relay (IC-FDR).

Conventions used throughout the package:

* all rates are in bits per channel use, with ``C(x) = 0.5*log2(1+x)``;
* receiver and relay noise variances are fixed to 1, so SNR-like
  quantities are plain products of squared gains and powers;
* every type here is an immutable value object and safe to share
  between concurrent workers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields

import numpy as np

#: absolute tolerance on the smallest eigenvalue when testing positive
#: semidefiniteness; boundary covariances (|rho| = 1) must validate as true.
PSD_TOL = 1e-12


class NotApplicableError(Exception):
    """A bound or closed-form rate is undefined for the given channel
    (typically a division by a zero gain)."""


def gaussian_capacity(x: float) -> float:
    """C(x) = 0.5*log2(1+x) in bits per channel use."""
    if x < 0.0:
        raise ValueError(f"capacity argument must be nonnegative, got {x}")
    return 0.5 * math.log2(1.0 + x)


def db_to_linear(p_db: float) -> float:
    """Convert a decibel power value to linear scale."""
    if not math.isfinite(p_db):
        raise ValueError(f"power in dB must be finite, got {p_db}")
    return 10.0 ** (p_db / 10.0)


def linear_to_db(p: float) -> float:
    """Convert a linear power value (> 0) to decibels."""
    if not (p > 0.0 and math.isfinite(p)):
        raise ValueError(f"linear power must be positive and finite, got {p}")
    return 10.0 * math.log10(p)


def _check_nonneg(name: str, value: float) -> None:
    if not (math.isfinite(value) and value >= 0.0):
        raise ValueError(f"{name} must be finite and >= 0, got {value}")


@dataclass(frozen=True)
class ChannelGains:
    """Amplitude gains of the IC-FDR.

    ``hij`` is the gain from source i to receiver j, ``hir`` from source i
    to the relay, and ``hri`` from the relay to receiver i.  All gains are
    nonnegative reals.
    """

    h11: float
    h12: float
    h21: float
    h22: float
    h1r: float
    h2r: float
    hr1: float
    hr2: float

    def __post_init__(self):
        for f in fields(self):
            _check_nonneg(f.name, getattr(self, f.name))

    def to_dict(self) -> dict:
        return {f.name: float(getattr(self, f.name)) for f in fields(self)}

    @classmethod
    def from_dict(cls, data: dict) -> "ChannelGains":
        names = {f.name for f in fields(cls)}
        unknown = set(data) - names
        if unknown:
            raise ValueError(f"unknown gain fields: {sorted(unknown)}")
        missing = names - set(data)
        if missing:
            raise ValueError(f"missing gain fields: {sorted(missing)}")
        return cls(**{k: float(v) for k, v in data.items()})

    def swapped(self) -> "ChannelGains":
        """Relabel users 1 and 2 (the model is symmetric under this swap)."""
        return ChannelGains(
            h11=self.h22, h12=self.h21, h21=self.h12, h22=self.h11,
            h1r=self.h2r, h2r=self.h1r, hr1=self.hr2, hr2=self.hr1,
        )


@dataclass(frozen=True)
class SystemConfig:
    """Common per-node power constraint, linear scale (noise variance is 1)."""

    p: float

    def __post_init__(self):
        if not (math.isfinite(self.p) and self.p > 0.0):
            raise ValueError(f"power must be positive and finite, got {self.p}")

    @classmethod
    def from_db(cls, p_db: float) -> "SystemConfig":
        return cls(db_to_linear(p_db))


@dataclass(frozen=True)
class CovarianceParams:
    """Parameters (rho1, rho2, P1, P2, Pr) of the joint source/relay input
    covariance.  rho1 and rho2 are the source-relay correlations; the two
    sources themselves are uncorrelated."""

    rho1: float
    rho2: float
    p1: float
    p2: float
    pr: float

    def __post_init__(self):
        for name in ("rho1", "rho2"):
            v = getattr(self, name)
            if not (math.isfinite(v) and -1.0 <= v <= 1.0):
                raise ValueError(f"{name} must be in [-1, 1], got {v}")
        for name in ("p1", "p2", "pr"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0.0):
                raise ValueError(f"{name} must be positive and finite, got {v}")

    def matrix(self) -> np.ndarray:
        """The 3x3 input covariance over (X1, X2, Xr)."""
        c1 = self.rho1 * math.sqrt(self.p1 * self.pr)
        c2 = self.rho2 * math.sqrt(self.p2 * self.pr)
        return np.array(
            [
                [self.p1, 0.0, c1],
                [0.0, self.p2, c2],
                [c1, c2, self.pr],
            ]
        )


def is_valid_covariance(cov: CovarianceParams) -> bool:
    """True iff the assembled 3x3 covariance is positive semidefinite
    (smallest eigenvalue >= -PSD_TOL).  For positive powers this is
    equivalent to rho1**2 + rho2**2 <= 1."""
    eigvals = np.linalg.eigvalsh(cov.matrix())
    return bool(eigvals[0] >= -PSD_TOL)


@dataclass(frozen=True)
class SymmetricChannel:
    """Symmetric IC-FDR: equal direct gains hd, cross gains hc,
    relay-to-destination gains hr and source-to-relay gains hsr."""

    hd: float
    hc: float
    hr: float
    hsr: float

    def __post_init__(self):
        for f in fields(self):
            _check_nonneg(f.name, getattr(self, f.name))

    def to_gains(self) -> ChannelGains:
        return ChannelGains(
            h11=self.hd, h22=self.hd, h12=self.hc, h21=self.hc,
            h1r=self.hsr, h2r=self.hsr, hr1=self.hr, hr2=self.hr,
        )

    def to_dict(self) -> dict:
        return {f.name: float(getattr(self, f.name)) for f in fields(self)}

    @classmethod
    def from_dict(cls, data: dict) -> "SymmetricChannel":
        names = {f.name for f in fields(cls)}
        unknown = set(data) - names
        if unknown:
            raise ValueError(f"unknown symmetric-channel fields: {sorted(unknown)}")
        missing = names - set(data)
        if missing:
            raise ValueError(f"missing symmetric-channel fields: {sorted(missing)}")
        return cls(**{k: float(v) for k, v in data.items()})
