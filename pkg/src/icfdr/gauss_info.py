"""Exact mutual information and differential entropy for jointly Gaussian
signals defined by linear observation maps, evaluated via log-determinants
of covariance blocks.

An observation is a linear combination of the three inputs (X1, X2, Xr)
plus a linear combination of named unit-variance noise sources.  Two
observations that reference the same source name share that noise, which
is how correlated genie observations are expressed.

All functions are pure and operate on immutable inputs; concurrent
evaluation is safe.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

LN2 = math.log(2.0)

#: ridge added to a singular conditioning block (boundary covariances with
#: |rho| = 1 occur at optimizer extremes)
RIDGE = 1e-12

_LOG_2PIE = math.log(2.0 * math.pi * math.e)


class DegenerateChannelError(Exception):
    """The fully conditioned covariance of the requested outputs is
    singular, so the information quantity diverges."""


@dataclass(frozen=True)
class Observation:
    """One observed signal: ``coeffs`` over the inputs (X1, X2, Xr) and
    ``noise`` as (source name, coefficient) pairs over independent
    unit-variance noise sources."""

    coeffs: tuple[float, float, float]
    noise: tuple[tuple[str, float], ...]

    def noise_variance(self) -> float:
        return sum(c * c for _, c in self.noise)

    def noise_covariance(self, other: "Observation") -> float:
        mine = dict(self.noise)
        return sum(c * mine.get(name, 0.0) for name, c in other.noise)


@dataclass(frozen=True, eq=False)
class LinearGaussianSystem:
    """Input covariance over (X1, X2, Xr) plus a list of observations."""

    input_cov: np.ndarray
    observations: tuple[Observation, ...]
    validate: bool = True

    def __post_init__(self):
        cov = np.asarray(self.input_cov, dtype=float)
        if cov.shape != (3, 3):
            raise ValueError(f"input covariance must be 3x3, got {cov.shape}")
        cov = 0.5 * (cov + cov.T)
        cov.setflags(write=False)
        object.__setattr__(self, "input_cov", cov)
        object.__setattr__(self, "observations", tuple(self.observations))
        if self.validate:
            for k, obs in enumerate(self.observations):
                if len(obs.coeffs) != 3:
                    raise ValueError(f"observation {k} needs 3 input coefficients")
            full = _covariance(self, _all_signals(self))
            scale = max(1.0, float(np.max(np.abs(full))))
            if np.linalg.eigvalsh(full)[0] < -1e-10 * scale:
                raise ValueError("joint covariance of inputs and observations is not PSD")

    @property
    def n_observations(self) -> int:
        return len(self.observations)


@dataclass(frozen=True)
class SignalSelector:
    """Names the inputs (by index 0..2) and observations (by index) that an
    information quantity refers to."""

    inputs: tuple[int, ...] = ()
    observations: tuple[int, ...] = ()

    def signals(self) -> list[tuple[str, int]]:
        return [("x", i) for i in self.inputs] + [("y", k) for k in self.observations]

    def is_empty(self) -> bool:
        return not self.inputs and not self.observations


def _all_signals(sys: LinearGaussianSystem) -> list[tuple[str, int]]:
    return [("x", i) for i in range(3)] + [("y", k) for k in range(sys.n_observations)]


def _check_selector(sys: LinearGaussianSystem, sel: SignalSelector) -> None:
    for i in sel.inputs:
        if not 0 <= i < 3:
            raise IndexError(f"input index {i} out of range")
    for k in sel.observations:
        if not 0 <= k < sys.n_observations:
            raise IndexError(f"observation index {k} out of range")


def _pair_cov(sys: LinearGaussianSystem, a: tuple[str, int], b: tuple[str, int]) -> float:
    cov = sys.input_cov
    ka, ia = a
    kb, ib = b
    if ka == "x" and kb == "x":
        return float(cov[ia, ib])
    if ka == "x" and kb == "y":
        return float(cov[ia] @ np.asarray(sys.observations[ib].coeffs))
    if ka == "y" and kb == "x":
        return _pair_cov(sys, b, a)
    oa, ob = sys.observations[ia], sys.observations[ib]
    ca, cb = np.asarray(oa.coeffs), np.asarray(ob.coeffs)
    return float(ca @ cov @ cb) + oa.noise_covariance(ob)


def _covariance(sys: LinearGaussianSystem, signals: list[tuple[str, int]]) -> np.ndarray:
    n = len(signals)
    out = np.empty((n, n))
    for i in range(n):
        for j in range(i, n):
            out[i, j] = out[j, i] = _pair_cov(sys, signals[i], signals[j])
    return out


def joint_covariance(sys: LinearGaussianSystem, sel: SignalSelector) -> np.ndarray:
    """Covariance of the selected signals, ordered inputs first then
    observations, each in the order listed by the selector."""
    _check_selector(sys, sel)
    return _covariance(sys, sel.signals())


def _conditional_cov(sigma: np.ndarray, n_keep: int, meta: dict | None) -> np.ndarray:
    """Schur complement of the trailing conditioning block.  A singular
    conditioning block gets a ridge (scaled by the block magnitude so it
    survives floating-point rounding), recorded in ``meta``."""
    if n_keep == sigma.shape[0]:
        return sigma
    top = sigma[:n_keep, :n_keep]
    off = sigma[:n_keep, n_keep:]
    block = sigma[n_keep:, n_keep:]
    scale = max(1.0, float(np.max(np.abs(np.diag(block)))))
    if np.linalg.eigvalsh(block)[0] < RIDGE * scale:
        block = block + (RIDGE * scale) * np.eye(block.shape[0])
        if meta is not None:
            meta["ridge_applied"] = True
    try:
        sol = np.linalg.solve(block, off.T)
    except np.linalg.LinAlgError:
        sol = np.linalg.lstsq(block, off.T, rcond=None)[0]
        if meta is not None:
            meta["ridge_applied"] = True
    return top - off @ sol


def _logdet(sigma: np.ndarray) -> float:
    """log-determinant (natural base); -inf for a singular matrix."""
    if sigma.shape[0] == 0:
        return 0.0
    sign, val = np.linalg.slogdet(sigma)
    if sign <= 0.0:
        return -math.inf
    return float(val)


def differential_entropy(sys: LinearGaussianSystem, sel: SignalSelector) -> float:
    """0.5*log2((2*pi*e)**k * det(cov)) for the k selected signals."""
    sigma = joint_covariance(sys, sel)
    ld = _logdet(sigma)
    if not math.isfinite(ld):
        raise DegenerateChannelError(f"singular covariance for selector {sel}")
    k = sigma.shape[0]
    return 0.5 * (k * _LOG_2PIE + ld) / LN2


def mutual_information(
    sys: LinearGaussianSystem,
    inputs: SignalSelector,
    outputs: SignalSelector,
    given: SignalSelector | None = None,
    meta: dict | None = None,
) -> float:
    """I(inputs; outputs | given) in bits per channel use.

    Computed as 0.5*log2 det(cov(outputs|given)) minus the same term with
    the inputs added to the conditioning.  The result is clamped to >= 0.
    Raises DegenerateChannelError when the fully conditioned covariance of
    the outputs is singular (the quantity diverges).
    """
    given = given or SignalSelector()
    for sel in (inputs, outputs, given):
        _check_selector(sys, sel)
    out_sig = outputs.signals()
    given_sig = given.signals()
    in_sig = inputs.signals()
    if set(out_sig) & (set(given_sig) | set(in_sig)) or set(in_sig) & set(given_sig):
        raise ValueError("inputs, outputs and given selectors must be disjoint")

    n_out = len(out_sig)
    sigma1 = _covariance(sys, out_sig + given_sig)
    ld1 = _logdet(_conditional_cov(sigma1, n_out, meta))
    sigma2 = _covariance(sys, out_sig + given_sig + in_sig)
    ld2 = _logdet(_conditional_cov(sigma2, n_out, meta))
    if not math.isfinite(ld2):
        raise DegenerateChannelError(
            f"singular conditional covariance for outputs {outputs}"
        )
    if not math.isfinite(ld1):
        # outputs degenerate even before conditioning on the inputs
        raise DegenerateChannelError(f"singular covariance for outputs {outputs}")
    return max(0.0, 0.5 * (ld1 - ld2) / LN2)
