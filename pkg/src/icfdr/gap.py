"""Symmetric-rate gap analysis: the halved bound envelope as the upper
bound, the best closed-form symmetric rate as the lower bound, the
numeric gap map over normalized interference/source-relay strengths, and
the analytic finite-gap certificates for the strong source-relay and weak
relay-destination regimes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .achievable import (
    SamplerConfig,
    best_symmetric_lower_detail,
    cor5_terms,
    etw_ic_rate_detail,
)
from .bounds import BoundSearchConfig, bound_envelope
from .model import NotApplicableError, SymmetricChannel
from .model import gaussian_capacity as C

_TIE = 1e-9
_HALF_LOG2_3 = 0.5 * math.log2(3.0)
_HALF_LOG2_5 = 0.5 * math.log2(5.0)


@dataclass(frozen=True)
class GapGridSpec:
    """Grid over (a, b) with a = log(hc^2 P)/log(hd^2 P) and
    b = log(hsr^2 P)/log(hd^2 P); requires hd^2 P > 1 so the normalizing
    log is positive."""

    a_min: float
    a_max: float
    a_steps: int
    b_min: float
    b_max: float
    b_steps: int
    hd: float
    hr: float
    p: float

    def __post_init__(self):
        for lo, hi, steps, name in (
            (self.a_min, self.a_max, self.a_steps, "a"),
            (self.b_min, self.b_max, self.b_steps, "b"),
        ):
            if steps < 1 or (steps == 1 and lo != hi):
                raise ValueError(f"{name}_steps must be >= 2 for a proper range")
            if lo > hi:
                raise ValueError(f"{name}_min must not exceed {name}_max")
        if not (self.p > 0.0 and math.isfinite(self.p)):
            raise ValueError(f"power must be positive and finite, got {self.p}")
        if self.hd ** 2 * self.p <= 1.0:
            raise ValueError("need hd**2 * P > 1 so the strength exponents are defined")

    def a_values(self) -> np.ndarray:
        return np.linspace(self.a_min, self.a_max, self.a_steps)

    def b_values(self) -> np.ndarray:
        return np.linspace(self.b_min, self.b_max, self.b_steps)

    def channel_at(self, a: float, b: float) -> SymmetricChannel:
        base = self.hd ** 2 * self.p
        hc = base ** (a / 2.0) / math.sqrt(self.p)
        hsr = base ** (b / 2.0) / math.sqrt(self.p)
        return SymmetricChannel(hd=self.hd, hc=hc, hr=self.hr, hsr=hsr)


@dataclass(frozen=True)
class GapCell:
    a: float
    b: float
    upper: float
    lower: float
    delta: float
    active_bound: str
    active_lower: str
    cor5_applicable: bool


@dataclass(frozen=True)
class GapResult:
    upper: float
    lower: float
    delta: float
    active_bound: str
    active_lower: str
    cor5_applicable: bool


def symmetric_upper_detail(sym: SymmetricChannel, P: float,
                           config: BoundSearchConfig | None = None,
                           enabled: tuple[str, ...] = ("cs", "m", "s1", "s2")
                           ) -> tuple[float, str]:
    """Half the sum-rate bound envelope on the symmetric channel, with the
    active bound label."""
    point = bound_envelope(sym.to_gains(), P, config, enabled)
    return 0.5 * point.envelope, point.active


def symmetric_upper(sym: SymmetricChannel, P: float,
                    config: BoundSearchConfig | None = None) -> float:
    return symmetric_upper_detail(sym, P, config)[0]


def gap_at(sym: SymmetricChannel, P: float,
           config: BoundSearchConfig | None = None,
           include_region: bool = False,
           sampler_config: SamplerConfig | None = None) -> GapResult:
    """Numeric gap at one channel: halved envelope minus the best
    symmetric lower bound."""
    upper, active_bound = symmetric_upper_detail(sym, P, config)
    lower = best_symmetric_lower_detail(sym, P, include_region, sampler_config)
    return GapResult(
        upper=upper,
        lower=lower.value,
        delta=upper - lower.value,
        active_bound=active_bound,
        active_lower=lower.source,
        cor5_applicable=lower.cor5_rate is not None,
    )


def gap_map(spec: GapGridSpec,
            config: BoundSearchConfig | None = None,
            include_region: bool = False,
            sampler_config: SamplerConfig | None = None) -> list[GapCell]:
    """Evaluate the gap on the full (a, b) grid, row-major in a then b."""
    cells = []
    for a in spec.a_values():
        for b in spec.b_values():
            sym = spec.channel_at(float(a), float(b))
            res = gap_at(sym, spec.p, config, include_region, sampler_config)
            cells.append(GapCell(a=float(a), b=float(b), upper=res.upper,
                                 lower=res.lower, delta=res.delta,
                                 active_bound=res.active_bound,
                                 active_lower=res.active_lower,
                                 cor5_applicable=res.cor5_applicable))
    return cells


def analytic_gap_strong_sr(sym: SymmetricChannel, P: float
                           ) -> tuple[bool, float, str]:
    """Finite-gap certificate for strong source-relay links: applicable
    when the symmetric-scheme rate is limited by the backward-decoding
    terms rather than relay decoding.  At numeric ties between the three
    terms all tied caps are computed and the largest (still valid) one is
    returned, with the tied labels concatenated."""
    try:
        r_a, r_b, r_c = cor5_terms(sym, P)
    except NotApplicableError:
        return False, math.nan, ""
    hsr2p = sym.hsr ** 2 * P
    relay_exponent = 0.5 * math.log2(hsr2p) if hsr2p > 0.0 else -math.inf
    low = min(r_a, r_b, r_c)
    if relay_exponent < low - _HALF_LOG2_3:
        return False, math.nan, ""
    ratio = sym.hsr ** 2 / sym.hc ** 2
    caps = {
        "A": 0.75 + _HALF_LOG2_3 + 0.5 * C(ratio),
        "B": 1.0 + _HALF_LOG2_3,
        "C": 1.0 + _HALF_LOG2_3 + _HALF_LOG2_5 + C(ratio),
    }
    vals = {"A": r_a, "B": r_b, "C": r_c}
    tied = [k for k in ("A", "B", "C") if vals[k] <= low + _TIE]
    cap = max(caps[k] for k in tied)
    return True, cap, "".join(tied)


def analytic_gap_weak_rd(sym: SymmetricChannel, P: float
                         ) -> tuple[bool, float, str]:
    """Finite-gap certificate for weak relay-destination links
    (hr**2 <= min(hd**2, hc**2)): the relay-ignoring scheme is within a
    branch-dependent constant of the bounds."""
    if sym.hr ** 2 > min(sym.hd ** 2, sym.hc ** 2):
        return False, math.nan, ""
    _, branches = etw_ic_rate_detail(sym.hd, sym.hc, P)
    ratio = math.inf if sym.hc == 0.0 else sym.hsr ** 2 / sym.hc ** 2
    cap_ratio = math.inf if math.isinf(ratio) else C(ratio)
    caps = {
        "A": 1.5 + cap_ratio,
        "B": 7.0 / 8.0 + 0.5 * cap_ratio,
        "C": 1.0,
        "D": 5.0 / 8.0 + 0.5 * cap_ratio,
    }
    cap = max(caps[k] for k in branches)
    return True, cap, "".join(branches)
