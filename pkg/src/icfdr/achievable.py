"""Achievable rates for the IC-FDR.

The coding scheme superposes common and private layers at the sources,
relays decoded layers with one block delay, and resolves blocks backwards
at the destinations.  Its single-letter consequence is a polytope of
rate splits (rp1, rc1, rp2, rc2) per power allocation: relay decoding
caps for every subset of layers, two MAC-style common-rate regions (one
per receiver), and two private caps.  Frontiers come from weighted-sum
linear programs over that polytope, searched over the allocation cube.

Also here: the closed-form symmetric rate of the scheme and the
interference-channel fallback rate (relay ignored).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields
from itertools import product

import numpy as np
from scipy.stats import qmc

from . import optim
from .lp import simplex_maximize
from .model import ChannelGains, NotApplicableError, SymmetricChannel
from .model import gaussian_capacity as C

HALF_LOG2_3 = 0.5 * math.log2(3.0)
_TIE = 1e-9


@dataclass(frozen=True)
class PowerAllocation:
    """Power split fractions, each in [0, 1]: alpha/beta divide source
    power between new and relayed layers, gamma/delta between common and
    private, eta splits relay power between the users and mu/nu between
    their layers."""

    alpha: float
    beta: float
    gamma: float
    delta: float
    eta: float
    mu: float
    nu: float

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if not (math.isfinite(v) and 0.0 <= v <= 1.0):
                raise ValueError(f"{f.name} must be in [0, 1], got {v}")

    def as_tuple(self) -> tuple[float, ...]:
        return (self.alpha, self.beta, self.gamma, self.delta, self.eta, self.mu, self.nu)


@dataclass(frozen=True)
class EffectiveGains:
    """Combined source-plus-relay amplitudes per (source, receiver, layer);
    h12c is source 1's common layer as seen at receiver 2."""

    h11p: float
    h11c: float
    h21p: float
    h21c: float
    h12p: float
    h12c: float
    h22p: float
    h22c: float


@dataclass(frozen=True)
class RateSplit:
    """Nonnegative private/common rates; user rates are the layer sums."""

    rp1: float
    rc1: float
    rp2: float
    rc2: float

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if v < -1e-9:
                raise ValueError(f"{f.name} must be nonnegative, got {v}")
            if v < 0.0:
                object.__setattr__(self, f.name, 0.0)

    @property
    def r1(self) -> float:
        return self.rp1 + self.rc1

    @property
    def r2(self) -> float:
        return self.rp2 + self.rc2


def effective_gains(gains: ChannelGains, zeta: PowerAllocation) -> EffectiveGains:
    a, b_, g, d, e, m, n = zeta.as_tuple()

    def combined(h_src, h_rel, frac_src, layer, frac_rel, layer_rel):
        return h_src * math.sqrt(frac_src * layer) + h_rel * math.sqrt(frac_rel * layer_rel)

    out = {}
    for j, (h1j, h2j, hrj) in enumerate(
        ((gains.h11, gains.h21, gains.hr1), (gains.h12, gains.h22, gains.hr2)), start=1
    ):
        out[f"h1{j}p"] = combined(h1j, hrj, a, 1.0 - g, e, 1.0 - m)
        out[f"h1{j}c"] = combined(h1j, hrj, a, g, e, m)
        out[f"h2{j}p"] = combined(h2j, hrj, b_, 1.0 - d, 1.0 - e, 1.0 - n)
        out[f"h2{j}c"] = combined(h2j, hrj, b_, d, 1.0 - e, n)
    return EffectiveGains(**out)


def relay_decode_caps(gains: ChannelGains, zeta: PowerAllocation, P: float
                      ) -> list[tuple[tuple[int, int, int, int], float]]:
    """Decode-and-forward caps: one constraint per nonempty subset of the
    four layers (mask bits weight rp1, rc1, rp2, rc2).  The all-zero mask
    is vacuous and omitted."""
    a, b_, g, d = zeta.alpha, zeta.beta, zeta.gamma, zeta.delta
    out = []
    for m in range(1, 16):
        a1, a2, a3, a4 = (m >> 3) & 1, (m >> 2) & 1, (m >> 1) & 1, m & 1
        snr = P * ((1.0 - a) * (a1 * (1.0 - g) + a2 * g) * gains.h1r ** 2
                   + (1.0 - b_) * (a3 * (1.0 - d) + a4 * d) * gains.h2r ** 2)
        out.append(((a1, a2, a3, a4), C(snr)))
    return out


def _polytope_arrays(gains: ChannelGains, zeta: PowerAllocation, P: float):
    """Constraint matrix and right-hand sides over (rp1, rc1, rp2, rc2),
    without the nonnegativity rows (the LP solver enforces x >= 0)."""
    eg = effective_gains(gains, zeta)
    rows = []
    rhs = []
    for mask, cap in relay_decode_caps(gains, zeta, P):
        a1, a2, a3, a4 = mask
        rows.append((float(a1), float(a2), float(a3), float(a4)))
        rhs.append(cap)
    resid1 = gains.h21 ** 2 * (1.0 - zeta.beta) * (1.0 - zeta.delta) * P
    resid2 = gains.h12 ** 2 * (1.0 - zeta.alpha) * (1.0 - zeta.gamma) * P
    den1 = 1.0 + eg.h11p ** 2 * P + eg.h21p ** 2 * P + resid1
    den2 = 1.0 + eg.h12p ** 2 * P + eg.h22p ** 2 * P + resid2
    for coeffs, num in (
        ((0.0, 1.0, 0.0, 0.0), eg.h11c ** 2 * P),
        ((0.0, 0.0, 0.0, 1.0), eg.h21c ** 2 * P),
        ((0.0, 1.0, 0.0, 1.0), (eg.h11c ** 2 + eg.h21c ** 2) * P),
    ):
        rows.append(coeffs)
        rhs.append(C(num / den1))
    for coeffs, num in (
        ((0.0, 1.0, 0.0, 0.0), eg.h12c ** 2 * P),
        ((0.0, 0.0, 0.0, 1.0), eg.h22c ** 2 * P),
        ((0.0, 1.0, 0.0, 1.0), (eg.h12c ** 2 + eg.h22c ** 2) * P),
    ):
        rows.append(coeffs)
        rhs.append(C(num / den2))
    rows.append((1.0, 0.0, 0.0, 0.0))
    rhs.append(C(eg.h11p ** 2 * P / (1.0 + eg.h21p ** 2 * P + resid1)))
    rows.append((0.0, 0.0, 1.0, 0.0))
    rhs.append(C(eg.h22p ** 2 * P / (1.0 + eg.h12p ** 2 * P + resid2)))
    return np.asarray(rows), np.asarray(rhs)


def rate_split_polytope(gains: ChannelGains, zeta: PowerAllocation, P: float
                        ) -> list[tuple[tuple[float, float, float, float], float]]:
    """All 27 linear inequalities coeffs.x <= rhs over (rp1, rc1, rp2, rc2):
    15 relay caps, 3 + 3 common-rate rows, 2 private caps, 4 nonnegativity
    rows."""
    A, b = _polytope_arrays(gains, zeta, P)
    out = [(tuple(row), float(cap)) for row, cap in zip(A, b)]
    for i in range(4):
        coeffs = [0.0] * 4
        coeffs[i] = -1.0
        out.append((tuple(coeffs), 0.0))
    return out


def max_weighted_rate(gains: ChannelGains, zeta: PowerAllocation, P: float,
                      w1: float, w2: float) -> tuple[RateSplit, float]:
    """Maximize w1*(rp1+rc1) + w2*(rp2+rc2) over the rate-split polytope.
    The origin is always feasible, so the LP cannot be infeasible."""
    if w1 < 0.0 or w2 < 0.0 or (w1 == 0.0 and w2 == 0.0):
        raise ValueError("weights must be nonnegative and not both zero")
    A, b = _polytope_arrays(gains, zeta, P)
    x, value = simplex_maximize((w1, w1, w2, w2), A, b)
    return RateSplit(*x), value


@dataclass(frozen=True)
class SamplerConfig:
    """Deterministic allocation sampler: a small lattice plus seeded
    low-discrepancy points, a fixed fan of weight directions, and a
    per-direction local-refinement evaluation budget."""

    lattice_points: int = 3
    n_quasirandom: int = 4096
    n_weights: int = 65
    refine_evals: int = 200
    seed: int = 0
    keep_raw: bool = False


@dataclass(frozen=True)
class FrontierPoint:
    r1: float
    r2: float
    zeta: tuple[float, ...]
    weight: tuple[float, float]


@dataclass(frozen=True)
class RegionFrontier:
    """Upper-right convex-hull boundary of the sampled achievable points,
    sorted by R1 ascending (R2 nonincreasing); each vertex keeps the
    allocation and weight that produced it."""

    points: tuple[FrontierPoint, ...]
    raw_points: tuple[tuple[float, float], ...] | None = None

    def max_sum_rate(self) -> float:
        return max((p.r1 + p.r2 for p in self.points), default=0.0)

    def symmetric_rate(self) -> float:
        """Largest R with (R, R) inside the hull region (time sharing
        included)."""
        best = max((min(p.r1, p.r2) for p in self.points), default=0.0)
        pts = self.points
        for a, b in zip(pts, pts[1:]):
            da = a.r2 - a.r1
            db = b.r2 - b.r1
            if da == db:
                continue
            t = da / (da - db)
            if 0.0 <= t <= 1.0:
                best = max(best, a.r1 + t * (b.r1 - a.r1))
        return best


def _round_key(pt: tuple[float, float]) -> tuple[float, float]:
    return (round(pt[0], 12), round(pt[1], 12))


def _shadow_vertices(A, b, max_solves: int = 64):
    """Vertices of the (R1, R2) shadow of one rate-split polytope, found
    by recursive bisection on supporting directions.  Returns a list of
    ((r1, r2), (w1, w2)) pairs."""

    def solve(w):
        x, _ = simplex_maximize((w[0], w[0], w[1], w[1]), A, b)
        return (x[0] + x[1], x[2] + x[3])

    eps = 1e-7
    top = solve((eps, 1.0))
    right = solve((1.0, eps))
    found = {_round_key(top): (top, (eps, 1.0))}
    found.setdefault(_round_key(right), (right, (1.0, eps)))
    stack = [(top, right)]
    solves = 2
    while stack and solves < max_solves:
        a, c = stack.pop()
        w = (a[1] - c[1], c[0] - a[0])
        if w[0] <= 0.0 or w[1] <= 0.0:
            continue
        solves += 1
        p = solve(w)
        base = max(w[0] * a[0] + w[1] * a[1], w[0] * c[0] + w[1] * c[1])
        val = w[0] * p[0] + w[1] * p[1]
        if val > base + 1e-9 * (1.0 + abs(val)):
            key = _round_key(p)
            if key not in found:
                found[key] = (p, w)
                stack.append((a, p))
                stack.append((p, c))
    return list(found.values())


def _upper_right_hull(points: np.ndarray) -> list[int]:
    """Indices of the upper-right convex chain (R1 ascending)."""
    n = points.shape[0]
    order = sorted(range(n), key=lambda i: (-points[i, 0], -points[i, 1]))
    pareto: list[int] = []
    best_r2 = -math.inf
    for i in order:
        if points[i, 1] > best_r2 + 1e-15:
            pareto.append(i)
            best_r2 = points[i, 1]
    pareto.reverse()  # r1 ascending, r2 strictly descending
    chain: list[int] = []
    for i in pareto:
        while len(chain) >= 2:
            a = points[chain[-2]]
            bq = points[chain[-1]]
            cp = points[i]
            cross = (bq[0] - a[0]) * (cp[1] - a[1]) - (bq[1] - a[1]) * (cp[0] - a[0])
            if cross >= -1e-12:
                chain.pop()
            else:
                break
        chain.append(i)
    return chain


def _zeta_pool(cfg: SamplerConfig) -> np.ndarray:
    axes = np.linspace(0.0, 1.0, cfg.lattice_points) if cfg.lattice_points > 1 else np.array([0.5])
    lattice = np.array(list(product(axes, repeat=7)))
    if cfg.n_quasirandom > 0:
        halton = qmc.Halton(d=7, scramble=True, seed=cfg.seed).random(cfg.n_quasirandom)
        return np.vstack([lattice, halton])
    return lattice


def region_frontier(gains: ChannelGains, P: float,
                    sampler_config: SamplerConfig | None = None) -> RegionFrontier:
    """Sampled frontier of the union of rate-split polytopes over the
    allocation cube: per-allocation shadow vertices, per-direction local
    refinement of the allocation, then the upper-right convex hull (time
    sharing justifies the hull)."""
    cfg = sampler_config or SamplerConfig()
    zetas = _zeta_pool(cfg)

    raw: list[tuple[float, float]] = []
    prov: list[tuple[tuple[float, ...], tuple[float, float]]] = []
    for z in zetas:
        A, b = _polytope_arrays(gains, PowerAllocation(*z), P)
        for pt, w in _shadow_vertices(A, b):
            raw.append(pt)
            prov.append((tuple(z), (float(w[0]), float(w[1]))))

    if cfg.n_weights > 0 and cfg.refine_evals > 0 and raw:
        V = np.asarray(raw)
        zeta_space = optim.SearchSpace(lower=(0.0,) * 7, upper=(1.0,) * 7)
        pitch = np.full(7, 1.0 / max(cfg.lattice_points - 1, 1))
        thetas = np.linspace(0.0, math.pi / 2.0, cfg.n_weights)
        n_trace = len(raw)
        for theta in thetas:
            w = (math.cos(theta), math.sin(theta))
            dots = V[:n_trace] @ np.asarray(w)
            start = np.asarray(prov[int(np.argmax(dots))][0])

            def lp_value(pts, _w=w):
                vals = np.empty(pts.shape[0])
                for i, z in enumerate(pts):
                    Az, bz = _polytope_arrays(gains, PowerAllocation(*z), P)
                    _, vals[i] = simplex_maximize((_w[0], _w[0], _w[1], _w[1]), Az, bz)
                return vals

            res = optim.refine_from(lp_value, zeta_space, start, pitch,
                                    optim.SearchConfig(seed=cfg.seed),
                                    max_evals=cfg.refine_evals)
            Az, bz = _polytope_arrays(gains, PowerAllocation(*res.point), P)
            x, _ = simplex_maximize((w[0], w[0], w[1], w[1]), Az, bz)
            raw.append((x[0] + x[1], x[2] + x[3]))
            prov.append((tuple(res.point), w))

    pts = np.asarray(raw) if raw else np.zeros((1, 2))
    chain = _upper_right_hull(pts)
    frontier = tuple(
        FrontierPoint(r1=float(pts[i, 0]), r2=float(pts[i, 1]),
                      zeta=prov[i][0] if prov else (0.0,) * 7,
                      weight=prov[i][1] if prov else (1.0, 1.0))
        for i in chain
    )
    return RegionFrontier(
        points=frontier,
        raw_points=tuple((float(p[0]), float(p[1])) for p in raw) if cfg.keep_raw else None,
    )


def cor5_terms(sym: SymmetricChannel, P: float) -> tuple[float, float, float]:
    """The three backward-decoding rate terms of the fixed-allocation
    symmetric scheme.  Raises NotApplicableError outside the validity
    domain (the chosen allocation needs hc**2 * P >= 2)."""
    if sym.hc == 0.0:
        raise NotApplicableError("symmetric scheme rate needs hc > 0")
    hc2p = sym.hc ** 2 * P
    hd2p = sym.hd ** 2 * P
    phi = sym.hd ** 2 / sym.hc ** 2
    if hc2p < 2.0 or hd2p / 2.0 < phi or hc2p / 2.0 < 1.0:
        raise NotApplicableError("symmetric scheme rate outside validity domain")
    hr_part = math.sqrt(sym.hr ** 2 * P / 2.0)
    psi = (math.sqrt(hd2p / 2.0 - phi) + hr_part) ** 2
    omega = (math.sqrt(hc2p / 2.0 - 1.0) + hr_part) ** 2
    r_a = 0.5 * C(2.0 + phi) + 0.5 * C(2.0 + phi + psi + omega)
    r_b = C(2.0 + phi + psi)
    r_c = C(2.0 + phi + omega)
    return r_a, r_b, r_c


def symmetric_rate_cor5(sym: SymmetricChannel, P: float) -> float:
    """Closed-form symmetric rate of the relaying scheme with the fixed
    power allocation; clamped at zero."""
    r_a, r_b, r_c = cor5_terms(sym, P)
    relay_cap = 0.5 * C(sym.hsr ** 2 * P)
    return max(0.0, min(relay_cap, min(r_a, r_b, r_c) - HALF_LOG2_3))


def etw_ic_rate_detail(hd: float, hc: float, P: float) -> tuple[float, tuple[str, ...]]:
    """Symmetric rate achievable by ignoring the relay and running the
    one-bit-gap interference-channel scheme; returns the rate and the
    active branch label(s)."""
    if hd < 0.0 or hc < 0.0 or P <= 0.0:
        raise ValueError("need hd, hc >= 0 and P > 0")
    snr_d = hd ** 2 * P
    if hc == 0.0:
        return max(0.0, C(snr_d)), ("C",)
    snr_c = hc ** 2 * P
    ratio = hd ** 2 / hc ** 2
    if hc ** 2 <= hd ** 2:
        vals = {"A": C(snr_c + ratio) - 0.5,
                "B": 0.5 * (C(snr_d + snr_c) + C(ratio) - 1.0)}
    else:
        vals = {"C": C(snr_d), "D": 0.5 * C(snr_d + snr_c)}
    low = min(vals.values())
    branches = tuple(k for k in ("A", "B", "C", "D") if k in vals and vals[k] <= low + _TIE)
    return max(0.0, low), branches


def etw_ic_rate(hd: float, hc: float, P: float) -> float:
    return etw_ic_rate_detail(hd, hc, P)[0]


@dataclass(frozen=True)
class SymmetricLowerBound:
    value: float
    source: str  # "ic", "cor5" or "region"
    ic_rate: float
    cor5_rate: float | None
    region_rate: float | None


def best_symmetric_lower_detail(sym: SymmetricChannel, P: float,
                                include_region: bool = False,
                                sampler_config: SamplerConfig | None = None
                                ) -> SymmetricLowerBound:
    candidates: list[tuple[str, float]] = [("ic", etw_ic_rate(sym.hd, sym.hc, P))]
    try:
        cor5 = symmetric_rate_cor5(sym, P)
        candidates.append(("cor5", cor5))
    except NotApplicableError:
        cor5 = None
    region = None
    if include_region:
        frontier = region_frontier(sym.to_gains(), P, sampler_config)
        region = frontier.symmetric_rate()
        candidates.append(("region", region))
    best = max(v for _, v in candidates)
    source = next(name for name, v in candidates if v >= best - _TIE)
    return SymmetricLowerBound(value=best, source=source,
                               ic_rate=candidates[0][1], cor5_rate=cor5,
                               region_rate=region)


def best_symmetric_lower(sym: SymmetricChannel, P: float,
                         include_region: bool = False,
                         sampler_config: SamplerConfig | None = None) -> float:
    return best_symmetric_lower_detail(sym, P, include_region, sampler_config).value
