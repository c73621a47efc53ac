"""Independent oracle implementations used by the test suite.

These deliberately take different computational routes than the package:
mutual information via inclusion-exclusion of joint log-determinants on an
explicitly assembled 6x6 covariance (instead of Schur complements),
feasible-point sampling for the genie minimization, and grid scans with
nested local refinement for the LP and S2 maximizations.
"""

from __future__ import annotations

import math

import numpy as np

from icfdr.model import ChannelGains, CovarianceParams

LN2 = math.log(2.0)


def cap(x):
    return 0.5 * np.log2(1.0 + x)


def random_gains(rng, low=0.05, high=2.5, zero_prob=0.0) -> ChannelGains:
    h = rng.uniform(low, high, 8)
    if zero_prob > 0.0:
        h = np.where(rng.uniform(size=8) < zero_prob, 0.0, h)
    return ChannelGains(*h)


def joint6(gains: ChannelGains, cov: CovarianceParams) -> np.ndarray:
    """Covariance of (X1, X2, Xr, Y1, Y2, Yr) assembled directly from the
    input-output equations."""
    A = cov.matrix()
    H = np.array([
        [gains.h11, gains.h21, gains.hr1],
        [gains.h12, gains.h22, gains.hr2],
        [gains.h1r, gains.h2r, 0.0],
    ])
    S = np.zeros((6, 6))
    S[:3, :3] = A
    S[:3, 3:] = A @ H.T
    S[3:, :3] = H @ A
    S[3:, 3:] = H @ A @ H.T + np.eye(3)
    return S


def _logdet(S, idx):
    if not idx:
        return 0.0
    sign, val = np.linalg.slogdet(S[np.ix_(idx, idx)])
    if sign <= 0:
        raise ValueError(f"singular block {idx}")
    return val


def mi_logdet(S, inputs, outputs, given=()):
    """I(inputs; outputs | given) by inclusion-exclusion of logdets."""
    a, b, c = list(inputs), list(outputs), list(given)
    val = (_logdet(S, sorted(b + c)) - _logdet(S, sorted(c))
           + _logdet(S, sorted(a + c)) - _logdet(S, sorted(a + b + c)))
    return 0.5 * val / LN2


X1, X2, XR, Y1, Y2, YR = range(6)


def cutset_caps_oracle(gains, cov):
    S = joint6(gains, cov)
    r1 = min(mi_logdet(S, [X1, XR], [Y1], [X2]),
             mi_logdet(S, [X1], [Y1, YR], [X2, XR]))
    r2 = min(mi_logdet(S, [X2, XR], [Y2], [X1]),
             mi_logdet(S, [X2], [Y2, YR], [X1, XR]))
    rs = min(mi_logdet(S, [X1, X2, XR], [Y1, Y2]),
             mi_logdet(S, [X1, X2], [Y1, Y2, YR], [XR]))
    return r1, r2, rs


def cutset_sum_grid_oracle(gains: ChannelGains, P: float, step: float = 0.01) -> float:
    """Dense correlation-grid maximization of min(sum cap, r1+r2)."""
    best = -math.inf
    vals = np.arange(-1.0, 1.0 + step / 2, step)
    for r1 in vals:
        for r2 in vals:
            # stay strictly inside the disk: the logdet identity needs a
            # nonsingular input covariance
            if r1 * r1 + r2 * r2 > 1.0 - 1e-9:
                continue
            c1, c2, cs = cutset_caps_oracle(gains, CovarianceParams(r1, r2, P, P, P))
            best = max(best, min(cs, c1 + c2))
    return best


def maric_sample_oracle(gains: ChannelGains, cov: CovarianceParams,
                        n: int = 100_000, seed: int = 0, box: float = 50.0) -> float:
    """Minimum genie mutual information over n random feasible mixing
    points, each verified against the raw feasibility inequality and
    evaluated through stacked joint log-determinants."""
    rng = np.random.default_rng(seed)
    s = rng.uniform(-1.0, 1.0, 3 * n)
    t = rng.uniform(-1.0, 1.0, 3 * n)
    keep = s * s + t * t <= 1.0
    s, t = s[keep][:n], t[keep][:n]
    w = rng.uniform(-box, box, n)
    ok = w != 0.0
    s, t, w = s[ok], t[ok], w[ok]
    d1 = rng.uniform(-box, box, s.size)
    d2 = rng.uniform(-box, box, s.size)
    h21, hr1, hr2 = gains.h21, gains.hr1, gains.hr2
    v = 1.0 / w
    d3 = w * (s - 1.0 / h21) + d2 / h21
    d4 = t * w
    u = (1.0 - v * d2) / h21
    d5 = (hr2 - u * hr1) / v

    # raw feasibility check straight from the constraint display
    lhs = (1.0 / h21 + v * (d3 - d2 / h21)) ** 2 + (v * d4) ** 2
    good = lhs <= 1.0 + 1e-9
    d1, d2, d3, d4, d5 = d1[good], d2[good], d3[good], d4[good], d5[good]

    A = cov.matrix()
    c1 = np.array([gains.h11, gains.h21, gains.hr1])
    m = d1.size
    G = np.stack([d1, d2, d5], axis=1)                      # (m, 3) signal coeffs
    S = np.zeros((m, 5, 5))
    S[:, :3, :3] = A
    y1_in = A @ c1
    S[:, :3, 3] = y1_in
    S[:, 3, :3] = y1_in
    S[:, :3, 4] = G @ A
    S[:, 4, :3] = G @ A
    S[:, 3, 3] = c1 @ A @ c1 + 1.0
    cross = G @ A @ c1 + d3
    S[:, 3, 4] = cross
    S[:, 4, 3] = cross
    S[:, 4, 4] = np.einsum("ij,jk,ik->i", G, A, G) + d3 * d3 + d4 * d4

    sx, ldx = np.linalg.slogdet(S[:, :3, :3])
    sy, ldy = np.linalg.slogdet(S[:, 3:, 3:])
    sxy, ldxy = np.linalg.slogdet(S)
    ok = (sx > 0) & (sy > 0) & (sxy > 0)
    mis = 0.5 * (ldx[ok] + ldy[ok] - ldxy[ok]) / LN2
    return float(np.min(mis))


def weighted_rate_grid_oracle(gains, zeta, P, w1, w2,
                              step: float = 0.01, refine_rounds: int = 40) -> float:
    """Concave grid scan over the two common rates with the private rates
    completed exactly, plus nested local grid refinement."""
    from icfdr.achievable import rate_split_polytope

    rows = rate_split_polytope(gains, zeta, P)[:23]  # skip nonnegativity rows
    m1_rows = [(r[1], r[3], rhs) for r, rhs in rows if r[0] == 1 and r[2] == 0]
    m2_rows = [(r[1], r[3], rhs) for r, rhs in rows if r[0] == 0 and r[2] == 1]
    m12_rows = [(r[1], r[3], rhs) for r, rhs in rows if r[0] == 1 and r[2] == 1]
    c_rows = [(r[1], r[3], rhs) for r, rhs in rows if r[0] == 0 and r[2] == 0]

    def value(rc1, rc2):
        if any(a * rc1 + b * rc2 > rhs + 1e-12 for a, b, rhs in c_rows):
            return -math.inf
        m1 = min(rhs - a * rc1 - b * rc2 for a, b, rhs in m1_rows)
        m2 = min(rhs - a * rc1 - b * rc2 for a, b, rhs in m2_rows)
        m12 = min(rhs - a * rc1 - b * rc2 for a, b, rhs in m12_rows)
        if min(m1, m2, m12) < -1e-12:
            return -math.inf
        m1, m2, m12 = max(m1, 0.0), max(m2, 0.0), max(m12, 0.0)
        if w1 >= w2:
            rp1 = min(m1, m12)
            rp2 = max(0.0, min(m2, m12 - rp1))
        else:
            rp2 = min(m2, m12)
            rp1 = max(0.0, min(m1, m12 - rp2))
        return w1 * (rc1 + rp1) + w2 * (rc2 + rp2)

    rc1_hi = min(rhs for a, b, rhs in c_rows if a == 1 and b == 0)
    rc2_hi = min(rhs for a, b, rhs in c_rows if a == 0 and b == 1)

    def scan(lo1, hi1, lo2, hi2, n1, n2):
        best = (-math.inf, 0.0, 0.0)
        for rc1 in np.linspace(lo1, hi1, n1):
            for rc2 in np.linspace(lo2, hi2, n2):
                v = value(rc1, rc2)
                if v > best[0]:
                    best = (v, rc1, rc2)
        return best

    n1 = max(2, int(rc1_hi / step) + 1)
    n2 = max(2, int(rc2_hi / step) + 1)
    best, rc1, rc2 = scan(0.0, rc1_hi, 0.0, rc2_hi, n1, n2)
    span1, span2 = rc1_hi / max(n1 - 1, 1), rc2_hi / max(n2 - 1, 1)
    for _ in range(refine_rounds):
        lo1, hi1 = max(0.0, rc1 - span1), min(rc1_hi, rc1 + span1)
        lo2, hi2 = max(0.0, rc2 - span2), min(rc2_hi, rc2 + span2)
        v, rc1, rc2 = scan(lo1, hi1, lo2, hi2, 9, 9)
        best = max(best, v)
        span1 *= 0.3
        span2 *= 0.3
        if max(span1, span2) < 1e-10:
            break
    return best


def s2_grid_oracle(gains: ChannelGains, P: float, step: float = 0.05,
                   refine_rounds: int = 30) -> float:
    """Dense 5-dim grid maximization of the S2 expression (independently
    written Theta algebra), followed by nested local refinement."""
    h12, h21, h11, h22 = gains.h12, gains.h21, gains.h11, gains.h22
    hr1, hr2, h1r, h2r = gains.hr1, gains.hr2, gains.h1r, gains.h2r
    s1sq = h12 ** 2 / (h12 ** 2 + h1r ** 2)
    s2sq = h21 ** 2 / (h21 ** 2 + h2r ** 2)
    const = cap(h1r ** 2 / h12 ** 2) + cap(h2r ** 2 / h21 ** 2)

    def batch(r1, r2, f1, f2, fr):
        p1, p2, pr = f1 * P, f2 * P, fr * P
        t12 = (h12 ** 2 * p1 + hr2 ** 2 * (1 - r2 ** 2) * pr
               + 2 * h12 * hr2 * r1 * np.sqrt(p1 * pr)
               + s2sq * (h22 * np.sqrt(p2) + hr2 * r2 * np.sqrt(pr)) ** 2
               / (s2sq + h21 ** 2 * p2))
        t21 = (h21 ** 2 * p2 + hr1 ** 2 * (1 - r1 ** 2) * pr
               + 2 * h21 * hr1 * r2 * np.sqrt(p2 * pr)
               + s1sq * (h11 * np.sqrt(p1) + hr1 * r1 * np.sqrt(pr)) ** 2
               / (s1sq + h12 ** 2 * p1))
        return cap(np.maximum(t12, 0.0)) + cap(np.maximum(t21, 0.0)) + const

    rho = np.arange(-1.0, 1.0 + step / 2, step)
    frac = np.arange(step, 1.0 + step / 2, step)
    best = -math.inf
    arg = None
    f1g, f2g, frg = np.meshgrid(frac, frac, frac, indexing="ij")
    f1g, f2g, frg = f1g.ravel(), f2g.ravel(), frg.ravel()
    for r1 in rho:
        for r2 in rho:
            if r1 * r1 + r2 * r2 > 1.0:
                continue
            vals = batch(r1, r2, f1g, f2g, frg)
            k = int(np.argmax(vals))
            if vals[k] > best:
                best = float(vals[k])
                arg = np.array([r1, r2, f1g[k], f2g[k], frg[k]])

    span = np.array([step, step, step, step, step], dtype=float)
    lo = np.array([-1.0, -1.0, 1e-9, 1e-9, 1e-9])
    hi = np.ones(5)
    for _ in range(refine_rounds):
        axes = [np.linspace(max(lo[d], arg[d] - span[d]),
                            min(hi[d], arg[d] + span[d]), 5) for d in range(5)]
        grid = np.stack([g.ravel() for g in np.meshgrid(*axes, indexing="ij")], axis=1)
        ok = grid[:, 0] ** 2 + grid[:, 1] ** 2 <= 1.0
        grid = grid[ok]
        vals = batch(*(grid[:, d] for d in range(5)))
        k = int(np.argmax(vals))
        if vals[k] > best:
            best = float(vals[k])
            arg = grid[k]
        span *= 0.4
    return best


def s1_polar_grid_max(gains: ChannelGains, P: float, step: float = 1e-3) -> float:
    """Max of the parametric S1 bound over a dense polar grid of the
    correlation disk.  The only rho-dependent term is C of an affine form,
    and C is increasing, so the grid argmax of the affine form locates the
    grid max; s1_bound_param is then evaluated exactly there."""
    from icfdr.bounds import s1_bound_param

    r = np.arange(0.0, 1.0 + step / 2, step)
    theta = np.arange(0.0, 2 * math.pi, step)
    rho1 = np.outer(r, np.cos(theta))
    rho2 = np.outer(r, np.sin(theta))
    affine = 2 * gains.hr1 * (gains.h11 * rho1 + gains.h21 * rho2)
    k = int(np.argmax(affine))
    best_r1 = float(rho1.ravel()[k])
    best_r2 = float(rho2.ravel()[k])
    return s1_bound_param(gains, P, best_r1, best_r2)
