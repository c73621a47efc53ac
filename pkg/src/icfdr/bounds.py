"""Sum-rate upper bounds for the IC-FDR: the cut-set bound, the
genie-aided bound with an auxiliary mixed observation at receiver 1
(the Maric bound), and the two closed-form genie bounds S1 and S2,
together with their outer maximizations over the input covariance.

Bounds that divide by a zero gain raise NotApplicableError; the envelope
records them as +inf so sweeps over degenerate channels complete.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .gauss_info import LinearGaussianSystem, Observation, SignalSelector, mutual_information
from .model import ChannelGains, CovarianceParams, NotApplicableError, gaussian_capacity as C, linear_to_db
from . import optim

#: two bounds within this distance of the envelope are considered tied;
#: the earliest in the order (cs, m, s1, s2) is reported as active
TIE_TOL = 1e-9

_POWER_FLOOR = 1e-6  # lower edge of the normalized power search box


@dataclass(frozen=True)
class BoundSearchConfig:
    """Budgets for the outer covariance searches and the inner genie
    minimization.  Defaults are tuned so a full four-bound evaluation of
    one channel takes on the order of a second."""

    cov_points: int = 9
    cov_refine_tol: float = 1e-4
    cov_max_rounds: int = 30
    search_powers: bool = False
    power_points: int = 5
    maric_inner_points: int = 7
    maric_inner_starts: int = 4
    maric_inner_tol: float = 1e-5
    maric_inner_max_rounds: int = 120
    maric_box: float = 50.0
    s2_points: int = 5
    s2_starts: int = 4
    s2_refine_tol: float = 1e-5
    seed: int = 0


DEFAULT_SEARCH = BoundSearchConfig()


@dataclass(frozen=True)
class CutsetEvaluation:
    """Right-hand sides of the three cut-set constraints at a fixed input
    covariance: per-rate caps and the sum cap, each a min of two
    mutual-information terms."""

    r1_cap: float
    r2_cap: float
    sum_cap: float


@dataclass(frozen=True)
class BoundCurvePoint:
    """One sweep row: the four sum-rate bounds at a power level, their
    envelope (min of the finite entries) and the active bound label."""

    p_db: float
    r_cs: float
    r_m: float
    r_s1: float
    r_s2: float
    envelope: float
    active: str


def channel_system(
    gains: ChannelGains,
    cov: CovarianceParams,
    extra: tuple[Observation, ...] = (),
    validate: bool = False,
) -> LinearGaussianSystem:
    """The receiver/relay observation map of the IC-FDR, optionally with
    extra (genie) observations appended after (y1, y2, yr)."""
    obs = (
        Observation((gains.h11, gains.h21, gains.hr1), (("z1", 1.0),)),
        Observation((gains.h12, gains.h22, gains.hr2), (("z2", 1.0),)),
        Observation((gains.h1r, gains.h2r, 0.0), (("zr", 1.0),)),
    ) + extra
    return LinearGaussianSystem(cov.matrix(), obs, validate=validate)


_X_ALL = SignalSelector(inputs=(0, 1, 2))
_Y1 = SignalSelector(observations=(0,))
_Y2 = SignalSelector(observations=(1,))
_Y1Y2 = SignalSelector(observations=(0, 1))
_Y1YR = SignalSelector(observations=(0, 2))
_Y2YR = SignalSelector(observations=(1, 2))
_Y1Y2YR = SignalSelector(observations=(0, 1, 2))


def cutset_region_at(gains: ChannelGains, cov: CovarianceParams) -> CutsetEvaluation:
    """Cut-set constraint values at a fixed covariance."""
    sys = channel_system(gains, cov)
    r1 = min(
        mutual_information(sys, SignalSelector(inputs=(0, 2)), _Y1, SignalSelector(inputs=(1,))),
        mutual_information(sys, SignalSelector(inputs=(0,)), _Y1YR, SignalSelector(inputs=(1, 2))),
    )
    r2 = min(
        mutual_information(sys, SignalSelector(inputs=(1, 2)), _Y2, SignalSelector(inputs=(0,))),
        mutual_information(sys, SignalSelector(inputs=(1,)), _Y2YR, SignalSelector(inputs=(0, 2))),
    )
    rsum = min(
        mutual_information(sys, _X_ALL, _Y1Y2),
        mutual_information(sys, SignalSelector(inputs=(0, 1)), _Y1Y2YR, SignalSelector(inputs=(2,))),
    )
    return CutsetEvaluation(r1_cap=r1, r2_cap=r2, sum_cap=rsum)


def _cov_space(config: BoundSearchConfig) -> optim.SearchSpace:
    if config.search_powers:
        return optim.SearchSpace(
            lower=(-1.0, -1.0, _POWER_FLOOR, _POWER_FLOOR, _POWER_FLOOR),
            upper=(1.0, 1.0, 1.0, 1.0, 1.0),
            disk=optim.DiskConstraint(dims=(0, 1)),
        )
    return optim.SearchSpace(lower=(-1.0, -1.0), upper=(1.0, 1.0),
                             disk=optim.DiskConstraint(dims=(0, 1)))


def _cov_at(point: np.ndarray, P: float, config: BoundSearchConfig) -> CovarianceParams:
    if config.search_powers:
        return CovarianceParams(point[0], point[1], point[2] * P, point[3] * P, point[4] * P)
    return CovarianceParams(point[0], point[1], P, P, P)


def _cov_search_config(config: BoundSearchConfig) -> optim.SearchConfig:
    ppa = config.cov_points if not config.search_powers else config.power_points
    return optim.SearchConfig(points_per_axis=ppa, refine_tol=config.cov_refine_tol,
                              max_rounds=config.cov_max_rounds, seed=config.seed)


def cutset_sum_bound(gains: ChannelGains, P: float,
                     config: BoundSearchConfig | None = None) -> float:
    """Maximum sum rate over the cut-set region: max over covariances of
    min(sum cap, r1 cap + r2 cap).  The returned value approximates the
    true maximum from below."""
    cfg = config or DEFAULT_SEARCH

    def scalar(point):
        ev = cutset_region_at(gains, _cov_at(point, P, cfg))
        return min(ev.sum_cap, ev.r1_cap + ev.r2_cap)

    res = optim.grid_then_refine(optim.from_scalar(scalar), _cov_space(cfg), _cov_search_config(cfg))
    return res.value


@dataclass(frozen=True)
class MaricSearchPoint:
    """Mixing coefficients of the auxiliary genie observation
    y1g = d1*X1 + d2*X2 + d5*Xr + d3*Z1 + d4*Zaux, with u and d5 derived
    from (v, d2) and feasibility constraining (d2, d3, d4) jointly."""

    v: float
    d1: float
    d2: float
    d3: float
    d4: float

    def __post_init__(self):
        if self.v == 0.0:
            raise ValueError("v must be nonzero")

    def u(self, gains: ChannelGains) -> float:
        return (1.0 - self.v * self.d2) / gains.h21

    def d5(self, gains: ChannelGains) -> float:
        return (gains.hr2 - self.u(gains) * gains.hr1) / self.v

    def is_feasible(self, gains: ChannelGains, tol: float = 1e-9) -> bool:
        lhs = (1.0 / gains.h21 + self.v * (self.d3 - self.d2 / gains.h21)) ** 2
        lhs += (self.v * self.d4) ** 2
        return lhs <= 1.0 + tol

    @classmethod
    def from_reduced(cls, gains: ChannelGains, s: float, t: float, w: float,
                     d1: float, d2: float) -> "MaricSearchPoint":
        """Map the search coordinates (s, t, w, d1, d2) back to the raw
        coefficients: s and t are the two feasibility-constraint terms
        (s**2 + t**2 <= 1) and w = 1/v."""
        if w == 0.0:
            raise ValueError("w must be nonzero")
        inv_h21 = 1.0 / gains.h21
        return cls(v=1.0 / w, d1=d1, d2=d2,
                   d3=w * (s - inv_h21) + d2 * inv_h21, d4=t * w)


def maric_genie_mi(gains: ChannelGains, cov: CovarianceParams,
                   point: MaricSearchPoint) -> float:
    """I(X1,X2,Xr; Y1, Y1g) for one genie point, via the generic
    log-determinant engine."""
    genie = Observation(
        (point.d1, point.d2, point.d5(gains)),
        (("z1", point.d3), ("zg", point.d4)),
    )
    sys = channel_system(gains, cov, extra=(genie,))
    return mutual_information(sys, _X_ALL, SignalSelector(observations=(0, 3)))


def _maric_space(config: BoundSearchConfig) -> optim.SearchSpace:
    b = config.maric_box
    return optim.SearchSpace(
        lower=(-1.0, -1.0, -b, -b, -b),
        upper=(1.0, 1.0, b, b, b),
        disk=optim.DiskConstraint(dims=(0, 1)),
    )


def _maric_ratio_objective(gains: ChannelGains, cov: CovarianceParams):
    """Vectorized det(cov(Y1,Y1g)) / det(noise) over search points
    (s, t, w, d1, d2); monotone in the mutual information, so the search
    minimizes the ratio and the log is taken once at the end."""
    A = cov.matrix()
    c1 = np.array([gains.h11, gains.h21, gains.hr1])
    b = A @ c1
    s11 = float(c1 @ b)
    inv_h21 = 1.0 / gains.h21
    k5w = gains.hr2 - gains.hr1 * inv_h21
    k5d = gains.hr1 * inv_h21
    a00, a01, a02 = A[0, 0], A[0, 1], A[0, 2]
    a11, a12, a22 = A[1, 1], A[1, 2], A[2, 2]

    def ratio(pts):
        s, t, w, d1, d2 = (pts[:, i] for i in range(5))
        d3 = w * (s - inv_h21) + d2 * inv_h21
        d4sq = (t * w) ** 2
        d5 = w * k5w + d2 * k5d
        sgg = a00 * d1 * d1 + a11 * d2 * d2 + a22 * d5 * d5
        sgg += 2.0 * (a01 * d1 * d2 + a02 * d1 * d5 + a12 * d2 * d5)
        s1g = b[0] * d1 + b[1] * d2 + b[2] * d5
        det = (s11 + 1.0) * (sgg + d3 * d3 + d4sq) - (s1g + d3) ** 2
        with np.errstate(divide="ignore", invalid="ignore"):
            r = det / d4sq
        return np.where((d4sq > 0.0) & (det > 0.0) & np.isfinite(r), r, np.inf)

    return ratio


def _maric_minimize(gains: ChannelGains, cov: CovarianceParams,
                    cfg: BoundSearchConfig) -> optim.SearchResult:
    return optim.minimize(
        _maric_ratio_objective(gains, cov),
        _maric_space(cfg),
        optim.SearchConfig(points_per_axis=cfg.maric_inner_points,
                           n_starts=cfg.maric_inner_starts,
                           refine_tol=cfg.maric_inner_tol,
                           max_rounds=cfg.maric_inner_max_rounds, seed=cfg.seed),
    )


def maric_sum_at(gains: ChannelGains, cov: CovarianceParams,
                 config: BoundSearchConfig | None = None) -> float:
    """Inner minimization of I(X1,X2,Xr; Y1,Y1g) over feasible genie
    points at a fixed covariance.  Any feasible point yields a valid
    bound, so incomplete minimization errs high, never invalid.  The
    returned value is re-evaluated through the log-determinant engine at
    the minimizing point."""
    if gains.h21 == 0.0:
        raise NotApplicableError("genie bound needs h21 > 0")
    cfg = config or DEFAULT_SEARCH
    res = _maric_minimize(gains, cov, cfg)
    s, t, w, d1, d2 = res.point
    point = MaricSearchPoint.from_reduced(gains, s, t, w, d1, d2)
    return maric_genie_mi(gains, cov, point)


def maric_sum_bound(gains: ChannelGains, P: float,
                    config: BoundSearchConfig | None = None) -> float:
    """Max over covariances of the fully minimized genie bound.  The inner
    minimization runs to its own convergence at every outer iterate, so
    the outer max is taken over valid bound values.  The winning point is
    re-evaluated through the log-determinant engine."""
    if gains.h21 == 0.0:
        raise NotApplicableError("genie bound needs h21 > 0")
    cfg = config or DEFAULT_SEARCH

    def scalar(point):
        # search on the fast determinant-ratio path; certify the winner below
        ratio = _maric_minimize(gains, _cov_at(point, P, cfg), cfg).value
        return 0.5 * math.log2(ratio)

    res = optim.grid_then_refine(optim.from_scalar(scalar), _cov_space(cfg), _cov_search_config(cfg))
    return maric_sum_at(gains, _cov_at(res.point, P, cfg), cfg)


def s1_bound_param(gains: ChannelGains, P: float, rho1: float, rho2: float) -> float:
    """Genie sum-rate bound S1 at fixed source-relay correlations
    (requires rho1**2 + rho2**2 <= 1)."""
    if gains.h21 == 0.0:
        raise NotApplicableError("S1 bound needs h21 > 0")
    coherent = (gains.h11 ** 2 + gains.h21 ** 2 + gains.hr1 ** 2
                + 2.0 * gains.hr1 * gains.h11 * rho1
                + 2.0 * gains.hr1 * gains.h21 * rho2)
    return (
        C(gains.h22 ** 2 * P / (1.0 + max(gains.h21 ** 2, gains.h2r ** 2) * P))
        + C(gains.h2r ** 2 / gains.h21 ** 2)
        + C(P * max(0.0, coherent))
    )


def s1_bound(gains: ChannelGains, P: float, relabeled: bool = False) -> float:
    """Closed-form maximum of s1_bound_param over the correlation disk
    (Cauchy-Schwarz maximizer).  ``relabeled`` swaps the user roles, which
    gives an equally valid bound by symmetry of the model."""
    g = gains.swapped() if relabeled else gains
    if g.h21 == 0.0:
        raise NotApplicableError("S1 bound needs h21 > 0")
    coherent = (g.h11 ** 2 + g.h21 ** 2 + g.hr1 ** 2
                + 2.0 * g.hr1 * math.sqrt(g.h11 ** 2 + g.h21 ** 2))
    return (
        C(P * coherent)
        + C(g.h22 ** 2 * P / (1.0 + max(g.h21 ** 2, g.h2r ** 2) * P))
        + C(g.h2r ** 2 / g.h21 ** 2)
    )


@dataclass(frozen=True)
class S2Intermediates:
    """Noise shares sigma_i**2 and the two interference-plus-residual
    terms entering the S2 bound."""

    sigma1_sq: float
    sigma2_sq: float
    theta12: float
    theta21: float


def s2_intermediates(gains: ChannelGains, cov: CovarianceParams,
                     alt_rho: bool = False) -> S2Intermediates:
    """Evaluate the S2 intermediates with the stated index placement
    (rho of the other user on the cross term).  ``alt_rho`` swaps the two
    correlation roles, the alternate reading of the mixed indices."""
    if gains.h12 == 0.0 or gains.h21 == 0.0:
        raise NotApplicableError("S2 bound needs h12 > 0 and h21 > 0")
    s1sq = gains.h12 ** 2 / (gains.h12 ** 2 + gains.h1r ** 2)
    s2sq = gains.h21 ** 2 / (gains.h21 ** 2 + gains.h2r ** 2)
    r1, r2 = cov.rho1, cov.rho2
    if alt_rho:
        r1, r2 = r2, r1

    def theta(h_ji, h_ri, h_ii, h_ij, p_j, p_i, rho_j, rho_i, sig_sq):
        cross = 2.0 * h_ji * h_ri * rho_j * math.sqrt(p_j * cov.pr)
        resid = sig_sq * (h_ii * math.sqrt(p_i) + h_ri * rho_i * math.sqrt(cov.pr)) ** 2
        resid /= sig_sq + h_ij ** 2 * p_i
        return (h_ji ** 2 * p_j + h_ri ** 2 * (1.0 - rho_i ** 2) * cov.pr
                + cross + resid)

    theta12 = theta(gains.h12, gains.hr2, gains.h22, gains.h21,
                    cov.p1, cov.p2, r1, r2, s2sq)
    theta21 = theta(gains.h21, gains.hr1, gains.h11, gains.h12,
                    cov.p2, cov.p1, r2, r1, s1sq)
    return S2Intermediates(sigma1_sq=s1sq, sigma2_sq=s2sq,
                           theta12=theta12, theta21=theta21)


def s2_bound_at(gains: ChannelGains, cov: CovarianceParams,
                alt_rho: bool = False) -> float:
    """Genie sum-rate bound S2 at a fixed covariance."""
    inter = s2_intermediates(gains, cov, alt_rho=alt_rho)
    return (
        C(max(0.0, inter.theta12)) + C(max(0.0, inter.theta21))
        + C(gains.h1r ** 2 / gains.h12 ** 2)
        + C(gains.h2r ** 2 / gains.h21 ** 2)
    )


def _s2_objective(gains: ChannelGains, P: float, alt_rho: bool):
    h12, h21 = gains.h12, gains.h21
    h11, h22 = gains.h11, gains.h22
    hr1, hr2 = gains.hr1, gains.hr2
    s1sq = h12 ** 2 / (h12 ** 2 + gains.h1r ** 2)
    s2sq = h21 ** 2 / (h21 ** 2 + gains.h2r ** 2)
    const = C(gains.h1r ** 2 / h12 ** 2) + C(gains.h2r ** 2 / h21 ** 2)

    def f(pts):
        rho1 = pts[:, 0]
        rho2 = pts[:, 1]
        if alt_rho:
            rho1, rho2 = rho2, rho1
        p1 = pts[:, 2] * P
        p2 = pts[:, 3] * P
        pr = pts[:, 4] * P
        sqrt_pr = np.sqrt(pr)
        t12 = (h12 ** 2 * p1 + hr2 ** 2 * (1.0 - rho2 ** 2) * pr
               + 2.0 * h12 * hr2 * rho1 * np.sqrt(p1 * pr)
               + s2sq * (h22 * np.sqrt(p2) + hr2 * rho2 * sqrt_pr) ** 2
               / (s2sq + h21 ** 2 * p2))
        t21 = (h21 ** 2 * p2 + hr1 ** 2 * (1.0 - rho1 ** 2) * pr
               + 2.0 * h21 * hr1 * rho2 * np.sqrt(p2 * pr)
               + s1sq * (h11 * np.sqrt(p1) + hr1 * rho1 * sqrt_pr) ** 2
               / (s1sq + h12 ** 2 * p1))
        t12 = np.maximum(t12, 0.0)
        t21 = np.maximum(t21, 0.0)
        return 0.5 * np.log2(1.0 + t12) + 0.5 * np.log2(1.0 + t21) + const

    return f


def s2_bound(gains: ChannelGains, P: float,
             config: BoundSearchConfig | None = None, alt_rho: bool = False) -> float:
    """Max of the S2 bound over correlations and per-node powers up to P."""
    if gains.h12 == 0.0 or gains.h21 == 0.0:
        raise NotApplicableError("S2 bound needs h12 > 0 and h21 > 0")
    cfg = config or DEFAULT_SEARCH
    space = optim.SearchSpace(
        lower=(-1.0, -1.0, _POWER_FLOOR, _POWER_FLOOR, _POWER_FLOOR),
        upper=(1.0, 1.0, 1.0, 1.0, 1.0),
        disk=optim.DiskConstraint(dims=(0, 1)),
    )
    res = optim.grid_then_refine(
        _s2_objective(gains, P, alt_rho), space,
        optim.SearchConfig(points_per_axis=cfg.s2_points, n_starts=cfg.s2_starts,
                           refine_tol=cfg.s2_refine_tol, seed=cfg.seed),
    )
    return res.value


_BOUND_ORDER = ("cs", "m", "s1", "s2")


def bound_envelope(gains: ChannelGains, P: float,
                   config: BoundSearchConfig | None = None,
                   enabled: tuple[str, ...] = _BOUND_ORDER) -> BoundCurvePoint:
    """Evaluate the selected sum-rate bounds and their envelope.
    Not-applicable (or disabled) bounds are recorded as +inf and excluded
    from the envelope."""
    cfg = config or DEFAULT_SEARCH
    values = {}
    for name, fn in (
        ("cs", lambda: cutset_sum_bound(gains, P, cfg)),
        ("m", lambda: maric_sum_bound(gains, P, cfg)),
        ("s1", lambda: s1_bound(gains, P)),
        ("s2", lambda: s2_bound(gains, P, cfg)),
    ):
        if name not in enabled:
            values[name] = math.inf
            continue
        try:
            values[name] = fn()
        except NotApplicableError:
            values[name] = math.inf
    envelope = min(values.values())
    active = next(n for n in _BOUND_ORDER if values[n] <= envelope + TIE_TOL)
    return BoundCurvePoint(
        p_db=linear_to_db(P),
        r_cs=values["cs"], r_m=values["m"], r_s1=values["s1"], r_s2=values["s2"],
        envelope=envelope, active=active,
    )
