import math

import numpy as np
import pytest

from icfdr.bounds import (
    BoundSearchConfig,
    MaricSearchPoint,
    bound_envelope,
    channel_system,
    cutset_region_at,
    cutset_sum_bound,
    maric_genie_mi,
    maric_sum_at,
    maric_sum_bound,
    s1_bound,
    s1_bound_param,
    s2_bound,
    s2_bound_at,
    s2_intermediates,
)
from icfdr.gauss_info import SignalSelector, joint_covariance, mutual_information
from icfdr.model import ChannelGains, CovarianceParams, NotApplicableError
from icfdr.model import gaussian_capacity as C

from oracles import (
    cutset_caps_oracle,
    cutset_sum_grid_oracle,
    maric_sample_oracle,
    random_gains,
    s1_polar_grid_max,
    s2_grid_oracle,
)

FIG2 = ChannelGains(h11=1, h22=1, hr2=1, hr1=2, h12=2,
                    h21=math.sqrt(5), h1r=math.sqrt(10), h2r=math.sqrt(10))
FIG3 = ChannelGains(h11=2, h22=2, hr1=0.2, hr2=0.2, h12=0.5, h21=0.5, h1r=0.2, h2r=0.2)
FIG4 = ChannelGains(h11=1, h22=1, hr1=2, hr2=1, h12=2,
                    h21=math.sqrt(5), h1r=math.sqrt(10), h2r=math.sqrt(10))
ZEROS = ChannelGains(h11=0, h12=0, h21=0, h22=0, h1r=0, h2r=0, hr1=0, hr2=0)

FAST = BoundSearchConfig(cov_points=5, maric_inner_points=5, maric_inner_starts=2,
                         s2_points=3, s2_starts=2)


class TestCutset:
    def test_all_zero_gains(self):
        ev = cutset_region_at(ZEROS, CovarianceParams(0.0, 0.0, 1.0, 1.0, 1.0))
        assert ev.r1_cap == 0.0 and ev.r2_cap == 0.0 and ev.sum_cap == 0.0

    def test_relay_disconnected_reduces_to_plain_links(self):
        g = ChannelGains(h11=1.2, h22=0.8, h12=0.3, h21=0.4,
                         h1r=0, h2r=0, hr1=0, hr2=0)
        cov = CovarianceParams(0.0, 0.0, 3.0, 3.0, 3.0)
        ev = cutset_region_at(g, cov)
        assert ev.r1_cap == pytest.approx(C(1.2 ** 2 * 3.0), abs=1e-12)
        assert ev.r2_cap == pytest.approx(C(0.8 ** 2 * 3.0), abs=1e-12)

    def test_region_preset_gains_frozen_values(self):
        # frozen from the inclusion-exclusion logdet oracle on the hand
        # assembled 6x6 joint covariance
        ev = cutset_region_at(FIG4, CovarianceParams(0.0, 0.0, 100.0, 100.0, 100.0))
        assert ev.r1_cap == pytest.approx(4.484333396597556, abs=1e-9)
        assert ev.r2_cap == pytest.approx(3.8255258455894645, abs=1e-9)
        assert ev.sum_cap == pytest.approx(8.849283027987276, abs=1e-9)

    def test_matches_oracle_on_random_channels(self):
        rng = np.random.default_rng(1)
        for _ in range(30):
            g = random_gains(rng)
            cov = CovarianceParams(rng.uniform(-0.7, 0.7), rng.uniform(-0.7, 0.7),
                                   *rng.uniform(0.5, 30.0, 3))
            ev = cutset_region_at(g, cov)
            o1, o2, os_ = cutset_caps_oracle(g, cov)
            assert ev.r1_cap == pytest.approx(o1, abs=1e-9)
            assert ev.r2_cap == pytest.approx(o2, abs=1e-9)
            assert ev.sum_cap == pytest.approx(os_, abs=1e-9)

    def test_sum_bound_zero_channel(self):
        assert cutset_sum_bound(ZEROS, 1.0, FAST) == 0.0

    def test_sum_bound_separable_parallel_links(self):
        g = ChannelGains(h11=1, h22=1, h12=0, h21=0, h1r=0, h2r=0, hr1=0, hr2=0)
        assert cutset_sum_bound(g, 3.0) == pytest.approx(2.0, abs=1e-6)

    def test_sum_bound_matches_dense_grid_oracle(self):
        got = cutset_sum_bound(FIG2, 100.0)
        want = cutset_sum_grid_oracle(FIG2, 100.0, step=0.01)
        assert abs(got - want) <= 1e-3


class TestMaric:
    def test_search_point_derivations(self):
        pt = MaricSearchPoint(v=2.0, d1=0.1, d2=0.3, d3=-0.2, d4=0.5)
        g = FIG2
        assert pt.u(g) == pytest.approx((1 - 2.0 * 0.3) / g.h21)
        assert pt.d5(g) == pytest.approx((g.hr2 - pt.u(g) * g.hr1) / 2.0)
        with pytest.raises(ValueError):
            MaricSearchPoint(v=0.0, d1=0, d2=0, d3=0, d4=1)

    def test_from_reduced_point_is_feasible(self):
        rng = np.random.default_rng(4)
        for _ in range(200):
            s, t = rng.uniform(-0.7, 0.7, 2)
            if s * s + t * t > 1:
                continue
            pt = MaricSearchPoint.from_reduced(FIG2, s, t, rng.uniform(0.1, 40),
                                               rng.uniform(-40, 40), rng.uniform(-40, 40))
            assert pt.is_feasible(FIG2)

    def test_pure_noise_genie_adds_nothing(self):
        # channel chosen so d5 = 0 at d2 = 0: hr2 = hr1/h21
        g = ChannelGains(h11=1, h22=1, h12=2, h21=math.sqrt(5),
                         hr1=math.sqrt(5), hr2=1, h1r=1, h2r=1)
        cov = CovarianceParams(0.2, 0.1, 50.0, 50.0, 50.0)
        d4 = math.sqrt(1.0 - 1.0 / g.h21 ** 2)  # feasibility boundary
        pt = MaricSearchPoint(v=1.0, d1=0.0, d2=0.0, d3=0.0, d4=d4)
        assert pt.d5(g) == pytest.approx(0.0, abs=1e-15)
        assert pt.is_feasible(g)
        got = maric_genie_mi(g, cov, pt)
        sys = channel_system(g, cov)
        want = mutual_information(sys, SignalSelector(inputs=(0, 1, 2)),
                                  SignalSelector(observations=(0,)))
        assert got == pytest.approx(want, abs=1e-9)

    def test_not_applicable_without_cross_gain(self):
        with pytest.raises(NotApplicableError):
            maric_sum_at(ZEROS, CovarianceParams(0, 0, 1, 1, 1))
        with pytest.raises(NotApplicableError):
            maric_sum_bound(ZEROS, 1.0)

    def test_minimum_below_any_feasible_point(self):
        cov = CovarianceParams(0.3, 0.3, 100.0, 100.0, 100.0)
        best = maric_sum_at(FIG2, cov)
        rng = np.random.default_rng(9)
        for _ in range(50):
            s, t = rng.uniform(-0.7, 0.7, 2)
            if s * s + t * t > 1 or t == 0:
                continue
            pt = MaricSearchPoint.from_reduced(FIG2, s, t, rng.uniform(0.5, 30),
                                               rng.uniform(-30, 30), rng.uniform(-30, 30))
            assert maric_genie_mi(FIG2, cov, pt) >= best - 1e-9

    def test_beats_sampling_oracle(self):
        cov = CovarianceParams(0.3, 0.3, 100.0, 100.0, 100.0)
        got = maric_sum_at(FIG2, cov)
        oracle = maric_sample_oracle(FIG2, cov, n=20_000, seed=0)
        assert got <= oracle + 1e-3

    def test_bound_below_cutset_at_30db(self):
        P = 1000.0
        assert maric_sum_bound(FIG2, P) < cutset_sum_bound(FIG2, P)


class TestS1:
    def test_param_direct_substitution(self):
        # h2r = h21 = 1, hr1 = 0, h11 = h22 = 1, P = 1: the max in the first
        # denominator is 1, so the terms are C(1/2), C(1), C(2)
        g = ChannelGains(h11=1, h22=1, h12=0.7, h21=1, h1r=0.5, h2r=1, hr1=0, hr2=0.3)
        got = s1_bound_param(g, 1.0, 0.0, 0.0)
        assert got == pytest.approx(C(0.5) + C(1.0) + C(2.0), abs=1e-12)

    def test_param_zero_channel_with_cross_gain(self):
        # only the coherent-combining term survives, and it includes the
        # cross gain: C(P * h21^2)
        g = ChannelGains(h11=0, h22=0, h12=0, h21=0.8, h1r=0, h2r=0, hr1=0, hr2=0)
        assert s1_bound_param(g, 5.0, 0.3, 0.1) == pytest.approx(C(5.0 * 0.64), abs=1e-12)

    def test_not_applicable(self):
        with pytest.raises(NotApplicableError):
            s1_bound(ZEROS, 1.0)

    def test_rho_independent_when_no_relay_gain(self):
        g = ChannelGains(h11=1.1, h22=0.9, h12=0.5, h21=0.6, h1r=0.4, h2r=0.7,
                         hr1=0.0, hr2=0.2)
        rng = np.random.default_rng(2)
        base = s1_bound(g, 10.0)
        for _ in range(20):
            r1, r2 = rng.uniform(-0.7, 0.7, 2)
            assert s1_bound_param(g, 10.0, r1, r2) == pytest.approx(base, abs=1e-12)

    def test_closed_form_hand_expression_strong_interference_gains(self):
        P = 100.0
        coh = 1 + 5 + 4 + 2 * 2 * math.sqrt(6)
        want = C(P * coh) + C(P / (1 + 10 * P)) + 0.5 * math.log2(3.0)
        assert s1_bound(FIG2, P) == pytest.approx(want, abs=1e-12)
        assert C(FIG2.h2r ** 2 / FIG2.h21 ** 2) == pytest.approx(
            0.5 * math.log2(3.0), abs=1e-15)

    def test_closed_form_equals_polar_grid_max(self):
        rng = np.random.default_rng(12)
        for _ in range(10):
            g = random_gains(rng)
            P = float(rng.uniform(0.5, 200.0))
            assert s1_bound(g, P) == pytest.approx(
                s1_polar_grid_max(g, P), abs=1e-6)

    def test_relabeled_variant_swaps_users(self):
        g = random_gains(np.random.default_rng(8))
        assert s1_bound(g, 7.0, relabeled=True) == pytest.approx(
            s1_bound(g.swapped(), 7.0), abs=1e-15)

    def test_half_slope_at_high_power(self):
        p30, p50 = 1e3, 1e5
        slope = (s1_bound(FIG2, p50) - s1_bound(FIG2, p30)) / (math.log2(p50) - math.log2(p30))
        assert slope == pytest.approx(0.5, abs=0.05)


class TestS2:
    def test_intermediates_match_genie_variance_derivation(self):
        # Var(Y1 | h12*X1 + W1) computed through the covariance engine must
        # equal 1 + theta21; same for receiver 2
        rng = np.random.default_rng(21)
        from icfdr.gauss_info import LinearGaussianSystem, Observation

        for _ in range(40):
            g = random_gains(rng)
            cov = CovarianceParams(rng.uniform(-0.7, 0.7), rng.uniform(-0.7, 0.7),
                                   *rng.uniform(0.5, 20.0, 3))
            inter = s2_intermediates(g, cov)
            genie1 = Observation((g.h12, 0.0, 0.0), (("w1", math.sqrt(inter.sigma1_sq)),))
            genie2 = Observation((0.0, g.h21, 0.0), (("w2", math.sqrt(inter.sigma2_sq)),))
            sys = channel_system(g, cov, extra=(genie1, genie2))
            S = joint_covariance(sys, SignalSelector(observations=(0, 3)))
            var_cond = S[0, 0] - S[0, 1] ** 2 / S[1, 1]
            assert var_cond == pytest.approx(1.0 + inter.theta21, rel=1e-9)
            S = joint_covariance(sys, SignalSelector(observations=(1, 4)))
            var_cond = S[0, 0] - S[0, 1] ** 2 / S[1, 1]
            assert var_cond == pytest.approx(1.0 + inter.theta12, rel=1e-9)

    def test_relay_power_vanishing_limit(self):
        g = FIG3
        cov = CovarianceParams(0.0, 0.0, 2.0, 2.0, 1e-12)
        inter = s2_intermediates(g, cov)
        want21 = (g.h21 ** 2 * 2.0
                  + inter.sigma1_sq * g.h11 ** 2 * 2.0 / (inter.sigma1_sq + g.h12 ** 2 * 2.0))
        assert inter.theta21 == pytest.approx(want21, abs=1e-9)

    def test_not_applicable(self):
        g = ChannelGains(h11=1, h22=1, h12=0, h21=1, h1r=1, h2r=1, hr1=1, hr2=1)
        with pytest.raises(NotApplicableError):
            s2_bound_at(g, CovarianceParams(0, 0, 1, 1, 1))
        with pytest.raises(NotApplicableError):
            s2_bound(g, 1.0)

    def test_value_vanishes_with_power(self):
        g = ChannelGains(h11=0, h22=0, h12=1, h21=1, h1r=0, h2r=0, hr1=0, hr2=0)
        tiny = s2_bound_at(g, CovarianceParams(0.0, 0.0, 1e-9, 1e-9, 1e-9))
        assert tiny == pytest.approx(0.0, abs=1e-8)

    def test_sigma_in_unit_interval_and_thetas_nonnegative(self):
        rng = np.random.default_rng(33)
        for _ in range(200):
            g = random_gains(rng)
            cov = CovarianceParams(rng.uniform(-0.7, 0.7), rng.uniform(-0.7, 0.7),
                                   *rng.uniform(0.1, 10.0, 3))
            inter = s2_intermediates(g, cov)
            assert 0.0 < inter.sigma1_sq <= 1.0
            assert 0.0 < inter.sigma2_sq <= 1.0
            assert inter.theta12 >= -1e-12
            assert inter.theta21 >= -1e-12

    def test_bound_matches_grid_oracle(self):
        got = s2_bound(FIG3, 10.0)
        want = s2_grid_oracle(FIG3, 10.0, step=0.05)
        assert abs(got - want) <= 1e-3

    def test_alt_rho_agrees_on_symmetric_correlations(self):
        cov = CovarianceParams(0.4, 0.4, 5.0, 5.0, 5.0)
        assert s2_bound_at(FIG3, cov, alt_rho=True) == pytest.approx(
            s2_bound_at(FIG3, cov), abs=1e-12)


class TestEnvelope:
    def test_relay_disconnected_symmetric_ic(self):
        g = ChannelGains(h11=1, h22=1, h12=0, h21=0, h1r=0, h2r=0, hr1=0, hr2=0)
        point = bound_envelope(g, 4.0, FAST)
        assert point.envelope == pytest.approx(2 * C(4.0), abs=1e-6)
        assert point.active == "cs"
        assert math.isinf(point.r_m) and math.isinf(point.r_s1) and math.isinf(point.r_s2)

    def test_disabled_bounds_are_skipped(self):
        point = bound_envelope(FIG3, 1.0, FAST, enabled=("cs", "s1"))
        assert math.isinf(point.r_m) and math.isinf(point.r_s2)
        assert point.envelope == min(point.r_cs, point.r_s1)

    def test_monotone_in_power(self):
        rng = np.random.default_rng(14)
        ladder = [0.5, 2.0, 8.0, 32.0]
        for _ in range(8):
            g = random_gains(rng)
            prev = None
            for P in ladder:
                point = bound_envelope(g, P, FAST)
                values = (point.r_cs, point.r_m, point.r_s1, point.r_s2)
                if prev is not None:
                    for lo, hi in zip(prev, values):
                        assert hi >= lo - 1e-6
                prev = values

    def test_nonnegative_and_finite_for_positive_gains(self):
        rng = np.random.default_rng(15)
        for _ in range(5):
            g = random_gains(rng, low=0.2)
            point = bound_envelope(g, 10.0, FAST)
            for v in (point.r_cs, point.r_m, point.r_s1, point.r_s2, point.envelope):
                assert math.isfinite(v) and v >= 0.0
