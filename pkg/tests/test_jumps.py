import math

import numpy as np
import pytest

from hawkesburst.core import BurstTerm
from hawkesburst.jumps import (
    AnchoredReturns,
    JumpConfig,
    PriceSeries,
    bipower_vol,
    burst_anchored_returns,
    is_jump,
    match_events,
    realized_vol,
    resample_prices,
)


class TestPriceSeries:
    def test_log_returns(self):
        p = PriceSeries(np.array([100.0, 110.0, 121.0]), dt=60.0)
        r = p.log_returns
        np.testing.assert_allclose(r, [math.log(1.1)] * 2)

    def test_price_at_locf(self):
        p = PriceSeries(np.array([1.0, 2.0, 3.0]), dt=60.0, t0=0.0)
        assert p.price_at(0.0) == 1.0
        assert p.price_at(61.0) == 2.0  # last observation carried forward
        assert p.price_at(120.0) == 3.0
        with pytest.raises(Exception):
            p.price_at(500.0)  # beyond the sampled range


class TestBipowerVol:
    def test_gaussian_recovery(self):
        # for i.i.d. N(0, s^2) returns, E|r_j||r_{j-1}| = (2/pi)s^2, so the
        # estimator's sigma concentrates on sqrt(2/pi)*s
        rng = np.random.default_rng(42)
        s = 0.02
        K = 120
        vals = []
        for _ in range(2000):
            r = rng.normal(0.0, s, size=K + 10)
            vals.append(bipower_vol(r, len(r) - 1, K))
        mean = np.mean(vals)
        se = np.std(vals) / math.sqrt(len(vals))
        assert abs(mean - s * math.sqrt(2.0 / math.pi)) < 4 * se

    def test_constant_returns(self):
        r = np.full(200, 0.01)
        # |r||r| summed K-2 times, normalised by K-2 -> exactly 0.01
        got = bipower_vol(r, 199, 120)
        assert got == pytest.approx(0.01, rel=1e-12)

    def test_insensitive_to_isolated_jump(self):
        rng = np.random.default_rng(3)
        r = rng.normal(0.0, 0.01, size=300)
        base = bipower_vol(r, 299, 120)
        r2 = r.copy()
        r2[250] += 0.5  # a single huge jump
        spiked = bipower_vol(r2, 299, 120)
        # bipower only sees the jump through two cross-products
        assert spiked < 3 * base


class TestJumpThreshold:
    def test_strict_inequality(self):
        assert not is_jump(0.05, 0.01, theta=5.0)
        assert is_jump(0.0500001, 0.01, theta=5.0)
        assert is_jump(-0.0500001, 0.01, theta=5.0)

    def test_zero_return(self):
        assert not is_jump(0.0, 0.01, theta=5.0)


class TestAnchoredReturns:
    def test_windows_and_scaling(self):
        # a +0.1 log-price step between grid points 1740 and 1800 lands inside
        # all three return windows for a burst at z=1800 (grid is LOCF)
        t = np.arange(0, 3600.0, 60.0)
        logp = np.where(t >= 1780.0, 0.1, 0.0)
        prices = PriceSeries(np.exp(logp), dt=60.0, t0=0.0)
        burst = BurstTerm(z=1800.0, alpha=1.5, tau=700.0)
        ar = burst_anchored_returns(prices, burst, sigma_loc=0.01)
        assert ar.r1 == pytest.approx(0.1, abs=1e-9)
        assert ar.r5 == pytest.approx(0.1, abs=1e-9)
        assert ar.r_tau == pytest.approx(0.1, abs=1e-9)
        # volatility scalings: 1, sqrt(5), sqrt(tau in minutes)
        assert ar.sigma1 == pytest.approx(0.01)
        assert ar.sigma5 == pytest.approx(0.01 * math.sqrt(5))
        assert ar.sigma_tau == pytest.approx(0.01 * math.sqrt(700.0 / 60.0))

    def test_jump_flags(self):
        # 0.2 log-return clears theta=5 on every scale (the tau scale divides
        # by sqrt(700/60) ~ 3.4)
        t = np.arange(0, 3600.0, 60.0)
        logp = np.where(t >= 1780.0, 0.2, 0.0)
        prices = PriceSeries(np.exp(logp), dt=60.0, t0=0.0)
        burst = BurstTerm(z=1800.0, alpha=1.5, tau=700.0)
        ar = burst_anchored_returns(prices, burst, sigma_loc=0.01)
        f1, f5, ftau = ar.jump_flags(theta=5.0)
        assert f1 and f5 and ftau
        quiet = burst_anchored_returns(prices, burst, sigma_loc=10.0)
        assert quiet.jump_flags(theta=5.0) == (False, False, False)


class TestResample:
    def test_locf_grid(self):
        obs_t = np.array([0.0, 100.0, 200.0])
        obs_p = np.array([1.0, 2.0, 3.0])
        ps = resample_prices(obs_t, obs_p, dt=60.0, t_end=300.0)
        np.testing.assert_allclose(ps.prices, [1.0, 1.0, 2.0, 2.0, 3.0, 3.0])


class TestMatching:
    def test_greedy_nearest(self):
        res = match_events(np.array([100.0, 500.0]),
                           np.array([110.0, 1000.0]), tol=60.0)
        assert res.pairs == ((0, 0),)
        assert res.lags == (10.0,)
        assert res.frac_a == pytest.approx(0.5)
        assert res.frac_b == pytest.approx(0.5)

    def test_each_used_once(self):
        res = match_events(np.array([100.0, 120.0]),
                           np.array([110.0]), tol=60.0)
        assert len(res.pairs) == 1
        assert res.pairs[0] == (0, 0)  # nearest pair wins

    def test_empty(self):
        res = match_events(np.array([]), np.array([1.0]), tol=60.0)
        assert res.pairs == ()
        assert res.frac_b == 0.0
