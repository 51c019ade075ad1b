import math

import numpy as np
import pytest
from scipy import integrate

from ar1agg import DomainError
from ar1agg import levy

from oracles import v_brute_force


def gamma_triplet(shape=1.0, scale=1.0, sigma=0.0):
    return levy.LevyTriplet(sigma=sigma, jumps=levy.CenteredGamma(shape, scale))


def ts_triplet(alpha=1.2, c_plus=0.7, c_minus=0.3, cutoff=2.0, sigma=0.0):
    return levy.LevyTriplet(
        sigma=sigma, jumps=levy.TruncatedStable(alpha, c_plus, c_minus, cutoff)
    )


class TestLogCf:
    def test_gaussian_closed_form(self):
        t = levy.LevyTriplet(sigma=1.5)
        assert levy.v_log_cf(t, 0.7) == pytest.approx(-0.5 * 1.5**2 * 0.7**2)
        assert levy.v_log_cf(t, 0.0) == 0.0

    @pytest.mark.parametrize("theta", [0.3, 1.0, -2.5, 7.0])
    def test_centered_gamma_vs_brute_force(self, theta):
        t = gamma_triplet(1.3, 0.8)
        ref = v_brute_force(
            0.0, lambda y: 1.3 / y * math.exp(-y / 0.8), (1e-13, 80.0), theta
        )
        assert levy.v_log_cf(t, theta) == pytest.approx(ref, abs=1e-9)

    @pytest.mark.parametrize("theta", [0.5, 3.0, -1.7, 12.0])
    def test_truncated_stable_vs_brute_force(self, theta):
        t = ts_triplet()
        j = t.jumps

        def dens(y):
            c = j.c_plus if y > 0 else j.c_minus
            return j.alpha * c * abs(y) ** (-1.0 - j.alpha)

        ref = v_brute_force(0.0, dens, (1e-12, j.cutoff), theta) + v_brute_force(
            0.0, lambda y: dens(-y), (1e-12, j.cutoff), -theta
        )
        assert levy.v_log_cf(t, theta) == pytest.approx(ref, abs=1e-8)

    def test_hermitian_and_negative_real_part(self):
        rng = np.random.default_rng(0)
        for t in (gamma_triplet(), ts_triplet(), gamma_triplet(sigma=0.7)):
            for theta in rng.uniform(0.05, 6.0, 8):
                v = levy.v_log_cf(t, theta)
                assert v == pytest.approx(np.conj(levy.v_log_cf(t, -theta)))
                assert v.real < 0.0

    def test_small_theta_cancellation(self):
        # V(theta) = -(sigma^2 + pi_2) theta^2 / 2 + O(theta^3)
        t = gamma_triplet(1.0, 1.0)
        for h in (1e-3, 1e-5):
            v = levy.v_log_cf(t, h)
            assert v.real == pytest.approx(-0.5 * h**2, rel=1e-2)


class TestTailsAndMoments:
    def test_gamma_tail_is_exponential_integral(self):
        t = gamma_triplet(2.0, 0.5)
        for x in (0.1, 1.0, 3.0):
            ref, _ = integrate.quad(
                lambda y: 2.0 / y * math.exp(-y / 0.5), x, 60.0, limit=200
            )
            assert levy.pi_tail(t, x, "plus") == pytest.approx(ref, rel=1e-10)
        assert levy.pi_tail(t, 1.0, "minus") == 0.0

    def test_truncated_stable_tail(self):
        t = ts_triplet(1.5, 0.4, 0.1, 2.0)
        assert levy.pi_tail(t, 1.0, "plus") == pytest.approx(
            0.4 * (1.0 - 2.0**-1.5)
        )
        assert levy.pi_tail(t, 2.5, "plus") == 0.0
        with pytest.raises(DomainError):
            levy.pi_tail(t, -1.0)

    def test_gamma_moments(self):
        t = gamma_triplet(2.0, 0.5)
        assert levy.levy_moment(t, 2.0) == pytest.approx(2.0 * 1.0 * 0.25)
        assert levy.levy_moment(t, 1.5) == pytest.approx(
            2.0 * math.gamma(1.5) * 0.5**1.5
        )
        assert levy.levy_moment(t, 1.5, side="minus") == 0.0

    def test_truncated_stable_moments_vs_quadrature(self):
        t = ts_triplet()
        j = t.jumps
        for p in (1.5, 2.0, 4.0):
            ref, _ = integrate.quad(
                lambda y: y**p * j.alpha * (j.c_plus + j.c_minus) * y ** (-1 - j.alpha),
                0.0, j.cutoff, limit=200,
            )
            assert levy.levy_moment(t, p) == pytest.approx(ref, rel=1e-10)
        with pytest.raises(DomainError):
            levy.levy_moment(t, 1.0)  # p <= alpha diverges

    def test_signed_jump_moments(self):
        t = ts_triplet(1.2, 0.7, 0.3, 2.0)
        even = levy.levy_moment(t, 4.0)
        assert levy.jump_moment_signed(t, 4) == pytest.approx(even)
        odd = levy.jump_moment_signed(t, 3)
        per = 1.2 / (3 - 1.2) * 2.0 ** (3 - 1.2)
        assert odd == pytest.approx((0.7 - 0.3) * per)

    def test_second_moment(self):
        t = gamma_triplet(1.0, 1.0, sigma=2.0)
        assert t.second_moment() == pytest.approx(4.0 + 1.0)


class TestIncrements:
    def test_gamma_increments_sum_to_gamma_law(self):
        # 1/dt increments of the centered-gamma process over dt each must
        # reproduce the W law exactly (gamma additivity)
        rng = np.random.default_rng(3)
        t = gamma_triplet(1.0, 1.0)
        dt = 1.0 / 64
        x = levy.sample_increments(t, dt, 64 * 4000, rng).reshape(4000, 64).sum(axis=1)
        assert x.mean() == pytest.approx(0.0, abs=4.0 / math.sqrt(4000))
        assert x.var() == pytest.approx(1.0, rel=0.12)
        assert ((x + 1.0) > 0).all()  # support of Gamma(1,1) - 1

    def test_increment_mean_and_variance(self):
        rng = np.random.default_rng(4)
        for t in (ts_triplet(), gamma_triplet(sigma=0.5), levy.LevyTriplet(1.0)):
            dt = 1.0 / 100
            x = levy.sample_increments(t, dt, 150_000, rng)
            target = dt * t.second_moment()
            assert x.mean() == pytest.approx(0.0, abs=4 * math.sqrt(target / x.size))
            assert x.var() == pytest.approx(target, rel=0.05)

    def test_increment_cf_matches_dt_v(self):
        # E exp(i theta eps_dt) = exp(dt V(theta))
        rng = np.random.default_rng(5)
        t = ts_triplet(1.8, 0.5, 0.5, 1.0)
        dt = 1.0 / 50
        x = levy.sample_increments(t, dt, 400_000, rng)
        for theta in (1.0, 3.0):
            emp = np.exp(1j * theta * x).mean()
            ref = np.exp(dt * levy.v_log_cf(t, theta))
            assert abs(emp - ref) < 4.0 / math.sqrt(x.size) + 2e-3

    def test_dt_bounds(self):
        rng = np.random.default_rng(0)
        with pytest.raises(DomainError):
            levy.sample_increments(gamma_triplet(), 0.0, 1, rng)
        with pytest.raises(DomainError):
            levy.sample_increments(gamma_triplet(), 2.0, 1, rng)


class TestStable:
    def test_omega_alpha_one_symmetric(self):
        assert levy.omega(1.0, 1.0, 0.3, 0.3) == pytest.approx(0.6 * math.pi / 2)
        with pytest.raises(DomainError):
            levy.omega(1.0, 1.0, 0.4, 0.2)

    def test_alpha_two_variance_convention(self):
        rng = np.random.default_rng(6)
        x = levy.sample_stable(2.0, 0.25, 0.25, rng, 200_000)
        assert x.var() == pytest.approx(1.0, rel=0.03)
        assert levy.stable_log_cf(1.0, 2.0, 0.25, 0.25) == pytest.approx(-0.5)

    @pytest.mark.parametrize("alpha,c1,c2", [(1.5, 0.59, 0.0), (1.2, 0.4, 0.4),
                                             (0.8, 0.3, 0.6), (1.0, 0.5, 0.5)])
    def test_sampler_matches_cf(self, alpha, c1, c2):
        rng = np.random.default_rng(7)
        if c1 == 0.0:
            c1 = 1e-12  # totally skewed corner handled via a tiny tail
        x = levy.sample_stable(alpha, c1, c2, rng, 300_000)
        for theta in (0.5, 1.0, -2.0):
            emp = np.exp(1j * theta * x).mean()
            ref = np.exp(levy.stable_log_cf(theta, alpha, c1, c2))
            assert abs(emp - ref) < 4.0 / math.sqrt(x.size) + 1e-3

    def test_scalar_draw(self):
        rng = np.random.default_rng(8)
        assert isinstance(levy.sample_stable(1.5, 0.5, 0.5, rng), float)


class TestRegimes:
    def test_regime_i(self):
        rep = levy.classify_regime(0.5, levy.LevyTriplet(1.0))
        assert rep.regime is levy.Regime.I
        assert rep.exponent == pytest.approx(0.75)
        assert rep.constants["fbm_variance"] == pytest.approx(
            math.gamma(-1.5), rel=1e-12
        )

    def test_regime_ii(self):
        rep = levy.classify_regime(0.5, ts_triplet(1.8, 0.5, 0.5, 1.0))
        assert rep.regime is levy.Regime.II
        assert rep.exponent == pytest.approx(1.0 - 0.5 / 1.8)

    def test_regime_iii(self):
        rep = levy.classify_regime(0.5, gamma_triplet())
        assert rep.regime is levy.Regime.III
        assert rep.exponent == pytest.approx(1.0 / 1.5)
        # truncated stable with small index also lands in III
        rep2 = levy.classify_regime(0.5, ts_triplet(1.2, 0.5, 0.5, 1.0))
        assert rep2.regime is levy.Regime.III

    def test_regime_iv(self):
        rep = levy.classify_regime(1.5, levy.LevyTriplet(1.0))
        assert rep.regime is levy.Regime.IV
        assert rep.exponent == 0.5

    def test_boundaries_rejected(self):
        with pytest.raises(DomainError):
            levy.classify_regime(1.0, levy.LevyTriplet(1.0))
        with pytest.raises(DomainError):
            levy.classify_regime(0.8, ts_triplet(1.8, 0.5, 0.5, 1.0))  # alpha = 1+beta
        with pytest.raises(DomainError):
            levy.classify_regime(0.5, levy.LevyTriplet(0.0))

    def test_exponent_ordering(self):
        beta = 0.5
        h1 = levy.classify_regime(beta, levy.LevyTriplet(1.0)).exponent
        h2 = levy.classify_regime(beta, ts_triplet(1.8, 0.5, 0.5, 1.0)).exponent
        h3 = levy.classify_regime(beta, gamma_triplet()).exponent
        h4 = levy.classify_regime(1.5, levy.LevyTriplet(1.0)).exponent
        assert h1 > h2 > h3 > h4


class TestValidation:
    def test_bad_parameters(self):
        with pytest.raises(DomainError):
            levy.CenteredGamma(-1.0, 1.0)
        with pytest.raises(DomainError):
            levy.TruncatedStable(2.5, 1.0, 1.0, 1.0)
        with pytest.raises(DomainError):
            levy.TruncatedStable(1.5, 0.0, 0.0, 1.0)
        with pytest.raises(DomainError):
            levy.LevyTriplet(sigma=-1.0)
        with pytest.raises(DomainError):
            levy.LevyTriplet(sigma=1.0, mu=0.3)
