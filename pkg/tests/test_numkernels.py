import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from scipy import integrate, stats

from carhhmm.exceptions import DomainError, SingularChainError
from carhhmm.numkernels import (CarNormalParams, GammaMeanSd, car_normal_logpdf, dft,
                                eta_to_gamma, gamma_logpdf, gamma_shape_scale, gamma_to_eta,
                                log_sum_exp, log_sum_exp_axis, normal_logpdf, stationary)
from oracles import stationary_eig

finite = st.floats(-700, 700, allow_nan=False)


def stochastic(n):
    return arrays(float, (n, n), elements=st.floats(0.05, 1.0)).map(
        lambda a: a / a.sum(axis=1, keepdims=True))


class TestLogSumExp:
    def test_empty_raises(self):
        with pytest.raises(ValueError):
            log_sum_exp([])

    def test_all_neg_inf(self):
        assert log_sum_exp([-np.inf, -np.inf]) == -np.inf

    def test_large_values_do_not_overflow(self):
        assert log_sum_exp([1000.0, 1000.0]) == pytest.approx(1000.0 + np.log(2.0), abs=1e-12)

    def test_dominant_term_exact(self):
        assert log_sum_exp([0.0, -800.0]) == 0.0

    @given(st.lists(finite, min_size=1, max_size=20))
    def test_bounds(self, xs):
        v = log_sum_exp(xs)
        assert max(xs) - 1e-9 <= v <= max(xs) + np.log(len(xs)) + 1e-9

    @given(arrays(float, (3, 4), elements=st.floats(-50, 50)))
    def test_axis_matches_scalar(self, a):
        out = log_sum_exp_axis(a, axis=1)
        assert np.allclose(out, [log_sum_exp(r) for r in a], rtol=1e-13, atol=1e-13)

    def test_axis_all_neg_inf_row(self):
        out = log_sum_exp_axis(np.array([[-np.inf, -np.inf], [0.0, 0.0]]))
        assert out[0] == -np.inf and out[1] == pytest.approx(np.log(2))


class TestTransitionLink:
    @given(arrays(float, (3, 3), elements=st.floats(-10, 10)))
    def test_rows_stochastic_and_round_trip(self, eta):
        g = eta_to_gamma(eta)
        assert np.allclose(g.sum(axis=1), 1.0, atol=1e-14)
        back = gamma_to_eta(g)
        np.fill_diagonal(eta, 0.0)
        assert np.allclose(back, eta, atol=1e-9)

    def test_diagonal_ignored(self):
        a = np.array([[5.0, 1.0], [2.0, -3.0]])
        b = a.copy()
        np.fill_diagonal(b, 0.0)
        assert np.array_equal(eta_to_gamma(a), eta_to_gamma(b))

    def test_zero_entry_is_domain_error(self):
        with pytest.raises(DomainError):
            gamma_to_eta([[1.0, 0.0], [0.5, 0.5]])

    def test_non_square(self):
        with pytest.raises(ValueError):
            eta_to_gamma(np.zeros((2, 3)))


class TestStationary:
    @given(stochastic(3))
    def test_matches_eigenvector(self, g):
        d = stationary(g)
        assert np.allclose(d, stationary_eig(g), atol=1e-12)
        assert np.allclose(d @ g, d, atol=1e-12)

    def test_single_state(self):
        assert np.array_equal(stationary([[1.0]]), [1.0])

    def test_identity_is_singular(self):
        with pytest.raises(SingularChainError):
            stationary(np.eye(2))

    def test_two_state_closed_form(self):
        a, b = 0.3, 0.1
        d = stationary([[1 - a, a], [b, 1 - b]])
        assert np.allclose(d, [b / (a + b), a / (a + b)], atol=1e-15)


class TestGamma:
    @given(st.floats(0.1, 500), st.floats(0.1, 500))
    def test_shape_scale_moments(self, mean, sd):
        k, theta = gamma_shape_scale(mean, sd)
        assert k * theta == pytest.approx(mean, rel=1e-12)
        assert k * theta**2 == pytest.approx(sd**2, rel=1e-12)

    def test_dataclass_properties(self):
        g = GammaMeanSd(25.7, 9.6)
        assert (g.shape, g.scale) == pytest.approx(gamma_shape_scale(25.7, 9.6))
        with pytest.raises(ValueError):
            GammaMeanSd(-1.0, 1.0)

    @pytest.mark.parametrize("mean,sd", [(25.7, 9.6), (104.6, 64.7), (23.3, 13.0), (301.2, 330.1)])
    def test_density_integrates_to_one(self, mean, sd):
        f = lambda x: np.exp(gamma_logpdf(x, mean=mean, sd=sd))  # noqa: E731
        total, _ = integrate.quad(f, 0, np.inf, limit=200)
        assert total == pytest.approx(1.0, abs=1e-8)

    @given(st.floats(0.01, 1e4), st.floats(0.5, 200), st.floats(0.5, 200))
    def test_matches_scipy(self, x, mean, sd):
        k, theta = gamma_shape_scale(mean, sd)
        ref = stats.gamma(a=k, scale=theta).logpdf(x)
        if np.isfinite(ref):
            assert gamma_logpdf(x, GammaMeanSd(mean, sd)) == pytest.approx(ref, rel=1e-9, abs=1e-9)

    def test_nonpositive_support(self):
        out = gamma_logpdf(np.array([0.0, -1.0, 2.0]), mean=2.0, sd=1.0)
        assert out[0] == -np.inf and out[1] == -np.inf and np.isfinite(out[2])


class TestNormal:
    @given(st.floats(-20, 20), st.floats(-5, 5), st.floats(0.01, 10))
    def test_matches_scipy(self, x, mu, sd):
        assert normal_logpdf(x, mu, sd) == pytest.approx(stats.norm(mu, sd).logpdf(x), rel=1e-12,
                                                         abs=1e-12)

    def test_car_reduces_to_normal_when_phi_zero(self):
        p = CarNormalParams([0.5, -1.0], [0.3, 2.0], 0.0)
        y = np.array([0.1, 0.2])
        ref = stats.norm([0.5, -1.0], [0.3, 2.0]).logpdf(y).sum()
        assert car_normal_logpdf(y, [9.0, 9.0], p) == pytest.approx(ref, rel=1e-13)

    def test_car_conditional_mean(self):
        p = CarNormalParams([1.0], [0.5], 0.8)
        ref = stats.norm(0.8 * 2.0 + 0.2 * 1.0, 0.5).logpdf(1.5)
        assert car_normal_logpdf(1.5, 2.0, p) == pytest.approx(ref, rel=1e-13)

    def test_car_dimension_mismatch(self):
        with pytest.raises(ValueError):
            car_normal_logpdf([1.0, 2.0], [1.0], CarNormalParams([0.0, 0.0], [1.0, 1.0]))

    def test_car_invalid_params(self):
        with pytest.raises(ValueError):
            CarNormalParams([0.0], [0.0])
        with pytest.raises(ValueError):
            CarNormalParams([0.0], [1.0], 1.5)


class TestDft:
    @given(arrays(float, 16, elements=st.floats(-10, 10)), st.integers(0, 15))
    def test_matches_fft(self, y, k):
        assert abs(dft(y, k) - np.fft.fft(y)[k]) < 1e-9 * (1 + np.abs(y).sum())

    def test_constant_window(self):
        y = np.full(100, 0.3)
        assert dft(y, 0) == pytest.approx(30.0)
        assert abs(dft(y, 7)) < 1e-12

    @pytest.mark.parametrize("k", [-1, 100])
    def test_out_of_range(self, k):
        with pytest.raises(ValueError):
            dft(np.zeros(100), k)
