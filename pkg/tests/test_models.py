import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import stats

from carhhmm.features import DiveRecord, WindowFeatures
from carhhmm.models import (VARIANTS, HierModelParams, ModelSpec, carhmm_loglik, fine_loglik,
                            hier_loglik, stack_dives)
from carhhmm.simulate import SimConfig, simulate
from oracles import HierOracle, hmm_lik, path_prob, random_instance, stationary_eig


@pytest.mark.parametrize("seed", range(40))
def test_hier_loglik_matches_enumeration(seed):
    dives, params = random_instance(np.random.default_rng(seed))
    ref = np.log(HierOracle(dives, params).likelihood())
    assert hier_loglik(dives, params) == pytest.approx(ref, rel=1e-9, abs=1e-9)


@pytest.mark.parametrize("seed", range(20))
def test_fine_loglik_matches_enumeration(seed):
    dives, params = random_instance(np.random.default_rng(100 + seed))
    o = HierOracle(dives, params)
    for t, dv in enumerate(dives):
        for i in range(params.spec.coarse.n_states):
            got = fine_loglik(dv.windows, params.fine_gammas[i], params, params.spec.group_of(i))
            assert got == pytest.approx(np.log(o.fine_sum(t, i)), rel=1e-9, abs=1e-9)


class TestSingleScale:
    def test_hmm_matches_enumeration(self, rng):
        gamma = np.array([[0.7, 0.3], [0.2, 0.8]])
        y = rng.normal(size=5)
        mus, sds = np.array([-1.0, 1.0]), np.array([1.0, 0.5])
        ref = hmm_lik(stats.norm(mus, sds).logpdf(y[:, None]), gamma)
        from carhhmm.models import hmm_loglik
        got = hmm_loglik(y, gamma, lambda v: stats.norm(mus, sds).logpdf(v))
        assert got == pytest.approx(np.log(ref), rel=1e-12)

    def test_carhmm_matches_enumeration(self, rng):
        gamma = np.array([[0.9, 0.1], [0.3, 0.7]])
        phi, mu, sd = np.array([0.9, 0.2]), np.array([0.0, 1.0]), np.array([0.3, 1.0])
        y = rng.normal(size=5)

        def dens(v, prev):
            return stats.norm(phi * prev + (1 - phi) * mu, sd).pdf(v)

        delta = stationary_eig(gamma)
        ref = 0.0
        for z in itertools.product(range(2), repeat=5):
            w = path_prob(z, gamma, delta)
            for t in range(1, 5):
                w *= dens(y[t], y[t - 1])[z[t]]
            ref += w
        got = carhmm_loglik(y, gamma, lambda v, p: np.log(dens(v, p)))
        assert got == pytest.approx(np.log(ref), rel=1e-12)

    def test_carhmm_single_observation(self):
        assert carhmm_loglik([1.3], [[1.0]], lambda v, p: np.zeros(1)) == 0.0

    def test_nan_emission_names_index(self):
        from carhhmm.models import hmm_loglik
        with pytest.raises(ValueError, match="index 2"):
            hmm_loglik([0, 1, 2], [[1.0]], lambda v: [np.nan] if v == 2 else [0.0])

    def test_empty_sequence(self):
        from carhhmm.models import hmm_loglik
        with pytest.raises(ValueError):
            hmm_loglik([], [[1.0]], lambda v: [0.0])


class TestInvariance:
    @given(st.integers(0, 10_000), st.booleans(), st.booleans())
    def test_relabelling_leaves_likelihood_unchanged(self, seed, flip_c, flip_f):
        dives, params = random_instance(np.random.default_rng(seed))
        N, K = params.spec.coarse.n_states, params.spec.fine.n_states
        cp = np.arange(N)[::-1] if flip_c else None
        fp = np.arange(K)[::-1] if flip_f else None
        a = hier_loglik(dives, params)
        b = hier_loglik(dives, params.permuted(cp, fp))
        assert b == pytest.approx(a, rel=1e-12, abs=1e-12)

    def test_empty_dive_contributes_only_duration(self, design):
        d0 = DiveRecord(0, 30.0)
        lik = hier_loglik([d0], design)
        dens = stats.gamma(a=(design.coarse_mean / design.coarse_sd) ** 2,
                           scale=design.coarse_sd**2 / design.coarse_mean).pdf(30.0)
        assert lik == pytest.approx(np.log(design.coarse_delta @ dens), rel=1e-12)


class TestScale:
    def test_long_sequence_stays_finite(self, design):
        ds = simulate(SimConfig(300, design, seed=2))
        ll = hier_loglik(ds.dives, design)
        assert np.isfinite(ll)

    def test_long_dive_no_underflow(self, design):
        rng = np.random.default_rng(0)
        n = 5000
        wf = WindowFeatures(rng.normal(0, 0.05, n), rng.gamma(3, 10, n))
        assert np.isfinite(hier_loglik([DiveRecord(0, 2.0 * n, wf)], design))


class TestSpecAndParams:
    @pytest.mark.parametrize("name", VARIANTS)
    def test_variant_switches(self, name):
        s = ModelSpec.variant(name)
        assert s.fine.use_car == (name != "hhmm-dft")
        assert s.fine.use_wiggle == (name != "carhhmm")
        assert (s.coarse.structure == "iid") == (name == "carhmm-dft")

    def test_unknown_variant(self):
        with pytest.raises(ValueError):
            ModelSpec.variant("hsmm")

    def test_non_stochastic_rejected(self, design):
        with pytest.raises(ValueError):
            HierModelParams(design.spec, [[0.5, 0.6], [0.5, 0.5]], design.coarse_mean,
                            design.coarse_sd, design.fine_gammas, design.avg_mean, design.avg_sd,
                            design.phi, design.wiggle_mean, design.wiggle_sd)

    def test_missing_wiggle_parameters(self, design):
        with pytest.raises(ValueError):
            HierModelParams(design.spec, design.coarse_gamma, design.coarse_mean,
                            design.coarse_sd, design.fine_gammas, design.avg_mean, design.avg_sd,
                            design.phi)

    def test_stack_errors(self):
        with pytest.raises(ValueError):
            stack_dives([])
        bad = DiveRecord(7, 10.0, WindowFeatures(np.zeros((2, 2)), np.ones(2)))
        with pytest.raises(ValueError, match="dive 7"):
            stack_dives([bad], n_dims=1)

    def test_stack_layout(self):
        dives = [DiveRecord(0, 5.0, WindowFeatures(np.array([1.0, 2.0]), np.ones(2))),
                 DiveRecord(1, 5.0),
                 DiveRecord(2, 5.0, WindowFeatures(np.array([3.0]), np.ones(1)))]
        d = stack_dives(dives)
        assert d.offsets.tolist() == [0, 2, 2, 3]
        assert d.first.tolist() == [True, False, True]
        assert d.prev_avg[:, 0].tolist() == [1.0, 1.0, 3.0]
        assert d.dive_of.tolist() == [0, 0, 2]
