"""Acceptance suite: one test group per criterion, each reporting PASS/FAIL.

The end-of-run summary (see ``conftest.py``) prints one line per criterion.
Heavy simulation checks share session-scoped fixtures so each dataset is built
and fitted once.
"""
import itertools
import time

import numpy as np
import pytest
from scipy import stats

from acceptance_report import record
from carhhmm.decode import coarse_posterior, fine_posterior, pseudoresiduals
from carhhmm.features import FeatureConfig, window_transform
from carhhmm.inference import fit, natural_names, natural_vector, observed_fisher_se
from carhhmm.models import carhmm_loglik, fine_loglik, hier_loglik, hmm_loglik
from carhhmm.numkernels import dft, stationary
from carhhmm.simulate import (SimConfig, energy_moment_audit, design_params, reconstruct_raw,
                              simulate)
from carhhmm.study import simulation_study
from oracles import HierOracle, hmm_lik, path_prob, random_instance, stationary_eig

N_INSTANCES = 200
STUDY_SEED = 2024
STUDY_RESTARTS = 2


@pytest.fixture(scope="module")
def instances():
    return [random_instance(np.random.default_rng(90_000 + i)) for i in range(N_INSTANCES)]


@pytest.fixture(scope="module")
def oracles(instances):
    return [HierOracle(d, p) for d, p in instances]


# -- criterion 1 ---------------------------------------------------------------

def _single_scale_case(rng):
    """Random (T <= 4) sequence checked under both single-scale recursions."""
    N = int(rng.integers(1, 3))
    T = int(rng.integers(1, 5))
    gamma = rng.dirichlet(np.full(N, 2.0), size=N)
    mu, sd = rng.normal(0, 1, N), rng.uniform(0.5, 2.0, N)
    phi = rng.uniform(0.05, 0.95, N)
    y = rng.normal(size=T)
    delta = stationary_eig(gamma)
    ref_hmm = hmm_lik(stats.norm(mu, sd).logpdf(y[:, None]), gamma)
    got_hmm = hmm_loglik(y, gamma, lambda v: stats.norm(mu, sd).logpdf(v))
    ref_car = 0.0
    for z in itertools.product(range(N), repeat=T):
        w = path_prob(z, gamma, delta)
        for t in range(1, T):
            w *= stats.norm(phi[z[t]] * y[t - 1] + (1 - phi[z[t]]) * mu[z[t]], sd[z[t]]).pdf(y[t])
        ref_car += w
    got_car = carhmm_loglik(y, gamma, lambda v, p: stats.norm(phi * p + (1 - phi) * mu, sd).logpdf(v))
    return [(got_hmm, np.log(ref_hmm)), (got_car, np.log(ref_car))]


def _rel(got, ref):
    return abs(got - ref) / max(abs(ref), 1.0)


def test_criterion_1_likelihood_oracle(instances):
    t0 = time.perf_counter()
    worst = 0.0
    for n, (dives, params) in enumerate(instances):
        o = HierOracle(dives, params)
        worst = max(worst, _rel(hier_loglik(dives, params), np.log(o.likelihood())))
        for t, dv in enumerate(dives):
            for i in range(params.spec.coarse.n_states):
                got = fine_loglik(dv.windows, params.fine_gammas[i], params, params.spec.group_of(i))
                worst = max(worst, _rel(got, np.log(o.fine_sum(t, i))))
        for got, ref in _single_scale_case(np.random.default_rng(70_000 + n)):
            worst = max(worst, _rel(got, ref))
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-9 and elapsed < 60.0
    record(1, "likelihoods", ok,
           f"{N_INSTANCES} instances, max rel err {worst:.1e}, runtime {elapsed:.1f}s")
    assert ok


# -- criterion 2 ---------------------------------------------------------------

def test_criterion_2_posterior_oracle(instances, oracles):
    worst_c = worst_f = 0.0
    for (dives, params), o in zip(instances, oracles):
        worst_c = max(worst_c, np.max(np.abs(coarse_posterior(dives, params) - o.coarse_posterior())))
        for got, ref in zip(fine_posterior(dives, params), o.fine_posterior()):
            assert got.shape == ref.shape
            if ref.size:
                worst_f = max(worst_f, np.max(np.abs(got - ref)))
    ok = worst_c <= 1e-10 and worst_f <= 1e-10
    record(2, "posteriors", ok, f"max abs err coarse {worst_c:.1e}, fine {worst_f:.1e}")
    assert ok


# -- criterion 3 ---------------------------------------------------------------

def test_criterion_3_dft_identities():
    rng = np.random.default_rng(3)
    h, n = 100, 1000
    y = rng.uniform(0.5, 2.0, (n, 1)) + rng.normal(0, 1, (n, h)) * rng.uniform(0.01, 1, (n, 1))
    wf = window_transform(y.reshape(-1), FeatureConfig(h, 10))
    worst_pars = worst_dc = worst_w = 0.0
    for w in range(n):
        coeffs = np.array([dft(y[w], k) for k in range(h)])
        energy = np.sum(np.abs(coeffs) ** 2)
        worst_pars = max(worst_pars, abs(energy - h * np.sum(y[w] ** 2)) / (h * np.sum(y[w] ** 2)))
        worst_dc = max(worst_dc, abs(coeffs[0] - h * wf.avg[w, 0]) / abs(h * wf.avg[w, 0]))
        naive_w = np.sum(np.abs(coeffs[1:11]) ** 2)
        worst_w = max(worst_w, abs(wf.wiggliness[w] - naive_w) / naive_w)
    record(3, "Parseval", worst_pars <= 1e-9, f"max rel err {worst_pars:.1e} over {n} windows")
    record(3, "DC = h * mean", worst_dc <= 1e-9, f"max rel err {worst_dc:.1e}")
    states = rng.integers(0, 2, n)
    curve, spec = reconstruct_raw(states, seed=rng)
    rec = window_transform(curve, FeatureConfig(h, 10)).wiggliness
    target = spec.energies[:, :10].sum(axis=1)
    worst_rec = float(np.max(np.abs(rec - target) / target))
    record(3, "reconstructed energy", worst_rec <= 1e-9,
           f"max rel err {worst_rec:.1e} (fft wiggliness vs naive {worst_w:.1e})")
    assert max(worst_pars, worst_dc, worst_rec, worst_w) <= 1e-9


# -- criterion 4 ---------------------------------------------------------------

@pytest.fixture(scope="session")
def study():
    t0 = time.perf_counter()
    rep = simulation_study(10, 100, seed=STUDY_SEED, restarts=STUDY_RESTARTS)
    rep.elapsed = time.perf_counter() - t0
    print(rep.format_accuracy_table())
    return rep


@pytest.mark.slow
def test_criterion_4a_accuracy_band(study):
    sub = study.mean_accuracy("carhhmm-dft", "subdive")
    dive = study.mean_accuracy("carhhmm-dft", "dive")
    failures = [r for r in study.records if r.error]
    ok = 0.90 <= sub <= 0.96 and 0.86 <= dive <= 1.0 and not failures
    record(4, "a: accuracy band", ok,
           f"subdive {sub:.3f}, dive {dive:.3f}, 10x(100+100) dives, {study.elapsed:.0f}s, "
           f"{len(failures)} failed fits")
    assert ok


@pytest.mark.slow
def test_criterion_4b_variant_ordering(study):
    acc = {v: study.mean_accuracy(v, "subdive") for v in ("carhhmm", "hhmm-dft", "carhhmm-dft")}
    ok = acc["carhhmm"] < acc["hhmm-dft"] < acc["carhhmm-dft"]
    record(4, "b: ordering", ok, " < ".join(f"{k} {v:.3f}" for k, v in acc.items()))
    assert ok


@pytest.mark.slow
def test_criterion_4c_sigma_a_bias(study):
    truth = study.truth_values()
    names = ["avg_sd[0,0,0]", "avg_sd[0,1,0]"]

    def ratios(variant):
        rows = {r["parameter"]: r for r in study.parameter_table(variant)}
        return [rows[n]["mean_estimate"] / truth[n] for n in names]

    hhmm, car = ratios("hhmm-dft"), ratios("carhhmm-dft")
    ok = min(hhmm) > 1.5 and all(0.8 <= r <= 1.2 for r in car)
    record(4, "c: sigma_A bias", ok,
           f"estimate/truth HHMM-DFT {hhmm[0]:.2f}, {hhmm[1]:.2f}; "
           f"CarHHMM-DFT {car[0]:.2f}, {car[1]:.2f}")
    assert ok


# -- criterion 5 ---------------------------------------------------------------

@pytest.mark.slow
def test_criterion_5a_recovery_within_3_se():
    truth = design_params()
    ds = simulate(SimConfig(500, truth, seed=500))
    res = fit(ds.dives, truth.spec, restarts=2, seed=0)
    se = observed_fisher_se(res, ds.dives)
    z = (se.estimates - natural_vector(truth)) / se.se
    worst = int(np.nanargmax(np.abs(z)))
    ok = res.converged and se.flag == "ok" and np.all(np.isfinite(z)) and np.all(np.abs(z) < 3)
    record(5, "a: 500-dive recovery", ok,
           f"max |z| {abs(z[worst]):.2f} at {se.names[worst]}, converged {res.converged}, "
           f"SE flag {se.flag}")
    assert ok


@pytest.mark.slow
def test_criterion_5b_se_calibration(study):
    rows = study.parameter_table("carhhmm-dft")
    ratio = np.array([r["mean_estimated_se"] / r["empirical_se"] for r in rows])
    assert len(rows) == len(natural_names(study.truth.spec))
    ok = np.all(np.isfinite(ratio)) and np.all((ratio >= 0.5) & (ratio <= 2.0))
    record(5, "b: SE calibration", ok,
           f"estimated/empirical SE in [{ratio.min():.2f}, {ratio.max():.2f}] over {ratio.size} "
           f"parameters, median {np.median(ratio):.2f}")
    assert ok


# -- criterion 6 ---------------------------------------------------------------

@pytest.mark.slow
def test_criterion_6a_ks_well_specified():
    truth = design_params()
    ds = simulate(SimConfig(2000, truth, seed=600))
    out = []
    ok = True
    for which in ("duration", "avg", "wiggle"):
        r = pseudoresiduals(ds.dives, truth, which)
        v = r.values[r.defined]
        ks = stats.kstest(v, "norm").statistic
        ok &= v.size >= 2000 and ks < 0.05
        out.append(f"{which} KS {ks:.4f} (n={v.size})")
    record(6, "a: KS", ok, ", ".join(out))
    assert ok


@pytest.mark.slow
def test_criterion_6b_heavy_tail_skew():
    truth = design_params()
    ds = simulate(SimConfig(300, truth, seed=700, wiggle_law="lognormal"))
    res = fit(ds.dives, truth.spec, restarts=1, seed=0)
    skews = {}
    for label, p in (("true", truth), ("fitted", res.params)):
        r = pseudoresiduals(ds.dives, p, "wiggle")
        skews[label] = float(stats.skew(r.values[r.defined]))
    ok = skews["fitted"] > 0 and skews["true"] > 0
    record(6, "b: heavy-tail skew", ok,
           f"wiggliness residual skewness {skews['fitted']:.2f} (fitted), {skews['true']:.2f} (true)")
    assert ok


# -- criterion 7 ---------------------------------------------------------------

CASE_GAMMA = np.array([[0.788, 0.212], [0.809, 0.191]])
CASE_FINE = {
    1: (np.array([[0.679, 0.321, 0.0], [0.038, 0.904, 0.058], [0.0, 0.232, 0.768]]),
        np.array([0.087, 0.731, 0.182])),
    2: (np.array([[0.859, 0.141, 0.0], [0.114, 0.841, 0.045], [0.0, 0.216, 0.784]]),
        np.array([0.401, 0.496, 0.103])),
}


def test_criterion_7a_coarse_stationary():
    d = stationary(CASE_GAMMA)
    err = float(np.max(np.abs(d - [0.792, 0.208])))
    record(7, "coarse delta", err <= 5e-4, f"({d[0]:.5f}, {d[1]:.5f}), max diff {err:.1e}")
    assert err <= 5e-4


def test_criterion_7b_fine_stationary_type2():
    g, printed = CASE_FINE[2]
    d = stationary(g)
    err = float(np.max(np.abs(d - printed)))
    record(7, "fine delta type 2", err <= 5e-4, f"{np.round(d, 5)}, max diff {err:.1e}")
    assert err <= 5e-4


@pytest.mark.xfail(strict=True, reason="printed transition entries are rounded to three decimals; "
                   "the exact stationary vector of the rounded matrix misses the printed third "
                   "entry by 7e-4 (see the rounding-box test below)")
def test_criterion_7c_fine_stationary_type1():
    g, printed = CASE_FINE[1]
    d = stationary(g)
    err = float(np.max(np.abs(d - printed)))
    record(7, "fine delta type 1", err <= 5e-4,
           f"{np.round(d, 5)}, max diff {err:.1e} > 5e-4; input-rounding defect, marked xfail")
    assert err <= 5e-4


def test_criterion_7c_type1_consistent_within_rounding_box():
    # birth-death chain: delta is proportional to (1, a, a*b), a = g01/g10, b = g12/g21
    g, printed = CASE_FINE[1]
    grid = np.linspace(-5e-4, 5e-4, 11)
    hits = []
    for e01, e10, e12, e21 in itertools.product(grid, repeat=4):
        a = (g[0, 1] + e01) / (g[1, 0] + e10)
        b = (g[1, 2] + e12) / (g[2, 1] + e21)
        d = np.array([1.0, a, a * b]) / (1 + a + a * b)
        if np.all(np.abs(d - printed) <= 5e-4):
            hits.append((e01, e10, e12, e21))
    assert hits, "no matrix within the rounding box reproduces the printed vector"
    # confirm one hit with the general solver
    e01, e10, e12, e21 = hits[0]
    gg = g.copy()
    gg[0, 1] += e01
    gg[0, 0] -= e01
    gg[1, 0] += e10
    gg[1, 2] += e12
    gg[1, 1] -= e10 + e12
    gg[2, 1] += e21
    gg[2, 2] -= e21
    assert np.all(np.abs(stationary(gg) - printed) <= 5e-4)


# -- criterion 8 ---------------------------------------------------------------

def test_criterion_8_energy_moment_audit():
    rows = energy_moment_audit(n_samples=200_000, seed=0)
    parts = []
    for r in rows:
        assert r["mc_mean"] == pytest.approx(r["analytic_mean"], rel=0.01)
        assert r["mc_sd"] == pytest.approx(r["analytic_sd"], rel=0.02)
        parts.append(f"state {r['state']}: implied mean/sd {r['analytic_mean']:.1f}/"
                     f"{r['analytic_sd']:.1f} vs direct {r['direct_mean']:.1f}/{r['direct_sd']:.1f} "
                     f"(ratios {r['mean_ratio']:.2f}/{r['sd_ratio']:.2f})")
    # the implied law disagrees with the direct one, and no single rescaling of the
    # wiggliness reconciles mean and sd at once (that would need equal ratios)
    demonstrated = all(r["mean_ratio"] > 2 and abs(r["mean_ratio"] / r["sd_ratio"] - 1) > 0.5
                       for r in rows)
    record(8, "discrepancy documented", demonstrated, "; ".join(parts))
    assert demonstrated
