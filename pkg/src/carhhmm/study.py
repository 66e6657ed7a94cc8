"""Replicated train/test simulation study comparing the four model variants.

Each replicate simulates a training and a test set from the generating
parameters, fits every requested variant to the training set, decodes the
test set with the fitted parameters and records decoding accuracy, parameter
estimates and observed-information standard errors.
"""
from __future__ import annotations

import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .decode import decode_all
from .inference import fit, natural_names, natural_vector, observed_fisher_se
from .models import VARIANTS, HierModelParams, ModelSpec
from .simulate import SimConfig, design_params, simulate

logger = logging.getLogger(__name__)


@dataclass
class ReplicateRecord:
    replicate: int
    variant: str
    converged: bool = False
    nll: float = float("nan")
    dive_accuracy: float | None = None
    subdive_accuracy: float = float("nan")
    dive_accuracy_by_type: list = field(default_factory=list)
    subdive_accuracy_by_cell: list = field(default_factory=list)  # [true type][true state]
    estimates: dict = field(default_factory=dict)
    std_errors: dict = field(default_factory=dict)
    se_flag: str = ""
    fit_seconds: float = float("nan")
    error: str | None = None


def _accuracies(variant_params: HierModelParams, test, truth: HierModelParams):
    cp, fp, data = decode_all(test.dives, variant_params)
    fine_truth = test.fine_states_flat
    coarse_truth = np.asarray(test.coarse_states)
    p_fine = fp[np.arange(fine_truth.size), fine_truth]
    win_type = coarse_truth[data.dive_of]
    N_true, K_true = truth.spec.coarse.n_states, truth.spec.fine.n_states
    cells = [[float(np.mean(p_fine[(win_type == i) & (fine_truth == k)]))
              if np.any((win_type == i) & (fine_truth == k)) else float("nan")
              for k in range(K_true)] for i in range(N_true)]
    out = {"subdive_accuracy": float(p_fine.mean()), "subdive_accuracy_by_cell": cells}
    if variant_params.spec.coarse.structure == "hmm":
        p_coarse = cp[np.arange(coarse_truth.size), coarse_truth]
        out["dive_accuracy"] = float(p_coarse.mean())
        out["dive_accuracy_by_type"] = [float(np.mean(p_coarse[coarse_truth == i]))
                                        if np.any(coarse_truth == i) else float("nan")
                                        for i in range(N_true)]
    return out


def run_replicate(replicate: int, seeds, n_dives: int, variants, truth: HierModelParams,
                  restarts: int = 2, n_test_dives: int | None = None) -> list[ReplicateRecord]:
    train_seed, test_seed, fit_seed = (int(s) for s in seeds)
    train = simulate(SimConfig(n_dives, truth, train_seed))
    test = simulate(SimConfig(n_test_dives or n_dives, truth, test_seed))
    records = []
    for v in variants:
        rec = ReplicateRecord(replicate, v)
        spec = ModelSpec.variant(v, truth.spec.coarse.n_states, truth.spec.fine.n_states,
                                 truth.spec.fine.n_dims)
        try:
            t0 = time.perf_counter()
            res = fit(train.dives, spec, restarts=restarts, seed=fit_seed)
            rec.fit_seconds = time.perf_counter() - t0
            rec.converged, rec.nll = res.converged, res.nll
            se = observed_fisher_se(res, train.dives)
            rec.estimates = dict(zip(se.names, map(float, se.estimates)))
            rec.std_errors = dict(zip(se.names, map(float, se.se)))
            rec.se_flag = se.flag
            for k, val in _accuracies(res.params, test, truth).items():
                setattr(rec, k, val)
        except Exception as exc:  # recorded per replicate, never fatal
            logger.exception("replicate %d, variant %s failed", replicate, v)
            rec.error = f"{type(exc).__name__}: {exc}"
        records.append(rec)
    return records


def _run_replicate_args(args):
    return run_replicate(*args)


@dataclass
class StudyReport:
    records: list[ReplicateRecord]
    truth: HierModelParams
    n_dives: int
    variants: tuple

    def for_variant(self, variant: str, ok_only: bool = True) -> list[ReplicateRecord]:
        return [r for r in self.records if r.variant == variant and (r.error is None or not ok_only)]

    def mean_accuracy(self, variant: str, level: str = "subdive") -> float | None:
        vals = [getattr(r, f"{level}_accuracy") for r in self.for_variant(variant)]
        vals = [v for v in vals if v is not None]
        return float(np.mean(vals)) if vals else None

    def truth_values(self) -> dict:
        return dict(zip(natural_names(self.truth.spec), natural_vector(self.truth)))

    def accuracy_table(self) -> list[dict]:
        """Accuracy rows: overall then per type/state cell."""
        rows = []
        N = self.truth.spec.coarse.n_states
        K = self.truth.spec.fine.n_states
        for v in self.variants:
            recs = self.for_variant(v)
            if not recs:
                continue
            secs = np.array([r.fit_seconds for r in recs]) / 60.0

            def ms(vals):
                vals = np.array([x for x in vals if x is not None], dtype=float)
                vals = vals[np.isfinite(vals)]
                if vals.size == 0:
                    return None, None
                return float(vals.mean()), float(vals.std(ddof=1)) if vals.size > 1 else 0.0

            base = {"model": v, "train_min_mean": float(secs.mean()),
                    "train_min_sd": float(secs.std(ddof=1)) if secs.size > 1 else 0.0}
            dm, ds = ms([r.dive_accuracy for r in recs])
            sm, ss = ms([r.subdive_accuracy for r in recs])
            rows.append({**base, "dive_type": "both", "subdive_state": "both",
                         "dive_acc_mean": dm, "dive_acc_sd": ds,
                         "subdive_acc_mean": sm, "subdive_acc_sd": ss})
            for i in range(N):
                dm, ds = ms([r.dive_accuracy_by_type[i] if r.dive_accuracy_by_type else None
                             for r in recs])
                for k in range(K):
                    sm, ss = ms([r.subdive_accuracy_by_cell[i][k] for r in recs])
                    rows.append({**base, "dive_type": str(i + 1), "subdive_state": str(k + 1),
                                 "dive_acc_mean": dm, "dive_acc_sd": ds,
                                 "subdive_acc_mean": sm, "subdive_acc_sd": ss})
        return rows

    def parameter_table(self, variant: str) -> list[dict]:
        """Truth, mean estimate, bias, empirical SE and mean estimated SE per parameter."""
        recs = self.for_variant(variant)
        truth = self.truth_values()
        if not recs:
            return []
        rows = []
        for name in recs[0].estimates:
            est = np.array([r.estimates.get(name, np.nan) for r in recs])
            se = np.array([r.std_errors.get(name, np.nan) for r in recs])
            tv = truth.get(name, np.nan) if variant != "carhmm-dft" or "coarse" not in name else np.nan
            if variant == "carhmm-dft" and name.startswith("fine_gamma"):
                tv = np.nan
            rows.append({
                "parameter": name,
                "truth": float(tv),
                "mean_estimate": float(np.nanmean(est)),
                "bias": float(np.nanmean(est) - tv),
                "empirical_se": float(np.nanstd(est, ddof=1)) if est.size > 1 else float("nan"),
                "mean_estimated_se": float(np.nanmean(se)),
            })
        return rows

    def format_accuracy_table(self) -> str:
        lines = [f"{'model':<12} {'train(min)':>12} {'type':>5} {'state':>6} "
                 f"{'dive acc':>14} {'subdive acc':>14}"]

        def fmt(m, s):
            return "-------------" if m is None else f"{m:.2f} +- {s:.2f}"

        for r in self.accuracy_table():
            lines.append(f"{r['model']:<12} {r['train_min_mean']:>6.2f}+-{r['train_min_sd']:<4.2f} "
                         f"{r['dive_type']:>5} {r['subdive_state']:>6} "
                         f"{fmt(r['dive_acc_mean'], r['dive_acc_sd']):>14} "
                         f"{fmt(r['subdive_acc_mean'], r['subdive_acc_sd']):>14}")
        return "\n".join(lines)


def simulation_study(n_replicates: int = 10, n_dives: int = 100, variants=VARIANTS, seed: int = 0,
                     restarts: int = 2, truth: HierModelParams | None = None, n_jobs: int = 1,
                     n_test_dives: int | None = None) -> StudyReport:
    """Run the replicated study; failures are recorded per replicate, not raised."""
    variants = tuple(v.lower() for v in variants)
    bad = [v for v in variants if v not in VARIANTS]
    if bad:
        raise ValueError(f"unknown variants {bad}")
    truth = truth or design_params()
    children = np.random.SeedSequence(seed).spawn(n_replicates)
    jobs = [(r, c.generate_state(3, dtype=np.uint32), n_dives, variants, truth, restarts,
             n_test_dives) for r, c in enumerate(children)]
    if n_jobs > 1:
        with ProcessPoolExecutor(max_workers=n_jobs) as ex:
            chunks = list(ex.map(_run_replicate_args, jobs))
    else:
        chunks = [_run_replicate_args(j) for j in jobs]
    records = [r for chunk in chunks for r in chunk]
    return StudyReport(records, truth, n_dives, variants)
