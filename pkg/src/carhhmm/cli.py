"""Command-line front end: transform, simulate, fit, decode and diagnose.

Every command reads CSV (and a YAML run configuration), writes CSV/JSON into
``--out`` and returns a stable exit code:

    0 success, 2 input error, 3 empty result, 4 non-convergence

State labels in every output file are 1-based.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np
import yaml
from scipy.stats import kstest, skew

from .decode import decode_all, histogram_weights, most_probable_states, pseudoresiduals
from .features import DiveRecord, FeatureConfig, RawSeries, WindowFeatures, extract_dives
from .inference import fit, natural_names, observed_fisher_se
from .models import VARIANTS, CoarseSpec, FineSpec, HierModelParams, ModelSpec, hier_loglik
from .simulate import SimConfig, design_params, simulate
from .study import simulation_study

logger = logging.getLogger(__name__)

EXIT_OK, EXIT_INPUT, EXIT_EMPTY, EXIT_NOT_CONVERGED = 0, 2, 3, 4


class InputError(Exception):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


class EmptyResult(Exception):
    pass


# -- configuration ------------------------------------------------------------

@dataclass
class ModelSection:
    n_coarse: int = 2
    n_fine: int = 2
    variant: str = "carhhmm-dft"
    shared_fine: bool = True


@dataclass
class FeatureSection:
    h: int = 100
    omega: int = 10
    window_seconds: float = 2.0
    smooth_seconds: float = 0.1
    depth_threshold_m: float = 0.5
    min_duration_s: float = 10.0


@dataclass
class FitSection:
    restarts: int = 10
    seed: int = 0
    maxiter: int = 1000


@dataclass
class SimulateSection:
    n_dives: int = 100
    wiggle_law: str = "gamma"
    replicates: int = 10
    study_restarts: int = 2


@dataclass
class IOSection:
    out: str = "."


@dataclass
class RunConfig:
    model: ModelSection = field(default_factory=ModelSection)
    features: FeatureSection = field(default_factory=FeatureSection)
    fit: FitSection = field(default_factory=FitSection)
    simulate: SimulateSection = field(default_factory=SimulateSection)
    io: IOSection = field(default_factory=IOSection)

    @classmethod
    def from_mapping(cls, doc: dict | None) -> "RunConfig":
        cfg = cls()
        for name, section in (doc or {}).items():
            if not hasattr(cfg, name):
                raise InputError(f"unknown config section {name!r}")
            target = getattr(cfg, name)
            known = {f.name: f for f in fields(target)}
            for key, value in (section or {}).items():
                if key not in known:
                    raise InputError(f"unknown key {name}.{key}")
                setattr(target, key, type(getattr(target, key))(value))
        if cfg.model.variant.lower() not in VARIANTS:
            raise InputError(f"unknown variant {cfg.model.variant!r}; choose from {VARIANTS}")
        cfg.model.variant = cfg.model.variant.lower()
        return cfg

    @classmethod
    def load(cls, path: str | None) -> "RunConfig":
        if path is None:
            return cls()
        try:
            with open(path, encoding="utf-8") as fh:
                doc = yaml.safe_load(fh)
        except yaml.YAMLError as exc:
            mark = getattr(exc, "problem_mark", None)
            raise InputError(f"invalid YAML: {exc}", mark.line + 1 if mark else None) from exc
        except OSError as exc:
            raise InputError(f"cannot read config: {exc}") from exc
        if doc is not None and not isinstance(doc, dict):
            raise InputError("config must be a mapping of sections")
        return cls.from_mapping(doc)

    def spec(self, n_dims: int = 1) -> ModelSpec:
        m = self.model
        return ModelSpec.variant(m.variant, m.n_coarse, m.n_fine, n_dims, m.shared_fine)

    def feature_config(self) -> FeatureConfig:
        return FeatureConfig(self.features.h, self.features.omega)


# -- CSV helpers --------------------------------------------------------------

def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if x is None:
        return ""
    if isinstance(x, str):
        return x
    return "%.17g" % float(x)


def _write_csv(path: Path, header: list[str], rows):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def _read_csv(path: str, required: list[str]) -> tuple[list[str], list[tuple[int, dict]]]:
    """Header and ``(line_number, row)`` pairs; missing columns are an input error."""
    try:
        fh = open(path, encoding="utf-8", newline="")
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    with fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise InputError("file is empty", 1) from None
        header = [h.strip() for h in header]
        missing = [c for c in required if c not in header]
        if missing:
            raise InputError(f"missing columns {missing}", 1)
        rows = []
        for row in reader:
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise InputError(f"expected {len(header)} fields, found {len(row)}", reader.line_num)
            rows.append((reader.line_num, dict(zip(header, (c.strip() for c in row)))))
    return header, rows


def _float(value: str, line: int, column: str, allow_empty: bool = False) -> float:
    if allow_empty and value == "":
        return float("nan")
    try:
        return float(value)
    except ValueError:
        raise InputError(f"column {column}: cannot parse {value!r} as a number", line) from None


def _int(value: str, line: int, column: str) -> int:
    try:
        return int(value)
    except ValueError:
        raise InputError(f"column {column}: cannot parse {value!r} as an integer", line) from None


def read_raw_csv(path: str) -> RawSeries:
    header, rows = _read_csv(path, ["time_s", "acc_x"])
    acc_cols = [c for c in ("acc_x", "acc_y", "acc_z") if c in header]
    has_depth = "depth_m" in header
    if len(rows) < 2:
        raise InputError("need at least two samples", 2 if not rows else rows[0][0])
    t = np.empty(len(rows))
    acc = np.empty((len(rows), len(acc_cols)))
    depth = np.empty(len(rows)) if has_depth else None
    for n, (line, r) in enumerate(rows):
        t[n] = _float(r["time_s"], line, "time_s")
        for j, c in enumerate(acc_cols):
            acc[n, j] = _float(r[c], line, c)
        if has_depth:
            depth[n] = _float(r["depth_m"], line, "depth_m")
    dt = np.diff(t)
    bad = np.flatnonzero(dt <= 0)
    if bad.size:
        raise InputError("time_s must be strictly increasing", rows[bad[0] + 1][0])
    rate = float("%.9g" % (1.0 / float(np.median(dt))))
    return RawSeries(rate, acc, depth)


FEATURE_BASE = ["dive_id", "window_idx", "duration_s"]


def feature_rows(dives: list[DiveRecord]):
    for dv in dives:
        if dv.n_windows == 0:
            yield [dv.dive_id, -1, dv.duration_s] + [None] * (dv.windows.n_dims + 1)
            continue
        for s in range(dv.n_windows):
            yield ([dv.dive_id, s, dv.duration_s] + list(dv.windows.avg[s])
                   + [dv.windows.wiggliness[s]])


def write_features(path: Path, dives: list[DiveRecord]):
    d = dives[0].windows.n_dims if dives else 1
    header = FEATURE_BASE + [f"avg_{j + 1}" for j in range(d)] + ["wiggliness"]
    _write_csv(path, header, feature_rows(dives))


def read_features(path: str) -> list[DiveRecord]:
    header, rows = _read_csv(path, FEATURE_BASE + ["avg_1", "wiggliness"])
    if not rows:
        raise InputError("features file has no data rows", 2)
    avg_cols = [c for c in header if c.startswith("avg_")]
    expected = [f"avg_{j + 1}" for j in range(len(avg_cols))]
    if avg_cols != expected:
        raise InputError(f"mean columns must be {expected}", 1)
    order: list[int] = []
    acc: dict[int, dict] = {}
    for line, r in rows:
        did = _int(r["dive_id"], line, "dive_id")
        widx = _int(r["window_idx"], line, "window_idx")
        dur = _float(r["duration_s"], line, "duration_s")
        if did not in acc:
            order.append(did)
            acc[did] = {"duration": dur, "avg": [], "wig": [], "line": line}
        entry = acc[did]
        if dur != entry["duration"]:
            raise InputError(f"dive {did} has inconsistent duration_s", line)
        if widx == -1:
            continue
        if widx != len(entry["avg"]):
            raise InputError(f"dive {did}: expected window_idx {len(entry['avg'])}, got {widx}",
                             line)
        entry["avg"].append([_float(r[c], line, c) for c in avg_cols])
        entry["wig"].append(_float(r["wiggliness"], line, "wiggliness", allow_empty=True))
    dives = []
    for did in order:
        e = acc[did]
        if e["avg"]:
            wf = WindowFeatures(np.array(e["avg"]), np.array(e["wig"]))
        else:
            wf = WindowFeatures.empty(len(avg_cols))
        dives.append(DiveRecord(did, e["duration"], wf))
    return dives


# -- fit.json -----------------------------------------------------------------

_PARAM_FIELDS = ("coarse_gamma", "coarse_mean", "coarse_sd", "fine_gammas", "avg_mean", "avg_sd",
                 "phi", "wiggle_mean", "wiggle_sd")


def params_to_json(params: HierModelParams) -> dict:
    spec = params.spec
    out = {}
    for name in _PARAM_FIELDS:
        value = getattr(params, name)
        if value is None:
            continue
        if name == "coarse_gamma" and spec.coarse.structure == "iid":
            continue
        if name == "phi" and not spec.fine.use_car:
            continue
        out[name] = np.asarray(value).tolist()
    return out


def spec_to_json(spec: ModelSpec) -> dict:
    return {"variant": spec.name, "n_coarse": spec.coarse.n_states,
            "coarse_structure": spec.coarse.structure, "n_fine": spec.fine.n_states,
            "n_dims": spec.fine.n_dims, "use_car": spec.fine.use_car,
            "use_wiggle": spec.fine.use_wiggle, "shared_fine": spec.fine.shared_across_coarse,
            "first_wiggle": spec.fine.first_wiggle}


def read_fit_json(path: str) -> HierModelParams:
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise InputError(f"invalid JSON in {path}: {exc.msg}", exc.lineno) from exc
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    try:
        s = doc["spec"]
        spec = ModelSpec(
            CoarseSpec(int(s["n_coarse"]), s["coarse_structure"]),
            FineSpec(int(s["n_fine"]), int(s["n_dims"]), bool(s["use_car"]),
                     bool(s["use_wiggle"]), bool(s["shared_fine"]), bool(s["first_wiggle"])),
            s["variant"],
        )
        p = dict(doc["params"])
        if spec.coarse.structure == "iid":
            p["coarse_gamma"] = [[1.0]]
        return HierModelParams(spec=spec, **p)
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"fit file {path} is malformed: {exc}") from exc


# -- commands -----------------------------------------------------------------

def _out_dir(args, cfg: RunConfig) -> Path:
    out = Path(args.out if args.out is not None else cfg.io.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _n_dims(dives):
    return dives[0].windows.n_dims if dives else 1


def cmd_transform(args, cfg: RunConfig) -> int:
    if not args.inputs:
        raise InputError("transform needs a raw CSV path")
    series = read_raw_csv(args.inputs[0])
    f = cfg.features
    dives = extract_dives(series, cfg.feature_config(), smooth_seconds=f.smooth_seconds,
                          depth_threshold_m=f.depth_threshold_m, min_duration_s=f.min_duration_s)
    if not dives:
        raise EmptyResult("no dives found in the record")
    out = _out_dir(args, cfg)
    write_features(out / "features.csv", dives)
    print(f"{len(dives)} dives, {sum(d.n_windows for d in dives)} windows -> {out / 'features.csv'}")
    return EXIT_OK


def _write_study(out: Path, report):
    rows = report.accuracy_table()
    cols = ["model", "train_min_mean", "train_min_sd", "dive_type", "subdive_state",
            "dive_acc_mean", "dive_acc_sd", "subdive_acc_mean", "subdive_acc_sd"]
    _write_csv(out / "accuracy.csv", cols, ([r[c] for c in cols] for r in rows))
    pcols = ["variant", "parameter", "truth", "mean_estimate", "bias", "empirical_se",
             "mean_estimated_se"]
    prow = []
    for v in report.variants:
        prow += [[v] + [r[c] for c in pcols[1:]] for r in report.parameter_table(v)]
    _write_csv(out / "parameters.csv", pcols, prow)
    rcols = ["replicate", "variant", "converged", "nll", "dive_accuracy", "subdive_accuracy",
             "fit_seconds", "se_flag", "error"]
    with open(out / "replicates.csv", "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(rcols)
        for r in report.records:
            w.writerow([_fmt(getattr(r, c)) if c not in ("se_flag", "error", "variant")
                        else (getattr(r, c) or "") for c in rcols])


def cmd_simulate(args, cfg: RunConfig) -> int:
    out = _out_dir(args, cfg)
    seed = args.seed if args.seed is not None else cfg.fit.seed
    n = args.n_dives if args.n_dives is not None else cfg.simulate.n_dives
    if args.study:
        reps = args.replicates if args.replicates is not None else cfg.simulate.replicates
        restarts = args.restarts if args.restarts is not None else cfg.simulate.study_restarts
        report = simulation_study(reps, n, VARIANTS, seed, restarts, n_jobs=args.threads)
        _write_study(out, report)
        print(report.format_accuracy_table())
        return EXIT_OK
    sc = SimConfig(n, design_params(), seed, cfg.features.window_seconds, cfg.features.h,
                   cfg.simulate.wiggle_law)
    ds = simulate(sc, raw=args.raw)
    _write_csv(out / "coarse.csv", ["dive_id", "dive_type", "duration_s"],
               ([t, int(x) + 1, y] for t, (x, y) in enumerate(zip(ds.coarse_states, ds.durations))))
    write_features(out / "features.csv", ds.dives)
    _write_csv(out / "truth.csv", ["dive_id", "window_idx", "dive_type", "subdive_state"],
               ([t, s, int(ds.coarse_states[t]) + 1, int(z) + 1]
                for t, zs in enumerate(ds.fine_states) for s, z in enumerate(zs)))
    if args.raw:
        rate = cfg.features.h / cfg.features.window_seconds
        _write_csv(out / "raw.csv", ["dive_id", "sample_idx", "time_s", "acc_x"],
                   ([t, i, i / rate, v] for t, curve in enumerate(ds.raw)
                    for i, v in enumerate(curve)))
    print(f"simulated {n} dives (seed {seed}) -> {out}")
    return EXIT_OK


def cmd_fit(args, cfg: RunConfig) -> int:
    if not args.inputs:
        raise InputError("fit needs a features CSV path")
    dives = read_features(args.inputs[0])
    spec = cfg.spec(_n_dims(dives))
    if spec.fine.use_wiggle and any(np.isnan(d.windows.wiggliness).any() for d in dives):
        raise InputError(f"variant {spec.name} needs wiggliness values for every window")
    restarts = args.restarts if args.restarts is not None else cfg.fit.restarts
    seed = args.seed if args.seed is not None else cfg.fit.seed
    res = fit(dives, spec, restarts=restarts, seed=seed, maxiter=cfg.fit.maxiter,
              n_jobs=args.threads)
    se = observed_fisher_se(res, dives)
    p = res.params
    summary = {
        "spec": spec_to_json(spec),
        "params": params_to_json(p),
        "nll": res.nll,
        "converged": res.converged,
        "grad_norm": res.grad_norm,
        "boundary": res.boundary,
        "n_evals": res.n_evals,
        "best_of_restarts": res.best_of_restarts,
        "se_flag": se.flag,
        "n_dives": len(dives),
        "n_windows": int(sum(d.n_windows for d in dives)),
        "fine_stationary": p.fine_deltas.tolist(),
        "restarts": res.restarts,
    }
    if spec.coarse.structure == "hmm":
        summary["coarse_stationary"] = p.coarse_delta.tolist()
    out = _out_dir(args, cfg)
    with open(out / "fit.json", "w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=2, default=float)
        fh.write("\n")
    skip_coarse = spec.coarse.structure == "iid"
    _write_csv(out / "se.csv", ["parameter", "estimate", "se"],
               ([n, e, s] for n, e, s in zip(se.names, se.estimates, se.se)
                if not (skip_coarse and n.startswith("coarse_gamma"))))
    print(f"{spec.name}: nll={res.nll:.6f} converged={res.converged} se_flag={se.flag}")
    return EXIT_OK if res.converged else EXIT_NOT_CONVERGED


def _load_pair(args):
    if len(args.inputs) != 2:
        raise InputError(f"{args.command} needs a features CSV and a fit.json")
    dives = read_features(args.inputs[0])
    params = read_fit_json(args.inputs[1])
    if _n_dims(dives) != params.spec.fine.n_dims:
        raise InputError("features and fit disagree on the number of mean channels")
    return dives, params


def cmd_decode(args, cfg: RunConfig) -> int:
    dives, params = _load_pair(args)
    cp, fp, data = decode_all(dives, params)
    # rounding guard so serialised rows sum to one
    cp = cp / cp.sum(axis=1, keepdims=True)
    fp = fp / fp.sum(axis=1, keepdims=True)
    N, K = cp.shape[1], fp.shape[1]
    clab = most_probable_states(cp)
    flab = most_probable_states(fp)
    header = (["dive_id"] + [f"p_divetype_{i + 1}" for i in range(N)] + ["window_idx"]
              + [f"p_subdive_{k + 1}" for k in range(K)] + ["divetype_label", "subdive_label"])

    def rows():
        for t, dv in enumerate(dives):
            a, b = data.offsets[t], data.offsets[t + 1]
            head = [dv.dive_id] + list(cp[t])
            if a == b:
                yield head + [-1] + [None] * K + [int(clab[t]) + 1, None]
            for w in range(a, b):
                yield head + [w - a] + list(fp[w]) + [int(clab[t]) + 1, int(flab[w]) + 1]

    out = _out_dir(args, cfg)
    _write_csv(out / "posteriors.csv", header, rows())
    summary = {
        "variant": params.spec.name,
        "loglik": hier_loglik(dives, params),
        "fine_stationary": params.fine_deltas.tolist(),
        "n_dives": len(dives),
        "n_windows": int(data.n_windows),
        "expected_dive_type_counts": cp.sum(axis=0).tolist(),
    }
    if params.spec.coarse.structure == "hmm":
        summary["coarse_stationary"] = params.coarse_delta.tolist()
    with open(out / "decode_summary.json", "w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=2)
        fh.write("\n")
    print(f"decoded {len(dives)} dives -> {out / 'posteriors.csv'}")
    return EXIT_OK


def cmd_diagnose(args, cfg: RunConfig) -> int:
    dives, params = _load_pair(args)
    spec = params.spec
    families = [("duration", 0)] + [("avg", c) for c in range(spec.fine.n_dims)]
    if spec.fine.use_wiggle:
        families.append(("wiggle", 0))
    ids = np.array([d.dive_id for d in dives])
    res_rows = []
    summary = {"variant": spec.name, "families": {}}
    for which, ch in families:
        r = pseudoresiduals(dives, params, which, channel=ch)
        name = which if which != "avg" else f"avg_{ch + 1}"
        for v, c, o, t, s in zip(r.values, r.cdf, r.observations, r.dive_index, r.window_index):
            res_rows.append([name, ids[t], s, o, c, v])
        ok = r.values[np.isfinite(r.values)]
        summary["families"][name] = {
            "n": int(ok.size),
            "n_undefined": int(np.isnan(r.values).sum()),
            "n_flagged": int(r.flagged.sum()),
            "ks_distance": float(kstest(ok, "norm").statistic) if ok.size else None,
            "skewness": float(skew(ok)) if ok.size > 2 else None,
        }
    out = _out_dir(args, cfg)
    _write_csv(out / "residuals.csv",
               ["family", "dive_id", "window_idx", "observation", "cdf", "residual"], res_rows)
    hw = histogram_weights(dives, params)
    data_offsets = np.concatenate([[0], np.cumsum([d.n_windows for d in dives])])
    dive_of = np.repeat(np.arange(len(dives)), np.diff(data_offsets))
    win_idx = np.arange(data_offsets[-1]) - data_offsets[dive_of]
    M = max(spec.coarse.n_states, spec.fine.n_states)

    def pad(w):
        return list(w) + [None] * (M - len(w))

    def rows():
        obs, w = hw["duration"]
        for t in range(len(dives)):
            yield ["duration", ids[t], -1, obs[t]] + pad(w[t])
        obs, w = hw["avg"]
        for c in range(obs.shape[1]):
            for n in range(obs.shape[0]):
                yield [f"avg_{c + 1}", ids[dive_of[n]], win_idx[n], obs[n, c]] + pad(w[n])
        if "wiggle" in hw:
            obs, w = hw["wiggle"]
            for n in range(obs.shape[0]):
                yield ["wiggle", ids[dive_of[n]], win_idx[n], obs[n]] + pad(w[n])

    _write_csv(out / "histogram_weights.csv",
               ["family", "dive_id", "window_idx", "observation"]
               + [f"weight_{m + 1}" for m in range(M)], rows())
    with open(out / "diagnose_summary.json", "w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=2)
        fh.write("\n")
    for name, s in summary["families"].items():
        print(f"{name:<10} n={s['n']:<6} KS={s['ks_distance']:.4f} skew={s['skewness']:.3f}")
    return EXIT_OK


COMMANDS = {"transform": cmd_transform, "simulate": cmd_simulate, "fit": cmd_fit,
            "decode": cmd_decode, "diagnose": cmd_diagnose}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="carhhmm", description=__doc__.split("\n")[0])
    ap.add_argument("command", choices=sorted(COMMANDS))
    ap.add_argument("inputs", nargs="*", help="input files for the command")
    ap.add_argument("--config", help="YAML run configuration")
    ap.add_argument("--seed", type=int, help="random seed (unsigned 64-bit)")
    ap.add_argument("--out", help="output directory")
    ap.add_argument("--variant", choices=VARIANTS, help="model preset")
    ap.add_argument("--restarts", type=int, help="random restarts for fitting")
    ap.add_argument("--threads", type=int, help="worker processes (env HHMM_THREADS)")
    ap.add_argument("--raw", action="store_true", help="simulate: also write raw curves")
    ap.add_argument("--study", action="store_true", help="simulate: run the replicated study")
    ap.add_argument("--replicates", type=int, help="simulate --study: number of replicates")
    ap.add_argument("--n-dives", type=int, help="simulate: dives per dataset (default 100)")
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.seed is not None and not 0 <= args.seed < 2**64:
            raise InputError("seed must be an unsigned 64-bit integer")
        if args.threads is None:
            env = os.environ.get("HHMM_THREADS")
            try:
                args.threads = int(env) if env else 1
            except ValueError:
                raise InputError(f"HHMM_THREADS must be an integer, got {env!r}") from None
        if args.threads < 1:
            raise InputError("threads must be at least 1")
        if args.restarts is not None and args.restarts < 0:
            raise InputError("restarts must be non-negative")
        cfg = RunConfig.load(args.config)
        if args.variant:
            cfg.model.variant = args.variant
        return COMMANDS[args.command](args, cfg)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except EmptyResult as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_EMPTY
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
