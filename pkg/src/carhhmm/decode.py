"""State decoding and model diagnostics.

Posterior state probabilities come from log-space forward-backward recursions
at both scales. Fine-scale posteriors are marginalised over dive types:

    Pr(fine state k | data) = sum_i Pr(dive type i | data) Pr(fine state k | dive, type i)

Pseudoresiduals use the leave-one-out conditional distribution of each
observation: its own density factor is removed from the recursions, the
remaining data give posterior weights over the relevant states, and the
weighted mixture CDF at the observation is mapped through the standard Normal
quantile function.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import gammainc
from scipy.stats import norm

from . import _recursions as rec
from .models import (DiveData, HierModelParams, coarse_log_emissions, fine_avg_conditional_mean,
                     fine_log_emission_parts, stack_dives)
from .numkernels import gamma_shape_scale, log_sum_exp_axis


def _log(a):
    with np.errstate(divide="ignore"):
        return np.log(a)


@dataclass
class _Pass:
    """Everything the forward-backward passes produce, shared by the public functions."""

    data: DiveData
    params: HierModelParams
    coarse_emis: np.ndarray  # (T, N) duration log-densities
    fine_ll: np.ndarray  # (T, N)
    coarse_pred: np.ndarray  # (T, N) log predicted forward (before dive t's emission)
    coarse_beta: np.ndarray  # (T, N)
    fine_emis: np.ndarray  # (G, W, K)
    fine_alpha: np.ndarray  # (N, W, K)
    fine_pred: np.ndarray  # (N, W, K)
    fine_beta: np.ndarray  # (N, W, K)
    loglik: float


def _run(dives, params: HierModelParams) -> _Pass:
    spec = params.spec
    data = stack_dives(dives, spec.fine.n_dims)
    N, K, W = spec.coarse.n_states, spec.fine.n_states, data.n_windows
    avg_part, wig_part = fine_log_emission_parts(data, params)
    fine_emis = avg_part.sum(axis=-1)
    if wig_part is not None:
        fine_emis = fine_emis + wig_part
    deltas = params.fine_deltas
    fa = np.empty((N, W, K))
    fp = np.empty((N, W, K))
    fb = np.empty((N, W, K))
    fine_ll = np.zeros((data.n_dives, N))
    counts = data.window_counts()
    has = counts > 0
    last = data.offsets[1:][has] - 1
    for i in range(N):
        le = np.ascontiguousarray(fine_emis[spec.group_of(i)])
        lg, ld = _log(params.fine_gammas[i]), _log(deltas[i])
        a, b = rec.forward_backward(le, data.offsets, lg, ld)
        fa[i], fb[i] = a, b
        fp[i] = rec.predicted_log_alpha(a, data.offsets, lg, ld)
        fine_ll[has, i] = log_sum_exp_axis(a[last], axis=-1)
    cemis = coarse_log_emissions(data, params)
    dive_emis = cemis + fine_ll
    offs = np.array([0, data.n_dives], dtype=np.int64)
    lg, ld = _log(params.coarse_gamma), _log(params.coarse_delta)
    ca, cb = rec.forward_backward(dive_emis, offs, lg, ld)
    cp = rec.predicted_log_alpha(ca, offs, lg, ld)
    loglik = float(log_sum_exp_axis(ca[-1]))
    return _Pass(data, params, cemis, fine_ll, cp, cb, fine_emis, fa, fp, fb, loglik)


def _normalise(logw):
    return np.exp(logw - log_sum_exp_axis(logw, axis=-1)[..., None])


def coarse_posterior(dives, params: HierModelParams, _pass: _Pass | None = None) -> np.ndarray:
    """``(T, N)`` smoothing probabilities of each dive type."""
    p = _pass or _run(dives, params)
    logw = p.coarse_pred + p.coarse_emis + p.fine_ll + p.coarse_beta
    return _normalise(logw)


def _fine_conditional(p: _Pass) -> np.ndarray:
    """``(N, W, K)`` fine posteriors within each dive, conditional on its dive type."""
    logw = p.fine_alpha + p.fine_beta
    return np.exp(logw - log_sum_exp_axis(logw, axis=-1)[..., None])


def fine_posterior(dives, params: HierModelParams, coarse: np.ndarray | None = None,
                   _pass: _Pass | None = None, flat: bool = False):
    """Per-dive ``(n_windows, K)`` probabilities of each subdive state.

    With ``flat=True`` a single ``(W, K)`` array over all windows is returned.
    """
    p = _pass or _run(dives, params)
    if coarse is None:
        coarse = coarse_posterior(None, params, p)
    cond = _fine_conditional(p)
    w = coarse[p.data.dive_of]  # (W, N)
    out = np.einsum("wn,nwk->wk", w, cond)
    out /= out.sum(axis=1, keepdims=True)
    return out if flat else p.data.split(out)


def decoding_accuracy(posterior, truth) -> float:
    """Mean posterior probability assigned to the true state.

    ``posterior`` is a ``(n, K)`` array or a list of per-dive arrays; ``truth``
    matches it position for position.
    """
    if isinstance(posterior, (list, tuple)):
        if len(posterior) != len(truth):
            raise ValueError("posterior and truth cover different numbers of dives")
        blocks = [np.asarray(q, dtype=float) for q in posterior]
        k = max((b.shape[-1] for b in blocks if b.ndim == 2), default=1)
        post = np.vstack([b.reshape(-1, k) for b in blocks])
        truth = np.concatenate([np.asarray(t, dtype=int).ravel() for t in truth])
    else:
        post = np.asarray(posterior, dtype=float)
        truth = np.asarray(truth, dtype=int).ravel()
    if post.shape[0] != truth.shape[0]:
        raise ValueError(f"posterior has {post.shape[0]} rows but truth has {truth.shape[0]}")
    if post.shape[0] == 0:
        raise ValueError("nothing to score")
    if truth.min() < 0 or truth.max() >= post.shape[1]:
        raise ValueError("true state index outside the posterior's state range")
    return float(np.mean(post[np.arange(truth.size), truth]))


def most_probable_states(posterior) -> np.ndarray:
    """Per-position argmax; ties resolve to the lowest state index."""
    return np.argmax(np.asarray(posterior), axis=-1)


# -- pseudoresiduals ------------------------------------------------------------

@dataclass
class Pseudoresiduals:
    kind: str
    values: np.ndarray  # standard Normal scale, NaN where undefined
    cdf: np.ndarray
    observations: np.ndarray
    dive_index: np.ndarray
    window_index: np.ndarray  # -1 for dive-level observations

    @property
    def flagged(self) -> np.ndarray:
        """Positions where the conditional CDF was numerically 0 or 1."""
        return np.isinf(self.values)

    @property
    def defined(self) -> np.ndarray:
        return ~np.isnan(self.values)


def _gamma_cdf(x, mean, sd):
    shape, scale = gamma_shape_scale(mean, sd)
    return gammainc(shape, np.maximum(x, 0.0) / scale)


def _to_residual(cdf):
    cdf = np.clip(cdf, 0.0, 1.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        return norm.ppf(cdf)


def _fine_joint_weights(p: _Pass, other_emis: np.ndarray) -> np.ndarray:
    """``(W, N, K)`` weights over (dive type, subdive state) for each window.

    ``other_emis`` is the ``(G, W, K)`` log emission of each window without the
    target factor. Everything else in the data enters through the recursions.
    """
    spec = p.params.spec
    N = spec.coarse.n_states
    data = p.data
    d = data.dive_of
    out = np.empty((data.n_windows, N, p.fine_emis.shape[-1]))
    for i in range(N):
        g = spec.group_of(i)
        # fine likelihood of the rest of dive t, including the retained parts of window s
        loc = p.fine_pred[i] + p.fine_beta[i] + other_emis[g]
        coarse_part = p.coarse_pred[d, i] + p.coarse_beta[d, i] + p.coarse_emis[d, i]
        out[:, i, :] = loc + coarse_part[:, None]
    if out.shape[0] == 0:
        return out
    flat = out.reshape(out.shape[0], -1)
    flat = np.exp(flat - log_sum_exp_axis(flat, axis=-1)[:, None])
    return flat.reshape(out.shape)


def pseudoresiduals(dives, params: HierModelParams, which: str = "duration",
                    channel: int = 0) -> Pseudoresiduals:
    """Leave-one-out pseudoresiduals for one family of observations.

    ``which`` is ``"duration"`` (one per dive), ``"avg"`` (window means, one
    channel at a time) or ``"wiggle"``. Under autoregression the first window's
    mean is a fixed initial value, so its residual is NaN.
    """
    p = _run(dives, params)
    data = p.data
    spec = params.spec
    if which == "duration":
        logw = p.coarse_pred + p.fine_ll + p.coarse_beta
        w = np.exp(logw - log_sum_exp_axis(logw, axis=-1)[:, None])
        F = _gamma_cdf(data.durations[:, None], params.coarse_mean[None], params.coarse_sd[None])
        cdf = np.sum(w * F, axis=1)
        return Pseudoresiduals("duration", _to_residual(cdf), cdf, data.durations.copy(),
                               np.arange(data.n_dives), np.full(data.n_dives, -1))

    avg_part, wig_part = fine_log_emission_parts(data, params)
    full = avg_part.sum(axis=-1) + (0.0 if wig_part is None else wig_part)
    win_idx = np.arange(data.n_windows) - data.offsets[data.dive_of]
    N = spec.coarse.n_states
    G = spec.n_groups
    if which == "wiggle":
        if not spec.fine.use_wiggle:
            raise ValueError(f"variant {spec.name} does not model wiggliness")
        other = full - wig_part
        F = _gamma_cdf(data.wiggle[None, :, None], params.wiggle_mean[:, None, :],
                       params.wiggle_sd[:, None, :])  # (G, W, K)
        obs = data.wiggle.copy()
        undefined = np.zeros(data.n_windows, dtype=bool)
        if spec.fine.use_car and not spec.fine.first_wiggle:
            undefined = data.first.copy()
    elif which == "avg":
        if not 0 <= channel < spec.fine.n_dims:
            raise ValueError(f"channel {channel} out of range")
        other = full - avg_part[..., channel]
        cm = fine_avg_conditional_mean(data, params)[..., channel]  # (G, W, K)
        F = norm.cdf(data.avg[None, :, None, channel], cm, params.avg_sd[:, None, :, channel])
        obs = data.avg[:, channel].copy()
        undefined = data.first.copy() if spec.fine.use_car else np.zeros(data.n_windows, bool)
    else:
        raise ValueError(f"unknown pseudoresidual family {which!r}")
    w = _fine_joint_weights(p, other)  # (W, N, K)
    Fg = np.stack([F[spec.group_of(i)] for i in range(N)], axis=1) if G > 1 else F[0][:, None, :]
    cdf = np.sum(w * Fg, axis=(1, 2))
    res = _to_residual(cdf)
    res[undefined] = np.nan
    cdf[undefined] = np.nan
    return Pseudoresiduals(which, res, cdf, obs, data.dive_of.copy(), win_idx)


def histogram_weights(dives, params: HierModelParams) -> dict:
    """Observation / posterior-weight pairs for state-weighted empirical histograms.

    Returns ``{"duration": (obs, (T, N) weights), "wiggle": (obs, (W, K)),
    "avg": (obs (W, d), (W, K))}``; keys for unmodelled features are omitted.
    """
    p = _run(dives, params)
    cp = coarse_posterior(None, params, p)
    fp = fine_posterior(None, params, cp, p, flat=True)
    out = {"duration": (p.data.durations.copy(), cp), "avg": (p.data.avg.copy(), fp)}
    if params.spec.fine.use_wiggle:
        out["wiggle"] = (p.data.wiggle.copy(), fp)
    return out


def decode_all(dives, params: HierModelParams):
    """Coarse ``(T, N)`` and flat fine ``(W, K)`` posteriors from a single pass."""
    p = _run(dives, params)
    cp = coarse_posterior(None, params, p)
    fp = fine_posterior(None, params, cp, p, flat=True)
    return cp, fp, p.data
