"""Likelihoods for hierarchical state-switching models of curve sequences.

A coarse Markov chain over dive types emits one Gamma-distributed duration per
dive together with a whole fine-scale (Car)HMM realisation over the dive's
windows. Four named variants are provided::

    carhhmm-dft  coarse HMM, fine CarHMM on the window mean + Gamma wiggliness
    hhmm-dft     coarse HMM, fine HMM (no autoregression) on both features
    carhhmm      coarse HMM, fine CarHMM on the window mean only
    carhmm-dft   independent dives of a single type, fine CarHMM on both features

All recursions run in log space.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

from . import _recursions as rec
from .features import DiveRecord, WindowFeatures
from .numkernels import gamma_logpdf, normal_logpdf, stationary

VARIANTS = ("carhhmm-dft", "hhmm-dft", "carhhmm", "carhmm-dft")


@dataclass(frozen=True)
class CoarseSpec:
    n_states: int = 2
    structure: str = "hmm"

    def __post_init__(self):
        if self.structure not in ("hmm", "iid"):
            raise ValueError(f"unknown coarse structure {self.structure!r}")
        if self.n_states < 1:
            raise ValueError("need at least one coarse state")
        if self.structure == "iid" and self.n_states != 1:
            raise ValueError("iid coarse structure has exactly one dive type")


@dataclass(frozen=True)
class FineSpec:
    n_states: int = 2
    n_dims: int = 1
    use_car: bool = True
    use_wiggle: bool = True
    shared_across_coarse: bool = True
    # With autoregression the first window's mean is a fixed initial value. Its
    # wiggliness has nothing to initialise and is modelled unless this is False.
    first_wiggle: bool = True

    def __post_init__(self):
        if self.n_states < 1 or self.n_dims < 1:
            raise ValueError("n_states and n_dims must be positive")


@dataclass(frozen=True)
class ModelSpec:
    coarse: CoarseSpec = CoarseSpec()
    fine: FineSpec = FineSpec()
    name: str = "custom"

    @classmethod
    def variant(cls, name: str, n_coarse: int = 2, n_fine: int = 2, n_dims: int = 1,
                shared_fine: bool = True) -> "ModelSpec":
        name = name.lower()
        if name not in VARIANTS:
            raise ValueError(f"unknown variant {name!r}; choose from {VARIANTS}")
        if name == "carhmm-dft":
            coarse = CoarseSpec(1, "iid")
        else:
            coarse = CoarseSpec(n_coarse, "hmm")
        fine = FineSpec(
            n_states=n_fine,
            n_dims=n_dims,
            use_car=name != "hhmm-dft",
            use_wiggle=name != "carhhmm",
            shared_across_coarse=shared_fine,
        )
        return cls(coarse, fine, name)

    @property
    def n_groups(self) -> int:
        """Number of distinct fine emission parameter sets."""
        return 1 if self.fine.shared_across_coarse else self.coarse.n_states

    def group_of(self, i: int) -> int:
        return 0 if self.fine.shared_across_coarse else i


@dataclass
class HierModelParams:
    """Natural-scale parameters of a hierarchical model.

    Shapes, with ``N`` coarse states, ``K`` fine states, ``d`` mean channels and
    ``G`` fine emission groups (1 when shared across coarse states, else ``N``)::

        coarse_gamma (N, N)   coarse_mean, coarse_sd (N,)
        fine_gammas (N, K, K)
        avg_mean, avg_sd (G, K, d)   phi (G, K)   wiggle_mean, wiggle_sd (G, K)

    ``phi`` is all zeros for models without autoregression and the wiggliness
    arrays are ``None`` for models that ignore it.
    """

    spec: ModelSpec
    coarse_gamma: np.ndarray
    coarse_mean: np.ndarray
    coarse_sd: np.ndarray
    fine_gammas: np.ndarray
    avg_mean: np.ndarray
    avg_sd: np.ndarray
    phi: np.ndarray | None = None
    wiggle_mean: np.ndarray | None = None
    wiggle_sd: np.ndarray | None = None

    def __post_init__(self):
        s = self.spec
        N, K, d, G = s.coarse.n_states, s.fine.n_states, s.fine.n_dims, s.n_groups
        self.coarse_gamma = np.asarray(self.coarse_gamma, dtype=float).reshape(N, N)
        self.coarse_mean = np.asarray(self.coarse_mean, dtype=float).reshape(N)
        self.coarse_sd = np.asarray(self.coarse_sd, dtype=float).reshape(N)
        self.fine_gammas = np.asarray(self.fine_gammas, dtype=float).reshape(N, K, K)
        self.avg_mean = np.asarray(self.avg_mean, dtype=float).reshape(G, K, d)
        self.avg_sd = np.asarray(self.avg_sd, dtype=float).reshape(G, K, d)
        if self.phi is None or not s.fine.use_car:
            self.phi = np.zeros((G, K))
        else:
            self.phi = np.asarray(self.phi, dtype=float).reshape(G, K)
        if s.fine.use_wiggle:
            if self.wiggle_mean is None or self.wiggle_sd is None:
                raise ValueError(f"variant {s.name} needs wiggliness parameters")
            self.wiggle_mean = np.asarray(self.wiggle_mean, dtype=float).reshape(G, K)
            self.wiggle_sd = np.asarray(self.wiggle_sd, dtype=float).reshape(G, K)
        else:
            self.wiggle_mean = self.wiggle_sd = None
        for g in [self.coarse_gamma, *self.fine_gammas]:
            if np.any(g < 0) or not np.allclose(g.sum(axis=1), 1.0, atol=1e-10):
                raise ValueError("transition matrices must be row-stochastic")
        if np.any(self.coarse_mean <= 0) or np.any(self.coarse_sd <= 0):
            raise ValueError("coarse Gamma mean and sd must be positive")
        if np.any(self.avg_sd <= 0):
            raise ValueError("avg_sd must be positive")
        if np.any((self.phi < 0) | (self.phi > 1)):
            raise ValueError("phi must lie in [0, 1]")
        if s.fine.use_wiggle and (np.any(self.wiggle_mean <= 0) or np.any(self.wiggle_sd <= 0)):
            raise ValueError("wiggliness Gamma mean and sd must be positive")

    @property
    def coarse_delta(self) -> np.ndarray:
        return stationary(self.coarse_gamma)

    @property
    def fine_deltas(self) -> np.ndarray:
        return np.array([stationary(g) for g in self.fine_gammas])

    def copy(self) -> "HierModelParams":
        def c(a):
            return None if a is None else np.array(a, copy=True)
        return replace(self, coarse_gamma=c(self.coarse_gamma), coarse_mean=c(self.coarse_mean),
                       coarse_sd=c(self.coarse_sd), fine_gammas=c(self.fine_gammas),
                       avg_mean=c(self.avg_mean), avg_sd=c(self.avg_sd), phi=c(self.phi),
                       wiggle_mean=c(self.wiggle_mean), wiggle_sd=c(self.wiggle_sd))

    def permuted(self, coarse_perm=None, fine_perm=None) -> "HierModelParams":
        """Relabel states; new state ``j`` is old state ``perm[j]``."""
        p = self.copy()
        s = self.spec
        if coarse_perm is not None:
            cp = np.asarray(coarse_perm)
            p.coarse_gamma = p.coarse_gamma[np.ix_(cp, cp)]
            p.coarse_mean = p.coarse_mean[cp]
            p.coarse_sd = p.coarse_sd[cp]
            p.fine_gammas = p.fine_gammas[cp]
            if not s.fine.shared_across_coarse:
                p.avg_mean, p.avg_sd, p.phi = p.avg_mean[cp], p.avg_sd[cp], p.phi[cp]
                if s.fine.use_wiggle:
                    p.wiggle_mean, p.wiggle_sd = p.wiggle_mean[cp], p.wiggle_sd[cp]
        if fine_perm is not None:
            fp = np.asarray(fine_perm)
            p.fine_gammas = p.fine_gammas[:, fp][:, :, fp]
            p.avg_mean, p.avg_sd, p.phi = p.avg_mean[:, fp], p.avg_sd[:, fp], p.phi[:, fp]
            if s.fine.use_wiggle:
                p.wiggle_mean, p.wiggle_sd = p.wiggle_mean[:, fp], p.wiggle_sd[:, fp]
        return p


@dataclass
class DiveData:
    """Dives stacked into flat window arrays, the layout every recursion consumes."""

    dive_ids: np.ndarray
    durations: np.ndarray  # (T,)
    offsets: np.ndarray  # (T + 1,)
    avg: np.ndarray  # (W, d)
    prev_avg: np.ndarray  # (W, d), row of the previous window in the same dive
    wiggle: np.ndarray  # (W,)
    first: np.ndarray  # (W,) bool, first window of its dive
    dive_of: np.ndarray = field(default=None)  # (W,) dive index of each window

    @property
    def n_dives(self) -> int:
        return self.durations.shape[0]

    @property
    def n_windows(self) -> int:
        return self.avg.shape[0]

    def window_counts(self) -> np.ndarray:
        return np.diff(self.offsets)

    def split(self, values: np.ndarray) -> list[np.ndarray]:
        """Cut a per-window array into one block per dive."""
        return [values[a:b] for a, b in zip(self.offsets[:-1], self.offsets[1:])]


def stack_dives(dives: Sequence[DiveRecord] | DiveData, n_dims: int | None = None) -> DiveData:
    if isinstance(dives, DiveData):
        return dives
    dives = list(dives)
    if not dives:
        raise ValueError("need at least one dive")
    if n_dims is None:
        n_dims = max(dv.windows.n_dims for dv in dives)
    counts = []
    for dv in dives:
        if dv.n_windows and dv.windows.n_dims != n_dims:
            raise ValueError(
                f"dive {dv.dive_id}: {dv.windows.n_dims} mean channels, expected {n_dims}"
            )
        if not np.isfinite(dv.duration_s):
            raise ValueError(f"dive {dv.dive_id}: non-finite duration")
        if dv.n_windows and not np.all(np.isfinite(dv.windows.avg)):
            raise ValueError(f"dive {dv.dive_id}: non-finite window mean")
        counts.append(dv.n_windows)
    offsets = np.concatenate([[0], np.cumsum(counts)]).astype(np.int64)
    W = int(offsets[-1])
    avg = np.zeros((W, n_dims))
    wiggle = np.zeros(W)
    for dv, a, b in zip(dives, offsets[:-1], offsets[1:]):
        if b > a:
            avg[a:b] = dv.windows.avg
            wiggle[a:b] = dv.windows.wiggliness
    first = np.zeros(W, dtype=bool)
    first[offsets[:-1][np.asarray(counts) > 0]] = True
    prev_avg = np.empty_like(avg)
    if W:
        prev_avg[1:] = avg[:-1]
        prev_avg[0] = avg[0]
        prev_avg[first] = avg[first]
    dive_of = np.repeat(np.arange(len(dives)), counts)
    return DiveData(
        dive_ids=np.array([dv.dive_id for dv in dives]),
        durations=np.array([dv.duration_s for dv in dives], dtype=float),
        offsets=offsets,
        avg=avg,
        prev_avg=prev_avg,
        wiggle=wiggle,
        first=first,
        dive_of=dive_of,
    )


def _log(a):
    with np.errstate(divide="ignore"):
        return np.log(a)


# -- emission terms ---------------------------------------------------------

def coarse_log_emissions(data: DiveData, params: HierModelParams) -> np.ndarray:
    """``(T, N)`` Gamma log-densities of dive durations."""
    return gamma_logpdf(data.durations[:, None], mean=params.coarse_mean[None, :],
                        sd=params.coarse_sd[None, :])


def fine_avg_conditional_mean(data: DiveData, params: HierModelParams) -> np.ndarray:
    """``(G, W, K, d)`` conditional means of each window's average."""
    mu = params.avg_mean[:, None, :, :]
    if not params.spec.fine.use_car:
        return np.broadcast_to(mu, (mu.shape[0], data.n_windows) + mu.shape[2:])
    phi = params.phi[:, None, :, None]
    return phi * data.prev_avg[None, :, None, :] + (1.0 - phi) * mu


def fine_log_emission_parts(data: DiveData, params: HierModelParams):
    """Per-window log-density terms, kept separate for leave-one-out diagnostics.

    Returns ``(avg_part, wiggle_part)`` with shapes ``(G, W, K, d)`` and
    ``(G, W, K)``; ``wiggle_part`` is ``None`` when wiggliness is not modelled.
    Terms that the model does not include (the first window's mean under
    autoregression) are zero.
    """
    fs = params.spec.fine
    cm = fine_avg_conditional_mean(data, params)
    avg_part = normal_logpdf(data.avg[None, :, None, :], cm, params.avg_sd[:, None, :, :])
    if fs.use_car:
        avg_part = np.where(data.first[None, :, None, None], 0.0, avg_part)
    wig_part = None
    if fs.use_wiggle:
        wig_part = gamma_logpdf(data.wiggle[None, :, None], mean=params.wiggle_mean[:, None, :],
                                sd=params.wiggle_sd[:, None, :])
        if fs.use_car and not fs.first_wiggle:
            wig_part = np.where(data.first[None, :, None], 0.0, wig_part)
    return avg_part, wig_part


def fine_log_emissions(data: DiveData, params: HierModelParams) -> np.ndarray:
    avg_part, wig_part = fine_log_emission_parts(data, params)
    out = avg_part.sum(axis=-1)
    if wig_part is not None:
        out = out + wig_part
    return out


def fine_logliks(data: DiveData, params: HierModelParams, log_emis=None) -> np.ndarray:
    """``(T, N)`` fine-scale log-likelihood of each dive under each coarse state."""
    spec = params.spec
    if log_emis is None:
        log_emis = fine_log_emissions(data, params)
    N = spec.coarse.n_states
    out = np.empty((data.n_dives, N))
    deltas = params.fine_deltas
    for i in range(N):
        out[:, i] = rec.forward_loglik(
            np.ascontiguousarray(log_emis[spec.group_of(i)]), data.offsets,
            _log(params.fine_gammas[i]), _log(deltas[i]),
        )
    return out


def dive_log_emissions(data: DiveData, params: HierModelParams) -> np.ndarray:
    """``(T, N)`` log of the coarse diagonal entries: duration density times fine likelihood."""
    return coarse_log_emissions(data, params) + fine_logliks(data, params)


# -- public likelihoods -----------------------------------------------------

def _check_no_nan(log_emis: np.ndarray):
    bad = np.isnan(log_emis).any(axis=1)
    if bad.any():
        raise ValueError(f"NaN emission density at index {int(np.flatnonzero(bad)[0])}")


def _single_forward(log_emis: np.ndarray, gamma) -> float:
    gamma = np.asarray(gamma, dtype=float)
    offsets = np.array([0, log_emis.shape[0]], dtype=np.int64)
    return float(rec.forward_loglik(np.ascontiguousarray(log_emis, dtype=float), offsets,
                                    _log(gamma), _log(stationary(gamma)))[0])


def hmm_loglik(y, gamma, log_emission: Callable) -> float:
    """Log-likelihood of an HMM started from the stationary distribution of ``gamma``.

    ``log_emission(y_t)`` must return the length-N vector of state log-densities.
    """
    y = list(y)
    if not y:
        raise ValueError("need a nonempty emission sequence")
    log_emis = np.array([np.asarray(log_emission(v), dtype=float) for v in y])
    _check_no_nan(log_emis)
    return _single_forward(log_emis, gamma)


def carhmm_loglik(y, gamma, log_emission: Callable) -> float:
    """Log-likelihood of a CarHMM; ``log_emission(y_t, y_prev)`` gives state log-densities.

    The first observation only conditions the second and contributes no density,
    so a single observation has log-likelihood 0.
    """
    y = list(y)
    if not y:
        raise ValueError("need a nonempty emission sequence")
    if len(y) == 1:
        return 0.0
    n = np.asarray(gamma).shape[0]
    log_emis = np.vstack([np.zeros(n)] + [np.asarray(log_emission(y[t], y[t - 1]), dtype=float)
                                          for t in range(1, len(y))])
    _check_no_nan(log_emis)
    return _single_forward(log_emis, gamma)


def fine_loglik(windows: WindowFeatures, fine_gamma, params: HierModelParams,
                group: int = 0) -> float:
    """Fine-scale log-likelihood of one dive's windows under one transition matrix."""
    dive = DiveRecord(0, 1.0, windows)
    data = stack_dives([dive], params.spec.fine.n_dims)
    if data.n_windows == 0:
        return 0.0
    log_emis = fine_log_emissions(data, params)[group]
    _check_no_nan(log_emis)
    return _single_forward(log_emis, fine_gamma)


def hier_loglik(dives, params: HierModelParams) -> float:
    """Log-likelihood of a sequence of dives under the full hierarchical model."""
    data = stack_dives(dives, params.spec.fine.n_dims)
    log_emis = dive_log_emissions(data, params)
    if np.isnan(log_emis).any():
        bad = int(np.flatnonzero(np.isnan(log_emis).any(axis=1))[0])
        raise ValueError(f"NaN likelihood term for dive {data.dive_ids[bad]}")
    offsets = np.array([0, data.n_dives], dtype=np.int64)
    return float(rec.forward_loglik(log_emis, offsets, _log(params.coarse_gamma),
                                    _log(params.coarse_delta))[0])
