"""Scalar and vector primitives shared by the likelihood, decoding and simulation code.

Everything here is a pure function of its inputs. Densities are returned on the
log scale and evaluate to ``-inf`` outside their support instead of raising, so
that likelihood code can compose them without special cases.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .exceptions import DomainError, SingularChainError

LOG_2PI = np.log(2.0 * np.pi)


@dataclass(frozen=True)
class GammaMeanSd:
    """Gamma distribution parameterised by its mean and standard deviation."""

    mean: float
    sd: float

    def __post_init__(self):
        if not (self.mean > 0 and self.sd > 0):
            raise ValueError(f"Gamma mean and sd must be positive, got {self.mean}, {self.sd}")

    @property
    def shape(self) -> float:
        return (self.mean / self.sd) ** 2

    @property
    def scale(self) -> float:
        return self.sd**2 / self.mean


@dataclass(frozen=True)
class CarNormalParams:
    """Conditionally autoregressive Normal emission for a d-dimensional observation."""

    mean: np.ndarray
    sd: np.ndarray
    phi: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "mean", np.atleast_1d(np.asarray(self.mean, dtype=float)))
        object.__setattr__(self, "sd", np.atleast_1d(np.asarray(self.sd, dtype=float)))
        if self.mean.shape != self.sd.shape:
            raise ValueError("mean and sd must have the same dimension")
        if np.any(self.sd <= 0):
            raise ValueError("all sd components must be positive")
        if not 0.0 <= self.phi <= 1.0:
            raise ValueError(f"phi must lie in [0, 1], got {self.phi}")


def log_sum_exp(values) -> float:
    """Return ``log(sum(exp(values)))`` without overflow.

    The largest element is factored out before exponentiating, so the result is
    exact when one term dominates. All ``-inf`` inputs give ``-inf``.
    """
    v = np.asarray(values, dtype=float).ravel()
    if v.size == 0:
        raise ValueError("log_sum_exp needs at least one value")
    m = v.max()
    if not np.isfinite(m):
        return float(m)
    return float(m + np.log(np.exp(v - m).sum()))


def log_sum_exp_axis(a: np.ndarray, axis: int = -1) -> np.ndarray:
    """Vectorised log-sum-exp along ``axis``; rows of all ``-inf`` give ``-inf``."""
    a = np.asarray(a, dtype=float)
    m = np.max(a, axis=axis, keepdims=True)
    safe = np.where(np.isfinite(m), m, 0.0)
    with np.errstate(divide="ignore"):
        out = np.log(np.sum(np.exp(a - safe), axis=axis, keepdims=True)) + safe
    return np.squeeze(out, axis=axis)


def eta_to_gamma(etas) -> np.ndarray:
    """Map unconstrained working parameters to a row-stochastic matrix (row softmax).

    The diagonal of ``etas`` is ignored and treated as zero.
    """
    eta = np.array(etas, dtype=float, copy=True)
    if eta.ndim != 2 or eta.shape[0] != eta.shape[1]:
        raise ValueError(f"etas must be square, got shape {eta.shape}")
    np.fill_diagonal(eta, 0.0)
    eta -= eta.max(axis=1, keepdims=True)
    g = np.exp(eta)
    return g / g.sum(axis=1, keepdims=True)


def gamma_to_eta(gamma) -> np.ndarray:
    """Inverse of :func:`eta_to_gamma` with the diagonal as reference category."""
    g = np.asarray(gamma, dtype=float)
    if g.ndim != 2 or g.shape[0] != g.shape[1]:
        raise ValueError(f"gamma must be square, got shape {g.shape}")
    if np.any(g <= 0):
        raise DomainError("gamma_to_eta needs strictly positive transition probabilities")
    eta = np.log(g) - np.log(np.diag(g))[:, None]
    np.fill_diagonal(eta, 0.0)
    return eta


def stationary(gamma) -> np.ndarray:
    """Stationary row vector ``delta`` with ``delta @ gamma == delta`` and unit sum.

    Solves ``delta (I - Gamma + U) = 1`` where ``U`` is the all-ones matrix, which is
    nonsingular exactly when the chain has a unique stationary distribution.
    """
    g = np.asarray(gamma, dtype=float)
    n = g.shape[0]
    if g.shape != (n, n):
        raise ValueError(f"gamma must be square, got shape {g.shape}")
    a = np.eye(n) - g + np.ones((n, n))
    try:
        cond = np.linalg.cond(a)
        if not np.isfinite(cond) or cond > 1e12:
            raise np.linalg.LinAlgError(f"condition number {cond:.3g}")
        delta = np.linalg.solve(a.T, np.ones(n))
    except np.linalg.LinAlgError as exc:
        raise SingularChainError(
            f"transition matrix has no unique stationary distribution ({exc}); "
            "the chain is probably reducible"
        ) from None
    delta = np.clip(delta, 0.0, None)
    return delta / delta.sum()


def gamma_shape_scale(mean, sd):
    mean = np.asarray(mean, dtype=float)
    sd = np.asarray(sd, dtype=float)
    return (mean / sd) ** 2, sd**2 / mean


def gamma_logpdf(x, params: GammaMeanSd | None = None, *, mean=None, sd=None):
    """Log-density of a Gamma law given its mean and standard deviation.

    Either pass a :class:`GammaMeanSd` or broadcastable ``mean``/``sd`` arrays.
    Points ``x <= 0`` get ``-inf``.
    """
    if params is not None:
        mean, sd = params.mean, params.sd
    shape, scale = gamma_shape_scale(mean, sd)
    x = np.asarray(x, dtype=float)
    pos = x > 0
    xs = np.where(pos, x, 1.0)
    out = (shape - 1.0) * np.log(xs) - xs / scale - gammaln(shape) - shape * np.log(scale)
    out = np.where(pos, out, -np.inf)
    return out[()] if out.ndim == 0 else out


def normal_logpdf(x, mean, sd):
    z = (np.asarray(x, dtype=float) - mean) / sd
    return -0.5 * z * z - np.log(sd) - 0.5 * LOG_2PI


def car_normal_logpdf(y, y_prev, params: CarNormalParams) -> float:
    """Log-density of ``y`` given ``y_prev`` under the conditionally autoregressive Normal.

    Components are independent with mean ``phi * y_prev + (1 - phi) * mean`` and
    standard deviation ``sd``; the result is the sum over components.
    """
    y = np.atleast_1d(np.asarray(y, dtype=float))
    y_prev = np.atleast_1d(np.asarray(y_prev, dtype=float))
    if not (y.shape == y_prev.shape == params.mean.shape):
        raise ValueError(
            f"dimension mismatch: y {y.shape}, y_prev {y_prev.shape}, params {params.mean.shape}"
        )
    cond_mean = params.phi * y_prev + (1.0 - params.phi) * params.mean
    return float(np.sum(normal_logpdf(y, cond_mean, params.sd)))


def dft(window, k: int) -> complex:
    """Unnormalised forward DFT coefficient ``sum_n y_n exp(-2 pi i k n / h)``.

    This is the definitional O(h) sum for a single frequency; bulk feature
    extraction uses :func:`numpy.fft.fft`, which computes the same quantity.
    """
    y = np.asarray(window, dtype=float)
    h = y.size
    if not 0 <= k <= h - 1:
        raise ValueError(f"frequency index k={k} outside [0, {h - 1}]")
    n = np.arange(h)
    return complex(np.sum(y * np.exp(-2j * np.pi * k * n / h)))
