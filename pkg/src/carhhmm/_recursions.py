"""Log-space forward/backward recursions over ragged batches of sequences.

A batch is a flat ``(n_obs, K)`` array of log-emissions plus an ``offsets`` array
of length ``n_seq + 1``; sequence ``s`` occupies rows ``offsets[s]:offsets[s+1]``.
Every sequence starts from ``log_delta`` and evolves under ``log_gamma``. Empty
sequences have log-likelihood 0.
"""
import numpy as np
from numba import njit

NEG_INF = -np.inf


@njit(cache=True)
def _lse_step(prev, log_gamma, j):
    K = prev.shape[0]
    m = NEG_INF
    for i in range(K):
        v = prev[i] + log_gamma[i, j]
        if v > m:
            m = v
    if m == NEG_INF:
        return NEG_INF
    acc = 0.0
    for i in range(K):
        acc += np.exp(prev[i] + log_gamma[i, j] - m)
    return m + np.log(acc)


@njit(cache=True)
def _lse(v):
    m = NEG_INF
    for i in range(v.shape[0]):
        if v[i] > m:
            m = v[i]
    if m == NEG_INF:
        return NEG_INF
    acc = 0.0
    for i in range(v.shape[0]):
        acc += np.exp(v[i] - m)
    return m + np.log(acc)


@njit(cache=True)
def forward_loglik(log_emis, offsets, log_gamma, log_delta):
    n_seq = offsets.shape[0] - 1
    K = log_gamma.shape[0]
    out = np.zeros(n_seq)
    alpha = np.empty(K)
    nxt = np.empty(K)
    for s in range(n_seq):
        a = offsets[s]
        b = offsets[s + 1]
        if a == b:
            continue
        for k in range(K):
            alpha[k] = log_delta[k] + log_emis[a, k]
        for t in range(a + 1, b):
            for j in range(K):
                nxt[j] = _lse_step(alpha, log_gamma, j) + log_emis[t, j]
            for j in range(K):
                alpha[j] = nxt[j]
        out[s] = _lse(alpha)
    return out


@njit(cache=True)
def forward_backward(log_emis, offsets, log_gamma, log_delta):
    """Return log forward and log backward variables, each ``(n_obs, K)``."""
    n_seq = offsets.shape[0] - 1
    n_obs, K = log_emis.shape
    log_alpha = np.empty((n_obs, K))
    log_beta = np.empty((n_obs, K))
    tmp = np.empty(K)
    for s in range(n_seq):
        a = offsets[s]
        b = offsets[s + 1]
        if a == b:
            continue
        for k in range(K):
            log_alpha[a, k] = log_delta[k] + log_emis[a, k]
        for t in range(a + 1, b):
            for j in range(K):
                log_alpha[t, j] = _lse_step(log_alpha[t - 1], log_gamma, j) + log_emis[t, j]
        for k in range(K):
            log_beta[b - 1, k] = 0.0
        for t in range(b - 2, a - 1, -1):
            for i in range(K):
                for j in range(K):
                    tmp[j] = log_gamma[i, j] + log_emis[t + 1, j] + log_beta[t + 1, j]
                log_beta[t, i] = _lse(tmp)
    return log_alpha, log_beta


@njit(cache=True)
def predicted_log_alpha(log_alpha, offsets, log_gamma, log_delta):
    """Log forward variables before the emission at each position is absorbed."""
    n_seq = offsets.shape[0] - 1
    n_obs, K = log_alpha.shape
    out = np.empty((n_obs, K))
    for s in range(n_seq):
        a = offsets[s]
        b = offsets[s + 1]
        if a == b:
            continue
        for k in range(K):
            out[a, k] = log_delta[k]
        for t in range(a + 1, b):
            for j in range(K):
                out[t, j] = _lse_step(log_alpha[t - 1], log_gamma, j)
    return out
