"""Maximum likelihood estimation and observed-information standard errors.

Parameters are optimised on an unconstrained vector. Transition matrices use
the row-softmax map with the diagonal as reference, strictly positive
quantities a log link, autocorrelations a logit link and window means the
identity. Optimisation is BFGS with central-difference gradients.
"""
from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize
from scipy.special import expit, logit

from .exceptions import DomainError
from .models import DiveData, HierModelParams, ModelSpec, hier_loglik, stack_dives
from .numkernels import eta_to_gamma, gamma_to_eta

logger = logging.getLogger(__name__)

GRAD_STEP = 1e-6
HESS_STEP = 1e-4
GRAD_TOL = 1e-5
STEP_TOL = 1e-9
# unconstrained magnitude beyond which a log/logit/softmax coordinate is treated as on the boundary
BOUNDARY_LIMIT = 20.0


# -- parameter vector -------------------------------------------------------

@dataclass(frozen=True)
class Segment:
    name: str
    shape: tuple
    link: str  # "eta", "log", "logit" or "identity"

    @property
    def size(self) -> int:
        return int(np.prod(self.shape)) if self.shape else 1


def param_layout(spec: ModelSpec) -> list[Segment]:
    """Ordered segments of the unconstrained parameter vector for ``spec``."""
    N, K, d, G = spec.coarse.n_states, spec.fine.n_states, spec.fine.n_dims, spec.n_groups
    segs = []
    if N > 1:
        segs.append(Segment("coarse_gamma", (N, N - 1), "eta"))
    segs += [Segment("coarse_mean", (N,), "log"), Segment("coarse_sd", (N,), "log")]
    if K > 1:
        segs.append(Segment("fine_gammas", (N, K, K - 1), "eta"))
    segs += [Segment("avg_mean", (G, K, d), "identity"), Segment("avg_sd", (G, K, d), "log")]
    if spec.fine.use_car:
        segs.append(Segment("phi", (G, K), "logit"))
    if spec.fine.use_wiggle:
        segs += [Segment("wiggle_mean", (G, K), "log"), Segment("wiggle_sd", (G, K), "log")]
    return segs


def n_params(spec: ModelSpec) -> int:
    return sum(s.size for s in param_layout(spec))


def _offdiag(m):
    n = m.shape[-1]
    mask = ~np.eye(n, dtype=bool)
    return m[..., mask].reshape(m.shape[:-2] + (n, n - 1))


def _from_offdiag(v, n):
    out = np.zeros(v.shape[:-2] + (n, n))
    mask = ~np.eye(n, dtype=bool)
    out[..., mask] = v.reshape(v.shape[:-2] + (n * (n - 1),))
    return out


def pack(params: HierModelParams) -> np.ndarray:
    """Natural-scale parameters to the unconstrained vector."""
    spec = params.spec
    parts = []
    for seg in param_layout(spec):
        val = getattr(params, seg.name)
        if seg.link == "eta":
            if seg.name == "coarse_gamma":
                parts.append(_offdiag(gamma_to_eta(val)))
            else:
                parts.append(_offdiag(np.array([gamma_to_eta(g) for g in val])))
        elif seg.link == "log":
            parts.append(np.log(val))
        elif seg.link == "logit":
            if np.any((val <= 0) | (val >= 1)):
                raise DomainError("phi on the boundary {0, 1} has no unconstrained representation")
            parts.append(logit(val))
        else:
            parts.append(np.asarray(val))
    return np.concatenate([np.ravel(p) for p in parts])


def unpack(v, spec: ModelSpec) -> HierModelParams:
    """Unconstrained vector to natural-scale parameters; any finite vector is valid."""
    v = np.asarray(v, dtype=float)
    N, K = spec.coarse.n_states, spec.fine.n_states
    kw = {"coarse_gamma": np.ones((1, 1)), "fine_gammas": np.ones((N, 1, 1))}
    pos = 0
    for seg in param_layout(spec):
        x = v[pos:pos + seg.size].reshape(seg.shape)
        pos += seg.size
        if seg.link == "eta":
            if seg.name == "coarse_gamma":
                kw[seg.name] = eta_to_gamma(_from_offdiag(x, N))
            else:
                kw[seg.name] = np.array([eta_to_gamma(e) for e in _from_offdiag(x, K)])
        elif seg.link == "log":
            kw[seg.name] = np.exp(x)
        elif seg.link == "logit":
            kw[seg.name] = expit(x)
        else:
            kw[seg.name] = x
    if pos != v.size:
        raise ValueError(f"parameter vector has length {v.size}, layout expects {pos}")
    return HierModelParams(spec=spec, **kw)


def natural_names(spec: ModelSpec) -> list[str]:
    """Names of the natural-scale parameters in :func:`natural_vector` order."""
    N, K, d, G = spec.coarse.n_states, spec.fine.n_states, spec.fine.n_dims, spec.n_groups
    names = []
    for seg in param_layout(spec):
        if seg.name == "coarse_gamma":
            names += [f"coarse_gamma[{i},{j}]" for i in range(N) for j in range(N)]
        elif seg.name == "fine_gammas":
            names += [f"fine_gamma[{c}][{i},{j}]" for c in range(N) for i in range(K)
                      for j in range(K)]
        else:
            names += [f"{seg.name}[{','.join(map(str, idx))}]" for idx in np.ndindex(*seg.shape)]
    return names


def natural_vector(params: HierModelParams) -> np.ndarray:
    parts = []
    for seg in param_layout(params.spec):
        parts.append(np.ravel(getattr(params, seg.name)))
    return np.concatenate(parts)


def link_jacobian(v, spec: ModelSpec) -> np.ndarray:
    """Jacobian of :func:`natural_vector` with respect to the unconstrained vector."""
    v = np.asarray(v, dtype=float)
    N, K = spec.coarse.n_states, spec.fine.n_states
    blocks_rows = []
    pos = 0
    n_u = v.size
    for seg in param_layout(spec):
        x = v[pos:pos + seg.size]
        if seg.link == "eta":
            n = N if seg.name == "coarse_gamma" else K
            etas = _from_offdiag(x.reshape(seg.shape), n).reshape(-1, n, n)
            rows = []
            col = pos
            for e in etas:
                g = eta_to_gamma(e)
                jac = np.zeros((n * n, n_u))
                for i in range(n):
                    free = [k for k in range(n) if k != i]
                    for c, k in enumerate(free):
                        jac[i * n:(i + 1) * n, col + i * (n - 1) + c] = g[i] * ((np.arange(n) == k) - g[i, k])
                rows.append(jac)
                col += n * (n - 1)
            blocks_rows += rows
        else:
            jac = np.zeros((seg.size, n_u))
            if seg.link == "log":
                deriv = np.exp(x)
            elif seg.link == "logit":
                p = expit(x)
                deriv = p * (1 - p)
            else:
                deriv = np.ones_like(x)
            jac[np.arange(seg.size), pos + np.arange(seg.size)] = deriv
            blocks_rows.append(jac)
        pos += seg.size
    return np.vstack(blocks_rows)


# -- initialisation -----------------------------------------------------------

def _kmeans_1d(x, k, iters=100):
    """Lloyd's algorithm in one dimension, seeded at evenly spaced quantiles."""
    x = np.asarray(x, dtype=float)
    if k == 1 or x.size < k:
        return np.zeros(x.size, dtype=int)
    centers = np.quantile(x, (np.arange(k) + 0.5) / k)
    labels = np.zeros(x.size, dtype=int)
    for _ in range(iters):
        labels = np.argmin(np.abs(x[:, None] - centers[None, :]), axis=1)
        new = np.array([x[labels == j].mean() if np.any(labels == j) else centers[j]
                        for j in range(k)])
        if np.allclose(new, centers):
            break
        centers = new
    order = np.argsort(centers)
    return np.argsort(order)[labels]


def _group_stat(x, labels, k, fn, fallback):
    out = []
    for j in range(k):
        sel = x[labels == j]
        out.append(fn(sel) if sel.size >= 2 else fallback)
    return np.array(out)


def _sticky_gamma(n, stay=0.8):
    if n == 1:
        return np.ones((1, 1))
    g = np.full((n, n), (1 - stay) / (n - 1))
    np.fill_diagonal(g, stay)
    return g


def initial_params(data: DiveData, spec: ModelSpec) -> HierModelParams:
    """Moment-based starting values from a 1-D k-means split of the observations."""
    N, K, d, G = spec.coarse.n_states, spec.fine.n_states, spec.fine.n_dims, spec.n_groups
    fs = spec.fine
    y = data.durations
    lab = _kmeans_1d(np.log(np.maximum(y, 1e-9)), N)
    overall_sd = y.std() if y.size > 1 else max(abs(y.mean()), 1.0) * 0.5
    c_mean = _group_stat(y, lab, N, np.mean, y.mean())
    c_sd = _group_stat(y, lab, N, lambda s: s.std(ddof=1), overall_sd)
    c_sd = np.maximum(c_sd, 0.05 * c_mean + 1e-6)

    W = data.n_windows
    not_first = ~data.first
    diffs = np.linalg.norm(data.avg - data.prev_avg, axis=1)
    if fs.use_wiggle and W:
        key = np.log(np.maximum(data.wiggle, 1e-12))
    elif W:
        key = np.log(np.maximum(diffs, 1e-12))
        key[data.first] = np.median(key[not_first]) if not_first.any() else 0.0
    else:
        key = np.zeros(0)
    flab = _kmeans_1d(key, K)

    avg_mean = np.zeros((K, d))
    avg_sd = np.ones((K, d))
    phi = np.full(K, 0.5)
    w_mean = np.ones(K)
    w_sd = np.ones(K)
    for j in range(K):
        sel = flab == j
        a = data.avg[sel]
        if a.shape[0] >= 2:
            avg_mean[j] = a.mean(axis=0)
            if fs.use_car:
                sel_d = sel & not_first
                dd = (data.avg - data.prev_avg)[sel_d]
                avg_sd[j] = dd.std(axis=0, ddof=1) if dd.shape[0] >= 2 else a.std(axis=0, ddof=1)
                if dd.shape[0] >= 3:
                    x0 = data.prev_avg[sel_d] - data.prev_avg[sel_d].mean(axis=0)
                    x1 = data.avg[sel_d] - data.avg[sel_d].mean(axis=0)
                    den = np.sum(x0 * x0)
                    if den > 0:
                        phi[j] = np.sum(x0 * x1) / den
            else:
                avg_sd[j] = a.std(axis=0, ddof=1)
        if fs.use_wiggle:
            wv = data.wiggle[sel]
            if wv.size >= 2:
                w_mean[j] = max(wv.mean(), 1e-6)
                w_sd[j] = max(wv.std(ddof=1), 1e-3 * w_mean[j])
            elif wv.size == 1:
                w_mean[j], w_sd[j] = max(wv[0], 1e-6), max(wv[0], 1e-6)
    avg_sd = np.maximum(avg_sd, 1e-6)
    phi = np.clip(phi, 0.05, 0.95)
    rep = (G, 1, 1)
    return HierModelParams(
        spec=spec,
        coarse_gamma=_sticky_gamma(N),
        coarse_mean=c_mean,
        coarse_sd=c_sd,
        fine_gammas=np.array([_sticky_gamma(K)] * N),
        avg_mean=np.tile(avg_mean, rep),
        avg_sd=np.tile(avg_sd, rep),
        phi=np.tile(phi, (G, 1)),
        wiggle_mean=np.tile(w_mean, (G, 1)) if fs.use_wiggle else None,
        wiggle_sd=np.tile(w_sd, (G, 1)) if fs.use_wiggle else None,
    )


def random_restart(base: HierModelParams, rng: np.random.Generator) -> np.ndarray:
    """Perturb a starting point: random transition rows and jittered emission values."""
    spec = base.spec
    v = pack(base)
    out = []
    pos = 0
    for seg in param_layout(spec):
        x = v[pos:pos + seg.size]
        pos += seg.size
        if seg.link == "eta":
            out.append(rng.uniform(-4.0, 0.0, size=seg.size))
        elif seg.link == "log":
            out.append(x + rng.uniform(-0.5, 0.5, size=seg.size))
        elif seg.link == "logit":
            out.append(rng.uniform(-1.0, 3.0, size=seg.size))
        else:
            scale = np.abs(x).mean() + 1e-2 if x.size else 1.0
            out.append(x + rng.normal(0.0, 0.5 * scale, size=seg.size))
    return np.concatenate(out)


# -- objective ----------------------------------------------------------------

class NegLogLik:
    """Negative log-likelihood on the unconstrained scale, counting evaluations."""

    def __init__(self, data: DiveData, spec: ModelSpec):
        self.data = data
        self.spec = spec
        self.n_evals = 0

    def __call__(self, v) -> float:
        self.n_evals += 1
        try:
            val = -hier_loglik(self.data, unpack(v, self.spec))
        except (ValueError, ArithmeticError, FloatingPointError):
            return np.inf
        return val if np.isfinite(val) else np.inf

    def gradient(self, v, step=GRAD_STEP):
        v = np.asarray(v, dtype=float)
        g = np.empty_like(v)
        for i in range(v.size):
            h = step * max(1.0, abs(v[i]))
            e = np.zeros_like(v)
            e[i] = h
            fp, fm = self(v + e), self(v - e)
            g[i] = (fp - fm) / (2 * h)
        g[~np.isfinite(g)] = 0.0
        return g

    def hessian(self, v, step=HESS_STEP):
        """Central-difference Hessian from function values; symmetric by construction."""
        v = np.asarray(v, dtype=float)
        n = v.size
        hs = step * np.maximum(1.0, np.abs(v))
        f0 = self(v)
        H = np.empty((n, n))
        for i in range(n):
            ei = np.zeros(n)
            ei[i] = hs[i]
            H[i, i] = (self(v + ei) - 2 * f0 + self(v - ei)) / hs[i] ** 2
            for j in range(i):
                ej = np.zeros(n)
                ej[j] = hs[j]
                H[i, j] = H[j, i] = (self(v + ei + ej) - self(v + ei - ej)
                                     - self(v - ei + ej) + self(v - ei - ej)) / (4 * hs[i] * hs[j])
        return H


@dataclass
class FitResult:
    params: HierModelParams
    nll: float
    converged: bool
    n_evals: int
    best_of_restarts: int
    x: np.ndarray
    grad_norm: float
    boundary: bool = False
    hessian: np.ndarray | None = None
    restarts: list = field(default_factory=list)
    message: str = ""


def _boundary(v, spec):
    pos = 0
    for seg in param_layout(spec):
        x = v[pos:pos + seg.size]
        pos += seg.size
        if seg.link != "identity" and np.any(np.abs(x) > BOUNDARY_LIMIT):
            return True
    return False


def _optimise(data, spec, x0, maxiter, gradient=None):
    obj = NegLogLik(data, spec)
    jac = gradient if gradient is not None else obj.gradient
    f0 = obj(x0)
    if not np.isfinite(f0):
        return {"x": x0, "nll": np.inf, "converged": False, "n_evals": obj.n_evals,
                "grad_norm": np.inf, "message": "non-finite likelihood at start"}
    x = np.asarray(x0, dtype=float)
    f = f0
    msg = ""
    g = None
    for _ in range(4):
        tol = GRAD_TOL * max(1.0, abs(f))
        res = minimize(obj, x, jac=jac, method="BFGS",
                       options={"gtol": tol, "maxiter": maxiter, "xrtol": STEP_TOL})
        moved = not np.array_equal(res.x, x)
        if res.fun <= f:
            x, f = res.x, float(res.fun)
        msg = res.message
        g = jac(x)
        if np.max(np.abs(g)) < GRAD_TOL * max(1.0, abs(f)) or not moved:
            break
    gnorm = float(np.max(np.abs(g)))
    converged = bool(np.isfinite(f) and gnorm < GRAD_TOL * max(1.0, abs(f)))
    return {"x": x, "nll": f, "converged": converged, "n_evals": obj.n_evals,
            "grad_norm": gnorm, "message": str(msg), "nll_start": f0}


def _run_restart(args):
    data, spec, x0, maxiter = args
    return _optimise(data, spec, x0, maxiter)


def canonical_order(params: HierModelParams) -> HierModelParams:
    """Sort coarse states by mean duration and fine states by mean wiggliness.

    Without a wiggliness model, fine states are sorted by their mean window-level
    standard deviation instead.
    """
    spec = params.spec
    cperm = np.argsort(params.coarse_mean, kind="stable")
    p = params.permuted(coarse_perm=cperm)
    if spec.fine.use_wiggle:
        key = p.wiggle_mean.mean(axis=0)
    else:
        key = p.avg_sd.mean(axis=(0, 2))
    return p.permuted(fine_perm=np.argsort(key, kind="stable"))


def fit(dives, spec: ModelSpec, init: HierModelParams | None = None, *, restarts: int = 10,
        seed: int = 0, maxiter: int = 1000, gradient=None, n_jobs: int = 1,
        canonical: bool = True) -> FitResult:
    """Maximise the hierarchical likelihood from a default start plus random restarts.

    ``init`` replaces the moment-based default start. Random restarts perturb the
    start and are generated from ``seed``; the attempt with the lowest negative
    log-likelihood wins, ties going to the lower restart index.
    """
    data = stack_dives(dives, spec.fine.n_dims)
    base = init if init is not None else initial_params(data, spec)
    if base.spec != spec:
        raise ValueError("init parameters were built for a different model spec")
    x_base = pack(base)
    if not np.isfinite(NegLogLik(data, spec)(x_base)):
        raise ValueError("log-likelihood is not finite at the initial parameters")
    rngs = [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(restarts)]
    starts = [x_base] + [random_restart(base, r) for r in rngs]
    if gradient is not None or n_jobs <= 1:
        results = [_optimise(data, spec, x0, maxiter, gradient) for x0 in starts]
    else:
        with ProcessPoolExecutor(max_workers=n_jobs) as ex:
            results = list(ex.map(_run_restart, [(data, spec, x0, maxiter) for x0 in starts]))
    for i, r in enumerate(results):
        logger.debug("restart %d: nll=%.6f converged=%s evals=%d", i, r["nll"], r["converged"],
                     r["n_evals"])
    finite = [i for i, r in enumerate(results) if np.isfinite(r["nll"])]
    best = min(finite, key=lambda i: (results[i]["nll"], i)) if finite else 0
    r = results[best]
    params = unpack(r["x"], spec)
    x = r["x"]
    if canonical:
        params = canonical_order(params)
        try:
            x = pack(params)
        except DomainError:
            pass
    log = [{"restart": i, "nll": float(q["nll"]), "converged": q["converged"],
            "n_evals": q["n_evals"], "grad_norm": q["grad_norm"], "message": q["message"]}
           for i, q in enumerate(results)]
    return FitResult(
        params=params,
        nll=float(r["nll"]),
        converged=bool(r["converged"]),
        n_evals=int(sum(q["n_evals"] for q in results)),
        best_of_restarts=best,
        x=x,
        grad_norm=float(r["grad_norm"]),
        boundary=_boundary(r["x"], spec),
        restarts=log,
        message=r["message"],
    )


# -- standard errors ----------------------------------------------------------

@dataclass
class StdErrors:
    names: list[str]
    estimates: np.ndarray
    se: np.ndarray
    se_unconstrained: np.ndarray
    covariance: np.ndarray
    flag: str = "ok"  # "ok", "not_positive_definite" or "singular"

    def as_dict(self) -> dict:
        return {n: (float(e), float(s)) for n, e, s in zip(self.names, self.estimates, self.se)}


def observed_fisher_se(fit_result: FitResult, dives, spec: ModelSpec | None = None) -> StdErrors:
    """Standard errors from the inverse observed information, mapped by the delta method."""
    spec = spec or fit_result.params.spec
    data = stack_dives(dives, spec.fine.n_dims)
    x = pack(fit_result.params)
    H = NegLogLik(data, spec).hessian(x)
    fit_result.hessian = H
    return se_from_hessian(H, x, spec)


def se_from_hessian(H, x, spec: ModelSpec) -> StdErrors:
    n = H.shape[0]
    names = natural_names(spec)
    est = natural_vector(unpack(x, spec))
    flag = "ok"
    cov = np.full((n, n), np.nan)
    if np.all(np.isfinite(H)):
        eig = np.linalg.eigvalsh(H)
        if eig.max() <= 0 or eig.min() <= eig.max() * 1e-14:
            flag = "singular" if np.min(np.abs(eig)) <= np.abs(eig).max() * 1e-14 else "not_positive_definite"
        if flag != "singular":
            cov = np.linalg.inv(H)
    else:
        flag = "singular"
    var_u = np.diag(cov).copy()
    var_u[var_u < 0] = np.nan
    J = link_jacobian(x, spec)
    cov_nat = J @ cov @ J.T
    var_n = np.diag(cov_nat).copy()
    var_n[var_n < 0] = np.nan
    if flag == "not_positive_definite":
        logger.warning("observed information is not positive definite")
    return StdErrors(names, est, np.sqrt(var_n), np.sqrt(var_u), cov_nat, flag)
