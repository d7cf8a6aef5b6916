"""Gaussian-process Bayesian optimization (ordinary kriging).

Kernel K(x1,x2) = exp(-sum_i (x1_i - x2_i)^2 / l_i^2); the prior mean is the
best linear unbiased predictor.  A Tikhonov regulator lambda (a fake data
variance) is added to the covariance diagonal but excluded from the posterior
variance.  The acquisition is probability of improvement, minimized as
(mu_post - f_min) / sigma_post.
"""

from __future__ import annotations

import time

import numpy as np
import scipy.linalg as sla
from scipy.optimize import minimize_scalar

from .optimizers import OptimizerTrace

__all__ = [
    "GaussianProcessModel",
    "MulticollinearityError",
    "gp_fit",
    "gp_posterior",
    "bayes_opt",
]


class MulticollinearityError(RuntimeError):
    def __init__(self, smallest_eigenvalue, iteration=None):
        self.smallest_eigenvalue = smallest_eigenvalue
        self.iteration = iteration
        at = f" at iteration {iteration}" if iteration is not None else ""
        super().__init__(
            "covariance matrix is not positive definite"
            f"{at}: smallest eigenvalue {smallest_eigenvalue:.6e}")


def _kernel(x1, x2, scales):
    d = (x1[:, None, :] - x2[None, :, :]) / scales
    return np.exp(-np.sum(d * d, axis=-1))


class GaussianProcessModel:
    def __init__(self, points, values, variances, scales, regulator):
        self.points = np.atleast_2d(np.asarray(points, dtype=float))
        self.values = np.asarray(values, dtype=float)
        self.variances = np.asarray(variances, dtype=float)
        self.scales = np.asarray(scales, dtype=float)
        self.regulator = float(regulator)
        cov = _kernel(self.points, self.points, self.scales)
        cov[np.diag_indices_from(cov)] += self.regulator + self.variances
        try:
            self._chol = sla.cho_factor(cov, lower=True)
        except np.linalg.LinAlgError:
            raise MulticollinearityError(float(np.linalg.eigvalsh(cov)[0]))
        self._cov = cov
        ones = np.ones(len(self.values))
        self._ci_z = sla.cho_solve(self._chol, self.values)
        self._ci_1 = sla.cho_solve(self._chol, ones)
        self._s11 = float(ones @ self._ci_1)  # 1^T C^-1 1
        self.blup_mean = float(ones @ self._ci_z) / self._s11

    def log_likelihood(self) -> float:
        """Multivariate-Gaussian log likelihood with the BLUP mean."""
        resid = self.values - self.blup_mean
        alpha = sla.cho_solve(self._chol, resid)
        logdet = 2.0 * np.sum(np.log(np.diag(self._chol[0])))
        n = len(self.values)
        return float(-0.5 * (resid @ alpha) - 0.5 * logdet
                     - 0.5 * n * np.log(2 * np.pi))


def gp_fit(points, values, variances=None, regulator=0.0, scales=None,
           box_widths=None, seed=0, warm_start=None,
           polish=2) -> GaussianProcessModel:
    """Fit the GP; scales=None triggers a 16-start likelihood maximization.

    Hyperparameter search bounds are [1e-3, 10 * box width] per dimension
    (box_widths defaults to the data's coordinate ranges, floored at 1).
    warm_start seeds the search with a previous fit's length scales, which
    makes per-iteration refits in an optimization loop cheap.
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    values = np.asarray(values, dtype=float)
    n, d = points.shape
    if variances is None:
        variances = np.zeros(n)
    if scales is not None:
        return GaussianProcessModel(points, values, variances, scales, regulator)
    if n < 2:
        raise ValueError("automatic length scales need at least 2 points")
    if box_widths is None:
        box_widths = np.maximum(points.max(axis=0) - points.min(axis=0), 1.0)
    lo, hi = 1e-3, 10.0 * np.asarray(box_widths, dtype=float)
    rng = np.random.default_rng(seed)

    def neg_ll(log_s):
        try:
            m = GaussianProcessModel(points, values, variances,
                                     np.exp(log_s), regulator)
        except MulticollinearityError:
            return 1e30
        return -m.log_likelihood()

    from scipy.optimize import minimize
    starts = [np.log(np.sqrt(lo * hi)) * np.ones(d)]
    if warm_start is not None:
        starts.insert(0, np.clip(np.log(np.asarray(warm_start, dtype=float)),
                                 np.log(lo), np.log(hi)))
    starts += [rng.uniform(np.log(lo), np.log(hi)) for _ in range(14)]
    # rank the cheap starts, polish only the most promising ones locally
    ranked = sorted(starts, key=neg_ll)
    best = None
    for x0 in ranked[:polish]:
        res = minimize(neg_ll, x0, method="L-BFGS-B",
                       bounds=[(np.log(lo), np.log(h)) for h in np.atleast_1d(hi)],
                       options={"maxiter": 40})
        if best is None or res.fun < best.fun:
            best = res
    return GaussianProcessModel(points, values, variances,
                                np.exp(best.x), regulator)


def gp_posterior(model: GaussianProcessModel, x):
    """(mu, sigma^2) of the ordinary-kriging posterior at x.

    The Tikhonov regulator enters through C but is not added back to the
    posterior variance; real data variances at the training points already
    sit on C's diagonal.
    """
    x = np.atleast_2d(np.asarray(x, dtype=float))
    c = _kernel(x, model.points, model.scales)  # (m, n)
    ct_ci_z = c @ model._ci_z
    ct_ci_1 = c @ model._ci_1
    # ordinary-kriging mean: far from the data (c -> 0) mu tends to the
    # BLUP global mean, so the correction term carries a plus sign
    mu = ct_ci_z + (1.0 - ct_ci_1) * (model._ci_1 @ model.values) / model._s11
    ci_c = sla.cho_solve(model._chol, c.T)  # (n, m)
    var = 1.0 - np.sum(c * ci_c.T, axis=1) + (1.0 - ct_ci_1) ** 2 / model._s11
    var = np.where(var > -1e-8, np.maximum(var, 0.0), var)
    if np.any(var < 0):
        # a clearly negative variance means C is numerically singular even
        # though the Cholesky factorization went through
        raise MulticollinearityError(float(np.linalg.eigvalsh(model._cov)[0]))
    if mu.shape[0] == 1:
        return float(mu[0]), float(var[0])
    return mu, var


def _minimize_acquisition(model, f_min, bounds, rng, starts=64, sweeps=1):
    """Random multistart + per-coordinate bounded line-search descent.

    Besides the random starts, jittered copies of the incumbent best data
    point seed the refinement so the exploitation basin is always probed.
    """
    lo = np.array([b[0] for b in bounds])
    hi = np.array([b[1] for b in bounds])

    def acq(x):
        mu, var = gp_posterior(model, x)
        sig = np.sqrt(var)
        if sig < 1e-12:
            return np.inf
        return (mu - f_min) / sig

    # score all random starts in one vectorized posterior call, then refine
    # only the most promising ones by coordinate descent
    cand = rng.uniform(lo, hi, size=(starts, len(lo)))
    mu_all, var_all = gp_posterior(model, cand)
    mu_all, var_all = np.atleast_1d(mu_all), np.atleast_1d(var_all)
    sig = np.sqrt(var_all)
    scores = np.where(sig > 1e-12, (mu_all - f_min) / np.maximum(sig, 1e-300),
                      np.inf)
    x_best = model.points[int(np.argmin(model.values))]
    jitter = 0.05 * np.minimum(model.scales, hi - lo)
    seeds = [np.clip(x_best + jitter * rng.standard_normal(len(lo)), lo, hi)
             for _ in range(2)]
    refine = list(cand[np.argsort(scores)[:2]]) + seeds

    best_x, best_a = None, np.inf
    for x in refine:
        x = x.copy()
        for _ in range(sweeps):
            for i in range(len(x)):
                def line(t, i=i, x=x):
                    y = x.copy()
                    y[i] = t
                    return acq(y)
                res = minimize_scalar(line, bounds=(lo[i], hi[i]),
                                      method="bounded",
                                      options={"xatol": 1e-4, "maxiter": 25})
                # bounded Brent never evaluates the starting point, so its
                # result can be worse than where the sweep stood (it locks
                # onto some other local basin); keep the move only if it
                # actually lowers the acquisition
                if res.fun < line(x[i]):
                    x[i] = res.x
        a = acq(x)
        if a < best_a:
            best_x, best_a = x.copy(), a
    return best_x, best_a


def bayes_opt(obj, theta_init, iterations, regulator, seed=0,
              init_points=None, refit_every=5) -> OptimizerTrace:
    """Bayesian-optimization loop: refit, propose by PI, evaluate, append.

    theta_init seeds the data set (along with optional extra init_points);
    a proposal with zero posterior deviation (duplicate point) is rejected
    and replaced by a uniform resample inside the box.  The length-scale
    likelihood maximization reruns every refit_every iterations; in between
    the previous scales are reused (a single Cholesky per iteration).
    """
    if iterations < 1:
        raise ValueError("iterations must be >= 1")
    rng = np.random.default_rng(seed)
    t_start = time.time()
    bounds = obj.bounds
    lo = np.array([b[0] for b in bounds])
    hi = np.array([b[1] for b in bounds])
    pts = [np.asarray(theta_init, dtype=float)]
    if init_points is not None:
        pts += [np.asarray(p, dtype=float) for p in init_points]
    while len(pts) < 2:
        pts.append(rng.uniform(lo, hi))
    data = []
    for p in pts:
        e, var = obj(p)
        data.append((p, e, var))
    trace = OptimizerTrace(seed=seed)
    for p, e, _ in data:
        trace.parameters.append(p.copy())
        trace.energies.append(e)
    prev_scales = None
    for it in range(iterations):
        xs = np.array([d[0] for d in data])
        zs = np.array([d[1] for d in data])
        vs = np.array([d[2] for d in data])
        try:
            if prev_scales is not None and it % refit_every:
                model = gp_fit(xs, zs, vs, regulator=regulator,
                               scales=prev_scales)
            else:
                model = gp_fit(xs, zs, vs, regulator=regulator,
                               box_widths=hi - lo, seed=seed + it,
                               warm_start=prev_scales)
            prev_scales = model.scales
            f_min = float(zs.min())
            x_new, a = _minimize_acquisition(model, f_min, bounds, rng)
            if not np.isfinite(a):
                x_new = rng.uniform(lo, hi)
            _, var_new = gp_posterior(model, x_new)
        except MulticollinearityError as err:
            trace.wall_time = time.time() - t_start
            trace.message = f"multicollinear covariance at iteration {it}"
            out = MulticollinearityError(err.smallest_eigenvalue, iteration=it)
            out.trace = trace  # partial history up to the failure
            raise out
        if var_new <= 1e-14:
            x_new = rng.uniform(lo, hi)
        e, var = obj(x_new)
        data.append((x_new, e, var))
        trace.parameters.append(x_new.copy())
        trace.energies.append(e)
    trace.wall_time = time.time() - t_start
    trace.message = "bayes-opt completed"
    return trace
