"""Gradient descent with the pi/4 parameter-shift rule.

The shift formula dE/dt_i = E(t + pi/4 e_i) - E(t - pi/4 e_i) is an identity
for energies of circuits whose parameterized gates follow the full-angle
convention exp(-i theta P) with P^2 = 1 (each angle then enters the energy
only through frequency-2 trigonometric terms).
"""

from __future__ import annotations

import csv
import io
import time
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "ObjectiveHandle",
    "OptimizerTrace",
    "parameter_shift_gradient",
    "gradient_descent",
]


class ObjectiveHandle:
    """Wraps an energy evaluator with a counter and box bounds.

    evaluator(theta) -> energy or (energy, variance).  bounds is a list of
    (lo, hi) per parameter, defaulting to [-pi, pi]; gradient may hold an
    analytic gradient callable used preferentially by the optimizers.
    """

    def __init__(self, evaluator, num_parameters, bounds=None, gradient=None,
                 exact_energy=None):
        self.evaluator = evaluator
        self.num_parameters = num_parameters
        if bounds is None:
            bounds = [(-np.pi, np.pi)] * num_parameters
        self.bounds = [tuple(map(float, b)) for b in bounds]
        if len(self.bounds) != num_parameters:
            raise ValueError("one (lo, hi) bound pair needed per parameter")
        self.gradient = gradient
        self.exact_energy = exact_energy
        self.evaluations = 0

    def __call__(self, theta):
        self.evaluations += 1
        out = self.evaluator(np.asarray(theta, dtype=float))
        if isinstance(out, tuple):
            return float(out[0]), float(out[1])
        return float(out), 0.0

    def energy(self, theta):
        return self(theta)[0]

    def clip(self, theta):
        lo = np.array([b[0] for b in self.bounds])
        hi = np.array([b[1] for b in self.bounds])
        return np.clip(theta, lo, hi)


@dataclass
class OptimizerTrace:
    parameters: list = field(default_factory=list)
    energies: list = field(default_factory=list)
    grad_norms: list = field(default_factory=list)
    etas: list = field(default_factory=list)
    seed: int = None
    wall_time: float = 0.0
    converged: bool = False
    message: str = ""

    @property
    def best_energy(self):
        return min(self.energies)

    @property
    def best_parameters(self):
        return self.parameters[int(np.argmin(self.energies))]

    def to_csv(self, exact_e0=None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["iter", "energy", "grad_norm", "eta", "relative_error"])
        for i, e in enumerate(self.energies):
            gn = self.grad_norms[i] if i < len(self.grad_norms) else ""
            eta = self.etas[i] if i < len(self.etas) else ""
            rel = ""
            if exact_e0 is not None:
                rel = repr(abs(e - exact_e0) / max(abs(exact_e0), 1e-300))
            w.writerow([i, repr(e), repr(gn) if gn != "" else "",
                        repr(eta) if eta != "" else "", rel])
        return buf.getvalue()


def parameter_shift_gradient(obj, theta) -> np.ndarray:
    """Exact gradient from 2P energy evaluations at +-pi/4 shifts."""
    theta = np.asarray(theta, dtype=float)
    grad = np.empty(len(theta))
    for i in range(len(theta)):
        shift = np.zeros_like(theta)
        shift[i] = np.pi / 4
        grad[i] = obj.energy(theta + shift) - obj.energy(theta - shift)
    return grad


_MAX_HALVINGS = 40


def gradient_descent(obj, theta0, eta0, mode="backtracking", max_steps=1000,
                     tol=1e-10, stop=None,
                     store_parameters=True) -> OptimizerTrace:
    """Minimize obj by steepest descent with the shift-rule gradient.

    backtracking: when a step fails to decrease the energy the learning rate
    is halved (at most 40 times) and the step retried; eta is never increased
    again, so the energy sequence is monotone non-increasing.  fixed: eta
    stays at eta0 throughout.  backtracking-reset: backtracking line search
    with recovery -- each iteration may double the step size again (capped
    at eta0), so a stiff transient early in the descent does not permanently
    cap it (the energy sequence is still monotone non-increasing).
    stop(theta, energy) -> bool, when given, ends
    the run early (used by experiment sweeps counting steps to a target).
    store_parameters=False skips the per-step parameter history (long runs
    at large dimension would otherwise hold gigabytes of copies).
    """
    if eta0 <= 0:
        raise ValueError(f"learning rate must be positive, got {eta0}")
    if mode not in ("fixed", "backtracking", "backtracking-reset"):
        raise ValueError(f"unknown mode {mode!r}")
    grad_fn = obj.gradient if obj.gradient is not None else (
        lambda t: parameter_shift_gradient(obj, t))
    t_start = time.time()
    theta = np.asarray(theta0, dtype=float).copy()
    energy = obj.energy(theta)
    trace = OptimizerTrace()
    eta = float(eta0)
    for _ in range(max_steps):
        if not np.isfinite(energy):
            trace.message = "non-finite energy, aborted"
            break
        if stop is not None and stop(theta, energy):
            trace.converged = True
            trace.message = "stop condition met"
            break
        grad = np.asarray(grad_fn(theta), dtype=float)
        gn = float(np.linalg.norm(grad))
        if store_parameters:
            trace.parameters.append(theta.copy())
        trace.energies.append(energy)
        trace.grad_norms.append(gn)
        trace.etas.append(eta)
        if gn < tol:
            trace.converged = True
            trace.message = "gradient norm below tolerance"
            break
        if mode == "fixed":
            theta = theta - eta * grad
            energy = obj.energy(theta)
            continue
        if mode == "backtracking-reset":
            eta = min(float(eta0), 2.0 * eta)
        accepted = False
        for _ in range(_MAX_HALVINGS + 1):
            cand = theta - eta * grad
            e_cand = obj.energy(cand)
            if e_cand < energy:
                theta, energy = cand, e_cand
                accepted = True
                break
            eta *= 0.5
        if not accepted:
            trace.converged = True
            trace.message = "no descent after 40 halvings"
            break
    if not trace.energies or trace.energies[-1] > energy:
        # record the final accepted point when the loop ended on a step
        trace.parameters.append(theta.copy())
        trace.energies.append(energy)
        trace.grad_norms.append(float("nan"))
        trace.etas.append(eta)
    trace.wall_time = time.time() - t_start
    return trace
