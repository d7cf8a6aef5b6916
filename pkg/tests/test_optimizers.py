"""Gradient descent, parameter-shift rule, and Gaussian-process optimizer."""

import numpy as np
import pytest

from su3vqe import hamiltonians as hm
from su3vqe.bayesopt import (GaussianProcessModel, MulticollinearityError,
                             bayes_opt, gp_fit, gp_posterior)
from su3vqe.optimizers import (ObjectiveHandle, OptimizerTrace,
                               gradient_descent, parameter_shift_gradient)
from su3vqe.statevector import apply, expectation
from su3vqe.ansatz import real_two_qubit_ansatz


def _trunc8_objective(g=1.0):
    hd, _ = hm.truncated_named_basis("trunc8", g)
    hd = hd.to_dense()
    circ = real_two_qubit_ansatz()
    psi0 = np.zeros(4)
    psi0[0] = 1.0

    def ev(t):
        return expectation(hd, apply(circ, t, psi0))

    return ObjectiveHandle(ev, 3), hd


def test_shift_rule_single_frequency_identity():
    # E(t) = a + b cos 2t + c sin 2t: the pi/4 shift difference is exactly dE/dt
    a, b, c = 0.7, -1.3, 0.4

    def ev(t):
        return a + b * np.cos(2 * t[0]) + c * np.sin(2 * t[0])

    obj = ObjectiveHandle(ev, 1)
    for t in np.linspace(-2.5, 2.5, 11):
        grad = parameter_shift_gradient(obj, [t])
        exact = -2 * b * np.sin(2 * t) + 2 * c * np.cos(2 * t)
        assert grad[0] == pytest.approx(exact, abs=1e-12)


def test_shift_rule_matches_finite_difference():
    obj, _ = _trunc8_objective()
    rng = np.random.default_rng(0)
    h = 1e-6
    for _ in range(5):
        theta = rng.uniform(-np.pi, np.pi, 3)
        grad = parameter_shift_gradient(obj, theta)
        for i in range(3):
            e = np.zeros(3)
            e[i] = h
            fd = (obj.energy(theta + e) - obj.energy(theta - e)) / (2 * h)
            assert abs(grad[i] - fd) < 1e-6


def test_shift_rule_stationary_at_ground_state():
    from su3vqe.experiments import two_qubit_angles
    from su3vqe.spectral import exact_ground
    obj, hd = _trunc8_objective()
    _, v0 = exact_ground(hd)
    theta = two_qubit_angles(v0)
    grad = parameter_shift_gradient(obj, theta)
    assert np.linalg.norm(grad) < 1e-10


def test_evaluation_counter():
    obj, _ = _trunc8_objective()
    obj.energy(np.zeros(3))
    parameter_shift_gradient(obj, np.zeros(3))
    assert obj.evaluations == 7  # 1 + 2 per parameter


def test_gradient_descent_quadratic_bowl():
    def ev(t):
        return float(np.dot(t, t))

    obj = ObjectiveHandle(ev, 2, gradient=lambda t: 2 * np.asarray(t))
    tr = gradient_descent(obj, [1.0, -0.5], 0.25, mode="fixed", max_steps=60)
    assert tr.energies[-1] < 1e-12
    # geometric convergence: each step halves the distance at eta = 0.25
    ratios = [tr.energies[i + 1] / tr.energies[i]
              for i in range(5) if tr.energies[i] > 1e-20]
    assert all(r < 0.26 for r in ratios)


def test_backtracking_monotone_energies():
    hd, _ = hm.truncated_named_basis("trunc6plus", 0.8)
    hd = hd.to_dense()
    from su3vqe.experiments import hyperspherical_objective
    obj, _, _ = hyperspherical_objective(hd)
    start = np.full(3, 0.4)
    tr = gradient_descent(obj, start, 0.5, mode="backtracking", max_steps=60)
    diffs = np.diff(tr.energies)
    assert np.all(diffs <= 1e-12)


def test_backtracking_reset_recovers_step_size():
    # anisotropic bowl: the stiff direction forces early halvings, after
    # which only the soft direction is left; reset mode must grow eta back
    # (capped at eta0) while keeping the energy sequence monotone.
    scale = np.array([400.0, 1.0])

    def ev(t):
        return float(np.dot(scale * t, t))

    obj = ObjectiveHandle(ev, 2, gradient=lambda t: 2 * scale * np.asarray(t))
    start = [1.0, 1.0]
    tr = gradient_descent(obj, start, 0.5, mode="backtracking-reset",
                          max_steps=400)
    assert np.all(np.diff(tr.energies) <= 1e-12)
    assert max(tr.etas) == 0.5 and min(tr.etas) < 0.5
    assert tr.etas[-2] > min(tr.etas)     # eta grew back after the transient
    mono = gradient_descent(obj, start, 0.5, mode="backtracking",
                            max_steps=400)
    assert tr.energies[-1] <= mono.energies[-1] + 1e-12


def test_gradient_descent_stop_callback():
    def ev(t):
        return float(np.dot(t, t))

    obj = ObjectiveHandle(ev, 1, gradient=lambda t: 2 * np.asarray(t))
    tr = gradient_descent(obj, [1.0], 0.25, mode="fixed", max_steps=100,
                          stop=lambda t, e: e < 0.1)
    assert tr.converged
    assert tr.message == "stop condition met"
    assert tr.energies[-1] >= 0.0


def test_gradient_descent_invalid_args():
    obj = ObjectiveHandle(lambda t: 0.0, 1)
    with pytest.raises(ValueError):
        gradient_descent(obj, [0.0], 0.0)
    with pytest.raises(ValueError):
        gradient_descent(obj, [0.0], 0.1, mode="annealed")


def test_trace_csv_format():
    tr = OptimizerTrace()
    tr.parameters = [np.zeros(1), np.zeros(1)]
    tr.energies = [2.0, 1.0]
    tr.grad_norms = [0.5, 0.1]
    tr.etas = [0.1, 0.1]
    lines = tr.to_csv(exact_e0=1.0).strip().split("\n")
    assert lines[0] == "iter,energy,grad_norm,eta,relative_error"
    assert lines[1].startswith("0,2.0,")
    assert tr.best_energy == 1.0


# ---------------------------------------------------------------------------
# Gaussian process regression
# ---------------------------------------------------------------------------

def test_gp_single_point_posterior_is_constant():
    model = gp_fit([[0.3]], [1.7], scales=[0.5])
    for x in (-2.0, 0.0, 5.0):
        mu, var = gp_posterior(model, [x])
        assert mu == pytest.approx(1.7, abs=1e-10)


def test_gp_interpolates_at_zero_regulator():
    rng = np.random.default_rng(1)
    x = rng.uniform(-1, 1, size=(6, 2))
    z = np.sin(x[:, 0]) + x[:, 1] ** 2
    model = gp_fit(x, z, scales=[1.0, 1.0], regulator=0.0)
    for xi, zi in zip(x, z):
        mu, var = gp_posterior(model, xi)
        assert mu == pytest.approx(zi, abs=1e-8)
        assert var <= 1e-8


def test_gp_duplicate_point_multicollinear():
    with pytest.raises(MulticollinearityError) as exc:
        gp_fit([[0.0], [0.0]], [1.0, 1.0], scales=[1.0], regulator=0.0)
    assert exc.value.smallest_eigenvalue < 1e-10


def test_gp_regulator_cures_duplicates():
    model = gp_fit([[0.0], [0.0]], [1.0, 1.0], scales=[1.0], regulator=1e-3)
    mu, var = gp_posterior(model, [0.0])
    assert mu == pytest.approx(1.0, abs=1e-6)


def test_gp_far_field_limit():
    # far from the data the mean tends to the global estimate and the
    # variance to the closed-form constant-correction value
    pts = np.array([[0.0], [0.4], [-0.3]])
    z = np.array([1.0, 2.0, 0.5])
    model = gp_fit(pts, z, scales=[0.2], regulator=0.0)
    mu, var = gp_posterior(model, [50.0])
    assert mu == pytest.approx(model.blup_mean, abs=1e-10)
    expected_var = 1.0 + 1.0 / model._s11
    assert var == pytest.approx(expected_var, abs=1e-10)


def test_gp_mirror_symmetry():
    pts = np.array([[0.2], [0.9], [1.5]])
    z = np.array([3.0, 1.0, 2.0])
    m1 = gp_fit(pts, z, scales=[0.7])
    m2 = gp_fit(-pts, z, scales=[0.7])
    for x in (0.0, 0.5, 2.0):
        mu1, var1 = gp_posterior(m1, [x])
        mu2, var2 = gp_posterior(m2, [-x])
        assert mu1 == pytest.approx(mu2, abs=1e-12)
        assert var1 == pytest.approx(var2, abs=1e-12)


def test_gp_auto_scales_need_two_points():
    with pytest.raises(ValueError):
        gp_fit([[0.0]], [1.0])


def test_gp_likelihood_fit_recovers_signal():
    rng = np.random.default_rng(5)
    x = rng.uniform(-1, 1, size=(12, 1))
    z = np.cos(2 * x[:, 0])
    model = gp_fit(x, z, regulator=1e-10, seed=0)
    mu, _ = gp_posterior(model, [0.25])
    assert mu == pytest.approx(np.cos(0.5), abs=0.05)


# ---------------------------------------------------------------------------
# Bayesian optimization loop
# ---------------------------------------------------------------------------

def test_bayes_opt_quadratic():
    def ev(t):
        return float((t[0] - 0.3) ** 2)

    obj = ObjectiveHandle(ev, 1, bounds=[(-1.0, 1.0)])
    tr = bayes_opt(obj, [0.9], iterations=30, regulator=1e-6, seed=2)
    assert tr.best_energy < 1e-2


def test_bayes_opt_requires_iterations():
    obj = ObjectiveHandle(lambda t: 0.0, 1)
    with pytest.raises(ValueError):
        bayes_opt(obj, [0.0], iterations=0, regulator=1e-6)


def test_bayes_opt_reproducible():
    def ev(t):
        return float(np.sin(3 * t[0]) + t[0] ** 2)

    tr1 = bayes_opt(ObjectiveHandle(ev, 1, bounds=[(-2, 2)]), [1.0],
                    iterations=10, regulator=1e-6, seed=9)
    tr2 = bayes_opt(ObjectiveHandle(ev, 1, bounds=[(-2, 2)]), [1.0],
                    iterations=10, regulator=1e-6, seed=9)
    assert tr1.energies == tr2.energies


def test_bayes_opt_multicollinearity_carries_trace():
    # an exactly flat objective drives duplicate-like rows at tiny regulator
    def ev(t):
        return 1.0

    obj = ObjectiveHandle(ev, 1, bounds=[(-1, 1)])
    try:
        bayes_opt(obj, [0.0], iterations=40, regulator=0.0, seed=0)
    except MulticollinearityError as err:
        assert err.iteration is not None
        assert len(err.trace.energies) >= 2
