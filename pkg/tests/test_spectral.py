"""Exact-diagonalization oracle and Krylov initialization checks."""

import numpy as np
import pytest

from su3vqe import hamiltonians as hm
from su3vqe.spectral import (ThresholdUnreachableError, exact_ground,
                             krylov_overlap_curve, lanczos_initialize,
                             required_krylov_dim)


def test_exact_ground_diagonal():
    e0, v0 = exact_ground(np.diag([1.0, 2.0, 3.0]))
    assert e0 == 1.0
    assert np.allclose(v0, [1.0, 0.0, 0.0])


def test_exact_ground_matches_dense_solve():
    h = hm.build_single_plaquette(1, 1.0)
    e0, v0 = exact_ground(h)
    w, v = np.linalg.eigh(h.to_dense())
    assert e0 == pytest.approx(w[0], abs=1e-12)
    assert abs(np.dot(v0, v[:, 0])) == pytest.approx(1.0, abs=1e-10)


def test_exact_ground_sign_convention():
    _, v0 = exact_ground(hm.build_single_plaquette(2, 0.7))
    assert v0[np.argmax(np.abs(v0))] > 0


def test_strong_coupling_vacuum_is_electric():
    h = hm.build_single_plaquette(2, 5.0)
    _, v0 = exact_ground(h)
    assert v0[0] ** 2 > 0.99 ** 2


def test_lanczos_d1_is_seed():
    h = hm.build_single_plaquette(2, 1.0)
    dim = h.dim
    rng = np.random.default_rng(0)
    seed = rng.standard_normal(dim)
    seed /= np.linalg.norm(seed)
    res = lanczos_initialize(h, seed, 1)
    amp = np.real(res.ritz_vector.amplitudes)
    assert abs(abs(np.dot(amp, seed)) - 1.0) < 1e-12
    hd = h.to_dense()
    assert res.ritz_value == pytest.approx(float(seed @ hd @ seed), abs=1e-12)


def test_lanczos_full_dimension_exact():
    h = hm.build_single_plaquette(2, 0.8)
    e0, v0 = exact_ground(h)
    rng = np.random.default_rng(1)
    seed = rng.standard_normal(h.dim)
    seed /= np.linalg.norm(seed)
    res = lanczos_initialize(h, seed, h.dim, exact_vacuum=v0)
    assert res.ritz_value == pytest.approx(e0, abs=1e-10)
    assert res.overlap_sq == pytest.approx(1.0, abs=1e-9)


def test_two_dimensional_krylov_overlap():
    h = hm.build_single_plaquette(5, 1.0)
    _, v0 = exact_ground(h)
    seed = np.zeros(h.dim)
    seed[0] = 1.0
    res = lanczos_initialize(h, seed, 2, exact_vacuum=v0)
    assert res.overlap_sq >= 0.99


def test_ritz_value_variational_ordering():
    h = hm.build_single_plaquette(4, 0.5)
    e0, _ = exact_ground(h)
    seed = np.zeros(h.dim)
    seed[0] = 1.0
    prev = np.inf
    for d in range(1, 10):
        res = lanczos_initialize(h, seed, d)
        assert res.ritz_value <= prev + 1e-10
        assert res.ritz_value >= e0 - 1e-10
        prev = res.ritz_value


def test_overlap_monotone_in_dimension():
    for g in (0.1, 0.5, 1.0):
        h = hm.build_single_plaquette(7, g)
        seed = np.zeros(h.dim)
        seed[0] = 1.0
        curve = krylov_overlap_curve(h, seed, 12)
        diffs = np.diff(curve)
        assert np.all(diffs >= -1e-10)


def test_breakdown_on_invariant_seed():
    h = np.diag([1.0, 2.0, 3.0])
    seed = np.array([1.0, 0.0, 0.0])  # exact eigenvector
    res = lanczos_initialize(h, seed, 3)
    assert res.breakdown
    assert res.dimension == 1
    assert res.ritz_value == pytest.approx(1.0)


def test_seed_must_be_normalized():
    with pytest.raises(ValueError):
        lanczos_initialize(np.eye(3), np.array([1.0, 1.0, 0.0]), 2)


def test_bad_dimension_rejected():
    with pytest.raises(ValueError):
        lanczos_initialize(np.eye(3), np.array([1.0, 0.0, 0.0]), 0)


def test_required_dim_strong_coupling():
    d = required_krylov_dim(5.0, 7)
    assert d in (1, 2)


def test_required_dim_monotone_in_g():
    dims = [required_krylov_dim(g, 7) for g in (0.4, 0.7, 1.0)]
    assert dims == sorted(dims, reverse=True)


def test_required_dim_unreachable_reports_best():
    with pytest.raises(ThresholdUnreachableError) as exc:
        required_krylov_dim(1.0, 3, threshold=1.5)
    assert 0.0 < exc.value.best <= 1.0 + 1e-12
