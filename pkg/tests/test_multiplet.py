"""Irrep bookkeeping and vertex singlet tensor checks."""

import itertools
from fractions import Fraction

import numpy as np
import pytest

from su3vqe.multiplet import (EIGHT, ONE, SIX, THREE, THREE_BAR, CgTensor,
                              IrrepLabel, NoSingletError,
                              UnsupportedIrrepError, casimir, cp_conjugate,
                              irrep_dim, singlet_tensor,
                              vertex_singlet_multiplicity)

TRUNC3 = (ONE, THREE, THREE_BAR)


def test_casimir_values():
    assert casimir(ONE) == 0
    assert casimir(THREE) == Fraction(4, 3)
    assert casimir(THREE_BAR) == Fraction(4, 3)
    assert casimir(EIGHT) == 3
    assert casimir(SIX) == Fraction(10, 3)


def test_irrep_dims():
    assert irrep_dim(ONE) == 1
    assert irrep_dim(THREE) == 3
    assert irrep_dim(THREE_BAR) == 3
    assert irrep_dim(SIX) == 6
    assert irrep_dim(EIGHT) == 8


def test_cp_conjugate_is_involution():
    for p in range(4):
        for q in range(4):
            r = IrrepLabel(p, q)
            assert cp_conjugate(cp_conjugate(r)) == r
            assert cp_conjugate(r) == IrrepLabel(q, p)


def test_casimir_cp_invariant():
    for p in range(4):
        for q in range(4):
            r = IrrepLabel(p, q)
            assert casimir(r) == casimir(cp_conjugate(r))


def test_negative_labels_rejected():
    with pytest.raises(ValueError):
        IrrepLabel(-1, 0)


def test_singlet_multiplicities():
    assert vertex_singlet_multiplicity(THREE, THREE_BAR, ONE) == 1
    assert vertex_singlet_multiplicity(THREE, THREE, THREE) == 1
    assert vertex_singlet_multiplicity(THREE_BAR, THREE_BAR, THREE_BAR) == 1
    assert vertex_singlet_multiplicity(ONE, ONE, ONE) == 1
    assert vertex_singlet_multiplicity(THREE, THREE, ONE) == 0
    assert vertex_singlet_multiplicity(THREE, THREE, THREE_BAR) == 0


def test_multiplicity_permutation_invariant():
    for triple in itertools.product(TRUNC3, repeat=3):
        vals = {vertex_singlet_multiplicity(*perm)
                for perm in itertools.permutations(triple)}
        assert len(vals) == 1


def test_unsupported_irrep_raises():
    with pytest.raises(UnsupportedIrrepError):
        vertex_singlet_multiplicity(SIX, THREE, THREE)


def test_no_singlet_raises():
    with pytest.raises(NoSingletError):
        singlet_tensor(THREE, THREE, ONE)


def _singlet_triples():
    for triple in itertools.product(TRUNC3, repeat=3):
        if vertex_singlet_multiplicity(*triple) == 1:
            yield triple


def test_singlet_tensor_unit_norm():
    for triple in _singlet_triples():
        t = singlet_tensor(*triple)
        assert abs(t.self_contraction() - 1.0) < 1e-12


def test_singlet_tensor_equivariance():
    # summed generator action over all three legs annihilates the tensor
    for triple in _singlet_triples():
        t = singlet_tensor(*triple)
        assert t.equivariance_residual() < 1e-10


def test_singlet_tensor_sign_convention():
    for triple in _singlet_triples():
        flat = singlet_tensor(*triple).coefficients.ravel()
        first = flat[np.nonzero(flat)[0][0]]
        assert first > 0


def test_singlet_tensor_shapes():
    t = singlet_tensor(THREE, THREE_BAR, ONE)
    assert t.coefficients.shape == (3, 3, 1)
    t3 = singlet_tensor(THREE, THREE, THREE)
    assert t3.coefficients.shape == (3, 3, 3)
