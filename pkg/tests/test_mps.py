"""Blocked-site MPS, imaginary-time TEBD, and infinite-chain stitching."""

import itertools

import numpy as np
import pytest

from su3vqe import hamiltonians as hm
from su3vqe import mps
from su3vqe.spectral import exact_ground


def test_site_index_roundtrip():
    for t, v, b in itertools.product(range(3), repeat=3):
        assert mps.site_labels(mps.site_index(t, v, b)) == (t, v, b)


def test_unit_cell_needs_three_sites():
    with pytest.raises(ValueError):
        mps.MPSUnitCell(2, 8)


def test_vacuum_energy_density_is_magnetic_constant():
    # all-singlet product state: electric 0, penalty 0, loop expectation 0,
    # leaving only the additive plaquette constant per position
    g = 1.3
    ham = mps.build_hamiltonian_gate(g, 10.0)
    cell = mps.MPSUnitCell(3, 8)
    dens = mps.cell_energy_density(cell, ham)
    assert dens == pytest.approx(3.0 / (g * g), abs=1e-12)


def test_single_loop_excitation_energy():
    # a quarter-turn loop excitation costs the electric energy of four links
    g = 1.0
    ham = mps.build_hamiltonian_gate(g, 10.0)
    gate = mps.rotation_gate("R1", np.pi / 2, symmetrize=False)
    cell = mps.MPSUnitCell(3, 8)
    mps.apply_three_site_gate(cell, gate, 0)
    total = 3.0 * mps.cell_energy_density(cell, ham)
    expected = 3 * 3.0 / (g * g) + 4 * 0.5 * g * g * (4.0 / 3.0)
    assert total == pytest.approx(expected, abs=1e-10)


def test_vacuum_observables_zero():
    cell = mps.MPSUnitCell(3, 8)
    assert mps.energy_at(cell, mps.plaquette_operator_gate(), 0) == 0.0
    assert mps.energy_at(cell, mps.penalty_observable(5.0), 0) == 0.0


def test_rotation_gate_blocks_unitary():
    gate = mps.rotation_gate("R3", 0.7)
    blocks = gate.blocks.reshape(81, 81, 81)
    for c in range(81):
        u = blocks[c]
        assert np.abs(u @ u.T - np.eye(81)).max() < 1e-12


def test_imaginary_gate_positive():
    gate = mps.imaginary_gate(0.9, mps.default_penalty_strength(0.9), 0.05)
    blocks = gate.blocks.reshape(81, 81, 81)
    for c in range(0, 81, 7):
        w = np.linalg.eigvalsh((blocks[c] + blocks[c].T) / 2)
        assert w.min() > 0.0
    assert np.all(gate.va_factor > 0.0)


def test_identity_gate_leaves_state():
    ident = mps.ThreeSiteOperator(
        np.broadcast_to(np.eye(81), (3, 3, 3, 3, 81, 81)).copy())
    g = 0.9
    cell = mps.MPSUnitCell(3, 12)
    mps.apply_three_site_gate(cell, mps.rotation_gate("R1", 0.4), 0)
    box = mps.plaquette_operator_gate()
    before = [mps.energy_at(cell, box, p) for p in range(3)]
    discard = mps.apply_three_site_gate(cell, ident, 1)
    after = [mps.energy_at(cell, box, p) for p in range(3)]
    assert discard < 1e-12
    assert np.abs(np.array(before) - after).max() < 1e-10


def test_entangling_gate_bond_growth_bounded():
    cell = mps.MPSUnitCell(3, 16)
    mps.apply_three_site_gate(cell, mps.rotation_gate("R1", 0.5), 0)
    mps.apply_three_site_gate(cell, mps.rotation_gate("R1", 0.5), 1)
    assert max(cell.bond_dims()) <= min(16, 27)


def test_disjoint_gates_commute():
    box = mps.plaquette_operator_gate()
    g1 = mps.rotation_gate("R1", 0.5)
    g2 = mps.rotation_gate("R1", -0.3)

    def run(order):
        cell = mps.MPSUnitCell(6, 16)
        for gate, pos in order:
            mps.apply_three_site_gate(cell, gate, pos)
        return np.array([mps.energy_at(cell, box, p) for p in range(6)])

    a = run([(g1, 0), (g2, 3)])
    b = run([(g2, 3), (g1, 0)])
    assert np.abs(a - b).max() < 1e-8


def test_canonical_residual_after_gates():
    cell = mps.MPSUnitCell(3, 12)
    mps.apply_three_site_gate(cell, mps.rotation_gate("R1", 0.4), 0)
    mps.apply_three_site_gate(cell, mps.rotation_gate("R3", 0.2), 1)
    mps.canonicalize(cell)
    assert cell.canonical_residual() < 1e-8


def test_itebd_strong_coupling():
    res = mps.itebd_ground(5.0, chi=8, schedule=((0.1, 20), (0.01, 10)))
    # at strong coupling the vacuum is essentially the electric vacuum
    assert abs(res.plaq_expectation) < 0.01
    theta = res.cell.theta(0)
    weight = float(np.sum(theta[:, :, 0, :, :] ** 2) / np.sum(theta ** 2))
    assert weight > 0.99
    assert res.penalty_expectation < 1e-6
    # energy density decreases along the sweep history up to Trotter noise
    hist = np.array(res.energy_history)
    assert np.all(np.diff(hist) <= 1e-6)


def test_domain_stitch_rejects_bad_length():
    with pytest.raises(ValueError):
        mps.domain_stitch_on_mps(0, 0.9)
    with pytest.raises(ValueError):
        mps.domain_stitch_on_mps(6, 0.9)


def test_domain_stitch_initial_matches_isolated_vacuum():
    # without stitching, the measured plaquette sits in an isolated domain
    # whose state is the exact single-plaquette vacuum
    g = 0.9
    out = mps.domain_stitch_on_mps(1, g, chi=8, optimize_stitch=False)
    basis = hm.enumerate_gauss_basis(1, "open")
    h = hm.build_chain_hamiltonian(basis, g)
    _, v0 = exact_ground(h)
    box = hm.chain_box_operator(basis)
    exact = float(v0 @ (box + box.T) @ v0) / 2.0
    assert out["plaq_initial"] == pytest.approx(exact, abs=1e-6)
    assert out["plaq_stitched"] is None
