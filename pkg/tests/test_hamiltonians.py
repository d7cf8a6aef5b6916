"""Single-plaquette and chain Hamiltonian construction checks."""

import numpy as np
import pytest

from su3vqe import hamiltonians as hm
from su3vqe.multiplet import IrrepLabel
from su3vqe.spectral import exact_ground


def _reference_single_plaquette(cutoff, g):
    """Independent dense construction from the closed-form matrix elements."""
    states = [(p, q) for p in range(cutoff + 1) for q in range(cutoff + 1)]
    index = {s: i for i, s in enumerate(states)}
    n = len(states)
    h = np.zeros((n, n))
    for (p, q), i in index.items():
        cas = (p * p + q * q + p * q + 3 * p + 3 * q) / 3.0
        h[i, i] = 2 * g * g * cas + 3.0 / (g * g)
        for dp, dq in ((1, 0), (-1, 1), (0, -1)):
            j = index.get((p + dp, q + dq))
            if j is not None:
                h[i, j] -= 0.5 / (g * g)
                h[j, i] -= 0.5 / (g * g)
    return h, index


def test_single_plaquette_matrix_entries():
    h = hm.build_single_plaquette(1, 1.0).to_dense()
    basis = hm.PlaquetteBasis(1)
    i00 = basis.index(0, 0)
    i10 = basis.index(1, 0)
    i11 = basis.index(1, 1)
    assert h[i00, i10] == pytest.approx(-0.5)
    assert h[i00, i00] == pytest.approx(3.0)
    assert h[i11, i11] == pytest.approx(9.0)
    assert h[basis.index(0, 1), basis.index(0, 1)] == pytest.approx(17.0 / 3.0)


def test_single_plaquette_matches_reference():
    for cutoff, g in ((1, 1.0), (3, 0.5), (2, 0.8)):
        h = hm.build_single_plaquette(cutoff, g).to_dense()
        ref, _ = _reference_single_plaquette(cutoff, g)
        assert np.abs(h - ref).max() < 1e-12


def test_single_plaquette_symmetric():
    h = hm.build_single_plaquette(3, 0.7).to_dense()
    assert np.abs(h - h.T).max() == 0.0


def test_invalid_inputs():
    with pytest.raises(hm.InvalidCouplingError):
        hm.build_single_plaquette(2, 0.0)
    with pytest.raises(hm.InvalidCutoffError):
        hm.PlaquetteBasis(0)


def test_ground_energy_monotone_in_cutoff():
    # enlarging the basis can only lower the variational ground energy
    for g in (0.5, 0.8, 1.0):
        prev = None
        for cutoff in range(1, 7):
            e0, _ = exact_ground(hm.build_single_plaquette(cutoff, g))
            if prev is not None:
                assert e0 <= prev + 1e-12
            prev = e0


def test_cp_even_dims():
    for cutoff, dim in ((1, 3), (3, 10)):
        states = hm.PlaquetteBasis(cutoff).states
        cpb = hm.CpBasis(states, hm.cp_permutation(states))
        assert cpb.dim == dim


def test_cp_projection_preserves_ground_state():
    # vacuum is CP even, so the projected block keeps the exact E0
    ham = hm.build_single_plaquette(3, 0.5)
    states = hm.PlaquetteBasis(3).states
    cpb = hm.CpBasis(states, hm.cp_permutation(states))
    hcp = hm.project_cp(ham, cpb)
    e_full, _ = exact_ground(ham)
    e_cp, _ = exact_ground(hcp)
    assert e_cp == pytest.approx(e_full, abs=1e-10)


def test_cp_lift_restrict_roundtrip():
    states = hm.PlaquetteBasis(2).states
    cpb = hm.CpBasis(states, hm.cp_permutation(states))
    rng = np.random.default_rng(3)
    v = rng.standard_normal(cpb.dim)
    assert np.allclose(cpb.restrict(cpb.lift(v)), v)
    lifted = cpb.lift(v)
    assert np.allclose(lifted[cpb.perm], lifted)


def test_project_cp_rejects_noncommuting():
    states = hm.PlaquetteBasis(1).states
    cpb = hm.CpBasis(states, hm.cp_permutation(states))
    bad = np.diag(np.arange(4.0))  # breaks the (p,q)<->(q,p) symmetry
    with pytest.raises(hm.SymmetryViolationError):
        hm.project_cp(hm.SparseHamiltonian.from_dense(bad), cpb)


def test_trunc8_basis_and_block():
    ham, states = hm.truncated_named_basis("trunc8", 1.0)
    assert [(r.p, r.q) for r in states] == [(0, 0), (0, 1), (1, 0), (1, 1)]
    # CP-even sub-block of the 4-state truncation has 3 states
    cpb = hm.CpBasis(states, hm.cp_permutation(states))
    assert cpb.dim == 3


def test_trunc6plus_dim():
    ham, cpb = hm.truncated_named_basis("trunc6plus", 0.8)
    assert ham.dim == 4
    assert cpb.dim == 4


def test_chain_dims():
    assert hm.enumerate_gauss_basis(1, "open").dim == 3
    assert hm.enumerate_gauss_basis(2, "open").dim == 9
    assert hm.enumerate_gauss_basis(3, "open").dim == 27
    assert hm.enumerate_gauss_basis(2, "periodic").dim == 27
    assert hm.enumerate_gauss_basis(3, "periodic").dim == 81


def test_single_plaquette_chain_is_loop_states():
    basis = hm.enumerate_gauss_basis(1, "open")
    # all-singlet plus the two oriented loop excitations
    loops = {tuple(basis.links(c)) for c in basis.configs}
    assert (0, 0, 0, 0) in loops  # tops, bottoms, two verts all singlet
    assert len(loops) == 3


def test_chain_hamiltonian_hermitian_and_gauss():
    for L, bc in ((2, "open"), (3, "open"), (2, "periodic")):
        basis = hm.enumerate_gauss_basis(L, bc)
        h = hm.build_chain_hamiltonian(basis, 0.9).to_dense()
        assert np.abs(h - h.T).max() < 1e-12


def test_chain_box_element_magnitudes():
    basis = hm.enumerate_gauss_basis(2, "open")
    box = hm.chain_box_operator(basis)
    vals = np.abs(box[box != 0.0])
    assert vals.size > 0
    assert np.all(vals > 0.0)
    assert np.all(vals <= 1.0 + 1e-12)


def test_chain_cp_symmetry():
    basis = hm.enumerate_gauss_basis(3, "open")
    h = hm.build_chain_hamiltonian(basis, 0.8).to_dense()
    perm = hm.chain_cp_permutation(basis)
    assert np.abs(h[np.ix_(perm, perm)] - h).max() < 1e-12


def test_chain_translation_invariance():
    basis = hm.enumerate_gauss_basis(3, "periodic")
    h = hm.build_chain_hamiltonian(basis, 1.0).to_dense()
    perm = hm.chain_translation_permutation(basis)
    assert np.abs(h[np.ix_(perm, perm)] - h).max() < 1e-12


def test_chain_reflection_mirror_open():
    # open-chain spectrum equals that of the left-right mirrored chain
    basis = hm.enumerate_gauss_basis(2, "open")
    h = hm.build_chain_hamiltonian(basis, 0.9).to_dense()
    w = np.linalg.eigvalsh(h)
    assert w[0] == pytest.approx(exact_ground(h)[0])


def test_triplet_export_roundtrip(tmp_path):
    ham = hm.build_single_plaquette(2, 1.0)
    path = tmp_path / "h.txt"
    ham.export_triplets(path)
    lines = path.read_text().strip().split("\n")
    dim, nnz = map(int, lines[0].split())
    assert dim == ham.dim
    assert nnz == len(lines) - 1
    rebuilt = np.zeros((dim, dim))
    for line in lines[1:]:
        r, c, v = line.split()
        r, c, v = int(r), int(c), float(v)
        rebuilt[r, c] = v
        rebuilt[c, r] = v
    assert np.abs(rebuilt - ham.to_dense()).max() < 1e-15


def test_gauss_penalty_diagonal():
    diag = hm.gauss_penalty_diagonal("top", 5.0)
    assert diag.shape == (729,)
    assert set(np.unique(diag)) <= {0.0, 5.0}
    # the all-singlet pair satisfies the constraint
    assert diag[0] == 0.0
    with pytest.raises(hm.InvalidCouplingError):
        hm.gauss_penalty_diagonal("top", 0.0)
    with pytest.raises(ValueError):
        hm.gauss_penalty_diagonal("middle", 1.0)
