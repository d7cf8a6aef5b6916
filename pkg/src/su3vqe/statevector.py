"""Dense state-vector simulation of ansatz circuits.

Circuits act either on a qubit register (single-qubit rotations, Hadamard,
CNOT) or directly on a projected physical basis through plane (Givens)
rotations between two named basis states.  Parameterized rotations use the
full-angle convention U(theta) = exp(-i theta P) so the pi/4 shift rule for
gradients is exact.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "StateVector",
    "Gate",
    "AnsatzCircuit",
    "DimensionMismatchError",
    "apply",
    "expectation",
    "sample_energy",
]


class DimensionMismatchError(ValueError):
    pass


@dataclass
class StateVector:
    amplitudes: np.ndarray
    basis: str = "qubit"

    @property
    def dim(self) -> int:
        return len(self.amplitudes)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def overlap_sq(self, other) -> float:
        o = other.amplitudes if isinstance(other, StateVector) else other
        return float(abs(np.vdot(self.amplitudes, o)) ** 2)


@dataclass(frozen=True)
class Gate:
    """One circuit element.

    kind: rx|ry|rz|h|cnot|plane.  targets are qubit indices for the qubit
    kinds and a pair of basis-state indices for plane rotations.  Exactly one
    of param (a slot into the circuit's parameter vector) or angle (a fixed
    value) is set for parameterized kinds; h and cnot take neither.
    """

    kind: str
    targets: tuple
    param: int = None
    angle: float = None


class AnsatzCircuit:
    def __init__(self, num_qubits=None, dim=None, gates=None):
        # dim given directly for projected-basis circuits
        self.num_qubits = num_qubits
        self.dim = dim if dim is not None else (2 ** num_qubits if num_qubits else None)
        self.gates = list(gates) if gates else []

    @property
    def num_parameters(self) -> int:
        slots = [g.param for g in self.gates if g.param is not None]
        if not slots:
            return 0
        n = max(slots) + 1
        if sorted(set(slots)) != list(range(n)) and set(slots) != set(range(n)):
            raise ValueError("parameter slots are not a contiguous 0..P-1 range")
        return n

    def add(self, kind, targets, param=None, angle=None):
        self.gates.append(Gate(kind, tuple(targets), param, angle))
        return self

    def rx(self, q, param=None, angle=None):
        return self.add("rx", (q,), param, angle)

    def ry(self, q, param=None, angle=None):
        return self.add("ry", (q,), param, angle)

    def rz(self, q, param=None, angle=None):
        return self.add("rz", (q,), param, angle)

    def h(self, q):
        return self.add("h", (q,))

    def cnot(self, control, target):
        return self.add("cnot", (control, target))

    def plane(self, i, j, param=None, angle=None):
        return self.add("plane", (i, j), param, angle)

    def serialize(self) -> str:
        """Line format: GATE kind targets... param_slot|angle."""
        lines = []
        for g in self.gates:
            tail = ""
            if g.param is not None:
                tail = f" p{g.param}"
            elif g.angle is not None:
                tail = f" {g.angle!r}"
            lines.append("GATE " + g.kind + " " + " ".join(map(str, g.targets)) + tail)
        return "\n".join(lines) + "\n"


_H_MAT = np.array([[1, 1], [1, -1]]) / np.sqrt(2.0)


def _single_qubit_matrix(kind, theta):
    c, s = np.cos(theta), np.sin(theta)
    if kind == "rx":
        return np.array([[c, -1j * s], [-1j * s, c]])
    if kind == "ry":
        # exp(-i theta Y)
        return np.array([[c, -s], [s, c]], dtype=complex)
    if kind == "rz":
        return np.array([[np.exp(-1j * theta), 0], [0, np.exp(1j * theta)]])
    if kind == "h":
        return _H_MAT.astype(complex)
    raise ValueError(f"unknown single-qubit gate {kind!r}")


def _apply_single(psi, n, q, mat):
    # qubit 0 is the most significant bit
    psi = psi.reshape(2 ** q, 2, -1)
    return np.einsum("ab,ibj->iaj", mat, psi).reshape(-1)


def _apply_cnot(psi, n, control, target):
    psi = psi.reshape([2] * n).copy()
    idx_on = [slice(None)] * n
    idx_on[control] = 1
    block = psi[tuple(idx_on)]
    t = target if target < control else target - 1
    psi[tuple(idx_on)] = np.flip(block, axis=t)
    return psi.reshape(-1)


from functools import lru_cache


@lru_cache(maxsize=4096)
def _multi_plane_eig(pairs):
    """Eigendecomposition of the summed Givens generator over index pairs.

    The generator G = sum over pairs of |j><i| - |i><j| is real
    antisymmetric on the union of pair indices; pairs may overlap, in which
    case exp(theta G) is not a product of independent plane rotations but is
    still exactly unitary (and commutes with any permutation symmetry that
    maps the pair set to itself).
    """
    support = sorted({k for p in pairs for k in p})
    pos = {k: n for n, k in enumerate(support)}
    m = len(support)
    gen = np.zeros((m, m))
    for i, j in pairs:
        gen[pos[j], pos[i]] += 1.0
        gen[pos[i], pos[j]] -= 1.0
    # real antisymmetric: iG is Hermitian
    w, v = np.linalg.eigh(1j * gen)
    return np.array(support), w, v


def _apply_multi_plane(psi, pairs, theta):
    support, w, v = _multi_plane_eig(tuple(tuple(p) for p in pairs))
    u = (v * np.exp(-1j * theta * w)) @ v.conj().T
    psi[support] = u @ psi[support]
    return psi


def apply(circuit: AnsatzCircuit, theta, psi0) -> StateVector:
    """Run the circuit on psi0 with the given parameter vector."""
    basis = "qubit"
    if isinstance(psi0, StateVector):
        basis = psi0.basis
        psi0 = psi0.amplitudes
    psi = np.asarray(psi0, dtype=complex).copy()
    theta = np.asarray(theta, dtype=float)
    if circuit.dim is not None and circuit.dim != len(psi):
        raise DimensionMismatchError(
            f"circuit dim {circuit.dim} vs state dim {len(psi)}")
    if len(theta) != circuit.num_parameters:
        raise DimensionMismatchError(
            f"{circuit.num_parameters} parameters expected, got {len(theta)}")
    if abs(np.linalg.norm(psi) - 1.0) > 1e-10:
        raise ValueError("input state is not normalized")
    n = circuit.num_qubits
    for g in circuit.gates:
        ang = theta[g.param] if g.param is not None else g.angle
        if g.kind in ("rx", "ry", "rz"):
            psi = _apply_single(psi, n, g.targets[0], _single_qubit_matrix(g.kind, ang))
        elif g.kind == "h":
            psi = _apply_single(psi, n, g.targets[0], _H_MAT.astype(complex))
        elif g.kind == "cnot":
            psi = _apply_cnot(psi, n, *g.targets)
        elif g.kind == "plane":
            i, j = g.targets
            c, s = np.cos(ang), np.sin(ang)
            ai, aj = psi[i], psi[j]
            psi[i] = c * ai - s * aj
            psi[j] = s * ai + c * aj
        elif g.kind == "multi_plane":
            psi = _apply_multi_plane(psi, g.targets, ang)
        else:
            raise ValueError(f"unknown gate kind {g.kind!r}")
    return StateVector(psi, basis)


def expectation(h, psi) -> float:
    """<psi|H|psi>, H as SparseHamiltonian, scipy sparse or dense array."""
    v = psi.amplitudes if isinstance(psi, StateVector) else np.asarray(psi)
    if hasattr(h, "to_csr"):
        h = h.to_csr()
    if h.shape[1] != len(v):
        raise DimensionMismatchError(f"H dim {h.shape[1]} vs state dim {len(v)}")
    val = np.vdot(v, h @ v)
    if abs(val.imag) > 1e-10 * max(1.0, abs(val.real)):
        raise ValueError(f"expectation has imaginary part {val.imag:.3e}")
    return float(val.real)


def sample_energy(groups, identity_coeff, psi, shots, seed):
    """Shot-noise estimate of the energy from measurement groups.

    Each group supplies a parameter-free basis-change circuit and a list of
    (coefficient, axes) Pauli terms diagonal after that circuit.  Returns
    (estimate, standard error from per-group sample variance).
    """
    if shots < 1:
        raise ValueError("shots must be >= 1")
    rng = np.random.default_rng(seed)
    v = psi.amplitudes if isinstance(psi, StateVector) else np.asarray(psi, complex)
    total = float(identity_coeff)
    var_total = 0.0
    for group in groups:
        rotated = apply(group.circuit, [], StateVector(v.copy())).amplitudes
        probs = np.abs(rotated) ** 2
        probs = probs / probs.sum()
        counts = rng.multinomial(shots, probs)
        vals = group.diagonal_values()  # summed group operator after rotation
        mean = float(np.dot(counts, vals)) / shots
        total += mean
        second = float(np.dot(counts, vals ** 2)) / shots
        var_total += max(second - mean ** 2, 0.0) / shots
    return total, float(np.sqrt(var_total))
