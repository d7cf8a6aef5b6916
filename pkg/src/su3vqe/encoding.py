"""Binary qubit encoding of the plaquette registers.

The p and q labels of a plaquette state are stored in binary on two n-qubit
registers (qubit 0 is the most significant bit of p; the p register precedes
the q register).  B_n is the binary decrement operator built from
b = (X + iY)/2, and the plaquette operator is

    box = B_n^dag x I + B_n x B_n^dag + I x B_n.

Real symmetric 2-qubit Hamiltonians split into three simultaneously
measurable groups H1/H2/H3 plus an identity part, each with a parameter-free
basis-change circuit that diagonalizes all of its terms.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce

import numpy as np

from .statevector import AnsatzCircuit, StateVector, apply

__all__ = [
    "PauliTerm",
    "MeasurementGroup",
    "UngroupableTermError",
    "build_bn",
    "bn_matrix",
    "plaquette_pauli",
    "pauli_matrix",
    "terms_matrix",
    "group_two_qubit_hamiltonian",
    "basis_change_circuit",
]

_PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


@dataclass(frozen=True)
class PauliTerm:
    coefficient: complex
    axes: tuple  # one of I,X,Y,Z per qubit, qubit 0 first (MSB)


def pauli_matrix(axes) -> np.ndarray:
    return reduce(np.kron, (_PAULI[a] for a in axes))


def terms_matrix(terms, width=None) -> np.ndarray:
    if not terms:
        return np.zeros((2 ** (width or 1),) * 2, dtype=complex)
    out = sum(t.coefficient * pauli_matrix(t.axes) for t in terms)
    return out


def _multiply_strings(axes1, axes2):
    """Product of two Pauli strings -> (phase, axes)."""
    table = {
        ("X", "Y"): (1j, "Z"), ("Y", "X"): (-1j, "Z"),
        ("Y", "Z"): (1j, "X"), ("Z", "Y"): (-1j, "X"),
        ("Z", "X"): (1j, "Y"), ("X", "Z"): (-1j, "Y"),
    }
    phase = 1.0 + 0j
    out = []
    for a, b in zip(axes1, axes2):
        if a == "I":
            out.append(b)
        elif b == "I":
            out.append(a)
        elif a == b:
            out.append("I")
        else:
            ph, c = table[(a, b)]
            phase *= ph
            out.append(c)
    return phase, tuple(out)


def _simplify(terms, tol=1e-14):
    acc = {}
    for t in terms:
        acc[t.axes] = acc.get(t.axes, 0.0) + t.coefficient
    return [PauliTerm(c, ax) for ax, c in sorted(acc.items()) if abs(c) > tol]


def _ladder_product(factors):
    """Expand a tensor product of {I, b, bdag} factors into Pauli terms."""
    expansions = {
        "I": [(1.0, "I")],
        "b": [(0.5, "X"), (0.5j, "Y")],
        "bdag": [(0.5, "X"), (-0.5j, "Y")],
    }
    terms = [PauliTerm(1.0, ())]
    for f in factors:
        terms = [PauliTerm(t.coefficient * c, t.axes + (ax,))
                 for t in terms for c, ax in expansions[f]]
    return terms


def build_bn(n: int):
    """Pauli terms of the n-qubit binary decrement operator B_n."""
    if n < 1:
        raise ValueError(f"register width must be >= 1, got {n}")
    terms = []
    for k in range(n):
        factors = ["I"] * (n - k - 1) + ["b"] + ["bdag"] * k
        terms.extend(_ladder_product(factors))
    return _simplify(terms)


def bn_matrix(n: int) -> np.ndarray:
    return terms_matrix(build_bn(n), n)


def plaquette_pauli(n: int):
    """Pauli terms of box on the 2n-qubit (p register, q register) system."""
    if n < 1:
        raise ValueError(f"register width must be >= 1, got {n}")
    bn = build_bn(n)
    ident = ("I",) * n
    terms = []
    # B_n^dag x I (raises p); conjugate flips the sign of the Y coefficients
    for t in bn:
        terms.append(PauliTerm(np.conj(t.coefficient), t.axes + ident))
    # B_n x B_n^dag
    for t1 in bn:
        for t2 in bn:
            terms.append(PauliTerm(t1.coefficient * np.conj(t2.coefficient),
                                   t1.axes + t2.axes))
    # I x B_n
    for t in bn:
        terms.append(PauliTerm(t.coefficient, ident + t.axes))
    return _simplify(terms)


class UngroupableTermError(ValueError):
    def __init__(self, offending):
        self.offending = offending
        super().__init__(
            "Hamiltonian has Pauli support outside the measurable set: "
            + ", ".join("".join(ax) for ax in offending))


def basis_change_circuit(label: str) -> AnsatzCircuit:
    """Parameter-free circuit after which the group's terms are diagonal."""
    circ = AnsatzCircuit(num_qubits=2)
    if label == "H1":
        circ.h(0)
    elif label == "H2":
        circ.h(1)
    elif label == "H3":
        circ.cnot(0, 1)
        circ.h(0)
    else:
        raise ValueError(f"unknown measurement group {label!r}")
    return circ


@dataclass
class MeasurementGroup:
    label: str
    terms: list
    circuit: AnsatzCircuit

    def diagonal_values(self) -> np.ndarray:
        """Diagonal of the rotated group operator U (sum terms) U^dag."""
        op = terms_matrix(self.terms, 2)
        dim = op.shape[0]
        cols = []
        for k in range(dim):
            e = np.zeros(dim, dtype=complex)
            e[k] = 1.0
            cols.append(apply(self.circuit, [], StateVector(e)).amplitudes)
        u = np.array(cols).T
        rotated = u @ op @ u.conj().T
        off = np.max(np.abs(rotated - np.diag(np.diag(rotated))))
        if off > 1e-10:
            raise ValueError(f"group {self.label} not diagonalized, residual {off:.3e}")
        return np.real(np.diag(rotated))


_GROUP_AXES = {
    "H1": [("I", "Z"), ("X", "I"), ("X", "Z")],
    "H2": [("Z", "I"), ("I", "X")],
    "H3": [("X", "X"), ("Y", "Y"), ("Z", "Z")],
}


def group_two_qubit_hamiltonian(h):
    """Split a real symmetric 2-qubit H into (groups, identity coefficient).

    Coefficients come from Pauli inner products Tr(H P)/4.  Raises
    UngroupableTermError when H has support outside the H1/H2/H3 set.
    """
    hm = h.to_dense() if hasattr(h, "to_dense") else np.asarray(h, dtype=float)
    if hm.shape != (4, 4):
        raise ValueError("expected a 2-qubit (4x4) Hamiltonian")
    allowed = {ax for axes in _GROUP_AXES.values() for ax in axes}
    offending = []
    coeffs = {}
    for a in "IXYZ":
        for b in "IXYZ":
            axes = (a, b)
            c = np.trace(hm @ pauli_matrix(axes)).real / 4.0
            if abs(c) < 1e-12:
                continue
            if axes == ("I", "I"):
                coeffs[axes] = c
            elif axes in allowed:
                coeffs[axes] = c
            else:
                offending.append(axes)
    if offending:
        raise UngroupableTermError(offending)
    groups = []
    for label, axes_list in _GROUP_AXES.items():
        terms = [PauliTerm(coeffs[ax], ax) for ax in axes_list if ax in coeffs]
        groups.append(MeasurementGroup(label, terms, basis_change_circuit(label)))
    return groups, coeffs.get(("I", "I"), 0.0)
