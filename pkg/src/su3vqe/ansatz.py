"""Variational state parameterizations.

Families:
* hyperspherical coordinates on a projected (CP-even) basis,
* the generic real two-qubit circuit Ry-Ry-CNOT-Ry with an optional
  color-parity-tied mode,
* the Givens-rotation gate set on plaquette chains (pattern table below)
  with CP-symmetrized application,
* recursive domain-vacuum circuits and the stitched ansatz
  C(t1,t2,t3) = D(t3) S(t2) D(t1).
"""

from __future__ import annotations

import numpy as np

from .recoupling import conj_label
from .statevector import AnsatzCircuit, StateVector, apply

__all__ = [
    "hyperspherical_state",
    "hyperspherical_jacobian",
    "hyperspherical_vjp",
    "hyperspherical_angles",
    "real_two_qubit_ansatz",
    "cp_tied_angles",
    "ROTATION_PATTERNS",
    "table1_pairs",
    "add_rotation_gate",
    "build_domain_circuit",
    "stitched_ansatz",
]


# ---------------------------------------------------------------------------
# hyperspherical coordinates
# ---------------------------------------------------------------------------

def hyperspherical_state(angles) -> np.ndarray:
    """Unit vector a1=cos t1, ak=cos tk prod_{j<k} sin tj, an=prod sin tj."""
    t = np.asarray(angles, dtype=float)
    n = len(t) + 1
    sines = np.concatenate([[1.0], np.cumprod(np.sin(t))])
    a = np.empty(n)
    a[:-1] = sines[:-1] * np.cos(t)
    a[-1] = sines[-1]
    return a


def hyperspherical_jacobian(angles) -> np.ndarray:
    """d a_k / d t_j, shape (n, n-1)."""
    t = np.asarray(angles, dtype=float)
    m = len(t)
    n = m + 1
    s, c = np.sin(t), np.cos(t)
    # factor matrix: F[k, j] = sin t_j for j < k, cos t_k at j = k (k < n-1),
    # 1 otherwise; a_k = prod_j F[k, j]
    f = np.ones((n, m))
    d = np.zeros((n, m))
    for j in range(m):
        f[j + 1:, j] = s[j]
        d[j + 1:, j] = c[j]
        f[j, j] = c[j]
        d[j, j] = -s[j]
    left = np.ones_like(f)
    left[:, 1:] = np.cumprod(f[:, :-1], axis=1)
    right = np.ones_like(f)
    right[:, :-1] = np.cumprod(f[:, :0:-1], axis=1)[:, ::-1]
    return d * left * right


def hyperspherical_vjp(angles, y) -> np.ndarray:
    """J(t)^T y without forming the Jacobian, in O(n) time.

    Equivalent to ``hyperspherical_jacobian(angles).T @ y``; used for
    gradients of quadratic forms where building the (n, n-1) Jacobian
    dominates the cost.  Division-free, so exact at sin t_j = 0.
    """
    t = np.asarray(angles, dtype=float)
    y = np.asarray(y, dtype=float)
    m = len(t)
    s, c = np.sin(t), np.cos(t)
    prefix = np.concatenate([[1.0], np.cumprod(s)[:-1]])   # prod_{j<k} sin t_j
    # T_j = sum_{k>j} y_k ctil_k prod_{j<i<k} sin t_i with ctil_k = cos t_k
    # for k < m and ctil_m = 1, by backward recurrence.
    trail = np.empty(m)
    trail[m - 1] = y[m]
    for j in range(m - 2, -1, -1):
        trail[j] = y[j + 1] * c[j + 1] + s[j + 1] * trail[j + 1]
    return prefix * (c * trail - y[:m] * s)


def hyperspherical_angles(vector) -> np.ndarray:
    """Angles reproducing a given unit vector (inverse of the state map).

    The last angle uses the full circle so both signs of the final amplitude
    are reachable; interior sign flips go through cos t_k < 0.
    """
    a = np.asarray(vector, dtype=float)
    nrm = np.linalg.norm(a)
    if abs(nrm - 1.0) > 1e-10:
        raise ValueError("input must be a unit vector")
    n = len(a)
    t = np.zeros(n - 1)
    for k in range(n - 2):
        tail = np.linalg.norm(a[k:])
        if tail < 1e-300:
            return t
        t[k] = np.arccos(np.clip(a[k] / tail, -1.0, 1.0))
    t[n - 2] = np.arctan2(a[n - 1], a[n - 2])
    return t


# ---------------------------------------------------------------------------
# real two-qubit circuit
# ---------------------------------------------------------------------------

def real_two_qubit_ansatz() -> AnsatzCircuit:
    """Ry(t1) q0, Ry(t2) q1, CNOT(0,1), Ry(t3) q1: all real 4-vectors."""
    circ = AnsatzCircuit(num_qubits=2)
    circ.ry(0, param=0)
    circ.ry(1, param=1)
    circ.cnot(0, 1)
    circ.ry(1, param=2)
    return circ


def cp_tied_angles(t1: float, t2: float) -> np.ndarray:
    """Angles (t1, t2, t3*) making the prepared amplitudes CP-even.

    Amplitudes in the (p,q) register basis are a00=c1 cos(t2+t3),
    a01=c1 sin(t2+t3), a10=s1 sin(t2-t3), a11=s1 cos(t2-t3); a01=a10 fixes
    tan t3 = -tan t2 tan(pi/4 - t1).
    """
    t3 = np.arctan(-np.tan(t2) * np.tan(np.pi / 4 - t1))
    return np.array([t1, t2, t3])


# ---------------------------------------------------------------------------
# chain Givens-rotation gate set
# ---------------------------------------------------------------------------

# Patch patterns (c1,c2,c3,c4, r1,r2,r3,r4) for the rotation pairs.
# R1 excites a plaquette loop, R2-R5 stretch a loop by one plaquette,
# R6/R7 break a long loop into two.  Labels: 0=1, 1=3, 2=3bar.
ROTATION_PATTERNS = {
    "R1": ((0, 0, 0, 0, 0, 0, 0, 0), (0, 0, 0, 0, 1, 1, 2, 2)),
    "R2": ((1, 0, 2, 0, 2, 0, 0, 0), (1, 0, 2, 0, 0, 1, 2, 2)),
    "R3": ((1, 0, 2, 0, 2, 0, 0, 0), (1, 0, 2, 0, 1, 2, 1, 1)),
    "R4": ((0, 1, 0, 2, 0, 0, 1, 0), (0, 1, 0, 2, 1, 1, 0, 2)),
    "R5": ((0, 1, 0, 2, 0, 0, 1, 0), (0, 1, 0, 2, 2, 2, 2, 1)),
    "R6": ((1, 1, 2, 2, 0, 1, 0, 2), (1, 1, 2, 2, 2, 0, 1, 0)),
    "R7": ((1, 2, 2, 1, 1, 2, 0, 1), (1, 2, 2, 1, 2, 0, 2, 0)),
}

ROTATION_TYPES = tuple(ROTATION_PATTERNS)


def _conj_pattern(pat):
    return tuple(conj_label(x) for x in pat)


def table1_pairs(basis, rtype: str, plaquette: int, conj: bool = False):
    """Basis-index pairs (state1, state2) matched by a rotation pattern.

    All configurations whose 8-link patch at the plaquette equals the
    pattern's State 1 are paired with the configuration where the four loop
    links are replaced by State 2's; far context is untouched.
    """
    if not 0 <= plaquette < basis.length:
        raise IndexError(f"plaquette {plaquette} out of range 0..{basis.length - 1}")
    s1, s2 = ROTATION_PATTERNS[rtype]
    if conj:
        s1, s2 = _conj_pattern(s1), _conj_pattern(s2)
    pairs = []
    for k, cfg in enumerate(basis.configs):
        if basis.patch(cfg, plaquette).key() != s1:
            continue
        target = basis.replace_plaquette(cfg, plaquette, *s2[4:])
        try:
            k2 = basis.index(target)
        except KeyError:
            continue
        pairs.append((k, k2))
    return pairs


def add_rotation_gate(circuit: AnsatzCircuit, basis, rtype: str, plaquette: int,
                      param=None, angle=None, symmetrize: bool = True,
                      conj: bool = False) -> bool:
    """Append one Givens-rotation gate (optionally CP-symmetrized).

    With symmetrize the generator is the sum over the pattern's pairs and
    their CP conjugates, so the gate commutes with the CP permutation
    exactly even when rotation planes overlap.  Returns False (no gate
    appended) when the pattern has no match in the basis.
    """
    pairs = table1_pairs(basis, rtype, plaquette, conj=conj)
    if symmetrize:
        cps = table1_pairs(basis, rtype, plaquette, conj=not conj)
        pairs = pairs + [p for p in cps if p not in pairs]
    if not pairs:
        return False
    circuit.add("multi_plane", tuple(pairs), param=param, angle=angle)
    return True


class _SlotAllocator:
    def __init__(self, start=0):
        self.next = start

    def take(self):
        s = self.next
        self.next += 1
        return s


def build_domain_circuit(basis, start: int, length: int,
                         circuit: AnsatzCircuit = None,
                         slots: _SlotAllocator = None) -> AnsatzCircuit:
    """Recursive vacuum-preparation circuit for a domain of plaquettes.

    length 1: excite (R1); length 2: excite both then stretch (R3 on the
    right plaquette, R4 on the left); length >= 3: circuit for length-1,
    excite the new plaquette, stretch over the previous domain, then
    de-excite the interior (R6, R7).  All gates are CP-symmetrized and
    carry independent parameters.
    """
    if length < 1:
        raise ValueError("domain length must be >= 1")
    if start < 0 or start + length > basis.length:
        raise ValueError("domain does not fit on the chain")
    circ = circuit if circuit is not None else AnsatzCircuit(dim=basis.dim)
    slots = slots if slots is not None else _SlotAllocator()

    def gate(rtype, p):
        # allocate the slot only when the pattern matches somewhere
        if add_rotation_gate(circ, basis, rtype, p, param=slots.next):
            slots.take()

    if length == 1:
        gate("R1", start)
    elif length == 2:
        gate("R1", start)
        gate("R1", start + 1)
        gate("R3", start + 1)
        gate("R4", start)
    else:
        build_domain_circuit(basis, start, length - 1, circ, slots)
        new = start + length - 1
        gate("R1", new)
        gate("R3", new)
        gate("R4", new - 1)
        for p in range(start + 1, start + length - 1):
            gate("R6", p)
            gate("R7", p)
    return circ


def stitch_layer(basis, circuit: AnsatzCircuit, plaquettes,
                 slots: _SlotAllocator):
    """All rotation types (CP-symmetrized, free angles) on given plaquettes."""
    for p in plaquettes:
        for rtype in ROTATION_TYPES:
            if add_rotation_gate(circuit, basis, rtype, p, param=slots.next):
                slots.take()
    return circuit


def stitched_ansatz(basis, domains, layers: int = 0,
                    stitch_plaquettes=None) -> AnsatzCircuit:
    """C = [D(t3) layers] S(t2) D(t1) over non-overlapping domains.

    domains: list of (start, length).  The stitch layer acts on the
    plaquettes between (and around) the domains unless given explicitly.
    All parameter blocks are independent; zero angles give the bare product
    of domain vacua.
    """
    spans = sorted(domains)
    covered = set()
    for s, l in spans:
        span = set(range(s, s + l))
        if span & covered:
            raise ValueError("domains overlap")
        covered |= span
    circ = AnsatzCircuit(dim=basis.dim)
    slots = _SlotAllocator()
    for s, l in spans:
        build_domain_circuit(basis, s, l, circ, slots)
    if stitch_plaquettes is None:
        stitch_plaquettes = [p for p in range(basis.length) if p not in covered]
    stitch_layer(basis, circ, stitch_plaquettes, slots)
    for _ in range(layers):
        for s, l in spans:
            build_domain_circuit(basis, s, l, circ, slots)
    return circ
