"""Infinite plaquette chain as an MPS of blocked 3-link sites.

Each blocked site holds (top, vertical, bottom) links of one repeating unit,
local dimension 27, index 9*top + 3*vert + bottom (labels 0=1, 1=3, 2=3bar).
Plaquette i consists of (top_i, bottom_i) plus the verticals of sites i and
i+1, so the magnetic term is a three-site operator: diagonal in site i-1 and
in (top, bottom) of site i+1, mixing site i with the vertical of site i+1.

The vacuum is found by imaginary-time TEBD with 3-site gates on a 3-site
unit cell (two SVD-style splittings per gate, here realized through Gram
eigendecompositions for speed).  Gauss's law is enforced by a diagonal
energy penalty on neighboring sites.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
import scipy.linalg as sla

from .hamiltonians import gauss_penalty_diagonal
from .multiplet import IrrepLabel, casimir
from .recoupling import Patch, conj_label, plaquette_matrix_element

__all__ = [
    "ThreeSiteOperator",
    "MPSUnitCell",
    "build_local_terms",
    "build_hamiltonian_gate",
    "imaginary_gate",
    "rotation_gate",
    "apply_three_site_gate",
    "energy_at",
    "itebd_ground",
    "domain_stitch_on_mps",
    "default_penalty_strength",
]

_D = 27  # blocked-site dimension
_CAS = np.array([float(casimir(IrrepLabel(p, q)))
                 for p, q in ((0, 0), (1, 0), (0, 1))])


def site_index(top: int, vert: int, bottom: int) -> int:
    return 9 * top + 3 * vert + bottom


def site_labels(index: int):
    return index // 9, (index // 3) % 3, index % 3


@dataclass
class ThreeSiteOperator:
    """Operator on three blocked sites (A, B, C) with the plaquette structure.

    blocks[ta, ba, tc, bc] is an 81x81 matrix on the mixing space
    (site B) x (vertical of C), index 3*siteB + vC.  va_diag adds a scalar
    (diagonal) contribution per vertical label of site A; va_factor instead
    scales multiplicatively (used by exponentiated gates).
    """

    blocks: np.ndarray                       # (3,3,3,3,81,81)
    va_diag: np.ndarray = None               # (3,) additive or None
    va_factor: np.ndarray = None             # (3,) multiplicative or None

    def _nonidentity_contexts(self):
        """Context indices (flattened) whose block differs from identity.

        Rotation gates touch only a couple of contexts, so skipping the
        identity blocks makes their application far cheaper."""
        if not hasattr(self, "_nonid"):
            blocks = self.blocks.reshape(81, 81, 81)
            eye = np.eye(81)
            self._nonid = [c for c in range(81)
                           if np.abs(blocks[c] - eye).max() > 1e-15]
        return self._nonid

    def apply(self, theta: np.ndarray) -> np.ndarray:
        """theta has shape (Dl, 27, 27, 27, Dr); returns the acted tensor."""
        dl, dr = theta.shape[0], theta.shape[-1]
        t9 = theta.reshape(dl, 3, 3, 3, _D, 3, 3, 3, dr)
        # group the context indices (ta, ba, tc, bc) into one batch axis so
        # all 81 blocks act in a single batched matmul
        perm = t9.transpose(1, 3, 5, 7, 0, 2, 4, 6, 8)  # ta,ba,tc,bc,l,va,sB,vc,r
        batched = np.ascontiguousarray(perm).reshape(81, dl * 3, 81, dr)
        blocks = self.blocks.reshape(81, 81, 81)
        nonid = self._nonidentity_contexts()
        if len(nonid) <= 24:
            res = batched
            for c in nonid:
                res[c] = np.tensordot(blocks[c], batched[c],
                                      axes=([1], [1])).transpose(1, 0, 2)
        else:
            res = np.einsum("cij,cajr->cair", blocks, batched, optimize=True)
        out = res.reshape(3, 3, 3, 3, dl, 3, _D, 3, dr)
        out = out.transpose(4, 0, 5, 1, 6, 2, 7, 3, 8)  # back to t9 layout
        if self.va_diag is not None:
            out = out + t9 * self.va_diag[None, None, :, None, None, None,
                                          None, None, None]
        if self.va_factor is not None:
            out = out * self.va_factor[None, None, :, None, None, None,
                                       None, None, None]
        return np.ascontiguousarray(out).reshape(theta.shape)


def _box_block(ta, ba, tc, bc) -> np.ndarray:
    """(box + box^dag)/1 restricted to one context block (81x81).

    Matrix elements come from the vertex-tensor contraction; patches that
    violate Gauss's law at any vertex carry element zero (the penalty keeps
    such configurations dynamically suppressed).
    """
    out = np.zeros((81, 81))
    for i in range(81):
        sb1, vc1 = divmod(i, 3)
        tb1, vb1, bb1 = site_labels(sb1)
        p1 = Patch(ta, tc, ba, bc, vb1, tb1, vc1, bb1)
        if not p1.gauss_valid():
            continue
        for j in range(81):
            if j == i:
                continue
            sb2, vc2 = divmod(j, 3)
            tb2, vb2, bb2 = site_labels(sb2)
            p2 = Patch(ta, tc, ba, bc, vb2, tb2, vc2, bb2)
            if not p2.gauss_valid():
                continue
            out[i, j] = (plaquette_matrix_element(p1, p2)
                         + plaquette_matrix_element(p2, p1))
    return out


@lru_cache(maxsize=8)
def build_local_terms(g: float, c_g: float):
    """Hamiltonian pieces: 1-site electric diag, 2-site penalty diag,
    3-site magnetic blocks (box + box^dag per context)."""
    if g <= 0:
        raise ValueError(f"coupling must be positive, got {g}")
    electric = np.zeros(_D)
    for s in range(_D):
        t, v, b = site_labels(s)
        electric[s] = 0.5 * g * g * (_CAS[t] + _CAS[v] + _CAS[b])
    penalty = (gauss_penalty_diagonal("top", c_g)
               + gauss_penalty_diagonal("bottom", c_g)).reshape(_D, _D)
    magnetic = np.zeros((3, 3, 3, 3, 81, 81))
    for ta, ba, tc, bc in itertools.product(range(3), repeat=4):
        magnetic[ta, ba, tc, bc] = _box_block(ta, ba, tc, bc)
    return electric, penalty, magnetic


def build_hamiltonian_gate(g: float, c_g: float) -> ThreeSiteOperator:
    """The translation-invariant 3-site Hamiltonian term h(A,B,C).

    h = magnetic(plaquette at B) + (1/3)(elec_A + elec_B + elec_C)
        + (1/2)(penalty(A,B) + penalty(B,C)); summing h over all positions
    reproduces the full chain Hamiltonian with each piece counted once.
    """
    electric, penalty, magnetic = build_local_terms(g, c_g)
    blocks = np.zeros((3, 3, 3, 3, 81, 81))
    const = 6.0 / (2 * g * g)
    for ta, ba, tc, bc in itertools.product(range(3), repeat=4):
        h = const * np.eye(81) - magnetic[ta, ba, tc, bc] / (2 * g * g)
        diag = np.zeros(81)
        for i in range(81):
            sb, vc = divmod(i, 3)
            tb, vb, bb = site_labels(sb)
            # electric shares without site A's vertical (handled by va_diag)
            ea = 0.5 * g * g * (_CAS[ta] + _CAS[ba])
            ec_part = 0.5 * g * g * (_CAS[tc] + _CAS[bc] + _CAS[vc])
            diag[i] = (ea + electric[sb] + ec_part) / 3.0
            sa_tb = site_index(ta, 0, ba)  # penalty ignores A's vertical
            diag[i] += 0.5 * (penalty[sa_tb, sb]
                              + penalty[sb, site_index(tc, vc, bc)])
        blocks[ta, ba, tc, bc] = h + np.diag(diag)
    va_diag = 0.5 * g * g * _CAS / 3.0
    return ThreeSiteOperator(blocks, va_diag=va_diag)


def imaginary_gate(g: float, c_g: float, dtau: float) -> ThreeSiteOperator:
    """exp(-dtau h) block by block (site A's vertical enters as a scalar)."""
    ham = build_hamiltonian_gate(g, c_g)
    blocks = np.zeros_like(ham.blocks)
    for idx in itertools.product(range(3), repeat=4):
        blocks[idx] = sla.expm(-dtau * ham.blocks[idx])
    return ThreeSiteOperator(blocks, va_factor=np.exp(-dtau * ham.va_diag))


def _pattern_plane_indices(pattern):
    """(context, i) with i in the 81-dim mixing space for a Table pattern."""
    c1, c2, c3, c4, r1, r2, r3, r4 = pattern
    return (c1, c3, c2, c4), site_index(r2, r1, r4) * 3 + r3


def rotation_gate(rtype: str, theta: float, symmetrize: bool = True,
                  conj: bool = False) -> ThreeSiteOperator:
    """Unitary 3-site gate exp(theta G) for one Givens-rotation type.

    G sums |State2><State1| - h.c. over the pattern and (symmetrize) its CP
    conjugate; positive theta increases the State 2 amplitude.
    """
    from .ansatz import ROTATION_PATTERNS, _conj_pattern
    s1, s2 = ROTATION_PATTERNS[rtype]
    if conj:
        s1, s2 = _conj_pattern(s1), _conj_pattern(s2)
    variants = [(s1, s2)]
    if symmetrize:
        variants.append((_conj_pattern(s1), _conj_pattern(s2)))
    gens = {}
    for a, b in variants:
        ctx1, i1 = _pattern_plane_indices(a)
        ctx2, i2 = _pattern_plane_indices(b)
        if ctx1 != ctx2:
            raise ValueError("rotation changes context links")
        gen = gens.setdefault(ctx1, np.zeros((81, 81)))
        if gen[i2, i1] == 0.0:
            gen[i2, i1] += 1.0
            gen[i1, i2] -= 1.0
    blocks = np.zeros((3, 3, 3, 3, 81, 81))
    eye = np.eye(81)
    for idx in itertools.product(range(3), repeat=4):
        g = gens.get(idx)
        blocks[idx] = eye if g is None else sla.expm(theta * g)
    return ThreeSiteOperator(blocks)


# ---------------------------------------------------------------------------
# MPS unit cell in Vidal form
# ---------------------------------------------------------------------------

class MPSUnitCell:
    """Vidal-form cell: gammas[i] (chi_l, 27, chi_r), lambdas[i] = bond left
    of site i (unit 2-norm); the cell repeats periodically."""

    def __init__(self, length: int, chi: int):
        if length < 3:
            raise ValueError("unit cell must hold at least 3 sites")
        self.n = length
        self.chi = chi
        self.gammas = [np.zeros((1, _D, 1)) for _ in range(length)]
        for gm in self.gammas:
            gm[0, site_index(0, 0, 0), 0] = 1.0
        self.lambdas = [np.ones(1) for _ in range(length)]
        self.max_discard = 0.0

    def copy(self) -> "MPSUnitCell":
        out = MPSUnitCell.__new__(MPSUnitCell)
        out.n, out.chi = self.n, self.chi
        out.gammas = [g.copy() for g in self.gammas]
        out.lambdas = [l.copy() for l in self.lambdas]
        out.max_discard = self.max_discard
        return out

    def bond_dims(self):
        return [len(l) for l in self.lambdas]

    def theta(self, p: int) -> np.ndarray:
        """Three-site wavefunction tensor at positions p, p+1, p+2."""
        n = self.n
        i0, i1, i2, i3 = p % n, (p + 1) % n, (p + 2) % n, (p + 3) % n
        t = self.lambdas[i0][:, None, None] * self.gammas[i0]
        t = np.einsum("lar,r,rbs->labs", t, self.lambdas[i1],
                      self.gammas[i1], optimize=True)
        t = np.einsum("labs,s,sct->labct", t, self.lambdas[i2],
                      self.gammas[i2], optimize=True)
        return t * self.lambdas[i3][None, None, None, None, :]

    def canonical_residual(self) -> float:
        """Max deviation from left/right orthonormality over all sites."""
        worst = 0.0
        for i in range(self.n):
            j = (i + 1) % self.n
            a = self.lambdas[i][:, None, None] * self.gammas[i]
            left = np.einsum("lar,las->rs", a, a, optimize=True)
            b = self.gammas[i] * self.lambdas[j][None, None, :]
            right = np.einsum("lar,sar->ls", b, b, optimize=True)
            worst = max(worst,
                        np.max(np.abs(left - np.eye(left.shape[0]))),
                        np.max(np.abs(right - np.eye(right.shape[0]))))
        return float(worst)


def _split(mat, chi, lam_left_inv=None, tol=1e-14):
    """Gram-eigendecomposition split of mat (m x n) keeping <= chi values.

    Returns (U, s, R, discard) with mat ~= U @ R, R = diag(s) V, U
    orthonormal columns.  Much faster than a full SVD at these shapes.
    """
    gram = mat @ mat.T
    w, u = np.linalg.eigh(gram)
    w = w[::-1]
    u = u[:, ::-1]
    total = float(np.sum(np.abs(w)))
    keep = min(chi, int(np.sum(w > tol * max(w[0], tol))))
    keep = max(keep, 1)
    kept = float(np.sum(w[:keep]))
    discard = max(0.0, 1.0 - kept / total) if total > 0 else 0.0
    u = u[:, :keep]
    s = np.sqrt(np.maximum(w[:keep], 0.0))
    r = u.T @ mat
    return u, s, r, discard


def _safe_inv(lam):
    mx = lam.max() if len(lam) else 1.0
    return np.where(lam > 1e-12 * mx, 1.0 / np.maximum(lam, 1e-300), 0.0)


def apply_three_site_gate(cell: MPSUnitCell, gate: ThreeSiteOperator,
                          position: int, chi: int = None) -> float:
    """Apply a 3-site gate in place; returns the truncation discard weight."""
    chi = chi if chi is not None else cell.chi
    n = cell.n
    i0, i1, i2, i3 = (position % n, (position + 1) % n,
                      (position + 2) % n, (position + 3) % n)
    theta = gate.apply(cell.theta(position))
    dl, dr = theta.shape[0], theta.shape[-1]
    nrm = np.linalg.norm(theta)
    if nrm == 0:
        raise RuntimeError("state annihilated by gate")
    theta = theta / nrm
    # first splitting: (left, site0) | (site1, site2, right)
    m1 = theta.reshape(dl * _D, _D * _D * dr)
    u1, s1, r1, d1 = _split(m1, chi)
    k1 = len(s1)
    inv0 = _safe_inv(cell.lambdas[i0])
    cell.gammas[i0] = (u1.reshape(dl, _D, k1) * inv0[:, None, None])
    cell.lambdas[i1] = s1 / np.linalg.norm(s1)
    # second splitting: (bond, site1) | (site2, right)
    m2 = r1.reshape(k1 * _D, _D * dr)
    u2, s2, r2, d2 = _split(m2, chi)
    k2 = len(s2)
    inv1 = _safe_inv(s1 / np.linalg.norm(s1))
    cell.gammas[i1] = (u2.reshape(k1, _D, k2) * inv1[:, None, None])
    cell.lambdas[i2] = s2 / np.linalg.norm(s2)
    inv3 = _safe_inv(cell.lambdas[i3])
    v2 = (_safe_inv(s2)[:, None] * r2).reshape(k2, _D, dr)
    cell.gammas[i2] = v2 * inv3[None, None, :]
    discard = max(d1, d2)
    cell.max_discard = max(cell.max_discard, discard)
    return discard


def canonicalize(cell: MPSUnitCell, sweeps: int = 4):
    """Restore canonical form by identity-gate resplitting sweeps."""
    ident = ThreeSiteOperator(
        np.broadcast_to(np.eye(81), (3, 3, 3, 3, 81, 81)).copy())
    for _ in range(sweeps):
        for p in range(cell.n):
            apply_three_site_gate(cell, ident, p)
        if cell.canonical_residual() < 1e-9:
            break
    return cell


def energy_at(cell: MPSUnitCell, op: ThreeSiteOperator, position: int) -> float:
    theta = cell.theta(position)
    acted = op.apply(theta)
    num = float(np.tensordot(theta, acted, axes=theta.ndim))
    den = float(np.tensordot(theta, theta, axes=theta.ndim))
    return num / den


def cell_energy_density(cell: MPSUnitCell, ham: ThreeSiteOperator) -> float:
    return float(np.mean([energy_at(cell, ham, p) for p in range(cell.n)]))


def default_penalty_strength(g: float) -> float:
    return 20.0 * max(g * g * 1.5, 3.0 / (g * g))


_DEFAULT_SCHEDULE = ((0.1, 60), (0.03, 40), (0.01, 30), (0.001, 20))


@dataclass
class ItebdResult:
    cell: MPSUnitCell
    energy_density: float
    plaq_expectation: float
    penalty_expectation: float
    sweeps: int
    converged: bool
    discard_weight_max: float
    energy_history: list = field(default_factory=list)

    def record(self, g, chi, c_g, schedule):
        return {
            "g": g, "chi": chi, "cG": c_g,
            "dtau_schedule": [list(s) for s in schedule],
            "energy_density": self.energy_density,
            "plaq_expectation": self.plaq_expectation,
            "discard_weight_max": self.discard_weight_max,
            "penalty_expectation": self.penalty_expectation,
            "sweeps": self.sweeps, "converged": self.converged,
        }


def plaquette_operator_gate() -> ThreeSiteOperator:
    """(box + box^dag)/2 as a 3-site observable."""
    electric, penalty, magnetic = build_local_terms(1.0, 1.0)
    return ThreeSiteOperator(0.5 * magnetic)


def penalty_observable(c_g: float) -> ThreeSiteOperator:
    """(1/2)(penalty(A,B) + penalty(B,C)) as a 3-site observable."""
    penalty = (gauss_penalty_diagonal("top", c_g)
               + gauss_penalty_diagonal("bottom", c_g)).reshape(_D, _D)
    blocks = np.zeros((3, 3, 3, 3, 81, 81))
    for ta, ba, tc, bc in itertools.product(range(3), repeat=4):
        diag = np.zeros(81)
        for i in range(81):
            sb, vc = divmod(i, 3)
            sa_tb = site_index(ta, 0, ba)
            diag[i] = 0.5 * (penalty[sa_tb, sb]
                             + penalty[sb, site_index(tc, vc, bc)])
        blocks[ta, ba, tc, bc] = np.diag(diag)
    return ThreeSiteOperator(blocks)


def itebd_ground(g: float, c_g: float = None, schedule=_DEFAULT_SCHEDULE,
                 chi: int = 32, cell: MPSUnitCell = None,
                 energy_tol: float = 1e-9) -> ItebdResult:
    """Imaginary-time TEBD vacuum search on a 3-site unit cell.

    Second-order Trotter sweep: forward positions at dtau/2, then backward
    at dtau/2.  Each dtau stage runs until the energy-density change per
    sweep drops below energy_tol or its sweep budget is exhausted.
    """
    if c_g is None:
        c_g = default_penalty_strength(g)
    ham = build_hamiltonian_gate(g, c_g)
    if cell is None:
        cell = MPSUnitCell(3, chi)
    else:
        cell.chi = chi
    energy = cell_energy_density(cell, ham)
    history = [energy]
    total_sweeps = 0
    converged = True
    for dtau, budget in schedule:
        gate = imaginary_gate(g, c_g, dtau / 2.0)
        # looser per-stage threshold at large dtau: the Trotter error itself
        # moves the energy between sweeps; the final stage enforces energy_tol
        stage_tol = max(energy_tol, 1e-4 * dtau * dtau)
        stage_ok = False
        for _ in range(budget):
            for p in range(cell.n):
                apply_three_site_gate(cell, gate, p, chi)
            for p in reversed(range(cell.n)):
                apply_three_site_gate(cell, gate, p, chi)
            total_sweeps += 1
            new = cell_energy_density(cell, ham)
            history.append(new)
            if abs(new - energy) < stage_tol:
                energy = new
                stage_ok = True
                break
            energy = new
        converged = converged and stage_ok
    canonicalize(cell)
    energy = cell_energy_density(cell, ham)
    plaq = cell_energy_density(cell, plaquette_operator_gate())
    pen = cell_energy_density(cell, penalty_observable(c_g))
    return ItebdResult(cell, energy, plaq, pen, total_sweeps, converged,
                       cell.max_discard, history)


# ---------------------------------------------------------------------------
# domain decomposition on the infinite chain
# ---------------------------------------------------------------------------

def _domain_gate_sequence(length: int):
    """(rotation type, plaquette offset) list of the recursive domain prep."""
    if length == 1:
        return [("R1", 0)]
    if length == 2:
        return [("R1", 0), ("R1", 1), ("R3", 1), ("R4", 0)]
    seq = _domain_gate_sequence(length - 1)
    new = length - 1
    seq += [("R1", new), ("R3", new), ("R4", new - 1)]
    for p in range(1, length - 1):
        seq += [("R6", p), ("R7", p)]
    return seq


def _exact_domain_angles(length: int, g: float):
    """Optimal generic-circuit angles for an isolated open domain."""
    from scipy.optimize import minimize
    from . import hamiltonians as hm
    from .ansatz import build_domain_circuit
    from .spectral import exact_ground
    from .statevector import apply as circ_apply
    basis = hm.enumerate_gauss_basis(length, "open")
    h = hm.build_chain_hamiltonian(basis, g)
    _, v0 = exact_ground(h)
    circ = build_domain_circuit(basis, 0, length)
    psi0 = np.zeros(basis.dim)
    psi0[basis.index(hm.ChainConfig((0,) * length, (0,) * length,
                                    (0,) * (length + 1)))] = 1.0

    def neg(t):
        return -abs(np.vdot(v0, circ_apply(circ, t, psi0).amplitudes)) ** 2

    best = None
    for x0 in (np.full(circ.num_parameters, 0.3),
               np.full(circ.num_parameters, -0.3)):
        res = minimize(neg, x0, method="L-BFGS-B",
                       options={"maxiter": 2000, "ftol": 1e-15})
        if best is None or res.fun < best.fun:
            best = res
    return best.x, -best.fun


_STITCH_TYPES = ("R1", "R2", "R3", "R4", "R5", "R6", "R7")


def _apply_rotation(cell, rtype, plaquette, angle, chi):
    # gate position p puts the plaquette at site p+1 of the cell
    gate = rotation_gate(rtype, angle)
    apply_three_site_gate(cell, gate, (plaquette - 1) % cell.n, chi)


def _prepare_state(length, g, chi, cell_len, domain_specs, stitch_angles,
                   stitch_plaquettes):
    cell = MPSUnitCell(cell_len, chi)
    for start, seq, angles in domain_specs:
        for (rtype, off), ang in zip(seq, angles):
            _apply_rotation(cell, rtype, start + off, ang, chi)
    for p, angs in zip(stitch_plaquettes, stitch_angles):
        for rtype, ang in zip(_STITCH_TYPES, angs):
            if ang != 0.0:
                _apply_rotation(cell, rtype, p, ang, chi)
    return cell


def _apply_free_gates(base, free, theta, chi, first=0):
    cell = base.copy()
    for j in range(first, len(free)):
        if theta[j] != 0.0:
            rtype, p = free[j]
            _apply_rotation(cell, rtype, p, theta[j], chi)
    return cell


def _optimize_free_angles(base, free, theta, ham, chi, sweeps, bound=1.2):
    """Coordinate descent over free gate angles minimizing energy density.

    Gates are optimized in circuit order with a cached prefix state, so a
    line-search evaluation only re-applies the gates from the current one
    onward (zero angles are skipped entirely).
    """
    from scipy.optimize import minimize_scalar
    theta = np.asarray(theta, dtype=float).copy()
    best = cell_energy_density(_apply_free_gates(base, free, theta, chi), ham)
    for _ in range(sweeps):
        prefix = base.copy()
        for k in range(len(free)):
            def line(t, k=k):
                cell = prefix.copy()
                if t != 0.0:
                    rtype, p = free[k]
                    _apply_rotation(cell, rtype, p, t, chi)
                for j in range(k + 1, len(free)):
                    if theta[j] != 0.0:
                        rt, pp = free[j]
                        _apply_rotation(cell, rt, pp, theta[j], chi)
                return cell_energy_density(cell, ham)
            res = minimize_scalar(line, bounds=(-bound, bound),
                                  method="bounded", options={"xatol": 1e-3})
            if res.fun < best - 1e-12:
                best = res.fun
                theta[k] = float(res.x)
            if theta[k] != 0.0:
                rtype, p = free[k]
                _apply_rotation(prefix, rtype, p, theta[k], chi)
    return theta, best


def domain_stitch_on_mps(l: int, g: float, chi: int = 32,
                         optimize_stitch: bool = True, sweeps: int = 4,
                         seed: int = 0):
    """Initial domain ansatz on the infinite chain, optionally stitched.

    Unit cell length is l+1 (domain + one gap plaquette), doubled to 4 for
    l=1 since three-site gates need at least 3 distinct sites.  Domain
    angles come from maximizing overlap with the exact open-chain vacuum.
    Returns a dict with center-plaquette <box> before/after stitching.
    """
    if not 1 <= l <= 5:
        raise ValueError(f"domain length must be 1..5, got {l}")
    cell_len = l + 1 if l + 1 >= 3 else 2 * (l + 1)
    c_g = default_penalty_strength(g)
    ham = build_hamiltonian_gate(g, c_g)
    box_op = plaquette_operator_gate()

    if l == 1:
        angles, _ = _exact_domain_angles(1, g)
        domain_specs = [(0, _domain_gate_sequence(1), angles),
                        (2, _domain_gate_sequence(1), angles)]
        stitch_plaquettes = [1, 3]
    else:
        angles, _ = _exact_domain_angles(l, g)
        domain_specs = [(0, _domain_gate_sequence(l), angles)]
        stitch_plaquettes = [l]

    center = (l - 1) // 2  # measured plaquette; gate position center-1
    base = MPSUnitCell(cell_len, chi)
    for start, seq, angles in domain_specs:
        for (rtype, off), ang in zip(seq, angles):
            _apply_rotation(base, rtype, start + off, ang, chi)
    plaq_initial = energy_at(base, box_op, (center - 1) % cell_len)
    result = {
        "l": l, "g": g, "chi": chi, "cell_length": cell_len,
        "stitch_plaquettes": list(stitch_plaquettes),
        "plaq_initial": plaq_initial,
    }
    if not optimize_stitch:
        result["plaq_stitched"] = None
        return result

    # free parameters: all rotation types on the gap plaquettes, then one
    # refresh layer of the domain gate sequences (zero-initialized); the
    # gap-only stitch alone recovers only part of the error, the extra
    # layer lets the domain interior react to the now-entangled boundary
    free = [(rtype, p) for p in stitch_plaquettes for rtype in _STITCH_TYPES]
    for start, seq, _ in domain_specs:
        free += [(rtype, start + off) for rtype, off in seq]
    theta = np.zeros(len(free))
    theta, best = _optimize_free_angles(base, free, theta, ham, chi, sweeps)
    cell1 = _apply_free_gates(base, free, theta, chi)
    result["plaq_stitched"] = energy_at(cell1, box_op, (center - 1) % cell_len)
    result["stitch_angles"] = theta.tolist()
    result["stitched_energy_density"] = best
    return result
