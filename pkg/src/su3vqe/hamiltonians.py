"""Hamiltonians for truncated SU(3) plaquette systems.

Three families are provided:

* the single plaquette in the |p,q> multiplet basis with a hard cutoff,
* its color-parity (CP) even projection and the small named truncations
  used on hardware (trunc8, trunc6plus),
* Gauss-projected plaquette chains (open or periodic) with links truncated
  at the 3 representation, with plaquette matrix elements computed from the
  vertex-tensor recoupling in :mod:`su3vqe.recoupling`.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .multiplet import IrrepLabel, casimir
from . import recoupling
from .recoupling import Patch, conj_label, label_irrep, vertex_ok

__all__ = [
    "SparseHamiltonian",
    "PlaquetteBasis",
    "CpBasis",
    "ChainBasis",
    "InvalidCutoffError",
    "InvalidCouplingError",
    "SymmetryViolationError",
    "build_single_plaquette",
    "cp_permutation",
    "project_cp",
    "truncated_named_basis",
    "enumerate_gauss_basis",
    "build_chain_hamiltonian",
    "chain_cp_permutation",
    "chain_translation_permutation",
    "gauss_penalty_diagonal",
]


class InvalidCutoffError(ValueError):
    pass


class InvalidCouplingError(ValueError):
    pass


class SymmetryViolationError(ValueError):
    pass


@dataclass
class SparseHamiltonian:
    """Real symmetric operator in upper-triangle triplet form."""

    dim: int
    rows: np.ndarray
    cols: np.ndarray
    vals: np.ndarray

    @classmethod
    def from_dense(cls, h: np.ndarray, tol: float = 0.0) -> "SparseHamiltonian":
        h = np.asarray(h, dtype=float)
        asym = np.max(np.abs(h - h.T)) if h.size else 0.0
        if asym > 1e-10:
            raise SymmetryViolationError(f"matrix not symmetric, residual {asym:.3e}")
        iu = np.triu_indices(h.shape[0])
        mask = np.abs(h[iu]) > tol
        return cls(h.shape[0], iu[0][mask], iu[1][mask], h[iu][mask])

    def to_dense(self) -> np.ndarray:
        h = np.zeros((self.dim, self.dim))
        h[self.rows, self.cols] = self.vals
        off = self.rows != self.cols
        h[self.cols[off], self.rows[off]] = self.vals[off]
        return h

    def to_csr(self) -> sp.csr_matrix:
        off = self.rows != self.cols
        rows = np.concatenate([self.rows, self.cols[off]])
        cols = np.concatenate([self.cols, self.rows[off]])
        vals = np.concatenate([self.vals, self.vals[off]])
        return sp.csr_matrix((vals, (rows, cols)), shape=(self.dim, self.dim))

    def export_triplets(self, path):
        """Text export: header `dim nnz`, then `row col value` lines."""
        with open(path, "w") as f:
            f.write(f"{self.dim} {len(self.vals)}\n")
            for r, c, v in zip(self.rows, self.cols, self.vals):
                f.write(f"{r} {c} {float(v)!r}\n")


# ---------------------------------------------------------------------------
# single plaquette
# ---------------------------------------------------------------------------

class PlaquetteBasis:
    """|p,q> states with p,q in [0, cutoff], ordered lexicographically."""

    def __init__(self, cutoff: int):
        if cutoff < 1:
            raise InvalidCutoffError(f"cutoff must be >= 1, got {cutoff}")
        self.cutoff = cutoff
        self.states = [IrrepLabel(p, q)
                       for p in range(cutoff + 1) for q in range(cutoff + 1)]
        self._index = {(r.p, r.q): i for i, r in enumerate(self.states)}

    @property
    def dim(self) -> int:
        return len(self.states)

    def index(self, p: int, q: int) -> int:
        return self._index[(p, q)]


def build_single_plaquette(cutoff: int, g: float,
                           states=None) -> SparseHamiltonian:
    """Single-plaquette Hamiltonian 2g^2 |E|^2 + (6 - box - boxdag)/(2g^2).

    ``states`` optionally restricts the basis to an explicit ordered list of
    (p, q) labels (used for the named hardware truncations); transitions
    leaving the set are dropped (hard truncation).
    """
    if g <= 0:
        raise InvalidCouplingError(f"coupling must be positive, got {g}")
    if states is None:
        basis = PlaquetteBasis(cutoff)
        states = basis.states
    index = {(r.p, r.q): i for i, r in enumerate(states)}
    dim = len(states)
    h = np.zeros((dim, dim))
    for i, r in enumerate(states):
        h[i, i] = 2.0 * g * g * float(casimir(r)) + 3.0 / (g * g)
        # box |p,q> = |p+1,q> + |p-1,q+1> + |p,q-1>
        for dp, dq in ((1, 0), (-1, 1), (0, -1)):
            tgt = (r.p + dp, r.q + dq)
            j = index.get(tgt)
            if j is not None:
                h[j, i] += -1.0 / (2.0 * g * g)
                h[i, j] += -1.0 / (2.0 * g * g)
    # the loop above adds box and boxdag in one pass
    return SparseHamiltonian.from_dense(h)


def cp_permutation(states) -> np.ndarray:
    """Permutation array sending each state (p,q) to (q,p)."""
    index = {(r.p, r.q): i for i, r in enumerate(states)}
    return np.array([index[(r.q, r.p)] for r in states])


class CpBasis:
    """CP-even subspace of a parent basis with a (p,q)<->(q,p)-type pairing.

    ``perm`` is the CP permutation on the parent states.  Representatives are
    chosen as the smaller index of each orbit; fixed points map to themselves.
    """

    def __init__(self, parent_states, perm: np.ndarray):
        self.parent_states = list(parent_states)
        self.perm = np.asarray(perm)
        n = len(self.parent_states)
        vectors = []
        members = []
        for i in range(n):
            j = int(self.perm[i])
            if j < i:
                continue
            v = np.zeros(n)
            if i == j:
                v[i] = 1.0
            else:
                v[i] = v[j] = 1.0 / np.sqrt(2.0)
            vectors.append(v)
            members.append((i, j))
        self.matrix = np.array(vectors).T  # parent_dim x cp_dim
        self.members = members

    @property
    def dim(self) -> int:
        return self.matrix.shape[1]

    def lift(self, v: np.ndarray) -> np.ndarray:
        """Embed a CP-even vector back into the parent basis."""
        return self.matrix @ v

    def restrict(self, v: np.ndarray) -> np.ndarray:
        return self.matrix.T @ v


def project_cp(ham: SparseHamiltonian, cp_basis: CpBasis) -> SparseHamiltonian:
    """Restrict a CP-commuting Hamiltonian to its CP-even span."""
    h = ham.to_dense()
    perm = cp_basis.perm
    comm = h[np.ix_(perm, perm)] - h
    if np.max(np.abs(comm)) > 1e-10:
        raise SymmetryViolationError(
            f"Hamiltonian does not commute with CP, residual {np.max(np.abs(comm)):.3e}")
    b = cp_basis.matrix
    return SparseHamiltonian.from_dense(b.T @ h @ b)


_TRUNC8_STATES = [IrrepLabel(0, 0), IrrepLabel(0, 1), IrrepLabel(1, 0), IrrepLabel(1, 1)]
_TRUNC6P_STATES = [IrrepLabel(0, 0), IrrepLabel(0, 1), IrrepLabel(0, 2),
                   IrrepLabel(1, 0), IrrepLabel(1, 1), IrrepLabel(2, 0)]


def truncated_named_basis(name: str, g: float):
    """The two-qubit hardware truncations.

    trunc8: multiplet Hamiltonian restricted to {1, 3bar, 3, 8} (4 states,
    basis ordered as the 2-qubit register |p q>).  trunc6plus: CP-even
    projection of the restriction to {1, 3, 3bar, 6, 6bar, 8} (4 CP-even
    states).  Returns (hamiltonian, states-or-cp-basis).
    """
    if name == "trunc8":
        ham = build_single_plaquette(1, g, states=_TRUNC8_STATES)
        return ham, list(_TRUNC8_STATES)
    if name == "trunc6plus":
        ham6 = build_single_plaquette(2, g, states=_TRUNC6P_STATES)
        cpb = CpBasis(_TRUNC6P_STATES, cp_permutation(_TRUNC6P_STATES))
        return project_cp(ham6, cpb), cpb
    raise ValueError(f"unknown truncation name {name!r}")


# ---------------------------------------------------------------------------
# plaquette chains truncated at the 3 representation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ChainConfig:
    """Link labels of one Gauss-allowed chain configuration.

    tops/bottoms have one entry per plaquette; verts has length L+1 for open
    chains and L for periodic ones (vert L wraps to vert 0).
    """

    tops: tuple
    bottoms: tuple
    verts: tuple


class ChainBasis:
    """All Gauss-allowed link configurations of an L-plaquette chain."""

    def __init__(self, length: int, boundary: str, configs):
        self.length = length
        self.boundary = boundary
        self.configs = list(configs)
        self._index = {c: i for i, c in enumerate(self.configs)}

    @property
    def dim(self) -> int:
        return len(self.configs)

    def index(self, config: ChainConfig) -> int:
        return self._index[config]

    def links(self, config: ChainConfig):
        """All link labels, each physical link exactly once."""
        return list(config.tops) + list(config.bottoms) + list(config.verts)

    def patch(self, config: ChainConfig, i: int) -> Patch:
        """The 8-link patch of plaquette i (missing neighbors read as singlet)."""
        L = self.length
        tops, bottoms, verts = config.tops, config.bottoms, config.verts
        if self.boundary == "periodic":
            c1, c3 = tops[(i - 1) % L], bottoms[(i - 1) % L]
            c2, c4 = tops[(i + 1) % L], bottoms[(i + 1) % L]
            r1, r3 = verts[i % L], verts[(i + 1) % L]
        else:
            c1 = tops[i - 1] if i > 0 else 0
            c3 = bottoms[i - 1] if i > 0 else 0
            c2 = tops[i + 1] if i < L - 1 else 0
            c4 = bottoms[i + 1] if i < L - 1 else 0
            r1, r3 = verts[i], verts[i + 1]
        return Patch(c1, c2, c3, c4, r1, tops[i], r3, bottoms[i])

    def replace_plaquette(self, config: ChainConfig, i: int,
                          r1: int, r2: int, r3: int, r4: int) -> ChainConfig:
        """Config with plaquette i's four loop links replaced."""
        L = self.length
        tops = list(config.tops)
        bottoms = list(config.bottoms)
        verts = list(config.verts)
        tops[i] = r2
        bottoms[i] = r4
        if self.boundary == "periodic":
            verts[i % L] = r1
            verts[(i + 1) % L] = r3
        else:
            verts[i] = r1
            verts[i + 1] = r3
        return ChainConfig(tuple(tops), tuple(bottoms), tuple(verts))

    def cp_conjugate_config(self, config: ChainConfig) -> ChainConfig:
        return ChainConfig(tuple(conj_label(a) for a in config.tops),
                           tuple(conj_label(a) for a in config.bottoms),
                           tuple(conj_label(a) for a in config.verts))


def _vertex_constraints_ok(t_left, t_right, v) -> bool:
    """Top-vertex rule: legs conj(T_{i-1}), T_i, conj(V_i)."""
    return vertex_ok(conj_label(t_left), t_right, conj_label(v))


def _bottom_ok(b_left, b_right, v) -> bool:
    """Bottom-vertex rule: legs conj(B_{i-1}), B_i, V_i."""
    return vertex_ok(conj_label(b_left), b_right, v)


def enumerate_gauss_basis(length: int, boundary: str = "open") -> ChainBasis:
    """Depth-first enumeration of Gauss-allowed chain configurations.

    Open boundaries fix the dangling external links to the singlet.  The
    result is deterministically ordered (lexicographic in the DFS choice
    sequence T_0, B_0, V_1, T_1, B_1, ...).
    """
    if length < 1:
        raise InvalidCutoffError(f"chain length must be >= 1, got {length}")
    if boundary not in ("open", "periodic"):
        raise ValueError(f"boundary must be open or periodic, got {boundary!r}")
    L = length
    configs = []
    labels = (0, 1, 2)

    if boundary == "open":
        def rec(i, tops, bottoms, verts):
            if i == L:
                # right boundary: external links are singlets
                vL = conj_label(tops[-1])
                if not _vertex_constraints_ok(tops[-1], 0, vL):
                    return
                if not _bottom_ok(bottoms[-1], 0, vL):
                    return
                configs.append(ChainConfig(tuple(tops), tuple(bottoms),
                                           tuple(verts) + (vL,)))
                return
            t_prev = tops[-1] if i > 0 else 0
            b_prev = bottoms[-1] if i > 0 else 0
            for t in labels:
                for b in labels:
                    for v in labels:
                        if i == 0 and verts == []:
                            pass
                        # vertex at the left of plaquette i uses vert i
                        if not _vertex_constraints_ok(t_prev, t, v):
                            continue
                        if not _bottom_ok(b_prev, b, v):
                            continue
                        rec(i + 1, tops + [t], bottoms + [b], verts + [v])

        # left boundary external links are singlets, handled by t_prev=b_prev=0
        rec(0, [], [], [])
    else:
        def rec(i, tops, bottoms, verts):
            if i == L:
                # closing vertex between plaquette L-1 and plaquette 0 (vert 0)
                if not _vertex_constraints_ok(tops[-1], tops[0], verts[0]):
                    return
                if not _bottom_ok(bottoms[-1], bottoms[0], verts[0]):
                    return
                configs.append(ChainConfig(tuple(tops), tuple(bottoms),
                                           tuple(verts)))
                return
            for t in labels:
                for b in labels:
                    if i == 0:
                        # vert 0 is chosen last (depends on wrap); defer checks
                        for v0 in labels:
                            rec(i + 1, tops + [t], bottoms + [b], verts + [v0])
                    else:
                        for v in labels:
                            if not _vertex_constraints_ok(tops[-1], t, v):
                                continue
                            if not _bottom_ok(bottoms[-1], b, v):
                                continue
                            rec(i + 1, tops + [t], bottoms + [b], verts + [v])

        rec(0, [], [], [])
        # re-filter: vert 0's own vertices were deferred above
        good = []
        basis_tmp = ChainBasis(L, "periodic", configs)
        for c in configs:
            if all(basis_tmp.patch(c, i).gauss_valid() for i in range(L)):
                good.append(c)
        configs = good

    configs.sort(key=lambda c: c.tops + c.bottoms + c.verts)
    return ChainBasis(L, boundary, configs)


def chain_electric_diagonal(basis: ChainBasis, g: float) -> np.ndarray:
    cas = np.array([0.0, 4.0 / 3.0, 4.0 / 3.0])
    return np.array([0.5 * g * g * sum(cas[a] for a in basis.links(c))
                     for c in basis.configs])


def build_chain_hamiltonian(basis: ChainBasis, g: float) -> SparseHamiltonian:
    """Chain Hamiltonian: electric diagonal plus recoupled magnetic term.

    H = (g^2/2) sum_links C(R) + sum_plaquettes [6 - box - boxdag]/(2g^2).
    """
    if g <= 0:
        raise InvalidCouplingError(f"coupling must be positive, got {g}")
    dim = basis.dim
    L = basis.length
    h = np.diag(chain_electric_diagonal(basis, g) + L * 3.0 / (g * g))
    box = chain_box_operator(basis)
    h -= (box + box.T) / (2.0 * g * g)
    asym = np.max(np.abs(h - h.T))
    if asym > 1e-10:
        raise SymmetryViolationError(f"assembled chain Hamiltonian asymmetry {asym:.3e}")
    return SparseHamiltonian.from_dense(h)


def chain_box_operator(basis: ChainBasis, plaquette=None) -> np.ndarray:
    """Dense matrix of box (summed over plaquettes unless one is given)."""
    dim = basis.dim
    box = np.zeros((dim, dim))
    plaquettes = range(basis.length) if plaquette is None else [plaquette]
    for i in plaquettes:
        groups = {}
        for k, cfg in enumerate(basis.configs):
            p = basis.patch(cfg, i)
            ctx = _context_key(basis, cfg, i)
            groups.setdefault(ctx, []).append((k, p))
        for members in groups.values():
            for (kb, pb) in members:
                for (kk, pk) in members:
                    if kb == kk:
                        continue
                    m = recoupling.plaquette_matrix_element(pb, pk)
                    if m != 0.0:
                        box[kb, kk] += m
    return box


def _context_key(basis: ChainBasis, cfg: ChainConfig, i: int):
    """All link labels except the four loop links of plaquette i."""
    L = basis.length
    tops = list(cfg.tops)
    bottoms = list(cfg.bottoms)
    verts = list(cfg.verts)
    tops[i] = bottoms[i] = -1
    if basis.boundary == "periodic":
        verts[i % L] = verts[(i + 1) % L] = -1
    else:
        verts[i] = verts[i + 1] = -1
    return tuple(tops) + tuple(bottoms) + tuple(verts)


def chain_cp_permutation(basis: ChainBasis) -> np.ndarray:
    return np.array([basis.index(basis.cp_conjugate_config(c))
                     for c in basis.configs])


def chain_translation_permutation(basis: ChainBasis) -> np.ndarray:
    """Cyclic shift by one plaquette (periodic chains only)."""
    if basis.boundary != "periodic":
        raise ValueError("translation is defined for periodic chains only")
    out = []
    for c in basis.configs:
        shifted = ChainConfig(c.tops[1:] + c.tops[:1],
                              c.bottoms[1:] + c.bottoms[:1],
                              c.verts[1:] + c.verts[:1])
        out.append(basis.index(shifted))
    return np.array(out)


# ---------------------------------------------------------------------------
# Gauss penalty (used by the blocked-site MPS of the infinite chain)
# ---------------------------------------------------------------------------

def gauss_penalty_diagonal(which: str, strength: float) -> np.ndarray:
    """Diagonal of c_G (1 - Pi_singlet) on a pair of neighboring blocked sites.

    A blocked site holds (top, vertical, bottom) links with index
    9*top + 3*vert + bottom.  The top vertex between sites (i-1, i) joins
    T_{i-1}, T_i and V_i; the bottom vertex joins B_{i-1}, B_i and V_i.
    Returns the 729-entry diagonal over (site_{i-1}, site_i).
    """
    if strength <= 0:
        raise InvalidCouplingError(f"penalty strength must be positive, got {strength}")
    if which not in ("top", "bottom"):
        raise ValueError(f"vertex must be top or bottom, got {which!r}")
    diag = np.zeros(27 * 27)
    for tl, vl, bl in itertools.product(range(3), repeat=3):
        for tr, vr, br in itertools.product(range(3), repeat=3):
            if which == "top":
                ok = _vertex_constraints_ok(tl, tr, vr)
            else:
                ok = _bottom_ok(bl, br, vr)
            if not ok:
                i = (9 * tl + 3 * vl + bl) * 27 + (9 * tr + 3 * vr + br)
                diag[i] = strength
    return diag
