"""Exact diagonalization oracle and Krylov/Lanczos initialization."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .hamiltonians import SparseHamiltonian, build_single_plaquette
from .statevector import StateVector

__all__ = [
    "KrylovResult",
    "ThresholdUnreachableError",
    "exact_ground",
    "lanczos_initialize",
    "required_krylov_dim",
]

_DENSE_LIMIT = 4096


class ThresholdUnreachableError(RuntimeError):
    def __init__(self, threshold, best):
        self.threshold = threshold
        self.best = best
        super().__init__(
            f"overlap threshold {threshold} unreachable, best achieved {best}")


def _as_csr(h):
    if isinstance(h, SparseHamiltonian):
        return h.to_csr()
    if sp.issparse(h):
        return h.tocsr()
    return np.asarray(h, dtype=float)


def exact_ground(h):
    """Lowest eigenpair (E0, v0) with a deterministic sign convention."""
    m = _as_csr(h)
    dim = m.shape[0]
    if dim <= _DENSE_LIMIT:
        dense = m.toarray() if sp.issparse(m) else m
        w, v = np.linalg.eigh(dense)
        e0, v0 = float(w[0]), v[:, 0]
    else:
        w, v = spla.eigsh(m, k=1, which="SA")
        e0, v0 = float(w[0]), v[:, 0]
    resid = np.linalg.norm(m @ v0 - e0 * v0)
    if resid > 1e-10:
        raise RuntimeError(f"eigensolver residual {resid:.3e} exceeds 1e-10")
    # largest-magnitude component positive
    if v0[np.argmax(np.abs(v0))] < 0:
        v0 = -v0
    return e0, v0


@dataclass
class KrylovResult:
    ritz_vector: StateVector
    ritz_value: float
    dimension: int
    overlap_sq: float = None
    breakdown: bool = False


def lanczos_initialize(h, psi_seed, d: int, exact_vacuum=None) -> KrylovResult:
    """Lowest Ritz pair from the d-dimensional Krylov space of psi_seed.

    Fully reorthogonalized (two modified Gram-Schmidt passes per vector) so
    tiny tail overlaps are numerically meaningful.  On breakdown the result
    is returned at the achieved dimension with the flag set.
    """
    m = _as_csr(h)
    dim = m.shape[0]
    if d < 1 or d > dim:
        raise ValueError(f"Krylov dimension must be in [1, {dim}], got {d}")
    psi = psi_seed.amplitudes if isinstance(psi_seed, StateVector) else np.asarray(psi_seed)
    psi = psi.astype(float) if np.isrealobj(psi) else psi
    if abs(np.linalg.norm(psi) - 1.0) > 1e-10:
        raise ValueError("seed state must be normalized")
    vecs = [psi / np.linalg.norm(psi)]
    breakdown = False
    while len(vecs) < d:
        w = m @ vecs[-1]
        for _ in range(2):
            for v in vecs:
                w = w - np.dot(np.conj(v), w) * v
        nrm = np.linalg.norm(w)
        if nrm < 1e-12:
            breakdown = True
            break
        vecs.append(w / nrm)
    basis = np.array(vecs).T  # dim x k
    small = basis.conj().T @ (m @ basis)
    small = (small + small.conj().T) / 2
    w_small, v_small = np.linalg.eigh(small)
    ritz = basis @ v_small[:, 0]
    ritz = ritz / np.linalg.norm(ritz)
    if ritz[np.argmax(np.abs(ritz))].real < 0:
        ritz = -ritz
    overlap = None
    if exact_vacuum is not None:
        overlap = float(abs(np.vdot(ritz, exact_vacuum)) ** 2)
    return KrylovResult(StateVector(ritz.astype(complex), basis="projected"),
                        float(w_small[0]), len(vecs), overlap, breakdown)


def krylov_overlap_curve(h, psi_seed, max_d):
    """Overlap^2 with the exact vacuum for d = 1..max_d (one Lanczos pass)."""
    _, v0 = exact_ground(h)
    out = []
    for d in range(1, max_d + 1):
        res = lanczos_initialize(h, psi_seed, d, exact_vacuum=v0)
        out.append(res.overlap_sq)
        if res.breakdown or res.dimension < d:
            break
    return out


def required_krylov_dim(g: float, cutoff: int, threshold: float = 0.999999) -> int:
    """Smallest Krylov dimension whose Ritz vector reaches the overlap
    threshold against the exact vacuum, electric-vacuum seed."""
    h = build_single_plaquette(cutoff, g)
    dim = h.dim
    seed = np.zeros(dim)
    seed[0] = 1.0  # |0,0> is first in lexicographic order
    _, v0 = exact_ground(h)
    best = 0.0
    for d in range(1, dim + 1):
        res = lanczos_initialize(h, seed, d, exact_vacuum=v0)
        best = max(best, res.overlap_sq)
        if res.overlap_sq >= threshold:
            return d
        if res.breakdown:
            break
    raise ThresholdUnreachableError(threshold, best)
