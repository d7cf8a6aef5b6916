"""SU(3) irrep bookkeeping and vertex singlet tensors.

Irreps are labeled by a pair of non-negative integers (p, q) counting upper
and lower tensor indices.  Only the small irreps needed for the truncated
plaquette-chain simulations are supported by the Clebsch-Gordan table:
1=(0,0), 3=(1,0), 3bar=(0,1), 6=(2,0), 6bar=(0,2), 8=(1,1).

Vertex singlet tensors encode Gauss's law at 3-link vertices: the unique
(for the truncation-3 link set) invariant contraction of the three irreps
meeting at a vertex.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

__all__ = [
    "IrrepLabel",
    "CgTensor",
    "UnsupportedIrrepError",
    "NoSingletError",
    "ONE",
    "THREE",
    "THREE_BAR",
    "SIX",
    "SIX_BAR",
    "EIGHT",
    "casimir",
    "irrep_dim",
    "cp_conjugate",
    "generators",
    "vertex_singlet_multiplicity",
    "singlet_tensor",
]


class UnsupportedIrrepError(ValueError):
    """Raised when an irrep falls outside the implemented CG table."""


class NoSingletError(ValueError):
    """Raised when a singlet tensor is requested for a non-singlet triple."""


@dataclass(frozen=True, order=True)
class IrrepLabel:
    """An SU(3) irrep as upper/lower tensor index counts (p, q)."""

    p: int
    q: int

    def __post_init__(self):
        if self.p < 0 or self.q < 0:
            raise ValueError(f"irrep labels must be non-negative, got ({self.p},{self.q})")

    def __repr__(self):
        names = {(0, 0): "1", (1, 0): "3", (0, 1): "3bar", (2, 0): "6",
                 (0, 2): "6bar", (1, 1): "8"}
        name = names.get((self.p, self.q))
        return f"Irrep[{name}]" if name else f"Irrep[({self.p},{self.q})]"


ONE = IrrepLabel(0, 0)
THREE = IrrepLabel(1, 0)
THREE_BAR = IrrepLabel(0, 1)
SIX = IrrepLabel(2, 0)
SIX_BAR = IrrepLabel(0, 2)
EIGHT = IrrepLabel(1, 1)

#: the link irrep set for chains truncated at the 3 representation
TRUNC3 = (ONE, THREE, THREE_BAR)


def casimir(r: IrrepLabel) -> Fraction:
    """Quadratic Casimir (p^2 + q^2 + pq + 3p + 3q)/3, exactly."""
    p, q = r.p, r.q
    return Fraction(p * p + q * q + p * q + 3 * p + 3 * q, 3)


def irrep_dim(r: IrrepLabel) -> int:
    """Dimension (p+1)(q+1)(p+q+2)/2."""
    p, q = r.p, r.q
    return (p + 1) * (q + 1) * (p + q + 2) // 2


def cp_conjugate(r: IrrepLabel) -> IrrepLabel:
    """Color-parity conjugate (p,q) -> (q,p)."""
    return IrrepLabel(r.q, r.p)


# Gell-Mann matrices
_LAMBDA = np.zeros((8, 3, 3), dtype=complex)
_LAMBDA[0] = [[0, 1, 0], [1, 0, 0], [0, 0, 0]]
_LAMBDA[1] = [[0, -1j, 0], [1j, 0, 0], [0, 0, 0]]
_LAMBDA[2] = [[1, 0, 0], [0, -1, 0], [0, 0, 0]]
_LAMBDA[3] = [[0, 0, 1], [0, 0, 0], [1, 0, 0]]
_LAMBDA[4] = [[0, 0, -1j], [0, 0, 0], [1j, 0, 0]]
_LAMBDA[5] = [[0, 0, 0], [0, 0, 1], [0, 1, 0]]
_LAMBDA[6] = [[0, 0, 0], [0, 0, -1j], [0, 1j, 0]]
_LAMBDA[7] = np.diag([1, 1, -2]) / np.sqrt(3)


def generators(r: IrrepLabel) -> np.ndarray:
    """The 8 SU(3) generator matrices in irrep ``r`` (Gell-Mann basis).

    Only the singlet, fundamental and antifundamental are needed for the
    equivariance checks of the stored vertex tensors.
    """
    if r == ONE:
        return np.zeros((8, 1, 1), dtype=complex)
    if r == THREE:
        return _LAMBDA / 2.0
    if r == THREE_BAR:
        # conjugate rep: T_a -> -T_a^* = -T_a^T (Gell-Mann matrices are Hermitian)
        return -np.transpose(_LAMBDA, (0, 2, 1)) / 2.0
    raise UnsupportedIrrepError(f"no generator table for {r}")


@dataclass(frozen=True)
class CgTensor:
    """A unit-normalized invariant 3-leg tensor for a triple of irreps."""

    irreps: tuple
    coefficients: np.ndarray

    def self_contraction(self) -> float:
        c = self.coefficients
        return float(np.sum(c * c))

    def equivariance_residual(self) -> float:
        """Max norm of the summed generator action over all three legs."""
        g1, g2, g3 = (generators(r) for r in self.irreps)
        c = self.coefficients.astype(complex)
        res = (np.einsum("aij,jkl->aikl", g1, c)
               + np.einsum("ajk,ikl->aijl", g2, c)
               + np.einsum("alk,ijk->aijl", g3, c))
        return float(np.max(np.abs(res)))


def _check_trunc3(*irreps: IrrepLabel):
    for r in irreps:
        if r not in TRUNC3:
            raise UnsupportedIrrepError(
                f"unsupported irrep {r}: vertex tensors implemented for 1, 3, 3bar only")


def vertex_singlet_multiplicity(r1: IrrepLabel, r2: IrrepLabel, r3: IrrepLabel) -> int:
    """Number of singlets in r1 x r2 x r3 for the truncation-3 link set.

    The nonzero cases are {1,1,1}, permutations of {3,3bar,1}, {3,3,3} and
    {3bar,3bar,3bar}, each with multiplicity one.
    """
    _check_trunc3(r1, r2, r3)
    key = tuple(sorted((r1, r2, r3)))
    singlets = {
        (ONE, ONE, ONE),
        tuple(sorted((THREE, THREE_BAR, ONE))),
        (THREE, THREE, THREE),
        (THREE_BAR, THREE_BAR, THREE_BAR),
    }
    return 1 if key in singlets else 0


_EPS = np.zeros((3, 3, 3))
for _i, _j, _k in [(0, 1, 2), (1, 2, 0), (2, 0, 1)]:
    _EPS[_i, _j, _k] = 1.0
for _i, _j, _k in [(0, 2, 1), (2, 1, 0), (1, 0, 2)]:
    _EPS[_i, _j, _k] = -1.0


def singlet_tensor(r1: IrrepLabel, r2: IrrepLabel, r3: IrrepLabel) -> CgTensor:
    """The unique unit-normalized singlet tensor for (r1, r2, r3).

    Sign convention: the first nonzero coefficient in lexicographic component
    order is positive.
    """
    if vertex_singlet_multiplicity(r1, r2, r3) == 0:
        raise NoSingletError(f"no singlet in {r1} x {r2} x {r3}")
    irreps = (r1, r2, r3)
    dims = tuple(irrep_dim(r) for r in irreps)
    coeff = np.zeros(dims)
    if irreps == (THREE, THREE, THREE) or irreps == (THREE_BAR, THREE_BAR, THREE_BAR):
        coeff = _EPS / np.sqrt(6.0)
    elif irreps == (ONE, ONE, ONE):
        coeff[0, 0, 0] = 1.0
    else:
        # one leg is a singlet; the 3 and 3bar legs pair with delta/sqrt(3)
        pos3 = irreps.index(THREE)
        pos3b = irreps.index(THREE_BAR)
        idx = [0, 0, 0]
        for i in range(3):
            idx[pos3] = i
            idx[pos3b] = i
            coeff[tuple(idx)] = 1.0 / np.sqrt(3.0)
    # enforce the sign convention (already positive for the closed forms above,
    # kept explicit so the convention survives future table extensions)
    flat = coeff.ravel()
    first = flat[np.nonzero(flat)[0][0]]
    if first < 0:
        coeff = -coeff
    return CgTensor(irreps=irreps, coefficients=coeff)
