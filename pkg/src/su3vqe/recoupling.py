"""Plaquette-operator matrix elements in the Gauss-projected multiplet basis.

A plaquette in a chain is surrounded by the 8-link patch of Fig-style labels

        c1  r2  c2          (c1, c2: top links of the neighboring plaquettes)
          r1  r3            (r1, r3: left/right vertical links)
        c3  r4  c4          (c3, c4: bottom links of the neighbors)

with horizontal links oriented rightward and vertical links oriented upward.
At each vertex the three link-ends form an SU(3) singlet (incoming end
contributes the link irrep, outgoing end its conjugate).  The matrix element
of the plaquette (trace) operator between two such configurations is obtained
by contracting the four vertex singlet tensors of the initial and final
configurations with fundamental-representation link insertions around the
plaquette, then dividing by the patch norms.

Link labels are encoded as ints: 0 = singlet, 1 = 3, 2 = 3bar.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from .multiplet import (
    ONE,
    THREE,
    THREE_BAR,
    IrrepLabel,
    singlet_tensor,
    vertex_singlet_multiplicity,
)

__all__ = [
    "LABELS",
    "conj_label",
    "label_irrep",
    "vertex_ok",
    "plaquette_matrix_element",
    "Patch",
]

LABELS = (0, 1, 2)  # 1, 3, 3bar
_IRREPS = (ONE, THREE, THREE_BAR)
_DIMS = (1, 3, 3)
_CONJ = (0, 2, 1)

_EPS = np.zeros((3, 3, 3))
for _i, _j, _k in [(0, 1, 2), (1, 2, 0), (2, 0, 1)]:
    _EPS[_i, _j, _k] = 1.0
for _i, _j, _k in [(0, 2, 1), (2, 1, 0), (1, 0, 2)]:
    _EPS[_i, _j, _k] = -1.0


def conj_label(a: int) -> int:
    """CP conjugate of a link label (3 <-> 3bar)."""
    return _CONJ[a]


def label_irrep(a: int) -> IrrepLabel:
    return _IRREPS[a]


@lru_cache(maxsize=None)
def _vertex_mult(a: int, b: int, c: int) -> int:
    return vertex_singlet_multiplicity(_IRREPS[a], _IRREPS[b], _IRREPS[c])


def vertex_ok(a: int, b: int, c: int) -> bool:
    """Whether the three (already orientation-conjugated) legs form a singlet."""
    return _vertex_mult(a, b, c) == 1


@lru_cache(maxsize=None)
def _vertex_tensor(a: int, b: int, c: int) -> np.ndarray:
    return singlet_tensor(_IRREPS[a], _IRREPS[b], _IRREPS[c]).coefficients


# Fundamental link insertions.  A link state |R, t, h> carries a tail index t
# (transforming in R at the source vertex) and a head index h (transforming in
# conj(R) at the target vertex).  Multiplication by U_{ab} (a at the tail end,
# b at the head end) raises 1 -> 3 -> 3bar -> 1 inside the truncated space;
# multiplication by U*_{ab} lowers in the conjugate direction.  Tensors are
# indexed O[t', h', a, b, t, h].


def _delta_insertion(d_new: int, swap: bool) -> np.ndarray:
    # 1 -> 3 (or 1 -> 3bar):  <R', t', h'| . |1> = delta_{t'a} delta_{h'b}/sqrt(3)
    # 3bar -> 1 (or 3 -> 1):  <1| . |R, t, h>   = delta_{at} delta_{bh}/sqrt(3)
    if not swap:
        o = np.zeros((3, 3, 3, 3, 1, 1))
        for a in range(3):
            for b in range(3):
                o[a, b, a, b, 0, 0] = 1.0 / np.sqrt(3.0)
    else:
        o = np.zeros((1, 1, 3, 3, 3, 3))
        for a in range(3):
            for b in range(3):
                o[0, 0, a, b, a, b] = 1.0 / np.sqrt(3.0)
    return o


def _epsilon_insertion() -> np.ndarray:
    # 3 -> 3bar (or 3bar -> 3):  1/2 eps_{t' a t} eps_{h' b h}
    return 0.5 * np.einsum("cam,kbn->ckabmn", _EPS, _EPS)


@lru_cache(maxsize=None)
def _insertion(ket_label: int, conjugate: bool):
    """Insertion tensor for one loop link, or None when the transition is
    outside the truncated space."""
    if not conjugate:  # multiply by U_{ab}
        bra = {0: 1, 1: 2, 2: 0}[ket_label]
    else:  # multiply by U*_{ab}
        bra = {0: 2, 2: 1, 1: 0}[ket_label]
    if ket_label == 0:
        return bra, _delta_insertion(3, swap=False)
    if bra == 0:
        return bra, _delta_insertion(3, swap=True)
    return bra, _epsilon_insertion()


class Patch:
    """The 8 link labels around one plaquette: context c1..c4, loop r1..r4."""

    __slots__ = ("c1", "c2", "c3", "c4", "r1", "r2", "r3", "r4")

    def __init__(self, c1, c2, c3, c4, r1, r2, r3, r4):
        self.c1, self.c2, self.c3, self.c4 = c1, c2, c3, c4
        self.r1, self.r2, self.r3, self.r4 = r1, r2, r3, r4

    def key(self):
        return (self.c1, self.c2, self.c3, self.c4,
                self.r1, self.r2, self.r3, self.r4)

    def vertices(self):
        """Leg triples (orientation-conjugated) at the four plaquette corners.

        Order per vertex: (left horizontal leg, right horizontal leg,
        vertical leg).
        """
        return (
            (_CONJ[self.c1], self.r2, _CONJ[self.r1]),   # top left
            (_CONJ[self.r2], self.c2, _CONJ[self.r3]),   # top right
            (_CONJ[self.c3], self.r4, self.r1),          # bottom left
            (_CONJ[self.r4], self.c4, self.r3),          # bottom right
        )

    def gauss_valid(self) -> bool:
        return all(vertex_ok(*v) for v in self.vertices())


def _vertex_arrays(patch: Patch):
    return tuple(_vertex_tensor(*v) for v in patch.vertices())


@lru_cache(maxsize=None)
def _patch_norm_sq(key) -> float:
    patch = Patch(*key)
    tl, tr, bl, br = _vertex_arrays(patch)
    # shared context indices between bra and ket; loop-link indices identified
    # through the identity operator.
    # index letters: hC1=a tT=b hVl=c | hT=d tC2=e hVr=f | hC3=g tB=h tVl=i
    #                hB=j tC4=k tVr=l
    val = np.einsum("abc,def,ghi,jkl,abc,def,ghi,jkl->",
                    tl, tr, bl, br, tl, tr, bl, br, optimize=True)
    return float(val)


@lru_cache(maxsize=None)
def _box_element_cached(bra_key, ket_key) -> float:
    bra = Patch(*bra_key)
    ket = Patch(*ket_key)
    if (bra.c1, bra.c2, bra.c3, bra.c4) != (ket.c1, ket.c2, ket.c3, ket.c4):
        return 0.0
    if not (bra.gauss_valid() and ket.gauss_valid()):
        return 0.0
    # box = Tr(U_B U_Vr Udag_T Udag_Vl):
    #   bottom along, right vertical along, top against, left vertical against
    ins = {}
    for name, ket_label, bra_label, conjugate in (
            ("r4", ket.r4, bra.r4, False),
            ("r3", ket.r3, bra.r3, False),
            ("r2", ket.r2, bra.r2, True),
            ("r1", ket.r1, bra.r1, True)):
        target, tensor = _insertion(ket_label, conjugate)
        if target != bra_label:
            return 0.0
        ins[name] = tensor
    ktl, ktr, kbl, kbr = _vertex_arrays(ket)
    btl, btr, bbl, bbr = _vertex_arrays(bra)
    # ket indices:  hC1=a tT=b hVl=c | hT=d tC2=e hVr=f | hC3=g tB=h tVl=i
    #               hB=j tC4=k tVr=l
    # bra indices:  tT'=B hVl'=C hT'=D hVr'=F tB'=H tVl'=I hB'=J tVr'=L
    # color loop:   alpha1=w (BL), alpha2=x (BR), alpha3=y (TR), alpha4=z (TL)
    # insertions:   O_B[tB',hB',a1,a2,tB,hB], O_Vr[tVr',hVr',a2,a3,tVr,hVr],
    #               O_T[tT',hT',a4,a3,tT,hT], O_Vl[tVl',hVl',a1,a4,tVl,hVl]
    val = np.einsum(
        "abc,def,ghi,jkl,"          # ket vertices
        "aBC,DeF,gHI,JkL,"          # bra vertices (context legs shared)
        "HJwxhj,LFxylf,BDzybd,ICwzic->",
        ktl, ktr, kbl, kbr,
        btl, btr, bbl, bbr,
        ins["r4"], ins["r3"], ins["r2"], ins["r1"],
        optimize=True)
    norm = np.sqrt(_patch_norm_sq(bra.key()) * _patch_norm_sq(ket.key()))
    return float(val) / norm


def plaquette_matrix_element(bra: Patch, ket: Patch) -> float:
    """<bra| box |ket> for one plaquette with its 4-link context.

    Zero when the context links differ, when either configuration violates
    Gauss's law, or when the transition is not reachable by a single
    fundamental insertion on every loop link.
    """
    return _box_element_cached(bra.key(), ket.key())
