"""Variational and tensor-network tools for SU(3) plaquette chains.

Modules:

* multiplet, recoupling: irrep data, vertex singlet tensors, plaquette
  matrix elements in the spin-network basis.
* hamiltonians: single plaquette (truncated multiplet basis), CP-even
  projections, and Gauss-projected plaquette chains.
* encoding: two-qubit Pauli encodings and measurement grouping.
* statevector: small dense circuit simulator (Ry/CNOT/plane rotations).
* spectral: exact diagonalization and Lanczos/Krylov initialization.
* ansatz: hyperspherical, two-qubit, and chain Givens-rotation circuits.
* optimizers, bayesopt: shift-rule gradient descent and GP Bayesian
  optimization.
* mps: blocked-site iTEBD for the infinite chain and domain stitching.
* experiments, cli: reproducible experiment runners and their CLI.
"""

__version__ = "0.1.0"
