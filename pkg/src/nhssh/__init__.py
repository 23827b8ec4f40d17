"""Staggered Hermitian / non-Hermitian SSH chain: spectra, EPs, Zak phase, edge modes."""

__version__ = "0.1.0"

from .lattice import (
    ModelParams,
    CriticalPoints,
    SymmetryResiduals,
    hopping_amplitudes,
    bloch_hamiltonian,
    analytic_eigenvalues,
    numeric_eigenvalues,
    ep1_locus,
    ep2_locus,
    critical_points,
    symmetry_residuals,
)

__all__ = [
    "ModelParams", "CriticalPoints", "SymmetryResiduals", "hopping_amplitudes",
    "bloch_hamiltonian", "analytic_eigenvalues", "numeric_eigenvalues",
    "ep1_locus", "ep2_locus", "critical_points", "symmetry_residuals",
]
