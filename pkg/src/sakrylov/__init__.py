"""Block-encoded many-fermion Hamiltonians and symmetry-adapted Krylov spectra."""

__version__ = "0.1.0"

from .encoding import WalkOperator, verify_block_encoding
from .estimator import SectorKrylovSolver
from .fock import FockState, Monomial, SqHamiltonian, SymmetrySector, hermitize
from .krylov import KrylovConfig, compute_moments, solve_sector_spectrum
from .nuclear import ModelParams, SpOrbital, build_valence_hamiltonian

__all__ = [
    "FockState",
    "KrylovConfig",
    "ModelParams",
    "Monomial",
    "SectorKrylovSolver",
    "SpOrbital",
    "SqHamiltonian",
    "SymmetrySector",
    "WalkOperator",
    "build_valence_hamiltonian",
    "compute_moments",
    "hermitize",
    "solve_sector_spectrum",
    "verify_block_encoding",
]
