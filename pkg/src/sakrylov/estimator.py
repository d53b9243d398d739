"""Estimator-style wrapper around the sector Krylov solver."""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ._validation import check_hamiltonian, check_orbital_2m, check_sectors
from .encoding import WalkOperator
from .krylov import DEFAULT_TOL, DEFAULT_XI, KrylovConfig, solve_sector_spectrum


class SectorKrylovSolver(BaseEstimator):
    """Lowest eigenvalue per symmetry sector from walk-operator moments.

    ``fit`` compiles the block encoding of a Hamiltonian; ``predict`` takes a
    list of sectors and returns their lowest energies in MeV. The full
    :class:`~sakrylov.krylov.SpectralResult` of the last call is kept in
    ``spectrum_``.

    Examples
    --------
    >>> from sakrylov.nuclear import reference_hamiltonian, f72_orbitals, orbital_2m
    >>> est = SectorKrylovSolver(orbital_2m=orbital_2m(f72_orbitals()))
    >>> est.fit(reference_hamiltonian()).predict([(2, 0)]).round(4)
    array([-2.3428])
    """

    def __init__(self, n_krylov=None, xi=DEFAULT_XI, tol=DEFAULT_TOL, max_factor=4, orbital_2m=None, workers=None):
        self.n_krylov = n_krylov
        self.xi = xi
        self.tol = tol
        self.max_factor = max_factor
        self.orbital_2m = orbital_2m
        self.workers = workers

    def fit(self, X, y=None):
        h = check_hamiltonian(X)
        self.orbital_2m_ = check_orbital_2m(self.orbital_2m, h.n_sp)
        self.config_ = KrylovConfig(n_krylov=self.n_krylov, xi=self.xi, tol=self.tol, max_factor=self.max_factor)
        self.walk_ = WalkOperator.compile(h)
        self.scale_ = self.walk_.scale
        self.n_sp_ = h.n_sp
        return self

    def solve(self, sectors):
        check_is_fitted(self, "walk_")
        secs = check_sectors(sectors, self.n_sp_, self.orbital_2m_)
        self.spectrum_ = solve_sector_spectrum(self.walk_, secs, self.orbital_2m_, self.config_, self.workers)
        return self.spectrum_

    def predict(self, X):
        return self.solve(X).lowest()

    def excitation(self, X) -> np.ndarray:
        return self.solve(X).excitation()
