"""Argument checks shared by the estimator and the CLI."""
from __future__ import annotations

from numbers import Integral
from typing import Iterable

from .fock import SqHamiltonian, SymmetrySector


def check_hamiltonian(h) -> SqHamiltonian:
    if not isinstance(h, SqHamiltonian):
        raise TypeError(f"expected SqHamiltonian, got {type(h).__name__}")
    if h.d == 0:
        raise ValueError("Hamiltonian has no terms")
    return h


def check_orbital_2m(orbital_2m, n_sp: int):
    if orbital_2m is None:
        return None
    values = [int(v) for v in orbital_2m]
    if len(values) != n_sp:
        raise ValueError(f"orbital_2m has {len(values)} entries, expected {n_sp}")
    return values


def check_sectors(sectors, n_sp: int, orbital_2m=None) -> list[SymmetrySector]:
    """Accept ``SymmetrySector`` objects, ``(A, 2M)`` pairs or bare particle numbers."""
    if isinstance(sectors, (SymmetrySector, Integral)):
        sectors = [sectors]
    out = []
    for s in _iterate(sectors):
        if isinstance(s, SymmetrySector):
            sec = s
        elif isinstance(s, Integral):
            sec = SymmetrySector(int(s))
        else:
            a, m = s
            sec = SymmetrySector(int(a), None if m is None else int(m))
        if not 0 <= sec.particle_number <= n_sp:
            raise ValueError(f"particle number {sec.particle_number} outside [0, {n_sp}]")
        if sec.twice_mj is not None and orbital_2m is None:
            raise ValueError("an M_J sector needs orbital_2m")
        out.append(sec)
    if not out:
        raise ValueError("no sectors given")
    return out


def _iterate(x) -> Iterable:
    try:
        return iter(x)
    except TypeError:
        raise TypeError(f"sectors must be iterable, got {type(x).__name__}") from None
