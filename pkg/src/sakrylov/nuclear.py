"""Pairing plus quadrupole-quadrupole interaction in an oscillator valence space."""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from importlib import resources
from itertools import combinations
from typing import Sequence

from .angular import clebsch_gordan, gaunt
from .fock import TABLE_ATOL, SqHamiltonian, hermitize, read_table_rows


@dataclass(frozen=True)
class SpOrbital:
    n: int
    l: int
    twice_j: int
    twice_m: int
    twice_tau: int = -1

    def __post_init__(self):
        if self.n < 0 or self.l < 0:
            raise ValueError("n and l must be non-negative")
        if self.twice_j not in (2 * self.l + 1, 2 * self.l - 1) or self.twice_j < 0:
            raise ValueError(f"2j={self.twice_j} incompatible with l={self.l}")
        if abs(self.twice_m) > self.twice_j or (self.twice_j - self.twice_m) % 2:
            raise ValueError(f"2m={self.twice_m} invalid for 2j={self.twice_j}")
        if self.twice_tau not in (-1, 1):
            raise ValueError("twice_tau must be +1 or -1")

    @property
    def time_reversed(self) -> "SpOrbital":
        return SpOrbital(self.n, self.l, self.twice_j, -self.twice_m, self.twice_tau)

    @property
    def xi(self) -> int:
        """Pairing phase ``(-1)^(j - m)``."""
        return -1 if ((self.twice_j - self.twice_m) // 2) % 2 else 1


@dataclass(frozen=True)
class ModelParams:
    g: float = 0.147439
    chi: float = -3.934e8
    hbar_omega: float = 12.0
    m_n: float = 938.919

    def __post_init__(self):
        if self.hbar_omega <= 0 or self.m_n <= 0:
            raise ValueError("hbar_omega and m_n must be positive")

    @property
    def r0(self) -> float:
        """Oscillator length in MeV^-1 (natural units)."""
        return 1.0 / math.sqrt(self.m_n * self.hbar_omega)

    @classmethod
    def from_dict(cls, d: dict) -> "ModelParams":
        unknown = set(d) - {"g", "chi", "hbar_omega", "m_n"}
        if unknown:
            raise ValueError(f"unknown model parameters: {sorted(unknown)}")
        return cls(**{k: float(v) for k, v in d.items()})

    def to_dict(self) -> dict:
        return asdict(self)


def radial_integral_r2(n_p: int, l_p: int, n_q: int, l_q: int) -> float:
    """``int R_{n_p l_p} r^2 R_{n_q l_q} r^2 dr`` in units of ``r0^2``."""
    val = 0.0
    if l_p == l_q:
        if n_p == n_q:
            val += 2 * n_p + l_p + 1.5
        if n_p == n_q - 1:
            val -= math.sqrt((n_p + l_p + 1.5) * (n_p + 1))
        if n_p == n_q + 1:
            val -= math.sqrt((n_q + l_q + 1.5) * (n_q + 1))
    elif l_q == l_p + 2:
        if n_p == n_q:
            val += math.sqrt((n_q + l_p + 1.5) * (n_q + l_p + 2.5))
        if n_p == n_q + 1:
            val -= 2 * math.sqrt((n_q + 1) * (n_q + l_p + 2.5))
        if n_p == n_q + 2:
            val += math.sqrt((n_q + 1) * (n_q + 2))
    elif l_p == l_q + 2:
        if n_p == n_q:
            val += math.sqrt((n_p + l_q + 1.5) * (n_p + l_q + 2.5))
        if n_q == n_p + 1:
            val -= 2 * math.sqrt((n_p + 1) * (n_p + l_q + 2.5))
        if n_q == n_p + 2:
            val += math.sqrt((n_p + 1) * (n_p + 2))
    return val


def quadrupole_me(p: SpOrbital, q: SpOrbital, sigma: int, r0: float = 1.0) -> float:
    """``<p| r^2 Y_{2 sigma} |q>``; with the default ``r0`` the result is in ``r0^2`` units."""
    if abs(sigma) > 2:
        raise ValueError("sigma must lie in [-2, 2]")
    if p.twice_tau != q.twice_tau or p.twice_m != q.twice_m + 2 * sigma:
        return 0.0
    radial = radial_integral_r2(p.n, p.l, q.n, q.l)
    if radial == 0.0:
        return 0.0
    angular = 0.0
    for tms in (1, -1):
        tml_p, tml_q = p.twice_m - tms, q.twice_m - tms
        if abs(tml_p) > 2 * p.l or abs(tml_q) > 2 * q.l:
            continue
        cg = clebsch_gordan(2 * p.l, tml_p, 1, tms, p.twice_j, p.twice_m) * clebsch_gordan(
            2 * q.l, tml_q, 1, tms, q.twice_j, q.twice_m
        )
        if cg:
            angular += cg * gaunt(p.l, tml_p // 2, 2, sigma, q.l, tml_q // 2)
    return radial * angular * r0 * r0


def _qq_direct(p, q, u, v) -> float:
    # sum_mu <p|Q_mu|u><q|Q*_mu|v>,  Q*_mu = (-1)^mu Q_{-mu}
    return sum(
        (-1) ** (mu % 2) * quadrupole_me(p, u, mu) * quadrupole_me(q, v, -mu) for mu in range(-2, 3)
    )


def qq_antisymmetrized(p, q, u, v) -> float:
    """Direct minus exchange Q.Q element in ``r0^4`` units, any index order."""
    return _qq_direct(p, q, u, v) - _qq_direct(p, q, v, u)


def pairing_me(p, q, u, v, g: float) -> float:
    """Time-reversed pair scattering; ``-g xi_p xi_u`` when ``q = p~`` and ``v = u~``."""
    if q != p.time_reversed or v != u.time_reversed:
        return 0.0
    return -g * p.xi * u.xi


def two_body_me(p: SpOrbital, q: SpOrbital, u: SpOrbital, v: SpOrbital, params: ModelParams) -> float:
    """Antisymmetrized ``<pq|H|uv>`` in MeV.

    The Q.Q interaction runs over ordered nucleon pairs, hence the factor 2
    on the direct-minus-exchange combination. Both terms carry ``g``.
    """
    qq = qq_antisymmetrized(p, q, u, v)
    r0 = params.r0
    return pairing_me(p, q, u, v, params.g) + 2.0 * params.g * params.chi * r0**4 * qq


def two_body_terms(orbitals: Sequence[SpOrbital], params: ModelParams, cutoff: float = 1e-12):
    """Rows ``(p, q, u, v, value)`` over ``p<q``, ``u<v`` with ``|value| > cutoff``."""
    rows = []
    pairs = list(combinations(range(len(orbitals)), 2))
    for p, q in pairs:
        for u, v in pairs:
            val = two_body_me(orbitals[p], orbitals[q], orbitals[u], orbitals[v], params)
            if abs(val) > cutoff:
                rows.append((p, q, u, v, val))
    return rows


def build_valence_hamiltonian(orbitals: Sequence[SpOrbital], params: ModelParams) -> SqHamiltonian:
    rows = two_body_terms(orbitals, params)
    return hermitize([((p, q), (u, v), val) for p, q, u, v, val in rows], len(orbitals))


# -- bundled reference data -----------------------------------------------------

def _data(name: str):
    return resources.files("sakrylov").joinpath("data").joinpath(name)


def orbitals_from_json(data) -> list[SpOrbital]:
    try:
        return [SpOrbital(int(o["n"]), int(o["l"]), int(o["twice_j"]), int(o["twice_m"]),
                          int(o.get("twice_tau", -1))) for o in data]
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed valence-space document: {exc}") from exc


def f72_orbitals() -> list[SpOrbital]:
    """The eight ``0f7/2`` neutron orbitals in qubit order."""
    with _data("sp_basis_f72.json").open() as fh:
        return orbitals_from_json(json.load(fh))


def default_params() -> ModelParams:
    with _data("model_params.json").open() as fh:
        return ModelParams.from_dict(json.load(fh))


def reference_two_body_rows() -> list[tuple[int, int, int, int, int, float]]:
    with resources.as_file(_data("f72_two_body.csv")) as path:
        return read_table_rows(path)


def reference_hamiltonian() -> SqHamiltonian:
    rows = reference_two_body_rows()
    return hermitize([((p, q), (u, v), val) for _, p, q, u, v, val in rows], 8, atol=TABLE_ATOL)


def reference_spectra() -> dict:
    with _data("ca_spectra.json").open() as fh:
        return json.load(fh)


def orbital_2m(orbitals: Sequence[SpOrbital]) -> list[int]:
    return [o.twice_m for o in orbitals]
