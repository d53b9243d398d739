"""Chebyshev moments by qubitization and the canonical-orthogonalization solve.

Moments ``mu_k = <psi0| T_k(H') |psi0>`` come from alternating ``U_H Pi`` and
``U_H^+ Pi`` on ``|psi0>|0>_a``::

    mu_2k   = <psi0,0| (U^+ Pi U Pi)^k |psi0,0>
    mu_2k+1 = <psi0,0| U Pi (U^+ Pi U Pi)^k |psi0,0>

The Krylov Hamiltonian and overlap matrices in the basis ``T_i(H')|psi0>``
follow from the product rule ``T_i T_j = (T_{i+j} + T_{|i-j|}) / 2``.
"""
from __future__ import annotations

import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Iterator, Sequence

import numpy as np

from .encoding import WalkOperator
from .fock import FockState, SqHamiltonian, SymmetrySector, apply_bits, build_fci_matrix, enumerate_sector
from .statevector import SparseState, inner_product

DEFAULT_XI = 1e-12
DEFAULT_TOL = 1e-9
WORKERS_ENV = "SAKRYLOV_WORKERS"


class EmptyRetainedSpace(ValueError):
    """Every overlap eigenvalue fell at or below the truncation threshold."""


@dataclass
class KrylovConfig:
    """Solver settings. ``n_krylov=None`` selects the doubling schedule."""

    n_krylov: int | None = None
    xi: float = DEFAULT_XI
    tol: float = DEFAULT_TOL
    max_factor: int = 4
    pivot: FockState | None = None
    sector: SymmetrySector | None = None
    gamma0: float | None = None
    delta: float | None = None
    target_error: float | None = None

    def __post_init__(self):
        if self.n_krylov is not None and self.n_krylov < 1:
            raise ValueError("n_krylov must be >= 1")
        if self.xi <= 0:
            raise ValueError("xi must be positive")
        if self.max_factor < 1:
            raise ValueError("max_factor must be >= 1")


def walk_sequence(walk: WalkOperator, pivot: FockState) -> Iterator[tuple[SparseState, SparseState]]:
    """Yield ``(|psi0,0>, W_k |psi0,0>)`` for ``k = 0, 1, 2, ...``."""
    ref = walk.fock_state(pivot)
    phi = ref
    yield ref, phi
    k = 0
    while True:
        phi = walk.apply_U_H(walk.apply_reflection_Pi(phi), dagger=bool(k % 2))
        k += 1
        yield ref, phi


def compute_moments(walk: WalkOperator, pivot: FockState, n_moments: int) -> np.ndarray:
    """``mu_0 .. mu_{n_moments-1}`` by sparse simulation."""
    if n_moments < 1:
        return np.zeros(0, dtype=complex)
    out = np.empty(n_moments, dtype=complex)
    for k, (ref, phi) in zip(range(n_moments), walk_sequence(walk, pivot)):
        out[k] = inner_product(ref, phi)
    return out


def classical_moments(matrix: np.ndarray, vector: np.ndarray, n_moments: int) -> np.ndarray:
    """Three-term Chebyshev recurrence on an explicit matrix."""
    v = np.asarray(vector, dtype=complex)
    out = np.empty(n_moments, dtype=complex)
    t_prev, t_cur = None, v.copy()
    for k in range(n_moments):
        out[k] = np.vdot(v, t_cur)
        if k == 0:
            t_next = matrix @ t_cur
        else:
            t_next = 2 * (matrix @ t_cur) - t_prev
        t_prev, t_cur = t_cur, t_next
    return out


@dataclass
class HadamardEstimate:
    order: int
    shots: int | None
    re: float
    im: float
    re_se: float
    im_se: float
    p0_re: float
    p0_im: float


def hadamard_probabilities(walk: WalkOperator, pivot: FockState, order: int) -> tuple[float, float]:
    """Exact control-qubit ``P(0)`` for the real and imaginary Hadamard tests.

    The controlled walk leaves ``P(0) = |psi + W psi|^2 / 4`` (real part) and
    ``|psi - i W psi|^2 / 4`` (imaginary part, ``S^+`` on the control).
    """
    if order < 0:
        raise ValueError("order must be >= 0")
    for _, (ref, phi) in zip(range(order + 1), walk_sequence(walk, pivot)):
        pass
    p0_re = min(1.0, max(0.0, (ref + phi).norm() ** 2 / 4))
    p0_im = min(1.0, max(0.0, (ref + phi.scaled(-1j)).norm() ** 2 / 4))
    return p0_re, p0_im


def sample_hadamard(p0_re: float, p0_im: float, order: int, shots: int | None,
                    rng: np.random.Generator | None = None) -> HadamardEstimate:
    """Binomial shot sampling of both tests; ``shots=None`` is the infinite-shot limit."""
    if shots is None:
        return HadamardEstimate(order, None, 2 * p0_re - 1, 2 * p0_im - 1, 0.0, 0.0, p0_re, p0_im)
    if shots < 1:
        raise ValueError("shots must be >= 1")
    rng = rng if rng is not None else np.random.default_rng()
    est = []
    for p0 in (p0_re, p0_im):
        x = 2 * rng.binomial(shots, p0) / shots - 1
        est.append((x, math.sqrt(max(0.0, 1 - x * x) / shots)))
    (re, re_se), (im, im_se) = est
    return HadamardEstimate(order, shots, re, im, re_se, im_se, p0_re, p0_im)


def hadamard_test_estimate(walk: WalkOperator, pivot: FockState, order: int, shots: int | None = None,
                           seed=None, rng: np.random.Generator | None = None) -> HadamardEstimate:
    """Shot-sampled Hadamard-test estimate of ``mu_order`` with standard errors."""
    if shots is not None and shots < 1:
        raise ValueError("shots must be >= 1")
    p0_re, p0_im = hadamard_probabilities(walk, pivot, order)
    return sample_hadamard(p0_re, p0_im, order, shots, rng if rng is not None else np.random.default_rng(seed))


@dataclass
class KrylovMatrices:
    hp: np.ndarray
    upsilon: np.ndarray


def assemble_matrices(moments: Sequence[complex], n_krylov: int) -> KrylovMatrices:
    mu = np.asarray(moments, dtype=complex)
    if n_krylov < 1:
        raise ValueError("n_krylov must be >= 1")
    if len(mu) < 2 * n_krylov:
        raise ValueError(f"K={n_krylov} needs moments up to order {2 * n_krylov - 1}, got {len(mu) - 1}")
    i, j = np.indices((n_krylov, n_krylov))
    hp = 0.25 * (mu[i + j + 1] + mu[np.abs(i + j - 1)] + mu[np.abs(i - j + 1)] + mu[np.abs(i - j - 1)])
    ups = 0.5 * (mu[i + j] + mu[np.abs(i - j)])
    hp = 0.5 * (hp + hp.conj().T)
    ups = 0.5 * (ups + ups.conj().T)
    return KrylovMatrices(hp, ups)


def solve_co(km: KrylovMatrices, xi: float = DEFAULT_XI) -> tuple[np.ndarray, int]:
    """Canonical orthogonalization: eigenvalues of ``H'`` ascending and retained dimension."""
    if xi <= 0:
        raise ValueError("xi must be positive")
    vals, vecs = np.linalg.eigh(km.upsilon)
    keep = vals > xi
    if not np.any(keep):
        raise EmptyRetainedSpace(f"no overlap eigenvalue above xi={xi:g} (largest {vals.max():.3g})")
    w = vecs[:, keep] / np.sqrt(vals[keep])
    hpp = w.conj().T @ km.hp @ w
    hpp = 0.5 * (hpp + hpp.conj().T)
    return np.linalg.eigvalsh(hpp), int(keep.sum())


def krylov_bound_report(gamma0: float, delta: float, target_error: float) -> float:
    """``(log|gamma0|^-1 + log E^-1) * min(E^-1, Delta^-1)``, constant factor dropped."""
    if gamma0 == 0:
        raise ValueError("gamma0 must be nonzero")
    if delta <= 0:
        raise ValueError("spectral gap must be positive")
    if target_error <= 0:
        raise ValueError("target error must be positive")
    return (math.log(1 / abs(gamma0)) + math.log(1 / target_error)) * min(1 / target_error, 1 / delta)


# -- sector driver ------------------------------------------------------------------


@dataclass
class SectorResult:
    particle_number: int
    twice_mj: int | None
    dimension: int
    pivot: str | None = None
    n_krylov: int = 0
    retained: int = 0
    converged: bool = False
    energies: list[float] = field(default_factory=list)
    trace: list[dict] = field(default_factory=list)
    moments: list[complex] = field(default_factory=list)
    error: str | None = None
    seconds: float = 0.0

    @property
    def lowest(self) -> float:
        return self.energies[0] if self.energies else float("nan")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["moments"] = [[float(m.real), float(m.imag)] for m in self.moments]
        d["lowest"] = None if not self.energies else self.lowest
        return d


@dataclass
class SpectralResult:
    scale: float
    sectors: list[SectorResult]

    def lowest(self) -> np.ndarray:
        return np.array([s.lowest for s in self.sectors])

    def excitation(self) -> np.ndarray:
        e = self.lowest()
        finite = e[np.isfinite(e)]
        return e - finite.min() if finite.size else e


def fci_diagonal(h: SqHamiltonian, basis: Sequence[FockState]) -> np.ndarray:
    diag = np.zeros(len(basis))
    for i, f in enumerate(basis):
        for m in h.monomials:
            if m.is_diagonal:
                res = apply_bits(m.creations, m.annihilations, f.bits)
                if res is not None:
                    diag[i] += res[0] * m.coefficient.real
    return diag


def select_pivot(h: SqHamiltonian, basis: Sequence[FockState]) -> FockState:
    """Lowest diagonal energy; ties go to the smallest bit pattern."""
    diag = fci_diagonal(h, basis)
    best = min(range(len(basis)), key=lambda i: (round(diag[i], 12), basis[i].bits))
    return basis[best]


def _solve_one(walk: WalkOperator, sector: SymmetrySector, orbital_2m, cfg: KrylovConfig) -> SectorResult:
    t0 = time.perf_counter()
    h = walk.hamiltonian
    basis = enumerate_sector(h.n_sp, sector, orbital_2m)
    res = SectorResult(sector.particle_number, sector.twice_mj, len(basis))
    try:
        if not basis:
            raise ValueError("sector contains no Fock states")
        pivot = cfg.pivot if cfg.pivot is not None else select_pivot(h, basis)
        res.pivot = str(pivot)
        dim = len(basis)
        seq = walk_sequence(walk, pivot)
        mu: list[complex] = []

        def moments_to(n):
            while len(mu) < n:
                ref, phi = next(seq)
                mu.append(inner_product(ref, phi))

        def solve(k):
            moments_to(2 * k)
            vals, kept = solve_co(assemble_matrices(mu, k), cfg.xi)
            res.trace.append({"K": k, "lowest": float(vals[0]) * h.scale, "retained": kept})
            return vals, kept

        if cfg.n_krylov is not None:
            k = cfg.n_krylov
            vals, kept = solve(k)
            res.converged = k >= dim
        else:
            # Doubling continues past the sector dimension: the redundant
            # directions are truncated by CO and average down moment round-off.
            k_max = cfg.max_factor * dim
            k = min(2, k_max)
            vals, kept = solve(k)
            while k < k_max:
                k_next = min(2 * k, k_max)
                new_vals, new_kept = solve(k_next)
                change = abs(new_vals[0] - vals[0])
                k, vals, kept = k_next, new_vals, new_kept
                if change < cfg.tol:
                    res.converged = True
                    break
            res.converged = res.converged or k >= dim
        res.n_krylov = k
        res.retained = kept
        res.energies = [float(v) * h.scale for v in vals]
        res.moments = [complex(m) for m in mu[: 2 * k]]
    except Exception as exc:  # recorded per sector, other sectors carry on
        res.error = f"{type(exc).__name__}: {exc}"
    res.seconds = time.perf_counter() - t0
    return res


def default_workers() -> int:
    try:
        return max(1, int(os.environ.get(WORKERS_ENV, "1")))
    except ValueError:
        return 1


def solve_sector_spectrum(h: SqHamiltonian | WalkOperator, sectors: Sequence[SymmetrySector], orbital_2m=None,
                          cfg: KrylovConfig | None = None, workers: int | None = None) -> SpectralResult:
    """Lowest energy per symmetry sector via moments, assembly and CO."""
    walk = h if isinstance(h, WalkOperator) else WalkOperator.compile(h)
    cfg = cfg or KrylovConfig()
    workers = workers or default_workers()
    if workers > 1 and len(sectors) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda s: _solve_one(_fresh(walk), s, orbital_2m, cfg), sectors))
    else:
        results = [_solve_one(walk, s, orbital_2m, cfg) for s in sectors]
    return SpectralResult(walk.scale, results)


def _fresh(walk: WalkOperator) -> WalkOperator:
    # per-thread copy so run statistics are not shared
    return WalkOperator(walk.hamiltonian, walk.layout, walk.circuit_Tf, walk.circuit_Tb, walk.circuit_S)


def fci_sector_energies(h: SqHamiltonian, sector: SymmetrySector, orbital_2m=None) -> np.ndarray:
    """Exact eigenvalues in a sector (MeV), the classical reference."""
    basis = enumerate_sector(h.n_sp, sector, orbital_2m)
    if not basis:
        return np.zeros(0)
    return np.linalg.eigvalsh(build_fci_matrix(h, basis))
