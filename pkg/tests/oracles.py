"""Independent reference implementations used only by the tests."""
from __future__ import annotations

import math

import numpy as np
from scipy import integrate, special

from sakrylov.fock import hermitize

# -- dense statevector ------------------------------------------------------------

_MATS = {
    "X": lambda t: np.array([[0, 1], [1, 0]], complex),
    "Z": lambda t: np.array([[1, 0], [0, -1]], complex),
    "H": lambda t: np.array([[1, 1], [1, -1]], complex) / math.sqrt(2),
    "P0": lambda t: np.array([[np.exp(1j * t), 0], [0, 1]], complex),
    "RY": lambda t: np.array([[math.cos(t / 2), -math.sin(t / 2)], [math.sin(t / 2), math.cos(t / 2)]], complex),
}


def dense_gate_matrix(gate, width: int) -> np.ndarray:
    """Full ``2^w x 2^w`` matrix built column by column from the gate definition."""
    dim = 1 << width
    u = np.zeros((dim, dim), complex)
    for col in range(dim):
        active = all((col >> c & 1) == p for c, p in zip(gate.controls, gate.polarity))
        if not active:
            u[col, col] = 1
        elif gate.kind == "SWAP":
            a, b = gate.targets
            ba, bb = col >> a & 1, col >> b & 1
            row = col & ~((1 << a) | (1 << b)) | (bb << a) | (ba << b)
            u[row, col] = 1
        else:
            t = gate.targets[0]
            m = _MATS[gate.kind](gate.param)
            bit = col >> t & 1
            for out in (0, 1):
                row = col & ~(1 << t) | (out << t)
                u[row, col] += m[out, bit]
    return u


def dense_run(circuit, vec: np.ndarray, width: int) -> np.ndarray:
    for g in circuit:
        vec = dense_gate_matrix(g, width) @ vec
    return vec


# -- oscillator radial functions ----------------------------------------------------


def ho_radial(n: int, l: int, r):
    """Normalized oscillator radial function (unit length), positive near the origin."""
    norm = math.sqrt(2 * math.factorial(n) / math.gamma(n + l + 1.5))
    return norm * r**l * np.exp(-r * r / 2) * special.eval_genlaguerre(n, l + 0.5, r * r)


def radial_r2_quad(n_p, l_p, n_q, l_q) -> float:
    f = lambda r: ho_radial(n_p, l_p, r) * r**2 * ho_radial(n_q, l_q, r) * r**2  # noqa: E731
    val, _ = integrate.quad(f, 0, 30, limit=200, epsabs=1e-13)
    return val


def gaunt_quad(l1, m1, l2, m2, l3, m3, n=64) -> float:
    """``int Y*_{l1 m1} Y_{l2 m2} Y_{l3 m3} dOmega`` by Gauss-Legendre x uniform phi."""
    x, w = np.polynomial.legendre.leggauss(n)
    phi = np.linspace(0, 2 * np.pi, 2 * n, endpoint=False)
    theta = np.arccos(x)
    tt, pp = np.meshgrid(theta, phi, indexing="ij")

    def y(l, m):
        # Condon-Shortley spherical harmonic from associated Legendre (scipy includes the phase)
        norm = math.sqrt((2 * l + 1) / (4 * math.pi) * math.factorial(l - abs(m)) / math.factorial(l + abs(m)))
        plm = special.lpmv(abs(m), l, np.cos(tt))
        val = norm * plm * np.exp(1j * abs(m) * pp)
        return val if m >= 0 else (-1) ** abs(m) * np.conj(val)

    integrand = np.conj(y(l1, m1)) * y(l2, m2) * y(l3, m3)
    return float(np.real(np.sum(integrand * w[:, None]) * (2 * np.pi / len(phi))))


# -- spectral references --------------------------------------------------------------


def chebyshev_spectral(matrix: np.ndarray, vec: np.ndarray, n: int) -> np.ndarray:
    """``<v|T_k(M)|v> = sum_i |c_i|^2 cos(k arccos lambda_i)``."""
    vals, vecs = np.linalg.eigh(matrix)
    weights = np.abs(vecs.conj().T @ vec) ** 2
    ang = np.arccos(np.clip(vals, -1, 1))
    return np.array([np.sum(weights * np.cos(k * ang)) for k in range(n)])


def krylov_direct(matrix: np.ndarray, vec: np.ndarray, k: int):
    """``H'_ij = <T_i v|M|T_j v>`` and ``S_ij = <T_i v|T_j v>`` from explicit vectors."""
    basis = [vec.astype(complex), matrix @ vec]
    while len(basis) < k:
        basis.append(2 * matrix @ basis[-1] - basis[-2])
    b = np.column_stack(basis[:k])
    return b.conj().T @ matrix @ b, b.conj().T @ b


# -- random Hamiltonians --------------------------------------------------------------


def random_two_body(rng: np.random.Generator, n_sp: int, n_terms: int, complex_coeffs=True, one_body=True):
    """Random Hermitian particle-number-conserving Hamiltonian."""
    terms = {}
    pairs = [(a, b) for a in range(n_sp) for b in range(a + 1, n_sp)]
    for _ in range(n_terms):
        q = pairs[rng.integers(len(pairs))]
        p = pairs[rng.integers(len(pairs))]
        if (q, p) in terms or (p, q) in terms:
            continue
        c = rng.normal() + (1j * rng.normal() if complex_coeffs and q != p else 0)
        terms[(q, p)] = c
    if one_body:
        for _ in range(max(1, n_terms // 3)):
            q, p = (int(rng.integers(n_sp)),), (int(rng.integers(n_sp)),)
            if (q, p) in terms or (p, q) in terms:
                continue
            terms[(q, p)] = rng.normal() + (1j * rng.normal() if complex_coeffs and q != p else 0)
    return hermitize([(q, p, c) for (q, p), c in terms.items()], n_sp)
